//! Published reference distributions for the four simulated trie sizes.
//!
//! Each entry pairs a printed model probability with the observed probability
//! from 10 pooled trials. They are used to cross-check the probability-basis
//! chi-square and the table renderer, never as inputs to the simulation.

/// `(path_length, theoretical, observed)` rows for one trie size.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceTable {
    pub size: u64,
    pub rows: &'static [(u32, f64, f64)],
    /// Printed average path lengths `(theoretical, observed)`.
    pub averages: (f64, f64),
    /// Printed probability-basis chi-square statistic, if one was reported.
    pub chi_square: Option<f64>,
}

pub const TABLES: [ReferenceTable; 4] = [
    ReferenceTable {
        size: 100,
        rows: &[
            (1, 0.002386, 0.000000),
            (2, 0.690504, 0.684000),
            (3, 0.284479, 0.306000),
            (4, 0.021201, 0.010000),
            (5, 0.001340, 0.000000),
            (6, 0.000084, 0.000000),
        ],
        averages: (2.33, 2.33),
        chi_square: Some(0.011423),
    },
    ReferenceTable {
        size: 1_000,
        rows: &[
            (2, 0.025506, 0.020200),
            (3, 0.769895, 0.763500),
            (4, 0.190395, 0.214300),
            (5, 0.013310, 0.002000),
            (6, 0.000838, 0.000000),
            (7, 0.000052, 0.000000),
        ],
        averages: (3.19, 3.20),
        chi_square: Some(0.014662),
    },
    ReferenceTable {
        size: 10_000,
        rows: &[
            (3, 0.101360, 0.085860),
            (4, 0.765349, 0.786600),
            (5, 0.124390, 0.126340),
            (6, 0.008342, 0.001200),
            (7, 0.000524, 0.000000),
            (8, 0.000033, 0.000000),
        ],
        averages: (4.04, 4.04),
        chi_square: Some(0.009664),
    },
    ReferenceTable {
        size: 100_000,
        rows: &[
            (4, 0.239184, 0.217824),
            (5, 0.675289, 0.712484),
            (6, 0.079954, 0.069361),
            (7, 0.005223, 0.000331),
            (8, 0.000327, 0.000000),
            (9, 0.000020, 0.000000),
        ],
        averages: (4.85, 4.85),
        chi_square: None,
    },
];

/// Printed model probabilities `(n, [(k, P(k))])` for the analytic-only sizes
/// as well as the simulated ones.
pub const MODEL_VALUES: [(u64, &[(u32, f64)]); 4] = [
    (100, &[(1, 0.002386), (2, 0.690504), (3, 0.284479), (4, 0.021201), (5, 0.001340), (6, 0.000084), (7, 0.000005)]),
    (
        10_000,
        &[(3, 0.101360), (4, 0.765349), (5, 0.124390), (6, 0.008342), (7, 0.000524), (8, 0.000033), (9, 0.000002)],
    ),
    (
        1_000_000,
        &[
            (4, 0.000001),
            (5, 0.408987),
            (6, 0.536665),
            (7, 0.050860),
            (8, 0.003268),
            (9, 0.000205),
            (10, 0.000013),
            (11, 0.000001),
        ],
    ),
    (
        300_000_000,
        &[(7, 0.350730), (8, 0.585884), (9, 0.059301), (10, 0.003829), (11, 0.000240), (12, 0.000015), (13, 0.000001)],
    ),
];

/// Printed expected path lengths.
pub const EXPECTED_PATH_LENGTHS: [(u64, f64); 4] =
    [(100, 2.328879), (10_000, 4.041428), (1_000_000, 5.649078), (300_000_000, 7.717012)];

impl ReferenceTable {
    pub fn theoretical(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }

    pub fn observed(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.2).collect()
    }
}
