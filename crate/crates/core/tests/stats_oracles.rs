use pathlab_core::model::{self, ModelParams};
use pathlab_core::reference::TABLES;
use pathlab_core::stats::{self, chi_square_counts, chi_square_paper, p_value, PathLengthHistogram};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn p_value_agrees_with_statrs() {
    for dof in [1usize, 2, 3, 4, 5, 7, 10, 25, 60, 150] {
        let dist = ChiSquared::new(dof as f64).unwrap();
        for &x in &[1e-4, 0.01, 0.5, 1.0, 2.5, 5.0, 10.0, 30.0, 80.0, 200.0] {
            let ours = p_value(x, dof).unwrap();
            let theirs = dist.sf(x);
            let tol = 1e-8 * theirs.max(1e-300);
            assert!((ours - theirs).abs() <= tol.max(1e-14), "dof={dof} x={x}: {ours} vs {theirs}");
        }
    }
}

#[test]
fn p_value_two_dof_closed_form() {
    for i in 0..200 {
        let x = i as f64 * 0.37;
        let expected = (-x / 2.0).exp();
        assert!((p_value(x, 2).unwrap() - expected).abs() <= 1e-8 * expected.max(1e-300) + 1e-16);
    }
}

proptest! {
    #[test]
    fn p_value_decreases_in_statistic(a in 0.0f64..300.0, b in 0.0f64..300.0, dof in 1usize..60) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(p_value(lo, dof).unwrap() >= p_value(hi, dof).unwrap());
    }

    #[test]
    fn merge_is_a_commutative_monoid(
        a in prop::collection::vec(0u32..45, 0..200),
        b in prop::collection::vec(0u32..45, 0..200),
        c in prop::collection::vec(0u32..45, 0..200),
    ) {
        let (ha, hb, hc) = (
            stats::histogram_from_depths(&a),
            stats::histogram_from_depths(&b),
            stats::histogram_from_depths(&c),
        );
        prop_assert_eq!(stats::merge(&ha, &hb), stats::merge(&hb, &ha));
        prop_assert_eq!(
            stats::merge(&stats::merge(&ha, &hb), &hc),
            stats::merge(&ha, &stats::merge(&hb, &hc))
        );
        prop_assert_eq!(stats::merge(&ha, &PathLengthHistogram::new()), ha.clone());
        prop_assert_eq!(stats::merge(&ha, &hb).total(), (a.len() + b.len()) as u64);
    }

    #[test]
    fn counts_statistic_ignores_insertion_order(
        mut depths in prop::collection::vec(1u32..9, 50..400),
        seed in any::<u64>(),
    ) {
        let model = model::distribution(&ModelParams::new(1000)).unwrap();
        let a = stats::histogram_from_depths(&depths);
        depths.shuffle(&mut StdRng::seed_from_u64(seed));
        let b = stats::histogram_from_depths(&depths);
        let ra = chi_square_counts(&a, &model.probabilities, 5.0);
        let rb = chi_square_counts(&b, &model.probabilities, 5.0);
        prop_assert_eq!(ra, rb);
    }

    #[test]
    fn probability_basis_statistic_is_zero_on_itself(v in prop::collection::vec(1e-6f64..1.0, 1..40)) {
        prop_assert_eq!(chi_square_paper(&v, &v).unwrap(), 0.0);
    }
}

#[test]
fn probability_basis_statistic_reproduces_reference() {
    for table in TABLES.iter() {
        let Some(expected) = table.chi_square else { continue };
        let stat = chi_square_paper(&table.observed(), &table.theoretical()).unwrap();
        assert!((stat - expected).abs() <= 1e-5, "n={}: {stat} vs {expected}", table.size);
        assert!(p_value(stat, table.rows.len() - 1).unwrap() >= 0.9999);
    }
}

#[test]
fn reference_max_differences() {
    for (table, (k, diff)) in [(&TABLES[0], (3, 0.021521)), (&TABLES[3], (5, 0.037195))] {
        let total = 10 * table.size;
        let observed = PathLengthHistogram::from_counts(
            table.rows.iter().map(|&(k, _, p)| (k, (p * total as f64).round() as u64)),
        );
        assert_eq!(observed.total(), total);
        let model = model::distribution(&ModelParams::new(table.size)).unwrap();
        let rows = stats::compare(&model, &observed);
        let worst = rows.iter().max_by(|a, b| a.difference.total_cmp(&b.difference)).unwrap();
        assert_eq!(worst.path_length, k);
        assert!((worst.difference - diff).abs() <= 5e-7, "{}", worst.difference);
    }
}

#[test]
fn perfect_match_has_zero_differences() {
    let model = model::distribution(&ModelParams::new(100)).unwrap();
    let observed = PathLengthHistogram::from_counts(model.iter().map(|(k, p)| (k, (p * 1e15).round() as u64)));
    assert!(stats::compare(&model, &observed).iter().all(|r| r.difference < 1e-12));
}
