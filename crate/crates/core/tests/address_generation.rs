use pathlab_core::addrgen::AddressStream;
use pathlab_core::stats::{chi_square_counts, PathLengthHistogram};
use pathlab_core::{generate, Address, GeneratorConfig, GeneratorMode};

/// Chi-square of first-nibble frequencies against the uniform 1/16.
fn first_nibble_p_value(addrs: impl Iterator<Item = Address>) -> f64 {
    // path length k <-> nibble value k - 1
    let h: PathLengthHistogram = addrs.map(|a| a.nibble(0) as u32 + 1).collect();
    chi_square_counts(&h, &[1.0 / 16.0; 16], 5.0).unwrap().p_value
}

#[test]
fn per_position_frequencies_are_near_uniform() {
    let n = 10_000;
    let addrs = generate(&GeneratorConfig { mode: GeneratorMode::Uniform, seed: 2024, count: n });
    let p = 1.0 / 16.0;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    for pos in 0..40 {
        let mut counts = [0usize; 16];
        for a in &addrs {
            counts[a.nibble(pos) as usize] += 1;
        }
        for (digit, &c) in counts.iter().enumerate() {
            let freq = c as f64 / n as f64;
            assert!((freq - p).abs() <= 4.0 * sigma, "pos {pos} digit {digit}: {freq}");
        }
    }
}

#[test]
fn uniform_mode_passes_first_nibble_test() {
    let p = first_nibble_p_value(AddressStream::new(GeneratorMode::Uniform, 11).take(100_000));
    assert!(p >= 0.001, "p = {p}");
}

#[test]
fn crypto_mode_passes_first_nibble_test() {
    let p = first_nibble_p_value(AddressStream::new(GeneratorMode::Crypto, 11).take(100_000));
    assert!(p >= 0.001, "p = {p}");
}

#[test]
fn crypto_mode_is_reproducible() {
    let cfg = GeneratorConfig { mode: GeneratorMode::Crypto, seed: 5, count: 8 };
    let a = generate(&cfg);
    assert_eq!(a, generate(&cfg));
    let uniform = generate(&GeneratorConfig { mode: GeneratorMode::Uniform, ..cfg });
    assert_ne!(a, uniform);
}
