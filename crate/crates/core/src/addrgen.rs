//! Seeded address generation and the birthday collision bound.
//!
//! Two modes are offered. `Uniform` draws the 20 octets straight from the
//! generator. `Crypto` draws a secp256k1 private key and derives the address
//! the way an Ethereum wallet does. Both are driven by ChaCha12 with a 256-bit
//! key, so a `(mode, seed)` pair always yields the same sequence.

use std::fmt;
use std::str::FromStr;

use k256::elliptic_curve::sec1::ToEncodedPoint;
use k256::SecretKey;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha3::{Digest, Keccak256};
use thiserror::Error;

use crate::keyspace::{Address, ADDRESS_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorMode {
    #[default]
    Uniform,
    Crypto,
}

impl fmt::Display for GeneratorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorMode::Uniform => "uniform",
            GeneratorMode::Crypto => "crypto",
        })
    }
}

impl FromStr for GeneratorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(GeneratorMode::Uniform),
            "crypto" => Ok(GeneratorMode::Crypto),
            other => Err(format!("unknown generator mode {other:?} (expected uniform|crypto)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub mode: GeneratorMode,
    pub seed: u64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("private key is zero or not below the secp256k1 group order")]
pub struct InvalidKey;

/// Infinite stream of addresses for one `(mode, seed)` pair.
#[derive(Debug, Clone)]
pub struct AddressStream {
    mode: GeneratorMode,
    rng: ChaCha12Rng,
}

impl AddressStream {
    pub fn new(mode: GeneratorMode, seed: u64) -> Self {
        AddressStream { mode, rng: ChaCha12Rng::seed_from_u64(seed) }
    }
}

impl Iterator for AddressStream {
    type Item = Address;

    fn next(&mut self) -> Option<Address> {
        Some(match self.mode {
            GeneratorMode::Uniform => {
                let mut bytes = [0u8; ADDRESS_LEN];
                self.rng.fill_bytes(&mut bytes);
                Address::new(bytes)
            }
            GeneratorMode::Crypto => loop {
                let mut scalar = [0u8; 32];
                self.rng.fill_bytes(&mut scalar);
                // Rejection happens with probability ~2^-128.
                if let Ok(addr) = crypto_derive(&scalar) {
                    break addr;
                }
            },
        })
    }
}

/// Exactly `cfg.count` addresses; a pure function of `cfg`.
pub fn generate(cfg: &GeneratorConfig) -> Vec<Address> {
    AddressStream::new(cfg.mode, cfg.seed).take(cfg.count).collect()
}

/// Address of a secp256k1 private key: the last 20 octets of Keccak-256 over
/// the 64-octet `X || Y` public key (no `0x04` tag).
pub fn crypto_derive(private_key: &[u8; 32]) -> Result<Address, InvalidKey> {
    let secret = SecretKey::from_bytes(private_key.into()).map_err(|_| InvalidKey)?;
    let point = secret.public_key().to_encoded_point(false);
    let digest = Keccak256::digest(&point.as_bytes()[1..]);
    let mut bytes = [0u8; ADDRESS_LEN];
    bytes.copy_from_slice(&digest[32 - ADDRESS_LEN..]);
    Ok(Address::new(bytes))
}

/// Birthday bound `1 - exp(-n^2 / 2^161)` for a collision among `n` uniform
/// 160-bit addresses.
pub fn collision_probability(n: f64) -> f64 {
    assert!(n >= 0.0, "address count must be non-negative");
    let exponent = n * n / 2f64.powi(161);
    -(-exponent).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GROUP_ORDER: &str = "fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141";

    fn scalar(hex_str: &str) -> [u8; 32] {
        let mut out = [0u8; 32];
        out.copy_from_slice(&hex::decode(hex_str).unwrap());
        out
    }

    #[test]
    fn empty_batch() {
        let cfg = GeneratorConfig { mode: GeneratorMode::Uniform, seed: 9, count: 0 };
        assert!(generate(&cfg).is_empty());
    }

    #[test]
    fn generation_is_deterministic() {
        for mode in [GeneratorMode::Uniform, GeneratorMode::Crypto] {
            let cfg = GeneratorConfig { mode, seed: 42, count: 25 };
            assert_eq!(generate(&cfg), generate(&cfg));
            let other = GeneratorConfig { seed: 43, ..cfg };
            assert_ne!(generate(&cfg), generate(&other));
        }
    }

    #[test]
    fn prefix_of_longer_batch() {
        let short = GeneratorConfig { mode: GeneratorMode::Uniform, seed: 1, count: 10 };
        let long = GeneratorConfig { count: 20, ..short };
        assert_eq!(generate(&short)[..], generate(&long)[..10]);
    }

    #[test]
    fn key_one_matches_known_address() {
        // Cross-checked with an independent secp256k1 + Keccak toolchain.
        let mut one = [0u8; 32];
        one[31] = 1;
        let addr = crypto_derive(&one).unwrap();
        assert_eq!(addr.to_hex(), "0x7e5f4552091a69125d5dfcb7b8c2659029395bdf");
        let mut two = [0u8; 32];
        two[31] = 2;
        assert_eq!(crypto_derive(&two).unwrap().to_hex(), "0x2b5ad5c4795c026514f8317c7a215e218dccd6cf");
    }

    #[test]
    fn rejects_out_of_range_keys() {
        assert_eq!(crypto_derive(&[0u8; 32]), Err(InvalidKey));
        assert_eq!(crypto_derive(&scalar(GROUP_ORDER)), Err(InvalidKey));
        assert_eq!(crypto_derive(&[0xff; 32]), Err(InvalidKey));
        let mut below = scalar(GROUP_ORDER);
        below[31] -= 1;
        assert!(crypto_derive(&below).is_ok());
    }

    #[test]
    fn collision_bound_values() {
        assert_eq!(collision_probability(0.0), 0.0);
        let half = collision_probability(2f64.powi(80));
        assert!((half - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!((half - 0.393469).abs() < 1e-6);
        // 1e18 / 2^161, evaluated independently at high precision: 3.42113882891801e-31
        let p = collision_probability(1e9);
        assert!((p / 3.421138828918e-31 - 1.0).abs() < 1e-10, "{p}");
    }

    #[test]
    fn collision_bound_is_monotone_and_below_one() {
        let mut prev = 0.0;
        for e in 0..=164 {
            let p = collision_probability(2f64.powf(e as f64 * 0.5));
            assert!(p >= prev && p < 1.0, "n = 2^{}", e as f64 * 0.5);
            prev = p;
        }
    }

    #[test]
    fn mode_parse_roundtrip() {
        for m in [GeneratorMode::Uniform, GeneratorMode::Crypto] {
            assert_eq!(m.to_string().parse::<GeneratorMode>().unwrap(), m);
        }
        assert!("fast".parse::<GeneratorMode>().is_err());
    }
}
