//! Addresses and their nibble-path representation.
//!
//! An [`Address`] is a 20-octet account identifier. Inside the trie it is
//! addressed one hex digit at a time, high nibble first, giving a
//! [`NibblePath`] of exactly [`KEY_NIBBLES`] symbols.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Octets in an address.
pub const ADDRESS_LEN: usize = 20;

/// Nibbles in a full key path.
pub const KEY_NIBBLES: usize = ADDRESS_LEN * 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseAddressError {
    #[error("expected 40 hex characters, found {found}")]
    WrongLength { found: usize },
    #[error("invalid hex character {ch:?} at position {position}")]
    InvalidCharacter { position: usize, ch: char },
}

/// A 20-octet account address.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address([u8; ADDRESS_LEN]);

impl Address {
    pub const ZERO: Address = Address([0; ADDRESS_LEN]);

    pub const fn new(bytes: [u8; ADDRESS_LEN]) -> Self {
        Address(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; ADDRESS_LEN] {
        &self.0
    }

    /// Parses 40 hex digits, with or without a leading `0x`. Mixed-case
    /// (checksummed) input is accepted; the checksum is not validated.
    ///
    /// Positions in errors are character offsets into the original text,
    /// counting the prefix.
    pub fn parse(text: &str) -> Result<Self, ParseAddressError> {
        let (offset, digits) = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            Some(rest) => (2, rest),
            None => (0, text),
        };
        let count = digits.chars().count();
        if count != KEY_NIBBLES {
            return Err(ParseAddressError::WrongLength { found: count });
        }
        let mut bytes = [0u8; ADDRESS_LEN];
        for (i, ch) in digits.chars().enumerate() {
            let v = ch.to_digit(16).ok_or(ParseAddressError::InvalidCharacter { position: offset + i, ch })? as u8;
            if i.is_multiple_of(2) {
                bytes[i / 2] = v << 4;
            } else {
                bytes[i / 2] |= v;
            }
        }
        Ok(Address(bytes))
    }

    /// Lowercase hex with `0x` prefix.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(2 + KEY_NIBBLES);
        s.push_str("0x");
        for b in self.0 {
            s.push(hex_digit(b >> 4));
            s.push(hex_digit(b & 0x0f));
        }
        s
    }

    pub fn to_nibbles(&self) -> NibblePath {
        let mut nibbles = Vec::with_capacity(KEY_NIBBLES);
        for b in self.0 {
            nibbles.push(b >> 4);
            nibbles.push(b & 0x0f);
        }
        NibblePath { nibbles }
    }

    /// Inverse of [`Address::to_nibbles`]. Returns `None` unless the path is a
    /// full 40-nibble key.
    pub fn from_nibbles(path: &NibblePath) -> Option<Self> {
        if path.len() != KEY_NIBBLES {
            return None;
        }
        let mut bytes = [0u8; ADDRESS_LEN];
        for (i, pair) in path.nibbles.chunks_exact(2).enumerate() {
            bytes[i] = (pair[0] << 4) | pair[1];
        }
        Some(Address(bytes))
    }

    /// Nibble at position `i` (0 = high half of the first octet).
    #[inline]
    pub fn nibble(&self, i: usize) -> u8 {
        let b = self.0[i / 2];
        if i.is_multiple_of(2) {
            b >> 4
        } else {
            b & 0x0f
        }
    }
}

fn hex_digit(v: u8) -> char {
    char::from_digit(v as u32, 16).expect("nibble in range")
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({})", self.to_hex())
    }
}

impl FromStr for Address {
    type Err = ParseAddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Address::parse(s)
    }
}

impl From<[u8; ADDRESS_LEN]> for Address {
    fn from(bytes: [u8; ADDRESS_LEN]) -> Self {
        Address(bytes)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Address::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("nibble value {value} at index {index} is out of range")]
pub struct InvalidNibble {
    pub index: usize,
    pub value: u8,
}

/// A sequence of 4-bit symbols, at most [`KEY_NIBBLES`] long.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NibblePath {
    nibbles: Vec<u8>,
}

impl NibblePath {
    pub fn new() -> Self {
        NibblePath { nibbles: Vec::new() }
    }

    /// Builds a path from raw symbols, rejecting any value above 15.
    pub fn from_nibbles(nibbles: Vec<u8>) -> Result<Self, InvalidNibble> {
        if let Some((index, &value)) = nibbles.iter().enumerate().find(|(_, &n)| n > 0x0f) {
            return Err(InvalidNibble { index, value });
        }
        Ok(NibblePath { nibbles })
    }

    pub(crate) fn from_slice_unchecked(nibbles: &[u8]) -> Self {
        debug_assert!(nibbles.iter().all(|&n| n <= 0x0f));
        NibblePath { nibbles: nibbles.to_vec() }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.nibbles
    }

    pub fn len(&self) -> usize {
        self.nibbles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nibbles.is_empty()
    }

    pub fn longest_common_prefix(&self, other: &NibblePath) -> usize {
        common_prefix_len(&self.nibbles, &other.nibbles)
    }
}

impl fmt::Debug for NibblePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("NibblePath(")?;
        for &n in &self.nibbles {
            write!(f, "{}", hex_digit(n))?;
        }
        f.write_str(")")
    }
}

/// Length of the longest shared prefix of two paths.
pub fn longest_common_prefix(a: &NibblePath, b: &NibblePath) -> usize {
    a.longest_common_prefix(b)
}

#[inline]
pub(crate) fn common_prefix_len(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}
