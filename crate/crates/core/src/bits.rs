//! Finite bit strings and oracle snapshots.
//!
//! A [`Bits`] value is a short, explicit binary string (the strings
//! enumerated by c.e. sets, the extensions found by genericity strategies).
//! An [`OracleSnapshot`] is a certified prefix of the generic approximation
//! and is stored sparsely: its length plus the positions holding a 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid bit string {0:?}: expected only '0' and '1'")]
pub struct ParseBitsError(pub String);

/// An explicit finite binary string.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Bits(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, pos: usize) -> bool {
        self.0.get(pos).copied().unwrap_or(false)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// True when `self` is an initial segment of `other`.
    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        self.len() <= other.len() && self.0[..] == other.0[..self.len()]
    }

    /// Positions holding a 1, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    /// Ordering used to pick a canonical extension: shorter first, then
    /// lexicographic with `0 < 1`.
    pub fn length_lex_cmp(&self, other: &Bits) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits(\"{self}\")")
    }
}

impl FromStr for Bits {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // "-" is accepted as an explicit spelling of the empty string.
        if s == "-" {
            return Ok(Bits::new());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A certified oracle prefix: the first `len` bits of the generic set, with
/// `ones` listing (ascending) the positions below `len` that hold a 1.
///
/// A computation with use `u` carries a snapshot of length `u + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OracleSnapshot {
    pub len: usize,
    pub ones: Vec<usize>,
}

impl OracleSnapshot {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: &Bits) -> Self {
        OracleSnapshot {
            len: bits.len(),
            ones: bits.ones().collect(),
        }
    }

    pub fn to_bits(&self) -> Bits {
        let mut v = vec![false; self.len];
        for &p in &self.ones {
            v[p] = true;
        }
        Bits(v)
    }

    /// The use certified by this snapshot, `len - 1`; `None` for the empty
    /// snapshot.
    pub fn use_value(&self) -> Option<usize> {
        self.len.checked_sub(1)
    }

    pub fn get(&self, pos: usize) -> bool {
        pos < self.len && self.ones.binary_search(&pos).is_ok()
    }
}
