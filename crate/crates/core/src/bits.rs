use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An assignment of 0/1 values to an ordered list of variables.
///
/// Text form lists variable 0 first: `"100"` sets bit 0 only, which is
/// basis-state index 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn zeros(len: usize) -> Self {
        Bitstring(vec![false; len])
    }

    pub fn from_index(index: u64, len: usize) -> Self {
        Bitstring((0..len).map(|i| i < 64 && (index >> i) & 1 == 1).collect())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bitstring(bits)
    }

    /// Basis-state index with bit `i` as the `2^i` place, if it fits in 64 bits.
    pub fn to_index(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(
            self.0
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i)),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Validation(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bitstring)
    }
}
