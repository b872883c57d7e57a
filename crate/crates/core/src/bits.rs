//! Binary and soft-value vectors shared by every stage of the chain.

use std::ops::{BitXor, Index};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitude at which log-likelihood ratios are clipped (natural log).
pub const LLR_CAP: f64 = 40.0;

/// Ordered sequence of bits stored one per byte, each 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some((position, &value)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(Error::InvalidBit { position, value });
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.random::<bool>() as u8).collect())
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Self(bits.into_iter().map(u8::from).collect())
    }

    /// Interprets `s` as a string of `0`/`1` characters; other characters are skipped.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Vec::with_capacity(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => out.push(0),
                '1' => out.push(1),
                ' ' | '_' | ',' => {}
                _ => return Err(Error::InvalidParameter(format!("character {ch:?} at {i}"))),
            }
        }
        Ok(Self(out))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().map(|&b| b as usize).sum()
    }

    pub fn ones_fraction(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.count_ones() as f64 / self.0.len() as f64
        }
    }

    /// Sub-vector at the given indices, in the order given.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self(indices.iter().map(|&i| self.0[i]).collect())
    }

    pub fn concat(&self, other: &BitVector) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    pub fn xor(&self, other: &BitVector) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }
}

impl Index<usize> for BitVector {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl BitXor for &BitVector {
    type Output = BitVector;
    /// Panics on length mismatch; use [`BitVector::xor`] for a fallible version.
    fn bitxor(self, rhs: &BitVector) -> BitVector {
        self.xor(rhs).expect("xor of bit vectors with different lengths")
    }
}

impl std::fmt::Display for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Natural-log LLRs, positive when bit 0 is more likely. Values are clipped to `±LLR_CAP`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::NonFiniteLlr(i));
        }
        Ok(Self(values.into_iter().map(saturate).collect()))
    }

    /// Noiseless LLRs `magnitude · (1 − 2·bit)` for a known word.
    pub fn from_bits(bits: &BitVector, magnitude: f64) -> Self {
        Self(
            bits.as_slice()
                .iter()
                .map(|&b| saturate(magnitude * (1.0 - 2.0 * b as f64)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn hard_decision(&self) -> BitVector {
        BitVector(self.0.iter().map(|&l| (l < 0.0) as u8).collect())
    }
}

impl Index<usize> for LlrVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Clips an LLR to `[-LLR_CAP, LLR_CAP]`; infinities saturate.
#[inline]
pub fn saturate(v: f64) -> f64 {
    v.clamp(-LLR_CAP, LLR_CAP)
}
