//! Bit scrambling and the scrambling-sequence generator.

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// `b = f ⊕ v`. Self-inverse.
pub fn scramble(f: &BitVector, v: &BitVector) -> Result<BitVector> {
    f.xor(v)
}

/// Source of the user-specific scrambling vector `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scrambler {
    /// All-zero sequence: scrambling disabled.
    Zeros,
    /// Length-31 Gold sequence: `x1` runs `x³¹+x³+1` from the fixed state
    /// `1,0,…,0`, `x2` runs `x³¹+x³+x²+x+1` from the 31 low bits of `c_init`,
    /// output `x1 ⊕ x2` after discarding the first 1600 bits.
    Gold { c_init: u32 },
}

const GOLD_NC: usize = 1600;
const REG: u32 = 31;
const REG_MASK: u32 = (1 << REG) - 1;

impl Scrambler {
    pub fn generate(&self, len: usize) -> BitVector {
        match *self {
            Scrambler::Zeros => BitVector::zeros(len),
            Scrambler::Gold { c_init } => BitVector::new(gold(c_init, len)).expect("binary"),
        }
    }

    /// Parses `zeros` or `gold:<c_init>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("zeros") {
            return Ok(Scrambler::Zeros);
        }
        let value = s
            .strip_prefix("gold:")
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scrambler {s:?}")))?;
        let c_init: u32 = value
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad c_init {value:?}")))?;
        if c_init > REG_MASK {
            return Err(Error::InvalidParameter(format!("c_init {c_init} exceeds 31 bits")));
        }
        Ok(Scrambler::Gold { c_init })
    }
}

impl std::fmt::Display for Scrambler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scrambler::Zeros => write!(f, "zeros"),
            Scrambler::Gold { c_init } => write!(f, "gold:{c_init}"),
        }
    }
}

fn gold(c_init: u32, len: usize) -> Vec<u8> {
    // Registers hold x(n)..x(n+30) with x(n) in bit 0.
    let mut x1: u32 = 1;
    let mut x2: u32 = c_init & REG_MASK;
    let mut out = Vec::with_capacity(len);
    for n in 0..GOLD_NC + len {
        if n >= GOLD_NC {
            out.push(((x1 ^ x2) & 1) as u8);
        }
        let f1 = (x1 ^ (x1 >> 3)) & 1;
        let f2 = (x2 ^ (x2 >> 1) ^ (x2 >> 2) ^ (x2 >> 3)) & 1;
        x1 = (x1 >> 1) | (f1 << (REG - 1));
        x2 = (x2 >> 1) | (f2 << (REG - 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference prefixes from an independent matrix-free Python model of the
    // same two m-sequences.
    const GOLD_1: &str = "000000101000001100000011011101000010101110011010";
    const GOLD_4660: &str = "010000010101001001111100001111111000000011100001";
    const GOLD_MAX: &str = "111111010000101111110011100011100010111001100000";

    #[test]
    fn gold_reference_prefixes() {
        for (c_init, expected) in [(1, GOLD_1), (4660, GOLD_4660), (REG_MASK, GOLD_MAX)] {
            let v = Scrambler::Gold { c_init }.generate(48);
            assert_eq!(v.to_string(), expected);
        }
    }

    #[test]
    fn deterministic_and_balanced() {
        let s = Scrambler::Gold { c_init: 12345 };
        assert_eq!(s.generate(500), s.generate(500));
        let v = s.generate(1_000_000);
        let frac = v.ones_fraction();
        assert!((0.49..=0.51).contains(&frac), "{frac}");
        assert_eq!(Scrambler::Zeros.generate(64).count_ones(), 0);
    }

    #[test]
    fn scrambling_is_an_involution() {
        let f = BitVector::parse("101").unwrap();
        let v = BitVector::parse("110").unwrap();
        let b = scramble(&f, &v).unwrap();
        assert_eq!(b.to_string(), "011");
        assert_eq!(scramble(&b, &v).unwrap(), f);
        assert_eq!(scramble(&f, &BitVector::zeros(3)).unwrap(), f);
        assert!(scramble(&f, &BitVector::zeros(4)).is_err());
    }

    #[test]
    fn parse_and_display() {
        for s in [Scrambler::Zeros, Scrambler::Gold { c_init: 77 }] {
            assert_eq!(Scrambler::parse(&s.to_string()).unwrap(), s);
        }
        assert!(Scrambler::parse("gold:x").is_err());
        assert!(Scrambler::parse("gold:2147483648").is_err());
        assert!(Scrambler::parse("lfsr").is_err());
    }
}
