//! CRC24C: zero initial register, no final XOR, no RNTI masking.

use crate::bits::BitVector;
use crate::error::{invalid, Result};

pub const CRC_LEN: usize = 24;

/// gCRC24C(D) = D²⁴+D²³+D²¹+D²⁰+D¹⁷+D¹⁵+D¹³+D¹²+D⁸+D⁴+D²+D+1, without the D²⁴ term.
pub const CRC24C_POLY: u32 = 0xB2_B117;

const MASK: u32 = (1 << CRC_LEN) - 1;

/// Remainder of `bits(D)·D²⁴` modulo gCRC24C, bit 23 first.
pub fn crc24c(bits: &[u8]) -> u32 {
    bits.iter().fold(0u32, |reg, &b| {
        let feedback = ((reg >> (CRC_LEN - 1)) & 1) ^ b as u32;
        let reg = (reg << 1) & MASK;
        if feedback == 1 {
            reg ^ CRC24C_POLY
        } else {
            reg
        }
    })
}

/// `a ∥ crc24c(a)`.
pub fn crc_attach(a: &BitVector) -> Result<BitVector> {
    if a.is_empty() {
        return Err(invalid("CRC payload must not be empty"));
    }
    let crc = crc24c(a.as_slice());
    let mut out = a.as_slice().to_vec();
    out.extend((0..CRC_LEN).rev().map(|i| ((crc >> i) & 1) as u8));
    Ok(BitVector::new(out).expect("binary"))
}

/// True when the trailing 24 bits are the CRC of the leading ones.
pub fn crc_check(c: &BitVector) -> bool {
    c.len() > CRC_LEN && crc24c(c.as_slice()) == 0
}
