use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::crc::CRC_LEN;
use super::scramble::Scrambler;
use super::tables::{Q_MAX_LEN, SUBBLOCKS};

/// Every parameter of one transport-block coding chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeConfig {
    /// `A`, payload bits.
    pub payload_bits: usize,
    /// `L`, CRC bits (CRC24C only).
    pub crc_bits: usize,
    /// `N`, mother code length.
    pub n: usize,
    /// `E`, rate-matched length.
    pub e: usize,
    /// `M`, bits per QAM symbol.
    pub bits_per_symbol: usize,
    /// Receiver SCL list size.
    pub list_size: usize,
    /// `S`, shaping bits (0 = conventional chain).
    pub shaping_bits: usize,
    /// List size of the shaping precoder.
    pub precoder_list_size: usize,
    pub scrambler: Scrambler,
}

impl CodeConfig {
    /// `N = E`, CRC24C, list size 8 for both decoder and precoder, no scrambling.
    pub fn new(payload_bits: usize, n: usize, bits_per_symbol: usize, shaping_bits: usize) -> Self {
        Self {
            payload_bits,
            crc_bits: CRC_LEN,
            n,
            e: n,
            bits_per_symbol,
            list_size: 8,
            shaping_bits,
            precoder_list_size: 8,
            scrambler: Scrambler::Zeros,
        }
    }

    /// `K = A + L`.
    pub fn k(&self) -> usize {
        self.payload_bits + self.crc_bits
    }

    /// Non-frozen transform inputs, `K + S`.
    pub fn free_bits(&self) -> usize {
        self.k() + self.shaping_bits
    }

    pub fn is_shaped(&self) -> bool {
        self.shaping_bits > 0
    }

    /// `|𝒟| = N/(M/2)`, length of the shaped sub-codeword.
    pub fn shaped_len(&self) -> usize {
        self.n / (self.bits_per_symbol / 2).max(1)
    }

    pub fn symbols(&self) -> usize {
        self.e / self.bits_per_symbol
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.payload_bits == 0 {
            return bad("payload must have at least one bit".into());
        }
        if self.crc_bits != CRC_LEN {
            return bad(format!("only the {CRC_LEN}-bit CRC24C is supported, got L = {}", self.crc_bits));
        }
        if !self.n.is_power_of_two() || self.n < SUBBLOCKS || self.n > Q_MAX_LEN {
            return bad(format!("N = {} must be a power of two in [{SUBBLOCKS}, {Q_MAX_LEN}]", self.n));
        }
        if !matches!(self.bits_per_symbol, 2 | 4 | 6 | 8) {
            return bad(format!("M = {} not in {{2, 4, 6, 8}}", self.bits_per_symbol));
        }
        if self.e == 0 || self.e % self.bits_per_symbol != 0 {
            return bad(format!("E = {} must be a positive multiple of M = {}", self.e, self.bits_per_symbol));
        }
        if self.k() > self.e {
            return bad(format!("K = {} exceeds E = {}", self.k(), self.e));
        }
        if self.free_bits() > self.n {
            return bad(format!("K + S = {} exceeds N = {}", self.free_bits(), self.n));
        }
        if self.list_size == 0 || self.precoder_list_size == 0 {
            return bad("list sizes must be at least 1".into());
        }
        if self.is_shaped() {
            if self.e != self.n {
                return bad(format!("shaping requires E = N (E = {}, N = {})", self.e, self.n));
            }
            if !matches!(self.bits_per_symbol, 4 | 8) {
                return bad(format!("shaping requires M ∈ {{4, 8}}, got {}", self.bits_per_symbol));
            }
            if self.shaping_bits > self.shaped_len() {
                return bad(format!(
                    "S = {} exceeds the shaped sub-codeword length {}",
                    self.shaping_bits,
                    self.shaped_len()
                ));
            }
        }
        Ok(())
    }
}
