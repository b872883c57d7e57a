//! Shaping-bit placement and the SCL precoder that chooses them.

use std::ops::Range;

use crate::bits::BitVector;
use crate::error::{invalid, Error, Result};
use crate::nr::construction::{place_information, rate_matching_frozen};
use crate::nr::interleave::Permutation;
use crate::nr::tables::ReliabilitySequence;
use crate::polar::{FrozenPattern, SclDecoder};

/// `𝒟`: the last `N/(M/2)` transform positions, which form an independent
/// length-`N/(M/2)` polar sub-codeword.
pub fn shaped_region(n: usize, bits_per_symbol: usize) -> Range<usize> {
    let len = n / (bits_per_symbol / 2).max(1);
    n - len..n
}

/// The `s` most reliable positions inside `𝒟`, ascending.
pub fn shaping_set(seq: &ReliabilitySequence, n: usize, bits_per_symbol: usize, s: usize) -> Result<Vec<usize>> {
    let region = shaped_region(n, bits_per_symbol);
    if s > region.len() {
        return Err(invalid(format!(
            "S = {s} exceeds the shaped region size {}",
            region.len()
        )));
    }
    if n > seq.len() {
        return Err(invalid(format!("N = {n} exceeds reliability sequence length {}", seq.len())));
    }
    let mut set = seq.most_reliable(n, s, |i| region.contains(&i));
    set.sort_unstable();
    Ok(set)
}

/// Where shaping bits (holes), information bits and frozen zeros sit on `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapedPlacement {
    n: usize,
    region: Range<usize>,
    holes: Vec<usize>,
    info_positions: Vec<usize>,
}

impl ShapedPlacement {
    /// Holes come first (most reliable inside `𝒟`); the `k` next most
    /// reliable positions carry information. With `s = 0` this is the
    /// conventional construction, including rate-matching pre-freezing.
    pub fn new(
        n: usize,
        e: usize,
        bits_per_symbol: usize,
        k: usize,
        s: usize,
        seq: &ReliabilitySequence,
        subblock: &Permutation,
    ) -> Result<Self> {
        if k + s > n {
            return Err(invalid(format!("K + S = {} exceeds N = {n}", k + s)));
        }
        let holes = shaping_set(seq, n, bits_per_symbol, s)?;
        let mut excluded = rate_matching_frozen(n, e, k, subblock)?;
        for &h in &holes {
            excluded[h] = true;
        }
        let info = place_information(n, k, seq, &excluded)?;
        Ok(Self {
            n,
            region: shaped_region(n, bits_per_symbol),
            holes,
            info_positions: info.info_positions,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn region(&self) -> Range<usize> {
        self.region.clone()
    }

    /// Shaping positions `𝒮`, ascending.
    pub fn holes(&self) -> &[usize] {
        &self.holes
    }

    /// `𝒮` in coordinates local to `𝒟`.
    pub fn local_holes(&self) -> Vec<usize> {
        self.holes.iter().map(|h| h - self.region.start).collect()
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Decoder view: information and shaping positions free, the rest frozen to zero.
    pub fn decoder_pattern(&self) -> FrozenPattern {
        let free: Vec<usize> = self.info_positions.iter().chain(&self.holes).copied().collect();
        FrozenPattern::with_free_positions(self.n, &free).expect("positions below N")
    }

    /// `u'`: `c'` on the information positions, zeros elsewhere (holes included).
    pub fn u_prime(&self, c_prime: &BitVector) -> Result<BitVector> {
        if c_prime.len() != self.info_positions.len() {
            return Err(Error::LengthMismatch {
                expected: self.info_positions.len(),
                actual: c_prime.len(),
            });
        }
        let mut u = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(c_prime.as_slice()) {
            u[pos] = b;
        }
        Ok(BitVector::new(u).expect("binary"))
    }

    /// Fills the holes of `u'` with `s`, returning `c'' = c' ‖ s` and `u`.
    pub fn insert_shaping(&self, c_prime: &BitVector, s: &BitVector) -> Result<(BitVector, BitVector)> {
        if s.len() != self.holes.len() {
            return Err(Error::LengthMismatch {
                expected: self.holes.len(),
                actual: s.len(),
            });
        }
        let mut u = self.u_prime(c_prime)?.into_inner();
        for (&h, &b) in self.holes.iter().zip(s.as_slice()) {
            u[h] = b;
        }
        Ok((c_prime.concat(s), BitVector::new(u).expect("binary")))
    }
}

/// Precoder LLR `ln((1−p)/p)`, the reward for a zero at an unscrambled position.
pub fn precoder_magnitude(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(invalid(format!("precoder target p = {p} outside (0, 0.5]")));
    }
    Ok(((1.0 - p) / p).ln())
}

/// SCL decoder run at the transmitter over the shaped sub-codeword.
#[derive(Clone, Debug)]
pub struct Precoder {
    decoder: SclDecoder,
}

impl Precoder {
    pub fn new(len: usize, list_size: usize) -> Result<Self> {
        Ok(Self {
            decoder: SclDecoder::new(len, list_size)?,
        })
    }

    pub fn len(&self) -> usize {
        self.decoder.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decoder.is_empty()
    }

    /// Chooses the hole bits so that the sub-codeword is close to `v̄_𝒟`,
    /// i.e. `d_𝒟 ⊕ v̄_𝒟` has few ones. Non-hole positions keep their `û` values.
    pub fn shaping_bits(
        &mut self,
        u_hat: &BitVector,
        local_holes: &[usize],
        v_bar_d: &BitVector,
        p: f64,
    ) -> Result<BitVector> {
        let magnitude = precoder_magnitude(p)?;
        let len = self.decoder.len();
        for actual in [u_hat.len(), v_bar_d.len()] {
            if actual != len {
                return Err(Error::LengthMismatch { expected: len, actual });
            }
        }
        if local_holes.is_empty() {
            return Ok(BitVector::default());
        }
        let mut mask = vec![true; len];
        for &h in local_holes {
            if h >= len {
                return Err(invalid(format!("hole {h} outside sub-codeword of length {len}")));
            }
            mask[h] = false;
        }
        let pattern = FrozenPattern::new(mask, u_hat)?;
        let lambda: Vec<f64> = v_bar_d
            .as_slice()
            .iter()
            .map(|&v| magnitude * (1.0 - 2.0 * v as f64))
            .collect();
        let best = self.decoder.decode_best(&lambda, &pattern)?;
        Ok(best.u_hat.select(local_holes))
    }
}

/// One-shot precoding; see [`Precoder::shaping_bits`].
pub fn precode_shaping(
    u_hat: &BitVector,
    local_holes: &[usize],
    v_bar_d: &BitVector,
    p: f64,
    list_size: usize,
) -> Result<BitVector> {
    Precoder::new(u_hat.len(), list_size)?.shaping_bits(u_hat, local_holes, v_bar_d, p)
}
