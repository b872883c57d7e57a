//! Gray-labeled square QAM on the unnormalized odd-integer grid, and the
//! prior-aware bit-metric demapper.
//!
//! Bit `j` of symbol `t` is `b[t·M + j]`. Even bit-levels drive the real
//! part, odd ones the imaginary part. Within one dimension the first bit is
//! the sign and the second decides whether the magnitude exceeds
//! `2^(M/2−1)`, which makes 1-based levels 3 and 4 the amplitude-class bits.

use num_complex::Complex64;

use crate::analysis::ShapedPmf;
use crate::bits::{saturate, BitVector, LlrVector};
use crate::error::{Error, Result};

/// 0-based bit-level that selects the real-part amplitude class.
pub const SHAPED_LEVEL_RE: usize = 2;
/// 0-based bit-level that selects the imaginary-part amplitude class.
pub const SHAPED_LEVEL_IM: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    bits_per_symbol: usize,
    /// PAM amplitude per per-dimension label (MSB = first bit of that dimension).
    amplitudes: Vec<f64>,
}

impl Constellation {
    /// `bits_per_symbol` ∈ {2, 4, 6, 8}.
    pub fn new(bits_per_symbol: usize) -> Result<Self> {
        if !matches!(bits_per_symbol, 2 | 4 | 6 | 8) {
            return Err(Error::InvalidParameter(format!(
                "unsupported QAM order: {bits_per_symbol} bits per symbol"
            )));
        }
        let m = bits_per_symbol / 2;
        let amplitudes = (0..1usize << m)
            .map(|label| {
                let bit = |k: usize| ((label >> (m - 1 - k)) & 1) as f64;
                // (1−2c₀)·(2^(m−1) − (1−2c₁)·(2^(m−2) − … (2 − (1−2c_{m−1})))).
                let mut mag = 1.0;
                for k in (1..m).rev() {
                    mag = (1u32 << (m - k)) as f64 - (1.0 - 2.0 * bit(k)) * mag;
                }
                (1.0 - 2.0 * bit(0)) * mag
            })
            .collect();
        Ok(Self {
            bits_per_symbol,
            amplitudes,
        })
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn size(&self) -> usize {
        1 << self.bits_per_symbol
    }

    pub fn bits_per_dimension(&self) -> usize {
        self.bits_per_symbol / 2
    }

    /// Amplitudes indexed by per-dimension label.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// `2^(M/2−1)`, the boundary between inner and outer amplitudes.
    pub fn amplitude_threshold(&self) -> f64 {
        (1u32 << (self.bits_per_dimension() - 1)) as f64
    }

    /// Splits a full label (bit 0 = MSB) into per-dimension labels.
    pub fn split_label(&self, label: usize) -> (usize, usize) {
        let m = self.bits_per_dimension();
        let (mut re, mut im) = (0, 0);
        for k in 0..m {
            re = (re << 1) | self.label_bit(label, 2 * k) as usize;
            im = (im << 1) | self.label_bit(label, 2 * k + 1) as usize;
        }
        (re, im)
    }

    /// Bit-level `j` (0-based) of a full label.
    pub fn label_bit(&self, label: usize, j: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - j)) & 1) as u8
    }

    pub fn label_of(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn point(&self, label: usize) -> Complex64 {
        let (re, im) = self.split_label(label);
        Complex64::new(self.amplitudes[re], self.amplitudes[im])
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.size()).map(|l| self.point(l)).collect()
    }

    /// Maps consecutive groups of `M` bits to points.
    pub fn map(&self, b: &BitVector) -> Result<Vec<Complex64>> {
        if b.len() % self.bits_per_symbol != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} bits do not fill whole {}-bit symbols",
                b.len(),
                self.bits_per_symbol
            )));
        }
        Ok(b.as_slice()
            .chunks_exact(self.bits_per_symbol)
            .map(|chunk| self.point(self.label_of(chunk)))
            .collect())
    }

    /// Bit LLRs `ln Σ_{x:b_j=0} P(x)e^{−|r−x|²/σ²} − ln Σ_{x:b_j=1} …`.
    ///
    /// The prior and the labeling both factor over the two dimensions, so each
    /// bit is evaluated over the `2^(M/2)` amplitudes of its own dimension.
    pub fn demap(&self, r: &[Complex64], noise_var: f64, prior: &ShapedPmf) -> Result<LlrVector> {
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {noise_var}"
            )));
        }
        if prior.bits_per_symbol() != self.bits_per_symbol {
            return Err(Error::InvalidParameter("prior and constellation orders differ".into()));
        }
        let m = self.bits_per_dimension();
        let log_prior: Vec<f64> = prior.dimension_prior().iter().map(|p| p.ln()).collect();
        let mut metric = vec![0.0; 1 << m];
        let mut out = vec![0.0; r.len() * self.bits_per_symbol];
        for (t, sym) in r.iter().enumerate() {
            for (dim, y) in [sym.re, sym.im].into_iter().enumerate() {
                let mut max = f64::NEG_INFINITY;
                for (label, mt) in metric.iter_mut().enumerate() {
                    let d = y - self.amplitudes[label];
                    *mt = log_prior[label] - d * d / noise_var;
                    max = max.max(*mt);
                }
                // One exponential per amplitude; each bit splits the same terms.
                let mut sums = [[0.0f64; 2]; 4];
                for (label, &mt) in metric.iter().enumerate() {
                    let w = (mt - max).exp();
                    for (k, sk) in sums.iter_mut().enumerate().take(m) {
                        sk[(label >> (m - 1 - k)) & 1] += w;
                    }
                }
                for (k, sk) in sums.iter().enumerate().take(m) {
                    out[t * self.bits_per_symbol + 2 * k + dim] = saturate(sk[0].ln() - sk[1].ln());
                }
            }
        }
        LlrVector::new(out)
    }
}

/// Numerically stable `ln Σ exp(xᵢ)`.
pub fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::shaped_pmf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gray16(b: &[u8]) -> Complex64 {
        let s = |x: u8| 1.0 - 2.0 * x as f64;
        Complex64::new(s(b[0]) * (2.0 - s(b[2])), s(b[1]) * (2.0 - s(b[3])))
    }

    /// Full 2^M-term evaluation over complex points.
    fn demap_exhaustive(c: &Constellation, r: Complex64, nv: f64, prior: &ShapedPmf) -> Vec<f64> {
        (0..c.bits_per_symbol())
            .map(|j| {
                let terms = |bit: u8| {
                    (0..c.size())
                        .filter(|&l| c.label_bit(l, j) == bit)
                        .map(|l| prior.prob(l).ln() - (r - c.point(l)).norm_sqr() / nv)
                        .collect::<Vec<_>>()
                };
                let lse = |v: Vec<f64>| {
                    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
                };
                lse(terms(0)) - lse(terms(1))
            })
            .collect()
    }

    #[test]
    fn sixteen_qam_points() {
        let c = Constellation::new(4).unwrap();
        assert_eq!(c.point(0), Complex64::new(1.0, 1.0));
        assert_eq!(c.point(c.label_of(&[0, 0, 1, 1])), Complex64::new(3.0, 3.0));
        for label in 0..16 {
            let bits: Vec<u8> = (0..4).map(|j| c.label_bit(label, j)).collect();
            assert_eq!(c.point(label), gray16(&bits));
        }
    }

    #[test]
    fn amplitude_class_bit_256qam() {
        let c = Constellation::new(8).unwrap();
        let p = c.point(c.label_of(&[0, 0, 1, 0, 0, 0, 0, 0]));
        // (1−2b₀)(8 − (1−2b₂)(4 − (1−2b₄)(2 − (1−2b₆)))) with only b₂ set.
        assert_eq!(p.re, 11.0);
        assert!(p.re.abs() > 8.0);
        assert_eq!(p.im, 5.0);
    }

    #[test]
    fn amplitude_property_and_gray_adjacency() {
        for bits in [2, 4, 6, 8] {
            let c = Constellation::new(bits).unwrap();
            let thr = c.amplitude_threshold();
            let mut amps: Vec<(f64, usize)> =
                c.amplitudes().iter().enumerate().map(|(l, &a)| (a, l)).collect();
            amps.sort_by(|a, b| a.0.total_cmp(&b.0));
            let expected: Vec<f64> = (0..1 << (bits / 2)).map(|i| (2 * i) as f64 - ((1 << (bits / 2)) - 1) as f64).collect();
            assert_eq!(amps.iter().map(|a| a.0).collect::<Vec<_>>(), expected);
            for w in amps.windows(2) {
                assert_eq!((w[0].1 ^ w[1].1).count_ones(), 1, "Gray adjacency");
            }
            if bits >= 4 {
                for label in 0..c.size() {
                    let x = c.point(label);
                    assert_eq!(c.label_bit(label, SHAPED_LEVEL_RE) == 1, x.re.abs() > thr);
                    assert_eq!(c.label_bit(label, SHAPED_LEVEL_IM) == 1, x.im.abs() > thr);
                }
            }
        }
    }

    #[test]
    fn uniform_average_energy() {
        for (bits, energy) in [(4, 10.0), (8, 170.0)] {
            let c = Constellation::new(bits).unwrap();
            let e: f64 = c.points().iter().map(|x| x.norm_sqr()).sum::<f64>() / c.size() as f64;
            assert_eq!(e, energy);
        }
    }

    #[test]
    fn map_rejects_partial_symbols() {
        let c = Constellation::new(4).unwrap();
        assert!(c.map(&BitVector::zeros(6)).is_err());
        assert_eq!(c.map(&BitVector::zeros(8)).unwrap().len(), 2);
        assert!(Constellation::new(3).is_err());
    }

    #[test]
    fn demapper_matches_exhaustive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (bits, p) in [(4, 0.5), (4, 0.3), (8, 0.5), (8, 0.2)] {
            let c = Constellation::new(bits).unwrap();
            let prior = shaped_pmf(bits, p).unwrap();
            for _ in 0..200 {
                let r = Complex64::new(rng.random_range(-18.0..18.0), rng.random_range(-18.0..18.0));
                let nv = rng.random_range(0.3..20.0);
                let fast = c.demap(&[r], nv, &prior).unwrap();
                let slow = demap_exhaustive(&c, r, nv, &prior);
                for (a, b) in fast.as_slice().iter().zip(&slow) {
                    let b = b.clamp(-crate::LLR_CAP, crate::LLR_CAP);
                    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn noiseless_hard_decisions_recover_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for bits in [2, 4, 6, 8] {
            let c = Constellation::new(bits).unwrap();
            let b = BitVector::random(bits * 100, &mut rng);
            let x = c.map(&b).unwrap();
            let llr = c.demap(&x, 1e-3, &ShapedPmf::uniform(bits).unwrap()).unwrap();
            assert_eq!(llr.hard_decision(), b);
        }
    }

    #[test]
    fn shaped_prior_favours_inner_ring_at_origin() {
        let c = Constellation::new(4).unwrap();
        let llr = c.demap(&[Complex64::new(0.0, 0.0)], 2.0, &shaped_pmf(4, 0.3).unwrap()).unwrap();
        assert!(llr[SHAPED_LEVEL_RE] > 0.0);
        assert!(llr[SHAPED_LEVEL_IM] > 0.0);
        let uniform = c.demap(&[Complex64::new(0.0, 0.0)], 2.0, &ShapedPmf::uniform(4).unwrap()).unwrap();
        assert!(llr[SHAPED_LEVEL_RE] > uniform[SHAPED_LEVEL_RE]);
        assert!(c.demap(&[Complex64::new(0.0, 0.0)], 0.0, &ShapedPmf::uniform(4).unwrap()).is_err());
    }
}
