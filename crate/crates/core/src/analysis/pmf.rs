use crate::error::{invalid, Result};
use crate::nr::qam::{Constellation, SHAPED_LEVEL_IM, SHAPED_LEVEL_RE};

/// Piecewise-constant QAM prior: the amplitude-class bit of each dimension
/// is 1 (outer ring) with probability `p`, every other bit is uniform.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapedPmf {
    bits_per_symbol: usize,
    p: f64,
}

/// Shaped prior for `M ∈ {4, 8}` and `0 < p ≤ 0.5`.
pub fn shaped_pmf(bits_per_symbol: usize, p: f64) -> Result<ShapedPmf> {
    if !matches!(bits_per_symbol, 4 | 8) {
        return Err(invalid(format!("shaping needs M ∈ {{4, 8}}, got {bits_per_symbol}")));
    }
    check_p(p)?;
    Ok(ShapedPmf { bits_per_symbol, p })
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 0.5 {
        Ok(())
    } else {
        Err(invalid(format!("ones-probability p = {p} outside (0, 0.5]")))
    }
}

impl ShapedPmf {
    /// Uniform prior over a `2^M` constellation, `M ∈ {2, 4, 6, 8}`.
    pub fn uniform(bits_per_symbol: usize) -> Result<Self> {
        Constellation::new(bits_per_symbol)?;
        Ok(Self { bits_per_symbol, p: 0.5 })
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_uniform(&self) -> bool {
        self.p == 0.5
    }

    /// Probability of a full label (bit 0 = MSB).
    pub fn prob(&self, label: usize) -> f64 {
        let m = self.bits_per_symbol;
        if m < 4 {
            return 1.0 / (1u64 << m) as f64;
        }
        let level = |j: usize| {
            if (label >> (m - 1 - j)) & 1 == 1 {
                self.p
            } else {
                1.0 - self.p
            }
        };
        level(SHAPED_LEVEL_RE) * level(SHAPED_LEVEL_IM) / (1u64 << (m - 2)) as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..1usize << self.bits_per_symbol).map(|l| self.prob(l)).collect()
    }

    /// Marginal over one dimension's `M/2`-bit label; identical for both dimensions.
    pub fn dimension_prior(&self) -> Vec<f64> {
        let m = self.bits_per_symbol / 2;
        let count = 1usize << m;
        if m < 2 {
            return vec![1.0 / count as f64; count];
        }
        let rest = (1usize << (m - 2)) as f64;
        (0..count)
            .map(|label| {
                let outer = (label >> (m - 2)) & 1 == 1;
                (if outer { self.p } else { 1.0 - self.p }) / 2.0 / rest
            })
            .collect()
    }

    /// `H(X) = (M − 2) + 2·h₂(p)` bits.
    pub fn entropy(&self) -> f64 {
        if self.bits_per_symbol < 4 {
            return self.bits_per_symbol as f64;
        }
        (self.bits_per_symbol - 2) as f64 + 2.0 * binary_entropy(self.p)
    }

    /// `E|X|² = 2·[(1 − p)·mean(inner²) + p·mean(outer²)]`.
    pub fn avg_power(&self) -> f64 {
        let c = Constellation::new(self.bits_per_symbol).expect("validated order");
        let t = c.amplitude_threshold();
        let mut amps: Vec<f64> = c.amplitudes().iter().map(|a| a.abs()).collect();
        amps.sort_by(f64::total_cmp);
        amps.dedup();
        let mean_sq = |f: &dyn Fn(f64) -> bool| {
            let sel: Vec<f64> = amps.iter().copied().filter(|&a| f(a)).collect();
            sel.iter().map(|a| a * a).sum::<f64>() / sel.len() as f64
        };
        if amps.len() == 1 {
            return 2.0 * amps[0] * amps[0];
        }
        2.0 * ((1.0 - self.p) * mean_sq(&|a| a < t) + self.p * mean_sq(&|a| a > t))
    }
}

/// `h₂(p)` in bits, with `h₂(0) = h₂(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

pub fn symbol_entropy(bits_per_symbol: usize, p: f64) -> Result<f64> {
    Ok(shaped_pmf(bits_per_symbol, p)?.entropy())
}

pub fn avg_power(bits_per_symbol: usize, p: f64) -> Result<f64> {
    Ok(shaped_pmf(bits_per_symbol, p)?.avg_power())
}

/// `⌊N/(M/2)·(1 − h₂(p))⌋`, the shaping-bit count an ideal infinite-length
/// shaper would need.
pub fn asymptotic_shaping_bits(n: usize, bits_per_symbol: usize, p: f64) -> usize {
    let d = (n / (bits_per_symbol / 2).max(1)) as f64;
    (d * (1.0 - binary_entropy(p)) + 1e-9).floor() as usize
}

/// The `p ∈ (0, 0.5]` at which `N/(M/2)·(1 − h₂(p)) = s` (continuous inverse).
pub fn asymptotic_p(n: usize, bits_per_symbol: usize, s: f64) -> f64 {
    let d = (n / (bits_per_symbol / 2).max(1)) as f64;
    if s <= 0.0 {
        return 0.5;
    }
    let target = 1.0 - (s / d).clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
