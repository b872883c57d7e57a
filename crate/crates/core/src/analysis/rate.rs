use std::f64::consts::{LN_2, PI};
use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pmf::{shaped_pmf, ShapedPmf};
use crate::error::{invalid, Result};
use crate::nr::qam::{log_sum_exp, Constellation};

pub const DEFAULT_GH_ORDER: usize = 24;

const MC_CHUNK: usize = 8192;

/// How the expectation over the channel output is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    /// Product Gauss–Hermite rule with `order` nodes per dimension.
    GaussHermite { order: usize },
    /// Sampling of symbols and noise over the full complex constellation.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for Integrator {
    fn default() -> Self {
        Self::GaussHermite {
            order: DEFAULT_GH_ORDER,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    /// Linear SNR `E|X|²/E|W|²`.
    pub gamma: f64,
    pub p: f64,
    /// Achievable rate in bits per channel use, in `[0, H(X)]`.
    pub r_bmd: f64,
    /// Order-doubling difference (Gauss–Hermite) or standard error (Monte-Carlo).
    pub error_estimate: f64,
}

/// BMD rate `H(X) − Σ_j H(B_j | R)` for the shaped prior of `(M, p)`.
pub fn achievable_rate_bmd(bits_per_symbol: usize, p: f64, gamma: f64, method: Integrator) -> Result<RatePoint> {
    achievable_rate(&shaped_pmf(bits_per_symbol, p)?, gamma, method)
}

/// BMD rate for an arbitrary prior; noise variance is `E|X|²/γ`.
pub fn achievable_rate(pmf: &ShapedPmf, gamma: f64, method: Integrator) -> Result<RatePoint> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("SNR must be positive and finite, got {gamma}")));
    }
    let noise_var = pmf.avg_power() / gamma;
    let entropy = pmf.entropy();
    let (cond, err) = match method {
        Integrator::GaussHermite { order } => {
            if order == 0 {
                return Err(invalid("Gauss–Hermite order must be ≥ 1"));
            }
            let a = conditional_entropy_gh(pmf, noise_var, order);
            let b = conditional_entropy_gh(pmf, noise_var, 2 * order);
            (a, (a - b).abs())
        }
        Integrator::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(invalid("Monte-Carlo needs at least one sample"));
            }
            conditional_entropy_mc(pmf, noise_var, samples, seed)
        }
    };
    Ok(RatePoint {
        gamma,
        p: pmf.p(),
        r_bmd: (entropy - cond).max(0.0),
        error_estimate: err,
    })
}

/// `Σ_j H(B_j | R)` in bits. Since prior and labels factor over the two
/// dimensions, each dimension reduces exactly to a 1-D rule (the product
/// rule's weights along the other axis sum to one).
fn conditional_entropy_gh(pmf: &ShapedPmf, noise_var: f64, order: usize) -> f64 {
    let c = Constellation::new(pmf.bits_per_symbol()).expect("validated order");
    let m = c.bits_per_dimension();
    let amps = c.amplitudes();
    let log_prior: Vec<f64> = pmf.dimension_prior().iter().map(|q| q.ln()).collect();
    let prior = pmf.dimension_prior();
    let rule = GaussHermite::new(NonZeroUsize::new(order).expect("order ≥ 1"));
    // Per-dimension noise variance is σ²/2, so w = σ·x under the e^{−x²} weight.
    let sigma = noise_var.sqrt();
    let mut metric = vec![0.0; amps.len()];
    let mut h = 0.0;
    for (a, &pa) in prior.iter().enumerate() {
        for &(x, w) in rule.as_node_weight_pairs() {
            let y = amps[a] + sigma * x;
            for (l, mt) in metric.iter_mut().enumerate() {
                let d = y - amps[l];
                *mt = log_prior[l] - d * d / noise_var;
            }
            let total = log_sum_exp(metric.iter().copied());
            for k in 0..m {
                let shift = m - 1 - k;
                let bit = (a >> shift) & 1;
                let same = log_sum_exp(
                    metric
                        .iter()
                        .enumerate()
                        .filter(|(l, _)| (l >> shift) & 1 == bit)
                        .map(|(_, &v)| v),
                );
                h += pa * w / PI.sqrt() * (total - same) / LN_2;
            }
        }
    }
    2.0 * h
}

/// Monte-Carlo estimate of `Σ_j H(B_j | R)` and its standard error, using the
/// full `2^M`-point posterior. Chunks draw from independent streams, so the
/// result does not depend on the rayon pool size.
fn conditional_entropy_mc(pmf: &ShapedPmf, noise_var: f64, samples: usize, seed: u64) -> (f64, f64) {
    let c = Constellation::new(pmf.bits_per_symbol()).expect("validated order");
    let bits = c.bits_per_symbol();
    let points = c.points();
    let probs = pmf.probabilities();
    let log_prior: Vec<f64> = probs.iter().map(|q| q.ln()).collect();
    let sampler = WeightedIndex::new(&probs).expect("valid prior");
    let scale = (noise_var / 2.0).sqrt();
    let chunks = samples.div_ceil(MC_CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut e = vec![0.0; points.len()];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let label = sampler.sample(&mut rng);
                let nr: f64 = rng.sample(StandardNormal);
                let ni: f64 = rng.sample(StandardNormal);
                let r = points[label] + num_complex::Complex64::new(scale * nr, scale * ni);
                let mut max = f64::NEG_INFINITY;
                for (l, el) in e.iter_mut().enumerate() {
                    *el = log_prior[l] - (r - points[l]).norm_sqr() / noise_var;
                    max = max.max(*el);
                }
                let mut total = 0.0;
                let mut same = vec![0.0; bits];
                for (l, el) in e.iter_mut().enumerate() {
                    *el = (*el - max).exp();
                    total += *el;
                    let agree = !(l ^ label);
                    for (j, sj) in same.iter_mut().enumerate() {
                        if (agree >> (bits - 1 - j)) & 1 == 1 {
                            *sj += *el;
                        }
                    }
                }
                let v: f64 = same.iter().map(|sj| (total / sj).log2()).sum();
                s1 += v;
                s2 += v * v;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizedRate {
    pub best: RatePoint,
    pub uniform: RatePoint,
}

/// Maximizes the Gauss–Hermite BMD rate over `p ∈ (0, 0.5]`: a coarse scan
/// brackets the peak, golden-section search refines it to `tolerance`, and
/// `p = 0.5` wins any tie.
pub fn optimize_p(bits_per_symbol: usize, gamma: f64, tolerance: f64) -> Result<OptimizedRate> {
    if !(tolerance > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    let method = Integrator::default();
    let eval = |p: f64| achievable_rate_bmd(bits_per_symbol, p, gamma, method);
    let uniform = eval(0.5)?;
    const STEPS: usize = 25;
    let grid: Vec<f64> = (1..=STEPS).map(|i| 0.5 * i as f64 / STEPS as f64).collect();
    let mut best = uniform;
    let mut best_i = STEPS - 1;
    for (i, &p) in grid.iter().enumerate() {
        let r = eval(p)?;
        if r.r_bmd > best.r_bmd {
            best = r;
            best_i = i;
        }
    }
    let mut lo = if best_i == 0 { 1e-4 } else { grid[best_i - 1] };
    let mut hi = grid[(best_i + 1).min(STEPS - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > tolerance {
        if f1.r_bmd >= f2.r_bmd {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    for cand in [f1, f2] {
        if cand.r_bmd > best.r_bmd {
            best = cand;
        }
    }
    if uniform.r_bmd >= best.r_bmd {
        best = uniform;
    }
    Ok(OptimizedRate { best, uniform })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(x: f64) -> f64 {
        10f64.powf(x / 10.0)
    }

    #[test]
    fn saturates_at_high_snr() {
        for m in [4, 8] {
            let r = achievable_rate_bmd(m, 0.5, db(45.0), Integrator::default()).unwrap();
            assert!((r.r_bmd - m as f64).abs() < 0.01, "{r:?}");
        }
    }

    #[test]
    fn uniform_reduction_is_exact() {
        for method in [Integrator::default(), Integrator::MonteCarlo { samples: 20_000, seed: 3 }] {
            let a = achievable_rate_bmd(4, 0.5, db(8.0), method).unwrap();
            let b = achievable_rate(&ShapedPmf::uniform(4).unwrap(), db(8.0), method).unwrap();
            assert_eq!(a.r_bmd.to_bits(), b.r_bmd.to_bits());
        }
    }

    #[test]
    fn qpsk_matches_binary_awgn() {
        // Uniform QPSK is two BPSK channels; at 0 dB each carries about 0.486 bits.
        let r = achievable_rate(&ShapedPmf::uniform(2).unwrap(), 1.0, Integrator::default()).unwrap();
        assert!((r.r_bmd - 2.0 * 0.4859).abs() < 2e-3, "{r:?}");
    }

    #[test]
    fn integrators_agree_for_16qam() {
        for snr in [0.0, 6.0, 12.0, 18.0] {
            for p in [0.5, 0.3] {
                let gh = achievable_rate_bmd(4, p, db(snr), Integrator::default()).unwrap();
                let mc = achievable_rate_bmd(4, p, db(snr), Integrator::MonteCarlo { samples: 200_000, seed: 9 }).unwrap();
                assert!((gh.r_bmd - mc.r_bmd).abs() < 0.01, "{snr} dB p={p}: {gh:?} vs {mc:?}");
                assert!(gh.error_estimate < 1e-3);
            }
        }
    }

    #[test]
    fn rate_bounded_by_entropy() {
        for m in [4, 8] {
            for p in [0.1, 0.3, 0.5] {
                for snr in [-5.0, 5.0, 15.0, 30.0] {
                    let r = achievable_rate_bmd(m, p, db(snr), Integrator::default()).unwrap();
                    let h = shaped_pmf(m, p).unwrap().entropy();
                    assert!(r.r_bmd >= 0.0 && r.r_bmd <= h + 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_snr() {
        assert!(achievable_rate_bmd(4, 0.5, 0.0, Integrator::default()).is_err());
        assert!(achievable_rate_bmd(4, 0.5, -1.0, Integrator::default()).is_err());
    }

    #[test]
    fn optimizer_dominates_uniform() {
        let low = optimize_p(8, db(2.0), 1e-3).unwrap();
        assert!(low.best.p < 0.5);
        assert!(low.best.r_bmd >= low.uniform.r_bmd);
        let mid = optimize_p(8, db(14.0), 1e-3).unwrap();
        assert!(mid.best.r_bmd - mid.uniform.r_bmd > 0.1, "{mid:?}");
        let high = optimize_p(4, db(40.0), 1e-3).unwrap();
        assert_eq!(high.best.p, 0.5);
    }
}
