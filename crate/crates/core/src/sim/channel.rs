use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// Received block `r = x + w`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSample {
    pub r: Vec<Complex64>,
    /// `E|W|²` per complex symbol (zero only for an infinite SNR).
    pub noise_var: f64,
}

/// Adds circular complex Gaussian noise of total variance `avg_power/γ`.
/// `γ = ∞` returns `x` unchanged.
pub fn awgn<R: Rng + ?Sized>(x: &[Complex64], gamma: f64, avg_power: f64, rng: &mut R) -> Result<ChannelSample> {
    if !(gamma > 0.0) {
        return Err(invalid(format!("SNR must be positive, got {gamma}")));
    }
    if !(avg_power > 0.0) || !avg_power.is_finite() {
        return Err(invalid(format!("signal power must be positive, got {avg_power}")));
    }
    let noise_var = avg_power / gamma;
    let sd = (noise_var / 2.0).sqrt();
    let r = x
        .iter()
        .map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(sd * re, sd * im)
        })
        .collect();
    Ok(ChannelSample { r, noise_var })
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn infinite_snr_is_noiseless() {
        let x = vec![Complex64::new(1.0, -3.0); 10];
        let out = awgn(&x, f64::INFINITY, 10.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.r, x);
        assert_eq!(out.noise_var, 0.0);
        assert!(awgn(&x, 0.0, 10.0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn noise_variance_estimate() {
        let x = vec![Complex64::new(0.0, 0.0); 1_000_000];
        let out = awgn(&x, db_to_linear(7.0), 170.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let est = out.r.iter().map(|r| r.norm_sqr()).sum::<f64>() / x.len() as f64;
        assert!((est / out.noise_var - 1.0).abs() < 0.01, "{est} vs {}", out.noise_var);
        let re = out.r.iter().map(|r| r.re * r.re).sum::<f64>() / x.len() as f64;
        assert!((re / (out.noise_var / 2.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let x = vec![Complex64::new(1.0, 1.0); 64];
        let a = awgn(&x, 3.0, 2.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = awgn(&x, 3.0, 2.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn db_conversions() {
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((linear_to_db(100.0) - 20.0).abs() < 1e-12);
    }
}
