use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{invalid, Error, Result};
use crate::shaping::Codec;

use super::channel::{awgn, db_to_linear};

/// Trials evaluated between stopping checks. Fixed so that the stopping
/// point never depends on the worker count.
const BATCH: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSettings {
    pub max_trials: usize,
    /// Stop after this many block errors; 0 runs exactly `max_trials`.
    pub target_errors: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Also count a block as failed when the shaping recheck disagrees.
    pub recheck_shaping: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            max_trials: 100_000,
            target_errors: 100,
            master_seed: 1,
            workers: 0,
            recheck_shaping: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub snr_db: f64,
    pub trials: usize,
    pub block_errors: usize,
    pub bler: f64,
    /// Half-width of the 95% Wilson interval.
    pub ci95: f64,
    pub wall_time_s: f64,
}

impl SimResult {
    pub fn csv_header() -> &'static str {
        "snr_db,trials,block_errors,bler,ci95"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.4},{},{},{:.6e},{:.6e}",
            self.snr_db, self.trials, self.block_errors, self.bler, self.ci95
        )
    }
}

/// 95% Wilson score half-width for `k` errors in `n` trials.
pub fn wilson_half_width(k: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.5;
    }
    let z = 1.959_963_984_540_054;
    let (n, p) = (n as f64, k as f64 / n as f64);
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// RNG for one trial: the stream is picked by `(stream, trial)`, so two
/// runs with the same `stream` see the same payloads and normalized noise.
pub fn trial_rng(master_seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    // SplitMix64 finalizer decorrelates neighbouring stream indices.
    let mut z = master_seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let mut rng = ChaCha8Rng::seed_from_u64(z);
    rng.set_stream(trial);
    rng
}

fn trial(codec: &mut Codec, gamma: f64, settings: &SimSettings, stream: u64, t: u64) -> Result<bool> {
    let mut rng = trial_rng(settings.master_seed, stream, t);
    let a = BitVector::random(codec.config().payload_bits, &mut rng);
    let x = codec.encode(&a)?;
    let ch = awgn(&x, gamma, codec.avg_power(), &mut rng)?;
    let out = codec.receive(&ch.r, ch.noise_var, settings.recheck_shaping)?;
    let ok = out.payload.as_ref() == Some(&a) && out.shaping_check.unwrap_or(true);
    Ok(!ok)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// BLER at one SNR with trial streams drawn from `stream`.
pub fn run_point(codec: &Codec, snr_db: f64, stream: u64, settings: &SimSettings) -> Result<SimResult> {
    let pool = pool(settings.workers)?;
    run_point_in(&pool, codec, snr_db, stream, settings)
}

fn run_point_in(
    pool: &rayon::ThreadPool,
    codec: &Codec,
    snr_db: f64,
    stream: u64,
    settings: &SimSettings,
) -> Result<SimResult> {
    if settings.max_trials == 0 {
        return Err(invalid("max_trials must be at least 1"));
    }
    let start = Instant::now();
    let gamma = db_to_linear(snr_db);
    let (mut trials, mut errors) = (0usize, 0usize);
    'outer: while trials < settings.max_trials {
        let end = (trials + BATCH).min(settings.max_trials);
        let outcomes: Vec<bool> = pool.install(|| {
            (trials..end)
                .into_par_iter()
                .map_init(|| codec.clone(), |c, t| trial(c, gamma, settings, stream, t as u64))
                .collect::<Result<Vec<_>>>()
        })?;
        for failed in outcomes {
            trials += 1;
            errors += failed as usize;
            if settings.target_errors > 0 && errors >= settings.target_errors {
                break 'outer;
            }
        }
    }
    Ok(SimResult {
        snr_db,
        trials,
        block_errors: errors,
        bler: errors as f64 / trials as f64,
        ci95: wilson_half_width(errors, trials),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// One [`SimResult`] per SNR; point `i` uses trial streams from index `i`.
pub fn run_bler(codec: &Codec, snr_db: &[f64], settings: &SimSettings) -> Result<Vec<SimResult>> {
    let pool = pool(settings.workers)?;
    snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| run_point_in(&pool, codec, snr, i as u64, settings))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nr::CodeConfig;

    fn small() -> Codec {
        Codec::new(CodeConfig::new(40, 128, 4, 8)).unwrap()
    }

    #[test]
    fn wilson_interval() {
        // 10 errors in 100 trials: Wilson interval [0.0552, 0.1744].
        assert!((wilson_half_width(10, 100) - 0.0596).abs() < 1e-4);
        assert!(wilson_half_width(0, 1000) > 0.0);
    }

    #[test]
    fn zero_target_runs_all_trials() {
        let settings = SimSettings {
            max_trials: 300,
            target_errors: 0,
            ..SimSettings::default()
        };
        let r = run_bler(&small(), &[0.0], &settings).unwrap();
        assert_eq!(r[0].trials, 300);
        assert!(r[0].block_errors > 250);
    }

    #[test]
    fn stops_at_target_errors() {
        let settings = SimSettings {
            max_trials: 10_000,
            target_errors: 17,
            ..SimSettings::default()
        };
        let r = run_point(&small(), -2.0, 0, &settings).unwrap();
        assert_eq!(r.block_errors, 17);
        assert_eq!(r.trials, 17);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let base = SimSettings {
            max_trials: 700,
            target_errors: 40,
            master_seed: 77,
            ..SimSettings::default()
        };
        let snrs = [6.0, 8.0, 10.0];
        let one = run_bler(&small(), &snrs, &SimSettings { workers: 1, ..base.clone() }).unwrap();
        let many = run_bler(&small(), &snrs, &SimSettings { workers: 8, ..base }).unwrap();
        let csv = |r: &[SimResult]| r.iter().map(SimResult::csv_row).collect::<Vec<_>>();
        assert_eq!(csv(&one), csv(&many));
    }

    #[test]
    fn very_low_snr_is_detected() {
        let settings = SimSettings {
            max_trials: 2000,
            target_errors: 0,
            ..SimSettings::default()
        };
        let mut codec = small();
        let mut detected = 0;
        for t in 0..settings.max_trials as u64 {
            let mut rng = trial_rng(3, 0, t);
            let a = BitVector::random(40, &mut rng);
            let x = codec.encode(&a).unwrap();
            let ch = awgn(&x, db_to_linear(-10.0), codec.avg_power(), &mut rng).unwrap();
            detected += !codec.receive(&ch.r, ch.noise_var, false).unwrap().crc_pass() as usize;
        }
        assert!(detected as f64 >= 0.999 * settings.max_trials as f64, "{detected}");
    }
}
