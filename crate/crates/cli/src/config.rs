//! Run configuration: a flat `key = value` file, overridden by flags.
//!
//! Keys, one per line (`#` starts a comment):
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `a` | payload bits | 768 |
//! | `n` | mother code length | 1024 |
//! | `e` | rate-matched length | `n` |
//! | `m` | bits per QAM symbol | 8 |
//! | `s` | shaping bits, or `auto` to sweep | 0 |
//! | `list`, `precoder_list` | SCL list sizes | 8, 8 |
//! | `scrambler` | `zeros` or `gold:<c_init>` | `zeros` |
//! | `snr_db` | grid, `a,b,c` or `start:step:stop` | `20:0.5:23` |
//! | `seed` | master seed | 1 |
//! | `max_trials`, `target_errors` | stopping rule per point | 100000, 100 |
//! | `recheck` | AND the CRC flag with the shaping recheck | false |
//! | `workers` | threads, 0 = all cores | 0 |
//! | `target_bler` | required-SNR target | 0.01 |
//! | `snr_lo`, `snr_hi`, `snr_step`, `tolerance` | required-SNR search, dB | 20, 23, 0.5, 0.05 |
//! | `s_values` | S grid for `sweep-s`, same syntax as `snr_db` | every 16 up to the limit |
//! | `out` | output directory | none (stdout) |

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use polar_shaping::nr::{CodeConfig, Scrambler};
use polar_shaping::sim::{SearchSettings, SimSettings};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub payload_bits: usize,
    pub n: usize,
    pub e: Option<usize>,
    pub bits_per_symbol: usize,
    /// `None` means `auto`: sweep S.
    pub shaping_bits: Option<usize>,
    pub list_size: usize,
    pub precoder_list_size: usize,
    pub scrambler: Scrambler,
    pub snr_db: Vec<f64>,
    pub seed: u64,
    pub max_trials: usize,
    pub target_errors: usize,
    pub recheck_shaping: bool,
    pub workers: usize,
    pub target_bler: f64,
    pub snr_lo_db: f64,
    pub snr_hi_db: f64,
    pub snr_step_db: f64,
    pub tolerance_db: f64,
    pub s_values: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            payload_bits: 768,
            n: 1024,
            e: None,
            bits_per_symbol: 8,
            shaping_bits: Some(0),
            list_size: 8,
            precoder_list_size: 8,
            scrambler: Scrambler::Zeros,
            snr_db: vec![20.0, 20.5, 21.0, 21.5, 22.0, 22.5, 23.0],
            seed: 1,
            max_trials: 100_000,
            target_errors: 100,
            recheck_shaping: false,
            workers: 0,
            target_bler: 1e-2,
            snr_lo_db: 20.0,
            snr_hi_db: 23.0,
            snr_step_db: 0.5,
            tolerance_db: 0.05,
            s_values: None,
            out: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: Display,
{
    value.parse().map_err(|e| format!("{key}: cannot parse {value:?}: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(format!("{key}: expected a boolean, got {value:?}")),
    }
}

/// `a,b,c` or an inclusive `start:step:stop` range.
pub fn parse_grid(key: &str, value: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    let grid = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) =
                (parse(key, start)?, parse(key, step)?, parse(key, stop)?);
            if !(step > 0.0) || stop < start {
                return Err(format!("{key}: range {value:?} needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + step * i as f64).collect()
        }
        [_] => value
            .split(',')
            .map(|v| parse(key, v.trim()))
            .collect::<Result<Vec<f64>, _>>()?,
        _ => return Err(format!("{key}: expected a list or start:step:stop, got {value:?}")),
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(format!("{key}: empty or non-finite grid {value:?}"));
    }
    Ok(grid)
}

pub fn parse_usize_grid(key: &str, value: &str) -> Result<Vec<usize>, String> {
    parse_grid(key, value)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(format!("{key}: {v} is not a non-negative integer"))
            }
        })
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key.trim() {
            "a" => self.payload_bits = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "e" => self.e = Some(parse(key, value)?),
            "m" => self.bits_per_symbol = parse(key, value)?,
            "s" => {
                self.shaping_bits = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "list" => self.list_size = parse(key, value)?,
            "precoder_list" => self.precoder_list_size = parse(key, value)?,
            "scrambler" => self.scrambler = Scrambler::parse(value).map_err(|e| e.to_string())?,
            "snr_db" => self.snr_db = parse_grid(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "max_trials" => self.max_trials = parse(key, value)?,
            "target_errors" => self.target_errors = parse(key, value)?,
            "recheck" => self.recheck_shaping = parse_bool(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "target_bler" => self.target_bler = parse(key, value)?,
            "snr_lo" => self.snr_lo_db = parse(key, value)?,
            "snr_hi" => self.snr_hi_db = parse(key, value)?,
            "snr_step" => self.snr_step_db = parse(key, value)?,
            "tolerance" => self.tolerance_db = parse(key, value)?,
            "s_values" => self.s_values = Some(parse_usize_grid(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file on top of the defaults.
    pub fn from_key_values(text: &str, source: &str) -> Result<Self, CliError> {
        let mut config = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Config {
                file: source.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            config.set(key, value).map_err(err)?;
        }
        Ok(config)
    }

    /// Loads a key-value file, or the `run_config` of a JSON run manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if path.extension().is_some_and(|x| x == "json") {
            let manifest: Manifest = serde_json::from_str(&text)?;
            return Ok(manifest.run_config);
        }
        Self::from_key_values(&text, &path.display().to_string())
    }

    /// Key-value text that parses back to `self`.
    pub fn to_key_values(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("a", self.payload_bits.to_string());
        put("n", self.n.to_string());
        if let Some(e) = self.e {
            put("e", e.to_string());
        }
        put("m", self.bits_per_symbol.to_string());
        put("s", self.shaping_bits.map_or("auto".into(), |s| s.to_string()));
        put("list", self.list_size.to_string());
        put("precoder_list", self.precoder_list_size.to_string());
        put("scrambler", self.scrambler.to_string());
        put("snr_db", join(&self.snr_db));
        put("seed", self.seed.to_string());
        put("max_trials", self.max_trials.to_string());
        put("target_errors", self.target_errors.to_string());
        put("recheck", self.recheck_shaping.to_string());
        put("workers", self.workers.to_string());
        put("target_bler", self.target_bler.to_string());
        put("snr_lo", self.snr_lo_db.to_string());
        put("snr_hi", self.snr_hi_db.to_string());
        put("snr_step", self.snr_step_db.to_string());
        put("tolerance", self.tolerance_db.to_string());
        if let Some(s) = &self.s_values {
            put("s_values", s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        }
        if let Some(o) = &self.out {
            put("out", o.display().to_string());
        }
        out
    }

    /// Code configuration for shaping-bit count `s`, validated.
    pub fn code_config(&self, s: usize) -> Result<CodeConfig, CliError> {
        let config = CodeConfig {
            e: self.e.unwrap_or(self.n),
            list_size: self.list_size,
            precoder_list_size: self.precoder_list_size,
            scrambler: self.scrambler,
            ..CodeConfig::new(self.payload_bits, self.n, self.bits_per_symbol, s)
        };
        config.validate()?;
        Ok(config)
    }

    /// S values for a sweep: `s_values` if given, else every 16 up to the
    /// largest valid S.
    pub fn sweep_values(&self) -> Result<Vec<usize>, CliError> {
        if let Some(s) = &self.s_values {
            for &v in s {
                self.code_config(v)?;
            }
            return Ok(s.clone());
        }
        let base = self.code_config(0)?;
        let limit = base.shaped_len().min(base.n - base.k());
        Ok((0..=limit).step_by(16).collect())
    }

    /// Validates every configuration the run would touch.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.shaping_bits {
            Some(s) => self.code_config(s).map(drop),
            None => self.sweep_values().map(drop),
        }?;
        if !(self.target_bler > 0.0 && self.target_bler < 1.0) {
            return Err(CliError::Invalid(format!("target_bler {} outside (0, 1)", self.target_bler)));
        }
        if self.max_trials == 0 {
            return Err(CliError::Invalid("max_trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn sim_settings(&self) -> SimSettings {
        SimSettings {
            max_trials: self.max_trials,
            target_errors: self.target_errors,
            master_seed: self.seed,
            workers: self.workers,
            recheck_shaping: self.recheck_shaping,
        }
    }

    pub fn search_settings(&self) -> SearchSettings {
        SearchSettings {
            target_bler: self.target_bler,
            lo_db: self.snr_lo_db,
            hi_db: self.snr_hi_db,
            step_db: self.snr_step_db,
            tolerance_db: self.tolerance_db,
            sim: self.sim_settings(),
        }
    }
}

/// JSON written next to every simulation CSV; feeding it back through
/// `--config` replays the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub run_config: RunConfig,
    pub outputs: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("x", "1:0.5:2").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("x", "3, 1").unwrap(), vec![3.0, 1.0]);
        assert!(parse_grid("x", "2:1:1").is_err());
        assert!(parse_usize_grid("x", "0:16:40").unwrap() == vec![0, 16, 32]);
        assert!(parse_usize_grid("x", "1.5").is_err());
    }

    #[test]
    fn key_values_roundtrip() {
        let text = "a = 640\nm=4 # 16-QAM\n\ns = 96\nscrambler = gold:77\nsnr_db = 8:0.25:9\nrecheck = yes\n";
        let c = RunConfig::from_key_values(text, "t").unwrap();
        assert_eq!((c.payload_bits, c.bits_per_symbol, c.shaping_bits), (640, 4, Some(96)));
        assert_eq!(c.snr_db.len(), 5);
        assert_eq!(RunConfig::from_key_values(&c.to_key_values(), "t").unwrap(), c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::from_key_values("a = 1\n\nbogus = 3\n", "f.cfg").unwrap_err();
        assert!(err.to_string().contains("f.cfg:3"), "{err}");
        let err = RunConfig::from_key_values("a = 1\nm\n", "f.cfg").unwrap_err();
        assert!(err.to_string().contains("f.cfg:2"), "{err}");
    }

    #[test]
    fn validation_rejects_bad_shaping() {
        let mut c = RunConfig {
            shaping_bits: Some(64),
            e: Some(1000),
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        c.e = None;
        c.bits_per_symbol = 6;
        assert!(c.validate().is_err());
        c.bits_per_symbol = 8;
        c.shaping_bits = Some(257);
        assert!(c.validate().is_err());
        c.shaping_bits = None;
        assert_eq!(c.sweep_values().unwrap(), (0..=232).step_by(16).collect::<Vec<_>>());
    }
}
