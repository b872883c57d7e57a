use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::nr::CodeConfig;
use crate::shaping::Codec;

use super::bler::{run_point, SimResult, SimSettings};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub target_bler: f64,
    /// Initial bracket in dB; widened in `step_db` steps if it misses the target.
    pub lo_db: f64,
    pub hi_db: f64,
    pub step_db: f64,
    pub tolerance_db: f64,
    pub sim: SimSettings,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            target_bler: 1e-2,
            lo_db: 10.0,
            hi_db: 20.0,
            step_db: 1.0,
            tolerance_db: 0.05,
            sim: SimSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequiredSnr {
    pub shaping_bits: usize,
    pub required_snr_db: f64,
    /// Final bracket: BLER above target at `lo`, at or below it at `hi`.
    pub lo: SimResult,
    pub hi: SimResult,
    pub probes: Vec<SimResult>,
}

/// SNR at which the BLER crosses `target_bler`: bisection down to
/// `tolerance_db`, then log-BLER interpolation inside the final bracket.
///
/// Every probe uses the same trial streams, so the BLER-vs-SNR estimate is
/// monotone up to decoder effects rather than sampling noise.
pub fn required_snr(codec: &Codec, search: &SearchSettings, stream: u64) -> Result<RequiredSnr> {
    if !(search.target_bler > 0.0 && search.target_bler < 1.0) {
        return Err(invalid(format!("target BLER {} outside (0, 1)", search.target_bler)));
    }
    if !(search.lo_db < search.hi_db) || !(search.tolerance_db > 0.0) || !(search.step_db > 0.0) {
        return Err(invalid("search needs lo < hi and positive tolerance and step"));
    }
    let mut probes = Vec::new();
    let probe = |snr: f64, probes: &mut Vec<SimResult>| -> Result<SimResult> {
        let r = run_point(codec, snr, stream, &search.sim)?;
        probes.push(r.clone());
        Ok(r)
    };
    const MAX_WIDEN: usize = 40;
    let mut lo = probe(search.lo_db, &mut probes)?;
    let mut widen = 0;
    while lo.bler <= search.target_bler {
        widen += 1;
        if widen > MAX_WIDEN {
            return Err(invalid("could not bracket the target BLER from below"));
        }
        lo = probe(lo.snr_db - search.step_db, &mut probes)?;
    }
    let mut hi = probe(search.hi_db.max(lo.snr_db + search.step_db), &mut probes)?;
    while hi.bler > search.target_bler {
        widen += 1;
        if widen > MAX_WIDEN {
            return Err(invalid("could not bracket the target BLER from above"));
        }
        lo = hi;
        hi = probe(lo.snr_db + search.step_db, &mut probes)?;
    }
    while hi.snr_db - lo.snr_db > search.tolerance_db {
        let mid = probe(0.5 * (lo.snr_db + hi.snr_db), &mut probes)?;
        if mid.bler > search.target_bler {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let required = if hi.block_errors == 0 {
        hi.snr_db
    } else {
        let (a, b, t) = (lo.bler.ln(), hi.bler.ln(), search.target_bler.ln());
        lo.snr_db + (a - t) / (a - b) * (hi.snr_db - lo.snr_db)
    };
    Ok(RequiredSnr {
        shaping_bits: codec.config().shaping_bits,
        required_snr_db: required,
        lo,
        hi,
        probes,
    })
}

/// Required SNR for each shaping-bit count, all on common trial streams.
pub fn sweep_shaping_bits(base: &CodeConfig, s_values: &[usize], search: &SearchSettings) -> Result<Vec<RequiredSnr>> {
    s_values
        .iter()
        .map(|&s| {
            let codec = Codec::new(CodeConfig {
                shaping_bits: s,
                ..base.clone()
            })?;
            required_snr(&codec, search, 0)
        })
        .collect()
}
