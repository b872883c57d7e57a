//! Offline relation between the number of shaping bits and the resulting
//! ones-probability of the shaped sub-codeword.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::asymptotic_shaping_bits;
use crate::bits::BitVector;
use crate::error::{invalid, Error, Result};
use crate::nr::tables::ReliabilitySequence;
use crate::polar::polar_transform;

use super::precoder::{shaped_region, shaping_set, Precoder};

/// Any `p < 0.5` gives the same min-sum precoder decisions; only the sign
/// pattern of the LLRs matters.
const CALIBRATION_P: f64 = 0.25;

const CSV_HEADER: &str = "S,p_hat,realizations";
const CSV_VERSION: u32 = 1;

/// Average ones-fraction of `d_𝒟` with `s` shaping bits, every other
/// position of the sub-codeword random and `v̄ = 0`.
///
/// Realization `r` uses the same random stream for every `s`, so a sweep
/// compares shaping-bit counts on identical payloads.
pub fn calibrate_s_to_p(
    n: usize,
    bits_per_symbol: usize,
    s: usize,
    realizations: usize,
    list_size: usize,
    seed: u64,
) -> Result<f64> {
    if realizations == 0 {
        return Err(invalid("calibration needs at least one realization"));
    }
    if !n.is_power_of_two() || bits_per_symbol < 4 {
        return Err(invalid(format!("cannot calibrate N = {n}, M = {bits_per_symbol}")));
    }
    let region = shaped_region(n, bits_per_symbol);
    let holes: Vec<usize> = shaping_set(ReliabilitySequence::standard(), n, bits_per_symbol, s)?
        .into_iter()
        .map(|h| h - region.start)
        .collect();
    let len = region.len();
    let zeros = BitVector::zeros(len);
    let ones: usize = (0..realizations)
        .into_par_iter()
        .map_init(
            || Precoder::new(len, list_size).expect("validated length"),
            |pre, r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                let mut u = BitVector::random(len, &mut rng).into_inner();
                for &h in &holes {
                    u[h] = 0;
                }
                let u_hat = BitVector::new(u).expect("binary");
                let bits = pre
                    .shaping_bits(&u_hat, &holes, &zeros, CALIBRATION_P)
                    .expect("consistent lengths");
                let mut u = u_hat.into_inner();
                for (&h, &b) in holes.iter().zip(bits.as_slice()) {
                    u[h] = b;
                }
                polar_transform(&BitVector::new(u).expect("binary"))
                    .expect("power of two")
                    .count_ones()
            },
        )
        .sum();
    Ok(ones as f64 / (realizations * len) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub s: usize,
    pub p_hat: f64,
    pub realizations: usize,
}

/// Measured `(S, p̂)` pairs for one `(N, M, list size)`, sorted by `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub n: usize,
    pub bits_per_symbol: usize,
    pub list_size: usize,
    rows: Vec<CalibrationRow>,
}

impl CalibrationTable {
    pub fn new(n: usize, bits_per_symbol: usize, list_size: usize, mut rows: Vec<CalibrationRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("calibration table has no rows"));
        }
        rows.sort_by_key(|r| r.s);
        if rows.windows(2).any(|w| w[0].s == w[1].s) {
            return Err(invalid("duplicate S in calibration table"));
        }
        if let Some(r) = rows.iter().find(|r| !(0.0..=1.0).contains(&r.p_hat)) {
            return Err(invalid(format!("p_hat = {} at S = {} outside [0, 1]", r.p_hat, r.s)));
        }
        Ok(Self {
            n,
            bits_per_symbol,
            list_size,
            rows,
        })
    }

    /// Calibrates every `S` in `s_values`. Sampling noise can leave tiny
    /// upticks between neighbouring `S`; the stored curve is the
    /// least-squares non-increasing fit (pool-adjacent-violators).
    pub fn sweep(
        n: usize,
        bits_per_symbol: usize,
        s_values: &[usize],
        realizations: usize,
        list_size: usize,
        seed: u64,
    ) -> Result<Self> {
        let rows = s_values
            .iter()
            .map(|&s| {
                Ok(CalibrationRow {
                    s,
                    p_hat: calibrate_s_to_p(n, bits_per_symbol, s, realizations, list_size, seed)?,
                    realizations,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut table = Self::new(n, bits_per_symbol, list_size, rows)?;
        table.make_non_increasing();
        Ok(table)
    }

    fn make_non_increasing(&mut self) {
        // Blocks of (sum of weighted values, total weight, row count).
        let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
        for r in &self.rows {
            let w = r.realizations.max(1) as f64;
            blocks.push((r.p_hat * w, w, 1));
            while blocks.len() > 1 {
                let (b, a) = (blocks[blocks.len() - 1], blocks[blocks.len() - 2]);
                if a.0 / a.1 >= b.0 / b.1 {
                    break;
                }
                blocks.pop();
                *blocks.last_mut().expect("two blocks") = (a.0 + b.0, a.1 + b.1, a.2 + b.2);
            }
        }
        let mut i = 0;
        for (sum, w, count) in blocks {
            for r in &mut self.rows[i..i + count] {
                r.p_hat = sum / w;
            }
            i += count;
        }
    }

    /// Tables shipped with the crate: `N = 1024`, `M ∈ {4, 8}`, list size 8,
    /// every `S` from 0 to `N/(M/2)` at 500 realizations each.
    pub fn bundled(n: usize, bits_per_symbol: usize, list_size: usize) -> Option<Self> {
        let text = match (n, bits_per_symbol, list_size) {
            (1024, 8, 8) => include_str!("../../assets/calibration_1024_8_8.csv"),
            (1024, 4, 8) => include_str!("../../assets/calibration_1024_4_8.csv"),
            _ => return None,
        };
        Some(Self::from_csv(text, &Self::file_name(n, bits_per_symbol, list_size)).expect("bundled calibration is valid"))
    }

    pub fn file_name(n: usize, bits_per_symbol: usize, list_size: usize) -> String {
        format!("calibration_{n}_{bits_per_symbol}_{list_size}.csv")
    }

    pub fn rows(&self) -> &[CalibrationRow] {
        &self.rows
    }

    /// `p̂(S)`, linearly interpolated between calibrated neighbours.
    pub fn p_hat(&self, s: usize) -> Option<f64> {
        match self.rows.binary_search_by_key(&s, |r| r.s) {
            Ok(i) => Some(self.rows[i].p_hat),
            Err(i) if i > 0 && i < self.rows.len() => {
                let (a, b) = (self.rows[i - 1], self.rows[i]);
                let t = (s - a.s) as f64 / (b.s - a.s) as f64;
                Some(a.p_hat + t * (b.p_hat - a.p_hat))
            }
            _ => None,
        }
    }

    /// `argmin_S |p̂(S) − p|`, smallest `S` on ties.
    pub fn s_for_p(&self, p: f64) -> usize {
        self.rows
            .iter()
            .min_by(|a, b| (a.p_hat - p).abs().total_cmp(&(b.p_hat - p).abs()).then(a.s.cmp(&b.s)))
            .expect("non-empty table")
            .s
    }

    /// Mean of `S − S_asym(p̂(S))` over the rows with `S > 0`, where
    /// `S_asym` is the infinite-length shaping-bit count at the same `p`.
    pub fn mean_offset(&self) -> f64 {
        let offsets: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.s > 0)
            .map(|r| {
                r.s as f64 - asymptotic_shaping_bits(self.n, self.bits_per_symbol, r.p_hat.min(0.5)) as f64
            })
            .collect();
        offsets.iter().sum::<f64>() / offsets.len().max(1) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# calibration v{CSV_VERSION} n={} m={} list={}\n{CSV_HEADER}\n",
            self.n, self.bits_per_symbol, self.list_size
        );
        for r in &self.rows {
            writeln!(out, "{},{:.6},{}", r.s, r.p_hat, r.realizations).expect("string write");
        }
        out
    }

    /// Parses the CSV form; `asset` names the source in error messages.
    pub fn from_csv(text: &str, asset: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Asset {
            asset: asset.to_string(),
            line,
            message,
        };
        let mut meta: Option<(usize, usize, usize)> = None;
        let mut header = false;
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(comment) = t.strip_prefix('#') {
                let mut fields = comment.split_whitespace();
                if fields.next() != Some("calibration") {
                    continue;
                }
                let version = fields.next().unwrap_or("");
                if version != format!("v{CSV_VERSION}") {
                    return Err(err(line, format!("unsupported version {version:?}")));
                }
                let mut get = |key: &str| -> Result<usize> {
                    fields
                        .next()
                        .and_then(|f| f.strip_prefix(key))
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| err(line, format!("missing {key}")))
                };
                meta = Some((get("n=")?, get("m=")?, get("list=")?));
                continue;
            }
            if !header {
                if t != CSV_HEADER {
                    return Err(err(line, format!("expected header {CSV_HEADER:?}, found {t:?}")));
                }
                header = true;
                continue;
            }
            let cols: Vec<&str> = t.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(err(line, format!("expected 3 columns, found {}", cols.len())));
            }
            let s = cols[0].parse().map_err(|_| err(line, format!("bad S {:?}", cols[0])))?;
            let p_hat: f64 = cols[1].parse().map_err(|_| err(line, format!("bad p_hat {:?}", cols[1])))?;
            let realizations = cols[2]
                .parse()
                .map_err(|_| err(line, format!("bad realizations {:?}", cols[2])))?;
            if !(0.0..=1.0).contains(&p_hat) {
                return Err(err(line, format!("p_hat {p_hat} outside [0, 1]")));
            }
            rows.push(CalibrationRow { s, p_hat, realizations });
        }
        if !header {
            return Err(err(0, "missing header".into()));
        }
        let (n, m, l) = meta.ok_or_else(|| err(0, "missing '# calibration' metadata line".into()))?;
        Self::new(n, m, l, rows).map_err(|e| err(0, e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Asset {
            asset: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        Self::from_csv(&text, &path.display().to_string())
    }
}

/// Prior `p̂(S)` for a shaped configuration: the bundled table when one
/// matches, otherwise a fresh calibration with `realizations` draws.
pub fn prior_for(n: usize, bits_per_symbol: usize, s: usize, list_size: usize, realizations: usize) -> Result<f64> {
    if s == 0 {
        return Ok(0.5);
    }
    if let Some(p) = CalibrationTable::bundled(n, bits_per_symbol, list_size).and_then(|t| t.p_hat(s)) {
        return Ok(p);
    }
    calibrate_s_to_p(n, bits_per_symbol, s, realizations, list_size, 0)
}
