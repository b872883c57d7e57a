//! Placement of information bits on the polar transform input.

use crate::error::{Error, Result};
use crate::polar::FrozenPattern;

use super::interleave::Permutation;
use super::rate_match::{BitSelection, SelectionMode};
use super::tables::ReliabilitySequence;

/// Frozen pattern plus the information positions in ascending index order
/// (the order in which `c'` is written into `u`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoPlacement {
    pub pattern: FrozenPattern,
    pub info_positions: Vec<usize>,
}

/// Indices left frozen because the rate matching never transmits them
/// (puncturing, shortening); empty for `E ≥ N`.
pub fn rate_matching_frozen(n: usize, e: usize, k: usize, subblock: &Permutation) -> Result<Vec<bool>> {
    if subblock.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: subblock.len(),
        });
    }
    let mut frozen = vec![false; n];
    if e >= n {
        return Ok(frozen);
    }
    let j = subblock.source();
    match BitSelection::new(n, e, k)?.mode() {
        SelectionMode::Puncturing => {
            for &idx in &j[..n - e] {
                frozen[idx] = true;
            }
            let lead = lead_count(n, e).unwrap_or(0);
            frozen[..lead.min(n)].iter_mut().for_each(|f| *f = true);
        }
        SelectionMode::Shortening => {
            for &idx in &j[e..] {
                frozen[idx] = true;
            }
        }
        SelectionMode::Repetition => {}
    }
    Ok(frozen)
}

/// `⌈3N/4 − E/2⌉` when `E ≥ 3N/4`, else `⌈9N/16 − E/4⌉`, computed exactly.
fn lead_count(n: usize, e: usize) -> Option<usize> {
    if 4 * e >= 3 * n {
        (3 * n).checked_sub(2 * e).map(|num| num.div_ceil(4))
    } else {
        (9 * n).checked_sub(4 * e).map(|num| num.div_ceil(16))
    }
}

/// The `k` most reliable positions below `n` (after removing `excluded`)
/// carry information; everything else is frozen to zero.
pub fn place_information(
    n: usize,
    k: usize,
    seq: &ReliabilitySequence,
    excluded: &[bool],
) -> Result<InfoPlacement> {
    if n > seq.len() {
        return Err(Error::InvalidParameter(format!(
            "N = {n} exceeds reliability sequence length {}",
            seq.len()
        )));
    }
    let available = (0..n).filter(|&i| !excluded.get(i).copied().unwrap_or(false)).count();
    if k > available {
        return Err(Error::InvalidParameter(format!(
            "K = {k} exceeds the {available} usable positions of N = {n}"
        )));
    }
    let mut info = seq.most_reliable(n, k, |i| !excluded.get(i).copied().unwrap_or(false));
    info.sort_unstable();
    Ok(InfoPlacement {
        pattern: FrozenPattern::with_free_positions(n, &info)?,
        info_positions: info,
    })
}

/// Conventional construction for `K` information bits at length `N`, rate-matched to `E`.
pub fn build_frozen_pattern(
    n: usize,
    k: usize,
    e: usize,
    seq: &ReliabilitySequence,
    subblock: &Permutation,
) -> Result<InfoPlacement> {
    if k > n {
        return Err(Error::InvalidParameter(format!("K = {k} exceeds N = {n}")));
    }
    let excluded = rate_matching_frozen(n, e, k, subblock)?;
    place_information(n, k, seq, &excluded)
}
