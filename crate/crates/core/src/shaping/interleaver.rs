//! Code-bit interleaver that routes the shaped sub-codeword onto the
//! amplitude-class bit-levels, and the matching pre-interleaver scrambler.

use crate::bits::BitVector;
use crate::error::{invalid, Error, Result};
use crate::nr::interleave::Permutation;
use crate::nr::qam::{SHAPED_LEVEL_IM, SHAPED_LEVEL_RE};
use crate::nr::rate_match::BitSelection;

use std::ops::Range;

/// Output position `k` of the code-bit interleaver feeds an amplitude-class bit-level.
pub fn is_shaped_level(k: usize, bits_per_symbol: usize) -> bool {
    bits_per_symbol >= 4 && {
        let level = k % bits_per_symbol;
        level == SHAPED_LEVEL_RE || level == SHAPED_LEVEL_IM
    }
}

/// Marks the rate-matched positions `e_k` whose bit comes from `d_𝒟`.
pub fn d_origin(subblock: &Permutation, selection: &BitSelection, region: Range<usize>) -> Vec<bool> {
    selection
        .indices()
        .iter()
        .map(|&i| region.contains(&subblock.source()[i]))
        .collect()
}

/// Swaps entries of `standard` until every amplitude-class output position
/// reads a `𝒟`-descended input and no other position does.
///
/// Target outputs are visited in ascending order; a target holding a foreign
/// bit is exchanged with the lowest non-target output still holding a
/// `𝒟`-descended bit. Positions that already comply are left alone.
pub fn modified_cb_interleaver(standard: &Permutation, bits_per_symbol: usize, origin: &[bool]) -> Result<Permutation> {
    let e = standard.len();
    if origin.len() != e {
        return Err(Error::LengthMismatch {
            expected: e,
            actual: origin.len(),
        });
    }
    let targets = (0..e).filter(|&k| is_shaped_level(k, bits_per_symbol)).count();
    let shaped = origin.iter().filter(|&&o| o).count();
    if targets != shaped {
        return Err(invalid(format!(
            "{shaped} shaped bits cannot fill {targets} amplitude-class positions"
        )));
    }
    let mut out = standard.clone();
    let holds = |p: &Permutation, k: usize| origin[p.source()[k]];
    // Donors only ever lose their shaped bit, so one forward cursor suffices.
    let mut donor = 0;
    for t in 0..e {
        if !is_shaped_level(t, bits_per_symbol) || holds(&out, t) {
            continue;
        }
        while is_shaped_level(donor, bits_per_symbol) || !holds(&out, donor) {
            donor += 1;
        }
        out.swap_outputs(t, donor);
    }
    Ok(out)
}

/// `v̄` with `Π_CB(Π_SB(v̄)) = v`, so scrambling before the interleavers
/// equals scrambling after them (requires `E = N`).
pub fn equivalent_scrambler(v: &BitVector, subblock: &Permutation, cb: &Permutation) -> Result<BitVector> {
    if cb.len() != subblock.len() {
        return Err(invalid(format!(
            "equivalent scrambler needs E = N (E = {}, N = {})",
            cb.len(),
            subblock.len()
        )));
    }
    subblock.invert_bits(&cb.invert_bits(v)?)
}
