use crate::bits::BitVector;

use super::DecodeCandidate;

/// Outcome of CRC-aided list selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Selected {
    /// Position of the chosen candidate in the (metric-sorted) list.
    pub rank: usize,
    /// Information bits extracted from the chosen candidate.
    pub info: BitVector,
}

/// Returns the lowest-metric candidate whose information bits pass `check`,
/// or `None` when every candidate fails (a detected block error).
///
/// `info_positions` gives the order in which information bits are read out of
/// `u_hat`; `check` sees them in that order.
pub fn crc_select<F>(
    candidates: &[DecodeCandidate],
    info_positions: &[usize],
    mut check: F,
) -> Option<Selected>
where
    F: FnMut(&BitVector) -> bool,
{
    candidates.iter().enumerate().find_map(|(rank, c)| {
        let info = c.u_hat.select(info_positions);
        check(&info).then_some(Selected { rank, info })
    })
}
