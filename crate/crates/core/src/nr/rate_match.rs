//! Bit selection (repetition, puncturing, shortening) and its receiver-side inverse.

use serde::{Deserialize, Serialize};

use crate::bits::{BitVector, LLR_CAP};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionMode {
    /// `E ≥ N`: read cyclically (plain passthrough when `E = N`).
    Repetition,
    /// `E < N`, `K/E ≤ 7/16`: drop the first `N − E` bits.
    Puncturing,
    /// `E < N`, `K/E > 7/16`: drop the last `N − E` bits.
    Shortening,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitSelection {
    n: usize,
    mode: SelectionMode,
    indices: Vec<usize>,
}

impl BitSelection {
    pub fn new(n: usize, e: usize, k: usize) -> Result<Self> {
        if e == 0 || n == 0 {
            return Err(Error::InvalidParameter("bit selection needs N, E ≥ 1".into()));
        }
        let mode = if e >= n {
            SelectionMode::Repetition
        } else if 16 * k <= 7 * e {
            SelectionMode::Puncturing
        } else {
            SelectionMode::Shortening
        };
        let indices = match mode {
            SelectionMode::Repetition => (0..e).map(|i| i % n).collect(),
            SelectionMode::Puncturing => (n - e..n).collect(),
            SelectionMode::Shortening => (0..e).collect(),
        };
        Ok(Self { n, mode, indices })
    }

    pub fn mode(&self) -> SelectionMode {
        self.mode
    }

    /// The 0-based index set ℰ into `y`.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn output_len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_identity(&self) -> bool {
        self.indices.len() == self.n
    }

    pub fn select<T: Copy>(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: y.len(),
            });
        }
        Ok(self.indices.iter().map(|&i| y[i]).collect())
    }

    pub fn select_bits(&self, y: &BitVector) -> Result<BitVector> {
        Ok(BitVector::new(self.select(y.as_slice())?).expect("binary"))
    }

    /// Length-`N` LLRs for `y`: repeated copies are combined, punctured bits
    /// are erasures (0) and shortened bits are known zeros (+cap).
    pub fn recover(&self, llr_e: &[f64]) -> Result<Vec<f64>> {
        if llr_e.len() != self.indices.len() {
            return Err(Error::LengthMismatch {
                expected: self.indices.len(),
                actual: llr_e.len(),
            });
        }
        let fill = match self.mode {
            SelectionMode::Shortening => LLR_CAP,
            _ => 0.0,
        };
        let mut out = vec![fill; self.n];
        if self.mode == SelectionMode::Repetition {
            out.iter_mut().for_each(|v| *v = 0.0);
            for (&i, &l) in self.indices.iter().zip(llr_e) {
                out[i] += l;
            }
        } else {
            for (&i, &l) in self.indices.iter().zip(llr_e) {
                out[i] = l;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_lengths_match() {
        let s = BitSelection::new(1024, 1024, 792).unwrap();
        assert_eq!(s.indices(), (0..1024).collect::<Vec<_>>().as_slice());
        assert!(s.is_identity());
    }

    #[test]
    fn puncturing_branch() {
        let s = BitSelection::new(512, 256, 96).unwrap();
        assert_eq!(s.mode(), SelectionMode::Puncturing);
        assert_eq!(s.indices(), (256..512).collect::<Vec<_>>().as_slice());
        let r = s.recover(&[1.0; 256]).unwrap();
        assert!(r[..256].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shortening_branch() {
        let s = BitSelection::new(512, 256, 200).unwrap();
        assert_eq!(s.mode(), SelectionMode::Shortening);
        assert_eq!(s.indices(), (0..256).collect::<Vec<_>>().as_slice());
        let r = s.recover(&[1.0; 256]).unwrap();
        assert!(r[256..].iter().all(|&v| v == LLR_CAP));
    }

    #[test]
    fn repetition_wraps_and_combines() {
        let s = BitSelection::new(256, 300, 100).unwrap();
        let expected: Vec<usize> = (0..256).chain(0..44).collect();
        assert_eq!(s.indices(), expected.as_slice());
        let r = s.recover(&[1.0; 300]).unwrap();
        assert_eq!(r[0], 2.0);
        assert_eq!(r[43], 2.0);
        assert_eq!(r[44], 1.0);
        assert!(s.select(&[0u8; 255]).is_err());
    }
}
