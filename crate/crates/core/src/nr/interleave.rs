//! Polar (input-bit), sub-block and triangular code-bit interleavers.

use crate::bits::BitVector;
use crate::error::{Error, Result};

use super::tables::{PolarInterleaverPattern, SubblockPattern, K_IL_MAX, SUBBLOCKS};

/// A bijection on `0..len`: output position `k` takes input position `source[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    source: Vec<usize>,
    target: Vec<usize>,
}

impl Permutation {
    pub fn new(source: Vec<usize>) -> Result<Self> {
        let mut target = vec![usize::MAX; source.len()];
        for (k, &s) in source.iter().enumerate() {
            if s >= source.len() || target[s] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "not a permutation: entry {s} at {k}"
                )));
            }
            target[s] = k;
        }
        Ok(Self { source, target })
    }

    pub fn identity(len: usize) -> Self {
        Self {
            source: (0..len).collect(),
            target: (0..len).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.source.iter().enumerate().all(|(k, &s)| k == s)
    }

    /// `source[k]`: the input index read by output position `k`.
    pub fn source(&self) -> &[usize] {
        &self.source
    }

    /// `target[i]`: the output position that input index `i` lands on.
    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn inverse(&self) -> Self {
        Self {
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &Permutation) -> Result<Self> {
        self.check(first.len())?;
        Permutation::new(self.source.iter().map(|&s| first.source[s]).collect())
    }

    pub fn apply<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        Ok(self.source.iter().map(|&s| input[s]).collect())
    }

    pub fn invert<T: Copy>(&self, output: &[T]) -> Result<Vec<T>> {
        self.check(output.len())?;
        Ok(self.target.iter().map(|&t| output[t]).collect())
    }

    pub fn apply_bits(&self, input: &BitVector) -> Result<BitVector> {
        Ok(BitVector::new(self.apply(input.as_slice())?).expect("binary"))
    }

    pub fn invert_bits(&self, output: &BitVector) -> Result<BitVector> {
        Ok(BitVector::new(self.invert(output.as_slice())?).expect("binary"))
    }

    /// Exchanges the sources of output positions `a` and `b`.
    pub fn swap_outputs(&mut self, a: usize, b: usize) {
        self.source.swap(a, b);
        self.target[self.source[a]] = a;
        self.target[self.source[b]] = b;
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Polar interleaver `Π_P` for `k` bits: `c'_j = c_{Π(j)}`.
///
/// The tabulated pattern only covers `k ≤ 164`; longer inputs pass unchanged.
pub fn polar_interleaver(k: usize, pattern: &PolarInterleaverPattern) -> Permutation {
    if k > K_IL_MAX {
        return Permutation::identity(k);
    }
    let offset = K_IL_MAX - k;
    let source = pattern
        .as_slice()
        .iter()
        .filter(|&&p| p >= offset)
        .map(|&p| p - offset)
        .collect();
    Permutation::new(source).expect("filtered pattern is a permutation")
}

/// Sub-block interleaver `Π_SB`: output `n` takes input
/// `P(⌊32n/N⌋)·(N/32) + (n mod N/32)`.
pub fn subblock_interleaver(n: usize, pattern: &SubblockPattern) -> Result<Permutation> {
    if n == 0 || n % SUBBLOCKS != 0 {
        return Err(Error::InvalidParameter(format!(
            "sub-block interleaver length {n} is not a positive multiple of 32"
        )));
    }
    let block = n / SUBBLOCKS;
    let p = pattern.as_slice();
    Permutation::new((0..n).map(|i| p[i / block] * block + i % block).collect())
}

/// Smallest `T` with `T(T+1)/2 ≥ e`.
pub fn triangle_size(e: usize) -> usize {
    let mut t = 0;
    while t * (t + 1) / 2 < e {
        t += 1;
    }
    t
}

/// Triangular code-bit interleaver `Π_CB`: write row-wise into rows of length
/// `T, T−1, …, 1`, read column-wise, skipping the unfilled tail.
pub fn triangular_interleaver(e: usize) -> Permutation {
    let t = triangle_size(e);
    // row_start[i] is the linear write index of the first cell in row i.
    let mut row_start = Vec::with_capacity(t);
    let mut acc = 0;
    for i in 0..t {
        row_start.push(acc);
        acc += t - i;
    }
    let mut source = Vec::with_capacity(e);
    for col in 0..t {
        for row in 0..t - col {
            let idx = row_start[row] + col;
            if idx < e {
                source.push(idx);
            }
        }
    }
    Permutation::new(source).expect("triangular pattern is a permutation")
}
