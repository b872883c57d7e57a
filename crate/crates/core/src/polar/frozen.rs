use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Which transform-input positions are frozen, and to what value.
///
/// Frozen values need not be zero: the shaping precoder freezes information
/// bits to their known (arbitrary) values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenPattern {
    mask: Vec<bool>,
    values: Vec<u8>,
}

impl FrozenPattern {
    /// `values` is indexed by position; entries at free positions are ignored
    /// and stored as zero.
    pub fn new(mask: Vec<bool>, values: &BitVector) -> Result<Self> {
        if mask.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: mask.len(),
                actual: values.len(),
            });
        }
        let values = mask
            .iter()
            .zip(values.as_slice())
            .map(|(&frozen, &v)| if frozen { v } else { 0 })
            .collect();
        Ok(Self { mask, values })
    }

    /// All frozen positions at zero.
    pub fn zeros(mask: Vec<bool>) -> Self {
        let values = vec![0; mask.len()];
        Self { mask, values }
    }

    /// Frozen everywhere except `free`, frozen values zero.
    pub fn with_free_positions(n: usize, free: &[usize]) -> Result<Self> {
        let mut mask = vec![true; n];
        for &i in free {
            if i >= n {
                return Err(Error::InvalidParameter(format!("free position {i} >= {n}")));
            }
            mask[i] = false;
        }
        Ok(Self::zeros(mask))
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    #[inline]
    pub fn is_frozen(&self, i: usize) -> bool {
        self.mask[i]
    }

    #[inline]
    pub fn value(&self, i: usize) -> u8 {
        self.values[i]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Ascending non-frozen positions.
    pub fn free_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.mask[i]).collect()
    }

    pub fn free_count(&self) -> usize {
        self.mask.iter().filter(|&&f| !f).count()
    }

    /// True when `u` carries the frozen values at every frozen position.
    pub fn admits(&self, u: &BitVector) -> bool {
        u.len() == self.len()
            && (0..self.len()).all(|i| !self.mask[i] || u[i] == self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_positions_and_values() {
        let p = FrozenPattern::new(
            vec![true, false, true, false],
            &BitVector::parse("1110").unwrap(),
        )
        .unwrap();
        assert_eq!(p.free_positions(), vec![1, 3]);
        assert_eq!(p.value(0), 1);
        assert_eq!(p.value(1), 0);
        assert!(p.admits(&BitVector::parse("1011").unwrap()));
        assert!(!p.admits(&BitVector::parse("0011").unwrap()));
        assert!(FrozenPattern::with_free_positions(4, &[4]).is_err());
    }
}
