use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Computes `d = u·G` over GF(2), where `G` is the `log2(N)`-fold Kronecker
/// power of `[[1,0],[1,1]]`. The transform is its own inverse.
pub fn polar_transform(u: &BitVector) -> Result<BitVector> {
    let mut d = u.as_slice().to_vec();
    polar_transform_in_place(&mut d)?;
    Ok(BitVector::new(d).expect("transform preserves binary values"))
}

pub fn polar_transform_in_place(bits: &mut [u8]) -> Result<()> {
    let n = bits.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Row-by-row generator matrix product, independent of the butterfly.
    fn via_generator(u: &[u8]) -> Vec<u8> {
        let n = u.len();
        // G[i][j] = 1 iff the bits of j are a subset of the bits of i.
        (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&i| i & j == j)
                    .fold(0, |acc, i| acc ^ u[i])
            })
            .collect()
    }

    #[test]
    fn small_cases() {
        let zeros = BitVector::zeros(8);
        assert_eq!(polar_transform(&zeros).unwrap(), zeros);
        let u = BitVector::parse("01").unwrap();
        assert_eq!(polar_transform(&u).unwrap().as_slice(), &[1, 1]);
        assert_eq!(
            polar_transform(&BitVector::zeros(12)),
            Err(Error::NotPowerOfTwo(12))
        );
    }

    #[test]
    fn involution_n256() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u = BitVector::random(256, &mut rng);
            let d = polar_transform(&u).unwrap();
            assert_eq!(polar_transform(&d).unwrap(), u);
        }
    }

    #[test]
    fn matches_generator_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [1, 2, 4, 16, 64] {
            let u = BitVector::random(n, &mut rng);
            assert_eq!(polar_transform(&u).unwrap().as_slice(), via_generator(u.as_slice()));
        }
    }

    proptest! {
        #[test]
        fn involutive_and_linear(log_n in 0u32..=10, seed in any::<u64>()) {
            let n = 1usize << log_n;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = BitVector::random(n, &mut rng);
            let b = BitVector::random(n, &mut rng);
            let ta = polar_transform(&a).unwrap();
            let tb = polar_transform(&b).unwrap();
            prop_assert_eq!(polar_transform(&ta).unwrap(), a.clone());
            prop_assert_eq!(polar_transform(&(&a ^ &b)).unwrap(), &ta ^ &tb);
        }
    }
}
