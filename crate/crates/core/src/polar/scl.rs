//! LLR-domain successive cancellation list decoder.
//!
//! Natural bit order (no bit reversal), matching `d = u·G` with the plain
//! Kronecker power. Min-sum check-node update together with the "penalize a
//! decision against the LLR sign by |LLR|" path metric; with an unpruned list
//! the final metric of every path equals the correlation distance of its
//! codeword to the channel hard decisions, so the best candidate is the ML
//! codeword.
//!
//! Intermediate arrays are shared between paths and copied lazily: a path
//! that writes a shared array first detaches onto a spare one. Because every
//! write replaces a whole array, detaching never copies.

use crate::bits::{saturate, BitVector, LlrVector};
use crate::error::{Error, Result};

use super::FrozenPattern;

/// One surviving list entry. Lower `path_metric` means more likely.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeCandidate {
    pub u_hat: BitVector,
    pub path_metric: f64,
}

#[derive(Clone)]
struct ArrayPool<T> {
    len: usize,
    data: Vec<T>,
    refs: Vec<u32>,
    free: Vec<usize>,
}

impl<T: Copy + Default> ArrayPool<T> {
    fn new(count: usize, len: usize) -> Self {
        Self {
            len,
            data: vec![T::default(); count * len],
            refs: vec![0; count],
            free: (0..count).rev().collect(),
        }
    }

    fn reset(&mut self) {
        let count = self.refs.len();
        self.refs.iter_mut().for_each(|r| *r = 0);
        self.free.clear();
        self.free.extend((0..count).rev());
    }

    fn acquire(&mut self) -> usize {
        let id = self.free.pop().expect("array pool exhausted");
        self.refs[id] = 1;
        id
    }

    fn share(&mut self, id: usize) {
        self.refs[id] += 1;
    }

    fn release(&mut self, id: usize) {
        self.refs[id] -= 1;
        if self.refs[id] == 0 {
            self.free.push(id);
        }
    }

    /// Returns an id the caller may overwrite, detaching from sharers if needed.
    fn writable(&mut self, id: usize) -> usize {
        if self.refs[id] > 1 {
            self.refs[id] -= 1;
            self.acquire()
        } else {
            id
        }
    }

    fn get(&self, id: usize) -> &[T] {
        &self.data[id * self.len..(id + 1) * self.len]
    }

    fn get_mut(&mut self, id: usize) -> &mut [T] {
        &mut self.data[id * self.len..(id + 1) * self.len]
    }
}

#[derive(Clone, Copy)]
struct Fork {
    metric: f64,
    bit: u8,
    slot: usize,
}

/// Reusable SCL decoder for a fixed length and list size.
///
/// Holds scratch state; use one instance per thread.
#[derive(Clone)]
pub struct SclDecoder {
    n: usize,
    stages: usize,
    list_size: usize,
    alpha: Vec<ArrayPool<f64>>,
    beta: Vec<ArrayPool<u8>>,
    path_alpha: Vec<usize>,
    path_beta: Vec<usize>,
    active: Vec<bool>,
    metric: Vec<f64>,
    history: Vec<(u8, u16)>,
    free_slots: Vec<usize>,
    channel: Vec<f64>,
    cur: Vec<u8>,
    leaf_llr: Vec<f64>,
    leaf_bit: Vec<u8>,
    forks: Vec<Fork>,
    keep: Vec<[Option<f64>; 2]>,
}

const SIGN: u64 = 1 << 63;

/// `sign(a)·sign(b)·min(|a|, |b|)`, branch-free so the stage loops vectorize.
#[inline]
fn min_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    f64::from_bits(m.to_bits() | ((a.to_bits() ^ b.to_bits()) & SIGN))
}

/// `pb + (1 − 2·bit)·pa`.
#[inline]
fn g_update(pa: f64, pb: f64, bit: u8) -> f64 {
    pb + f64::from_bits(pa.to_bits() ^ ((bit as u64) << 63))
}

#[inline]
fn penalty(llr: f64, bit: u8) -> f64 {
    if (llr < 0.0) as u8 != bit {
        llr.abs()
    } else {
        0.0
    }
}

impl std::fmt::Debug for SclDecoder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SclDecoder")
            .field("n", &self.n)
            .field("list_size", &self.list_size)
            .finish_non_exhaustive()
    }
}

impl SclDecoder {
    pub fn new(n: usize, list_size: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if list_size == 0 {
            return Err(Error::InvalidParameter("list size must be at least 1".into()));
        }
        if list_size > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!("list size {list_size} too large")));
        }
        let stages = n.trailing_zeros() as usize;
        Ok(Self {
            n,
            stages,
            list_size,
            alpha: (0..stages).map(|s| ArrayPool::new(list_size, 1 << s)).collect(),
            beta: (0..stages).map(|s| ArrayPool::new(list_size, 1 << s)).collect(),
            path_alpha: vec![0; list_size * stages],
            path_beta: vec![0; list_size * stages],
            active: vec![false; list_size],
            metric: vec![0.0; list_size],
            history: vec![(0, 0); n * list_size],
            free_slots: Vec::with_capacity(list_size),
            channel: vec![0.0; n],
            cur: vec![0; n.max(2)],
            leaf_llr: vec![0.0; list_size],
            leaf_bit: vec![0; list_size],
            forks: Vec::with_capacity(2 * list_size),
            keep: vec![[None, None]; list_size],
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    /// Decodes and returns up to `list_size` candidates, best first.
    pub fn decode(&mut self, llr: &[f64], pattern: &FrozenPattern) -> Result<Vec<DecodeCandidate>> {
        self.run(llr, pattern)?;
        let mut slots: Vec<usize> = (0..self.list_size).filter(|&l| self.active[l]).collect();
        slots.sort_by(|&a, &b| self.metric[a].total_cmp(&self.metric[b]).then(a.cmp(&b)));
        Ok(slots
            .into_iter()
            .map(|l| DecodeCandidate {
                u_hat: self.backtrack(l),
                path_metric: self.metric[l],
            })
            .collect())
    }

    /// Only the most likely candidate.
    pub fn decode_best(&mut self, llr: &[f64], pattern: &FrozenPattern) -> Result<DecodeCandidate> {
        self.run(llr, pattern)?;
        let best = (0..self.list_size)
            .filter(|&l| self.active[l])
            .min_by(|&a, &b| self.metric[a].total_cmp(&self.metric[b]).then(a.cmp(&b)))
            .expect("at least one path survives");
        Ok(DecodeCandidate {
            u_hat: self.backtrack(best),
            path_metric: self.metric[best],
        })
    }

    fn run(&mut self, llr: &[f64], pattern: &FrozenPattern) -> Result<()> {
        if llr.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: llr.len(),
            });
        }
        if pattern.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: pattern.len(),
            });
        }
        if let Some(i) = llr.iter().position(|v| v.is_nan()) {
            return Err(Error::NonFiniteLlr(i));
        }
        for (c, &v) in self.channel.iter_mut().zip(llr) {
            *c = saturate(v);
        }
        self.reset();

        let mut snapshot = Vec::with_capacity(self.list_size);
        for phi in 0..self.n {
            snapshot.clear();
            snapshot.extend((0..self.list_size).filter(|&l| self.active[l]));
            for &l in &snapshot {
                self.compute_alpha(l, phi);
            }
            if pattern.is_frozen(phi) {
                let v = pattern.value(phi);
                for &l in &snapshot {
                    self.metric[l] += penalty(self.leaf(l), v);
                    self.history[phi * self.list_size + l] = (v, l as u16);
                    self.update_beta(l, phi, v);
                }
            } else {
                self.fork(phi, &snapshot);
            }
        }
        Ok(())
    }

    fn reset(&mut self) {
        for p in &mut self.alpha {
            p.reset();
        }
        for p in &mut self.beta {
            p.reset();
        }
        self.active.iter_mut().for_each(|a| *a = false);
        self.free_slots.clear();
        self.free_slots.extend((1..self.list_size).rev());
        self.active[0] = true;
        self.metric[0] = 0.0;
        for s in 1..self.stages {
            self.path_alpha[s] = self.alpha[s].acquire();
            self.path_beta[s] = self.beta[s].acquire();
        }
    }

    fn fork(&mut self, phi: usize, snapshot: &[usize]) {
        self.forks.clear();
        for &l in snapshot {
            let llr = self.leaf(l);
            for bit in 0..2u8 {
                self.forks.push(Fork {
                    metric: self.metric[l] + penalty(llr, bit),
                    bit,
                    slot: l,
                });
            }
        }
        if self.forks.len() > self.list_size {
            // Ties: bit 0 first, then lower list index. The order is total, so
            // the surviving set is unique and needs no full sort.
            self.forks.select_nth_unstable_by(self.list_size - 1, |a, b| {
                a.metric
                    .total_cmp(&b.metric)
                    .then(a.bit.cmp(&b.bit))
                    .then(a.slot.cmp(&b.slot))
            });
            self.forks.truncate(self.list_size);
        }
        let mut keep = std::mem::take(&mut self.keep);
        keep.iter_mut().for_each(|k| *k = [None, None]);
        for f in &self.forks {
            keep[f.slot][f.bit as usize] = Some(f.metric);
        }
        for &l in snapshot {
            if keep[l] == [None, None] {
                self.kill(l);
            }
        }
        for &l in snapshot {
            match keep[l] {
                [Some(m0), Some(m1)] => {
                    let twin = self.clone_path(l);
                    self.take(phi, l, l, 0, m0);
                    self.take(phi, twin, l, 1, m1);
                }
                [Some(m0), None] => self.take(phi, l, l, 0, m0),
                [None, Some(m1)] => self.take(phi, l, l, 1, m1),
                [None, None] => {}
            }
        }
        self.keep = keep;
    }

    fn take(&mut self, phi: usize, slot: usize, parent: usize, bit: u8, metric: f64) {
        self.metric[slot] = metric;
        self.history[phi * self.list_size + slot] = (bit, parent as u16);
        self.update_beta(slot, phi, bit);
    }

    fn kill(&mut self, l: usize) {
        self.active[l] = false;
        for s in 1..self.stages {
            self.alpha[s].release(self.path_alpha[l * self.stages + s]);
            self.beta[s].release(self.path_beta[l * self.stages + s]);
        }
        self.free_slots.push(l);
    }

    fn clone_path(&mut self, l: usize) -> usize {
        let twin = self.free_slots.pop().expect("free list slot");
        self.active[twin] = true;
        self.metric[twin] = self.metric[l];
        self.leaf_llr[twin] = self.leaf_llr[l];
        self.leaf_bit[twin] = self.leaf_bit[l];
        for s in 1..self.stages {
            let a = self.path_alpha[l * self.stages + s];
            let b = self.path_beta[l * self.stages + s];
            self.alpha[s].share(a);
            self.beta[s].share(b);
            self.path_alpha[twin * self.stages + s] = a;
            self.path_beta[twin * self.stages + s] = b;
        }
        twin
    }

    #[inline]
    fn leaf(&self, l: usize) -> f64 {
        if self.stages == 0 {
            self.channel[0]
        } else {
            self.leaf_llr[l]
        }
    }

    fn compute_alpha(&mut self, l: usize, phi: usize) {
        if self.stages == 0 {
            return;
        }
        let st = self.stages;
        // Stage `top` is the deepest node that changes between leaves phi-1 and phi.
        let (top, right_child) = if phi == 0 {
            (st - 1, false)
        } else {
            (phi.trailing_zeros() as usize, true)
        };
        for s in (1..=top).rev() {
            let half = 1usize << s;
            let slot = l * st + s;
            let id = self.alpha[s].writable(self.path_alpha[slot]);
            self.path_alpha[slot] = id;
            let (lower, upper) = self.alpha.split_at_mut(s + 1);
            let parent: &[f64] = if s + 1 == st {
                &self.channel
            } else {
                upper[0].get(self.path_alpha[slot + 1])
            };
            let out = lower[s].get_mut(id);
            let (pa, pb) = parent.split_at(half);
            if s == top && right_child {
                let left = self.beta[s].get(self.path_beta[slot]);
                for (((o, &a), &b), &bit) in out.iter_mut().zip(pa).zip(pb).zip(left) {
                    *o = g_update(a, b, bit);
                }
            } else {
                for ((o, &a), &b) in out.iter_mut().zip(pa).zip(pb) {
                    *o = min_sum(a, b);
                }
            }
        }
        // Stage 0 holds a single value per path and lives outside the pools.
        let parent: &[f64] = if st == 1 {
            &self.channel
        } else {
            self.alpha[1].get(self.path_alpha[l * st + 1])
        };
        self.leaf_llr[l] = if phi & 1 == 1 {
            g_update(parent[0], parent[1], self.leaf_bit[l])
        } else {
            min_sum(parent[0], parent[1])
        };
    }

    fn update_beta(&mut self, l: usize, phi: usize, bit: u8) {
        let st = self.stages;
        if st == 0 {
            return;
        }
        if phi & 1 == 0 {
            self.leaf_bit[l] = bit;
            return;
        }
        self.cur[0] = self.leaf_bit[l] ^ bit;
        self.cur[1] = bit;
        let mut len = 2;
        let mut s = 1;
        while s < st && (phi >> s) & 1 == 1 {
            // [left ⊕ right, right], built in place.
            let left = self.beta[s].get(self.path_beta[l * st + s]);
            let (lo, hi) = self.cur.split_at_mut(len);
            hi[..len].copy_from_slice(lo);
            for (c, &b) in lo.iter_mut().zip(left) {
                *c ^= b;
            }
            len *= 2;
            s += 1;
        }
        if s < st {
            let slot = l * st + s;
            let id = self.beta[s].writable(self.path_beta[slot]);
            self.path_beta[slot] = id;
            self.beta[s].get_mut(id).copy_from_slice(&self.cur[..len]);
        }
    }

    fn backtrack(&self, mut l: usize) -> BitVector {
        let mut u = vec![0u8; self.n];
        for phi in (0..self.n).rev() {
            let (bit, parent) = self.history[phi * self.list_size + l];
            u[phi] = bit;
            l = parent as usize;
        }
        BitVector::new(u).expect("decoded bits are binary")
    }
}

/// One-shot convenience wrapper around [`SclDecoder`].
pub fn scl_decode(
    llr: &LlrVector,
    pattern: &FrozenPattern,
    list_size: usize,
) -> Result<Vec<DecodeCandidate>> {
    if llr.len() != pattern.len() {
        return Err(Error::LengthMismatch {
            expected: pattern.len(),
            actual: llr.len(),
        });
    }
    SclDecoder::new(llr.len(), list_size)?.decode(llr.as_slice(), pattern)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::polar_transform;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn first_frozen(n: usize) -> FrozenPattern {
        let mut mask = vec![false; n];
        mask[0] = true;
        FrozenPattern::zeros(mask)
    }

    /// Exhaustive ML: minimize the correlation distance over all free-bit assignments.
    fn brute_force_ml(llr: &[f64], pattern: &FrozenPattern) -> (BitVector, f64) {
        let free = pattern.free_positions();
        let n = llr.len();
        let mut best: Option<(BitVector, f64)> = None;
        for assign in 0u64..(1 << free.len()) {
            let mut u: Vec<u8> = (0..n).map(|i| pattern.value(i)).collect();
            for (k, &pos) in free.iter().enumerate() {
                u[pos] = ((assign >> k) & 1) as u8;
            }
            let u = BitVector::new(u).unwrap();
            let d = polar_transform(&u).unwrap();
            let dist: f64 = (0..n)
                .filter(|&i| d[i] != (llr[i] < 0.0) as u8)
                .map(|i| llr[i].abs())
                .sum();
            if best.as_ref().is_none_or(|(_, b)| dist < *b) {
                best = Some((u, dist));
            }
        }
        best.unwrap()
    }

    #[test]
    fn two_bit_code_prefers_zero_codeword() {
        let llr = LlrVector::new(vec![2.0, 3.0]).unwrap();
        let c = scl_decode(&llr, &first_frozen(2), 2).unwrap();
        assert_eq!(c[0].u_hat.as_slice(), &[0, 0]);
    }

    #[test]
    fn two_bit_code_picks_all_ones_codeword() {
        let llr = LlrVector::new(vec![-1.0, -2.0]).unwrap();
        let c = scl_decode(&llr, &first_frozen(2), 2).unwrap();
        assert_eq!(c[0].u_hat.as_slice(), &[0, 1]);
        assert_eq!(polar_transform(&c[0].u_hat).unwrap().as_slice(), &[1, 1]);
    }

    #[test]
    fn noiseless_all_info_list_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pattern = FrozenPattern::zeros(vec![false; 8]);
        for _ in 0..20 {
            let u = BitVector::random(8, &mut rng);
            let d = polar_transform(&u).unwrap();
            let c = scl_decode(&LlrVector::from_bits(&d, 4.0), &pattern, 1).unwrap();
            assert_eq!(c.len(), 1);
            assert_eq!(c[0].u_hat, u);
        }
    }

    #[test]
    fn length_one_code() {
        let pattern = FrozenPattern::zeros(vec![false]);
        let c = scl_decode(&LlrVector::new(vec![-0.5]).unwrap(), &pattern, 4).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].u_hat.as_slice(), &[1]);
        assert_eq!(c[1].path_metric, 0.5);
    }

    #[test]
    fn rejects_bad_arguments() {
        let pattern = first_frozen(4);
        let llr = LlrVector::new(vec![1.0; 8]).unwrap();
        assert!(matches!(
            scl_decode(&llr, &pattern, 2),
            Err(Error::LengthMismatch { .. })
        ));
        let llr = LlrVector::new(vec![1.0; 4]).unwrap();
        assert!(scl_decode(&llr, &pattern, 0).is_err());
    }

    #[test]
    fn zero_llrs_resolve_to_zero_bits() {
        let pattern = FrozenPattern::zeros(vec![false; 16]);
        let mut dec = SclDecoder::new(16, 8).unwrap();
        let best = dec.decode_best(&[0.0; 16], &pattern).unwrap();
        assert_eq!(best.u_hat, BitVector::zeros(16));
    }

    #[test]
    fn frozen_values_are_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = 32;
            let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let values = BitVector::random(n, &mut rng);
            let pattern = FrozenPattern::new(mask, &values).unwrap();
            let llr: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            for c in SclDecoder::new(n, 4).unwrap().decode(&llr, &pattern).unwrap() {
                assert!(pattern.admits(&c.u_hat));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn full_list_equals_exhaustive_ml(log_n in 1u32..=4, seed in any::<u64>()) {
            let n = 1usize << log_n;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let free_target = rng.random_range(1..=n.min(8));
            let mut mask = vec![true; n];
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            for &i in &order[..free_target] {
                mask[i] = false;
            }
            let pattern = FrozenPattern::new(mask, &BitVector::random(n, &mut rng)).unwrap();
            // Distinct magnitudes avoid exact metric ties between codewords.
            let llr: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
            let (ml_u, ml_dist) = brute_force_ml(&llr, &pattern);
            let list = 1usize << pattern.free_count();
            let cands = SclDecoder::new(n, list).unwrap().decode(&llr, &pattern).unwrap();
            prop_assert_eq!(cands.len(), list);
            prop_assert_eq!(&cands[0].u_hat, &ml_u);
            prop_assert!((cands[0].path_metric - ml_dist).abs() < 1e-9);
            for w in cands.windows(2) {
                prop_assert!(w[0].path_metric <= w[1].path_metric);
            }
        }

        #[test]
        fn noiseless_roundtrip_any_pattern(log_n in 0u32..=9, seed in any::<u64>(), mag in 0.5f64..50.0) {
            let n = 1usize << log_n;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let pattern = FrozenPattern::new(mask, &BitVector::random(n, &mut rng)).unwrap();
            let mut u: Vec<u8> = (0..n).map(|i| pattern.value(i)).collect();
            for i in pattern.free_positions() {
                u[i] = rng.random::<bool>() as u8;
            }
            let u = BitVector::new(u).unwrap();
            let d = polar_transform(&u).unwrap();
            let best = SclDecoder::new(n, 1).unwrap()
                .decode_best(LlrVector::from_bits(&d, mag).as_slice(), &pattern).unwrap();
            prop_assert_eq!(best.u_hat, u);
        }

        #[test]
        fn metrics_sorted(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 64;
            let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
            let pattern = FrozenPattern::zeros(mask);
            let llr: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..4.0)).collect();
            let cands = SclDecoder::new(n, 8).unwrap().decode(&llr, &pattern).unwrap();
            prop_assert!(!cands.is_empty() && cands.len() <= 8);
            for w in cands.windows(2) {
                prop_assert!(w[0].path_metric <= w[1].path_metric);
            }
        }
    }
}
