//! Linear-space value-partition tree.
//!
//! Internal nodes keep a single bit per element ("goes to the low child") and
//! no values. Query ranges are translated into each child's own coordinates
//! with two rank operations per level.
//!
//! Because every split is an exact halving (`ceil(m/2)` low, `floor(m/2)`
//! high), the shape of the tree is fixed by `n` alone: the node reached by a
//! path covers a known contiguous range `[offset, offset + len)` of value
//! ranks, and the low child keeps the first `ceil(len/2)` of them. So each
//! level stores its bits in one `n`-bit [`SegmentedRankBits`] where a node
//! owns the segment at its offset, and one element buffer of length `n`
//! holds, for each unsplit node, its values in index order at the same
//! offsets. Splitting a node stably partitions its buffer segment in place,
//! handing the two halves to its children. A node of length one is a leaf,
//! and its buffer slot is its payload (value and original index).
//!
//! Nothing here is allocated per node, which keeps the whole structure at a
//! few words per element even when fully built.

use std::mem::size_of;

use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::rank_bits::SegmentedRankBits;
use crate::selection::{SelectionStrategy, Selector};
use crate::types::{
    ceil_log2, elements_of, total_cmp, Element, QueryTrace, RangeQuery, Stats, Value,
};

#[derive(Clone, Debug)]
struct Level {
    bits: SegmentedRankBits,
    /// Bit `offset` is set iff the node starting at `offset` has been split.
    split: Vec<u64>,
    nodes_split: u64,
    payload_bits: u64,
}

impl Level {
    fn new(n: usize) -> Self {
        Level {
            bits: SegmentedRankBits::new(n),
            split: vec![0; n.div_ceil(64)],
            nodes_split: 0,
            payload_bits: 0,
        }
    }

    fn is_split(&self, offset: usize) -> bool {
        self.split[offset / 64] >> (offset % 64) & 1 == 1
    }

    fn allocated_bits(&self) -> usize {
        self.bits.payload_bits() + self.bits.aux_bits() + self.split.len() * 64
    }
}

/// Space usage of one tree level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelSpace {
    pub level: usize,
    pub nodes_split: u64,
    /// Bits written by split nodes; `n` once the level is complete.
    pub payload_bits: u64,
    /// Rank directory bits allocated for the level.
    pub directory_bits: u64,
    /// Everything allocated for the level, including split flags.
    pub allocated_bits: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpaceReport {
    pub levels: Vec<LevelSpace>,
    pub payload_bits: u64,
    pub directory_bits: u64,
    /// Leaves reached so far; each stores one element.
    pub leaves: u64,
    /// Elements still held by unsplit nodes of length two or more.
    pub unsplit_elements: u64,
    /// Bytes of the shared element buffer (leaf payloads plus unsplit values).
    pub element_buffer_bytes: u64,
    /// Every byte owned by the structure, in 64-bit words.
    pub total_words: u64,
}

impl SpaceReport {
    pub fn words_per_element(&self, n: usize) -> f64 {
        self.total_words as f64 / n as f64
    }
}

/// One node of a [`CompactTree`], addressed by its level and rank offset.
#[derive(Clone, Copy, Debug)]
pub struct CompactNode<'a, V> {
    tree: &'a CompactTree<V>,
    level: usize,
    offset: usize,
    len: usize,
}

impl<'a, V: Value> CompactNode<'a, V> {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_split(&self) -> bool {
        self.tree.is_split(self.level, self.offset)
    }

    pub fn is_leaf(&self) -> bool {
        self.len == 1
    }

    /// The node's low-child bits in local position order, once split.
    pub fn lowbits(&self) -> Option<Vec<bool>> {
        if !self.is_split() {
            return None;
        }
        let bits = &self.tree.levels[self.level].as_ref()?.bits;
        Some((0..self.len).map(|i| bits.get(self.offset + i)).collect())
    }

    /// Values owned by an unsplit internal node, in index order.
    pub fn values(&self) -> Option<&'a [Element<V>]> {
        (self.len >= 2 && !self.is_split())
            .then(|| &self.tree.buffer[self.offset..self.offset + self.len])
    }

    /// Bytes of value storage owned by this node.
    pub fn value_bytes(&self) -> usize {
        self.values().map_or(0, std::mem::size_of_val)
    }

    pub fn leaf_payload(&self) -> Option<Element<V>> {
        self.is_leaf().then(|| self.tree.buffer[self.offset])
    }

    pub fn low(&self) -> Option<CompactNode<'a, V>> {
        self.is_split().then(|| CompactNode {
            tree: self.tree,
            level: self.level + 1,
            offset: self.offset,
            len: self.len.div_ceil(2),
        })
    }

    pub fn high(&self) -> Option<CompactNode<'a, V>> {
        self.is_split().then(|| CompactNode {
            tree: self.tree,
            level: self.level + 1,
            offset: self.offset + self.len.div_ceil(2),
            len: self.len / 2,
        })
    }
}

/// Stably partitions `region` around its lower median. Returns the packed
/// low bits (local positions) and the comparisons spent.
fn partition_region<V: Value>(
    region: &mut [Element<V>],
    strategy: SelectionStrategy,
    level: usize,
    offset: usize,
) -> (Vec<u64>, u64) {
    let len = region.len();
    let low_len = len.div_ceil(2);
    let mut selector = Selector::for_node(strategy, level, offset);
    let mut scratch = region.to_vec();
    let x = selector.select_in_place(&mut scratch, low_len - 1);
    let mut bits = vec![0u64; len.div_ceil(64)];
    let (mut lo, mut hi) = (0, low_len);
    for (i, e) in region.iter().enumerate() {
        if total_cmp(e, &x).is_le() {
            bits[i / 64] |= 1 << (i % 64);
            scratch[lo] = *e;
            lo += 1;
        } else {
            scratch[hi] = *e;
            hi += 1;
        }
    }
    debug_assert_eq!(lo, low_len);
    region.copy_from_slice(&scratch);
    (bits, selector.comparisons() + len as u64)
}

/// Linear-space range selection structure.
#[derive(Clone, Debug)]
pub struct CompactTree<V> {
    buffer: Vec<Element<V>>,
    levels: Vec<Option<Level>>,
    strategy: SelectionStrategy,
    stats: Stats,
}

impl<V: Value> CompactTree<V> {
    pub fn new(values: &[V]) -> Result<Self> {
        Self::with_strategy(values, SelectionStrategy::default())
    }

    pub fn with_strategy(values: &[V], strategy: SelectionStrategy) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        let buffer = elements_of(values)?;
        let depth = ceil_log2(buffer.len()) as usize;
        Ok(CompactTree {
            buffer,
            levels: vec![None; depth],
            strategy,
            stats: Stats::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of levels that hold bits, `ceil(log2 n)`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn root(&self) -> CompactNode<'_, V> {
        CompactNode {
            tree: self,
            level: 0,
            offset: 0,
            len: self.len(),
        }
    }

    fn is_split(&self, level: usize, offset: usize) -> bool {
        self.levels
            .get(level)
            .and_then(Option::as_ref)
            .is_some_and(|lv| lv.is_split(offset))
    }

    fn store_split(&mut self, level: usize, offset: usize, len: usize, bits: &[u64]) {
        let n = self.buffer.len();
        let lv = self.levels[level].get_or_insert_with(|| Level::new(n));
        lv.bits.write_segment(offset, bits, len);
        lv.split[offset / 64] |= 1 << (offset % 64);
        lv.nodes_split += 1;
        lv.payload_bits += len as u64;
        self.stats.record_split(level, len);
    }

    fn split(&mut self, level: usize, offset: usize, len: usize) -> u64 {
        let region = &mut self.buffer[offset..offset + len];
        let (bits, comparisons) = partition_region(region, self.strategy, level, offset);
        self.store_split(level, offset, len, &bits);
        self.stats.comparisons += comparisons;
        comparisons
    }

    pub fn query(&mut self, q: &RangeQuery) -> Result<Element<V>> {
        self.query_traced(q).map(|(e, _)| e)
    }

    pub fn query_traced(&mut self, q: &RangeQuery) -> Result<(Element<V>, QueryTrace)> {
        let mut p = q.resolve(self.len())?;
        let mut trace = QueryTrace::default();
        let (mut left, mut right) = (q.left, q.right);
        let (mut level, mut offset, mut len) = (0, 0, self.len());
        loop {
            trace.nodes_visited += 1;
            debug_assert!(1 <= left && left <= right && right <= len);
            debug_assert!(1 <= p && p <= right - left + 1);
            if len == 1 {
                self.stats.record_query(&trace);
                return Ok((self.buffer[offset], trace));
            }
            if !self.is_split(level, offset) {
                let comparisons = self.split(level, offset, len);
                trace.splits += 1;
                trace.elements_partitioned += len as u64;
                trace.comparisons += comparisons;
            }
            let bits = &self.levels[level].as_ref().unwrap().bits;
            let l = bits.rank_in_segment(offset, left - 1);
            let r = bits.rank_in_segment(offset, right);
            trace.cascade_steps += 2;
            let m = r - l;
            let low_len = len.div_ceil(2);
            if p <= m {
                (left, right, len) = (l + 1, r, low_len);
            } else {
                (left, right) = (left - l, right - r);
                p -= m;
                offset += low_len;
                len -= low_len;
            }
            level += 1;
        }
    }

    /// Read-only query; fails on reaching an unsplit node.
    pub fn query_frozen(&self, q: &RangeQuery) -> Result<(Element<V>, QueryTrace)> {
        let mut p = q.resolve(self.len())?;
        let mut trace = QueryTrace::default();
        let (mut left, mut right) = (q.left, q.right);
        let (mut level, mut offset, mut len) = (0, 0, self.len());
        loop {
            trace.nodes_visited += 1;
            if len == 1 {
                return Ok((self.buffer[offset], trace));
            }
            let bits = match &self.levels[level] {
                Some(lv) if lv.is_split(offset) => &lv.bits,
                _ => return Err(Error::NotMaterialized { level }),
            };
            let l = bits.rank_in_segment(offset, left - 1);
            let r = bits.rank_in_segment(offset, right);
            trace.cascade_steps += 2;
            let m = r - l;
            let low_len = len.div_ceil(2);
            if p <= m {
                (left, right, len) = (l + 1, r, low_len);
            } else {
                (left, right) = (left - l, right - r);
                p -= m;
                offset += low_len;
                len -= low_len;
            }
            level += 1;
        }
    }

    /// Splits every node, one level at a time; nodes of a level are
    /// partitioned independently (in parallel when requested).
    pub fn build_eager(&mut self, par: Parallelism) {
        let strategy = self.strategy;
        let mut nodes = vec![(0usize, self.len())];
        for level in 0..self.depth() {
            let pending: Vec<(usize, usize)> = nodes
                .iter()
                .copied()
                .filter(|&(offset, len)| len >= 2 && !self.is_split(level, offset))
                .collect();
            let mut jobs = Vec::with_capacity(pending.len());
            let mut rest = &mut self.buffer[..];
            let mut consumed = 0;
            for &(offset, len) in &pending {
                let (_, tail) = rest.split_at_mut(offset - consumed);
                let (region, tail) = tail.split_at_mut(len);
                jobs.push((offset, region));
                rest = tail;
                consumed = offset + len;
            }
            let done = par::map_vec(par, jobs, |(offset, region)| {
                let len = region.len();
                let (bits, comparisons) = partition_region(region, strategy, level, offset);
                (offset, len, bits, comparisons)
            });
            for (offset, len, bits, comparisons) in done {
                self.store_split(level, offset, len, &bits);
                self.stats.comparisons += comparisons;
            }
            nodes = nodes
                .into_iter()
                .filter(|&(_, len)| len >= 2)
                .flat_map(|(offset, len)| {
                    let low = len.div_ceil(2);
                    [(offset, low), (offset + low, len - low)]
                })
                .collect();
        }
    }

    pub fn is_fully_built(&self) -> bool {
        let mut nodes = vec![(0usize, self.len())];
        for level in 0..self.depth() {
            let mut next = Vec::new();
            for (offset, len) in nodes {
                if len < 2 {
                    continue;
                }
                if !self.is_split(level, offset) {
                    return false;
                }
                let low = len.div_ceil(2);
                next.push((offset, low));
                next.push((offset + low, len - low));
            }
            nodes = next;
        }
        true
    }

    /// Exact accounting of bits, directories and element storage.
    pub fn space_report(&self) -> SpaceReport {
        let mut report = SpaceReport::default();
        for (level, lv) in self.levels.iter().enumerate() {
            let Some(lv) = lv else {
                report.levels.push(LevelSpace {
                    level,
                    ..LevelSpace::default()
                });
                continue;
            };
            let entry = LevelSpace {
                level,
                nodes_split: lv.nodes_split,
                payload_bits: lv.payload_bits,
                directory_bits: lv.bits.aux_bits() as u64,
                allocated_bits: lv.allocated_bits() as u64,
            };
            report.payload_bits += entry.payload_bits;
            report.directory_bits += entry.directory_bits;
            report.levels.push(entry);
        }
        let mut stack = vec![(0usize, 0usize, self.len())];
        while let Some((level, offset, len)) = stack.pop() {
            if len == 1 {
                report.leaves += 1;
            } else if !self.is_split(level, offset) {
                report.unsplit_elements += len as u64;
            } else {
                let low = len.div_ceil(2);
                stack.push((level + 1, offset, low));
                stack.push((level + 1, offset + low, len - low));
            }
        }
        report.element_buffer_bytes = (self.buffer.capacity() * size_of::<Element<V>>()) as u64;
        let level_bytes: u64 = self
            .levels
            .iter()
            .flatten()
            .map(|lv| lv.allocated_bits() as u64 / 8 + size_of::<Level>() as u64)
            .sum();
        let header =
            (size_of::<Self>() + self.levels.capacity() * size_of::<Option<Level>>()) as u64;
        report.total_words = (report.element_buffer_bytes + level_bytes + header).div_ceil(8);
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::CascadeTree;
    use crate::oracle::oracle_select;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SAMPLE: [f64; 10] = [3.0, 7.0, 5.5, 4.0, 9.0, 6.2, 9.0, 4.0, 2.0, 5.0];

    #[test]
    fn new_tree_is_unsplit() {
        let tree = CompactTree::new(&SAMPLE).unwrap();
        assert_eq!(tree.root().len(), 10);
        assert!(tree.root().lowbits().is_none());
        assert_eq!(tree.root().values().unwrap().len(), 10);
        assert_eq!(tree.space_report().payload_bits, 0);
        let leaf = CompactTree::new(&[7i64]).unwrap();
        assert_eq!(leaf.root().leaf_payload(), Some(Element::new(1, 7)));
        assert!(CompactTree::<i64>::new(&[]).is_err());
    }

    #[test]
    fn sample_root_split_and_descent() {
        let mut tree = CompactTree::new(&SAMPLE).unwrap();
        let (got, trace) = tree.query_traced(&RangeQuery::median(3, 8)).unwrap();
        assert_eq!((got.value, got.index), (5.5, 3));
        assert!(trace.splits >= 1);
        let root = tree.root();
        let expected = [
            true, false, false, true, false, false, false, true, true, true,
        ];
        assert_eq!(root.lowbits().unwrap(), expected);
        assert_eq!(root.value_bytes(), 0);
        assert!(root.values().is_none());
        let bits = &tree.levels[0].as_ref().unwrap().bits;
        // l = rank(L-1) = 1, r = rank(R) = 3, so the high child sees (2, 5, 1).
        assert_eq!(bits.rank_in_segment(0, 2), 1);
        assert_eq!(bits.rank_in_segment(0, 8), 3);
        let high = root.high().unwrap();
        assert_eq!(high.len(), 5);
    }

    #[test]
    fn tied_pair_splits_by_position() {
        let mut tree = CompactTree::new(&[4i64, 4]).unwrap();
        tree.build_eager(Parallelism::Sequential);
        assert_eq!(tree.root().lowbits().unwrap(), [true, false]);
        assert_eq!(
            tree.root().low().unwrap().leaf_payload(),
            Some(Element::new(1, 4))
        );
        assert_eq!(
            tree.root().high().unwrap().leaf_payload(),
            Some(Element::new(2, 4))
        );
    }

    #[test]
    fn single_position_ranges() {
        let mut tree = CompactTree::new(&SAMPLE).unwrap();
        for i in 1..=10 {
            let got = tree.query(&RangeQuery::with_rank(i, i, 1)).unwrap();
            assert_eq!(got, Element::new(i as u32, SAMPLE[i - 1]));
        }
    }

    #[test]
    fn eager_payload_is_n_bits_per_level() {
        let values: Vec<i64> = (0..1024).map(|i| (i * 613) % 1024).collect();
        let mut tree = CompactTree::new(&values).unwrap();
        tree.build_eager(Parallelism::Sequential);
        assert!(tree.is_fully_built());
        let report = tree.space_report();
        assert_eq!(report.payload_bits, 1024 * 10);
        assert_eq!(report.levels.len(), 10);
        for lv in &report.levels {
            assert_eq!(lv.payload_bits, 1024);
        }
        assert_eq!(report.leaves, 1024);
        assert_eq!(report.unsplit_elements, 0);
        assert_eq!(tree.stats().elements_partitioned, 1024 * 10);

        let mut one = CompactTree::new(&[5i64]).unwrap();
        one.build_eager(Parallelism::Sequential);
        assert_eq!(one.space_report().payload_bits, 0);
    }

    #[test]
    fn lazy_query_materializes_one_path() {
        let values: Vec<i64> = (0..1000).rev().collect();
        let mut tree = CompactTree::new(&values).unwrap();
        tree.query(&RangeQuery::median(100, 900)).unwrap();
        let report = tree.space_report();
        for lv in &report.levels {
            assert_eq!(lv.nodes_split, 1, "level {}", lv.level);
        }
        let mut eager = tree.clone();
        eager.build_eager(Parallelism::Sequential);
        assert!(report.total_words <= eager.space_report().total_words);
        assert!(report.payload_bits < eager.space_report().payload_bits);
    }

    #[test]
    fn contraction_invariant_on_odd_sizes() {
        for n in [3usize, 5, 17, 1000, 1023, 1025] {
            let values: Vec<i64> = (0..n as i64).map(|i| (i * 37) % 11).collect();
            let mut tree = CompactTree::new(&values).unwrap();
            tree.build_eager(Parallelism::Sequential);
            let report = tree.space_report();
            // Levels where every node still has length >= 2 are complete.
            let full_levels = (n as f64).log2().floor() as usize;
            for lv in &report.levels[..full_levels] {
                assert_eq!(lv.payload_bits, n as u64, "n={n} level {}", lv.level);
            }
            let mut stack = vec![tree.root()];
            while let Some(node) = stack.pop() {
                if let Some(bits) = node.lowbits() {
                    assert_eq!(bits.iter().filter(|&&b| b).count(), node.len().div_ceil(2));
                    stack.extend(node.low());
                    stack.extend(node.high());
                }
            }
        }
    }

    #[test]
    fn matches_cascade_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 4096;
        let values: Vec<f64> = (0..n)
            .map(|_| (rng.gen_range(0..500) as f64) / 4.0)
            .collect();
        let elements = elements_of(&values).unwrap();
        let mut compact = CompactTree::new(&values).unwrap();
        let mut cascade = CascadeTree::new(&values).unwrap();
        for _ in 0..10_000 {
            let l = rng.gen_range(1..=n);
            let r = rng.gen_range(l..=n);
            let p = rng.gen_range(1..=r - l + 1);
            let q = RangeQuery::with_rank(l, r, p);
            let expected = oracle_select(&elements, &q).unwrap();
            assert_eq!(compact.query(&q).unwrap(), expected);
            assert_eq!(cascade.query(&q).unwrap(), expected);
        }
        // identical pivots, identical work
        assert_eq!(
            compact.stats().splits_per_level,
            cascade.stats().splits_per_level
        );
        assert_eq!(compact.stats().comparisons, cascade.stats().comparisons);
    }

    #[test]
    fn parallel_and_sequential_eager_builds_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let values: Vec<u32> = (0..30_000).map(|_| rng.gen_range(0..1000)).collect();
        let mut a = CompactTree::new(&values).unwrap();
        let mut b = CompactTree::new(&values).unwrap();
        // a partially lazy start must not disturb the eager pass
        b.query(&RangeQuery::median(5, 20_000)).unwrap();
        a.build_eager(Parallelism::Sequential);
        b.build_eager(Parallelism::Parallel);
        assert_eq!(a.space_report().payload_bits, b.space_report().payload_bits);
        assert_eq!(
            a.stats().elements_partitioned,
            b.stats().elements_partitioned
        );
        for _ in 0..500 {
            let l = rng.gen_range(1..=30_000);
            let r = rng.gen_range(l..=30_000);
            let q = RangeQuery::median(l, r);
            assert_eq!(a.query_frozen(&q).unwrap().0, b.query_frozen(&q).unwrap().0);
        }
    }

    #[test]
    fn frozen_query_on_lazy_tree_fails() {
        let tree = CompactTree::new(&SAMPLE).unwrap();
        assert!(matches!(
            tree.query_frozen(&RangeQuery::median(1, 4)),
            Err(Error::NotMaterialized { level: 0 })
        ));
    }
}
