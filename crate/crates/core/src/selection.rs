//! Order-statistic selection and stable value partitioning.
//!
//! Both trees split a node at its exact lower median, so the only place the
//! strategy shows up is inside [`Selector::select_kth`].

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{total_cmp, Element, Value};

/// Below this size selection falls back to insertion sort.
const SMALL: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionStrategy {
    /// Median of medians over groups of five, worst-case linear.
    Deterministic,
    /// Quickselect with a uniformly random pivot, expected linear.
    Randomized { seed: u64 },
}

impl Default for SelectionStrategy {
    fn default() -> Self {
        SelectionStrategy::Randomized { seed: 0 }
    }
}

/// Selection state: the strategy, its random generator and a comparison counter.
#[derive(Clone, Debug)]
pub struct Selector {
    strategy: SelectionStrategy,
    rng: Option<ChaCha8Rng>,
    comparisons: u64,
}

impl Selector {
    pub fn new(strategy: SelectionStrategy) -> Self {
        let rng = match strategy {
            SelectionStrategy::Deterministic => None,
            SelectionStrategy::Randomized { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Selector {
            strategy,
            rng,
            comparisons: 0,
        }
    }

    /// A selector whose random stream depends only on the tree seed and the
    /// node's position, so lazy, eager and parallel builds pick the same pivots.
    pub fn for_node(strategy: SelectionStrategy, level: usize, offset: usize) -> Self {
        match strategy {
            SelectionStrategy::Deterministic => Selector::new(strategy),
            SelectionStrategy::Randomized { seed } => {
                let node = splitmix64(((level as u64) << 40) ^ offset as u64);
                Selector::new(SelectionStrategy::Randomized {
                    seed: splitmix64(seed ^ node),
                })
            }
        }
    }

    pub fn strategy(&self) -> SelectionStrategy {
        self.strategy
    }

    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    /// Returns the element of 1-based rank `k` under [`total_cmp`].
    pub fn select_kth<V: Value>(
        &mut self,
        elements: &[Element<V>],
        k: usize,
    ) -> Result<Element<V>> {
        if k == 0 || k > elements.len() {
            return Err(Error::InvalidRank {
                rank: k,
                len: elements.len(),
            });
        }
        let mut scratch = elements.to_vec();
        Ok(self.select_in_place(&mut scratch, k - 1))
    }

    /// Reorders `buf` so that `buf[k]` (0-based) holds the element of that rank.
    pub fn select_in_place<V: Value>(&mut self, buf: &mut [Element<V>], k: usize) -> Element<V> {
        assert!(k < buf.len(), "rank {k} out of bounds for {}", buf.len());
        match self.strategy {
            SelectionStrategy::Deterministic => self.median_of_medians(buf, k),
            SelectionStrategy::Randomized { .. } => self.quickselect(buf, k),
        }
    }

    #[inline]
    fn less<V: Value>(&mut self, a: &Element<V>, b: &Element<V>) -> bool {
        self.comparisons += 1;
        total_cmp(a, b) == Ordering::Less
    }

    fn insertion_sort<V: Value>(&mut self, buf: &mut [Element<V>]) {
        for i in 1..buf.len() {
            let mut j = i;
            while j > 0 && self.less(&buf[j], &buf[j - 1]) {
                buf.swap(j, j - 1);
                j -= 1;
            }
        }
    }

    /// Partitions around `buf[pivot]`; returns the pivot's final position.
    fn partition_at<V: Value>(&mut self, buf: &mut [Element<V>], pivot: usize) -> usize {
        let last = buf.len() - 1;
        buf.swap(pivot, last);
        let p = buf[last];
        let mut store = 0;
        for i in 0..last {
            if self.less(&buf[i], &p) {
                buf.swap(i, store);
                store += 1;
            }
        }
        buf.swap(store, last);
        store
    }

    fn median_of_medians<V: Value>(
        &mut self,
        mut buf: &mut [Element<V>],
        mut k: usize,
    ) -> Element<V> {
        loop {
            let n = buf.len();
            if n <= SMALL {
                self.insertion_sort(buf);
                return buf[k];
            }
            let groups = n.div_ceil(5);
            for g in 0..groups {
                let start = g * 5;
                let end = (start + 5).min(n);
                self.insertion_sort(&mut buf[start..end]);
                buf.swap(g, start + (end - start - 1) / 2);
            }
            let mid = (groups - 1) / 2;
            self.median_of_medians(&mut buf[..groups], mid);
            let pos = self.partition_at(buf, mid);
            match k.cmp(&pos) {
                Ordering::Equal => return buf[pos],
                Ordering::Less => buf = &mut buf[..pos],
                Ordering::Greater => {
                    buf = &mut buf[pos + 1..];
                    k -= pos + 1;
                }
            }
        }
    }

    fn quickselect<V: Value>(&mut self, mut buf: &mut [Element<V>], mut k: usize) -> Element<V> {
        loop {
            let n = buf.len();
            if n <= SMALL {
                self.insertion_sort(buf);
                return buf[k];
            }
            let pivot = self
                .rng
                .as_mut()
                .expect("randomized selector has a generator")
                .gen_range(0..n);
            let pos = self.partition_at(buf, pivot);
            match k.cmp(&pos) {
                Ordering::Equal => return buf[pos],
                Ordering::Less => buf = &mut buf[..pos],
                Ordering::Greater => {
                    buf = &mut buf[pos + 1..];
                    k -= pos + 1;
                }
            }
        }
    }
}

/// Free-function form of [`Selector::select_kth`].
pub fn select_kth<V: Value>(
    elements: &[Element<V>],
    k: usize,
    selector: &mut Selector,
) -> Result<Element<V>> {
    selector.select_kth(elements, k)
}

/// Splits `elements` into those `<= x` and those `> x`, keeping input order in both.
pub fn partition_stable<V: Value>(
    elements: &[Element<V>],
    x: &Element<V>,
) -> (Vec<Element<V>>, Vec<Element<V>>) {
    let mut comparisons = 0;
    partition_stable_counted(elements, x, &mut comparisons)
}

pub fn partition_stable_counted<V: Value>(
    elements: &[Element<V>],
    x: &Element<V>,
    comparisons: &mut u64,
) -> (Vec<Element<V>>, Vec<Element<V>>) {
    let mut low = Vec::with_capacity(elements.len().div_ceil(2));
    let mut high = Vec::with_capacity(elements.len() / 2);
    for e in elements {
        *comparisons += 1;
        if total_cmp(e, x) != Ordering::Greater {
            low.push(*e);
        } else {
            high.push(*e);
        }
    }
    (low, high)
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
