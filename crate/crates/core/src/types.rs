use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A scalar that can be stored in the trees.
///
/// Every implementation must provide a total order. For floating point types
/// that means `NaN` has to be kept out before values reach a tree; the parsers
/// and [`check_values`] do that.
pub trait Value: Copy + Send + Sync + fmt::Debug + fmt::Display + 'static {
    fn cmp_value(&self, other: &Self) -> Ordering;

    fn is_nan(&self) -> bool {
        false
    }
}

impl Value for f64 {
    #[inline]
    fn cmp_value(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn is_nan(&self) -> bool {
        f64::is_nan(*self)
    }
}

impl Value for f32 {
    #[inline]
    fn cmp_value(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn is_nan(&self) -> bool {
        f32::is_nan(*self)
    }
}

macro_rules! impl_int_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            #[inline]
            fn cmp_value(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }
        }
    )*};
}

impl_int_value!(i64, i32, u64, u32, u16, u8);

/// One input item: its 1-based position in the original array and its value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element<V> {
    pub index: u32,
    pub value: V,
}

impl<V: Value> Element<V> {
    pub fn new(index: u32, value: V) -> Self {
        Element { index, value }
    }
}

/// Lexicographic order on `(value, index)`.
///
/// Duplicate values are ordered by their position, which makes the order
/// strict for elements of one dataset.
#[inline]
pub fn total_cmp<V: Value>(a: &Element<V>, b: &Element<V>) -> Ordering {
    a.value
        .cmp_value(&b.value)
        .then_with(|| a.index.cmp(&b.index))
}

/// Rank of the lower median of `m` elements, `ceil(m / 2)`.
pub fn median_rank(m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(m.div_ceil(2))
}

/// Wraps a raw value sequence into elements with indices `1..=n`.
pub fn elements_of<V: Value>(values: &[V]) -> Result<Vec<Element<V>>> {
    check_values(values)?;
    if values.len() > u32::MAX as usize {
        return Err(Error::TooLarge(values.len()));
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &value)| Element::new(i as u32 + 1, value))
        .collect())
}

/// Rejects `NaN` values.
pub fn check_values<V: Value>(values: &[V]) -> Result<()> {
    match values.iter().position(Value::is_nan) {
        Some(i) => Err(Error::NotANumber { index: i + 1 }),
        None => Ok(()),
    }
}

/// A query for the element of rank `rank` in `A[left..=right]`.
///
/// Bounds are 1-based and inclusive. A missing rank selects the lower median.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RangeQuery {
    pub left: usize,
    pub right: usize,
    pub rank: Option<usize>,
}

impl RangeQuery {
    pub fn median(left: usize, right: usize) -> Self {
        RangeQuery {
            left,
            right,
            rank: None,
        }
    }

    pub fn with_rank(left: usize, right: usize, rank: usize) -> Self {
        RangeQuery {
            left,
            right,
            rank: Some(rank),
        }
    }

    pub fn len(&self) -> usize {
        self.right + 1 - self.left
    }

    pub fn is_empty(&self) -> bool {
        self.right < self.left
    }

    /// Checks the query against an array of length `n` and returns the
    /// effective rank.
    pub fn resolve(&self, n: usize) -> Result<usize> {
        if self.left < 1 || self.left > self.right || self.right > n {
            return Err(Error::InvalidRange {
                left: self.left,
                right: self.right,
                len: n,
            });
        }
        let m = self.len();
        match self.rank {
            None => median_rank(m),
            Some(p) if (1..=m).contains(&p) => Ok(p),
            Some(p) => Err(Error::InvalidRank { rank: p, len: m }),
        }
    }
}

/// Formats as a query line: `L R` or `L R p`.
impl fmt::Display for RangeQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.left, self.right)?;
        if let Some(p) = self.rank {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Per-query counters reported by the traced query entry points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryTrace {
    /// Nodes on the root-to-leaf path, the leaf included.
    pub nodes_visited: u64,
    /// Child position lookups (two per internal node visited).
    pub cascade_steps: u64,
    /// Nodes split while answering this query.
    pub splits: u64,
    pub elements_partitioned: u64,
    pub comparisons: u64,
}

/// Instrumentation counters accumulated over the lifetime of a structure.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub splits_per_level: Vec<u64>,
    pub elements_partitioned: u64,
    pub cascade_steps: u64,
    pub nodes_visited: u64,
    pub queries: u64,
    pub rebuild_elements: u64,
    pub rebuilds: u64,
    pub comparisons: u64,
}

impl Stats {
    pub fn record_split(&mut self, level: usize, size: usize) {
        if self.splits_per_level.len() <= level {
            self.splits_per_level.resize(level + 1, 0);
        }
        self.splits_per_level[level] += 1;
        self.elements_partitioned += size as u64;
    }

    pub fn record_query(&mut self, trace: &QueryTrace) {
        self.queries += 1;
        self.nodes_visited += trace.nodes_visited;
        self.cascade_steps += trace.cascade_steps;
        self.comparisons += trace.comparisons;
    }

    pub fn total_splits(&self) -> u64 {
        self.splits_per_level.iter().sum()
    }

    pub fn merge(&mut self, other: &Stats) {
        if self.splits_per_level.len() < other.splits_per_level.len() {
            self.splits_per_level
                .resize(other.splits_per_level.len(), 0);
        }
        for (a, b) in self
            .splits_per_level
            .iter_mut()
            .zip(&other.splits_per_level)
        {
            *a += b;
        }
        self.elements_partitioned += other.elements_partitioned;
        self.cascade_steps += other.cascade_steps;
        self.nodes_visited += other.nodes_visited;
        self.queries += other.queries;
        self.rebuild_elements += other.rebuild_elements;
        self.rebuilds += other.rebuilds;
        self.comparisons += other.comparisons;
    }
}

/// `ceil(log2(n))`, with `ceil_log2(1) == 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}
