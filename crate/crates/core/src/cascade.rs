//! Lazily split value-partition tree with fractional cascading.
//!
//! Every node keeps its elements in original index order. When a node splits,
//! one pass over its elements builds both children and, for each position
//! `j`, the number of elements among the first `j` that went to either child.
//! Those counts are the cascade pointers: a query that knows its position in
//! a node finds its position in the chosen child with one array lookup, so
//! no binary search is needed below the root, and the root needs none
//! because it stores the input in original order.

use std::mem::size_of;

use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::selection::{SelectionStrategy, Selector};
use crate::types::{elements_of, total_cmp, Element, QueryTrace, RangeQuery, Stats, Value};

/// Nodes at least this large build their children on separate tasks.
const PARALLEL_CUTOFF: usize = 1 << 12;

#[derive(Clone, Debug)]
pub struct CascadeNode<V> {
    elems: Vec<Element<V>>,
    /// `low_pred[j]`: elements among `elems[..j]` that belong to the low child.
    low_pred: Vec<u32>,
    high_pred: Vec<u32>,
    children: Option<Box<[CascadeNode<V>; 2]>>,
    level: u32,
    /// Number of input elements smaller than everything in this node.
    offset: u32,
}

/// Counters produced by one split.
struct SplitCost {
    size: usize,
    comparisons: u64,
}

impl<V: Value> CascadeNode<V> {
    fn new(elems: Vec<Element<V>>, level: u32, offset: u32) -> Self {
        CascadeNode {
            elems,
            low_pred: Vec::new(),
            high_pred: Vec::new(),
            children: None,
            level,
            offset,
        }
    }

    pub fn elems(&self) -> &[Element<V>] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn level(&self) -> usize {
        self.level as usize
    }

    pub fn is_split(&self) -> bool {
        self.children.is_some()
    }

    /// Cascade pointers into the low child, indexed by position `0..=len`.
    pub fn low_pred(&self) -> &[u32] {
        &self.low_pred
    }

    pub fn high_pred(&self) -> &[u32] {
        &self.high_pred
    }

    pub fn low(&self) -> Option<&CascadeNode<V>> {
        self.children.as_deref().map(|c| &c[0])
    }

    pub fn high(&self) -> Option<&CascadeNode<V>> {
        self.children.as_deref().map(|c| &c[1])
    }

    fn split(&mut self, strategy: SelectionStrategy) -> SplitCost {
        debug_assert!(self.children.is_none() && self.elems.len() >= 2);
        let m = self.elems.len();
        let low_len = m.div_ceil(2);
        let mut selector = Selector::for_node(strategy, self.level as usize, self.offset as usize);
        let mut scratch = self.elems.clone();
        let x = selector.select_in_place(&mut scratch, low_len - 1);
        drop(scratch);

        let mut low = Vec::with_capacity(low_len);
        let mut high = Vec::with_capacity(m - low_len);
        let mut low_pred = Vec::with_capacity(m + 1);
        let mut high_pred = Vec::with_capacity(m + 1);
        low_pred.push(0);
        high_pred.push(0);
        for e in &self.elems {
            if total_cmp(e, &x).is_le() {
                low.push(*e);
            } else {
                high.push(*e);
            }
            low_pred.push(low.len() as u32);
            high_pred.push(high.len() as u32);
        }
        debug_assert_eq!(low.len(), low_len);
        self.low_pred = low_pred;
        self.high_pred = high_pred;
        self.children = Some(Box::new([
            CascadeNode::new(low, self.level + 1, self.offset),
            CascadeNode::new(high, self.level + 1, self.offset + low_len as u32),
        ]));
        SplitCost {
            size: m,
            comparisons: selector.comparisons() + m as u64,
        }
    }

    fn memory_bytes(&self) -> usize {
        let own = size_of::<Self>()
            + self.elems.capacity() * size_of::<Element<V>>()
            + (self.low_pred.capacity() + self.high_pred.capacity()) * size_of::<u32>();
        own + self
            .children
            .as_deref()
            .map_or(0, |c| c[0].memory_bytes() + c[1].memory_bytes())
    }

    fn fully_built(&self) -> bool {
        match self.children.as_deref() {
            Some([a, b]) => a.fully_built() && b.fully_built(),
            None => self.elems.len() <= 1,
        }
    }

    fn build_all(&mut self, strategy: SelectionStrategy, par: Parallelism) -> Stats {
        let mut stats = Stats::default();
        if self.elems.len() <= 1 {
            return stats;
        }
        if self.children.is_none() {
            let cost = self.split(strategy);
            stats.record_split(self.level as usize, cost.size);
            stats.comparisons += cost.comparisons;
        }
        let size = self.elems.len();
        let [low, high] = &mut **self.children.as_mut().unwrap();
        let (a, b) = if size >= PARALLEL_CUTOFF {
            par::join(
                par,
                || low.build_all(strategy, par),
                || high.build_all(strategy, par),
            )
        } else {
            (low.build_all(strategy, par), high.build_all(strategy, par))
        };
        stats.merge(&a);
        stats.merge(&b);
        stats
    }
}

/// Number of elements in `elems` with original index at most `q`.
fn find<V>(elems: &[Element<V>], q: usize) -> usize {
    elems.partition_point(|e| (e.index as usize) <= q)
}

/// Pointer-machine range selection structure.
#[derive(Clone, Debug)]
pub struct CascadeTree<V> {
    root: CascadeNode<V>,
    strategy: SelectionStrategy,
    stats: Stats,
    verify_cascade: bool,
}

impl<V: Value> CascadeTree<V> {
    pub fn new(values: &[V]) -> Result<Self> {
        Self::with_strategy(values, SelectionStrategy::default())
    }

    pub fn with_strategy(values: &[V], strategy: SelectionStrategy) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(CascadeTree {
            root: CascadeNode::new(elements_of(values)?, 0, 0),
            strategy,
            stats: Stats::default(),
            verify_cascade: false,
        })
    }

    /// When enabled, every descent step also recomputes the child positions
    /// by binary search and panics on disagreement.
    pub fn set_verify_cascade(&mut self, on: bool) {
        self.verify_cascade = on;
    }

    pub fn len(&self) -> usize {
        self.root.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> &CascadeNode<V> {
        &self.root
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn strategy(&self) -> SelectionStrategy {
        self.strategy
    }

    pub fn query(&mut self, q: &RangeQuery) -> Result<Element<V>> {
        self.query_traced(q).map(|(e, _)| e)
    }

    /// Answers `q`, splitting nodes on the way down as needed.
    pub fn query_traced(&mut self, q: &RangeQuery) -> Result<(Element<V>, QueryTrace)> {
        let mut p = q.resolve(self.len())?;
        let (left, right) = (q.left, q.right);
        let mut trace = QueryTrace::default();
        let (mut pos_l, mut pos_r) = (left - 1, right);
        let strategy = self.strategy;
        let verify = self.verify_cascade;
        let mut node = &mut self.root;
        loop {
            trace.nodes_visited += 1;
            if node.elems.len() == 1 {
                let found = node.elems[0];
                self.stats.record_query(&trace);
                return Ok((found, trace));
            }
            if node.children.is_none() {
                let cost = node.split(strategy);
                self.stats.record_split(node.level as usize, cost.size);
                self.stats.comparisons += cost.comparisons;
                trace.splits += 1;
                trace.elements_partitioned += cost.size as u64;
                trace.comparisons += cost.comparisons;
            }
            let l = node.low_pred[pos_l] as usize;
            let r = node.low_pred[pos_r] as usize;
            trace.cascade_steps += 2;
            let m = r - l;
            let children = node.children.as_deref_mut().unwrap();
            if verify {
                assert_eq!(l, find(&children[0].elems, left - 1), "low cascade at L");
                assert_eq!(r, find(&children[0].elems, right), "low cascade at R");
            }
            if p <= m {
                (pos_l, pos_r) = (l, r);
                node = &mut children[0];
            } else {
                (pos_l, pos_r) = (
                    node.high_pred[pos_l] as usize,
                    node.high_pred[pos_r] as usize,
                );
                p -= m;
                if verify {
                    assert_eq!(
                        pos_l,
                        find(&children[1].elems, left - 1),
                        "high cascade at L"
                    );
                    assert_eq!(pos_r, find(&children[1].elems, right), "high cascade at R");
                }
                node = &mut children[1];
            }
        }
    }

    /// Read-only query; fails if the descent reaches an unsplit node.
    ///
    /// After [`build_eager`](Self::build_eager) this never fails, and the
    /// tree can be shared between threads for concurrent queries.
    pub fn query_frozen(&self, q: &RangeQuery) -> Result<(Element<V>, QueryTrace)> {
        let mut p = q.resolve(self.len())?;
        let mut trace = QueryTrace::default();
        let (mut pos_l, mut pos_r) = (q.left - 1, q.right);
        let mut node = &self.root;
        loop {
            trace.nodes_visited += 1;
            if node.elems.len() == 1 {
                return Ok((node.elems[0], trace));
            }
            let Some(children) = node.children.as_deref() else {
                return Err(Error::NotMaterialized {
                    level: node.level as usize,
                });
            };
            let l = node.low_pred[pos_l] as usize;
            let r = node.low_pred[pos_r] as usize;
            trace.cascade_steps += 2;
            let m = r - l;
            if p <= m {
                (pos_l, pos_r) = (l, r);
                node = &children[0];
            } else {
                (pos_l, pos_r) = (
                    node.high_pred[pos_l] as usize,
                    node.high_pred[pos_r] as usize,
                );
                p -= m;
                node = &children[1];
            }
        }
    }

    /// Splits every node down to singletons.
    pub fn build_eager(&mut self, par: Parallelism) {
        let stats = self.root.build_all(self.strategy, par);
        self.stats.merge(&stats);
    }

    pub fn is_fully_built(&self) -> bool {
        self.root.fully_built()
    }

    /// Heap and node bytes currently held, rounded up to 64-bit words.
    pub fn memory_words(&self) -> usize {
        self.root.memory_bytes().div_ceil(8)
    }
}
