//! Online range selection: the element of rank `p` in `A[L..=R]` of an
//! unsorted array.
//!
//! Three structures answer the same queries:
//!
//! * [`CascadeTree`]: a lazily split value-partition tree whose nodes keep
//!   their elements and cascade pointers into both children.
//! * [`CompactTree`]: the same tree shape stored as one bit per element per
//!   level with constant-time rank, using linear space.
//! * [`DynamicTree`]: a weight-balanced tree over values whose nodes carry
//!   position-ordered order-statistic trees; supports insertion and deletion
//!   in a linked list.
//!
//! [`median_filter`] builds a 2D median filter on top of the dynamic
//! structure, and [`harness`] runs the instrumented benchmark grid.

pub mod cascade;
pub mod compact;
pub mod datagen;
pub mod dynamic;
pub mod error;
pub mod harness;
pub mod median_filter;
pub mod oracle;
pub mod par;
pub mod pgm;
pub mod rank_bits;
pub mod selection;
pub mod types;

pub use cascade::{CascadeNode, CascadeTree};
pub use compact::{CompactNode, CompactTree, SpaceReport};
pub use dynamic::{DynamicTree, ElementHandle, OrderIndex};
pub use error::{Error, Result};
pub use median_filter::{filter, naive_filter, GrayImage};
pub use oracle::oracle_select;
pub use par::Parallelism;
pub use rank_bits::RankBitVector;
pub use selection::{partition_stable, select_kth, SelectionStrategy, Selector};
pub use types::{median_rank, total_cmp, Element, QueryTrace, RangeQuery, Stats, Value};
