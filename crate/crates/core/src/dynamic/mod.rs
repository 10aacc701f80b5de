//! Range selection over a mutable linked list.
//!
//! The primary structure is a weight-balanced binary search tree ordered by
//! `(value, insertion id)`. Each primary node owns a secondary order-statistic
//! tree holding the elements of its subtree ordered by list position, so the
//! number of elements of a subtree that fall between two list handles is two
//! rank searches. A query walks down the primary tree choosing the side that
//! contains the requested rank. An update touches the secondary tree of every
//! node on its search path; when a node's weight balance breaks, the highest
//! such node is rebuilt perfectly balanced together with all secondary trees
//! below it.

mod order;
mod secondary;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::mem::size_of;

pub use order::{ElementHandle, OrderIndex};
use secondary::{Forest, NIL};

use crate::error::{Error, Result};
use crate::selection::splitmix64;
use crate::types::{median_rank, Stats, Value};

/// Default weight-balance parameter.
pub const DEFAULT_ALPHA: f64 = 0.25;

#[derive(Clone, Debug)]
struct PrimaryNode<V> {
    value: V,
    id: u64,
    slot: u32,
    left: u32,
    right: u32,
    size: u32,
    secondary: u32,
}

#[derive(Clone, Copy, Debug)]
struct Item<V> {
    value: V,
    id: u64,
    slot: u32,
}

/// Identifies a node of the primary tree (valid until the next update).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(u32);

#[derive(Clone, Debug)]
pub struct DynamicTree<V> {
    order: OrderIndex,
    forest: Forest,
    nodes: Vec<PrimaryNode<V>>,
    free: Vec<u32>,
    root: u32,
    /// Value and insertion id of each live order slot.
    items: Vec<Option<(V, u64)>>,
    next_id: u64,
    alpha: f64,
    max_len: usize,
    stats: Stats,
}

impl<V: Value> Default for DynamicTree<V> {
    fn default() -> Self {
        Self::new()
    }
}

fn priority(slot: u32) -> u32 {
    (splitmix64(u64::from(slot)) >> 32) as u32
}

impl<V: Value> DynamicTree<V> {
    pub fn new() -> Self {
        Self::with_alpha(DEFAULT_ALPHA)
    }

    /// `alpha` must lie in `(0, 1/3]`; perfectly balanced subtrees satisfy
    /// any value in that range.
    pub fn with_alpha(alpha: f64) -> Self {
        assert!(
            alpha > 0.0 && alpha <= 1.0 / 3.0,
            "alpha {alpha} outside (0, 1/3]"
        );
        DynamicTree {
            order: OrderIndex::new(),
            forest: Forest::default(),
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            items: Vec::new(),
            next_id: 0,
            alpha,
            max_len: 0,
            stats: Stats::default(),
        }
    }

    /// Builds a list holding `values` in order, with a perfectly balanced
    /// primary tree. Returns the handles in list order.
    pub fn from_values(values: &[V]) -> Result<(Self, Vec<ElementHandle>)> {
        crate::types::check_values(values)?;
        let mut tree = Self::new();
        let mut handles = Vec::with_capacity(values.len());
        let mut last = None;
        for &value in values {
            let h = tree.order.insert_after(last)?;
            tree.set_item(h.slot(), value);
            handles.push(h);
            last = Some(h);
        }
        let mut ranked: Vec<(usize, Item<V>)> = handles
            .iter()
            .enumerate()
            .map(|(pos, h)| {
                let (value, id) = tree.items[h.slot() as usize].unwrap();
                let item = Item {
                    value,
                    id,
                    slot: h.slot(),
                };
                (pos, item)
            })
            .collect();
        let mut comparisons = 0;
        ranked.sort_by(|(_, a), (_, b)| {
            comparisons += 1;
            a.value.cmp_value(&b.value).then(a.id.cmp(&b.id))
        });
        tree.stats.comparisons += comparisons;
        // list order is input order, so no second sort is needed
        let mut by_position = vec![0u32; ranked.len()];
        for (rank, (pos, _)) in ranked.iter().enumerate() {
            by_position[*pos] = rank as u32;
        }
        let items: Vec<Item<V>> = ranked.into_iter().map(|(_, item)| item).collect();
        tree.root = tree.build_range(&items, 0, items.len() as u32, &by_position);
        tree.max_len = values.len();
        Ok((tree, handles))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Largest number of live elements seen so far.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn order(&self) -> &OrderIndex {
        &self.order
    }

    pub fn is_live(&self, h: ElementHandle) -> bool {
        self.order.is_live(h)
    }

    pub fn value(&self, h: ElementHandle) -> Result<V> {
        if !self.order.is_live(h) {
            return Err(Error::DeadHandle);
        }
        Ok(self.items[h.slot() as usize].unwrap().0)
    }

    /// Handles in list order.
    pub fn handles(&self) -> impl Iterator<Item = ElementHandle> + '_ {
        self.order.iter()
    }

    fn set_item(&mut self, slot: u32, value: V) {
        let slot = slot as usize;
        if self.items.len() <= slot {
            self.items.resize(slot + 1, None);
        }
        self.items[slot] = Some((value, self.next_id));
        self.next_id += 1;
    }

    #[inline]
    fn key_cmp(&mut self, value: &V, id: u64, node: u32) -> Ordering {
        self.stats.comparisons += 1;
        let n = &self.nodes[node as usize];
        value.cmp_value(&n.value).then(id.cmp(&n.id))
    }

    fn size(&self, t: u32) -> u32 {
        if t == NIL {
            0
        } else {
            self.nodes[t as usize].size
        }
    }

    fn is_balanced(&self, t: u32) -> bool {
        let n = &self.nodes[t as usize];
        let wl = f64::from(self.size(n.left) + 1);
        let wr = f64::from(self.size(n.right) + 1);
        let threshold = self.alpha * (wl + wr);
        wl >= threshold && wr >= threshold
    }

    fn alloc_node(&mut self, node: PrimaryNode<V>) -> u32 {
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    /// Inserts `value` directly after `after` in list order (at the front
    /// when `after` is `None`).
    pub fn insert(&mut self, after: Option<ElementHandle>, value: V) -> Result<ElementHandle> {
        if value.is_nan() {
            return Err(Error::NotANumber {
                index: self.len() + 1,
            });
        }
        let h = self.order.insert_after(after)?;
        let slot = h.slot();
        self.set_item(slot, value);
        let id = self.next_id - 1;
        let prio = priority(slot);
        let mut comparisons = 0;
        let mut path = Vec::new();
        let mut cur = self.root;
        let mut link_left = false;
        while cur != NIL {
            path.push(cur);
            let sec = self.nodes[cur as usize].secondary;
            let sec = self
                .forest
                .insert(sec, slot, prio, &self.order, &mut comparisons);
            let node = &mut self.nodes[cur as usize];
            node.secondary = sec;
            node.size += 1;
            link_left = self.key_cmp(&value, id, cur) == Ordering::Less;
            let node = &self.nodes[cur as usize];
            cur = if link_left { node.left } else { node.right };
        }
        let secondary = self
            .forest
            .insert(NIL, slot, prio, &self.order, &mut comparisons);
        let fresh = self.alloc_node(PrimaryNode {
            value,
            id,
            slot,
            left: NIL,
            right: NIL,
            size: 1,
            secondary,
        });
        match path.last() {
            None => self.root = fresh,
            Some(&parent) if link_left => self.nodes[parent as usize].left = fresh,
            Some(&parent) => self.nodes[parent as usize].right = fresh,
        }
        self.stats.comparisons += comparisons;
        self.max_len = self.max_len.max(self.len());
        self.rebalance(&path);
        Ok(h)
    }

    /// Removes `h` from the list and from every structure that holds it.
    pub fn delete(&mut self, h: ElementHandle) -> Result<()> {
        if !self.order.is_live(h) {
            return Err(Error::DeadHandle);
        }
        let slot = h.slot();
        let (value, id) = self.items[slot as usize].unwrap();
        let mut comparisons = 0;

        let mut path = Vec::new();
        let mut cur = self.root;
        loop {
            assert!(cur != NIL, "live element missing from primary tree");
            let ord = self.key_cmp(&value, id, cur);
            if ord == Ordering::Equal {
                break;
            }
            path.push(cur);
            let sec = self.nodes[cur as usize].secondary;
            let sec = self.forest.remove(sec, slot, &self.order, &mut comparisons);
            let node = &mut self.nodes[cur as usize];
            node.secondary = sec;
            node.size -= 1;
            cur = if ord == Ordering::Less {
                node.left
            } else {
                node.right
            };
        }
        let target = cur;
        let parent = path.last().copied();
        let (left, right) = {
            let t = &self.nodes[target as usize];
            (t.left, t.right)
        };
        if left == NIL || right == NIL {
            let child = if left == NIL { right } else { left };
            self.forest.free_tree(self.nodes[target as usize].secondary);
            self.replace_child(parent, target, child);
            self.free.push(target);
        } else {
            let sec = self.nodes[target as usize].secondary;
            let sec = self.forest.remove(sec, slot, &self.order, &mut comparisons);
            self.nodes[target as usize].secondary = sec;
            self.nodes[target as usize].size -= 1;
            path.push(target);
            // successor: leftmost node of the right subtree
            let mut succ_parent = target;
            let mut succ = right;
            while self.nodes[succ as usize].left != NIL {
                path.push(succ);
                succ_parent = succ;
                succ = self.nodes[succ as usize].left;
            }
            let succ_slot = self.nodes[succ as usize].slot;
            for &x in path.iter().skip_while(|&&x| x != target).skip(1) {
                let sec = self.nodes[x as usize].secondary;
                let sec = self
                    .forest
                    .remove(sec, succ_slot, &self.order, &mut comparisons);
                self.nodes[x as usize].secondary = sec;
                self.nodes[x as usize].size -= 1;
            }
            let succ_right = self.nodes[succ as usize].right;
            self.forest.free_tree(self.nodes[succ as usize].secondary);
            self.replace_child(Some(succ_parent), succ, succ_right);
            let (sv, sid) = (
                self.nodes[succ as usize].value,
                self.nodes[succ as usize].id,
            );
            let t = &mut self.nodes[target as usize];
            t.value = sv;
            t.id = sid;
            t.slot = succ_slot;
            self.free.push(succ);
        }
        self.items[slot as usize] = None;
        self.order.remove(h)?;
        self.stats.comparisons += comparisons;
        self.rebalance(&path);
        Ok(())
    }

    fn replace_child(&mut self, parent: Option<u32>, old: u32, new: u32) {
        match parent {
            None => self.root = new,
            Some(p) => {
                let p = &mut self.nodes[p as usize];
                if p.left == old {
                    p.left = new;
                } else {
                    debug_assert_eq!(p.right, old);
                    p.right = new;
                }
            }
        }
    }

    /// Rebuilds the highest node on `path` (root first) that lost its balance.
    fn rebalance(&mut self, path: &[u32]) {
        let Some(i) = path.iter().position(|&v| !self.is_balanced(v)) else {
            return;
        };
        let victim = path[i];
        let parent = i.checked_sub(1).map(|j| path[j]);
        let mut items = Vec::with_capacity(self.size(victim) as usize);
        self.drain_subtree(victim, &mut items);
        self.stats.rebuilds += 1;
        self.stats.rebuild_elements += items.len() as u64;
        let fresh = self.build_balanced(&items);
        self.replace_child(parent, victim, fresh);
    }

    /// Appends the subtree's elements in value order and frees its nodes.
    fn drain_subtree(&mut self, t: u32, out: &mut Vec<Item<V>>) {
        if t == NIL {
            return;
        }
        let (left, right, sec) = {
            let n = &self.nodes[t as usize];
            (n.left, n.right, n.secondary)
        };
        self.drain_subtree(left, out);
        let n = &self.nodes[t as usize];
        out.push(Item {
            value: n.value,
            id: n.id,
            slot: n.slot,
        });
        self.drain_subtree(right, out);
        self.forest.free_tree(sec);
        self.free.push(t);
    }

    /// Builds a perfectly balanced subtree over `items` (in value order),
    /// including every secondary tree.
    fn build_balanced(&mut self, items: &[Item<V>]) -> u32 {
        let mut by_position: Vec<u32> = (0..items.len() as u32).collect();
        let mut comparisons = 0;
        let order = &self.order;
        by_position.sort_unstable_by(|&a, &b| {
            comparisons += 1;
            order
                .tag_of_slot(items[a as usize].slot)
                .cmp(&order.tag_of_slot(items[b as usize].slot))
        });
        self.stats.comparisons += comparisons;
        self.build_range(items, 0, items.len() as u32, &by_position)
    }

    /// `ranks` lists the value ranks in `[lo, hi)` in list order.
    fn build_range(&mut self, items: &[Item<V>], lo: u32, hi: u32, ranks: &[u32]) -> u32 {
        if lo == hi {
            return NIL;
        }
        let mid = lo + (hi - lo) / 2;
        let secondary = self.forest.build_sorted(ranks.iter().map(|&r| {
            let slot = items[r as usize].slot;
            (slot, priority(slot))
        }));
        let (left_ranks, right_ranks): (Vec<u32>, Vec<u32>) =
            ranks.iter().filter(|&&r| r != mid).partition(|&&r| r < mid);
        let left = self.build_range(items, lo, mid, &left_ranks);
        let right = self.build_range(items, mid + 1, hi, &right_ranks);
        let it = items[mid as usize];
        self.alloc_node(PrimaryNode {
            value: it.value,
            id: it.id,
            slot: it.slot,
            left,
            right,
            size: hi - lo,
            secondary,
        })
    }

    fn check_range(&self, from: ElementHandle, to: ElementHandle) -> Result<(u64, u64)> {
        if self.is_empty() {
            return Err(Error::EmptyStructure);
        }
        match self.order.compare(from, to)? {
            Ordering::Greater => Err(Error::ReversedRange),
            _ => Ok((self.order.tag(from)?, self.order.tag(to)?)),
        }
    }

    /// Number of elements between `from` and `to` (inclusive) in list order.
    pub fn count_range(&mut self, from: ElementHandle, to: ElementHandle) -> Result<usize> {
        let (lo, hi) = self.check_range(from, to)?;
        let root_sec = self.nodes[self.root as usize].secondary;
        let mut comparisons = 0;
        let count = self
            .forest
            .count_in_range(root_sec, lo, hi, &self.order, &mut comparisons);
        self.stats.comparisons += comparisons;
        Ok(count)
    }

    /// Elements of `node`'s subtree lying between `from` and `to` in list order.
    pub fn count_in_subtree(
        &self,
        node: NodeId,
        from: ElementHandle,
        to: ElementHandle,
    ) -> Result<usize> {
        let (lo, hi) = self.check_range(from, to)?;
        let sec = self.nodes[node.0 as usize].secondary;
        Ok(self.forest.count_in_range(sec, lo, hi, &self.order, &mut 0))
    }

    pub fn root_node(&self) -> Option<NodeId> {
        (self.root != NIL).then_some(NodeId(self.root))
    }

    pub fn left_child(&self, node: NodeId) -> Option<NodeId> {
        let l = self.nodes[node.0 as usize].left;
        (l != NIL).then_some(NodeId(l))
    }

    pub fn right_child(&self, node: NodeId) -> Option<NodeId> {
        let r = self.nodes[node.0 as usize].right;
        (r != NIL).then_some(NodeId(r))
    }

    pub fn node_value(&self, node: NodeId) -> V {
        self.nodes[node.0 as usize].value
    }

    pub fn query(
        &mut self,
        from: ElementHandle,
        to: ElementHandle,
        rank: Option<usize>,
    ) -> Result<V> {
        self.query_element(from, to, rank).map(|(_, v)| v)
    }

    /// Element of rank `rank` (default: lower median) among the elements
    /// from `from` to `to` inclusive.
    pub fn query_element(
        &mut self,
        from: ElementHandle,
        to: ElementHandle,
        rank: Option<usize>,
    ) -> Result<(ElementHandle, V)> {
        let (lo, hi) = self.check_range(from, to)?;
        let mut comparisons = 0;
        let root_sec = self.nodes[self.root as usize].secondary;
        let total = self
            .forest
            .count_in_range(root_sec, lo, hi, &self.order, &mut comparisons);
        let mut p = match rank {
            None => median_rank(total)?,
            Some(p) if (1..=total).contains(&p) => p,
            Some(p) => {
                return Err(Error::InvalidRank {
                    rank: p,
                    len: total,
                })
            }
        };
        let mut cur = self.root;
        let found = loop {
            let node = &self.nodes[cur as usize];
            let in_left = if node.left == NIL {
                0
            } else {
                let sec = self.nodes[node.left as usize].secondary;
                self.forest
                    .count_in_range(sec, lo, hi, &self.order, &mut comparisons)
            };
            if p <= in_left {
                cur = node.left;
                continue;
            }
            comparisons += 2;
            let tag = self.order.tag_of_slot(node.slot);
            let own = usize::from(lo <= tag && tag <= hi);
            if own == 1 && p == in_left + 1 {
                break (self.order.handle_of_slot(node.slot), node.value);
            }
            p -= in_left + own;
            cur = node.right;
        };
        self.stats.comparisons += comparisons;
        self.stats.queries += 1;
        Ok(found)
    }

    /// Heap bytes held by all parts of the structure, in 64-bit words.
    pub fn memory_words(&self) -> usize {
        let bytes = self.nodes.capacity() * size_of::<PrimaryNode<V>>()
            + self.forest.capacity() * Forest::node_bytes()
            + self.items.capacity() * size_of::<Option<(V, u64)>>()
            + self.order.len() * 24;
        bytes.div_ceil(8)
    }

    /// Checks every structural invariant; meant for tests on small inputs.
    pub fn audit(&self) -> Result<(), String> {
        if self.root == NIL {
            return if self.is_empty() && self.forest.live_nodes() == 0 {
                Ok(())
            } else {
                Err("empty primary tree but live elements".into())
            };
        }
        let mut seen = Vec::new();
        self.audit_node(self.root, &mut seen)?;
        if seen.len() != self.len() {
            return Err(format!(
                "primary holds {} of {} elements",
                seen.len(),
                self.len()
            ));
        }
        let root_items = self
            .forest
            .items_in_order(self.nodes[self.root as usize].secondary)?;
        let listed: Vec<u32> = self.order.iter().map(|h| h.slot()).collect();
        if root_items != listed {
            return Err("root secondary order differs from list order".into());
        }
        Ok(())
    }

    fn audit_node(&self, t: u32, out: &mut Vec<u32>) -> Result<(), String> {
        let node = &self.nodes[t as usize];
        let start = out.len();
        if node.left != NIL {
            self.audit_node(node.left, out)?;
            let l = &self.nodes[node.left as usize];
            if l.value.cmp_value(&node.value).then(l.id.cmp(&node.id)) != Ordering::Less {
                return Err("primary order violated on the left".into());
            }
        }
        out.push(node.slot);
        if node.right != NIL {
            self.audit_node(node.right, out)?;
            let r = &self.nodes[node.right as usize];
            if r.value.cmp_value(&node.value).then(r.id.cmp(&node.id)) != Ordering::Greater {
                return Err("primary order violated on the right".into());
            }
        }
        let members = &out[start..];
        if node.size as usize != members.len() {
            return Err(format!("primary size {} != {}", node.size, members.len()));
        }
        if !self.is_balanced(t) {
            return Err(format!("node of size {} out of balance", node.size));
        }
        let sec = self.forest.items_in_order(node.secondary)?;
        if sec
            .windows(2)
            .any(|w| self.order.tag_of_slot(w[0]) >= self.order.tag_of_slot(w[1]))
        {
            return Err("secondary not in list order".into());
        }
        let a: HashSet<u32> = sec.iter().copied().collect();
        let b: HashSet<u32> = members.iter().copied().collect();
        if a != b || sec.len() != members.len() {
            return Err("secondary set differs from primary subtree".into());
        }
        Ok(())
    }
}
