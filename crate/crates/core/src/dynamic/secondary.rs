//! Order-statistic treaps keyed by list position.
//!
//! All secondary trees live in one arena. Keys are order-index slots, compared
//! through their current tags, so relabeling never invalidates a tree.

use super::order::OrderIndex;

pub(crate) const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node {
    item: u32,
    prio: u32,
    left: u32,
    right: u32,
    size: u32,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Forest {
    nodes: Vec<Node>,
    free: Vec<u32>,
}

impl Forest {
    pub fn live_nodes(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub fn capacity(&self) -> usize {
        self.nodes.capacity()
    }

    pub fn node_bytes() -> usize {
        std::mem::size_of::<Node>()
    }

    #[inline]
    pub fn size(&self, t: u32) -> u32 {
        if t == NIL {
            0
        } else {
            self.nodes[t as usize].size
        }
    }

    fn alloc(&mut self, item: u32, prio: u32) -> u32 {
        let node = Node {
            item,
            prio,
            left: NIL,
            right: NIL,
            size: 1,
        };
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

    fn update(&mut self, t: u32) {
        let (l, r) = {
            let n = &self.nodes[t as usize];
            (n.left, n.right)
        };
        self.nodes[t as usize].size = self.size(l) + self.size(r) + 1;
    }

    fn rotate_right(&mut self, t: u32) -> u32 {
        let l = self.nodes[t as usize].left;
        self.nodes[t as usize].left = self.nodes[l as usize].right;
        self.nodes[l as usize].right = t;
        self.update(t);
        self.update(l);
        l
    }

    fn rotate_left(&mut self, t: u32) -> u32 {
        let r = self.nodes[t as usize].right;
        self.nodes[t as usize].right = self.nodes[r as usize].left;
        self.nodes[r as usize].left = t;
        self.update(t);
        self.update(r);
        r
    }

    /// Inserts `item` into the tree rooted at `root`; returns the new root.
    pub fn insert(
        &mut self,
        root: u32,
        item: u32,
        prio: u32,
        order: &OrderIndex,
        comparisons: &mut u64,
    ) -> u32 {
        let fresh = self.alloc(item, prio);
        let key = order.tag_of_slot(item);
        self.insert_node(root, fresh, key, order, comparisons)
    }

    fn insert_node(
        &mut self,
        t: u32,
        fresh: u32,
        key: u64,
        order: &OrderIndex,
        comparisons: &mut u64,
    ) -> u32 {
        if t == NIL {
            return fresh;
        }
        *comparisons += 1;
        let node_key = order.tag_of_slot(self.nodes[t as usize].item);
        self.nodes[t as usize].size += 1;
        if key < node_key {
            let l = self.insert_node(self.nodes[t as usize].left, fresh, key, order, comparisons);
            self.nodes[t as usize].left = l;
            if self.nodes[l as usize].prio > self.nodes[t as usize].prio {
                return self.rotate_right(t);
            }
        } else {
            let r = self.insert_node(self.nodes[t as usize].right, fresh, key, order, comparisons);
            self.nodes[t as usize].right = r;
            if self.nodes[r as usize].prio > self.nodes[t as usize].prio {
                return self.rotate_left(t);
            }
        }
        t
    }

    /// Removes `item` (which must be present); returns the new root.
    pub fn remove(
        &mut self,
        root: u32,
        item: u32,
        order: &OrderIndex,
        comparisons: &mut u64,
    ) -> u32 {
        let key = order.tag_of_slot(item);
        self.remove_key(root, key, order, comparisons)
    }

    fn remove_key(&mut self, t: u32, key: u64, order: &OrderIndex, comparisons: &mut u64) -> u32 {
        assert!(t != NIL, "item missing from secondary tree");
        *comparisons += 1;
        let node_key = order.tag_of_slot(self.nodes[t as usize].item);
        if key == node_key {
            let (l, r) = (self.nodes[t as usize].left, self.nodes[t as usize].right);
            self.free.push(t);
            return self.merge(l, r);
        }
        self.nodes[t as usize].size -= 1;
        if key < node_key {
            let l = self.remove_key(self.nodes[t as usize].left, key, order, comparisons);
            self.nodes[t as usize].left = l;
        } else {
            let r = self.remove_key(self.nodes[t as usize].right, key, order, comparisons);
            self.nodes[t as usize].right = r;
        }
        t
    }

    /// Joins two treaps where every key of `a` precedes every key of `b`.
    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.nodes[a as usize].prio > self.nodes[b as usize].prio {
            let r = self.merge(self.nodes[a as usize].right, b);
            self.nodes[a as usize].right = r;
            self.update(a);
            a
        } else {
            let l = self.merge(a, self.nodes[b as usize].left);
            self.nodes[b as usize].left = l;
            self.update(b);
            b
        }
    }

    /// Items with tag strictly below `key` (or at most `key` when `inclusive`).
    fn count_before(
        &self,
        mut t: u32,
        key: u64,
        inclusive: bool,
        order: &OrderIndex,
        comparisons: &mut u64,
    ) -> usize {
        let mut count = 0;
        while t != NIL {
            *comparisons += 1;
            let node = &self.nodes[t as usize];
            let node_key = order.tag_of_slot(node.item);
            if node_key < key || (inclusive && node_key == key) {
                count += self.size(node.left) as usize + 1;
                t = node.right;
            } else {
                t = node.left;
            }
        }
        count
    }

    /// Items whose tag lies in `[from, to]`.
    pub fn count_in_range(
        &self,
        root: u32,
        from: u64,
        to: u64,
        order: &OrderIndex,
        comparisons: &mut u64,
    ) -> usize {
        if root == NIL {
            return 0;
        }
        self.count_before(root, to, true, order, comparisons)
            - self.count_before(root, from, false, order, comparisons)
    }

    /// Builds a treap from items already in key order, in linear time.
    pub fn build_sorted(&mut self, items: impl IntoIterator<Item = (u32, u32)>) -> u32 {
        let mut spine: Vec<u32> = Vec::new();
        for (item, prio) in items {
            let t = self.alloc(item, prio);
            let mut last = NIL;
            while let Some(&top) = spine.last() {
                if self.nodes[top as usize].prio >= prio {
                    break;
                }
                self.update(top);
                last = top;
                spine.pop();
            }
            self.nodes[t as usize].left = last;
            if let Some(&top) = spine.last() {
                self.nodes[top as usize].right = t;
            }
            spine.push(t);
        }
        // the bottom of the right spine is the root
        let root = spine.first().copied().unwrap_or(NIL);
        while let Some(top) = spine.pop() {
            self.update(top);
        }
        root
    }

    pub fn free_tree(&mut self, root: u32) {
        let mut stack = vec![root];
        while let Some(t) = stack.pop() {
            if t == NIL {
                continue;
            }
            let node = &self.nodes[t as usize];
            stack.push(node.left);
            stack.push(node.right);
            self.free.push(t);
        }
    }

    /// Items in key order, with a size check of every node along the way.
    pub fn items_in_order(&self, root: u32) -> Result<Vec<u32>, String> {
        let mut out = Vec::new();
        self.collect(root, &mut out)?;
        Ok(out)
    }

    fn collect(&self, t: u32, out: &mut Vec<u32>) -> Result<u32, String> {
        if t == NIL {
            return Ok(0);
        }
        let node = &self.nodes[t as usize];
        let l = self.collect(node.left, out)?;
        out.push(node.item);
        let r = self.collect(node.right, out)?;
        if node.size != l + r + 1 {
            return Err(format!("secondary size {} != {}", node.size, l + r + 1));
        }
        for child in [node.left, node.right] {
            if child != NIL && self.nodes[child as usize].prio > node.prio {
                return Err("secondary heap order violated".into());
            }
        }
        Ok(node.size)
    }
}
