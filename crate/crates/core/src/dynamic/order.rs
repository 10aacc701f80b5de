//! List order maintenance with integer tags.
//!
//! Each live element carries a 62-bit tag, and list order equals tag order,
//! so comparing two elements is a single integer comparison. When an insert
//! finds no free tag between its neighbours, the smallest aligned tag block
//! around the insertion point whose density is below a geometrically
//! shrinking threshold is relabeled evenly.

use std::cmp::Ordering;

use crate::error::{Error, Result};

const HEAD: u32 = 0;
const TAG_BITS: u32 = 62;
const TAG_END: u64 = 1 << TAG_BITS;
/// Block of size `2^i` may be relabeled once it holds fewer than `(2 / T)^i` items.
const DENSITY_BASE: f64 = 2.0 / 1.4;

/// Stable identity of one list element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElementHandle {
    slot: u32,
    generation: u32,
}

impl ElementHandle {
    pub fn slot(&self) -> u32 {
        self.slot
    }
}

#[derive(Clone, Debug)]
struct Slot {
    prev: u32,
    next: u32,
    tag: u64,
    generation: u32,
    live: bool,
}

#[derive(Clone, Debug)]
pub struct OrderIndex {
    slots: Vec<Slot>,
    free: Vec<u32>,
    len: usize,
    relabeled: u64,
}

impl Default for OrderIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl OrderIndex {
    pub fn new() -> Self {
        OrderIndex {
            slots: vec![Slot {
                prev: HEAD,
                next: HEAD,
                tag: 0,
                generation: 0,
                live: false,
            }],
            free: Vec::new(),
            len: 0,
            relabeled: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Total number of tag reassignments performed so far.
    pub fn relabeled(&self) -> u64 {
        self.relabeled
    }

    pub fn is_live(&self, h: ElementHandle) -> bool {
        self.slots
            .get(h.slot as usize)
            .is_some_and(|s| s.live && s.generation == h.generation)
    }

    fn check(&self, h: ElementHandle) -> Result<()> {
        if self.is_live(h) {
            Ok(())
        } else {
            Err(Error::DeadHandle)
        }
    }

    #[inline]
    pub(crate) fn tag_of_slot(&self, slot: u32) -> u64 {
        self.slots[slot as usize].tag
    }

    pub fn tag(&self, h: ElementHandle) -> Result<u64> {
        self.check(h)?;
        Ok(self.tag_of_slot(h.slot))
    }

    /// List-order comparison of two live handles.
    pub fn compare(&self, a: ElementHandle, b: ElementHandle) -> Result<Ordering> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.tag_of_slot(a.slot).cmp(&self.tag_of_slot(b.slot)))
    }

    pub(crate) fn handle_of_slot(&self, slot: u32) -> ElementHandle {
        ElementHandle {
            slot,
            generation: self.slots[slot as usize].generation,
        }
    }

    pub fn first(&self) -> Option<ElementHandle> {
        let next = self.slots[HEAD as usize].next;
        (next != HEAD).then(|| self.handle_of_slot(next))
    }

    pub fn last(&self) -> Option<ElementHandle> {
        let prev = self.slots[HEAD as usize].prev;
        (prev != HEAD).then(|| self.handle_of_slot(prev))
    }

    pub fn next(&self, h: ElementHandle) -> Result<Option<ElementHandle>> {
        self.check(h)?;
        let next = self.slots[h.slot as usize].next;
        Ok((next != HEAD).then(|| self.handle_of_slot(next)))
    }

    /// Handles in list order.
    pub fn iter(&self) -> impl Iterator<Item = ElementHandle> + '_ {
        let mut cur = self.slots[HEAD as usize].next;
        std::iter::from_fn(move || {
            if cur == HEAD {
                return None;
            }
            let h = self.handle_of_slot(cur);
            cur = self.slots[cur as usize].next;
            Some(h)
        })
    }

    /// Inserts a new element directly after `after`, or at the front.
    pub fn insert_after(&mut self, after: Option<ElementHandle>) -> Result<ElementHandle> {
        let pred = match after {
            Some(h) => {
                self.check(h)?;
                h.slot
            }
            None => HEAD,
        };
        let tag = match self.free_tag_after(pred) {
            Some(tag) => tag,
            None => {
                self.relabel_around(pred);
                self.free_tag_after(pred)
                    .expect("relabeling leaves a gap after the insertion point")
            }
        };
        let next = self.slots[pred as usize].next;
        let slot = match self.free.pop() {
            Some(slot) => {
                let s = &mut self.slots[slot as usize];
                s.generation = s.generation.wrapping_add(1);
                s.prev = pred;
                s.next = next;
                s.tag = tag;
                s.live = true;
                slot
            }
            None => {
                self.slots.push(Slot {
                    prev: pred,
                    next,
                    tag,
                    generation: 0,
                    live: true,
                });
                (self.slots.len() - 1) as u32
            }
        };
        self.slots[pred as usize].next = slot;
        self.slots[next as usize].prev = slot;
        self.len += 1;
        Ok(self.handle_of_slot(slot))
    }

    pub fn remove(&mut self, h: ElementHandle) -> Result<()> {
        self.check(h)?;
        let (prev, next) = {
            let s = &self.slots[h.slot as usize];
            (s.prev, s.next)
        };
        self.slots[prev as usize].next = next;
        self.slots[next as usize].prev = prev;
        self.slots[h.slot as usize].live = false;
        self.free.push(h.slot);
        self.len -= 1;
        Ok(())
    }

    fn free_tag_after(&self, pred: u32) -> Option<u64> {
        let lo = self.slots[pred as usize].tag;
        let next = self.slots[pred as usize].next;
        let hi = if next == HEAD {
            TAG_END
        } else {
            self.slots[next as usize].tag
        };
        (hi - lo >= 2).then(|| lo + (hi - lo) / 2)
    }

    fn relabel_around(&mut self, pred: u32) {
        let anchor = self.slots[pred as usize].tag;
        for i in 1..=TAG_BITS {
            let size = 1u64 << i;
            let base = anchor >> i << i;
            let end = base + size;
            // leftmost member of the block at or before `pred`
            let mut first = pred;
            let mut count = u64::from(pred != HEAD);
            if pred != HEAD {
                loop {
                    let prev = self.slots[first as usize].prev;
                    if prev == HEAD || self.slots[prev as usize].tag < base {
                        break;
                    }
                    first = prev;
                    count += 1;
                }
            }
            let mut cur = self.slots[pred as usize].next;
            while cur != HEAD && self.slots[cur as usize].tag < end {
                count += 1;
                cur = self.slots[cur as usize].next;
            }
            let threshold = DENSITY_BASE.powi(i as i32);
            if ((count + 1) as f64) >= threshold || count + 2 > size / 2 {
                continue;
            }
            let spacing = size / (count + 2);
            let mut slot = if pred == HEAD {
                self.slots[HEAD as usize].next
            } else {
                first
            };
            for t in 0..count {
                self.slots[slot as usize].tag = base + spacing * (t + 1);
                slot = self.slots[slot as usize].next;
            }
            self.relabeled += count;
            return;
        }
        unreachable!("tag universe exhausted");
    }
}
