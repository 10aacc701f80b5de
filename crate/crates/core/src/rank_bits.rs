//! Bit vectors with constant-time rank.
//!
//! A directory entry is kept for every position that is a multiple of
//! [`BLOCK_BITS`]; a rank is that entry plus the popcount of at most eight
//! words between the entry and the query position.

use crate::error::{Error, Result};

/// Directory granularity in bits.
pub const BLOCK_BITS: usize = 512;
const WORD_BITS: usize = 64;

/// Number of 1-bits in `words` at bit positions `[from, to)`.
#[inline]
fn ones_between(words: &[u64], from: usize, to: usize) -> usize {
    if from >= to {
        return 0;
    }
    let (fw, fb) = (from / WORD_BITS, from % WORD_BITS);
    let (tw, tb) = (to / WORD_BITS, to % WORD_BITS);
    if fw == tw {
        let mask = ((1u64 << (tb - fb)) - 1) << fb;
        return (words[fw] & mask).count_ones() as usize;
    }
    let mut count = (words[fw] >> fb).count_ones() as usize;
    for w in &words[fw + 1..tw] {
        count += w.count_ones() as usize;
    }
    if tb > 0 {
        count += (words[tw] & ((1u64 << tb) - 1)).count_ones() as usize;
    }
    count
}

/// Immutable bit sequence answering prefix popcounts in constant time.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankBitVector {
    words: Vec<u64>,
    /// `superblock_ranks[j]` = ones among the first `j * BLOCK_BITS` bits.
    superblock_ranks: Vec<u64>,
    len: usize,
}

impl RankBitVector {
    pub fn build(bits: &[bool]) -> Self {
        Self::from_bits(bits.iter().copied())
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                *words.last_mut().unwrap() |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self::from_words(words, len)
    }

    /// Builds from packed little-endian words; bits past `len` are ignored.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(WORD_BITS), 0);
        if !len.is_multiple_of(WORD_BITS) {
            let last = words.len() - 1;
            words[last] &= (1u64 << (len % WORD_BITS)) - 1;
        }
        let words_per_block = BLOCK_BITS / WORD_BITS;
        let mut superblock_ranks = Vec::with_capacity(len / BLOCK_BITS + 1);
        let mut running = 0u64;
        superblock_ranks.push(0);
        for block in words.chunks(words_per_block) {
            running += block.iter().map(|w| w.count_ones() as u64).sum::<u64>();
            if block.len() == words_per_block {
                superblock_ranks.push(running);
            }
        }
        superblock_ranks.truncate(len / BLOCK_BITS + 1);
        RankBitVector {
            words,
            superblock_ranks,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 1-based position `i`.
    pub fn get(&self, i: usize) -> bool {
        assert!(
            (1..=self.len).contains(&i),
            "bit {i} out of 1..={}",
            self.len
        );
        let pos = i - 1;
        self.words[pos / WORD_BITS] >> (pos % WORD_BITS) & 1 == 1
    }

    /// Number of 1-bits among positions `1..=i`; `rank1(0) == 0`.
    pub fn rank1(&self, i: usize) -> Result<usize> {
        if i > self.len {
            return Err(Error::BitPosition {
                pos: i,
                len: self.len,
            });
        }
        Ok(self.rank1_unchecked(i))
    }

    #[inline]
    pub fn rank1_unchecked(&self, i: usize) -> usize {
        let block = i / BLOCK_BITS;
        self.superblock_ranks[block] as usize + ones_between(&self.words, block * BLOCK_BITS, i)
    }

    pub fn count_ones(&self) -> usize {
        self.rank1_unchecked(self.len)
    }

    /// Bits used by the packed payload (whole words).
    pub fn payload_bits(&self) -> usize {
        self.words.len() * WORD_BITS
    }

    /// Bits used by the rank directory.
    pub fn aux_bits(&self) -> usize {
        self.superblock_ranks.len() * u64::BITS as usize
    }
}

/// A fixed-length bit array written as disjoint segments, each at most once,
/// with rank relative to a segment start.
///
/// Every directory block start belongs to exactly one segment; its entry holds
/// the ones between that segment's start and the block start. This lets a
/// segment be written without touching any other segment's directory entries,
/// which is what a lazily split level of a value-partition tree needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentedRankBits {
    words: Vec<u64>,
    block_ranks: Vec<u32>,
    len: usize,
}

impl SegmentedRankBits {
    pub fn new(len: usize) -> Self {
        SegmentedRankBits {
            words: vec![0; len.div_ceil(WORD_BITS)],
            block_ranks: vec![0; len.div_ceil(BLOCK_BITS)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 0-based position `pos`.
    pub fn get(&self, pos: usize) -> bool {
        self.words[pos / WORD_BITS] >> (pos % WORD_BITS) & 1 == 1
    }

    /// Writes the segment `[start, start + seg_len)` from packed local words.
    ///
    /// The segment must not overlap one written before. Returns its popcount.
    pub fn write_segment(&mut self, start: usize, local: &[u64], seg_len: usize) -> usize {
        assert!(start + seg_len <= self.len, "segment past end");
        for i in 0..seg_len {
            if local[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1 {
                let pos = start + i;
                self.words[pos / WORD_BITS] |= 1 << (pos % WORD_BITS);
            }
        }
        let end = start + seg_len;
        let mut block = start.div_ceil(BLOCK_BITS);
        let mut counted_to = start;
        let mut ones = 0;
        while block * BLOCK_BITS < end {
            let at = block * BLOCK_BITS;
            ones += ones_between(&self.words, counted_to, at);
            self.block_ranks[block] = ones as u32;
            counted_to = at;
            block += 1;
        }
        ones + ones_between(&self.words, counted_to, end)
    }

    /// Ones in `[start, start + i)`, where `start` begins a written segment and
    /// `start + i` lies within it.
    #[inline]
    pub fn rank_in_segment(&self, start: usize, i: usize) -> usize {
        if i == 0 {
            return 0;
        }
        let pos = start + i;
        let block = (pos - 1) / BLOCK_BITS;
        let block_start = block * BLOCK_BITS;
        if block_start <= start {
            ones_between(&self.words, start, pos)
        } else {
            self.block_ranks[block] as usize + ones_between(&self.words, block_start, pos)
        }
    }

    pub fn payload_bits(&self) -> usize {
        self.words.len() * WORD_BITS
    }

    pub fn aux_bits(&self) -> usize {
        self.block_ranks.len() * u32::BITS as usize
    }
}
