//! Flat slot arena storing incidence lists in fixed-granularity blocks with
//! end/next metadata in the last slot of each block.

use rayon::prelude::*;
use thiserror::Error;

/// Slots per allocation granule; block capacities are multiples of this.
pub const GRANULARITY: usize = 32;

/// End-of-list marker in a block's metadata slot.
pub const END_SENTINEL: i64 = -1;
/// Unused payload slot.
pub const EMPTY_SENTINEL: i64 = -2;

#[inline]
fn encode_pointer(start: usize) -> i64 {
    -(start as i64) - 3
}

#[inline]
fn decode_pointer(code: i64) -> usize {
    debug_assert!(code <= -3);
    (-code - 3) as usize
}

/// Slot count for a payload of `d` elements plus one metadata slot.
#[inline]
pub fn capacity_for(d: usize) -> usize {
    (d + 1).div_ceil(GRANULARITY) * GRANULARITY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub capacity: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArenaError {
    #[error("arena exhausted: need {needed} slots, {available} available")]
    ArenaExhausted { needed: usize, available: usize },
    #[error("list of {len} elements overflows block payload capacity {payload}")]
    Overflow { len: usize, payload: usize },
    #[error("block at {start} is already chained")]
    AlreadyChained { start: usize },
    #[error("corrupt chain at slot {at}")]
    CorruptChain { at: usize },
}

/// One parsed block of a chain: elements occupy `start..elem_end`, the
/// metadata slot sits at `meta`, and `next` is the chained block's start.
#[derive(Debug, Clone, Copy)]
struct BlockScan {
    start: usize,
    elem_end: usize,
    meta: usize,
    next: Option<usize>,
}

impl BlockScan {
    #[inline]
    fn payload(&self) -> usize {
        self.meta - self.start
    }
    #[inline]
    fn len(&self) -> usize {
        self.elem_end - self.start
    }
}

pub enum InsertOutcome {
    Inserted,
    /// No free payload slot anywhere in the chain; caller must chain a block.
    NeedsBlock,
}

#[derive(Debug)]
pub struct FlatArena {
    slots: Vec<i64>,
    watermark: usize,
}

impl FlatArena {
    pub fn new(total_capacity: usize) -> Self {
        FlatArena {
            slots: vec![EMPTY_SENTINEL; total_capacity],
            watermark: 0,
        }
    }

    #[inline]
    pub fn watermark(&self) -> usize {
        self.watermark
    }

    #[inline]
    pub fn total_capacity(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn free_slots(&self) -> usize {
        self.slots.len() - self.watermark
    }

    pub fn alloc_block(&mut self, d: usize) -> Result<Block, ArenaError> {
        let blocks = self.alloc_batch(&[d])?;
        Ok(blocks[0])
    }

    /// Contiguous all-or-nothing allocation: starts are the watermark plus the
    /// exclusive prefix sum of capacities, in input order.
    pub fn alloc_batch(&mut self, ds: &[usize]) -> Result<Vec<Block>, ArenaError> {
        let caps: Vec<usize> = ds.iter().map(|&d| capacity_for(d)).collect();
        let needed: usize = caps.iter().sum();
        if self.watermark + needed > self.slots.len() {
            return Err(ArenaError::ArenaExhausted {
                needed,
                available: self.free_slots(),
            });
        }
        let base = self.watermark;
        self.watermark += needed;

        let mut blocks = Vec::with_capacity(caps.len());
        let mut offset = base;
        for &cap in &caps {
            blocks.push(Block {
                start: offset,
                capacity: cap,
            });
            offset += cap;
        }

        // The reserved range is fresh and contiguous, so per-block
        // initialization can run without coordination.
        let mut region = &mut self.slots[base..base + needed];
        let mut chunks: Vec<&mut [i64]> = Vec::with_capacity(caps.len());
        for &cap in &caps {
            let (head, tail) = region.split_at_mut(cap);
            chunks.push(head);
            region = tail;
        }
        chunks.par_iter_mut().for_each(|chunk| {
            let last = chunk.len() - 1;
            chunk[..last].fill(EMPTY_SENTINEL);
            chunk[last] = END_SENTINEL;
        });

        Ok(blocks)
    }

    /// Parse one block starting at `start`. Layout per block is always
    /// elements*, EMPTY*, then a non-EMPTY metadata slot (END or pointer).
    fn scan_block(&self, start: usize) -> Result<BlockScan, ArenaError> {
        let mut i = start;
        while i < self.watermark && self.slots[i] >= 0 {
            i += 1;
        }
        let elem_end = i;
        while i < self.watermark && self.slots[i] == EMPTY_SENTINEL {
            i += 1;
        }
        if i >= self.watermark {
            return Err(ArenaError::CorruptChain { at: i });
        }
        let v = self.slots[i];
        if v >= 0 {
            // element after a hole: not a well-formed block
            return Err(ArenaError::CorruptChain { at: i });
        }
        let next = if v == END_SENTINEL {
            None
        } else {
            let p = decode_pointer(v);
            if p >= self.watermark {
                return Err(ArenaError::CorruptChain { at: i });
            }
            Some(p)
        };
        Ok(BlockScan {
            start,
            elem_end,
            meta: i,
            next,
        })
    }

    fn scan_chain(&self, start: usize) -> Result<Vec<BlockScan>, ArenaError> {
        let mut out = Vec::new();
        let mut cur = Some(start);
        while let Some(s) = cur {
            let b = self.scan_block(s)?;
            cur = b.next;
            out.push(b);
            debug_assert!(out.len() <= self.watermark / GRANULARITY + 1, "chain cycle");
        }
        Ok(out)
    }

    /// Blocks of the chain headed at `start`, with capacities recovered from
    /// the metadata slot positions.
    pub fn chain_blocks(&self, start: usize) -> Result<Vec<Block>, ArenaError> {
        Ok(self
            .scan_chain(start)?
            .iter()
            .map(|b| Block {
                start: b.start,
                capacity: b.meta - b.start + 1,
            })
            .collect())
    }

    pub fn write_list(&mut self, b: &Block, elems: &[u64]) -> Result<(), ArenaError> {
        let payload = b.capacity - 1;
        if elems.len() > payload {
            return Err(ArenaError::Overflow {
                len: elems.len(),
                payload,
            });
        }
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        for (i, &e) in elems.iter().enumerate() {
            self.slots[b.start + i] = e as i64;
        }
        self.slots[b.start + elems.len()..b.start + payload].fill(EMPTY_SENTINEL);
        Ok(())
    }

    pub fn chain_block(&mut self, b: &Block, next: &Block) -> Result<(), ArenaError> {
        let meta = b.start + b.capacity - 1;
        if self.slots[meta] != END_SENTINEL {
            return Err(ArenaError::AlreadyChained { start: b.start });
        }
        self.slots[meta] = encode_pointer(next.start);
        Ok(())
    }

    pub fn read_list(&self, start: usize) -> Result<Vec<u64>, ArenaError> {
        let mut out = Vec::new();
        for b in self.scan_chain(start)? {
            out.extend(self.slots[b.start..b.elem_end].iter().map(|&v| v as u64));
        }
        Ok(out)
    }

    pub fn list_len(&self, start: usize) -> Result<usize, ArenaError> {
        Ok(self.scan_chain(start)?.iter().map(|b| b.len()).sum())
    }

    /// Remove `e` if present. Shifts subsequent elements left within the
    /// element's own block only; the freed slot becomes EMPTY. Returns whether
    /// a removal happened.
    pub fn remove_element(&mut self, start: usize, e: u64) -> Result<bool, ArenaError> {
        let code = e as i64;
        for b in self.scan_chain(start)? {
            let elems = &self.slots[b.start..b.elem_end];
            if let Ok(pos) = elems.binary_search(&code) {
                let at = b.start + pos;
                self.slots.copy_within(at + 1..b.elem_end, at);
                self.slots[b.elem_end - 1] = EMPTY_SENTINEL;
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Insert `e` (absent, by caller contract) keeping the chain's element
    /// sequence sorted. Fast path shifts within the block where `e` belongs;
    /// if that block is full the chain is repacked left-compacted to use any
    /// free slot. NeedsBlock is returned only when the whole chain is full.
    pub fn insert_element(&mut self, start: usize, e: u64) -> Result<InsertOutcome, ArenaError> {
        let code = e as i64;
        let chain = self.scan_chain(start)?;

        // Block where e belongs in global order: the last block whose first
        // element is <= e, or the first block.
        let mut target = 0usize;
        for (i, b) in chain.iter().enumerate() {
            if b.len() > 0 && self.slots[b.start] <= code {
                target = i;
            }
        }
        let tb = chain[target];
        debug_assert!(!self.slots[tb.start..tb.elem_end].contains(&code));
        if tb.len() < tb.payload() {
            let pos = match self.slots[tb.start..tb.elem_end].binary_search(&code) {
                Err(p) => tb.start + p,
                Ok(_) => unreachable!("duplicate element"),
            };
            self.slots.copy_within(pos..tb.elem_end, pos + 1);
            self.slots[pos] = code;
            return Ok(InsertOutcome::Inserted);
        }

        let total: usize = chain.iter().map(|b| b.len()).sum();
        let payload: usize = chain.iter().map(|b| b.payload()).sum();
        if total >= payload {
            return Ok(InsertOutcome::NeedsBlock);
        }

        // Target block full but the chain has room elsewhere: repack.
        let mut elems = self.read_list(start)?;
        let pos = elems.binary_search(&e).unwrap_err();
        elems.insert(pos, e);
        let n = self.fill_chain(&chain, &elems);
        debug_assert_eq!(n, elems.len());
        Ok(InsertOutcome::Inserted)
    }

    /// Rewrite the chain headed at `start` with `elems`, left-compacted across
    /// its existing blocks. Returns how many elements were written; the caller
    /// handles any remainder by chaining a fresh block.
    pub fn rewrite_chain(&mut self, start: usize, elems: &[u64]) -> Result<usize, ArenaError> {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        let chain = self.scan_chain(start)?;
        Ok(self.fill_chain(&chain, elems))
    }

    fn fill_chain(&mut self, chain: &[BlockScan], elems: &[u64]) -> usize {
        let mut written = 0usize;
        for b in chain {
            let take = (elems.len() - written).min(b.payload());
            for (i, &e) in elems[written..written + take].iter().enumerate() {
                self.slots[b.start + i] = e as i64;
            }
            self.slots[b.start + take..b.meta].fill(EMPTY_SENTINEL);
            written += take;
        }
        written
    }

    #[cfg(test)]
    fn slot(&self, i: usize) -> i64 {
        self.slots[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn capacity_rounding() {
        assert_eq!(capacity_for(0), 32);
        assert_eq!(capacity_for(1), 32);
        assert_eq!(capacity_for(31), 32);
        assert_eq!(capacity_for(32), 64);
        assert_eq!(capacity_for(100), 128);
        assert_eq!(capacity_for(1000), 1024);
    }

    #[test]
    fn alloc_batch_prefix_sum_starts() {
        let mut a = FlatArena::new(1024);
        let blocks = a.alloc_batch(&[5, 40, 5]).unwrap();
        assert_eq!(blocks[0], Block { start: 0, capacity: 32 });
        assert_eq!(blocks[1], Block { start: 32, capacity: 64 });
        assert_eq!(blocks[2], Block { start: 96, capacity: 32 });
        assert_eq!(a.watermark(), 128);
    }

    #[test]
    fn alloc_batch_all_or_nothing() {
        let mut a = FlatArena::new(64);
        let err = a.alloc_batch(&[5, 40]).unwrap_err();
        assert!(matches!(err, ArenaError::ArenaExhausted { needed: 96, .. }));
        assert_eq!(a.watermark(), 0);
        assert!(a.alloc_batch(&[]).unwrap().is_empty());
    }

    #[test]
    fn write_and_layout() {
        let mut a = FlatArena::new(64);
        let b = a.alloc_block(3).unwrap();
        a.write_list(&b, &[3, 7, 9]).unwrap();
        assert_eq!(a.slot(0), 3);
        assert_eq!(a.slot(1), 7);
        assert_eq!(a.slot(2), 9);
        assert_eq!(a.slot(3), EMPTY_SENTINEL);
        assert_eq!(a.slot(31), END_SENTINEL);
        assert_eq!(a.read_list(0).unwrap(), vec![3, 7, 9]);
    }

    #[test]
    fn write_overflow() {
        let mut a = FlatArena::new(64);
        let b = a.alloc_block(3).unwrap();
        let too_many: Vec<u64> = (0..32).collect();
        assert_eq!(
            a.write_list(&b, &too_many),
            Err(ArenaError::Overflow { len: 32, payload: 31 })
        );
    }

    #[test]
    fn empty_list_reads_empty() {
        let mut a = FlatArena::new(32);
        let b = a.alloc_block(0).unwrap();
        a.write_list(&b, &[]).unwrap();
        assert_eq!(a.read_list(0).unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn chain_encoding_and_traversal() {
        let mut a = FlatArena::new(256);
        let b1 = a.alloc_block(5).unwrap();
        let b2 = a.alloc_block(40).unwrap();
        assert_eq!(b2.start, 32);
        a.chain_block(&b1, &b2).unwrap();
        assert_eq!(a.slot(31), -35); // -(32) - 3
        assert_eq!(a.chain_block(&b1, &b2), Err(ArenaError::AlreadyChained { start: 0 }));

        let first: Vec<u64> = (0..31).collect();
        let second: Vec<u64> = (31..40).collect();
        a.write_list(&b1, &first).unwrap();
        a.write_list(&b2, &second).unwrap();
        let all: Vec<u64> = (0..40).collect();
        assert_eq!(a.read_list(0).unwrap(), all);
    }

    #[test]
    fn remove_shifts_within_block() {
        let mut a = FlatArena::new(32);
        let b = a.alloc_block(3).unwrap();
        a.write_list(&b, &[3, 7, 9]).unwrap();
        assert!(a.remove_element(0, 7).unwrap());
        assert_eq!(a.slot(0), 3);
        assert_eq!(a.slot(1), 9);
        assert_eq!(a.slot(2), EMPTY_SENTINEL);
        assert!(!a.remove_element(0, 5).unwrap());
        assert_eq!(a.read_list(0).unwrap(), vec![3, 9]);
    }

    #[test]
    fn remove_from_chained_block_leaves_hole_before_pointer() {
        let mut a = FlatArena::new(128);
        let b1 = a.alloc_block(31).unwrap();
        let b2 = a.alloc_block(9).unwrap();
        let first: Vec<u64> = (0..31).collect();
        let second: Vec<u64> = (31..40).collect();
        a.write_list(&b1, &first).unwrap();
        a.write_list(&b2, &second).unwrap();
        a.chain_block(&b1, &b2).unwrap();

        assert!(a.remove_element(0, 2).unwrap());
        // 30 payload elements, then a hole right before the chain pointer
        assert_eq!(a.slot(29), 30);
        assert_eq!(a.slot(30), EMPTY_SENTINEL);
        assert!(a.slot(31) <= -3);
        let want: Vec<u64> = (0..40).filter(|&x| x != 2).collect();
        assert_eq!(a.read_list(0).unwrap(), want);
        assert_eq!(a.read_list(0).unwrap().len(), 39);
    }

    #[test]
    fn insert_in_place_and_needs_block() {
        let mut a = FlatArena::new(128);
        let b = a.alloc_block(2).unwrap();
        a.write_list(&b, &[3, 9]).unwrap();
        assert!(matches!(a.insert_element(0, 7).unwrap(), InsertOutcome::Inserted));
        assert_eq!(a.read_list(0).unwrap(), vec![3, 7, 9]);

        let full: Vec<u64> = (100..131).collect();
        a.rewrite_chain(0, &full).unwrap();
        assert!(matches!(a.insert_element(0, 50).unwrap(), InsertOutcome::NeedsBlock));

        let b2 = a.alloc_block(1).unwrap();
        a.chain_block(&b, &b2).unwrap();
        assert!(matches!(a.insert_element(0, 50).unwrap(), InsertOutcome::Inserted));
        let got = a.read_list(0).unwrap();
        assert_eq!(got.len(), 32);
        let mut want: Vec<u64> = (100..131).collect();
        want.insert(0, 50);
        assert_eq!(got, want);
    }

    #[test]
    fn insert_repacks_when_target_block_full_but_chain_has_room() {
        let mut a = FlatArena::new(128);
        let b1 = a.alloc_block(31).unwrap();
        let b2 = a.alloc_block(1).unwrap();
        a.chain_block(&b1, &b2).unwrap();
        // first block full with evens, second block has one element
        let evens: Vec<u64> = (0..31).map(|x| x * 2).collect();
        a.write_list(&b1, &evens).unwrap();
        a.write_list(&b2, &[100]).unwrap();
        // 5 belongs in the (full) first block; repack must spill into block 2
        assert!(matches!(a.insert_element(0, 5).unwrap(), InsertOutcome::Inserted));
        let mut want = evens.clone();
        want.push(100);
        want.insert(3, 5);
        want.sort_unstable();
        assert_eq!(a.read_list(0).unwrap(), want);
    }

    /// Model-based test: arbitrary op sequences against a Vec reference.
    #[test]
    fn model_equivalence() {
        proptest!(ProptestConfig::with_cases(256), |(ops in prop::collection::vec((0u8..3, 0u64..64), 1..120))| {
            let mut arena = FlatArena::new(4096);
            let head = arena.alloc_block(0).unwrap();
            let mut tail = head;
            let mut model: Vec<u64> = Vec::new();
            for (kind, v) in ops {
                match kind {
                    0 | 2 => {
                        if model.contains(&v) {
                            continue;
                        }
                        match arena.insert_element(head.start, v).unwrap() {
                            InsertOutcome::Inserted => {}
                            InsertOutcome::NeedsBlock => {
                                let fresh = arena.alloc_block(0).unwrap();
                                arena.chain_block(&tail, &fresh).unwrap();
                                tail = fresh;
                                prop_assert!(matches!(
                                    arena.insert_element(head.start, v).unwrap(),
                                    InsertOutcome::Inserted
                                ));
                            }
                        }
                        let pos = model.binary_search(&v).unwrap_err();
                        model.insert(pos, v);
                    }
                    _ => {
                        let removed = arena.remove_element(head.start, v).unwrap();
                        prop_assert_eq!(removed, model.contains(&v));
                        model.retain(|&x| x != v);
                    }
                }
                prop_assert_eq!(arena.read_list(head.start).unwrap(), model.clone());
            }
        });
    }
}
