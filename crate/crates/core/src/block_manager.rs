//! Array-backed complete BST mapping owner IDs to block starts, with subtree
//! avail counters so freed entries can be found and reassigned by rank.

use rayon::prelude::*;
use thiserror::Error;

/// Sentinel key for pad nodes; compares as +infinity and is never searchable.
const PAD_ID: u64 = u64::MAX;

#[derive(Debug, Clone, Copy)]
pub struct ManagerNode {
    pub edge_id: u64,
    pub start: usize,
    pub avail: usize,
    pub is_free: bool,
}

impl ManagerNode {
    #[inline]
    fn pad() -> Self {
        ManagerNode {
            edge_id: PAD_ID,
            start: usize::MAX,
            avail: 0,
            is_free: false,
        }
    }
    #[inline]
    fn is_pad(&self) -> bool {
        self.edge_id == PAD_ID
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManagerError {
    #[error("id {0} not present")]
    NotFound(u64),
    #[error("id {0} already free (duplicate delete)")]
    AlreadyFree(u64),
    #[error("node is not free")]
    NotFree,
    #[error("rank {k} out of range, {avail} free")]
    RankOutOfRange { k: usize, avail: usize },
}

/// Heap index (1-based) of a node; stable until the next rebuild.
pub type NodeHandle = usize;

/// In-order rank (1-based) of heap index `k` in a perfect tree of height `h`.
/// Bijective on 1..2^h-1; the inverse lets each entry compute its own slot
/// during construction.
#[inline]
pub fn heap_index_to_rank(k: usize, h: u32) -> usize {
    let lg = (usize::BITS - 1 - k.leading_zeros()) as u32;
    (2 * (k - (1 << lg)) + 1) << (h - 1 - lg)
}

/// Inverse of `heap_index_to_rank`.
#[inline]
pub fn rank_to_heap_index(r: usize, h: u32) -> usize {
    let z = r.trailing_zeros();
    let depth = h - 1 - z;
    let j = ((r >> z) - 1) / 2;
    (1usize << depth) + j
}

#[derive(Debug)]
pub struct ManagerTree {
    /// Implicit heap layout, 1-based; slot 0 is an unused pad.
    nodes: Vec<ManagerNode>,
    /// Non-pad node count (free nodes included until a rebuild drops them).
    size: usize,
    height: u32,
}

impl ManagerTree {
    /// Build from entries sorted strictly by id. Entries are padded to the
    /// perfect size 2^h-1; placement is independent per entry via the
    /// rank<->index bijection.
    pub fn build(entries: &[(u64, usize)]) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|e| e.0 != PAD_ID));
        let n = entries.len();
        let height = usize::BITS - n.leading_zeros();
        if n == 0 {
            return ManagerTree {
                nodes: vec![ManagerNode::pad()],
                size: 0,
                height: 0,
            };
        }
        let total = 1usize << height; // slot 0 + 2^h - 1 nodes
        let nodes: Vec<ManagerNode> = (0..total)
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    return ManagerNode::pad();
                }
                let rank = heap_index_to_rank(k, height);
                if rank <= n {
                    let (edge_id, start) = entries[rank - 1];
                    ManagerNode {
                        edge_id,
                        start,
                        avail: 0,
                        is_free: false,
                    }
                } else {
                    ManagerNode::pad()
                }
            })
            .collect();
        ManagerTree {
            nodes,
            size: n,
            height,
        }
    }

    #[inline]
    pub fn node(&self, h: NodeHandle) -> &ManagerNode {
        &self.nodes[h]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn root_avail(&self) -> usize {
        if self.nodes.len() > 1 {
            self.nodes[1].avail
        } else {
            0
        }
    }

    pub fn search(&self, id: u64) -> Result<NodeHandle, ManagerError> {
        let mut k = 1;
        while k < self.nodes.len() {
            let node = &self.nodes[k];
            if !node.is_pad() && node.edge_id == id {
                return Ok(k);
            }
            k = if id < node.edge_id { 2 * k } else { 2 * k + 1 };
        }
        Err(ManagerError::NotFound(id))
    }

    /// Mark a batch of ids free. Validates the whole batch first (NotFound /
    /// AlreadyFree, which also catches duplicates within the batch); on error
    /// nothing is mutated. Avail counters are recomputed children-first up to
    /// the root, each affected node written once.
    pub fn mark_deleted(&mut self, ids: &[u64]) -> Result<(), ManagerError> {
        let handles: Vec<NodeHandle> = ids
            .par_iter()
            .map(|&id| {
                let h = self.search(id)?;
                if self.nodes[h].is_free {
                    Err(ManagerError::AlreadyFree(id))
                } else {
                    Ok(h)
                }
            })
            .collect::<Result<_, _>>()?;
        let mut sorted = handles.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(ManagerError::AlreadyFree(self.nodes[w[0]].edge_id));
            }
        }

        for &h in &handles {
            self.nodes[h].is_free = true;
        }
        self.repropagate(&sorted);
        Ok(())
    }

    /// Recompute avail for the given nodes and every ancestor. Descending
    /// heap order guarantees children are final before their parent.
    fn repropagate(&mut self, affected: &[NodeHandle]) {
        let mut todo: Vec<NodeHandle> = Vec::with_capacity(affected.len() * 4);
        for &h in affected {
            let mut k = h;
            while k >= 1 {
                todo.push(k);
                k /= 2;
            }
        }
        todo.sort_unstable();
        todo.dedup();
        for &k in todo.iter().rev() {
            self.nodes[k].avail = self.avail_of(2 * k)
                + self.avail_of(2 * k + 1)
                + usize::from(self.nodes[k].is_free);
        }
    }

    #[inline]
    fn avail_of(&self, k: usize) -> usize {
        if k < self.nodes.len() {
            self.nodes[k].avail
        } else {
            0
        }
    }

    /// k-th free node in in-order (ascending id) order. Distinct ranks take
    /// disjoint descent outcomes, so a batch of ranks needs no coordination.
    pub fn find_kth_available(&self, k: usize) -> Result<NodeHandle, ManagerError> {
        let avail = self.root_avail();
        if k == 0 || k > avail {
            return Err(ManagerError::RankOutOfRange { k, avail });
        }
        let mut r = k;
        let mut n = 1usize;
        loop {
            debug_assert!(n < self.nodes.len());
            let left = self.avail_of(2 * n);
            if left >= r {
                n *= 2;
                continue;
            }
            r -= left;
            if self.nodes[n].is_free {
                if r == 1 {
                    return Ok(n);
                }
                r -= 1;
            }
            n = 2 * n + 1;
        }
    }

    /// Take a free node back into service. The node keeps its internal id and
    /// start; the caller records the external mapping. Avail decrements along
    /// the ancestor path.
    pub fn reassign(&mut self, h: NodeHandle) -> Result<(u64, usize), ManagerError> {
        if h == 0 || h >= self.nodes.len() || !self.nodes[h].is_free {
            return Err(ManagerError::NotFree);
        }
        self.nodes[h].is_free = false;
        let mut k = h;
        while k >= 1 {
            self.nodes[k].avail -= 1;
            k /= 2;
        }
        Ok((self.nodes[h].edge_id, self.nodes[h].start))
    }

    /// Live (non-free, non-pad) entries in ascending id order.
    pub fn live_entries(&self) -> Vec<(u64, usize)> {
        let mut out: Vec<(u64, usize)> = self
            .nodes
            .iter()
            .skip(1)
            .filter(|n| !n.is_pad() && !n.is_free)
            .map(|n| (n.edge_id, n.start))
            .collect();
        out.sort_unstable();
        out
    }

    /// New tree over live entries plus `extra`; free and pad nodes drop out.
    pub fn rebuild(&self, extra: &[(u64, usize)]) -> ManagerTree {
        let mut entries = self.live_entries();
        entries.extend_from_slice(extra);
        entries.sort_unstable();
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        ManagerTree::build(&entries)
    }

    /// Full-traversal consistency check, used by tests and verify runs.
    pub fn check(&self) -> Result<(), String> {
        let mut last: Option<u64> = None;
        let mut frees = 0usize;
        let mut count = 0usize;
        for r in 1..self.nodes.len() {
            let k = rank_to_heap_index(r, self.height.max(1));
            let n = &self.nodes[k];
            if n.is_pad() {
                continue;
            }
            count += 1;
            if n.is_free {
                frees += 1;
            }
            if let Some(prev) = last {
                if prev >= n.edge_id {
                    return Err(format!("in-order ids not increasing at rank {r}"));
                }
            }
            last = Some(n.edge_id);
        }
        if count != self.size {
            return Err(format!("size {} but {} non-pad nodes", self.size, count));
        }
        for k in 1..self.nodes.len() {
            let want =
                self.avail_of(2 * k) + self.avail_of(2 * k + 1) + usize::from(self.nodes[k].is_free);
            if self.nodes[k].avail != want {
                return Err(format!("avail mismatch at node {k}"));
            }
        }
        if self.root_avail() != frees {
            return Err(format!(
                "root avail {} but {} free nodes",
                self.root_avail(),
                frees
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(ids: impl IntoIterator<Item = u64>) -> Vec<(u64, usize)> {
        ids.into_iter().map(|i| (i, i as usize * 32)).collect()
    }

    fn free_ids(t: &ManagerTree) -> Vec<u64> {
        let mut v: Vec<u64> = (1..t.nodes.len())
            .map(|k| &t.nodes[k])
            .filter(|n| !n.is_pad() && n.is_free)
            .map(|n| n.edge_id)
            .collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn rank_formula_matches_inorder() {
        assert_eq!(heap_index_to_rank(1, 3), 4);
        assert_eq!(heap_index_to_rank(2, 3), 2);
        assert_eq!(heap_index_to_rank(3, 3), 6);
        assert_eq!(heap_index_to_rank(7, 3), 7);
    }

    #[test]
    fn rank_bijection_small_heights() {
        for h in 1..=12u32 {
            let n = (1usize << h) - 1;
            let mut seen = vec![false; n + 1];
            for k in 1..=n {
                let r = heap_index_to_rank(k, h);
                assert!((1..=n).contains(&r));
                assert!(!seen[r], "h={h} k={k} rank {r} duplicated");
                seen[r] = true;
                assert_eq!(rank_to_heap_index(r, h), k);
            }
        }
    }

    #[test]
    fn build_shapes() {
        let t = ManagerTree::build(&entries(1..=7));
        assert_eq!(t.node(1).edge_id, 4);
        t.check().unwrap();

        let t1 = ManagerTree::build(&entries([9]));
        assert_eq!(t1.node(1).edge_id, 9);
        assert_eq!(t1.len(), 1);

        let t5 = ManagerTree::build(&entries([2, 3, 5, 8, 13]));
        assert_eq!(t5.live_entries(), entries([2, 3, 5, 8, 13]));
        t5.check().unwrap();
    }

    #[test]
    fn search_hits_and_misses() {
        let t = ManagerTree::build(&entries(1..=7));
        assert_eq!(t.search(4).unwrap(), 1);
        for id in 1..=7 {
            let h = t.search(id).unwrap();
            assert_eq!(t.node(h).edge_id, id);
        }
        assert_eq!(t.search(9), Err(ManagerError::NotFound(9)));
        assert!(ManagerTree::build(&[]).search(1).is_err());
    }

    #[test]
    fn mark_deleted_avail_propagation() {
        // two leaves under one parent
        let mut t = ManagerTree::build(&entries(1..=7));
        t.mark_deleted(&[1, 3]).unwrap(); // leaves of subtree rooted at id 2
        let parent = t.search(2).unwrap();
        assert_eq!(t.node(parent).avail, 2);
        assert_eq!(t.root_avail(), 2);
        t.check().unwrap();

        let mut t2 = ManagerTree::build(&entries(1..=7));
        t2.mark_deleted(&[4]).unwrap(); // the root
        assert_eq!(t2.root_avail(), 1);
        assert_eq!(t2.node(2).avail, 0);
        assert_eq!(t2.node(3).avail, 0);

        let mut t3 = ManagerTree::build(&entries(1..=15));
        t3.mark_deleted(&[1, 5, 6, 10]).unwrap();
        assert_eq!(t3.root_avail(), 4);
        t3.check().unwrap();
    }

    #[test]
    fn mark_deleted_errors_leave_tree_untouched() {
        let mut t = ManagerTree::build(&entries(1..=7));
        assert_eq!(t.mark_deleted(&[2, 99]), Err(ManagerError::NotFound(99)));
        assert_eq!(t.root_avail(), 0);
        assert_eq!(t.mark_deleted(&[2, 2]), Err(ManagerError::AlreadyFree(2)));
        assert_eq!(t.root_avail(), 0);
        t.mark_deleted(&[2]).unwrap();
        assert_eq!(t.mark_deleted(&[2]), Err(ManagerError::AlreadyFree(2)));
    }

    #[test]
    fn kth_available_in_order() {
        let mut t = ManagerTree::build(&entries(1..=15));
        t.mark_deleted(&[1, 5, 6, 10]).unwrap();
        let ids: Vec<u64> = (1..=4)
            .map(|k| t.node(t.find_kth_available(k).unwrap()).edge_id)
            .collect();
        assert_eq!(ids, vec![1, 5, 6, 10]);
        assert_eq!(
            t.find_kth_available(5),
            Err(ManagerError::RankOutOfRange { k: 5, avail: 4 })
        );
        assert_eq!(t.find_kth_available(0).is_err(), true);
    }

    #[test]
    fn reassign_restores_avail() {
        let mut t = ManagerTree::build(&entries(1..=7));
        t.mark_deleted(&[5]).unwrap();
        let h = t.find_kth_available(1).unwrap();
        let (id, start) = t.reassign(h).unwrap();
        assert_eq!((id, start), (5, 5 * 32));
        assert_eq!(t.root_avail(), 0);
        assert_eq!(t.reassign(h), Err(ManagerError::NotFree));
        t.check().unwrap();

        t.mark_deleted(&[2, 6]).unwrap();
        let h1 = t.find_kth_available(1).unwrap();
        let first = t.reassign(h1).unwrap().0;
        let h2 = t.find_kth_available(1).unwrap();
        let second = t.reassign(h2).unwrap().0;
        assert_eq!((first, second), (2, 6));
        assert!(matches!(
            t.find_kth_available(1),
            Err(ManagerError::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn rebuild_merges_and_drops_free() {
        let t = ManagerTree::build(&entries(1..=7));
        let same = t.rebuild(&[]);
        assert_eq!(same.live_entries(), t.live_entries());

        let grown = t.rebuild(&entries([10, 11, 12]));
        assert_eq!(grown.len(), 10);
        assert_eq!(
            grown.live_entries(),
            entries([1, 2, 3, 4, 5, 6, 7, 10, 11, 12])
        );
        grown.check().unwrap();

        let mut t2 = ManagerTree::build(&entries(1..=7));
        t2.mark_deleted(&[3, 6]).unwrap();
        let rebuilt = t2.rebuild(&entries([8, 9]));
        assert_eq!(rebuilt.len(), 7);
        assert_eq!(rebuilt.live_entries(), entries([1, 2, 4, 5, 7, 8, 9]));
        assert_eq!(rebuilt.root_avail(), 0);
    }

    #[test]
    fn randomized_invariants() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut t = ManagerTree::build(&entries(1..=63));
        let mut live: Vec<u64> = (1..=63).collect();
        let mut free: Vec<u64> = Vec::new();
        for _ in 0..400 {
            if !live.is_empty() && (free.is_empty() || rng.gen_bool(0.5)) {
                let i = rng.gen_range(0..live.len());
                let id = live.swap_remove(i);
                t.mark_deleted(&[id]).unwrap();
                free.push(id);
                free.sort_unstable();
            } else if !free.is_empty() {
                let k = rng.gen_range(1..=free.len());
                let h = t.find_kth_available(k).unwrap();
                let (id, _) = t.reassign(h).unwrap();
                assert_eq!(id, free[k - 1]);
                free.remove(k - 1);
                live.push(id);
            }
            assert_eq!(t.root_avail(), free.len());
        }
        t.check().unwrap();
        assert_eq!(free_ids(&t), free);
    }
}
