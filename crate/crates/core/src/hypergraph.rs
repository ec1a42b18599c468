//! Dual-view dynamic hypergraph: h2v (vertex list per hyperedge) and v2h
//! (hyperedge list per vertex), each a flat arena plus a manager tree.
//!
//! Hyperedges are addressed externally by caller-chosen IDs; internally the
//! h2v manager keys on compact internal IDs that get reused when deleted
//! edges' blocks are reassigned, with an external<->internal map keeping the
//! reuse invisible. Vertex IDs are stable and key the v2h side directly; v2h
//! lists store external hyperedge IDs. A vertex stays registered (possibly
//! with an empty list) once seen, so the vertex universe only grows.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::block_manager::{ManagerError, ManagerTree};
use crate::block_store::{capacity_for, ArenaError, FlatArena, InsertOutcome, GRANULARITY};

#[derive(Debug, Error)]
pub enum HgError {
    #[error("hyperedge {0} not found")]
    NotFound(u64),
    #[error("hyperedge {0} already live")]
    DuplicateEdge(u64),
    #[error("duplicate external id {0} in batch")]
    DuplicateInBatch(u64),
    #[error("vertex {vertex} not in hyperedge {edge}")]
    PairNotFound { edge: u64, vertex: u64 },
    #[error("vertex {vertex} already in hyperedge {edge}")]
    DuplicatePair { edge: u64, vertex: u64 },
    #[error("(edge {edge}, vertex {vertex}) appears twice in one batch")]
    PairRepeated { edge: u64, vertex: u64 },
    #[error("hyperedge {0} has an empty vertex set")]
    EmptyEdge(u64),
    #[error("vertex id {0} exceeds the storable range")]
    VertexIdTooLarge(u64),
    #[error("external id {0} is reserved")]
    ReservedId(u64),
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Manager(#[from] ManagerError),
}

/// One batch of structural changes. Deletes apply first, then whole-edge
/// inserts, then incident-vertex modifications.
#[derive(Debug, Clone, Default)]
pub struct ChangeBatch {
    pub deletes: Vec<u64>,
    pub inserts: Vec<EdgeSpec>,
    pub vertex_inserts: Vec<(u64, u64)>,
    pub vertex_deletes: Vec<(u64, u64)>,
}

impl ChangeBatch {
    pub fn is_empty(&self) -> bool {
        self.deletes.is_empty()
            && self.inserts.is_empty()
            && self.vertex_inserts.is_empty()
            && self.vertex_deletes.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub external_id: u64,
    pub vertices: Vec<u64>,
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, Copy)]
pub struct HypergraphConfig {
    /// Arenas are sized to this multiple of demand; growth is stop-the-world.
    pub overprovision: f64,
}

impl Default for HypergraphConfig {
    fn default() -> Self {
        HypergraphConfig { overprovision: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stats {
    pub edges: usize,
    pub vertices: usize,
    pub max_cardinality: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct StorageStats {
    pub h2v_slots: usize,
    pub h2v_watermark: usize,
    pub v2h_slots: usize,
    pub v2h_watermark: usize,
    pub free_edge_nodes: usize,
}

const MAX_STORABLE: u64 = i64::MAX as u64;

#[derive(Debug)]
pub struct DynHypergraph {
    h2v_arena: FlatArena,
    h2v_mgr: ManagerTree,
    v2h_arena: FlatArena,
    v2h_mgr: ManagerTree,
    ext2int: HashMap<u64, u64>,
    int2ext: HashMap<u64, u64>,
    timestamps: HashMap<u64, i64>,
    next_internal: u64,
    max_external_seen: u64,
    max_timestamp_seen: i64,
    max_cardinality: usize,
    overprovision: f64,
}

impl DynHypergraph {
    pub fn new(config: HypergraphConfig) -> Self {
        DynHypergraph {
            h2v_arena: FlatArena::new(0),
            h2v_mgr: ManagerTree::build(&[]),
            v2h_arena: FlatArena::new(0),
            v2h_mgr: ManagerTree::build(&[]),
            ext2int: HashMap::new(),
            int2ext: HashMap::new(),
            timestamps: HashMap::new(),
            next_internal: 0,
            max_external_seen: 0,
            max_timestamp_seen: 0,
            max_cardinality: 0,
            overprovision: config.overprovision.max(1.0),
        }
    }

    /// Bulk construction: both arenas laid out contiguously in id order.
    pub fn init(edges: Vec<EdgeSpec>, config: HypergraphConfig) -> Result<Self, HgError> {
        let mut g = DynHypergraph::new(config);
        let specs = g.validate_fresh(edges)?;

        let h2v_demand: usize = specs.iter().map(|s| capacity_for(s.vertices.len())).sum();
        let mut by_vertex: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for s in &specs {
            for &v in &s.vertices {
                by_vertex.entry(v).or_default().push(s.external_id);
            }
        }
        let v2h_demand: usize = by_vertex.values().map(|l| capacity_for(l.len())).sum();

        g.h2v_arena = FlatArena::new(g.provisioned(h2v_demand));
        g.v2h_arena = FlatArena::new(g.provisioned(v2h_demand));

        let cards: Vec<usize> = specs.iter().map(|s| s.vertices.len()).collect();
        let blocks = g.h2v_arena.alloc_batch(&cards)?;
        let mut entries = Vec::with_capacity(specs.len());
        for (s, b) in specs.iter().zip(&blocks) {
            let internal = g.next_internal;
            g.next_internal += 1;
            g.h2v_arena.write_list(b, &s.vertices)?;
            entries.push((internal, b.start));
            g.register(s, internal);
        }
        g.h2v_mgr = ManagerTree::build(&entries);

        let degs: Vec<usize> = by_vertex.values().map(|l| l.len()).collect();
        let vblocks = g.v2h_arena.alloc_batch(&degs)?;
        let mut ventries = Vec::with_capacity(by_vertex.len());
        for ((v, mut exts), b) in by_vertex.into_iter().zip(&vblocks) {
            exts.sort_unstable();
            g.v2h_arena.write_list(b, &exts)?;
            ventries.push((v, b.start));
        }
        g.v2h_mgr = ManagerTree::build(&ventries);
        Ok(g)
    }

    fn provisioned(&self, demand: usize) -> usize {
        (((demand.max(GRANULARITY)) as f64) * self.overprovision).ceil() as usize
    }

    fn register(&mut self, s: &EdgeSpec, internal: u64) {
        self.ext2int.insert(s.external_id, internal);
        self.int2ext.insert(internal, s.external_id);
        if let Some(t) = s.timestamp {
            self.timestamps.insert(s.external_id, t);
            self.max_timestamp_seen = self.max_timestamp_seen.max(t);
        }
        self.max_external_seen = self.max_external_seen.max(s.external_id);
        self.max_cardinality = self.max_cardinality.max(s.vertices.len());
    }

    /// Normalize (sort/dedup) and validate a batch of new edges.
    fn validate_fresh(&self, edges: Vec<EdgeSpec>) -> Result<Vec<EdgeSpec>, HgError> {
        let mut seen = HashMap::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for mut s in edges {
            if s.external_id == u64::MAX {
                return Err(HgError::ReservedId(s.external_id));
            }
            if self.ext2int.contains_key(&s.external_id) {
                return Err(HgError::DuplicateEdge(s.external_id));
            }
            if seen.insert(s.external_id, ()).is_some() {
                return Err(HgError::DuplicateInBatch(s.external_id));
            }
            s.vertices.sort_unstable();
            s.vertices.dedup();
            if s.vertices.is_empty() {
                return Err(HgError::EmptyEdge(s.external_id));
            }
            if let Some(&v) = s.vertices.last() {
                if v >= MAX_STORABLE {
                    return Err(HgError::VertexIdTooLarge(v));
                }
            }
            out.push(s);
        }
        Ok(out)
    }

    pub fn stats(&self) -> Stats {
        Stats {
            edges: self.ext2int.len(),
            vertices: self.v2h_mgr.len(),
            max_cardinality: self.max_cardinality,
        }
    }

    pub fn storage_stats(&self) -> StorageStats {
        StorageStats {
            h2v_slots: self.h2v_arena.total_capacity(),
            h2v_watermark: self.h2v_arena.watermark(),
            v2h_slots: self.v2h_arena.total_capacity(),
            v2h_watermark: self.v2h_arena.watermark(),
            free_edge_nodes: self.h2v_mgr.root_avail(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.ext2int.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.v2h_mgr.len()
    }

    pub fn free_edge_nodes(&self) -> usize {
        self.h2v_mgr.root_avail()
    }

    pub fn contains_edge(&self, external: u64) -> bool {
        self.ext2int.contains_key(&external)
    }

    pub fn live_edges(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.ext2int.keys().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn timestamp(&self, external: u64) -> Option<i64> {
        self.timestamps.get(&external).copied()
    }

    pub fn all_timestamped(&self) -> bool {
        self.timestamps.len() == self.ext2int.len()
    }

    pub fn next_fresh_external(&self) -> u64 {
        self.max_external_seen + 1
    }

    pub fn next_timestamp(&self) -> i64 {
        self.max_timestamp_seen + 1
    }

    pub fn incident_vertices(&self, external: u64) -> Result<Vec<u64>, HgError> {
        let &internal = self
            .ext2int
            .get(&external)
            .ok_or(HgError::NotFound(external))?;
        let h = self.h2v_mgr.search(internal)?;
        Ok(self.h2v_arena.read_list(self.h2v_mgr.node(h).start)?)
    }

    pub fn cardinality(&self, external: u64) -> Result<usize, HgError> {
        let &internal = self
            .ext2int
            .get(&external)
            .ok_or(HgError::NotFound(external))?;
        let h = self.h2v_mgr.search(internal)?;
        Ok(self.h2v_arena.list_len(self.h2v_mgr.node(h).start)?)
    }

    /// External ids of edges containing `v`; an unknown vertex has none.
    pub fn incident_hyperedges(&self, v: u64) -> Result<Vec<u64>, HgError> {
        match self.v2h_mgr.search(v) {
            Ok(h) => Ok(self.v2h_arena.read_list(self.v2h_mgr.node(h).start)?),
            Err(ManagerError::NotFound(_)) => Ok(Vec::new()),
            Err(e) => Err(e.into()),
        }
    }

    /// Edges sharing at least one vertex with `external` (the line-graph
    /// neighborhood, computed on demand).
    pub fn neighbor_hyperedges(&self, external: u64) -> Result<Vec<u64>, HgError> {
        let verts = self.incident_vertices(external)?;
        let mut out = Vec::new();
        for v in verts {
            out.extend(self.incident_hyperedges(v)?);
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|&e| e != external);
        Ok(out)
    }

    /// All registered vertices (degree 0 included), ascending.
    pub fn vertices(&self) -> Vec<u64> {
        self.v2h_mgr.live_entries().iter().map(|&(v, _)| v).collect()
    }

    pub fn apply(&mut self, batch: &ChangeBatch) -> Result<(), HgError> {
        if !batch.deletes.is_empty() {
            self.delete_hyperedges(&batch.deletes)?;
        }
        if !batch.inserts.is_empty() {
            self.insert_hyperedges(batch.inserts.clone())?;
        }
        if !batch.vertex_inserts.is_empty() || !batch.vertex_deletes.is_empty() {
            self.modify_incident_vertices(&batch.vertex_inserts, &batch.vertex_deletes)?;
        }
        Ok(())
    }

    /// Vertical deletion: free the h2v nodes (blocks kept, unscrubbed) and
    /// strip the edges out of every incident vertex's v2h list.
    pub fn delete_hyperedges(&mut self, dels: &[u64]) -> Result<(), HgError> {
        let mut internals = Vec::with_capacity(dels.len());
        let mut seen = HashMap::with_capacity(dels.len());
        for &ext in dels {
            let &internal = self.ext2int.get(&ext).ok_or(HgError::NotFound(ext))?;
            if seen.insert(ext, ()).is_some() {
                return Err(HgError::NotFound(ext));
            }
            internals.push(internal);
        }

        // Group v2h removals by vertex before mutating anything.
        let mut by_vertex: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &ext in dels {
            for v in self.incident_vertices(ext)? {
                by_vertex.entry(v).or_default().push(ext);
            }
        }

        self.h2v_mgr.mark_deleted(&internals)?;

        for (v, exts) in by_vertex {
            let h = self
                .v2h_mgr
                .search(v)
                .expect("duality: incident vertex must be registered");
            let start = self.v2h_mgr.node(h).start;
            for ext in exts {
                let removed = self.v2h_arena.remove_element(start, ext)?;
                debug_assert!(removed, "duality: edge {ext} missing from v2h of {v}");
            }
        }

        for &ext in dels {
            let internal = self.ext2int.remove(&ext).unwrap();
            self.int2ext.remove(&internal);
            self.timestamps.remove(&ext);
        }
        Ok(())
    }

    /// Vertical insertion, three cases: reuse freed nodes in rank order
    /// (chaining fresh blocks when the reused chain is too small), then fresh
    /// allocation plus a manager rebuild for whatever exceeds the free pool.
    pub fn insert_hyperedges(&mut self, ins: Vec<EdgeSpec>) -> Result<(), HgError> {
        let specs = self.validate_fresh(ins)?;
        if specs.is_empty() {
            return Ok(());
        }

        let h2v_bound: usize = specs.iter().map(|s| capacity_for(s.vertices.len())).sum();
        self.ensure_h2v(h2v_bound)?;

        let mut by_vertex: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for s in &specs {
            for &v in &s.vertices {
                by_vertex.entry(v).or_default().push(s.external_id);
            }
        }
        let mut v2h_bound = 0usize;
        for (&v, exts) in &by_vertex {
            v2h_bound += match self.v2h_mgr.search(v) {
                Ok(_) => GRANULARITY * exts.len(),
                Err(_) => capacity_for(exts.len()),
            };
        }
        self.ensure_v2h(v2h_bound)?;

        let free = self.h2v_mgr.root_avail();
        let reuse = free.min(specs.len());

        // Case 1: claim ranks 1..=reuse first (read-only descents land on
        // disjoint nodes), then reassign and overwrite each freed chain.
        let handles: Vec<_> = (1..=reuse)
            .map(|k| self.h2v_mgr.find_kth_available(k))
            .collect::<Result<_, _>>()?;
        for (s, h) in specs.iter().zip(handles) {
            let (internal, start) = self.h2v_mgr.reassign(h)?;
            let written = self.h2v_arena.rewrite_chain(start, &s.vertices)?;
            if written < s.vertices.len() {
                // Case 2: spill the remainder into one fresh chained block
                // sized by the full cardinality.
                let spill = self.h2v_arena.alloc_block(s.vertices.len())?;
                self.h2v_arena.write_list(&spill, &s.vertices[written..])?;
                let last = *self
                    .h2v_arena
                    .chain_blocks(start)?
                    .last()
                    .expect("chain has at least one block");
                self.h2v_arena.chain_block(&last, &spill)?;
            }
            self.register(s, internal);
        }

        // Case 3: fresh blocks for the rest, then one manager rebuild.
        if reuse < specs.len() {
            let rest = &specs[reuse..];
            let cards: Vec<usize> = rest.iter().map(|s| s.vertices.len()).collect();
            let blocks = self.h2v_arena.alloc_batch(&cards)?;
            let mut extra = Vec::with_capacity(rest.len());
            for (s, b) in rest.iter().zip(&blocks) {
                let internal = self.next_internal;
                self.next_internal += 1;
                self.h2v_arena.write_list(b, &s.vertices)?;
                extra.push((internal, b.start));
                self.register(s, internal);
            }
            self.h2v_mgr = self.h2v_mgr.rebuild(&extra);
        }

        self.add_v2h_incidences(by_vertex)?;
        Ok(())
    }

    /// Horizontal modification: per-edge vertex removals and additions, with
    /// the mirrored per-vertex updates on the v2h side.
    pub fn modify_incident_vertices(
        &mut self,
        vertex_inserts: &[(u64, u64)],
        vertex_deletes: &[(u64, u64)],
    ) -> Result<(), HgError> {
        let mut pair_seen: HashMap<(u64, u64), ()> = HashMap::new();
        for &(e, v) in vertex_inserts.iter().chain(vertex_deletes) {
            if pair_seen.insert((e, v), ()).is_some() {
                return Err(HgError::PairRepeated { edge: e, vertex: v });
            }
        }

        // Validate against current lists before mutating.
        let mut edge_cache: HashMap<u64, Vec<u64>> = HashMap::new();
        for &(e, v) in vertex_inserts {
            if v >= MAX_STORABLE {
                return Err(HgError::VertexIdTooLarge(v));
            }
            let list = match edge_cache.entry(e) {
                std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::hash_map::Entry::Vacant(slot) => {
                    let list = self.incident_vertices(e)?;
                    slot.insert(list)
                }
            };
            if list.binary_search(&v).is_ok() {
                return Err(HgError::DuplicatePair { edge: e, vertex: v });
            }
        }
        for &(e, v) in vertex_deletes {
            let list = match edge_cache.entry(e) {
                std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                std::collections::hash_map::Entry::Vacant(slot) => {
                    let list = self.incident_vertices(e)?;
                    slot.insert(list)
                }
            };
            if list.binary_search(&v).is_err() {
                return Err(HgError::PairNotFound { edge: e, vertex: v });
            }
        }

        self.ensure_h2v(GRANULARITY * vertex_inserts.len())?;
        let mut v2h_bound = 0usize;
        let mut new_vertex_adds: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &(e, v) in vertex_inserts {
            match self.v2h_mgr.search(v) {
                Ok(_) => v2h_bound += GRANULARITY,
                Err(_) => {
                    new_vertex_adds.entry(v).or_default().push(e);
                }
            }
        }
        v2h_bound += new_vertex_adds
            .values()
            .map(|l| capacity_for(l.len()))
            .sum::<usize>();
        self.ensure_v2h(v2h_bound)?;

        // h2v side, grouped by edge: removals then additions.
        let mut by_edge: BTreeMap<u64, (Vec<u64>, Vec<u64>)> = BTreeMap::new();
        for &(e, v) in vertex_deletes {
            by_edge.entry(e).or_default().0.push(v);
        }
        for &(e, v) in vertex_inserts {
            by_edge.entry(e).or_default().1.push(v);
        }
        for (&e, (removals, additions)) in &by_edge {
            let internal = self.ext2int[&e];
            let h = self.h2v_mgr.search(internal)?;
            let start = self.h2v_mgr.node(h).start;
            for &v in removals {
                let removed = self.h2v_arena.remove_element(start, v)?;
                debug_assert!(removed);
            }
            for &v in additions {
                self.chain_insert(Side::H2v, start, v)?;
            }
            let len = self.h2v_arena.list_len(start)?;
            self.max_cardinality = self.max_cardinality.max(len);
        }

        // v2h side, grouped by vertex.
        let mut by_vertex: BTreeMap<u64, (Vec<u64>, Vec<u64>)> = BTreeMap::new();
        for &(e, v) in vertex_deletes {
            by_vertex.entry(v).or_default().0.push(e);
        }
        for &(e, v) in vertex_inserts {
            if !new_vertex_adds.contains_key(&v) {
                by_vertex.entry(v).or_default().1.push(e);
            }
        }
        for (&v, (removals, additions)) in &by_vertex {
            let h = self
                .v2h_mgr
                .search(v)
                .expect("duality: modified vertex must be registered");
            let start = self.v2h_mgr.node(h).start;
            for &e in removals {
                let removed = self.v2h_arena.remove_element(start, e)?;
                debug_assert!(removed);
            }
            for &e in additions {
                self.chain_insert(Side::V2h, start, e)?;
            }
        }
        self.add_v2h_incidences(new_vertex_adds)?;
        Ok(())
    }

    /// Add external-edge incidences per vertex: existing vertices take
    /// in-chain inserts, brand-new vertices get fresh blocks and one v2h
    /// manager rebuild.
    fn add_v2h_incidences(&mut self, by_vertex: BTreeMap<u64, Vec<u64>>) -> Result<(), HgError> {
        let mut fresh: Vec<(u64, Vec<u64>)> = Vec::new();
        for (v, mut exts) in by_vertex {
            exts.sort_unstable();
            match self.v2h_mgr.search(v) {
                Ok(h) => {
                    let start = self.v2h_mgr.node(h).start;
                    for e in exts {
                        self.chain_insert(Side::V2h, start, e)?;
                    }
                }
                Err(ManagerError::NotFound(_)) => fresh.push((v, exts)),
                Err(e) => return Err(e.into()),
            }
        }
        if !fresh.is_empty() {
            let degs: Vec<usize> = fresh.iter().map(|(_, l)| l.len()).collect();
            let blocks = self.v2h_arena.alloc_batch(&degs)?;
            let mut extra = Vec::with_capacity(fresh.len());
            for ((v, exts), b) in fresh.iter().zip(&blocks) {
                self.v2h_arena.write_list(b, exts)?;
                extra.push((*v, b.start));
            }
            self.v2h_mgr = self.v2h_mgr.rebuild(&extra);
        }
        Ok(())
    }

    /// Sorted insert into a chain, chaining one fresh granule on overflow.
    fn chain_insert(&mut self, side: Side, start: usize, elem: u64) -> Result<(), HgError> {
        let arena = match side {
            Side::H2v => &mut self.h2v_arena,
            Side::V2h => &mut self.v2h_arena,
        };
        match arena.insert_element(start, elem)? {
            InsertOutcome::Inserted => Ok(()),
            InsertOutcome::NeedsBlock => {
                let fresh = arena.alloc_block(1)?;
                let last = *arena
                    .chain_blocks(start)?
                    .last()
                    .expect("chain has at least one block");
                arena.chain_block(&last, &fresh)?;
                match arena.insert_element(start, elem)? {
                    InsertOutcome::Inserted => Ok(()),
                    InsertOutcome::NeedsBlock => unreachable!("fresh block must have room"),
                }
            }
        }
    }

    fn ensure_h2v(&mut self, extra: usize) -> Result<(), HgError> {
        if self.h2v_arena.free_slots() < extra {
            let (arena, mgr) = grow(&self.h2v_arena, &self.h2v_mgr, extra, self.overprovision)?;
            self.h2v_arena = arena;
            self.h2v_mgr = mgr;
        }
        Ok(())
    }

    fn ensure_v2h(&mut self, extra: usize) -> Result<(), HgError> {
        if self.v2h_arena.free_slots() < extra {
            let (arena, mgr) = grow(&self.v2h_arena, &self.v2h_mgr, extra, self.overprovision)?;
            self.v2h_arena = arena;
            self.v2h_mgr = mgr;
        }
        Ok(())
    }

    /// Full duality cross-scan plus sortedness checks; desk-scale only.
    pub fn check_duality(&self) -> Result<(), String> {
        self.h2v_mgr.check()?;
        self.v2h_mgr.check()?;
        for ext in self.live_edges() {
            let verts = self
                .incident_vertices(ext)
                .map_err(|e| format!("read h2v of {ext}: {e}"))?;
            if verts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("h2v list of {ext} not strictly sorted"));
            }
            for v in verts {
                let edges = self
                    .incident_hyperedges(v)
                    .map_err(|e| format!("read v2h of {v}: {e}"))?;
                if edges.binary_search(&ext).is_err() {
                    return Err(format!("edge {ext} missing from v2h list of {v}"));
                }
            }
        }
        for v in self.vertices() {
            let edges = self
                .incident_hyperedges(v)
                .map_err(|e| format!("read v2h of {v}: {e}"))?;
            if edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("v2h list of {v} not strictly sorted"));
            }
            for ext in edges {
                if !self.contains_edge(ext) {
                    return Err(format!("v2h of {v} references dead edge {ext}"));
                }
                let verts = self
                    .incident_vertices(ext)
                    .map_err(|e| format!("read h2v of {ext}: {e}"))?;
                if verts.binary_search(&v).is_err() {
                    return Err(format!("vertex {v} missing from h2v list of {ext}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Side {
    H2v,
    V2h,
}

/// Stop-the-world reallocation: copy live chains into a fresh arena
/// (compacting each into a single block) and rebuild the manager. Freed
/// blocks are reclaimed wholesale.
fn grow(
    arena: &FlatArena,
    mgr: &ManagerTree,
    extra: usize,
    factor: f64,
) -> Result<(FlatArena, ManagerTree), HgError> {
    let entries = mgr.live_entries();
    let mut lists = Vec::with_capacity(entries.len());
    let mut live_demand = 0usize;
    for &(id, start) in &entries {
        let list = arena.read_list(start)?;
        live_demand += capacity_for(list.len());
        lists.push((id, list));
    }
    let target = (((live_demand + extra) as f64 * factor).ceil() as usize)
        .max(arena.total_capacity() * 2)
        .max(GRANULARITY);
    let mut fresh = FlatArena::new(target);
    let ds: Vec<usize> = lists.iter().map(|(_, l)| l.len()).collect();
    let blocks = fresh.alloc_batch(&ds)?;
    let mut new_entries = Vec::with_capacity(lists.len());
    for ((id, list), b) in lists.iter().zip(&blocks) {
        fresh.write_list(b, list)?;
        new_entries.push((*id, b.start));
    }
    Ok((fresh, ManagerTree::build(&new_entries)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: u64, verts: &[u64]) -> EdgeSpec {
        EdgeSpec {
            external_id: id,
            vertices: verts.to_vec(),
            timestamp: None,
        }
    }

    fn small() -> DynHypergraph {
        // four hyperedges over seven vertices, edge 4 a subset of edge 1
        DynHypergraph::init(
            vec![
                spec(1, &[1, 2, 3]),
                spec(2, &[3, 4, 5]),
                spec(3, &[5, 6, 7]),
                spec(4, &[1, 2]),
            ],
            HypergraphConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn init_counts_and_duality() {
        let g = small();
        assert_eq!(g.stats(), Stats { edges: 4, vertices: 7, max_cardinality: 3 });
        g.check_duality().unwrap();
        assert_eq!(g.incident_vertices(1).unwrap(), vec![1, 2, 3]);
        assert_eq!(g.incident_hyperedges(3).unwrap(), vec![1, 2]);
        assert_eq!(g.incident_hyperedges(99).unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn single_edge_degrees() {
        let g = DynHypergraph::init(vec![spec(7, &[1, 2, 3])], HypergraphConfig::default()).unwrap();
        for v in [1, 2, 3] {
            assert_eq!(g.incident_hyperedges(v).unwrap(), vec![7]);
        }
        assert_eq!(g.cardinality(7).unwrap(), 3);
    }

    #[test]
    fn neighbors_via_shared_vertices() {
        let g = small();
        assert_eq!(g.neighbor_hyperedges(4).unwrap(), vec![1]);
        assert_eq!(g.neighbor_hyperedges(1).unwrap(), vec![2, 4]);
        assert_eq!(g.neighbor_hyperedges(3).unwrap(), vec![2]);
    }

    #[test]
    fn delete_only_edge_leaves_degree_zero() {
        let mut g =
            DynHypergraph::init(vec![spec(1, &[1, 2, 3])], HypergraphConfig::default()).unwrap();
        g.delete_hyperedges(&[1]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.vertex_count(), 3);
        for v in [1, 2, 3] {
            assert_eq!(g.incident_hyperedges(v).unwrap(), Vec::<u64>::new());
        }
        assert!(matches!(g.incident_vertices(1), Err(HgError::NotFound(1))));
        g.check_duality().unwrap();
    }

    #[test]
    fn delete_batch_frees_nodes() {
        let edges: Vec<EdgeSpec> = (1..=15).map(|i| spec(i, &[i, i + 100])).collect();
        let mut g = DynHypergraph::init(edges, HypergraphConfig::default()).unwrap();
        g.delete_hyperedges(&[1, 5, 6, 10]).unwrap();
        assert_eq!(g.free_edge_nodes(), 4);
        assert_eq!(g.edge_count(), 11);
        g.check_duality().unwrap();
        assert!(matches!(
            g.delete_hyperedges(&[5]),
            Err(HgError::NotFound(5))
        ));
    }

    #[test]
    fn insert_reuses_freed_nodes_exactly() {
        let edges: Vec<EdgeSpec> = (1..=8).map(|i| spec(i, &[i, i + 100])).collect();
        let mut g = DynHypergraph::init(edges, HypergraphConfig::default()).unwrap();
        g.delete_hyperedges(&[2, 3, 5, 7]).unwrap();
        assert_eq!(g.free_edge_nodes(), 4);
        let fresh: Vec<EdgeSpec> = (21..=24).map(|i| spec(i, &[i, i + 100])).collect();
        g.insert_hyperedges(fresh).unwrap();
        assert_eq!(g.free_edge_nodes(), 0);
        assert_eq!(g.edge_count(), 8);
        g.check_duality().unwrap();
        for i in 21..=24u64 {
            assert_eq!(g.incident_vertices(i).unwrap(), vec![i, i + 100]);
        }
    }

    #[test]
    fn case2_spill_chains_reused_block() {
        let mut g = DynHypergraph::init(
            vec![spec(1, &[1, 2, 3]), spec(2, &[4, 5])],
            HypergraphConfig { overprovision: 8.0 },
        )
        .unwrap();
        g.delete_hyperedges(&[1]).unwrap();
        let before = g.storage_stats().h2v_watermark;
        let big: Vec<u64> = (1000..1100).collect();
        g.insert_hyperedges(vec![spec(9, &big)]).unwrap();
        // reused 32-slot block plus one fresh 128-slot spill block
        assert_eq!(g.storage_stats().h2v_watermark, before + 128);
        assert_eq!(g.incident_vertices(9).unwrap(), big);
        assert_eq!(g.cardinality(9).unwrap(), 100);
        g.check_duality().unwrap();
    }

    #[test]
    fn case3_rebuild_when_free_pool_short() {
        let edges: Vec<EdgeSpec> = (1..=6).map(|i| spec(i, &[i])).collect();
        let mut g = DynHypergraph::init(edges, HypergraphConfig::default()).unwrap();
        g.delete_hyperedges(&[1, 2, 3, 4]).unwrap();
        let fresh: Vec<EdgeSpec> = (11..=16).map(|i| spec(i, &[i, i + 1])).collect();
        g.insert_hyperedges(fresh).unwrap();
        assert_eq!(g.free_edge_nodes(), 0);
        assert_eq!(g.edge_count(), 8);
        g.check_duality().unwrap();
        let mut live = g.live_edges();
        live.sort_unstable();
        assert_eq!(live, vec![5, 6, 11, 12, 13, 14, 15, 16]);
    }

    #[test]
    fn modify_round_trip_and_empty_edge() {
        let mut g = small();
        let before = g.incident_vertices(2).unwrap();
        g.modify_incident_vertices(&[(2, 9)], &[]).unwrap();
        assert_eq!(g.incident_vertices(2).unwrap(), vec![3, 4, 5, 9]);
        assert_eq!(g.incident_hyperedges(9).unwrap(), vec![2]);
        g.modify_incident_vertices(&[], &[(2, 9)]).unwrap();
        assert_eq!(g.incident_vertices(2).unwrap(), before);
        g.check_duality().unwrap();

        // empty an edge horizontally; it stays live at cardinality 0
        g.modify_incident_vertices(&[], &[(4, 1), (4, 2)]).unwrap();
        assert!(g.contains_edge(4));
        assert_eq!(g.cardinality(4).unwrap(), 0);
        assert_eq!(g.neighbor_hyperedges(4).unwrap(), Vec::<u64>::new());
        g.check_duality().unwrap();
    }

    #[test]
    fn modify_rejects_bad_pairs() {
        let mut g = small();
        assert!(matches!(
            g.modify_incident_vertices(&[(1, 2)], &[]),
            Err(HgError::DuplicatePair { edge: 1, vertex: 2 })
        ));
        assert!(matches!(
            g.modify_incident_vertices(&[], &[(1, 9)]),
            Err(HgError::PairNotFound { edge: 1, vertex: 9 })
        ));
        assert!(matches!(
            g.modify_incident_vertices(&[(1, 9), (1, 9)], &[]),
            Err(HgError::PairRepeated { edge: 1, vertex: 9 })
        ));
        assert!(matches!(
            g.modify_incident_vertices(&[(99, 1)], &[]),
            Err(HgError::NotFound(99))
        ));
    }

    #[test]
    fn delete_then_reinsert_restores_queries() {
        let mut g = small();
        let verts1 = g.incident_vertices(1).unwrap();
        let nb1 = g.neighbor_hyperedges(1).unwrap();
        g.delete_hyperedges(&[1]).unwrap();
        g.insert_hyperedges(vec![spec(1, &verts1)]).unwrap();
        assert_eq!(g.incident_vertices(1).unwrap(), verts1);
        assert_eq!(g.neighbor_hyperedges(1).unwrap(), nb1);
        g.check_duality().unwrap();
    }

    #[test]
    fn insert_rejects_live_and_batch_duplicates() {
        let mut g = small();
        assert!(matches!(
            g.insert_hyperedges(vec![spec(1, &[1])]),
            Err(HgError::DuplicateEdge(1))
        ));
        assert!(matches!(
            g.insert_hyperedges(vec![spec(10, &[1]), spec(10, &[2])]),
            Err(HgError::DuplicateInBatch(10))
        ));
        assert!(matches!(
            g.insert_hyperedges(vec![spec(11, &[])]),
            Err(HgError::EmptyEdge(11))
        ));
    }

    #[test]
    fn growth_preserves_content() {
        let mut g = DynHypergraph::init(
            vec![spec(1, &[1, 2]), spec(2, &[2, 3])],
            HypergraphConfig { overprovision: 1.0 },
        )
        .unwrap();
        // force repeated growth through a stream of inserts
        for i in 3..200u64 {
            g.insert_hyperedges(vec![spec(i, &[i, i + 1, i + 2])]).unwrap();
        }
        assert_eq!(g.edge_count(), 199);
        g.check_duality().unwrap();
        assert_eq!(g.incident_vertices(1).unwrap(), vec![1, 2]);
        assert_eq!(g.incident_vertices(199).unwrap(), vec![199, 200, 201]);
    }

    #[test]
    fn random_churn_keeps_duality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let init: Vec<EdgeSpec> = (1..=40)
            .map(|i| {
                let k = rng.gen_range(1..=5);
                let mut vs: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=20)).collect();
                vs.sort_unstable();
                vs.dedup();
                spec(i, &vs)
            })
            .collect();
        let mut g = DynHypergraph::init(init, HypergraphConfig::default()).unwrap();
        let mut next_ext = 41u64;
        for step in 0..300 {
            let live = g.live_edges();
            match step % 4 {
                0 if live.len() > 5 => {
                    let e = live[rng.gen_range(0..live.len())];
                    g.delete_hyperedges(&[e]).unwrap();
                }
                1 => {
                    let k = rng.gen_range(1..=5);
                    let mut vs: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=25)).collect();
                    vs.sort_unstable();
                    vs.dedup();
                    g.insert_hyperedges(vec![spec(next_ext, &vs)]).unwrap();
                    next_ext += 1;
                }
                2 => {
                    let e = live[rng.gen_range(0..live.len())];
                    let verts = g.incident_vertices(e).unwrap();
                    let v = rng.gen_range(1..=25);
                    if verts.binary_search(&v).is_err() {
                        g.modify_incident_vertices(&[(e, v)], &[]).unwrap();
                    }
                }
                _ => {
                    let e = live[rng.gen_range(0..live.len())];
                    let verts = g.incident_vertices(e).unwrap();
                    if !verts.is_empty() {
                        let v = verts[rng.gen_range(0..verts.len())];
                        g.modify_incident_vertices(&[], &[(e, v)]).unwrap();
                    }
                }
            }
        }
        g.check_duality().unwrap();
    }
}
