//! Static triad counting and classification over sorted vertex sets.
//!
//! Three motif families share one enumeration core: hyperedge triads
//! (connected triples of edges bucketed into 26 Venn classes), incident
//! vertex triads (three mutually exclusive types over vertex triples), and
//! temporal triads (hyperedge triads further gated by a timestamp window).
//! Counting is read-only and parallelizes over outer entities with partial
//! counters reduced at the end, so results are schedule-independent.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::hypergraph::{DynHypergraph, HgError};

pub const NUM_CLASSES: usize = 26;

#[derive(Debug, Error)]
pub enum TriadError {
    #[error("two vertex sets are identical")]
    IdenticalSets,
    #[error("canonical class enumeration produced {found} classes, expected 26")]
    ClassCountMismatch { found: usize },
    #[error("hyperedge {edge} has no timestamp")]
    MissingTimestamps { edge: u64 },
    #[error(transparent)]
    Graph(#[from] HgError),
}

/// Region membership masks in bit order a-only, b-only, c-only, ab, ac, bc,
/// abc; tuple = (in a, in b, in c).
const REGIONS: [(bool, bool, bool); 7] = [
    (true, false, false),
    (false, true, false),
    (false, false, true),
    (true, true, false),
    (true, false, true),
    (false, true, true),
    (true, true, true),
];

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// 7-bit region-nonemptiness pattern; integer order equals lexicographic
/// order of the bit string (a-only is the most significant bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VennPattern(pub u8);

impl VennPattern {
    pub fn from_sets(a: &[u64], b: &[u64], c: &[u64]) -> VennPattern {
        let ab = intersection_size(a, b);
        let ac = intersection_size(a, c);
        let bc = intersection_size(b, c);
        let abc = triple_intersection_size(a, b, c);
        let a_only = a.len() + abc - ab - ac;
        let b_only = b.len() + abc - ab - bc;
        let c_only = c.len() + abc - ac - bc;
        let regions = [
            a_only,
            b_only,
            c_only,
            ab - abc,
            ac - abc,
            bc - abc,
            abc,
        ];
        let mut bits = 0u8;
        for (i, &r) in regions.iter().enumerate() {
            if r > 0 {
                bits |= 1 << (6 - i);
            }
        }
        VennPattern(bits)
    }

    fn region(self, i: usize) -> bool {
        self.0 >> (6 - i) & 1 == 1
    }

    /// Roles after the permutation: new role k is old role perm[k].
    pub fn permuted(self, perm: [usize; 3]) -> VennPattern {
        let pos = |role: usize| perm.iter().position(|&p| p == role).unwrap();
        let mut bits = 0u8;
        for (i, r) in REGIONS.iter().enumerate() {
            let mem = [r.0, r.1, r.2];
            let orig = (mem[pos(0)], mem[pos(1)], mem[pos(2)]);
            let j = REGIONS.iter().position(|&x| x == orig).unwrap();
            if self.region(j) {
                bits |= 1 << (6 - i);
            }
        }
        VennPattern(bits)
    }

    pub fn canonical(self) -> VennPattern {
        PERMS.iter().map(|&p| self.permuted(p)).min().unwrap()
    }

    pub fn pair_nonempty(self, r1: usize, r2: usize) -> bool {
        REGIONS
            .iter()
            .enumerate()
            .any(|(i, r)| [r.0, r.1, r.2][r1] && [r.0, r.1, r.2][r2] && self.region(i))
    }

    fn edge_nonempty(self, role: usize) -> bool {
        REGIONS
            .iter()
            .enumerate()
            .any(|(i, r)| [r.0, r.1, r.2][role] && self.region(i))
    }

    fn forced_equal(self, r1: usize, r2: usize) -> bool {
        !REGIONS
            .iter()
            .enumerate()
            .any(|(i, r)| [r.0, r.1, r.2][r1] != [r.0, r.1, r.2][r2] && self.region(i))
    }

    /// Connected triple: at least two of the three pairwise intersections
    /// are non-empty.
    pub fn connected(self) -> bool {
        let pairs = [(0, 1), (0, 2), (1, 2)];
        pairs.iter().filter(|&&(x, y)| self.pair_nonempty(x, y)).count() >= 2
    }

    pub fn closed(self) -> bool {
        [(0, 1), (0, 2), (1, 2)]
            .iter()
            .all(|&(x, y)| self.pair_nonempty(x, y))
    }
}

#[derive(Debug)]
pub struct TriadClassTable {
    pub canonical_patterns: [VennPattern; NUM_CLASSES],
    class_of: [Option<u8>; 128],
    closed: [bool; NUM_CLASSES],
}

impl TriadClassTable {
    pub fn class_of(&self, p: VennPattern) -> Option<usize> {
        self.class_of[p.0 as usize].map(|c| c as usize)
    }

    pub fn is_closed_class(&self, class: usize) -> bool {
        self.closed[class]
    }
}

/// Enumerate all 128 patterns, keep those realizable by three distinct
/// non-empty connected sets, reduce under the 6 role permutations, and index
/// the canonical forms in lexicographic order.
pub fn build_class_table() -> Result<TriadClassTable, TriadError> {
    let mut canon: Vec<VennPattern> = Vec::new();
    for bits in 0..128u8 {
        let p = VennPattern(bits);
        if !(0..3).all(|r| p.edge_nonempty(r)) {
            continue;
        }
        if [(0, 1), (0, 2), (1, 2)]
            .iter()
            .any(|&(x, y)| p.forced_equal(x, y))
        {
            continue;
        }
        if !p.connected() {
            continue;
        }
        canon.push(p.canonical());
    }
    canon.sort_unstable();
    canon.dedup();
    if canon.len() != NUM_CLASSES {
        return Err(TriadError::ClassCountMismatch { found: canon.len() });
    }

    let mut canonical_patterns = [VennPattern(0); NUM_CLASSES];
    let mut closed = [false; NUM_CLASSES];
    let mut class_of = [None; 128];
    for (i, &c) in canon.iter().enumerate() {
        canonical_patterns[i] = c;
        closed[i] = c.closed();
    }
    for bits in 0..128u8 {
        let p = VennPattern(bits);
        if let Ok(idx) = canon.binary_search(&p.canonical()) {
            class_of[bits as usize] = Some(idx as u8);
        }
    }
    Ok(TriadClassTable {
        canonical_patterns,
        class_of,
        closed,
    })
}

pub fn class_table() -> &'static TriadClassTable {
    static TABLE: OnceLock<TriadClassTable> = OnceLock::new();
    TABLE.get_or_init(|| build_class_table().expect("class enumeration is fixed"))
}

/// Two-pointer sorted intersection, partition-parallel once inputs are long.
pub fn intersect_sorted(a: &[u64], b: &[u64], out: &mut Vec<u64>) {
    out.clear();
    const PAR_THRESHOLD: usize = 1 << 14;
    if a.len().min(b.len()) >= PAR_THRESHOLD {
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let chunks: Vec<&[u64]> = short.chunks(PAR_THRESHOLD / 4).collect();
        let parts: Vec<Vec<u64>> = chunks
            .par_iter()
            .map(|chunk| {
                let lo = long.partition_point(|&x| x < chunk[0]);
                let hi = long.partition_point(|&x| x <= *chunk.last().unwrap());
                let mut part = Vec::new();
                merge_intersect(chunk, &long[lo..hi], &mut part);
                part
            })
            .collect();
        for p in parts {
            out.extend(p);
        }
    } else {
        merge_intersect(a, b, out);
    }
}

fn merge_intersect(a: &[u64], b: &[u64], out: &mut Vec<u64>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

pub fn intersection_size(a: &[u64], b: &[u64]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn triple_intersection_size(a: &[u64], b: &[u64], c: &[u64]) -> usize {
    let (mut i, mut j) = (0, 0);
    let mut n = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if c.binary_search(&a[i]).is_ok() {
                    n += 1;
                }
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Classify one unordered triple of vertex sets. `Ok(None)` means the triple
/// is not a triad (fewer than two non-empty pairwise intersections).
pub fn classify_triple(a: &[u64], b: &[u64], c: &[u64]) -> Result<Option<usize>, TriadError> {
    if a == b || a == c || b == c {
        return Err(TriadError::IdenticalSets);
    }
    let p = VennPattern::from_sets(a, b, c);
    if !p.connected() {
        return Ok(None);
    }
    let class = class_table()
        .class_of(p)
        .expect("connected pattern of distinct non-empty sets is classifiable");
    Ok(Some(class))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeWindow {
    Finite(i64),
    Infinite,
}

impl TimeWindow {
    pub fn admits(self, span: i64) -> bool {
        match self {
            TimeWindow::Finite(w) => span <= w,
            TimeWindow::Infinite => true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TemporalParams {
    pub t_delta: TimeWindow,
}

/// All four counter families in one report shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TriadCounts {
    pub hyperedge_by_class: [u64; NUM_CLASSES],
    pub vertex_by_type: [u64; 3],
    pub temporal_total: u64,
    pub temporal_by_class: [u64; NUM_CLASSES],
}

/// Read-only snapshot of scoped live edges: sorted vertex sets plus
/// scope-filtered line-graph neighborhoods.
struct Snapshot {
    ids: Vec<u64>,
    sets: HashMap<u64, Vec<u64>>,
    neighbors: HashMap<u64, Vec<u64>>,
}

fn snapshot(g: &DynHypergraph, scope: Option<&HashSet<u64>>) -> Result<Snapshot, TriadError> {
    let ids: Vec<u64> = g
        .live_edges()
        .into_iter()
        .filter(|e| scope.map_or(true, |s| s.contains(e)))
        .collect();
    let in_scope: HashSet<u64> = ids.iter().copied().collect();
    let mut sets = HashMap::with_capacity(ids.len());
    let mut neighbors = HashMap::with_capacity(ids.len());
    for &e in &ids {
        sets.insert(e, g.incident_vertices(e)?);
        let mut nb = g.neighbor_hyperedges(e)?;
        nb.retain(|x| in_scope.contains(x));
        neighbors.insert(e, nb);
    }
    Ok(Snapshot { ids, sets, neighbors })
}

fn add26(mut x: [u64; NUM_CLASSES], y: [u64; NUM_CLASSES]) -> [u64; NUM_CLASSES] {
    for i in 0..NUM_CLASSES {
        x[i] += y[i];
    }
    x
}

/// Center-based enumeration: every center pairs its scoped neighbors, so a
/// closed triple is seen from all three centers and an open one only from
/// its middle edge. Raw closed tallies divide by 3 at the end.
fn count_classified<F>(snap: &Snapshot, admit: F) -> [u64; NUM_CLASSES]
where
    F: Fn(u64, u64, u64) -> bool + Sync,
{
    let table = class_table();
    let raw = snap
        .ids
        .par_iter()
        .map(|&c| {
            let mut local = [0u64; NUM_CLASSES];
            let nb = &snap.neighbors[&c];
            let sc = &snap.sets[&c];
            for (i, &x) in nb.iter().enumerate() {
                for &y in &nb[i + 1..] {
                    if !admit(c, x, y) {
                        continue;
                    }
                    match classify_triple(sc, &snap.sets[&x], &snap.sets[&y]) {
                        Ok(Some(class)) => local[class] += 1,
                        Ok(None) | Err(TriadError::IdenticalSets) => {}
                        Err(_) => unreachable!("classification has no other errors"),
                    }
                }
            }
            local
        })
        .reduce(|| [0u64; NUM_CLASSES], add26);
    let mut out = raw;
    for class in 0..NUM_CLASSES {
        if table.is_closed_class(class) {
            debug_assert_eq!(out[class] % 3, 0);
            out[class] /= 3;
        }
    }
    out
}

/// 26-vector of hyperedge triad counts; with a scope only triples entirely
/// inside it count.
pub fn count_hyperedge_triads(
    g: &DynHypergraph,
    scope: Option<&HashSet<u64>>,
) -> Result<[u64; NUM_CLASSES], TriadError> {
    let snap = snapshot(g, scope)?;
    Ok(count_classified(&snap, |_, _, _| true))
}

/// Temporal totals: structural qualification as in the static count, plus
/// max-minus-min timestamp span within the window.
pub fn count_temporal_triads(
    g: &DynHypergraph,
    params: TemporalParams,
    scope: Option<&HashSet<u64>>,
) -> Result<(u64, [u64; NUM_CLASSES]), TriadError> {
    let snap = snapshot(g, scope)?;
    let mut times: HashMap<u64, i64> = HashMap::with_capacity(snap.ids.len());
    for &e in &snap.ids {
        let t = g
            .timestamp(e)
            .ok_or(TriadError::MissingTimestamps { edge: e })?;
        times.insert(e, t);
    }
    let by_class = count_classified(&snap, |a, b, c| {
        let (ta, tb, tc) = (times[&a], times[&b], times[&c]);
        let span = ta.max(tb).max(tc) - ta.min(tb).min(tc);
        params.t_delta.admits(span)
    });
    Ok((by_class.iter().sum(), by_class))
}

/// Support for seed-attributed counting: neighbor lists for the seeds and
/// their 1-hop edges, vertex sets for everything within 2 hops. Every
/// triple containing a seed lives inside `members`.
pub(crate) struct TouchSupport {
    seeds: Vec<u64>,
    seed_set: HashSet<u64>,
    nbrs: HashMap<u64, Vec<u64>>,
    sets: HashMap<u64, Vec<u64>>,
    pub(crate) members: HashSet<u64>,
}

pub(crate) fn touch_support(
    g: &DynHypergraph,
    seeds: &[u64],
) -> Result<TouchSupport, TriadError> {
    let mut seeds: Vec<u64> = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    let seed_set: HashSet<u64> = seeds.iter().copied().collect();

    let seed_lists: Vec<Vec<u64>> = seeds
        .par_iter()
        .map(|&e| g.neighbor_hyperedges(e))
        .collect::<Result<_, _>>()
        .map_err(TriadError::Graph)?;
    let mut nbrs: HashMap<u64, Vec<u64>> = HashMap::with_capacity(seeds.len() * 2);
    let mut hop1: Vec<u64> = Vec::new();
    for (&e, l) in seeds.iter().zip(seed_lists) {
        for &x in &l {
            if !seed_set.contains(&x) {
                hop1.push(x);
            }
        }
        nbrs.insert(e, l);
    }
    hop1.sort_unstable();
    hop1.dedup();

    let hop1_lists: Vec<Vec<u64>> = hop1
        .par_iter()
        .map(|&e| g.neighbor_hyperedges(e))
        .collect::<Result<_, _>>()
        .map_err(TriadError::Graph)?;
    let mut members: HashSet<u64> = seed_set.clone();
    members.extend(&hop1);
    for (&x, l) in hop1.iter().zip(hop1_lists) {
        members.extend(&l);
        nbrs.insert(x, l);
    }

    let member_list: Vec<u64> = members.iter().copied().collect();
    let fetched: Vec<Vec<u64>> = member_list
        .par_iter()
        .map(|&e| g.incident_vertices(e))
        .collect::<Result<_, _>>()
        .map_err(TriadError::Graph)?;
    let sets: HashMap<u64, Vec<u64>> = member_list.into_iter().zip(fetched).collect();

    Ok(TouchSupport {
        seeds,
        seed_set,
        nbrs,
        sets,
        members,
    })
}

/// Classified counts of the triples containing at least one seed, each
/// counted exactly once at its smallest seed. Per seed e the triples split
/// into pairs of e's neighbors (closed, or open through e) and paths
/// e-x-y with y adjacent to x but not to e (open through x).
pub(crate) fn count_touching<F>(s: &TouchSupport, admit: F) -> [u64; NUM_CLASSES]
where
    F: Fn(u64, u64, u64) -> bool + Sync,
{
    s.seeds
        .par_iter()
        .map(|&e| {
            let mut local = [0u64; NUM_CLASSES];
            let ne = &s.nbrs[&e];
            let ne_set: HashSet<u64> = ne.iter().copied().collect();
            let se = &s.sets[&e];
            let owned_elsewhere = |z: u64| s.seed_set.contains(&z) && z < e;
            let tally = |x: u64, y: u64, local: &mut [u64; NUM_CLASSES]| {
                if !admit(e, x, y) {
                    return;
                }
                match classify_triple(se, &s.sets[&x], &s.sets[&y]) {
                    Ok(Some(class)) => local[class] += 1,
                    Ok(None) | Err(TriadError::IdenticalSets) => {}
                    Err(_) => unreachable!("classification has no other errors"),
                }
            };
            for (i, &x) in ne.iter().enumerate() {
                if owned_elsewhere(x) {
                    continue;
                }
                for &y in &ne[i + 1..] {
                    if !owned_elsewhere(y) {
                        tally(x, y, &mut local);
                    }
                }
                for &y in &s.nbrs[&x] {
                    if y != e && !ne_set.contains(&y) && !owned_elsewhere(y) {
                        tally(x, y, &mut local);
                    }
                }
            }
            local
        })
        .reduce(|| [0u64; NUM_CLASSES], add26)
}

/// The four global aggregates the vertex-triad vector derives from.
///
/// pairs/wedges/triangles describe the co-occurrence pair graph (vertices
/// joined when some scoped edge contains both); covered_triples counts
/// distinct vertex triples lying inside a single scoped edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VertexAggregates {
    pub covered_triples: u64,
    pub pairs: u64,
    pub wedges: u64,
    pub triangles: u64,
}

pub fn vertex_aggregates(
    g: &DynHypergraph,
    scope: Option<&HashSet<u64>>,
) -> Result<VertexAggregates, TriadError> {
    let ids: Vec<u64> = g
        .live_edges()
        .into_iter()
        .filter(|e| scope.map_or(true, |s| s.contains(e)))
        .collect();
    let mut pair_set: HashSet<(u64, u64)> = HashSet::new();
    let mut covered: HashSet<(u64, u64, u64)> = HashSet::new();
    for &e in &ids {
        let vs = g.incident_vertices(e)?;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                pair_set.insert((vs[i], vs[j]));
                for k in j + 1..vs.len() {
                    covered.insert((vs[i], vs[j], vs[k]));
                }
            }
        }
    }

    let mut adj: HashMap<u64, Vec<u64>> = HashMap::new();
    for &(u, v) in &pair_set {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    for l in adj.values_mut() {
        l.sort_unstable();
    }
    let wedges: u64 = adj
        .values()
        .map(|l| {
            let d = l.len() as u64;
            d * (d - 1) / 2
        })
        .sum();
    let pairs_vec: Vec<(u64, u64)> = pair_set.iter().copied().collect();
    let triangles: u64 = pairs_vec
        .par_iter()
        .map(|&(u, v)| {
            // count common neighbors above max(u, v) so each triangle
            // lands on its smallest pair
            let hi = u.max(v);
            let (a, b) = (&adj[&u], &adj[&v]);
            let ai = a.partition_point(|&x| x <= hi);
            let bi = b.partition_point(|&x| x <= hi);
            intersection_size(&a[ai..], &b[bi..]) as u64
        })
        .sum();

    Ok(VertexAggregates {
        covered_triples: covered.len() as u64,
        pairs: pair_set.len() as u64,
        wedges,
        triangles,
    })
}

/// Derive the 3-vector from aggregates and the vertex-universe size.
///
/// Type 1 = covered triples; Type 3 = pair-graph triangles not covered by a
/// single edge; Type 2 = triples with exactly one or two co-occurring pairs,
/// by inclusion-exclusion over pair slots.
pub fn vertex_types_from(agg: VertexAggregates, n_vertices: u64) -> [u64; 3] {
    let type1 = agg.covered_triples;
    debug_assert!(agg.triangles >= agg.covered_triples);
    let type3 = agg.triangles - agg.covered_triples;
    let third_slots = agg.pairs * n_vertices.saturating_sub(2);
    debug_assert!(third_slots >= agg.wedges);
    let type2 = third_slots - agg.wedges;
    [type1, type2, type3]
}

/// 3-vector of vertex triad counts. The third vertex of an open triad ranges
/// over the whole ever-seen universe even under a scope.
pub fn count_vertex_triads(
    g: &DynHypergraph,
    scope: Option<&HashSet<u64>>,
) -> Result<[u64; 3], TriadError> {
    let agg = vertex_aggregates(g, scope)?;
    Ok(vertex_types_from(agg, g.vertex_count() as u64))
}
