//! Brute-force reference implementations for tests and the verify mode.
//!
//! Everything here works on plain ordered containers and is coded straight
//! from the triad definitions, sharing no classification logic with the
//! engine; the class numbering comes from a frozen canonical-pattern list.
//! Divergence between this module and the engine signals a real bug.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::hypergraph::{ChangeBatch, EdgeSpec};
use crate::triads::{TemporalParams, TriadCounts, NUM_CLASSES};

pub const REF_EDGE_CAP: usize = 300;
pub const REF_VERTEX_CAP: usize = 500;

/// Canonical 7-bit patterns in bit order a-only, b-only, c-only, ab, ac,
/// bc, abc; derived once by exhaustive enumeration and frozen here.
const CANONICAL_PATTERNS: [u8; NUM_CLASSES] = [
    0b0000110, 0b0000111, 0b0001110, 0b0001111, 0b0010011, 0b0010110, 0b0010111,
    0b0011010, 0b0011011, 0b0011110, 0b0011111, 0b0110001, 0b0110011, 0b0110101,
    0b0110110, 0b0110111, 0b0111100, 0b0111101, 0b0111110, 0b0111111, 0b1110001,
    0b1110011, 0b1110110, 0b1110111, 0b1111110, 0b1111111,
];

#[derive(Debug, Error)]
pub enum RefError {
    #[error("oracle cap exceeded: {size} {what} > {cap}")]
    OracleCapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("hyperedge {0} not found")]
    NotFound(u64),
    #[error("hyperedge {0} duplicates a live or batch id")]
    Duplicate(u64),
    #[error("hyperedge {0} has an empty vertex set")]
    EmptyEdge(u64),
    #[error("vertex {vertex} not in hyperedge {edge}")]
    PairNotFound { edge: u64, vertex: u64 },
    #[error("vertex {vertex} already in hyperedge {edge}")]
    DuplicatePair { edge: u64, vertex: u64 },
    #[error("(edge {edge}, vertex {vertex}) appears twice in one batch")]
    PairRepeated { edge: u64, vertex: u64 },
}

/// Plain-container hypergraph with an explicit ever-seen vertex universe.
#[derive(Debug, Clone, Default)]
pub struct RefHypergraph {
    pub edges: BTreeMap<u64, BTreeSet<u64>>,
    pub times: BTreeMap<u64, i64>,
    pub vertices: BTreeSet<u64>,
}

impl RefHypergraph {
    pub fn from_specs(specs: &[EdgeSpec]) -> RefHypergraph {
        let mut r = RefHypergraph::default();
        for s in specs {
            let set: BTreeSet<u64> = s.vertices.iter().copied().collect();
            r.vertices.extend(&set);
            r.edges.insert(s.external_id, set);
            if let Some(t) = s.timestamp {
                r.times.insert(s.external_id, t);
            }
        }
        r
    }
}

/// Apply a batch with the engine's phase order: deletes, inserts, then
/// incident-vertex modifications.
pub fn ref_apply(mut r: RefHypergraph, batch: &ChangeBatch) -> Result<RefHypergraph, RefError> {
    let mut seen = BTreeSet::new();
    for &d in &batch.deletes {
        if !r.edges.contains_key(&d) || !seen.insert(d) {
            return Err(RefError::NotFound(d));
        }
    }
    for &d in &batch.deletes {
        r.edges.remove(&d);
        r.times.remove(&d);
    }

    let mut seen = BTreeSet::new();
    for s in &batch.inserts {
        if r.edges.contains_key(&s.external_id) || !seen.insert(s.external_id) {
            return Err(RefError::Duplicate(s.external_id));
        }
        if s.vertices.is_empty() {
            return Err(RefError::EmptyEdge(s.external_id));
        }
    }
    for s in &batch.inserts {
        let set: BTreeSet<u64> = s.vertices.iter().copied().collect();
        r.vertices.extend(&set);
        r.edges.insert(s.external_id, set);
        if let Some(t) = s.timestamp {
            r.times.insert(s.external_id, t);
        }
    }

    let mut pairs = BTreeSet::new();
    for &(e, v) in batch.vertex_inserts.iter().chain(&batch.vertex_deletes) {
        if !pairs.insert((e, v)) {
            return Err(RefError::PairRepeated { edge: e, vertex: v });
        }
    }
    for &(e, v) in &batch.vertex_inserts {
        let set = r.edges.get(&e).ok_or(RefError::NotFound(e))?;
        if set.contains(&v) {
            return Err(RefError::DuplicatePair { edge: e, vertex: v });
        }
    }
    for &(e, v) in &batch.vertex_deletes {
        let set = r.edges.get(&e).ok_or(RefError::NotFound(e))?;
        if !set.contains(&v) {
            return Err(RefError::PairNotFound { edge: e, vertex: v });
        }
    }
    for &(e, v) in &batch.vertex_inserts {
        r.edges.get_mut(&e).unwrap().insert(v);
        r.vertices.insert(v);
    }
    for &(e, v) in &batch.vertex_deletes {
        r.edges.get_mut(&e).unwrap().remove(&v);
    }
    Ok(r)
}

fn region_nonempty(
    a: &BTreeSet<u64>,
    b: &BTreeSet<u64>,
    c: &BTreeSet<u64>,
    in_b: bool,
    in_c: bool,
) -> bool {
    a.iter().any(|x| b.contains(x) == in_b && c.contains(x) == in_c)
}

fn venn_bits(a: &BTreeSet<u64>, b: &BTreeSet<u64>, c: &BTreeSet<u64>) -> u8 {
    let mut bits = 0u8;
    let regions = [
        region_nonempty(a, b, c, false, false), // a only
        region_nonempty(b, a, c, false, false), // b only
        region_nonempty(c, a, b, false, false), // c only
        region_nonempty(a, b, c, true, false),  // ab
        region_nonempty(a, c, b, true, false),  // ac
        region_nonempty(b, c, a, true, false),  // bc
        region_nonempty(a, b, c, true, true),   // abc
    ];
    for (i, &r) in regions.iter().enumerate() {
        if r {
            bits |= 1 << (6 - i);
        }
    }
    bits
}

fn intersects(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().any(|x| large.contains(x))
}

/// Classify by recomputing the pattern under all six set orderings and
/// taking the smallest; None when the triple is not a connected triad.
fn ref_class(a: &BTreeSet<u64>, b: &BTreeSet<u64>, c: &BTreeSet<u64>) -> Option<usize> {
    if a == b || a == c || b == c {
        return None;
    }
    let pairs =
        intersects(a, b) as u32 + intersects(a, c) as u32 + intersects(b, c) as u32;
    if pairs < 2 {
        return None;
    }
    let orderings = [
        (a, b, c),
        (a, c, b),
        (b, a, c),
        (b, c, a),
        (c, a, b),
        (c, b, a),
    ];
    let canon = orderings
        .iter()
        .map(|&(x, y, z)| venn_bits(x, y, z))
        .min()
        .unwrap();
    let idx = CANONICAL_PATTERNS
        .binary_search(&canon)
        .expect("every realizable canonical pattern is in the frozen list");
    Some(idx)
}

/// Full brute-force count of every category by triple-nested enumeration.
pub fn ref_count_all(r: &RefHypergraph, params: TemporalParams) -> Result<TriadCounts, RefError> {
    if r.edges.len() > REF_EDGE_CAP {
        return Err(RefError::OracleCapExceeded {
            what: "edges",
            size: r.edges.len(),
            cap: REF_EDGE_CAP,
        });
    }
    if r.vertices.len() > REF_VERTEX_CAP {
        return Err(RefError::OracleCapExceeded {
            what: "vertices",
            size: r.vertices.len(),
            cap: REF_VERTEX_CAP,
        });
    }

    let mut out = TriadCounts::default();
    let ids: Vec<u64> = r.edges.keys().copied().collect();
    let stamped = !ids.is_empty() && ids.iter().all(|i| r.times.contains_key(i));
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            for k in j + 1..ids.len() {
                let (a, b, c) = (&r.edges[&ids[i]], &r.edges[&ids[j]], &r.edges[&ids[k]]);
                let Some(class) = ref_class(a, b, c) else {
                    continue;
                };
                out.hyperedge_by_class[class] += 1;
                if stamped {
                    let ts = [r.times[&ids[i]], r.times[&ids[j]], r.times[&ids[k]]];
                    let span = ts.iter().max().unwrap() - ts.iter().min().unwrap();
                    if params.t_delta.admits(span) {
                        out.temporal_by_class[class] += 1;
                        out.temporal_total += 1;
                    }
                }
            }
        }
    }

    let mut co: HashSet<(u64, u64)> = HashSet::new();
    let mut covered: HashSet<(u64, u64, u64)> = HashSet::new();
    for set in r.edges.values() {
        let vs: Vec<u64> = set.iter().copied().collect();
        for x in 0..vs.len() {
            for y in x + 1..vs.len() {
                co.insert((vs[x], vs[y]));
                for z in y + 1..vs.len() {
                    covered.insert((vs[x], vs[y], vs[z]));
                }
            }
        }
    }
    let verts: Vec<u64> = r.vertices.iter().copied().collect();
    for x in 0..verts.len() {
        for y in x + 1..verts.len() {
            let uv = co.contains(&(verts[x], verts[y]));
            for z in y + 1..verts.len() {
                let k = uv as u32
                    + co.contains(&(verts[x], verts[z])) as u32
                    + co.contains(&(verts[y], verts[z])) as u32;
                if k == 0 {
                    continue;
                }
                if covered.contains(&(verts[x], verts[y], verts[z])) {
                    out.vertex_by_type[0] += 1;
                } else if k == 3 {
                    out.vertex_by_type[2] += 1;
                } else {
                    out.vertex_by_type[1] += 1;
                }
            }
        }
    }
    Ok(out)
}
