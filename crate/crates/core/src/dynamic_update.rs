//! Incremental maintenance of all triad counts across change batches.
//!
//! Hyperedge and temporal counts follow the subtract/re-add pattern: before
//! the batch, count every triple containing a deleted or modified edge; after
//! applying it, count every triple containing an inserted or modified edge;
//! fold the difference into the running totals. A triple can change class or
//! existence only if one of its three edges changed, so the two seed-attributed
//! counts cover exactly the changed triples, and a modified edge's unchanged
//! triples cancel between the sides. All participating edges lie within two
//! line-graph hops of a seed, which bounds the work by the batch's
//! neighborhood rather than the hypergraph.
//!
//! Vertex-triad counts cannot be maintained by region counting at all: an
//! open triad's third vertex ranges over the whole ever-seen universe, so a
//! far-away insert that registers one new vertex shifts counts everywhere.
//! They are derived instead from four global aggregates (single-edge covered
//! triples, co-occurring pairs, pair-graph wedges and triangles) whose
//! deltas are local to the changed edges' footprints.
//!
//! The pipeline is serialized per batch; each stage parallelizes internally.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::hypergraph::{ChangeBatch, DynHypergraph, HgError};
use crate::triads::{
    count_hyperedge_triads, count_temporal_triads, count_touching, intersect_sorted,
    intersection_size, touch_support, vertex_aggregates, vertex_types_from, TemporalParams,
    TouchSupport, TriadCounts, TriadError, VertexAggregates, NUM_CLASSES,
};

#[derive(Debug, Error)]
pub enum UpdateError {
    #[error("inconsistent state: {0} went negative (scoping bug)")]
    InconsistentState(&'static str),
    #[error("batch invalid: {0}")]
    InvalidBatch(String),
    #[error(transparent)]
    Triads(#[from] TriadError),
    #[error(transparent)]
    Graph(#[from] HgError),
}

/// Seeds plus their one- and two-hop line-graph neighborhoods.
#[derive(Debug, Clone)]
pub struct AffectedRegion {
    pub seeds: HashSet<u64>,
    pub members: HashSet<u64>,
}

pub fn affected_region(g: &DynHypergraph, seeds: &[u64]) -> Result<AffectedRegion, UpdateError> {
    let mut seed_set = HashSet::with_capacity(seeds.len());
    for &s in seeds {
        if !g.contains_edge(s) {
            return Err(UpdateError::Graph(HgError::NotFound(s)));
        }
        seed_set.insert(s);
    }
    let mut members = seed_set.clone();
    let mut frontier: Vec<u64> = seed_set.iter().copied().collect();
    for _ in 0..2 {
        let lists: Vec<Vec<u64>> = frontier
            .par_iter()
            .map(|&e| g.neighbor_hyperedges(e))
            .collect::<Result<_, _>>()?;
        let mut next = Vec::new();
        for l in lists {
            for e in l {
                if members.insert(e) {
                    next.push(e);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(AffectedRegion {
        seeds: seed_set,
        members,
    })
}

/// Which counter families to maintain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotifSet {
    pub hyperedge: bool,
    pub vertex: bool,
    pub temporal: bool,
}

impl MotifSet {
    pub const ALL: MotifSet = MotifSet {
        hyperedge: true,
        vertex: true,
        temporal: true,
    };
    pub const HYPEREDGE: MotifSet = MotifSet {
        hyperedge: true,
        vertex: false,
        temporal: false,
    };
    pub const VERTEX: MotifSet = MotifSet {
        hyperedge: false,
        vertex: true,
        temporal: false,
    };
    pub const TEMPORAL: MotifSet = MotifSet {
        hyperedge: false,
        vertex: false,
        temporal: true,
    };
}

/// Running totals plus the aggregates the vertex vector derives from.
/// Invariant: after every successful update, the selected components of
/// `counts` equal a full recount.
#[derive(Debug, Clone)]
pub struct CountState {
    pub counts: TriadCounts,
    pub params: TemporalParams,
    pub motifs: MotifSet,
    temporal_enabled: bool,
    agg: VertexAggregates,
}

impl CountState {
    pub fn temporal_enabled(&self) -> bool {
        self.temporal_enabled
    }

    pub fn aggregates(&self) -> VertexAggregates {
        self.agg
    }
}

/// Full static recount of the selected families; also the benchmark
/// baseline. Temporal counters stay zero unless requested and every live
/// edge is timestamped.
pub fn recount(
    g: &DynHypergraph,
    params: TemporalParams,
    motifs: MotifSet,
) -> Result<CountState, UpdateError> {
    let hyperedge_by_class = if motifs.hyperedge {
        count_hyperedge_triads(g, None)?
    } else {
        [0; NUM_CLASSES]
    };
    let (agg, vertex_by_type) = if motifs.vertex {
        let agg = vertex_aggregates(g, None)?;
        (agg, vertex_types_from(agg, g.vertex_count() as u64))
    } else {
        (VertexAggregates::default(), [0; 3])
    };
    let temporal_enabled = motifs.temporal && g.all_timestamped();
    let (temporal_total, temporal_by_class) = if temporal_enabled {
        count_temporal_triads(g, params, None)?
    } else {
        (0, [0; NUM_CLASSES])
    };
    Ok(CountState {
        counts: TriadCounts {
            hyperedge_by_class,
            vertex_by_type,
            temporal_total,
            temporal_by_class,
        },
        params,
        motifs,
        temporal_enabled,
        agg,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateTimings {
    pub region: Duration,
    pub count_del: Duration,
    pub delete: Duration,
    pub insert: Duration,
    pub modify: Duration,
    pub count_ins: Duration,
}

impl UpdateTimings {
    pub fn total(&self) -> Duration {
        self.region + self.count_del + self.delete + self.insert + self.modify + self.count_ins
    }
}

fn norm_pair(a: u64, b: u64) -> (u64, u64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Per-vertex pair-neighborhood: every vertex sharing an edge with `v`.
fn pair_neighborhood(g: &DynHypergraph, v: u64) -> Result<Vec<u64>, HgError> {
    let mut out: Vec<u64> = Vec::new();
    for e in g.incident_hyperedges(v)? {
        out.extend(g.incident_vertices(e)?);
    }
    out.sort_unstable();
    out.dedup();
    out.retain(|&x| x != v);
    Ok(out)
}

fn pair_cooccurs(g: &DynHypergraph, u: u64, v: u64) -> Result<bool, HgError> {
    Ok(intersection_size(&g.incident_hyperedges(u)?, &g.incident_hyperedges(v)?) > 0)
}

fn triple_covered(g: &DynHypergraph, u: u64, v: u64, w: u64) -> Result<bool, HgError> {
    let mut uv = Vec::new();
    intersect_sorted(&g.incident_hyperedges(u)?, &g.incident_hyperedges(v)?, &mut uv);
    if uv.is_empty() {
        return Ok(false);
    }
    Ok(intersection_size(&uv, &g.incident_hyperedges(w)?) > 0)
}

/// Everything about the batch that must be read off the pre-update graph.
struct PreScan {
    candidate_pairs: Vec<(u64, u64)>,
    candidate_triples: Vec<(u64, u64, u64)>,
    co_pre: Vec<bool>,
    cov_pre: Vec<bool>,
    footprint: Vec<u64>,
    deg_pre: Vec<u64>,
    npair_pre: HashMap<u64, Vec<u64>>,
}

fn pre_scan(g: &DynHypergraph, batch: &ChangeBatch) -> Result<PreScan, UpdateError> {
    // Pre- and post-versions of every changed edge's vertex set.
    let mut versions: Vec<Vec<u64>> = Vec::new();
    for &d in &batch.deletes {
        versions.push(g.incident_vertices(d)?);
    }
    for s in &batch.inserts {
        let mut vs = s.vertices.clone();
        vs.sort_unstable();
        vs.dedup();
        versions.push(vs);
    }
    let mut mod_adds: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut mod_dels: HashMap<u64, Vec<u64>> = HashMap::new();
    for &(e, v) in &batch.vertex_inserts {
        mod_adds.entry(e).or_default().push(v);
    }
    for &(e, v) in &batch.vertex_deletes {
        mod_dels.entry(e).or_default().push(v);
    }
    let touched: HashSet<u64> = mod_adds.keys().chain(mod_dels.keys()).copied().collect();
    for &e in &touched {
        let pre = g.incident_vertices(e)?;
        let mut post = pre.clone();
        if let Some(dels) = mod_dels.get(&e) {
            post.retain(|v| !dels.contains(v));
        }
        if let Some(adds) = mod_adds.get(&e) {
            post.extend(adds);
        }
        post.sort_unstable();
        post.dedup();
        versions.push(pre);
        versions.push(post);
    }

    let mut pair_set: HashSet<(u64, u64)> = HashSet::new();
    let mut triple_set: HashSet<(u64, u64, u64)> = HashSet::new();
    for vs in &versions {
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                pair_set.insert((vs[i], vs[j]));
                for k in j + 1..vs.len() {
                    triple_set.insert((vs[i], vs[j], vs[k]));
                }
            }
        }
    }
    let mut candidate_pairs: Vec<(u64, u64)> = pair_set.into_iter().collect();
    candidate_pairs.sort_unstable();
    let mut candidate_triples: Vec<(u64, u64, u64)> = triple_set.into_iter().collect();
    candidate_triples.sort_unstable();

    let co_pre = candidate_pairs
        .par_iter()
        .map(|&(u, v)| pair_cooccurs(g, u, v))
        .collect::<Result<Vec<_>, _>>()?;
    let cov_pre = candidate_triples
        .par_iter()
        .map(|&(u, v, w)| triple_covered(g, u, v, w))
        .collect::<Result<Vec<_>, _>>()?;

    let mut footprint: Vec<u64> = candidate_pairs
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .collect();
    footprint.sort_unstable();
    footprint.dedup();
    let npair_list: Vec<Vec<u64>> = footprint
        .par_iter()
        .map(|&v| pair_neighborhood(g, v))
        .collect::<Result<_, _>>()?;
    let deg_pre: Vec<u64> = npair_list.iter().map(|l| l.len() as u64).collect();
    let npair_pre: HashMap<u64, Vec<u64>> =
        footprint.iter().copied().zip(npair_list).collect();

    Ok(PreScan {
        candidate_pairs,
        candidate_triples,
        co_pre,
        cov_pre,
        footprint,
        deg_pre,
        npair_pre,
    })
}

fn choose2(d: u64) -> i64 {
    (d as i64) * (d as i64 - 1) / 2
}

/// Triangles in one state's pair graph that contain at least one flipped
/// pair, each counted at its smallest flipped pair.
fn triangles_touching(
    flipped: &[(u64, u64)],
    flipped_set: &HashSet<(u64, u64)>,
    npair: &HashMap<u64, Vec<u64>>,
) -> i64 {
    let mut total = 0i64;
    let mut common = Vec::new();
    for &p in flipped {
        let (u, v) = p;
        intersect_sorted(&npair[&u], &npair[&v], &mut common);
        for &w in &common {
            let q1 = norm_pair(u, w);
            let q2 = norm_pair(v, w);
            if (flipped_set.contains(&q1) && q1 < p) || (flipped_set.contains(&q2) && q2 < p) {
                continue;
            }
            total += 1;
        }
    }
    total
}

fn add_signed(value: u64, delta: i64, what: &'static str) -> Result<u64, UpdateError> {
    let next = value as i128 + delta as i128;
    if next < 0 {
        return Err(UpdateError::InconsistentState(what));
    }
    Ok(next as u64)
}

fn merge26(
    state: &mut [u64; NUM_CLASSES],
    del: &[u64; NUM_CLASSES],
    ins: &[u64; NUM_CLASSES],
    what: &'static str,
) -> Result<(), UpdateError> {
    for i in 0..NUM_CLASSES {
        *state.get_mut(i).unwrap() =
            add_signed(state[i], ins[i] as i64 - del[i] as i64, what)?;
    }
    Ok(())
}

fn cheap_validate(
    g: &DynHypergraph,
    batch: &ChangeBatch,
    temporal_enabled: bool,
) -> Result<(), UpdateError> {
    let mut dels = HashSet::with_capacity(batch.deletes.len());
    for &d in &batch.deletes {
        if !g.contains_edge(d) || !dels.insert(d) {
            return Err(UpdateError::InvalidBatch(format!(
                "delete of missing or repeated edge {d}"
            )));
        }
    }
    let mut ins_ids = HashSet::with_capacity(batch.inserts.len());
    for s in &batch.inserts {
        if (g.contains_edge(s.external_id) && !dels.contains(&s.external_id))
            || !ins_ids.insert(s.external_id)
        {
            return Err(UpdateError::InvalidBatch(format!(
                "insert of live or repeated edge {}",
                s.external_id
            )));
        }
        if s.vertices.is_empty() {
            return Err(UpdateError::InvalidBatch(format!(
                "insert of empty edge {}",
                s.external_id
            )));
        }
        if temporal_enabled && s.timestamp.is_none() {
            return Err(UpdateError::InvalidBatch(format!(
                "temporal counts are live but insert {} has no timestamp",
                s.external_id
            )));
        }
    }
    for &(e, _) in batch.vertex_inserts.iter().chain(&batch.vertex_deletes) {
        let alive_after = (g.contains_edge(e) && !dels.contains(&e)) || ins_ids.contains(&e);
        if !alive_after {
            return Err(UpdateError::InvalidBatch(format!(
                "modification of edge {e} that is not live after deletes/inserts"
            )));
        }
    }
    Ok(())
}

fn scoped_counts(
    g: &DynHypergraph,
    sup: Option<&TouchSupport>,
    state: &CountState,
) -> Result<([u64; NUM_CLASSES], [u64; NUM_CLASSES]), UpdateError> {
    let Some(sup) = sup else {
        return Ok(([0; NUM_CLASSES], [0; NUM_CLASSES]));
    };
    let h = if state.motifs.hyperedge {
        count_touching(sup, |_, _, _| true)
    } else {
        [0; NUM_CLASSES]
    };
    let t = if state.temporal_enabled {
        let mut times = HashMap::with_capacity(sup.members.len());
        for &e in &sup.members {
            let ts = g
                .timestamp(e)
                .ok_or(TriadError::MissingTimestamps { edge: e })?;
            times.insert(e, ts);
        }
        let window = state.params.t_delta;
        count_touching(sup, |a, b, c| {
            let (ta, tb, tc) = (times[&a], times[&b], times[&c]);
            let span = ta.max(tb).max(tc) - ta.min(tb).min(tc);
            window.admits(span)
        })
    } else {
        [0; NUM_CLASSES]
    };
    Ok((h, t))
}

/// Apply the batch and fold its effect into the running counts.
///
/// Stages: build the deletion-side seed support on the pre-update graph and
/// scan the batch's vertex footprints; count the triples touching those
/// seeds; apply the batch; build the insertion-side support; count its
/// touching triples; merge the difference.
pub fn apply_and_update(
    state: &mut CountState,
    g: &mut DynHypergraph,
    batch: &ChangeBatch,
) -> Result<UpdateTimings, UpdateError> {
    cheap_validate(g, batch, state.temporal_enabled)?;
    let mut timings = UpdateTimings::default();
    let scoped = state.motifs.hyperedge || state.temporal_enabled;

    // Deletion-side region: 2-hop support around the deleted and modified
    // edges, which contains every triple those seeds participate in.
    let t0 = Instant::now();
    let touched: HashSet<u64> = batch
        .vertex_inserts
        .iter()
        .chain(&batch.vertex_deletes)
        .map(|&(e, _)| e)
        .collect();
    let sup_del = if scoped {
        let mut seeds_del: Vec<u64> = batch.deletes.clone();
        seeds_del.extend(touched.iter().filter(|&&e| g.contains_edge(e)));
        Some(touch_support(g, &seeds_del)?)
    } else {
        None
    };
    timings.region += t0.elapsed();

    // count_Del: triples with at least one deletion-side seed, classified
    // on the pre-update hypergraph.
    let t0 = Instant::now();
    let (h_del, t_del) = scoped_counts(g, sup_del.as_ref(), state)?;
    let pre = if state.motifs.vertex {
        Some(pre_scan(g, batch)?)
    } else {
        None
    };
    timings.count_del += t0.elapsed();

    // Apply, in the hypergraph module's phase order.
    let t0 = Instant::now();
    if !batch.deletes.is_empty() {
        g.delete_hyperedges(&batch.deletes)?;
    }
    timings.delete += t0.elapsed();
    let t0 = Instant::now();
    if !batch.inserts.is_empty() {
        g.insert_hyperedges(batch.inserts.clone())?;
    }
    timings.insert += t0.elapsed();
    let t0 = Instant::now();
    if !batch.vertex_inserts.is_empty() || !batch.vertex_deletes.is_empty() {
        g.modify_incident_vertices(&batch.vertex_inserts, &batch.vertex_deletes)?;
    }
    timings.modify += t0.elapsed();

    // Insertion-side region on the post-update graph.
    let t0 = Instant::now();
    let sup_ins = if scoped {
        let mut seeds_ins: Vec<u64> = batch.inserts.iter().map(|s| s.external_id).collect();
        seeds_ins.extend(touched.iter().filter(|&&e| g.contains_edge(e)));
        Some(touch_support(g, &seeds_ins)?)
    } else {
        None
    };
    timings.region += t0.elapsed();

    // count_Ins: triples with at least one insertion-side seed on the
    // post-update hypergraph, then the footprint rescan for the aggregate
    // deltas.
    let t0 = Instant::now();
    let (h_ins, t_ins) = scoped_counts(g, sup_ins.as_ref(), state)?;

    let vertex_deltas = if let Some(pre) = &pre {
        let co_post = pre
            .candidate_pairs
            .par_iter()
            .map(|&(u, v)| pair_cooccurs(g, u, v))
            .collect::<Result<Vec<_>, HgError>>()?;
        let cov_post = pre
            .candidate_triples
            .par_iter()
            .map(|&(u, v, w)| triple_covered(g, u, v, w))
            .collect::<Result<Vec<_>, HgError>>()?;
        let npair_post_list: Vec<Vec<u64>> = pre
            .footprint
            .par_iter()
            .map(|&v| pair_neighborhood(g, v))
            .collect::<Result<_, HgError>>()?;

        let mut d_pairs = 0i64;
        let mut appearing: Vec<(u64, u64)> = Vec::new();
        let mut disappearing: Vec<(u64, u64)> = Vec::new();
        for (i, &p) in pre.candidate_pairs.iter().enumerate() {
            match (pre.co_pre[i], co_post[i]) {
                (false, true) => {
                    d_pairs += 1;
                    appearing.push(p);
                }
                (true, false) => {
                    d_pairs -= 1;
                    disappearing.push(p);
                }
                _ => {}
            }
        }
        let d_covered: i64 = pre
            .candidate_triples
            .iter()
            .enumerate()
            .map(|(i, _)| cov_post[i] as i64 - pre.cov_pre[i] as i64)
            .sum();
        let d_wedges: i64 = pre
            .footprint
            .iter()
            .enumerate()
            .map(|(i, _)| choose2(npair_post_list[i].len() as u64) - choose2(pre.deg_pre[i]))
            .sum();
        let npair_post: HashMap<u64, Vec<u64>> = pre
            .footprint
            .iter()
            .copied()
            .zip(npair_post_list)
            .collect();
        let app_set: HashSet<(u64, u64)> = appearing.iter().copied().collect();
        let dis_set: HashSet<(u64, u64)> = disappearing.iter().copied().collect();
        let d_triangles = triangles_touching(&appearing, &app_set, &npair_post)
            - triangles_touching(&disappearing, &dis_set, &pre.npair_pre);
        Some((d_covered, d_pairs, d_wedges, d_triangles))
    } else {
        None
    };
    timings.count_ins += t0.elapsed();

    // Merge.
    if state.motifs.hyperedge {
        merge26(
            &mut state.counts.hyperedge_by_class,
            &h_del,
            &h_ins,
            "hyperedge class",
        )?;
    }
    if state.temporal_enabled {
        merge26(
            &mut state.counts.temporal_by_class,
            &t_del,
            &t_ins,
            "temporal class",
        )?;
        state.counts.temporal_total = state.counts.temporal_by_class.iter().sum();
    }
    if let Some((d_covered, d_pairs, d_wedges, d_triangles)) = vertex_deltas {
        state.agg = VertexAggregates {
            covered_triples: add_signed(state.agg.covered_triples, d_covered, "covered triples")?,
            pairs: add_signed(state.agg.pairs, d_pairs, "co-occurring pairs")?,
            wedges: add_signed(state.agg.wedges, d_wedges, "wedges")?,
            triangles: add_signed(state.agg.triangles, d_triangles, "triangles")?,
        };
        if state.agg.triangles < state.agg.covered_triples {
            return Err(UpdateError::InconsistentState("type 3 vertex triads"));
        }
        let n = g.vertex_count() as u64;
        if state.agg.pairs * n.saturating_sub(2) < state.agg.wedges {
            return Err(UpdateError::InconsistentState("type 2 vertex triads"));
        }
        state.counts.vertex_by_type = vertex_types_from(state.agg, n);
    }
    Ok(timings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_mixed_batch, gen_random, CardDist};
    use crate::hypergraph::{EdgeSpec, HypergraphConfig};
    use crate::triads::TimeWindow;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const INF: TemporalParams = TemporalParams {
        t_delta: TimeWindow::Infinite,
    };

    fn spec(id: u64, verts: &[u64], t: Option<i64>) -> EdgeSpec {
        EdgeSpec {
            external_id: id,
            vertices: verts.to_vec(),
            timestamp: t,
        }
    }

    fn assert_matches_recount(state: &CountState, g: &DynHypergraph) {
        let fresh = recount(g, state.params, state.motifs).unwrap();
        assert_eq!(state.counts, fresh.counts);
        assert_eq!(state.agg, fresh.agg);
    }

    #[test]
    fn region_examples() {
        // isolated seed
        let g = DynHypergraph::init(
            vec![spec(1, &[1, 2], None), spec(2, &[5, 6], None)],
            HypergraphConfig::default(),
        )
        .unwrap();
        let r = affected_region(&g, &[1]).unwrap();
        assert_eq!(r.members, [1].into_iter().collect());

        // path of five edges, middle seed reaches everything
        let g = DynHypergraph::init(
            (1..=5).map(|i| spec(i, &[i, i + 1], None)).collect(),
            HypergraphConfig::default(),
        )
        .unwrap();
        let r = affected_region(&g, &[3]).unwrap();
        assert_eq!(r.members.len(), 5);

        // seed past the ends reaches only two hops
        let g = DynHypergraph::init(
            (1..=7).map(|i| spec(i, &[i, i + 1], None)).collect(),
            HypergraphConfig::default(),
        )
        .unwrap();
        let r = affected_region(&g, &[1]).unwrap();
        assert_eq!(r.members, [1, 2, 3].into_iter().collect());

        assert!(matches!(
            affected_region(&g, &[99]),
            Err(UpdateError::Graph(HgError::NotFound(99)))
        ));
    }

    #[test]
    fn region_matches_bfs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let specs = gen_random(60, 25, CardDist::Uniform(4), false, &mut rng);
        let g = DynHypergraph::init(specs, HypergraphConfig::default()).unwrap();
        let live = g.live_edges();
        for &seed in live.iter().take(12) {
            let r = affected_region(&g, &[seed]).unwrap();
            // reference: plain two-round BFS
            let mut want: HashSet<u64> = [seed].into_iter().collect();
            let mut frontier = vec![seed];
            for _ in 0..2 {
                let mut next = Vec::new();
                for &e in &frontier {
                    for n in g.neighbor_hyperedges(e).unwrap() {
                        if want.insert(n) {
                            next.push(n);
                        }
                    }
                }
                frontier = next;
            }
            assert_eq!(r.members, want);
        }
    }

    #[test]
    fn empty_batch_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let specs = gen_random(30, 15, CardDist::Uniform(4), true, &mut rng);
        let mut g = DynHypergraph::init(specs, HypergraphConfig::default()).unwrap();
        let mut state = recount(&g, INF, MotifSet::ALL).unwrap();
        let before = state.counts;
        apply_and_update(&mut state, &mut g, &ChangeBatch::default()).unwrap();
        assert_eq!(state.counts, before);
        assert_matches_recount(&state, &g);
    }

    #[test]
    fn delete_one_edge_of_closed_triple() {
        let mut g = DynHypergraph::init(
            vec![
                spec(1, &[1, 2], Some(0)),
                spec(2, &[2, 3], Some(1)),
                spec(3, &[1, 3], Some(2)),
            ],
            HypergraphConfig::default(),
        )
        .unwrap();
        let mut state = recount(&g, INF, MotifSet::ALL).unwrap();
        assert_eq!(state.counts.hyperedge_by_class.iter().sum::<u64>(), 1);
        let batch = ChangeBatch {
            deletes: vec![2],
            ..Default::default()
        };
        apply_and_update(&mut state, &mut g, &batch).unwrap();
        assert_eq!(state.counts.hyperedge_by_class.iter().sum::<u64>(), 0);
        assert_eq!(state.counts.temporal_total, 0);
        assert_matches_recount(&state, &g);
    }

    /// Insertion next to a pre-existing closed triple: the inserted edge's
    /// region contains triads that must be subtracted before re-adding.
    #[test]
    fn insertion_region_with_preexisting_triads_stays_exact() {
        let mut g = DynHypergraph::init(
            vec![
                spec(1, &[1, 2], None),
                spec(2, &[1, 3], None),
                spec(3, &[1, 4], None),
            ],
            HypergraphConfig::default(),
        )
        .unwrap();
        let mut state = recount(&g, INF, MotifSet::ALL).unwrap();
        assert_eq!(state.counts.hyperedge_by_class.iter().sum::<u64>(), 1);
        let batch = ChangeBatch {
            inserts: vec![spec(4, &[1], None)],
            ..Default::default()
        };
        apply_and_update(&mut state, &mut g, &batch).unwrap();
        assert_eq!(state.counts.hyperedge_by_class.iter().sum::<u64>(), 4);
        assert_matches_recount(&state, &g);
    }

    /// A far-away insert that registers new vertices shifts open vertex
    /// triads near edges it never touches.
    #[test]
    fn universe_growth_updates_open_vertex_triads() {
        let mut g = DynHypergraph::init(
            vec![spec(1, &[1, 2], None)],
            HypergraphConfig::default(),
        )
        .unwrap();
        let mut state = recount(&g, INF, MotifSet::ALL).unwrap();
        assert_eq!(state.counts.vertex_by_type, [0, 0, 0]);
        let batch = ChangeBatch {
            inserts: vec![spec(2, &[100, 101], None)],
            ..Default::default()
        };
        apply_and_update(&mut state, &mut g, &batch).unwrap();
        // pairs {1,2} and {100,101}, universe of 4: two open triads each
        assert_eq!(state.counts.vertex_by_type, [0, 4, 0]);
        assert_matches_recount(&state, &g);
    }

    #[test]
    fn insert_then_delete_cancels_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let specs = gen_random(40, 18, CardDist::Uniform(5), true, &mut rng);
        let mut g = DynHypergraph::init(specs, HypergraphConfig::default()).unwrap();
        let mut state = recount(&g, TemporalParams { t_delta: TimeWindow::Finite(10) }, MotifSet::ALL).unwrap();
        let before = state.counts;
        let fresh: Vec<EdgeSpec> = vec![
            spec(100, &[1, 2, 3], Some(50)),
            spec(101, &[2, 4], Some(51)),
            spec(102, &[9, 10, 11], Some(52)),
        ];
        let ins = ChangeBatch {
            inserts: fresh,
            ..Default::default()
        };
        apply_and_update(&mut state, &mut g, &ins).unwrap();
        let del = ChangeBatch {
            deletes: vec![100, 101, 102],
            ..Default::default()
        };
        apply_and_update(&mut state, &mut g, &del).unwrap();
        assert_eq!(state.counts, before);
        assert_matches_recount(&state, &g);
    }

    /// The central exactness property at unit-test scale: randomized mixed
    /// batches, state equals a full recount after every single one.
    #[test]
    fn randomized_batches_match_recount() {
        for seed in 0..6u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let specs = gen_random(60, 25, CardDist::Uniform(5), true, &mut rng);
            let mut g = DynHypergraph::init(specs, HypergraphConfig::default()).unwrap();
            let mut state =
                recount(&g, TemporalParams { t_delta: TimeWindow::Finite(7) }, MotifSet::ALL).unwrap();
            for step in 0..12 {
                let batch =
                    gen_mixed_batch(&g, 10, 0.35, 0.25, CardDist::Uniform(5), 25, &mut rng);
                apply_and_update(&mut state, &mut g, &batch).unwrap();
                let fresh = recount(&g, state.params, state.motifs).unwrap();
                assert_eq!(
                    state.counts, fresh.counts,
                    "seed {seed} step {step} diverged from recount"
                );
                assert_eq!(state.agg, fresh.agg, "seed {seed} step {step} aggregates");
            }
            g.check_duality().unwrap();
        }
    }

    #[test]
    fn delete_end_edge_of_open_path() {
        let specs = vec![
            spec(1, &[1, 2], None),
            spec(2, &[2, 3], None),
            spec(3, &[3, 4], None),
        ];
        let mut g = DynHypergraph::init(specs, HypergraphConfig::default()).unwrap();
        let mut state = recount(&g, INF, MotifSet::HYPEREDGE).unwrap();
        assert_eq!(state.counts.hyperedge_by_class.iter().sum::<u64>(), 1);
        let batch = ChangeBatch {
            deletes: vec![1],
            ..Default::default()
        };
        apply_and_update(&mut state, &mut g, &batch).unwrap();
        assert_eq!(state.counts.hyperedge_by_class.iter().sum::<u64>(), 0);
        assert_matches_recount(&state, &g);
    }

    #[test]
    fn insert_far_end_of_open_path() {
        let specs = vec![spec(1, &[1, 2], None), spec(2, &[2, 3], None)];
        let mut g = DynHypergraph::init(specs, HypergraphConfig::default()).unwrap();
        let mut state = recount(&g, INF, MotifSet::HYPEREDGE).unwrap();
        assert_eq!(state.counts.hyperedge_by_class.iter().sum::<u64>(), 0);
        let batch = ChangeBatch {
            inserts: vec![spec(3, &[3, 4], None)],
            ..Default::default()
        };
        apply_and_update(&mut state, &mut g, &batch).unwrap();
        assert_eq!(state.counts.hyperedge_by_class.iter().sum::<u64>(), 1);
        assert_matches_recount(&state, &g);
    }

    #[test]
    fn sparse_randomized_batches_match_recount() {
        for seed in 0..4 {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let specs = gen_random(70, 300, CardDist::Uniform(3), true, &mut rng);
            let mut g = DynHypergraph::init(specs, HypergraphConfig::default()).unwrap();
            let params = TemporalParams {
                t_delta: TimeWindow::Finite(9),
            };
            let mut state = recount(&g, params, MotifSet::ALL).unwrap();
            for _ in 0..10 {
                let batch =
                    gen_mixed_batch(&g, 10, 0.4, 0.2, CardDist::Uniform(3), 300, &mut rng);
                apply_and_update(&mut state, &mut g, &batch).unwrap();
                assert_matches_recount(&state, &g);
            }
        }
    }

    #[test]
    fn hyperedge_only_maintenance_matches_its_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let specs = gen_random(50, 20, CardDist::Uniform(5), true, &mut rng);
        let mut g = DynHypergraph::init(specs, HypergraphConfig::default()).unwrap();
        let mut state = recount(&g, INF, MotifSet::HYPEREDGE).unwrap();
        for _ in 0..8 {
            let batch = gen_mixed_batch(&g, 8, 0.4, 0.2, CardDist::Uniform(5), 20, &mut rng);
            apply_and_update(&mut state, &mut g, &batch).unwrap();
            let fresh = recount(&g, INF, MotifSet::HYPEREDGE).unwrap();
            assert_eq!(state.counts.hyperedge_by_class, fresh.counts.hyperedge_by_class);
            assert_eq!(state.counts.vertex_by_type, [0, 0, 0]);
            assert_eq!(state.counts.temporal_total, 0);
        }
    }

    #[test]
    fn invalid_batches_are_rejected_before_mutation() {
        let mut g = DynHypergraph::init(
            vec![spec(1, &[1, 2], Some(0))],
            HypergraphConfig::default(),
        )
        .unwrap();
        let mut state = recount(&g, INF, MotifSet::ALL).unwrap();
        let bad = ChangeBatch {
            deletes: vec![9],
            ..Default::default()
        };
        assert!(matches!(
            apply_and_update(&mut state, &mut g, &bad),
            Err(UpdateError::InvalidBatch(_))
        ));
        // temporal live, unstamped insert refused up front
        let bad = ChangeBatch {
            inserts: vec![spec(2, &[3, 4], None)],
            ..Default::default()
        };
        assert!(matches!(
            apply_and_update(&mut state, &mut g, &bad),
            Err(UpdateError::InvalidBatch(_))
        ));
        assert_eq!(g.edge_count(), 1);
        assert_matches_recount(&state, &g);
    }
}
