//! Seeded random instance and batch generation.

use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::hypergraph::{ChangeBatch, DynHypergraph, EdgeSpec};

/// Cardinality distribution for generated hyperedges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CardDist {
    Fixed(usize),
    Uniform(usize),
    Normal { mu: f64, std: f64 },
}

impl CardDist {
    pub fn sample(&self, rng: &mut ChaCha8Rng, n_vertices: usize) -> usize {
        let c = match *self {
            CardDist::Fixed(k) => k,
            CardDist::Uniform(max) => rng.gen_range(1..=max.max(1)),
            CardDist::Normal { mu, std } => {
                let d = Normal::new(mu, std.max(1e-9)).expect("finite parameters");
                d.sample(rng).round().max(1.0) as usize
            }
        };
        c.clamp(1, n_vertices)
    }
}

impl FromStr for CardDist {
    type Err = String;

    /// Accepts "fixed:K", "uniform:K", "normal:MU,STD".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("expected KIND:ARGS, got {s:?}"))?;
        match kind {
            "fixed" => arg
                .parse()
                .map(CardDist::Fixed)
                .map_err(|e| format!("fixed cardinality: {e}")),
            "uniform" => arg
                .parse()
                .map(CardDist::Uniform)
                .map_err(|e| format!("uniform cardinality: {e}")),
            "normal" => {
                let (mu, std) = arg
                    .split_once(',')
                    .ok_or_else(|| format!("expected normal:MU,STD, got {s:?}"))?;
                Ok(CardDist::Normal {
                    mu: mu.trim().parse().map_err(|e| format!("mu: {e}"))?,
                    std: std.trim().parse().map_err(|e| format!("std: {e}"))?,
                })
            }
            other => Err(format!("unknown cardinality distribution {other:?}")),
        }
    }
}

/// Random instance: external ids 1..=n in insertion order, timestamps equal
/// to the edge index when requested, vertices drawn without replacement
/// from 1..=n_vertices.
pub fn gen_random(
    n_edges: usize,
    n_vertices: usize,
    card: CardDist,
    timestamps: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<EdgeSpec> {
    (0..n_edges)
        .map(|i| {
            let c = card.sample(rng, n_vertices);
            let mut vs: Vec<u64> = sample(rng, n_vertices, c)
                .into_iter()
                .map(|v| v as u64 + 1)
                .collect();
            vs.sort_unstable();
            EdgeSpec {
                external_id: i as u64 + 1,
                vertices: vs,
                timestamp: timestamps.then_some(i as i64),
            }
        })
        .collect()
}

/// One mixed batch: floor(n_ops * delete_pct) deletes sampled from the live
/// edges, the remainder fresh inserts with monotonically new external ids
/// and timestamps past anything seen.
pub fn gen_batch(
    g: &DynHypergraph,
    n_ops: usize,
    delete_pct: f64,
    card: CardDist,
    n_vertices: usize,
    rng: &mut ChaCha8Rng,
) -> ChangeBatch {
    let live = g.live_edges();
    let n_del = ((n_ops as f64 * delete_pct).floor() as usize).min(live.len());
    let deletes: Vec<u64> = sample(rng, live.len(), n_del)
        .into_iter()
        .map(|i| live[i])
        .collect();

    let timestamps = g.all_timestamped() && g.edge_count() > 0;
    let base_ext = g.next_fresh_external();
    let base_ts = g.next_timestamp();
    let inserts: Vec<EdgeSpec> = (0..n_ops - n_del)
        .map(|i| {
            let c = card.sample(rng, n_vertices);
            let mut vs: Vec<u64> = sample(rng, n_vertices, c)
                .into_iter()
                .map(|v| v as u64 + 1)
                .collect();
            vs.sort_unstable();
            EdgeSpec {
                external_id: base_ext + i as u64,
                vertices: vs,
                timestamp: timestamps.then_some(base_ts + i as i64),
            }
        })
        .collect();

    ChangeBatch {
        deletes,
        inserts,
        vertex_inserts: Vec::new(),
        vertex_deletes: Vec::new(),
    }
}

/// Like gen_batch but carving out a slice of the ops as incident-vertex
/// modifications (one per distinct surviving edge, so pairs never repeat).
pub fn gen_mixed_batch(
    g: &DynHypergraph,
    n_ops: usize,
    delete_pct: f64,
    modify_pct: f64,
    card: CardDist,
    n_vertices: usize,
    rng: &mut ChaCha8Rng,
) -> ChangeBatch {
    let live = g.live_edges();
    let n_del = ((n_ops as f64 * delete_pct).floor() as usize).min(live.len());
    let deletes: Vec<u64> = sample(rng, live.len(), n_del)
        .into_iter()
        .map(|i| live[i])
        .collect();
    let deleted: std::collections::HashSet<u64> = deletes.iter().copied().collect();
    let survivors: Vec<u64> = live.iter().copied().filter(|e| !deleted.contains(e)).collect();

    let n_mod = ((n_ops as f64 * modify_pct).floor() as usize).min(survivors.len());
    let mut vertex_inserts = Vec::new();
    let mut vertex_deletes = Vec::new();
    for i in sample(rng, survivors.len(), n_mod) {
        let e = survivors[i];
        let verts = g.incident_vertices(e).expect("survivor is live");
        if rng.gen_bool(0.5) && !verts.is_empty() {
            vertex_deletes.push((e, verts[rng.gen_range(0..verts.len())]));
        } else {
            // leave headroom above n_vertices so the universe can grow
            for _ in 0..8 {
                let v = rng.gen_range(1..=n_vertices as u64 + 3);
                if verts.binary_search(&v).is_err() {
                    vertex_inserts.push((e, v));
                    break;
                }
            }
        }
    }

    let n_ins = n_ops.saturating_sub(n_del + n_mod);
    let timestamps = g.all_timestamped() && g.edge_count() > 0;
    let base_ext = g.next_fresh_external();
    let base_ts = g.next_timestamp();
    let inserts: Vec<EdgeSpec> = (0..n_ins)
        .map(|i| {
            let c = card.sample(rng, n_vertices);
            let mut vs: Vec<u64> = sample(rng, n_vertices, c)
                .into_iter()
                .map(|v| v as u64 + 1)
                .collect();
            vs.sort_unstable();
            EdgeSpec {
                external_id: base_ext + i as u64,
                vertices: vs,
                timestamp: timestamps.then_some(base_ts + i as i64),
            }
        })
        .collect();

    ChangeBatch {
        deletes,
        inserts,
        vertex_inserts,
        vertex_deletes,
    }
}
