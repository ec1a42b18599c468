//! JSON report shapes. Everything except the timing fields is reproducible
//! bit-for-bit given the seed.

use std::fmt::Write as _;
use std::time::Duration;

use hyperdyn::triads::{class_table, TriadCounts, NUM_CLASSES};
use serde::Serialize;

#[derive(Serialize)]
pub struct RunReport {
    pub mode: &'static str,
    pub config: ConfigEcho,
    /// Canonical 7-bit region pattern per class index, most to least
    /// significant: a-only, b-only, c-only, ab, ac, bc, abc.
    pub class_patterns: Vec<String>,
    pub build_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count_ms: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub batches: Vec<BatchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_speedup: Option<f64>,
    #[serde(rename = "final")]
    pub final_state: FinalReport,
}

#[derive(Serialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gen_edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gen_vertices: Option<usize>,
    pub card: String,
    pub motif: &'static str,
    pub t_delta: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delete_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modify_pct: Option<f64>,
    pub seed: u64,
    pub threads: usize,
    pub overprovision: f64,
}

#[derive(Serialize)]
pub struct BatchReport {
    pub batch: usize,
    pub ops: OpsEcho,
    pub counts: CountsReport,
    pub timings_ms: TimingsMs,
}

#[derive(Serialize)]
pub struct OpsEcho {
    pub deletes: usize,
    pub inserts: usize,
    pub vertex_inserts: usize,
    pub vertex_deletes: usize,
}

#[derive(Serialize)]
pub struct TimingsMs {
    pub region: f64,
    pub delete: f64,
    pub insert: f64,
    pub modify: f64,
    pub count: f64,
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recount: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
}

#[derive(Serialize)]
pub struct CountsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyperedge: Option<Vec<ClassCount>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<VertexCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temporal: Option<TemporalCounts>,
}

#[derive(Serialize)]
pub struct ClassCount {
    pub class: usize,
    pub pattern: String,
    pub count: u64,
}

#[derive(Serialize)]
pub struct VertexCounts {
    pub type1: u64,
    pub type2: u64,
    pub type3: u64,
}

#[derive(Serialize)]
pub struct TemporalCounts {
    pub total: u64,
    pub by_class: Vec<ClassCount>,
}

#[derive(Serialize)]
pub struct FinalReport {
    pub counts: CountsReport,
    pub edges: usize,
    pub vertices: usize,
    pub max_cardinality: usize,
    pub storage: StorageEcho,
}

#[derive(Serialize)]
pub struct StorageEcho {
    pub h2v_slots: usize,
    pub h2v_watermark: usize,
    pub v2h_slots: usize,
    pub v2h_watermark: usize,
    pub free_edge_nodes: usize,
}

pub fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn pattern_string(class: usize) -> String {
    format!("{:07b}", class_table().canonical_patterns[class].0)
}

pub fn class_patterns() -> Vec<String> {
    (0..NUM_CLASSES).map(pattern_string).collect()
}

fn by_class(counts: &[u64; NUM_CLASSES]) -> Vec<ClassCount> {
    counts
        .iter()
        .enumerate()
        .map(|(class, &count)| ClassCount {
            class,
            pattern: pattern_string(class),
            count,
        })
        .collect()
}

/// Report only the families that were actually computed.
pub fn counts_report(
    counts: &TriadCounts,
    hyperedge: bool,
    vertex: bool,
    temporal: bool,
) -> CountsReport {
    CountsReport {
        hyperedge: hyperedge.then(|| by_class(&counts.hyperedge_by_class)),
        vertex: vertex.then(|| VertexCounts {
            type1: counts.vertex_by_type[0],
            type2: counts.vertex_by_type[1],
            type3: counts.vertex_by_type[2],
        }),
        temporal: temporal.then(|| TemporalCounts {
            total: counts.temporal_total,
            by_class: by_class(&counts.temporal_by_class),
        }),
    }
}

pub fn csv_table(batches: &[BatchReport]) -> String {
    let mut out = String::from(
        "batch,deletes,inserts,vertex_inserts,vertex_deletes,region_ms,delete_ms,insert_ms,modify_ms,count_ms,total_ms,recount_ms,speedup\n",
    );
    for b in batches {
        let t = &b.timings_ms;
        write!(
            out,
            "{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
            b.batch,
            b.ops.deletes,
            b.ops.inserts,
            b.ops.vertex_inserts,
            b.ops.vertex_deletes,
            t.region,
            t.delete,
            t.insert,
            t.modify,
            t.count,
            t.total
        )
        .unwrap();
        match (t.recount, t.speedup) {
            (Some(r), Some(s)) => writeln!(out, ",{r:.3},{s:.3}").unwrap(),
            _ => writeln!(out, ",,").unwrap(),
        }
    }
    out
}
