//! Command-line front end for the dynamic hypergraph engine: ingest or
//! generate an instance, count triads, replay change batches incrementally,
//! check the engine against the reference implementation, or time
//! incremental maintenance against the recount baseline.
//!
//! Every mode emits one JSON report to stdout or `--out`; batch modes can
//! add a per-batch CSV timing table via `--csv`. Reports are reproducible
//! given `--seed`, except the timing fields. Exit codes: 0 on success, 2
//! when verification fails, 1 on any other error.

mod ingest;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use hyperdyn::dynamic_update::{apply_and_update, recount, CountState, MotifSet};
use hyperdyn::gen::{gen_mixed_batch, gen_random, CardDist};
use hyperdyn::hypergraph::{DynHypergraph, EdgeSpec, HypergraphConfig};
use hyperdyn::oracle::{ref_apply, ref_count_all, RefError, RefHypergraph};
use hyperdyn::triads::{TemporalParams, TimeWindow, TriadCounts, NUM_CLASSES};

use report::{
    class_patterns, counts_report, csv_table, ms, pattern_string, BatchReport, ConfigEcho,
    FinalReport, OpsEcho, RunReport, StorageEcho, TimingsMs,
};

#[derive(Parser)]
#[command(name = "hyperdyn", version, about = "Dynamic hypergraph triad counting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Static triad counts on one hypergraph
    Count(CountArgs),
    /// Replay generated change batches, maintaining counts incrementally
    Update(RunArgs),
    /// Batch replay checked against the reference implementation
    Verify(RunArgs),
    /// Incremental maintenance timed against the recount baseline
    Bench(RunArgs),
    /// Write the live hypergraph back out as edge lines
    Export(ExportArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Input file (edge-lines) or file prefix (simplicial-3file)
    #[arg(long)]
    input: Option<PathBuf>,

    /// Input file format
    #[arg(long, value_enum, default_value_t = Format::EdgeLines)]
    format: Format,

    /// Generate this many random hyperedges instead of reading a file
    #[arg(long, conflicts_with = "input")]
    edges: Option<usize>,

    /// Vertex universe 1..=N for generated edges and batch insertions
    #[arg(long)]
    vertices: Option<usize>,

    /// Cardinality distribution: fixed:K, uniform:K, or normal:MU,STD
    #[arg(long, default_value = "uniform:4")]
    card: String,

    /// RNG seed; reports are reproducible given the seed
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Arena growth factor applied when incidence storage runs out
    #[arg(long, default_value_t = 2.0)]
    overprovision: f64,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    src: CommonArgs,

    /// Motif families to count
    #[arg(long, value_enum, default_value_t = Motif::All)]
    motif: Motif,

    /// Temporal window width, or "inf"
    #[arg(long, default_value = "inf")]
    t_delta: String,

    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    src: CommonArgs,

    /// Motif families to maintain
    #[arg(long, value_enum, default_value_t = Motif::All)]
    motif: Motif,

    /// Temporal window width, or "inf"
    #[arg(long, default_value = "inf")]
    t_delta: String,

    /// Number of change batches to replay
    #[arg(long, default_value_t = 10)]
    batches: usize,

    /// Operations per batch
    #[arg(long, default_value_t = 100)]
    batch_size: usize,

    /// Fraction of each batch deleting live hyperedges
    #[arg(long, default_value_t = 0.5)]
    delete_pct: f64,

    /// Fraction of each batch modifying incident vertices of live hyperedges
    #[arg(long, default_value_t = 0.0)]
    modify_pct: f64,

    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write a per-batch CSV timing table here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    src: CommonArgs,

    /// Destination edge-lines file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    EdgeLines,
    #[value(name = "simplicial-3file")]
    Simplicial3File,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::EdgeLines => "edge-lines",
            Format::Simplicial3File => "simplicial-3file",
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Motif {
    Hyperedge,
    Vertex,
    Temporal,
    All,
}

impl Motif {
    fn set(self) -> MotifSet {
        match self {
            Motif::Hyperedge => MotifSet::HYPEREDGE,
            Motif::Vertex => MotifSet::VERTEX,
            Motif::Temporal => MotifSet::TEMPORAL,
            Motif::All => MotifSet::ALL,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Motif::Hyperedge => "hyperedge",
            Motif::Vertex => "vertex",
            Motif::Temporal => "temporal",
            Motif::All => "all",
        }
    }
}

#[derive(Debug, Error)]
#[error("verification failed at batch {batch}: {what}")]
struct VerificationFailed {
    batch: usize,
    what: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Count(a) => run_count(a),
        Cmd::Update(a) => run_batches(a, Mode::Update),
        Cmd::Verify(a) => run_batches(a, Mode::Verify),
        Cmd::Bench(a) => run_batches(a, Mode::Bench),
        Cmd::Export(a) => run_export(a),
    }
}

#[derive(Copy, Clone, PartialEq)]
enum Mode {
    Update,
    Verify,
    Bench,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Update => "update",
            Mode::Verify => "verify",
            Mode::Bench => "bench",
        }
    }
}

struct Built {
    g: DynHypergraph,
    specs: Vec<EdgeSpec>,
    card: CardDist,
    rng: ChaCha8Rng,
    build: Duration,
}

fn setup(c: &CommonArgs) -> Result<Built> {
    if c.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(c.threads)
            .build_global()
            .context("worker pool")?;
    }
    let card: CardDist = c.card.parse().map_err(|e: String| anyhow!(e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let t0 = Instant::now();
    let specs = match (&c.input, c.edges) {
        (Some(path), _) => match c.format {
            Format::EdgeLines => ingest::parse_edge_lines(path)?,
            Format::Simplicial3File => ingest::parse_simplicial(path)?,
        },
        (None, Some(n)) => {
            let nv = c
                .vertices
                .context("--vertices is required with --edges")?;
            gen_random(n, nv, card, true, &mut rng)
        }
        (None, None) => bail!("provide --input or --edges/--vertices"),
    };
    let g = DynHypergraph::init(
        specs.clone(),
        HypergraphConfig {
            overprovision: c.overprovision,
        },
    )?;
    Ok(Built {
        g,
        specs,
        card,
        rng,
        build: t0.elapsed(),
    })
}

fn parse_window(s: &str) -> Result<TimeWindow> {
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinite") {
        return Ok(TimeWindow::Infinite);
    }
    Ok(TimeWindow::Finite(
        s.parse().context("--t-delta takes an integer or \"inf\"")?,
    ))
}

fn require_timestamps(motif: Motif, g: &DynHypergraph) -> Result<()> {
    if matches!(motif, Motif::Temporal) && !g.all_timestamped() {
        bail!("temporal motifs need a timestamp on every hyperedge");
    }
    Ok(())
}

fn echo(
    c: &CommonArgs,
    motif: Motif,
    t_delta: &str,
    sched: Option<&RunArgs>,
) -> ConfigEcho {
    ConfigEcho {
        input: c.input.as_ref().map(|p| p.display().to_string()),
        format: c.input.as_ref().map(|_| c.format.name()),
        gen_edges: c.edges,
        gen_vertices: c.vertices,
        card: c.card.clone(),
        motif: motif.name(),
        t_delta: t_delta.to_string(),
        batches: sched.map(|a| a.batches),
        batch_size: sched.map(|a| a.batch_size),
        delete_pct: sched.map(|a| a.delete_pct),
        modify_pct: sched.map(|a| a.modify_pct),
        seed: c.seed,
        threads: c.threads,
        overprovision: c.overprovision,
    }
}

fn final_report(g: &DynHypergraph, state: &CountState) -> FinalReport {
    let max_cardinality = g
        .live_edges()
        .iter()
        .map(|&e| g.cardinality(e).unwrap_or(0))
        .max()
        .unwrap_or(0);
    let s = g.storage_stats();
    FinalReport {
        counts: counts_report(
            &state.counts,
            state.motifs.hyperedge,
            state.motifs.vertex,
            state.temporal_enabled(),
        ),
        edges: g.edge_count(),
        vertices: g.vertex_count(),
        max_cardinality,
        storage: StorageEcho {
            h2v_slots: s.h2v_slots,
            h2v_watermark: s.h2v_watermark,
            v2h_slots: s.v2h_slots,
            v2h_watermark: s.v2h_watermark,
            free_edge_nodes: s.free_edge_nodes,
        },
    }
}

fn emit(report: &RunReport, out: Option<&Path>, csv: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match out {
        Some(p) => fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{json}"),
    }
    if let Some(p) = csv {
        fs::write(p, csv_table(&report.batches))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run_count(a: CountArgs) -> Result<()> {
    let built = setup(&a.src)?;
    require_timestamps(a.motif, &built.g)?;
    let motifs = a.motif.set();
    let params = TemporalParams {
        t_delta: parse_window(&a.t_delta)?,
    };
    let t0 = Instant::now();
    let state = recount(&built.g, params, motifs)?;
    let count_ms = ms(t0.elapsed());
    let report = RunReport {
        mode: "count",
        config: echo(&a.src, a.motif, &a.t_delta, None),
        class_patterns: class_patterns(),
        build_ms: ms(built.build),
        count_ms: Some(count_ms),
        batches: vec![],
        median_speedup: None,
        final_state: final_report(&built.g, &state),
    };
    emit(&report, a.out.as_deref(), None)
}

/// First divergent component between the engine's counters and a reference
/// set, restricted to the families that were actually maintained.
fn diff_counts(
    state: &CountState,
    truth: &TriadCounts,
) -> Option<String> {
    if state.motifs.hyperedge {
        for c in 0..NUM_CLASSES {
            let (got, want) = (
                state.counts.hyperedge_by_class[c],
                truth.hyperedge_by_class[c],
            );
            if got != want {
                return Some(format!(
                    "hyperedge class {c} (pattern {}): engine {got}, reference {want}",
                    pattern_string(c)
                ));
            }
        }
    }
    if state.motifs.vertex {
        for k in 0..3 {
            let (got, want) = (state.counts.vertex_by_type[k], truth.vertex_by_type[k]);
            if got != want {
                return Some(format!(
                    "vertex type {}: engine {got}, reference {want}",
                    k + 1
                ));
            }
        }
    }
    if state.temporal_enabled() {
        if state.counts.temporal_total != truth.temporal_total {
            return Some(format!(
                "temporal total: engine {}, reference {}",
                state.counts.temporal_total, truth.temporal_total
            ));
        }
        for c in 0..NUM_CLASSES {
            let (got, want) = (
                state.counts.temporal_by_class[c],
                truth.temporal_by_class[c],
            );
            if got != want {
                return Some(format!(
                    "temporal class {c} (pattern {}): engine {got}, reference {want}",
                    pattern_string(c)
                ));
            }
        }
    }
    None
}

fn oracle_count(r: &RefHypergraph, params: TemporalParams) -> Result<TriadCounts> {
    ref_count_all(r, params).map_err(|e| {
        anyhow!(e).context("reference recount caps the instance size; shrink it to verify")
    })
}

fn median(xs: &mut Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    })
}

fn run_batches(a: RunArgs, mode: Mode) -> Result<()> {
    let mut built = setup(&a.src)?;
    require_timestamps(a.motif, &built.g)?;
    let motifs = a.motif.set();
    let params = TemporalParams {
        t_delta: parse_window(&a.t_delta)?,
    };
    let universe = a.src.vertices.unwrap_or_else(|| {
        (built.g.vertices().into_iter().max().unwrap_or(1).max(1)) as usize
    });

    let mut state = recount(&built.g, params, motifs)?;
    let mut oracle = if mode == Mode::Verify {
        let r = RefHypergraph::from_specs(&built.specs);
        let truth = oracle_count(&r, params)?;
        if let Some(what) = diff_counts(&state, &truth) {
            return Err(VerificationFailed { batch: 0, what }.into());
        }
        Some(r)
    } else {
        None
    };

    let mut batch_reports = Vec::with_capacity(a.batches);
    let mut speedups = Vec::new();
    for b in 1..=a.batches {
        let batch = gen_mixed_batch(
            &built.g,
            a.batch_size,
            a.delete_pct,
            a.modify_pct,
            built.card,
            universe,
            &mut built.rng,
        );
        let ops = OpsEcho {
            deletes: batch.deletes.len(),
            inserts: batch.inserts.len(),
            vertex_inserts: batch.vertex_inserts.len(),
            vertex_deletes: batch.vertex_deletes.len(),
        };
        let timings = apply_and_update(&mut state, &mut built.g, &batch)?;
        let mut t = TimingsMs {
            region: ms(timings.region),
            delete: ms(timings.delete),
            insert: ms(timings.insert),
            modify: ms(timings.modify),
            count: ms(timings.count_del + timings.count_ins),
            total: ms(timings.total()),
            recount: None,
            speedup: None,
        };
        match mode {
            Mode::Verify => {
                let r = oracle.take().unwrap();
                let r = ref_apply(r, &batch).map_err(|e| match e {
                    RefError::OracleCapExceeded { .. } => anyhow!(e),
                    other => VerificationFailed {
                        batch: b,
                        what: format!("reference rejected the batch: {other}"),
                    }
                    .into(),
                })?;
                let truth = oracle_count(&r, params)?;
                if let Some(what) = diff_counts(&state, &truth) {
                    return Err(VerificationFailed { batch: b, what }.into());
                }
                oracle = Some(r);
            }
            Mode::Bench => {
                let t0 = Instant::now();
                let base = recount(&built.g, params, motifs)?;
                let rec = t0.elapsed();
                if base.counts != state.counts {
                    let what = diff_counts(&state, &base.counts)
                        .unwrap_or_else(|| "counter mismatch".to_string());
                    return Err(VerificationFailed { batch: b, what }.into());
                }
                let sp = rec.as_secs_f64() / timings.total().as_secs_f64().max(1e-9);
                t.recount = Some(ms(rec));
                t.speedup = Some(sp);
                speedups.push(sp);
            }
            Mode::Update => {}
        }
        batch_reports.push(BatchReport {
            batch: b,
            ops,
            counts: counts_report(
                &state.counts,
                motifs.hyperedge,
                motifs.vertex,
                state.temporal_enabled(),
            ),
            timings_ms: t,
        });
    }

    let report = RunReport {
        mode: mode.name(),
        config: echo(&a.src, a.motif, &a.t_delta, Some(&a)),
        class_patterns: class_patterns(),
        build_ms: ms(built.build),
        count_ms: None,
        batches: batch_reports,
        median_speedup: median(&mut speedups),
        final_state: final_report(&built.g, &state),
    };
    emit(&report, a.out.as_deref(), a.csv.as_deref())
}

fn run_export(a: ExportArgs) -> Result<()> {
    let built = setup(&a.src)?;
    let (written, skipped) = ingest::export_edge_lines(&built.g, &a.out)?;
    println!(
        "{}",
        serde_json::json!({
            "mode": "export",
            "path": a.out.display().to_string(),
            "edges_written": written,
            "edges_skipped": skipped,
        })
    );
    Ok(())
}
