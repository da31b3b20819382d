//! The commands, as library functions writing into an output directory.

use std::path::{Path, PathBuf};

use anyhow::Context as _;
use bikegrow_core::growth::{
    self, GrowthParams, GrowthRun, GrowthSnapshot, Prepared, Triangulation,
};
use bikegrow_core::ingest::{self, CrashPoint, OdRecord, SnapOutcome, TripSet, SNAP_CAP_M};
use bikegrow_core::metrics::{self, MetricsRow};
use bikegrow_core::sample::sample_indices;
use bikegrow_core::SpatialNetwork;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, RunConfig};
use crate::formats::{self, FormatError};
use crate::output::{self, label, snapshot_file_name, write_json};

/// A command failure with its exit code class.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files (exit code 2).
    Input(anyhow::Error),
    /// A broken internal guarantee (exit code 3).
    Invariant(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Invariant(e) => e,
        }
    }
}

impl From<bikegrow_core::Error> for Failure {
    fn from(e: bikegrow_core::Error) -> Self {
        match e {
            bikegrow_core::Error::Invariant(_) => Failure::Invariant(e.into()),
            other => Failure::Input(other.into()),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Input(e.into())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Input(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.into())
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Input(anyhow::anyhow!(msg.into()))
}

fn create_dir(path: &Path) -> CmdResult {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_value(path: &Path, value: &Value) -> CmdResult {
    write_json(path, value).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDigest {
    pub role: &'static str,
    pub file: String,
    pub sha256: String,
}

fn digest(role: &'static str, path: &Path) -> CmdResult<InputDigest> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InputDigest {
        role,
        file: path
            .file_name()
            .map_or_else(String::new, |f| f.to_string_lossy().into_owned()),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Everything read from disk for a growth or evaluation run.
pub struct Inputs {
    /// Street and bike network as given; used for trips and evaluation.
    pub full: SpatialNetwork,
    /// `full` after the density mask; used for growth.
    pub growth: SpatialNetwork,
    pub crashes: Vec<CrashPoint>,
    pub od: Vec<OdRecord>,
    pub digests: Vec<InputDigest>,
}

pub fn load_inputs(cfg: &RunConfig) -> CmdResult<Inputs> {
    let nodes = cfg.require(&cfg.nodes, "nodes")?;
    let edges = cfg.require(&cfg.edges, "edges")?;
    let crashes_path = cfg.require(&cfg.crashes, "crashes")?;
    let od_path = cfg.require(&cfg.od, "od")?;
    let mut digests = vec![
        digest("nodes", nodes)?,
        digest("edges", edges)?,
        digest("crashes", crashes_path)?,
        digest("od", od_path)?,
    ];
    let full = formats::load_network(nodes, edges)?;
    let growth = match &cfg.zones {
        Some(z) => {
            digests.push(digest("zones", z)?);
            ingest::apply_density_mask(&full, &formats::load_zones(z)?, cfg.density_threshold)
        }
        None => full.clone(),
    };
    Ok(Inputs {
        full,
        growth,
        crashes: formats::load_crashes(crashes_path)?,
        od: formats::load_od(od_path)?,
        digests,
    })
}

/// Trips for weighting and snapped pairs for evaluation.
pub struct Samples {
    pub trips: TripSet,
    pub weighting_sampled: usize,
    pub evaluation: Vec<SnapOutcome>,
}

fn sample(od: &[OdRecord], k: usize, seed: u64) -> Vec<OdRecord> {
    sample_indices(od.len(), k, seed)
        .into_iter()
        .map(|i| od[i])
        .collect()
}

pub fn draw_samples(cfg: &RunConfig, inputs: &Inputs) -> Samples {
    let weighting = sample(&inputs.od, cfg.sample_size, cfg.seed);
    let evaluation = if cfg.reuse_weighting_sample {
        weighting.clone()
    } else {
        sample(&inputs.od, cfg.sample_size, cfg.seed.wrapping_add(1))
    };
    Samples {
        trips: ingest::od_to_trips(&inputs.full, &weighting, SNAP_CAP_M),
        weighting_sampled: weighting.len(),
        evaluation: ingest::snap_od(&inputs.full, &evaluation, SNAP_CAP_M),
    }
}

pub fn prepare(
    cfg: &RunConfig,
    inputs: &Inputs,
    samples: &Samples,
    delta: f64,
    triangulation: Triangulation,
) -> CmdResult<Prepared> {
    let params = GrowthParams {
        delta,
        buffer: cfg.buffer,
        triangulation,
    };
    Ok(growth::prepare(
        &inputs.growth,
        &samples.trips.trips,
        &inputs.crashes,
        params,
    )?)
}

fn check_run(run: &GrowthRun) -> CmdResult {
    let mut prev = 0;
    for s in &run.snapshots {
        let ok = s.selected.len() >= prev
            && (s.exhausted || s.cumulative_km >= s.d_km)
            && s.selected
                .iter()
                .zip(&run.ranking)
                .all(|(a, r)| *a == r.link);
        if !ok {
            return Err(Failure::Invariant(anyhow::anyhow!(
                "snapshot at D={} km breaks the budget or prefix rule",
                s.d_km
            )));
        }
        prev = s.selected.len();
    }
    Ok(())
}

fn manifest(
    cfg: &RunConfig,
    inputs: &Inputs,
    samples: &Samples,
    prepared: &Prepared,
    run: &GrowthRun,
) -> Value {
    let snapshots: Vec<Value> = run
        .snapshots
        .iter()
        .map(|s| {
            json!({
                "D_km": s.d_km,
                "file": snapshot_file_name(s.d_km),
                "links": s.selected.len(),
                "cumulative_km": s.cumulative_km,
                "exhausted": s.exhausted,
            })
        })
        .collect();
    let digests: Vec<Value> = inputs
        .digests
        .iter()
        .map(|d| json!({"role": d.role, "file": d.file, "sha256": d.sha256}))
        .collect();
    let p = &prepared.params;
    json!({
        "alpha": run.alpha,
        "delta": p.delta,
        "buffer": p.buffer,
        "D_max": cfg.d_max,
        "step": cfg.step,
        "triangulation": p.triangulation.as_str(),
        "seed": cfg.seed,
        "sample_size": cfg.sample_size,
        "density_threshold": cfg.density_threshold,
        "inputs": digests,
        "counts": {
            "nodes": inputs.full.node_count(),
            "edges": inputs.full.edge_count(),
            "masked_nodes": inputs.full.node_count() - inputs.growth.node_count(),
            "masked_edges": inputs.full.edge_count() - inputs.growth.edge_count(),
            "crashes": inputs.crashes.len(),
            "od_records": inputs.od.len(),
            "od_sampled": samples.weighting_sampled,
            "trips": samples.trips.trips.len(),
            "trips_dropped_too_far": samples.trips.too_far,
            "trips_dropped_same_node": samples.trips.same_node,
            "trips_dropped_unreachable": samples.trips.unreachable,
            "seeds": prepared.seeds.len(),
            "candidates": prepared.candidates,
            "candidates_dropped_unroutable": prepared.dropped_unroutable,
            "existing_links": prepared.links.len() - prepared.candidates,
        },
        "snapshots": snapshots,
    })
}

/// Writes one growth run's snapshots and manifest into `dir`.
pub fn write_run(
    dir: &Path,
    cfg: &RunConfig,
    inputs: &Inputs,
    samples: &Samples,
    prepared: &Prepared,
    run: &GrowthRun,
) -> CmdResult {
    create_dir(dir)?;
    for s in &run.snapshots {
        write_value(
            &dir.join(snapshot_file_name(s.d_km)),
            &output::snapshot_geojson(prepared, run, s),
        )?;
    }
    write_value(
        &dir.join("manifest.json"),
        &manifest(cfg, inputs, samples, prepared, run),
    )
}

pub fn evaluate(
    cfg: &RunConfig,
    inputs: &Inputs,
    samples: &Samples,
    snapshots: &[GrowthSnapshot],
) -> CmdResult<Vec<MetricsRow>> {
    Ok(metrics::evaluate_snapshots(
        &inputs.full,
        snapshots,
        &inputs.crashes,
        &samples.evaluation,
        &cfg.detours,
        cfg.buffer,
    )?)
}

pub fn alpha_dir(base: &Path, alpha: f64) -> PathBuf {
    base.join(format!("alpha_{}", label(alpha)))
}

/// `grow`: one run per alpha, each in `<output>/alpha_<a>/`.
pub fn cmd_grow(cfg: &RunConfig, with_metrics: bool) -> CmdResult {
    let inputs = load_inputs(cfg)?;
    let samples = draw_samples(cfg, &inputs);
    let prepared = prepare(cfg, &inputs, &samples, cfg.delta, cfg.triangulation)?;
    for &alpha in &cfg.alphas {
        let run = prepared.run(alpha, cfg.d_max, cfg.step)?;
        check_run(&run)?;
        let dir = alpha_dir(&cfg.output, alpha);
        write_run(&dir, cfg, &inputs, &samples, &prepared, &run)?;
        if with_metrics {
            let rows = evaluate(cfg, &inputs, &samples, &run.snapshots)?;
            write_text(
                &dir.join("metrics.csv"),
                &output::metrics_csv(&rows, &cfg.detours),
            )?;
        }
    }
    Ok(())
}

/// Snapshots listed in a run directory's manifest.
pub fn read_run_dir(dir: &Path) -> CmdResult<Vec<GrowthSnapshot>> {
    let manifest_path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let doc: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
    let list = doc
        .get("snapshots")
        .and_then(Value::as_array)
        .ok_or_else(|| usage(format!("{}: no snapshot list", manifest_path.display())))?;
    let mut out = Vec::with_capacity(list.len());
    for entry in list {
        let file = entry.get("file").and_then(Value::as_str).ok_or_else(|| {
            usage(format!(
                "{}: snapshot entry without file",
                manifest_path.display()
            ))
        })?;
        let path = dir.join(file);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("missing snapshot {}", path.display()))?;
        out.push(output::parse_snapshot(&text, &path)?);
    }
    Ok(out)
}

/// `evaluate`: metrics of the snapshots in `snapshots` (baseline only when
/// absent), written to `<output>/metrics.csv`.
pub fn cmd_evaluate(cfg: &RunConfig, snapshots: Option<&Path>) -> CmdResult {
    let snaps = match snapshots {
        Some(dir) => read_run_dir(dir)?,
        None => Vec::new(),
    };
    let inputs = load_inputs(cfg)?;
    let samples = draw_samples(cfg, &inputs);
    let rows = evaluate(cfg, &inputs, &samples, &snaps)?;
    create_dir(&cfg.output)?;
    write_text(
        &cfg.output.join("metrics.csv"),
        &output::metrics_csv(&rows, &cfg.detours),
    )
}

/// `sweep`: metrics for every (delta, alpha) pair, written as
/// `<output>/metrics_delta<d>_alpha<a>.csv`.
pub fn cmd_sweep(cfg: &RunConfig) -> CmdResult {
    if cfg.deltas.is_empty() || cfg.alphas.is_empty() {
        return Err(usage("sweep needs at least one delta and one alpha"));
    }
    let inputs = load_inputs(cfg)?;
    let samples = draw_samples(cfg, &inputs);
    create_dir(&cfg.output)?;
    for &delta in &cfg.deltas {
        let prepared = prepare(cfg, &inputs, &samples, delta, cfg.triangulation)?;
        for &alpha in &cfg.alphas {
            let run = prepared.run(alpha, cfg.d_max, cfg.step)?;
            check_run(&run)?;
            let rows = evaluate(cfg, &inputs, &samples, &run.snapshots)?;
            let name = format!("metrics_delta{}_alpha{}.csv", label(delta), label(alpha));
            write_text(
                &cfg.output.join(name),
                &output::metrics_csv(&rows, &cfg.detours),
            )?;
        }
    }
    Ok(())
}

/// Improvement at `d_km` over the `D = 0` row of a metrics table.
fn improvement(table: &output::Table, column: &str, d_km: f64, path: &Path) -> CmdResult<f64> {
    let d = table
        .column("D_km")
        .ok_or_else(|| usage(format!("{}: no D_km column", path.display())))?;
    let c = table
        .column(column)
        .ok_or_else(|| usage(format!("{}: no {column} column", path.display())))?;
    let at = |x: f64| {
        table
            .rows
            .iter()
            .find(|r| (r[d] - x).abs() <= 1e-9)
            .map(|r| r[c])
            .ok_or_else(|| usage(format!("{}: no row for D={x} km", path.display())))
    };
    Ok(metrics::potential_improvement(at(d_km)?, at(0.0)?))
}

/// `tradeoff`: alpha* from per-alpha metrics CSVs.
pub fn cmd_tradeoff(curves: &[(f64, PathBuf)], d_km: f64, trip_column: &str) -> CmdResult<Value> {
    if curves.len() < 2 {
        return Err(usage("tradeoff needs at least two --curve values"));
    }
    let mut samples = Vec::with_capacity(curves.len());
    for (alpha, path) in curves {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let table = output::parse_table(&text, path)?;
        samples.push((
            *alpha,
            improvement(&table, trip_column, d_km, path)?,
            improvement(&table, "crash_cov", d_km, path)?,
        ));
    }
    Ok(output::tradeoff_json(&metrics::tradeoff_alpha(
        &samples, d_km,
    )?))
}

/// `compare`: greedy and Delaunay growth for each alpha on one ingestion
/// pass, with per-D km overlap and both metric tables.
pub fn cmd_compare(cfg: &RunConfig, at_d: f64) -> CmdResult {
    let inputs = load_inputs(cfg)?;
    let samples = draw_samples(cfg, &inputs);
    let greedy = prepare(cfg, &inputs, &samples, cfg.delta, Triangulation::Greedy)?;
    let delaunay = prepare(cfg, &inputs, &samples, cfg.delta, Triangulation::Delaunay)?;
    for &alpha in &cfg.alphas {
        let dir = alpha_dir(&cfg.output, alpha);
        create_dir(&dir)?;
        let g = greedy.run(alpha, cfg.d_max, cfg.step)?;
        let d = delaunay.run(alpha, cfg.d_max, cfg.step)?;
        check_run(&g)?;
        check_run(&d)?;
        let mut csv = String::from("D_km,greedy_in_delaunay,delaunay_in_greedy,mean\n");
        let mut means = Vec::new();
        let mut at = Value::Null;
        for (sg, sd) in g.snapshots.iter().zip(&d.snapshots) {
            let o = metrics::network_overlap(&inputs.growth, &sg.charged_edges, &sd.charged_edges);
            match &o {
                Ok(o) => {
                    csv.push_str(&format!(
                        "{},{:.6},{:.6},{:.6}\n",
                        label(sg.d_km),
                        o.a_in_b,
                        o.b_in_a,
                        o.mean
                    ));
                    means.push(o.mean);
                }
                Err(_) => csv.push_str(&format!("{},,,\n", label(sg.d_km))),
            }
            if (sg.d_km - at_d).abs() <= 1e-9 {
                if let Ok(o) = o {
                    at = json!({"greedy_in_delaunay": o.a_in_b, "delaunay_in_greedy": o.b_in_a, "mean": o.mean});
                }
            }
        }
        write_text(&dir.join("overlap.csv"), &csv)?;
        let mean = if means.is_empty() {
            Value::Null
        } else {
            json!(means.iter().sum::<f64>() / means.len() as f64)
        };
        write_value(
            &dir.join("summary.json"),
            &json!({"alpha": alpha, "mean_overlap": mean, "at_D_km": at_d, "overlap_at_D": at}),
        )?;
        for (name, prepared, run) in [("greedy", &greedy, &g), ("delaunay", &delaunay, &d)] {
            write_run(&dir.join(name), cfg, &inputs, &samples, prepared, run)?;
            let rows = evaluate(cfg, &inputs, &samples, &run.snapshots)?;
            write_text(
                &dir.join(format!("metrics_{name}.csv")),
                &output::metrics_csv(&rows, &cfg.detours),
            )?;
        }
    }
    Ok(())
}

/// `extract-trips`: movements from a snapshot log into `<output>/od.csv`
/// plus `<output>/extract_report.json`. Returns the report.
pub fn cmd_extract_trips(cfg: &RunConfig) -> CmdResult<Value> {
    let log_path = cfg.require(&cfg.snapshot_log, "snapshot-log")?;
    let (log, issues) = formats::load_snapshot_log(log_path)?;
    for i in &issues {
        eprintln!("{}: line {}: {}", log_path.display(), i.line, i.message);
    }
    let report = ingest::extract_movements(&log);
    create_dir(&cfg.output)?;
    let mut od = Vec::new();
    formats::write_od(&mut od, &report.records)?;
    std::fs::write(cfg.output.join("od.csv"), od)?;
    let mut value = json!({
        "rows_read": log.len(),
        "rows_malformed": issues.len(),
        "malformed_lines": issues.iter().map(|i| i.line).collect::<Vec<_>>(),
        "snapshot_pairs": report.pairs,
        "records": report.records.len(),
        "dropped_too_short": report.too_short,
        "dropped_too_slow": report.too_slow,
        "dropped_charging": report.charging,
        "dropped_relocation": report.relocation,
    });
    if let (Some(nodes), Some(edges)) = (&cfg.nodes, &cfg.edges) {
        let net = formats::load_network(nodes, edges)?;
        let trips = ingest::od_to_trips(&net, &report.records, SNAP_CAP_M);
        value["trips_routed"] = json!(trips.trips.len());
        value["trips_dropped_too_far"] = json!(trips.too_far);
        value["trips_dropped_same_node"] = json!(trips.same_node);
        value["trips_dropped_unreachable"] = json!(trips.unreachable);
    }
    write_value(&cfg.output.join("extract_report.json"), &value)?;
    Ok(value)
}
