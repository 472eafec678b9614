//! Replicate fan-out, seed derivation and aggregation.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::ScenarioSpec;
use crate::adr::Strategy;
use crate::error::{Error, Result};
use crate::sim::{self, RunOutput};
use crate::space::ConfigSpace;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; rayon's default when `None`.
    pub jobs: Option<usize>,
    pub record_trace: bool,
}

/// One (strategy, dimension set, sweep value, replicate) run.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub strategy: Strategy,
    pub dims: usize,
    pub sweep_value: f64,
    pub replicate: u32,
    pub seed: u64,
}

/// Seed for one cell, stable across thread counts and run order.
pub fn derive_seed(
    master: u64,
    strategy: Strategy,
    dims: &str,
    sweep_value: f64,
    replicate: u32,
) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(strategy.name().as_bytes());
    h.update([0]);
    h.update(dims.as_bytes());
    h.update([0]);
    h.update(sweep_value.to_bits().to_le_bytes());
    h.update(replicate.to_le_bytes());
    let digest = h.finalize();
    // Kept below 2^63 so seeds survive a TOML round trip.
    u64::from_le_bytes(digest[..8].try_into().unwrap()) >> 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateRow {
    pub scenario: String,
    pub strategy: Strategy,
    pub dims: String,
    pub k_size: usize,
    pub num_eds: u32,
    pub sigma_db: f64,
    pub sweep_value: f64,
    pub replicate: u32,
    pub seed: u64,
    pub airtime_mode: String,
    pub packets_sent: u64,
    pub packets_received: u64,
    pub pdr: Option<f64>,
    pub total_energy_j: f64,
    pub ec_j: Option<f64>,
    /// `ok` or `failed: <reason>`.
    pub status: String,
}

impl ReplicateRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub dims: String,
    pub k_size: usize,
    pub sweep_value: f64,
    pub replicates: usize,
    pub pdr_mean: Option<f64>,
    /// Half-width of the 95% normal interval; needs two or more replicates.
    pub pdr_ci95: Option<f64>,
    pub ec_mean_j: Option<f64>,
    pub ec_ci95_j: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub scenario: String,
    pub sweep_variable: String,
    pub sweep_unit: String,
    pub multi_dims: bool,
    pub replicates: Vec<ReplicateRow>,
    pub summary: Vec<SummaryRow>,
}

impl ResultTable {
    pub fn failures(&self) -> impl Iterator<Item = &ReplicateRow> {
        self.replicates.iter().filter(|r| !r.ok())
    }

    pub fn find(&self, strategy: Strategy, dims: &str, sweep_value: f64) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.strategy == strategy && r.dims == dims && r.sweep_value == sweep_value)
    }
}

pub struct ScenarioRun {
    pub spec: ScenarioSpec,
    pub table: ResultTable,
    /// Per-cell traces, only when requested.
    pub traces: Vec<(Cell, RunOutput)>,
}

fn cells(spec: &ScenarioSpec) -> Vec<Cell> {
    let mut out = Vec::new();
    for &strategy in &spec.strategies {
        for (d, dims) in spec.dimensions.iter().enumerate() {
            for v in spec.sweep.values() {
                for replicate in 0..spec.replicates {
                    out.push(Cell {
                        strategy,
                        dims: d,
                        sweep_value: v,
                        replicate,
                        seed: derive_seed(spec.seed, strategy, &dims.label, v, replicate),
                    });
                }
            }
        }
    }
    out
}

fn run_cell(
    spec: &ScenarioSpec,
    space: &ConfigSpace,
    cell: &Cell,
    trace: bool,
) -> Result<RunOutput> {
    let mut cfg = spec.sim_config(cell.strategy, cell.dims, cell.sweep_value)?;
    cfg.record_trace = trace;
    sim::run(&cfg, space, cell.seed)
}

/// Runs every cell of the scenario. A failing cell is reported in its row
/// and does not stop the others.
pub fn run_scenario(spec: &ScenarioSpec, opts: &RunOptions) -> Result<ScenarioRun> {
    spec.validate()?;
    let spaces = spec
        .dimensions
        .iter()
        .map(|d| ConfigSpace::build(d, &spec.radio, spec.airtime_mode))
        .collect::<Result<Vec<_>>>()?;
    let cells = cells(spec);

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = opts.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    let results: Vec<Result<RunOutput>> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                log::debug!(
                    "running {} {} {} #{}",
                    c.strategy,
                    spec.dimensions[c.dims].label,
                    c.sweep_value,
                    c.replicate
                );
                run_cell(spec, &spaces[c.dims], c, opts.record_trace)
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(cells.len());
    let mut traces = Vec::new();
    for (cell, result) in cells.into_iter().zip(results) {
        let cfg = spec.sim_config(cell.strategy, cell.dims, cell.sweep_value)?;
        let mut row = ReplicateRow {
            scenario: spec.name.clone(),
            strategy: cell.strategy,
            dims: spec.dimensions[cell.dims].label.clone(),
            k_size: spaces[cell.dims].len(),
            num_eds: cfg.num_eds,
            sigma_db: cfg.channel.sigma_db,
            sweep_value: cell.sweep_value,
            replicate: cell.replicate,
            seed: cell.seed,
            airtime_mode: spec.airtime_mode.to_string(),
            packets_sent: 0,
            packets_received: 0,
            pdr: None,
            total_energy_j: 0.0,
            ec_j: None,
            status: "ok".into(),
        };
        match result {
            Ok(out) => {
                let s = out.metrics.summary();
                row.packets_sent = out.metrics.packets_sent;
                row.packets_received = out.metrics.packets_received;
                row.pdr = s.pdr;
                row.total_energy_j = out.metrics.total_energy_j;
                row.ec_j = s.ec_j;
                if opts.record_trace {
                    traces.push((cell, out));
                }
            }
            Err(e) => {
                log::error!(
                    "cell {} / {} / {} #{} failed: {e}",
                    row.strategy,
                    row.dims,
                    row.sweep_value,
                    row.replicate
                );
                row.status = format!("failed: {e}");
            }
        }
        rows.push(row);
    }

    let table = aggregate(spec, rows);
    Ok(ScenarioRun {
        spec: spec.clone(),
        table,
        traces,
    })
}

fn mean_ci(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some(1.96 * (var / n as f64).sqrt()))
}

/// Groups replicate rows into summary rows sorted by (strategy, dims, sweep value).
pub fn aggregate(spec: &ScenarioSpec, mut rows: Vec<ReplicateRow>) -> ResultTable {
    let dims_order = |label: &str| spec.dimensions.iter().position(|d| d.label == label);
    rows.sort_by(|a, b| {
        a.strategy
            .cmp(&b.strategy)
            .then(dims_order(&a.dims).cmp(&dims_order(&b.dims)))
            .then(a.sweep_value.total_cmp(&b.sweep_value))
            .then(a.replicate.cmp(&b.replicate))
    });
    let mut summary = Vec::new();
    for group in rows.chunk_by(|a, b| {
        a.strategy == b.strategy && a.dims == b.dims && a.sweep_value == b.sweep_value
    }) {
        let ok: Vec<_> = group.iter().filter(|r| r.ok()).collect();
        let pdrs: Vec<f64> = ok.iter().filter_map(|r| r.pdr).collect();
        let ecs: Vec<f64> = ok.iter().filter_map(|r| r.ec_j).collect();
        let (pdr_mean, pdr_ci95) = mean_ci(&pdrs);
        let (ec_mean_j, ec_ci95_j) = mean_ci(&ecs);
        let first = &group[0];
        summary.push(SummaryRow {
            strategy: first.strategy,
            dims: first.dims.clone(),
            k_size: first.k_size,
            sweep_value: first.sweep_value,
            replicates: ok.len(),
            pdr_mean,
            pdr_ci95,
            ec_mean_j,
            ec_ci95_j,
        });
    }
    ResultTable {
        scenario: spec.name.clone(),
        sweep_variable: spec.sweep.variable().into(),
        sweep_unit: spec.sweep.unit().into(),
        multi_dims: spec.dimensions.len() > 1,
        replicates: rows,
        summary,
    }
}
