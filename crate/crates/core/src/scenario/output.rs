//! CSV tables, whitespace plot data and trace files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::runner::{Cell, ResultTable, ScenarioRun};
use crate::adr::Strategy;
use crate::error::{Error, Result};
use crate::sim::{DecisionRecord, TransmissionRecord};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_results_csv<W: Write>(table: &ResultTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "strategy",
        "dims",
        "k_size",
        "num_eds",
        "sigma",
        "replicate",
        "seed",
        "airtime_mode",
        "packets_sent",
        "packets_received",
        "pdr",
        "total_energy_j",
        "ec_j",
        "status",
    ])?;
    for r in &table.replicates {
        w.write_record([
            r.scenario.clone(),
            r.strategy.to_string(),
            r.dims.clone(),
            r.k_size.to_string(),
            r.num_eds.to_string(),
            r.sigma_db.to_string(),
            r.replicate.to_string(),
            r.seed.to_string(),
            r.airtime_mode.clone(),
            r.packets_sent.to_string(),
            r.packets_received.to_string(),
            opt(r.pdr),
            r.total_energy_j.to_string(),
            opt(r.ec_j),
            r.status.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("results.csv", e))?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(table: &ResultTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "strategy",
        "dims",
        "k_size",
        &table.sweep_variable,
        "replicates",
        "pdr_mean",
        "pdr_ci95",
        "ec_mean_j",
        "ec_ci95_j",
    ])?;
    for r in &table.summary {
        w.write_record([
            r.strategy.to_string(),
            r.dims.clone(),
            r.k_size.to_string(),
            r.sweep_value.to_string(),
            r.replicates.to_string(),
            opt(r.pdr_mean),
            opt(r.pdr_ci95),
            opt(r.ec_mean_j),
            opt(r.ec_ci95_j),
        ])?;
    }
    w.flush().map_err(|e| Error::io("summary.csv", e))?;
    Ok(())
}

/// One row per sweep value, two columns (PDR, EC) per series. Missing
/// values are written as `nan`.
pub fn write_plot_data<W: Write>(table: &ResultTable, mut out: W) -> std::io::Result<()> {
    let mut series: Vec<(String, Strategy, &str)> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for r in &table.summary {
        let label = if table.multi_dims {
            format!("{}/{}", r.strategy, r.dims)
        } else {
            r.strategy.to_string()
        };
        if !series.iter().any(|(l, _, _)| *l == label) {
            series.push((label, r.strategy, r.dims.as_str()));
        }
        if !xs.contains(&r.sweep_value) {
            xs.push(r.sweep_value);
        }
    }
    xs.sort_by(f64::total_cmp);

    writeln!(
        out,
        "# {}: PDR and EC versus {}",
        table.scenario, table.sweep_variable
    )?;
    writeln!(
        out,
        "# x = {} [{}]; pdr = mean delivery ratio; ec = total energy / pdr [J]",
        table.sweep_variable, table.sweep_unit
    )?;
    write!(out, "# {}", table.sweep_variable)?;
    for (label, _, _) in &series {
        write!(out, " {label}:pdr {label}:ec")?;
    }
    writeln!(out)?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "nan".into());
    for x in xs {
        write!(out, "{x}")?;
        for (_, strategy, dims) in &series {
            let row = table.find(*strategy, dims, x);
            write!(
                out,
                " {} {}",
                fmt(row.and_then(|r| r.pdr_mean)),
                fmt(row.and_then(|r| r.ec_mean_j))
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_transmissions_csv<W: Write>(records: &[TransmissionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "attempt", "time_s", "ed_id", "sf", "tp_dbm", "cf_mhz", "cr", "k_index", "energy_j",
        "rx_dbm", "snr_db", "outcome",
    ])?;
    for t in records {
        w.write_record([
            t.attempt.to_string(),
            t.time_s.to_string(),
            t.ed_id.to_string(),
            t.config.sf.to_string(),
            t.config.tp_dbm.to_string(),
            t.config.cf_mhz().to_string(),
            t.config.cr.to_string(),
            t.config_index.to_string(),
            t.energy_j.to_string(),
            t.rx_power_dbm.to_string(),
            t.snr_db.to_string(),
            t.outcome
                .map(|o| o.as_str())
                .unwrap_or("pending")
                .to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("transmissions", e))?;
    Ok(())
}

pub fn write_decisions_csv<W: Write>(records: &[DecisionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "time_s",
        "ed_id",
        "r_index",
        "branch",
        "new_index",
        "sf",
        "tp_dbm",
    ])?;
    for d in records {
        w.write_record([
            d.time_s.to_string(),
            d.ed_id.to_string(),
            d.r_index.to_string(),
            d.branch.as_str().to_string(),
            d.new_index.to_string(),
            d.sf.to_string(),
            d.tp_dbm.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("decisions", e))?;
    Ok(())
}

fn trace_stem(run: &ScenarioRun, cell: &Cell) -> String {
    format!(
        "{}_{}_{}_{}",
        cell.strategy, run.spec.dimensions[cell.dims].label, cell.sweep_value, cell.replicate
    )
}

/// Writes everything for a finished run into `dir` and returns the paths.
///
/// `scenario.toml` is the resolved echo, `failures.txt` is only present when
/// some cell failed.
pub fn write_outputs(run: &ScenarioRun, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join("scenario.toml");
    fs::write(&path, run.spec.to_toml()).map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let path = dir.join("results.csv");
    write_results_csv(&run.table, create(&path)?)?;
    written.push(path);

    let path = dir.join("summary.csv");
    write_summary_csv(&run.table, create(&path)?)?;
    written.push(path);

    let path = dir.join(format!("{}.dat", run.spec.name));
    let mut f = create(&path)?;
    write_plot_data(&run.table, &mut f)
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let failures: Vec<_> = run.table.failures().collect();
    let path = dir.join("failures.txt");
    if failures.is_empty() {
        if path.exists() {
            fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
    } else {
        let mut f = create(&path)?;
        for r in failures {
            writeln!(
                f,
                "{} {} {} {} seed={} {}",
                r.strategy, r.dims, r.sweep_value, r.replicate, r.seed, r.status
            )
            .map_err(|e| Error::io(&path, e))?;
        }
        f.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    if !run.traces.is_empty() {
        let traces = dir.join("traces");
        fs::create_dir_all(&traces).map_err(|e| Error::io(&traces, e))?;
        for (cell, out) in &run.traces {
            let stem = trace_stem(run, cell);
            let path = traces.join(format!("{stem}_transmissions.csv"));
            write_transmissions_csv(&out.transmissions, create(&path)?)?;
            written.push(path);
            let path = traces.join(format!("{stem}_decisions.csv"));
            write_decisions_csv(&out.decisions, create(&path)?)?;
            written.push(path);
        }
    }
    Ok(written)
}
