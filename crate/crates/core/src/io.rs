//! Run drivers and on-disk artifacts: a schema-versioned JSON summary, CSV
//! time series, field snapshots, characteristic tracks, and the parameter
//! sweep with its index file.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which round
//! trips f64 exactly, so reruns of the same configuration produce
//! byte-identical CSVs. The summary JSON is deterministic except for its
//! `wall_seconds` field.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::breaking::{
    breaking_outcome, certificate, convection_bound_excess, slope_inequality_excess,
    slope_ode_residual, source_bound_excess, BreakingCertificate, Outcome, SlopeOdeReport,
};
use crate::characteristics::{sign_preservation, SignReport};
use crate::config::SimConfig;
use crate::diagnostics::{
    default_gronwall_c, embedding_excess, gronwall_monitor, identity_residuals, verify_decay,
    DecayReport, DiagnosticsRecord, Identity, MonitorReport,
};
use crate::dynamics::{run, RunResult, TerminalStatus};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::spectral::SpectralWorkspace;

pub const SCHEMA_VERSION: u32 = 1;

/// Float formatting used in every CSV cell: 17 significant digits, which is
/// enough to reconstruct the exact f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidualSummary {
    /// Max-norm residuals of the three differential identities on a window
    /// of five consecutive samples; null when the window or the identity's
    /// domain is unavailable.
    pub momentum: Option<f64>,
    pub energy: Option<f64>,
    pub sqrt_momentum: Option<f64>,
    pub window_center_t: Option<f64>,
    pub note: String,
}

#[derive(Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub crate_version: &'static str,
    pub config: SimConfig,
    pub status: TerminalStatus,
    pub outcome: Outcome,
    pub final_t: f64,
    pub final_record: DiagnosticsRecord,
    pub certificate: BreakingCertificate,
    pub decay: DecayReport,
    pub monitor: MonitorReport,
    pub monitor_k: f64,
    pub monitor_c: f64,
    pub slope_ode: SlopeOdeReport,
    /// Largest violation of the one-sided slope bound; null when no interior
    /// sample was eligible.
    pub slope_inequality_excess: f64,
    pub convection_bound_excess: f64,
    pub source_bound_excess: f64,
    pub transport_residual_max: f64,
    pub sign_report: SignReport,
    pub identity: IdentityResidualSummary,
    pub embedding_excess: f64,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub snapshot_files: Vec<(f64, String)>,
    pub wall_seconds: f64,
    pub notes: Vec<String>,
}

fn write_timeseries(path: &Path, result: &RunResult) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,h0,h1,m_integral,m_h1,slope_min,slope_argmin,sup_u")?;
    for r in result.series.records() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.h0),
            fmt_f64(r.h1),
            fmt_f64(r.m_integral),
            fmt_f64(r.m_h1_norm),
            fmt_f64(r.slope_min),
            fmt_f64(r.slope_argmin),
            fmt_f64(r.sup_abs_u)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_snapshot(path: &Path, ws: &SpectralWorkspace, u: &Field) -> Result<()> {
    let u_xx = ws.derivative(u, 2)?;
    let m = u.add_scaled(-1.0, &u_xx)?;
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "x,u,m")?;
    for ((x, uv), mv) in ws
        .grid()
        .x()
        .iter()
        .zip(u.values())
        .zip(m.values())
    {
        writeln!(w, "{},{},{}", fmt_f64(*x), fmt_f64(*uv), fmt_f64(*mv))?;
    }
    w.flush()?;
    Ok(())
}

fn write_flow(path: &Path, result: &RunResult) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,seed,q,log_qx,m_qx2")?;
    for snap in result.flow.snapshots() {
        for i in 0..snap.q.len() {
            let m_qx2 = snap.m_at_q[i] * (2.0 * snap.log_qx[i]).exp();
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(snap.t),
                i,
                fmt_f64(snap.q[i]),
                fmt_f64(snap.log_qx[i]),
                fmt_f64(m_qx2)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Picks five consecutive samples from the uniform prefix of the series
/// (terminal samples can land off the uniform ladder) and evaluates the
/// differential identities there.
fn identity_summary(
    ws: &SpectralWorkspace,
    config: &SimConfig,
    result: &RunResult,
) -> IdentityResidualSummary {
    let recs = result.series.records();
    let mut uniform = 0usize;
    for (i, r) in recs.iter().enumerate() {
        if r.t == i as f64 * config.sample_interval {
            uniform = i + 1;
        } else {
            break;
        }
    }
    if uniform < 5 {
        return IdentityResidualSummary {
            momentum: None,
            energy: None,
            sqrt_momentum: None,
            window_center_t: None,
            note: format!(
                "needs five uniform samples, run provided {uniform}; residuals not evaluated"
            ),
        };
    }
    let center = (uniform / 2).clamp(2, uniform - 3);
    let slab: [Field; 5] = [
        result.sampled_fields[center - 2].clone(),
        result.sampled_fields[center - 1].clone(),
        result.sampled_fields[center].clone(),
        result.sampled_fields[center + 1].clone(),
        result.sampled_fields[center + 2].clone(),
    ];
    let dt = config.sample_interval;
    let p = &config.params;
    let momentum = identity_residuals(ws, p, &slab, dt, Identity::Momentum).ok();
    let energy = identity_residuals(ws, p, &slab, dt, Identity::Energy).ok();
    let (sqrt_momentum, sqrt_note) =
        match identity_residuals(ws, p, &slab, dt, Identity::SqrtMomentum) {
            Ok(r) => (Some(r), String::new()),
            Err(e) => (None, format!("; square-root identity skipped: {e}")),
        };
    IdentityResidualSummary {
        momentum,
        energy,
        sqrt_momentum,
        window_center_t: Some(recs[center].t),
        note: format!(
            "computed on samples {}..={} with the 4th-order time stencil at spacing {dt}{sqrt_note}",
            center - 2,
            center + 2
        ),
    }
}

/// Runs one configuration and writes timeseries.csv, flow.csv, snapshot
/// files, and summary.json into `out_dir`.
pub fn run_single(config: &SimConfig, out_dir: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    fs::create_dir_all(out_dir)?;
    let result = run(config)?;
    let ws = SpectralWorkspace::new(config.build_grid()?, config.dealias_fraction)?;
    let u0 = &result.sampled_fields[0];
    let cert = certificate(&ws, &config.params, u0);
    let decay = verify_decay(&result.series, config.params.lambda);
    let y0 = result.series.first().map(|r| r.slope_min).unwrap_or(0.0);
    let monitor_k = 2.0 * y0.abs().max(1.0);
    let monitor_c = default_gronwall_c(&config.params, cert.u0_h1);
    let monitor = gronwall_monitor(&result.series, monitor_k, monitor_c, config.params.lambda);
    let slope_ode = slope_ode_residual(&result.trace, &config.params, ws.grid());
    let inequality =
        slope_inequality_excess(&result.trace, &config.params, cert.u0_h1, ws.grid());
    let sign_report = sign_preservation(&result.flow, &config.params);
    let identity = identity_summary(&ws, config, &result);
    let outcome = breaking_outcome(&result.series, &result.status);

    write_timeseries(&out_dir.join("timeseries.csv"), &result)?;
    write_flow(&out_dir.join("flow.csv"), &result)?;
    let mut snapshot_files = Vec::new();
    for (i, (t, field)) in result.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:03}.csv");
        write_snapshot(&out_dir.join(&name), &ws, field)?;
        snapshot_files.push((*t, name));
    }

    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        crate_version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        status: result.status,
        outcome,
        final_t: result.final_t,
        final_record: *result.series.last().expect("series never empty"),
        certificate: cert,
        decay,
        monitor,
        monitor_k,
        monitor_c,
        slope_ode,
        slope_inequality_excess: inequality,
        convection_bound_excess: convection_bound_excess(&result.trace),
        source_bound_excess: source_bound_excess(&result.trace),
        transport_residual_max: result.flow.transport_residual(config.params.lambda),
        sign_report,
        identity,
        embedding_excess: embedding_excess(&result.series),
        steps_accepted: result.steps_accepted,
        steps_rejected: result.steps_rejected,
        snapshot_files,
        wall_seconds: started.elapsed().as_secs_f64(),
        notes: vec![
            "state is never spectrally filtered; only pointwise products are dealiased".into(),
            "non-finite summary numbers serialize as null".into(),
        ],
    };
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(out_dir.join("summary.json"), json + "\n")?;
    Ok(summary)
}

/// One row of the sweep index.
#[derive(Debug, Clone)]
pub struct CellRow {
    pub cell_id: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub cap_gamma: f64,
    pub amplitude: f64,
    pub outcome: String,
    pub lambda0: f64,
    pub guaranteed: bool,
}

fn cell_config(base: &SimConfig, index: usize) -> SimConfig {
    let sweep = base.sweep.as_ref().expect("caller checked");
    let mut cfg = base.clone();
    for (param, value) in sweep.cell_values(index) {
        cfg = cfg.with_param(param, value);
    }
    cfg.sweep = None;
    cfg
}

fn run_cell(base: &SimConfig, index: usize, out_dir: &Path) -> CellRow {
    let cfg = cell_config(base, index);
    let dir = out_dir.join(format!("cell_{index:04}"));
    let (outcome, lambda0, guaranteed) = match run_single(&cfg, &dir) {
        Ok(summary) => (
            summary.outcome.to_string(),
            summary.certificate.lambda0,
            summary.certificate.guaranteed,
        ),
        Err(e) => {
            // A failed cell must not sink the sweep; record why and move on.
            let _ = fs::create_dir_all(&dir);
            let _ = fs::write(dir.join("error.txt"), format!("{e}\n"));
            ("Error".to_string(), f64::NAN, false)
        }
    };
    CellRow {
        cell_id: index,
        lambda: cfg.params.lambda,
        alpha: cfg.params.alpha,
        beta: cfg.params.beta,
        gamma: cfg.params.gamma,
        cap_gamma: cfg.params.cap_gamma,
        amplitude: cfg.profile.amplitude,
        outcome,
        lambda0,
        guaranteed,
    }
}

/// Sequential sweep executor; always compiled, used directly when the
/// `parallel` feature is off and by the benchmark as the comparison baseline.
pub fn sweep_cells_sequential(base: &SimConfig, out_dir: &Path, cells: usize) -> Vec<CellRow> {
    (0..cells).map(|i| run_cell(base, i, out_dir)).collect()
}

/// Data-parallel sweep executor over a work-stealing pool. Cell order in the
/// returned vector is by index regardless of scheduling, so outputs stay
/// deterministic.
#[cfg(feature = "parallel")]
pub fn sweep_cells_parallel(
    base: &SimConfig,
    out_dir: &Path,
    cells: usize,
    threads: Option<usize>,
) -> Result<Vec<CellRow>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..cells)
            .into_par_iter()
            .map(|i| run_cell(base, i, out_dir))
            .collect()
    }))
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub cells: usize,
    pub failures: usize,
    pub index_file: PathBuf,
}

/// Runs the Cartesian sweep defined by `config.sweep`, one subdirectory per
/// cell, then writes `sweep_index.csv` in cell order.
pub fn run_sweep(
    config: &SimConfig,
    out_dir: &Path,
    threads: Option<usize>,
) -> Result<SweepSummary> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("configuration has no [sweep] table".into()))?;
    let cells = sweep.cell_count();
    fs::create_dir_all(out_dir)?;

    #[cfg(feature = "parallel")]
    let rows = sweep_cells_parallel(config, out_dir, cells, threads)?;
    #[cfg(not(feature = "parallel"))]
    let rows = {
        let _ = threads; // single-threaded build ignores the pool size
        sweep_cells_sequential(config, out_dir, cells)
    };

    let index_path = out_dir.join("sweep_index.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&index_path)?);
    writeln!(
        w,
        "cell_id,lambda,alpha,beta,gamma,cap_gamma,amplitude,outcome,lambda0,guaranteed"
    )?;
    let mut failures = 0usize;
    for row in &rows {
        if row.outcome == "Error" {
            failures += 1;
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            row.cell_id,
            fmt_f64(row.lambda),
            fmt_f64(row.alpha),
            fmt_f64(row.beta),
            fmt_f64(row.gamma),
            fmt_f64(row.cap_gamma),
            fmt_f64(row.amplitude),
            row.outcome,
            fmt_f64(row.lambda0),
            row.guaranteed
        )?;
    }
    w.flush()?;
    Ok(SweepSummary {
        schema_version: SCHEMA_VERSION,
        cells,
        failures,
        index_file: index_path,
    })
}

/// Columns of the sweep index, kept next to the writer so readers can depend
/// on the order.
pub const SWEEP_INDEX_COLUMNS: [&str; 10] = [
    "cell_id",
    "lambda",
    "alpha",
    "beta",
    "gamma",
    "cap_gamma",
    "amplitude",
    "outcome",
    "lambda0",
    "guaranteed",
];
