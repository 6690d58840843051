//! The batch commands. Each one validates its config, computes everything in
//! memory and returns the files to write, so a failed run leaves no output.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{ConvergeConfig, DriverStatsConfig, SimulateConfig, TrajectoryView};
use crate::driver::{approximation_errors, derive_seed, DriverPath, FbmSampler, RoughnessReport};
use crate::error::{Error, Result};
use crate::io::{fmt_float, json_digest, to_json_string};
use crate::lab::{fit_loglog, median, strictly_decreasing, ConvergenceReport, Lab, LogLogFit};
use crate::schemes::{self, Trajectory};

/// Named file contents, in the order they should be written.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    /// Text for stdout (suppressed by `--quiet`).
    pub summary: String,
}

impl Outputs {
    fn push(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

/// Sample standard deviation of consecutive differences.
pub fn increment_std(trace: &[f64]) -> f64 {
    let inc: Vec<f64> = trace.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.len() < 2 {
        return 0.0;
    }
    let n = inc.len() as f64;
    let mean = inc.iter().sum::<f64>() / n;
    (inc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Result of [`simulate`], kept for callers that want the data as well.
pub struct Simulation {
    pub trajectory: Trajectory,
    pub driver: DriverPath,
    pub probes: Vec<(f64, Vec<f64>)>,
    pub outputs: Outputs,
}

pub fn simulate(config: &SimulateConfig) -> Result<Simulation> {
    let cfg = config.scheme_config()?;
    let digest = json_digest(config)?;
    let warnings = cfg.validate()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let driver = FbmSampler::new(cfg.hurst, cfg.steps())?.sample(config.components, cfg.seed)?;
    let trajectory = schemes::run(&cfg, &driver)?;

    let probes: Vec<(f64, Vec<f64>)> =
        config.probes.iter().map(|&xi| (xi, trajectory.probe(xi))).collect();
    let mut out = Outputs::default();

    match config.trajectory {
        TrajectoryView::Spectral => {
            let mut buf = Vec::new();
            trajectory.write_spectral_csv(&mut buf)?;
            out.push("trajectory.csv", buf);
        }
        TrajectoryView::Grid => {
            let mut buf = Vec::new();
            trajectory.write_grid_csv(&mut buf, config.grid_size.unwrap_or(config.modes))?;
            out.push("trajectory.csv", buf);
        }
        TrajectoryView::None => {}
    }

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(config.probes.iter().map(|xi| format!("y({})", fmt_float(*xi))));
    wtr.write_record(&header)?;
    for (k, t) in trajectory.times().iter().enumerate() {
        let mut rec = vec![fmt_float(*t)];
        rec.extend(probes.iter().map(|(_, tr)| fmt_float(tr[k])));
        wtr.write_record(&rec)?;
    }
    out.push("probes.csv", wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?);

    let stats: Vec<_> = probes
        .iter()
        .map(|(xi, tr)| json!({ "xi": xi, "increment_std": increment_std(tr) }))
        .collect();
    let files: Vec<&str> = out.files.iter().map(|(n, _)| n.as_str()).collect();
    let manifest = json!({
        "command": "simulate",
        "config_digest": digest,
        "config": config,
        "driver_digest": driver.digest(),
        "steps": cfg.steps(),
        "warnings": warnings,
        "probes": stats,
        "files": files,
    });
    out.summary = stats
        .iter()
        .map(|s| format!("probe xi={} increment_std={}\n", s["xi"], s["increment_std"]))
        .collect();
    out.push("manifest.json", to_json_string(&manifest)?.into_bytes());
    Ok(Simulation { trajectory, driver, probes, outputs: out })
}

pub fn converge(config: &ConvergeConfig) -> Result<(ConvergenceReport, Outputs)> {
    let plan = config.plan()?;
    let digest = json_digest(config)?;
    let lab = Lab::new(plan)?;
    let report = lab.run_study(config.compare())?;
    if report.rows.iter().all(|r| r.error.is_none()) {
        let reason = report.rows.iter().find_map(|r| r.failure.clone()).unwrap_or_default();
        // blow-up in every cell is a numerical failure, anything else a setup one
        return Err(if reason.starts_with("non-finite") {
            Error::NonFinite { step: 0, max_abs: f64::INFINITY }
        } else {
            Error::invalid(format!("every cell failed: {reason}"))
        });
    }
    let mut out = Outputs::default();
    let mut csv_buf = Vec::new();
    report.write_csv(&mut csv_buf)?;
    out.push("errors.csv", csv_buf);
    let doc = json!({
        "command": "converge",
        "config_digest": digest,
        "config": config,
        "report": report,
    });
    out.push("report.json", to_json_string(&doc)?.into_bytes());
    out.summary = report.verdict_table();
    Ok((report, out))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriverStatsSummary {
    pub mesh: usize,
    pub median_u: f64,
    pub median_v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriverStats {
    pub rows: Vec<(u64, RoughnessReport)>,
    pub medians: Vec<DriverStatsSummary>,
    /// Fits of the medians against `M`, over the rungs coarser than the fine mesh.
    pub u_fit: Option<LogLogFit>,
    pub v_fit: Option<LogLogFit>,
    /// `γ − H`, the exponent the `u_M` fit is compared with.
    pub u_target: f64,
    /// `v_M` strictly decreasing along the ladder for every seed.
    pub v_decreasing_all_seeds: bool,
    pub notes: Vec<String>,
}

pub fn driver_stats_data(config: &DriverStatsConfig) -> Result<DriverStats> {
    config.validate()?;
    let sampler = FbmSampler::new(config.hurst, config.fine_steps)?;
    let mut ladder = config.mesh_ladder.clone();
    ladder.sort_unstable();
    ladder.dedup();
    let per_seed: Vec<Result<Vec<(u64, RoughnessReport)>>> = (0..config.seeds)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(config.seed, r as u64);
            let path = sampler.sample(config.components, seed)?;
            ladder
                .iter()
                .map(|&m| Ok((seed, approximation_errors(&path, m, config.gamma)?)))
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    let mut v_decreasing_all_seeds = true;
    for res in per_seed {
        let r = res?;
        let v: Vec<f64> = r.iter().map(|(_, x)| x.v_m).collect();
        v_decreasing_all_seeds &= strictly_decreasing(&v);
        rows.extend(r);
    }
    let medians: Vec<DriverStatsSummary> = ladder
        .iter()
        .map(|&m| {
            let sel = rows.iter().filter(|(_, x)| x.coarse_steps == m);
            let (u, v): (Vec<f64>, Vec<f64>) = sel.map(|(_, x)| (x.u_m, x.v_m)).unzip();
            DriverStatsSummary { mesh: m, median_u: median(u), median_v: median(v) }
        })
        .collect();

    let fit_pts: Vec<&DriverStatsSummary> =
        medians.iter().filter(|s| s.mesh < config.fine_steps).collect();
    let xs: Vec<f64> = fit_pts.iter().map(|s| s.mesh as f64).collect();
    let mut notes = Vec::new();
    let mut fit = |ys: Vec<f64>, name: &str| match fit_loglog(&xs, &ys) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    };
    let u_fit = fit(fit_pts.iter().map(|s| s.median_u).collect(), "u_M");
    let v_fit = fit(fit_pts.iter().map(|s| s.median_v).collect(), "v_M");
    Ok(DriverStats {
        rows,
        medians,
        u_fit,
        v_fit,
        u_target: config.gamma - config.hurst,
        v_decreasing_all_seeds,
        notes,
    })
}

pub fn driver_stats(config: &DriverStatsConfig) -> Result<(DriverStats, Outputs)> {
    let stats = driver_stats_data(config)?;
    let digest = json_digest(config)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["seed", "M", "holder_norm", "u_M", "v_M"])?;
    for (seed, r) in &stats.rows {
        wtr.write_record([
            seed.to_string(),
            r.coarse_steps.to_string(),
            fmt_float(r.holder_norm),
            fmt_float(r.u_m),
            fmt_float(r.v_m),
        ])?;
    }
    let mut out = Outputs::default();
    out.push("driver_stats.csv", wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?);
    let doc = json!({
        "command": "driver-stats",
        "config_digest": digest,
        "config": config,
        "medians": stats.medians,
        "u_fit": stats.u_fit,
        "v_fit": stats.v_fit,
        "u_target": stats.u_target,
        "v_decreasing_all_seeds": stats.v_decreasing_all_seeds,
        "notes": stats.notes,
    });
    out.push("driver_stats.json", to_json_string(&doc)?.into_bytes());
    let slope = |f: &Option<LogLogFit>| f.as_ref().map_or("-".into(), |f| format!("{:+.4}", f.slope));
    out.summary = format!(
        "u_M slope {} (γ−H = {:+.4}), v_M slope {}, v_M decreasing for all seeds: {}\n",
        slope(&stats.u_fit),
        stats.u_target,
        slope(&stats.v_fit),
        stats.v_decreasing_all_seeds
    );
    Ok((stats, out))
}
