//! Empirical convergence studies.
//!
//! The exact rough solution is not computable, so each replication is
//! compared against a run of the same scheme at the plan's reference
//! resolution on the same fine driver. Coarser meshes see exact subsamples of
//! that driver. Errors are `sup_k ‖y^ref_{t_k} − y^{M,N}_{t_k}‖_{B_γ'}` over the
//! coarse times, with the norm truncated at the reference mode count.
//!
//! Two sweeps are measured: time (`M` on the mesh ladder, `N = N_ref`) and
//! space (`M = M_ref`, `N` on the mode ladder).

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{derive_seed, DriverPath, FbmSampler};
use crate::error::{Error, Result};
use crate::io::{fmt_float, json_digest, to_json_string};
use crate::schemes::{self, default_initial_condition, Nonlinearity, Scheme, SchemeConfig, Trajectory};
use crate::spectral::{sobolev_norm_coeffs, SpectralState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyPlan {
    pub scheme: Scheme,
    pub hurst: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    /// Time-rate exponent for the Milstein scheme.
    pub beta: Option<f64>,
    /// Space-rate exponent for the Milstein scheme (errors decay like `N^{-2λ}`).
    pub lambda: Option<f64>,
    /// Euler: step counts. Milstein: dyadic exponents.
    pub mesh_ladder: Vec<usize>,
    pub mode_ladder: Vec<usize>,
    pub reference_mesh: usize,
    pub reference_modes: usize,
    pub replications: usize,
    pub seed: u64,
    pub kappa: f64,
    pub nonlinearity: Nonlinearity,
    pub initial: SpectralState,
    pub oversample: usize,
    /// Slack on the theoretical exponent when issuing verdicts.
    pub tolerance: f64,
    /// Leave the rung closest to the reference out of the fits.
    pub drop_finest: bool,
}

impl StudyPlan {
    pub fn default_euler() -> Self {
        Self {
            scheme: Scheme::Euler,
            hurst: 0.6,
            gamma: 0.55,
            gamma_prime: 0.48,
            beta: None,
            lambda: None,
            mesh_ladder: (4..=9).map(|e| 1usize << e).collect(),
            mode_ladder: vec![4, 8, 16, 32, 64],
            reference_mesh: 1 << 12,
            reference_modes: 128,
            replications: 20,
            seed: 1,
            kappa: 1e-3,
            nonlinearity: Nonlinearity::rational(1.0, 1),
            initial: default_initial_condition(3),
            oversample: 2,
            tolerance: 0.15,
            drop_finest: true,
        }
    }

    pub fn default_milstein() -> Self {
        Self {
            scheme: Scheme::Milstein,
            hurst: 0.4,
            gamma: 0.38,
            gamma_prime: 0.65,
            mesh_ladder: (4..=9).collect(),
            reference_mesh: 12,
            ..Self::default_euler()
        }
    }

    /// Number of time steps behind a ladder entry.
    pub fn steps(&self, mesh: usize) -> usize {
        match self.scheme {
            Scheme::Euler => mesh,
            Scheme::Milstein => 1usize << mesh,
        }
    }

    pub fn reference_steps(&self) -> usize {
        self.steps(self.reference_mesh)
    }

    /// `sup β` and `sup λ` allowed by the Milstein convergence theorem.
    pub fn milstein_bounds(&self) -> (f64, f64) {
        let (g, gp) = (self.gamma, self.gamma_prime);
        ((g + gp - 1.0).min(g - gp + 0.5), g + gp - 1.0)
    }

    /// Hard errors for malformed plans; returns warnings otherwise.
    pub fn validate(&self) -> Result<Vec<String>> {
        let cfg = |m| Error::Config(m);
        if self.mesh_ladder.is_empty() || self.mode_ladder.is_empty() {
            return Err(cfg("mesh and mode ladders must be nonempty".into()));
        }
        if self.replications == 0 {
            return Err(cfg("replications must be at least 1".into()));
        }
        if self.scheme == Scheme::Milstein && self.reference_mesh > 24 {
            return Err(cfg(format!("reference exponent {} is too large", self.reference_mesh)));
        }
        let fine = self.reference_steps();
        for &m in &self.mesh_ladder {
            let nested = match self.scheme {
                Scheme::Euler => m > 0 && fine % m == 0,
                Scheme::Milstein => m <= self.reference_mesh,
            };
            if !nested {
                return Err(cfg(format!(
                    "mesh {m} is not nested in the reference mesh {}",
                    self.reference_mesh
                )));
            }
        }
        for &n in &self.mode_ladder {
            if n == 0 || n > self.reference_modes {
                return Err(cfg(format!(
                    "mode count {n} outside 1..={}",
                    self.reference_modes
                )));
            }
        }
        if self.scheme == Scheme::Milstein {
            let (beta_max, lambda_max) = self.milstein_bounds();
            if let Some(b) = self.beta {
                if !(b > 0.0 && b < beta_max) {
                    return Err(cfg(format!("β = {b} must lie in (0, {beta_max})")));
                }
            }
            if let Some(l) = self.lambda {
                if !(l > 0.0 && l < lambda_max) {
                    return Err(cfg(format!("λ = {l} must lie in (0, {lambda_max})")));
                }
            }
        }
        if !(self.tolerance >= 0.0) {
            return Err(cfg("tolerance must be nonnegative".into()));
        }
        self.config(self.reference_mesh, self.reference_modes).validate()
    }

    pub fn digest(&self) -> Result<String> {
        json_digest(self)
    }

    pub fn config(&self, mesh: usize, modes: usize) -> SchemeConfig {
        SchemeConfig {
            scheme: self.scheme,
            time_mesh: mesh,
            modes,
            hurst: self.hurst,
            gamma: Some(self.gamma),
            gamma_prime: Some(self.gamma_prime),
            kappa: self.kappa,
            nonlinearity: self.nonlinearity.clone(),
            initial: self.initial.clone(),
            seed: self.seed,
            oversample: self.oversample,
        }
    }

    /// Distinct `(mesh, modes)` cells of both sweeps, in a fixed order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for &m in &self.mesh_ladder {
            set.insert((m, self.reference_modes));
        }
        for &n in &self.mode_ladder {
            set.insert((self.reference_mesh, n));
        }
        set.into_iter().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    Time,
    Space,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub mesh: usize,
    pub steps: usize,
    pub modes: usize,
    pub replication: usize,
    pub seed: u64,
    /// `None` when the run for this cell failed.
    pub error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// `sup_k ‖a(k·ratio) − b(k)‖_{B_γ'}` over the coarse times of `b`, with both
/// states zero-padded to the larger dimension.
pub fn sup_sobolev_error(reference: &Trajectory, coarse: &Trajectory, gamma_prime: f64) -> Result<f64> {
    let (fine, steps) = (reference.len() - 1, coarse.len() - 1);
    if steps == 0 || fine % steps != 0 {
        return Err(Error::invalid(format!("{steps} steps are not nested in {fine}")));
    }
    let ratio = fine / steps;
    let dim = reference.dim().max(coarse.dim());
    let mut diff = vec![0.0; dim];
    let mut sup = 0.0f64;
    for k in 0..=steps {
        diff.iter_mut().for_each(|d| *d = 0.0);
        for (d, r) in diff.iter_mut().zip(reference.coeffs(k * ratio)) {
            *d = *r;
        }
        for (d, c) in diff.iter_mut().zip(coarse.coeffs(k)) {
            *d -= *c;
        }
        sup = sup.max(sobolev_norm_coeffs(&diff, gamma_prime));
    }
    Ok(sup)
}

/// Runs a plan; references are cached per replication.
pub struct Lab {
    plan: StudyPlan,
    digest: String,
    sampler: FbmSampler,
    references: Mutex<HashMap<usize, Arc<Trajectory>>>,
}

impl Lab {
    pub fn new(plan: StudyPlan) -> Result<Self> {
        for w in plan.validate()? {
            log::warn!("{w}");
        }
        let digest = plan.digest()?;
        let sampler = FbmSampler::new(plan.hurst, plan.reference_steps())?;
        Ok(Self { plan, digest, sampler, references: Mutex::new(HashMap::new()) })
    }

    pub fn plan(&self) -> &StudyPlan {
        &self.plan
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn replication_seed(&self, replication: usize) -> u64 {
        derive_seed(self.plan.seed, replication as u64)
    }

    /// The fine driver shared by every cell of a replication.
    pub fn driver(&self, replication: usize) -> Result<DriverPath> {
        self.sampler
            .sample(self.plan.nonlinearity.components(), self.replication_seed(replication))
    }

    pub fn reference_solution(&self, replication: usize) -> Result<Arc<Trajectory>> {
        if let Some(t) = self.references.lock().unwrap().get(&replication) {
            return Ok(Arc::clone(t));
        }
        let driver = self.driver(replication)?;
        let cfg = self.plan.config(self.plan.reference_mesh, self.plan.reference_modes);
        let traj = Arc::new(schemes::run(&cfg, &driver)?);
        self.references.lock().unwrap().insert(replication, Arc::clone(&traj));
        Ok(traj)
    }

    fn run_cell(
        &self,
        scheme: Scheme,
        driver: &DriverPath,
        reference: &Trajectory,
        mesh: usize,
        modes: usize,
    ) -> Result<f64> {
        let mut cfg = self.plan.config(mesh, modes);
        cfg.scheme = scheme;
        if scheme == Scheme::Euler && self.plan.scheme == Scheme::Milstein {
            cfg.time_mesh = self.plan.steps(mesh);
        }
        let coarse = driver.restrict(cfg.steps())?;
        let traj = schemes::run(&cfg, &coarse)?;
        sup_sobolev_error(reference, &traj, self.plan.gamma_prime)
    }

    /// Errors of every cell for one replication. A failed cell is recorded
    /// and does not stop the others.
    pub fn error_curve(&self, replication: usize) -> Result<Vec<ErrorRow>> {
        let reference = self.reference_solution(replication)?;
        let driver = self.driver(replication)?;
        let seed = self.replication_seed(replication);
        Ok(self
            .plan
            .cells()
            .into_iter()
            .map(|(mesh, modes)| {
                let res = self.run_cell(self.plan.scheme, &driver, &reference, mesh, modes);
                let (error, failure) = match res {
                    Ok(e) => (Some(e), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                ErrorRow {
                    mesh,
                    steps: self.plan.steps(mesh),
                    modes,
                    replication,
                    seed,
                    error,
                    failure,
                }
            })
            .collect())
    }

    /// Milstein and Euler errors on the time sweep, both measured against
    /// the Milstein reference. Only meaningful for Milstein plans.
    pub fn scheme_comparison(&self, replication: usize) -> Result<Vec<ComparisonRow>> {
        if self.plan.scheme != Scheme::Milstein {
            return Err(Error::invalid("scheme comparison needs a Milstein plan"));
        }
        let reference = self.reference_solution(replication)?;
        let driver = self.driver(replication)?;
        let n = self.plan.reference_modes;
        self.plan
            .mesh_ladder
            .iter()
            .map(|&mesh| {
                Ok(ComparisonRow {
                    mesh,
                    replication,
                    milstein: self.run_cell(Scheme::Milstein, &driver, &reference, mesh, n)?,
                    euler: self.run_cell(Scheme::Euler, &driver, &reference, mesh, n)?,
                })
            })
            .collect()
    }

    /// All replications, aggregated into a report. Replications run in
    /// parallel; the result does not depend on the thread count.
    pub fn run_study(&self, compare: bool) -> Result<ConvergenceReport> {
        let reps: Vec<usize> = (0..self.plan.replications).collect();
        let per_rep: Vec<Result<Vec<ErrorRow>>> =
            reps.par_iter().map(|&r| self.error_curve(r)).collect();
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (r, res) in per_rep.into_iter().enumerate() {
            match res {
                Ok(mut v) => rows.append(&mut v),
                Err(e) => failures.push(format!("replication {r}: {e}")),
            }
        }
        if rows.is_empty() {
            return Err(Error::invalid(format!("every replication failed: {}", failures.join("; "))));
        }
        let comparison = if compare && self.plan.scheme == Scheme::Milstein {
            let per: Vec<Result<Vec<ComparisonRow>>> =
                reps.par_iter().map(|&r| self.scheme_comparison(r)).collect();
            let mut all = Vec::new();
            for res in per {
                match res {
                    Ok(mut v) => all.append(&mut v),
                    Err(e) => failures.push(format!("comparison: {e}")),
                }
            }
            Some(aggregate_comparison(&all, &self.plan.mesh_ladder))
        } else {
            None
        };
        // the reference cache is only needed while the study runs
        self.references.lock().unwrap().clear();
        Ok(ConvergenceReport::assemble(self.plan.clone(), self.digest.clone(), rows, comparison, failures))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mesh: usize,
    pub replication: usize,
    pub milstein: f64,
    pub euler: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMedian {
    pub mesh: usize,
    pub milstein: f64,
    pub euler: f64,
}

fn aggregate_comparison(rows: &[ComparisonRow], ladder: &[usize]) -> Vec<ComparisonMedian> {
    ladder
        .iter()
        .map(|&mesh| {
            let sel: Vec<&ComparisonRow> = rows.iter().filter(|r| r.mesh == mesh).collect();
            ComparisonMedian {
                mesh,
                milstein: median(sel.iter().map(|r| r.milstein).collect()),
                euler: median(sel.iter().map(|r| r.euler).collect()),
            }
        })
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMedian {
    pub mesh: usize,
    pub steps: usize,
    pub modes: usize,
    pub median: f64,
    pub count: usize,
}

/// Ordinary least squares of `log y` on `log x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateFit("x and y lengths differ".into()));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} point(s) cannot determine a slope", xs.len())));
    }
    if let Some(y) = ys.iter().find(|y| !(**y > 0.0 && y.is_finite())) {
        return Err(Error::DegenerateFit(format!("error {y} is not positive and finite")));
    }
    if xs.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::DegenerateFit("abscissae must be positive".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(LogLogFit { slope, intercept, residual: (rss / n).sqrt(), points: lx.len() })
}

pub const MIN_FIT_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Refused,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateVerdict {
    pub sweep: Sweep,
    /// Fit of the median error against steps (time) or modes (space).
    pub fit: Option<LogLogFit>,
    /// Min, median and max of the per-replication slopes.
    pub seed_slopes: Option<[f64; 3]>,
    /// Decay exponent the verdict is checked against; `None` means only a
    /// negative slope is required.
    pub target: Option<f64>,
    /// Named exponents of the individual error terms.
    pub candidates: Vec<(String, f64)>,
    pub tolerance: f64,
    /// False when the target is within the tolerance of 0, so the verdict
    /// cannot distinguish the predicted rate from no convergence.
    pub resolvable: bool,
    pub verdict: Verdict,
    pub note: String,
}

fn rate_candidates(plan: &StudyPlan, sweep: Sweep) -> (Option<f64>, Vec<(String, f64)>) {
    let (h, g, gp) = (plan.hurst, plan.gamma, plan.gamma_prime);
    match (plan.scheme, sweep) {
        (Scheme::Euler, Sweep::Time) => {
            let c = vec![("u_M ~ M^(γ−H)".to_string(), h - g), ("M^−(γ+γ'−1)".to_string(), g + gp - 1.0)];
            (Some((h - g).min(g + gp - 1.0)), c)
        }
        (Scheme::Euler, Sweep::Space) => (None, Vec::new()),
        (Scheme::Milstein, Sweep::Time) => {
            let beta = plan.beta.unwrap_or(plan.milstein_bounds().0);
            let c = vec![("v_2^M ~ (2^M)^(γ−H)".to_string(), h - g), ("(2^M)^−β".to_string(), beta)];
            (Some((h - g).min(beta)), c)
        }
        (Scheme::Milstein, Sweep::Space) => {
            let lambda = plan.lambda.unwrap_or(plan.milstein_bounds().1);
            (Some(2.0 * lambda), vec![("N^−2λ".to_string(), 2.0 * lambda)])
        }
    }
}

/// `(abscissa, mesh, modes)` of the cells on one sweep, coarsest first,
/// without the finest rung when the plan asks for it.
fn sweep_cells(plan: &StudyPlan, sweep: Sweep) -> Vec<(f64, usize, usize)> {
    let mut cells: Vec<(f64, usize, usize)> = match sweep {
        Sweep::Time => {
            let mut m = plan.mesh_ladder.clone();
            m.sort_unstable();
            m.dedup();
            m.into_iter()
                .map(|mesh| (plan.steps(mesh) as f64, mesh, plan.reference_modes))
                .collect()
        }
        Sweep::Space => {
            let mut n = plan.mode_ladder.clone();
            n.sort_unstable();
            n.dedup();
            n.into_iter().map(|modes| (modes as f64, plan.reference_mesh, modes)).collect()
        }
    };
    if plan.drop_finest && cells.len() > 1 {
        cells.pop();
    }
    cells
}

/// Fits both sweeps and issues verdicts: PASS when the fitted slope is at
/// most `−(target − tolerance)`.
pub fn fit_rates(rows: &[ErrorRow], plan: &StudyPlan) -> Vec<RateVerdict> {
    [Sweep::Time, Sweep::Space]
        .into_iter()
        .map(|sweep| fit_sweep(rows, plan, sweep))
        .collect()
}

fn cell_errors(rows: &[ErrorRow], mesh: usize, modes: usize) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.mesh == mesh && r.modes == modes)
        .filter_map(|r| r.error)
        .collect()
}

fn fit_sweep(rows: &[ErrorRow], plan: &StudyPlan, sweep: Sweep) -> RateVerdict {
    let (target, candidates) = rate_candidates(plan, sweep);
    let tol = plan.tolerance;
    let cells = sweep_cells(plan, sweep);
    let mut out = RateVerdict {
        sweep,
        fit: None,
        seed_slopes: None,
        target,
        candidates,
        tolerance: tol,
        resolvable: target.map_or(true, |t| t > tol),
        verdict: Verdict::Refused,
        note: String::new(),
    };
    if cells.len() < MIN_FIT_POINTS {
        out.note = format!("ladder has {} usable rung(s); at least {MIN_FIT_POINTS} needed", cells.len());
        return out;
    }
    let xs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let meds: Vec<f64> = cells.iter().map(|c| median(cell_errors(rows, c.1, c.2))).collect();
    let fit = match fit_loglog(&xs, &meds) {
        Ok(f) => f,
        Err(e) => {
            out.note = e.to_string();
            return out;
        }
    };

    let mut reps: Vec<usize> = rows.iter().map(|r| r.replication).collect();
    reps.sort_unstable();
    reps.dedup();
    let mut slopes: Vec<f64> = reps
        .iter()
        .filter_map(|&rep| {
            let ys: Option<Vec<f64>> = cells
                .iter()
                .map(|c| {
                    rows.iter()
                        .find(|r| r.replication == rep && r.mesh == c.1 && r.modes == c.2)
                        .and_then(|r| r.error)
                })
                .collect();
            ys.and_then(|ys| fit_loglog(&xs, &ys).ok()).map(|f| f.slope)
        })
        .collect();
    if !slopes.is_empty() {
        slopes.sort_by(|a, b| a.total_cmp(b));
        out.seed_slopes = Some([slopes[0], median(slopes.clone()), slopes[slopes.len() - 1]]);
    }

    let pass = match target {
        Some(t) => fit.slope <= -(t - tol),
        None => fit.slope < 0.0,
    };
    out.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    if !out.resolvable {
        out.note = format!(
            "target {:.3} is within the tolerance {tol} of zero; not statistically resolvable at this scale",
            target.unwrap_or(0.0)
        );
    }
    out.fit = Some(fit);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub plan_digest: String,
    pub plan: StudyPlan,
    pub rows: Vec<ErrorRow>,
    pub medians: Vec<CellMedian>,
    pub fits: Vec<RateVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<ComparisonMedian>>,
    pub failures: Vec<String>,
}

impl ConvergenceReport {
    fn assemble(
        plan: StudyPlan,
        plan_digest: String,
        rows: Vec<ErrorRow>,
        comparison: Option<Vec<ComparisonMedian>>,
        failures: Vec<String>,
    ) -> Self {
        let medians = plan
            .cells()
            .into_iter()
            .map(|(mesh, modes)| {
                let errs = cell_errors(&rows, mesh, modes);
                CellMedian { mesh, steps: plan.steps(mesh), modes, count: errs.len(), median: median(errs) }
            })
            .collect();
        let fits = fit_rates(&rows, &plan);
        Self { plan_digest, plan, rows, medians, fits, comparison, failures }
    }

    /// Median errors along one sweep, coarsest rung first (finest rung kept).
    pub fn sweep_medians(&self, sweep: Sweep) -> Vec<(usize, f64)> {
        let plan = &self.plan;
        let pick = |mesh: usize, modes: usize| {
            self.medians
                .iter()
                .find(|c| c.mesh == mesh && c.modes == modes)
                .map_or(f64::NAN, |c| c.median)
        };
        match sweep {
            Sweep::Time => {
                let mut m = plan.mesh_ladder.clone();
                m.sort_unstable();
                m.dedup();
                m.into_iter().map(|mesh| (mesh, pick(mesh, plan.reference_modes))).collect()
            }
            Sweep::Space => {
                let mut n = plan.mode_ladder.clone();
                n.sort_unstable();
                n.dedup();
                n.into_iter().map(|modes| (modes, pick(plan.reference_mesh, modes))).collect()
            }
        }
    }

    pub fn fit(&self, sweep: Sweep) -> &RateVerdict {
        self.fits.iter().find(|f| f.sweep == sweep).expect("both sweeps are always fitted")
    }

    /// Long format: `scheme,H,M,N,seed,error`; failed cells leave `error` empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["scheme", "H", "M", "N", "seed", "error"])?;
        for r in &self.rows {
            wtr.write_record([
                self.plan.scheme.name().to_string(),
                fmt_float(self.plan.hurst),
                r.mesh.to_string(),
                r.modes.to_string(),
                r.seed.to_string(),
                r.error.map(fmt_float).unwrap_or_default(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }

    /// Human-readable verdict table.
    pub fn verdict_table(&self) -> String {
        let mut s = String::from("sweep  slope     target   tol    verdict  note\n");
        for f in &self.fits {
            let slope = f.fit.as_ref().map_or("-".to_string(), |x| format!("{:+.4}", x.slope));
            let target = f.target.map_or("<0".to_string(), |t| format!("{:.4}", -t));
            s.push_str(&format!(
                "{:<6} {:<9} {:<8} {:<6} {:<8} {}\n",
                format!("{:?}", f.sweep).to_lowercase(),
                slope,
                target,
                f.tolerance,
                format!("{:?}", f.verdict).to_uppercase(),
                f.note
            ));
        }
        s
    }
}

/// `true` when every entry is strictly below its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_plan() -> StudyPlan {
        StudyPlan {
            mesh_ladder: vec![4, 8, 16, 32],
            mode_ladder: vec![2, 4, 8],
            reference_mesh: 32,
            reference_modes: 8,
            replications: 2,
            oversample: 2,
            ..StudyPlan::default_euler()
        }
    }

    #[test]
    fn exact_power_law_slope() {
        let xs: Vec<f64> = (4..10).map(|e| (1u64 << e) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-0.7)).collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope + 0.7).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn fit_refuses_degenerate_input() {
        assert!(fit_loglog(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(fit_loglog(&[2.0, 2.0], &[1.0, 0.5]).is_err());
        assert!(fit_loglog(&[2.0], &[1.0]).is_err());
    }

    #[test]
    fn plan_validation() {
        assert!(tiny_plan().validate().is_ok());
        let mut p = tiny_plan();
        p.mesh_ladder.push(12);
        assert!(p.validate().is_err());
        let mut p = tiny_plan();
        p.mode_ladder.push(9);
        assert!(p.validate().is_err());
        let mut p = StudyPlan::default_milstein();
        p.beta = Some(0.05);
        assert!(p.validate().is_err());
        p.beta = Some(0.02);
        p.lambda = Some(0.02);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn self_comparison_cell_is_zero() {
        let lab = Lab::new(tiny_plan()).unwrap();
        let rows = lab.error_curve(0).unwrap();
        let own = rows.iter().find(|r| r.mesh == 32 && r.modes == 8).unwrap();
        assert_eq!(own.error, Some(0.0));
        assert!(rows.iter().filter(|r| r.mesh != 32 || r.modes != 8).all(|r| r.error.unwrap() > 0.0));
    }

    #[test]
    fn reference_is_cached_and_deterministic() {
        let lab = Lab::new(tiny_plan()).unwrap();
        let a = lab.reference_solution(1).unwrap();
        let b = lab.reference_solution(1).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let other = Lab::new(tiny_plan()).unwrap();
        assert_eq!(*other.reference_solution(1).unwrap(), *a);
        assert_eq!(lab.digest(), other.digest());
    }

    #[test]
    fn short_ladder_is_refused_but_rows_kept() {
        let mut p = tiny_plan();
        p.mesh_ladder = vec![8];
        let report = Lab::new(p).unwrap().run_study(false).unwrap();
        assert_eq!(report.fit(Sweep::Time).verdict, Verdict::Refused);
        assert!(report.rows.iter().any(|r| r.mesh == 8 && r.error.is_some()));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(vec![]).is_nan());
    }
}
