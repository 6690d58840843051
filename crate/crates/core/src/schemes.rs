//! Spectral Euler and Milstein iterations.
//!
//! One step of either scheme, for modes `l = 1..N` and step `h`:
//!
//! ```text
//! Y_{k+1} = e^{-κλ h} Y_k
//!         + w1(λ, κh) Σ_i Δx^i ⟨f_i(Y_k), e_l⟩
//!         + w2(λ, κh) Σ_{i,j} Δx^i Δx^j ⟨P_N f_j(Y_k) · f_i'(Y_k), e_l⟩   (Milstein only)
//! ```
//!
//! Inner products are taken by collocation: synthesize `Y_k` on the interior
//! grid, apply the nonlinearity pointwise, and analyze back.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::driver::DriverPath;
use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::kernels::KernelWeights;
use crate::spectral::{SineTransform, SpectralState};

/// Scalar functions `f: ℝ → ℝ` with closed-form derivatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField {
    /// `k (1 − x) / (1 + x²)`.
    Rational { k: f64 },
    Constant { c: f64 },
    /// `a x + b`.
    Affine { a: f64, b: f64 },
    /// `amplitude · sin(frequency · x)`.
    Sine { amplitude: f64, frequency: f64 },
}

impl ScalarField {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            ScalarField::Rational { k } => k * (1.0 - x) / (1.0 + x * x),
            ScalarField::Constant { c } => c,
            ScalarField::Affine { a, b } => a * x + b,
            ScalarField::Sine { amplitude, frequency } => amplitude * (frequency * x).sin(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            ScalarField::Rational { k } => {
                let d = 1.0 + x * x;
                k * (x * x - 2.0 * x - 1.0) / (d * d)
            }
            ScalarField::Constant { .. } => 0.0,
            ScalarField::Affine { a, .. } => a,
            ScalarField::Sine { amplitude, frequency } => {
                amplitude * frequency * (frequency * x).cos()
            }
        }
    }

    fn smoothness(&self) -> u32 {
        // every built-in field is smooth; 3 is the highest level the
        // convergence results ask for
        3
    }
}

/// The family `(f_1, …, f_m)` multiplying the driver components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub label: String,
    pub fields: Vec<ScalarField>,
    pub smoothness: u32,
    /// When set, every `f_i'` evaluates to 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zero_derivative: bool,
}

impl Nonlinearity {
    pub fn new(label: impl Into<String>, fields: Vec<ScalarField>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::invalid("nonlinearity needs at least one component"));
        }
        let smoothness = fields.iter().map(ScalarField::smoothness).min().unwrap_or(0);
        Ok(Self { label: label.into(), fields, smoothness, zero_derivative: false })
    }

    /// `f_k(x) = k(1−x)/(1+x²)` on every one of `components` components.
    pub fn rational(k: f64, components: usize) -> Self {
        Self::new(format!("rational(k={k})"), vec![ScalarField::Rational { k }; components.max(1)])
            .expect("nonempty")
    }

    pub fn constant(c: f64, components: usize) -> Self {
        Self::new(format!("constant(c={c})"), vec![ScalarField::Constant { c }; components.max(1)])
            .expect("nonempty")
    }

    pub fn zero(components: usize) -> Self {
        Self::constant(0.0, components)
    }

    pub fn without_derivative(mut self) -> Self {
        self.zero_derivative = true;
        self
    }

    pub fn components(&self) -> usize {
        self.fields.len()
    }

    pub fn value(&self, i: usize, x: f64) -> f64 {
        self.fields[i].value(x)
    }

    pub fn derivative(&self, i: usize, x: f64) -> f64 {
        if self.zero_derivative {
            0.0
        } else {
            self.fields[i].derivative(x)
        }
    }

    /// Spot-checks boundedness on `[-10, 10]` and the derivatives against
    /// centered differences on `[-5, 5]`.
    pub fn verify(&self) -> Result<()> {
        for (i, f) in self.fields.iter().enumerate() {
            for n in 0..=200 {
                let x = -10.0 + 0.1 * n as f64;
                if !f.value(x).is_finite() || !f.derivative(x).is_finite() {
                    return Err(Error::invalid(format!("f_{} not finite at {x}", i + 1)));
                }
            }
            if self.zero_derivative {
                continue;
            }
            for n in 0..=100 {
                let x = -5.0 + 0.1 * n as f64;
                let eps = 1e-5;
                let fd = (f.value(x + eps) - f.value(x - eps)) / (2.0 * eps);
                let d = f.derivative(x);
                if (fd - d).abs() > 1e-6 * d.abs().max(1.0) {
                    return Err(Error::invalid(format!(
                        "f_{}' disagrees with finite differences at {x}: {d} vs {fd}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Milstein,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::Milstein => "milstein",
        }
    }
}

/// Everything that determines one solver run apart from the driver samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Euler: number of steps `M`. Milstein: exponent `M`, with `2^M` steps.
    pub time_mesh: usize,
    pub modes: usize,
    pub hurst: f64,
    pub gamma: Option<f64>,
    pub gamma_prime: Option<f64>,
    /// Clock multiplier `κ` of the semigroup.
    pub kappa: f64,
    pub nonlinearity: Nonlinearity,
    pub initial: SpectralState,
    pub seed: u64,
    pub oversample: usize,
}

/// `ψ(ξ) = ½ sin(πξ) + (3/5) sin(3πξ)`.
pub fn default_initial_condition(modes: usize) -> SpectralState {
    SpectralState::from_sine_coefficients(&[0.5, 0.0, 0.6], modes).expect("finite")
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, time_mesh: usize, modes: usize, hurst: f64) -> Self {
        Self {
            scheme,
            time_mesh,
            modes,
            hurst,
            gamma: None,
            gamma_prime: None,
            kappa: 1.0,
            nonlinearity: Nonlinearity::rational(1.0, 1),
            initial: default_initial_condition(modes),
            seed: 0,
            oversample: 1,
        }
    }

    pub fn steps(&self) -> usize {
        match self.scheme {
            Scheme::Euler => self.time_mesh,
            Scheme::Milstein => 1usize << self.time_mesh,
        }
    }

    pub fn step_size(&self) -> f64 {
        1.0 / self.steps() as f64
    }

    pub fn grid_size(&self) -> usize {
        self.modes * self.oversample
    }

    /// Hard errors for ill-posed runs; returns warnings for parameters outside
    /// the regime where convergence is guaranteed.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.modes == 0 {
            return Err(Error::Config("modes must be at least 1".into()));
        }
        if self.oversample == 0 {
            return Err(Error::Config("oversample must be at least 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::Config(format!("hurst must lie in (0,1), got {}", self.hurst)));
        }
        match self.scheme {
            Scheme::Euler if self.time_mesh == 0 => {
                return Err(Error::Config("time_mesh must be at least 1".into()))
            }
            Scheme::Milstein if self.time_mesh > 30 => {
                return Err(Error::Config(format!("2^{} steps is too many", self.time_mesh)))
            }
            _ => {}
        }
        self.nonlinearity.verify().map_err(|e| Error::Config(e.to_string()))?;

        let mut warnings = Vec::new();
        let h = self.hurst;
        if h <= 1.0 / 3.0 {
            warnings.push(format!("H = {h} ≤ 1/3 is outside the rough-path regime"));
        }
        match self.scheme {
            Scheme::Euler if h <= 0.5 => {
                warnings.push(format!("Euler scheme with H = {h} ≤ 1/2 does not converge to the rough solution"))
            }
            _ => {}
        }
        if let Some(g) = self.gamma {
            if g >= h {
                warnings.push(format!("γ = {g} should be below H = {h}"));
            }
            let (lo, hi) = match self.scheme {
                Scheme::Euler => (0.5, 1.0),
                Scheme::Milstein => (1.0 / 3.0, 0.5),
            };
            if !(g > lo && g < hi) {
                warnings.push(format!("γ = {g} outside ({lo}, {hi}) for the {} scheme", self.scheme.name()));
            }
            if let Some(gp) = self.gamma_prime {
                let ok = match self.scheme {
                    Scheme::Euler => gp > (1.0 - g).max(g / 2.0) && gp < 0.5,
                    Scheme::Milstein => gp > 1.0 - g && gp <= 2.0 * g,
                };
                if !ok {
                    warnings.push(format!(
                        "γ' = {gp} outside the convergence window for γ = {g} ({} scheme)",
                        self.scheme.name()
                    ));
                }
            }
        }
        Ok(warnings)
    }
}

/// Collocation machinery shared by both schemes.
#[derive(Clone, Debug)]
struct Collocation {
    modes: usize,
    transform: SineTransform,
}

impl Collocation {
    fn new(modes: usize, grid_size: usize) -> Self {
        Self { modes, transform: SineTransform::new(grid_size) }
    }

    fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.transform.synthesize(coeffs)
    }

    fn analyze(&self, values: &[f64]) -> Vec<f64> {
        self.transform.analyze(values, self.modes)
    }
}

fn collocation_for(y: &SpectralState, n_modes: usize, oversample: usize) -> Collocation {
    let grid = oversample.max(1) * n_modes.max(y.dim());
    Collocation::new(n_modes, grid)
}

/// `P_N f_i(y)` by collocation on a grid of `oversample · max(N, dim y)` points.
pub fn eval_nonlinearity(
    y: &SpectralState,
    f: &Nonlinearity,
    i: usize,
    n_modes: usize,
    oversample: usize,
) -> SpectralState {
    let c = collocation_for(y, n_modes, oversample);
    let u = c.synthesize(y.coeffs());
    let fu: Vec<f64> = u.iter().map(|&x| f.value(i, x)).collect();
    SpectralState::from_vec_unchecked(c.analyze(&fu))
}

/// `P_N( f_i'(y) · P_N f_j(y) )` by collocation.
pub fn eval_milstein_product(
    y: &SpectralState,
    f: &Nonlinearity,
    i: usize,
    j: usize,
    n_modes: usize,
    oversample: usize,
) -> SpectralState {
    let c = collocation_for(y, n_modes, oversample);
    let u = c.synthesize(y.coeffs());
    let fj: Vec<f64> = u.iter().map(|&x| f.value(j, x)).collect();
    let g = c.synthesize(&c.analyze(&fj));
    let prod: Vec<f64> = u.iter().zip(&g).map(|(&x, g)| f.derivative(i, x) * g).collect();
    SpectralState::from_vec_unchecked(c.analyze(&prod))
}

/// Solver states at every step of the time mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    /// Row-major `(steps + 1) × dim`.
    states: Vec<f64>,
    pub config: SchemeConfig,
    pub driver_digest: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coeffs(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn state(&self, k: usize) -> SpectralState {
        SpectralState::from_vec_unchecked(self.coeffs(k).to_vec())
    }

    pub fn last(&self) -> SpectralState {
        self.state(self.len() - 1)
    }

    /// `t ↦ Y_t(ξ)` at every stored time.
    pub fn probe(&self, xi: f64) -> Vec<f64> {
        let basis: Vec<f64> = (1..=self.dim)
            .map(|l| std::f64::consts::SQRT_2 * (PI * l as f64 * xi).sin())
            .collect();
        (0..self.len())
            .map(|k| self.coeffs(k).iter().zip(&basis).map(|(c, b)| c * b).sum())
            .collect()
    }

    /// Header `t,y1,…,yN`.
    pub fn write_spectral_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|l| format!("y{l}")));
        wtr.write_record(&header)?;
        for k in 0..self.len() {
            let mut rec = Vec::with_capacity(self.dim + 1);
            rec.push(fmt_float(self.times[k]));
            rec.extend(self.coeffs(k).iter().map(|v| fmt_float(*v)));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Header `t,xi1,…`; the values are the states synthesized on the interior
    /// grid of `grid_size` points (at least the number of modes).
    pub fn write_grid_csv<W: Write>(&self, w: W, grid_size: usize) -> Result<()> {
        if grid_size < self.dim {
            return Err(Error::invalid(format!(
                "grid of {grid_size} points cannot hold {} modes",
                self.dim
            )));
        }
        let t = SineTransform::new(grid_size);
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend(crate::spectral::grid_points(grid_size).map(fmt_float));
        wtr.write_record(&header)?;
        for k in 0..self.len() {
            let mut rec = Vec::with_capacity(grid_size + 1);
            rec.push(fmt_float(self.times[k]));
            rec.extend(t.synthesize(self.coeffs(k)).into_iter().map(fmt_float));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// One-step propagator for a fixed configuration.
#[derive(Clone, Debug)]
pub struct Stepper {
    scheme: Scheme,
    nonlinearity: Nonlinearity,
    weights: KernelWeights,
    colloc: Collocation,
}

impl Stepper {
    pub fn new(config: &SchemeConfig) -> Self {
        Self {
            scheme: config.scheme,
            nonlinearity: config.nonlinearity.clone(),
            weights: KernelWeights::new(config.modes, config.step_size(), config.kappa),
            colloc: Collocation::new(config.modes, config.grid_size()),
        }
    }

    pub fn weights(&self) -> &KernelWeights {
        &self.weights
    }

    /// Advances `coeffs` in place by one step with driver increments `dx`.
    pub fn step(&self, coeffs: &mut [f64], dx: &[f64]) {
        let f = &self.nonlinearity;
        let w = &self.weights;
        let u = self.colloc.synthesize(coeffs);
        // Σ_i Δx^i f_i(u), analysis is linear
        let forcing: Vec<f64> = u
            .iter()
            .map(|&x| dx.iter().enumerate().map(|(i, d)| d * f.value(i, x)).sum())
            .collect();
        let first = self.colloc.analyze(&forcing);

        let second = match self.scheme {
            Scheme::Euler => None,
            Scheme::Milstein => {
                // Σ_j Δx^j P_N f_j(u) is exactly the first-order coefficients
                let g = self.colloc.synthesize(&first);
                let prod: Vec<f64> = u
                    .iter()
                    .zip(&g)
                    .map(|(&x, g)| {
                        let d: f64 =
                            dx.iter().enumerate().map(|(i, d)| d * f.derivative(i, x)).sum();
                        d * g
                    })
                    .collect();
                Some(self.colloc.analyze(&prod))
            }
        };

        for l in 0..coeffs.len() {
            let mut next = w.decay[l] * coeffs[l] + w.w1[l] * first[l];
            if let Some(s) = &second {
                next += w.w2[l] * s[l];
            }
            coeffs[l] = next;
        }
    }
}

fn check_driver(config: &SchemeConfig, driver: &DriverPath) -> Result<()> {
    if driver.steps() != config.steps() {
        return Err(Error::invalid(format!(
            "driver has {} steps but the {} scheme needs {}",
            driver.steps(),
            config.scheme.name(),
            config.steps()
        )));
    }
    if driver.components() != config.nonlinearity.components() {
        return Err(Error::invalid(format!(
            "driver has {} components but the nonlinearity has {}",
            driver.components(),
            config.nonlinearity.components()
        )));
    }
    Ok(())
}

/// Runs whichever scheme `config` names.
pub fn run(config: &SchemeConfig, driver: &DriverPath) -> Result<Trajectory> {
    for w in config.validate()? {
        log::warn!("{w}");
    }
    check_driver(config, driver)?;
    let n = config.modes;
    let steps = config.steps();
    let stepper = Stepper::new(config);

    let mut states = Vec::with_capacity((steps + 1) * n);
    let mut y = config.initial.resized(n).into_coeffs();
    states.extend_from_slice(&y);
    let mut dx = vec![0.0; driver.components()];
    for k in 0..steps {
        for (i, d) in dx.iter_mut().enumerate() {
            *d = driver.increment(k, i);
        }
        stepper.step(&mut y, &dx);
        if y.iter().any(|c| !c.is_finite()) {
            let max_abs = y.iter().fold(0.0f64, |m, c| if c.is_nan() { m } else { m.max(c.abs()) });
            return Err(Error::NonFinite { step: k + 1, max_abs });
        }
        states.extend_from_slice(&y);
    }
    Ok(Trajectory {
        dim: n,
        times: (0..=steps).map(|k| k as f64 / steps as f64).collect(),
        states,
        config: config.clone(),
        driver_digest: driver.digest(),
    })
}

/// First-order scheme on `M` uniform steps.
pub fn euler_run(config: &SchemeConfig, driver: &DriverPath) -> Result<Trajectory> {
    if config.scheme != Scheme::Euler {
        return Err(Error::invalid("euler_run needs an Euler configuration"));
    }
    run(config, driver)
}

/// Second-order scheme on `2^M` dyadic steps.
pub fn milstein_run(config: &SchemeConfig, driver: &DriverPath) -> Result<Trajectory> {
    if config.scheme != Scheme::Milstein {
        return Err(Error::invalid("milstein_run needs a Milstein configuration"));
    }
    run(config, driver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::sample_fbm;
    use crate::spectral::{semigroup_apply, Eigensystem};

    #[test]
    fn rational_derivative_matches_differences() {
        Nonlinearity::rational(5.0, 2).verify().unwrap();
        let s = Nonlinearity::new(
            "mix",
            vec![ScalarField::Sine { amplitude: 0.5, frequency: 2.0 }, ScalarField::Affine { a: 2.0, b: -1.0 }],
        )
        .unwrap();
        s.verify().unwrap();
    }

    #[test]
    fn rational_values() {
        let f = ScalarField::Rational { k: 2.0 };
        assert_eq!(f.value(0.0), 2.0);
        assert_eq!(f.value(1.0), 0.0);
        assert_eq!(f.derivative(0.0), -2.0);
    }

    #[test]
    fn zero_nonlinearity_gives_zero_state() {
        let y = SpectralState::new(vec![0.3, -0.2, 0.1]).unwrap();
        let z = eval_nonlinearity(&y, &Nonlinearity::zero(1), 0, 3, 1);
        assert!(z.coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn identity_on_band_limited_state() {
        let y = SpectralState::new(vec![0.3, -0.2, 0.1, 0.05]).unwrap();
        let id = Nonlinearity::new("id", vec![ScalarField::Affine { a: 1.0, b: 0.0 }]).unwrap();
        let out = eval_nonlinearity(&y, &id, 0, 4, 2);
        for (a, b) in out.coeffs().iter().zip(y.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        let trunc = eval_nonlinearity(&y, &id, 0, 2, 2);
        assert_eq!(trunc.dim(), 2);
        assert!((trunc.coeffs()[1] + 0.2).abs() < 1e-12);
    }

    #[test]
    fn milstein_product_vanishes_for_constant_field() {
        let y = SpectralState::new(vec![0.3, -0.2, 0.1]).unwrap();
        let p = eval_milstein_product(&y, &Nonlinearity::constant(2.0, 1), 0, 0, 3, 2);
        assert!(p.coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn milstein_product_with_unit_slope_is_projected_constant() {
        // f(x) = x + c has f' = 1, so the product is P_N f(y); with y = 0 this
        // is the spectral constant c.
        let y = SpectralState::zeros(6);
        let f = Nonlinearity::new("shift", vec![ScalarField::Affine { a: 1.0, b: 0.7 }]).unwrap();
        let p = eval_milstein_product(&y, &f, 0, 0, 6, 1);
        let c = eval_nonlinearity(&y, &Nonlinearity::constant(0.7, 1), 0, 6, 1);
        for (a, b) in p.coeffs().iter().zip(c.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_forcing_is_pure_decay() {
        let mut cfg = SchemeConfig::new(Scheme::Euler, 40, 8, 0.6);
        cfg.nonlinearity = Nonlinearity::zero(1);
        cfg.kappa = 0.5;
        let driver = sample_fbm(0.6, 40, 1, 3).unwrap();
        let traj = euler_run(&cfg, &driver).unwrap();
        let sys = Eigensystem::new(8, 0.5).unwrap();
        for k in [0, 1, 17, 40] {
            let want = semigroup_apply(&cfg.initial, traj.times()[k], &sys);
            for (a, b) in traj.coeffs(k).iter().zip(want.coeffs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let mut cfg = SchemeConfig::new(Scheme::Milstein, 5, 16, 0.4);
        cfg.nonlinearity = Nonlinearity::rational(3.0, 1);
        let driver = sample_fbm(0.4, 32, 1, 9).unwrap();
        let a = milstein_run(&cfg, &driver).unwrap();
        let b = milstein_run(&cfg, &driver).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mismatched_driver_is_rejected() {
        let cfg = SchemeConfig::new(Scheme::Milstein, 5, 4, 0.4);
        let driver = sample_fbm(0.4, 16, 1, 9).unwrap();
        assert!(milstein_run(&cfg, &driver).is_err());
        assert!(euler_run(&cfg, &driver).is_err());
        let two = sample_fbm(0.4, 32, 2, 9).unwrap();
        assert!(milstein_run(&cfg, &two).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let mut cfg = SchemeConfig::new(Scheme::Euler, 4, 2, 0.6);
        cfg.nonlinearity =
            Nonlinearity::new("huge", vec![ScalarField::Affine { a: 1e200, b: 1e200 }]).unwrap();
        let driver = DriverPath::from_rows(vec![0.0, 1e200, 2e200, 3e200, 4e200], 1, 0.6, 0).unwrap();
        match euler_run(&cfg, &driver) {
            Err(Error::NonFinite { step, .. }) => assert!(step >= 1),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn hypothesis_windows_warn() {
        let mut cfg = SchemeConfig::new(Scheme::Euler, 16, 8, 0.6);
        cfg.gamma = Some(0.55);
        cfg.gamma_prime = Some(0.48);
        assert!(cfg.validate().unwrap().is_empty());
        cfg.gamma_prime = Some(0.3);
        assert_eq!(cfg.validate().unwrap().len(), 1);
        let mut m = SchemeConfig::new(Scheme::Milstein, 4, 8, 0.4);
        m.gamma = Some(0.38);
        m.gamma_prime = Some(0.65);
        assert!(m.validate().unwrap().is_empty());
        m.gamma_prime = Some(0.8);
        assert!(!m.validate().unwrap().is_empty());
        m.kappa = -1.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn probe_matches_point_evaluation() {
        let cfg = SchemeConfig::new(Scheme::Euler, 8, 6, 0.6);
        let driver = sample_fbm(0.6, 8, 1, 1).unwrap();
        let traj = euler_run(&cfg, &driver).unwrap();
        let p = traj.probe(0.3);
        for k in 0..traj.len() {
            assert!((p[k] - traj.state(k).evaluate(0.3)).abs() < 1e-14);
        }
    }
}
