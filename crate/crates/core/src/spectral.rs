//! Dirichlet Laplacian eigenbasis on (0,1).
//!
//! States are coefficient vectors in the orthonormal basis
//! `e_n(ξ) = √2 sin(nπξ)` with eigenvalues `λ_n = π²n²`. Grid functions live
//! on the interior points `ξ_n = n/(N_g+1)`, `n = 1..N_g`, where the sine-I
//! transform below is exactly orthogonal.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `(y^1, …, y^N)` of a function in the basis `e_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    coeffs: Vec<f64>,
}

impl SpectralState {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("spectral state needs at least one mode"));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("coefficient {} is not finite", i + 1)));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "spectral state needs at least one mode");
        Self { coeffs: vec![0.0; dim] }
    }

    /// The basis vector `e_mode` (1-based) in a space of dimension `dim`.
    pub fn basis(dim: usize, mode: usize) -> Self {
        assert!(mode >= 1 && mode <= dim, "mode {mode} outside 1..={dim}");
        let mut s = Self::zeros(dim);
        s.coeffs[mode - 1] = 1.0;
        s
    }

    /// Builds a state from coefficients against the plain sines `sin(nπξ)`,
    /// i.e. `ψ = Σ a_n sin(nπξ)`. Coefficients beyond `dim` are dropped.
    pub fn from_sine_coefficients(raw: &[f64], dim: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; dim.max(1)];
        for (c, a) in coeffs.iter_mut().zip(raw) {
            *c = a / SQRT_2;
        }
        Self::new(coeffs)
    }

    pub(crate) fn from_vec_unchecked(coeffs: Vec<f64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Truncates or zero-pads to `dim` modes.
    pub fn resized(&self, dim: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(dim.max(1), 0.0);
        Self { coeffs }
    }

    /// Point evaluation `Σ_l y^l √2 sin(lπξ)`.
    pub fn evaluate(&self, xi: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * SQRT_2 * (PI * (i + 1) as f64 * xi).sin())
            .sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let dim = self.dim().max(other.dim());
        let coeffs = (0..dim)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or(0.0)
                    - other.coeffs.get(i).copied().unwrap_or(0.0)
            })
            .collect();
        Self { coeffs }
    }
}

/// Samples at the interior points `ξ_n = n/(N_g+1)`; boundary values are 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("grid function needs at least one point"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite"));
        }
        Ok(Self { values })
    }

    /// Samples `f` on the interior grid of size `grid_size`.
    pub fn sample(grid_size: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid_points(grid_size).map(f).collect())
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn points(&self) -> impl Iterator<Item = f64> {
        grid_points(self.grid_size())
    }
}

pub fn grid_points(grid_size: usize) -> impl Iterator<Item = f64> {
    let denom = (grid_size + 1) as f64;
    (1..=grid_size).map(move |n| n as f64 / denom)
}

/// `λ_n = π²n²` together with the clock multiplier applied to the semigroup.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigensystem {
    dim: usize,
    time_scale: f64,
}

impl Eigensystem {
    pub fn new(dim: usize, time_scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("eigensystem dimension must be positive"));
        }
        if !(time_scale > 0.0 && time_scale.is_finite()) {
            return Err(Error::invalid(format!("time scale must be positive, got {time_scale}")));
        }
        Ok(Self { dim, time_scale })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn eigenvalue(&self, mode: usize) -> f64 {
        eigenvalue(mode)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.dim).map(eigenvalue).collect()
    }
}

/// `λ_n = π² n²` for the 1-based mode `n`.
#[inline]
pub fn eigenvalue(mode: usize) -> f64 {
    let n = mode as f64;
    PI * PI * n * n
}

/// `sqrt(Σ λ_n^{2κ} (y^n)²)`; negative `kappa` is allowed.
pub fn sobolev_norm(y: &SpectralState, kappa: f64) -> f64 {
    sobolev_norm_coeffs(y.coeffs(), kappa)
}

pub(crate) fn sobolev_norm_coeffs(coeffs: &[f64], kappa: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| eigenvalue(i + 1).powf(2.0 * kappa) * c * c)
        .sum::<f64>()
        .sqrt()
}

/// Galerkin projection onto the first `n` modes; the dimension is kept.
pub fn project(y: &SpectralState, n: usize) -> SpectralState {
    let coeffs = y
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| if i < n { c } else { 0.0 })
        .collect();
    SpectralState { coeffs }
}

/// `y^n ↦ e^{-κ λ_n t} y^n`.
pub fn semigroup_apply(y: &SpectralState, t: f64, sys: &Eigensystem) -> SpectralState {
    assert!(t >= 0.0, "semigroup time must be nonnegative");
    let kt = sys.time_scale() * t;
    let coeffs = y
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c * (-eigenvalue(i + 1) * kt).exp())
        .collect();
    SpectralState { coeffs }
}

/// Sine-I transform on a fixed interior grid, backed by a cached FFT plan.
#[derive(Clone)]
pub struct SineTransform {
    grid_size: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SineTransform").field("grid_size", &self.grid_size).finish()
    }
}

impl SineTransform {
    pub fn new(grid_size: usize) -> Self {
        assert!(grid_size >= 1, "grid size must be positive");
        let fft = FftPlanner::new().plan_fft_forward(2 * (grid_size + 1));
        Self { grid_size, fft }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// `S_l = Σ_{k=1}^{n} x_k sin(π k l/(n+1))` for `l = 1..n`, with `x`
    /// zero-padded to the grid size. Computed from the odd extension.
    fn dst1(&self, x: &[f64]) -> Vec<f64> {
        let n = self.grid_size;
        debug_assert!(x.len() <= n);
        let len = 2 * (n + 1);
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        for (k, &v) in x.iter().enumerate() {
            buf[k + 1].re = v;
            buf[len - k - 1].re = -v;
        }
        self.fft.process(&mut buf);
        buf[1..=n].iter().map(|z| -0.5 * z.im).collect()
    }

    /// Grid values to the first `n_modes` coefficients.
    pub fn analyze(&self, values: &[f64], n_modes: usize) -> Vec<f64> {
        assert_eq!(values.len(), self.grid_size);
        assert!(n_modes <= self.grid_size);
        let scale = SQRT_2 / (self.grid_size + 1) as f64;
        let mut out = self.dst1(values);
        out.truncate(n_modes);
        out.iter_mut().for_each(|c| *c *= scale);
        out
    }

    /// Coefficients (at most `grid_size` of them) to grid values.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        assert!(coeffs.len() <= self.grid_size);
        let mut out = self.dst1(coeffs);
        out.iter_mut().for_each(|v| *v *= SQRT_2);
        out
    }
}

/// `ĝ_l = (1/(N_g+1)) Σ_n g(ξ_n) √2 sin(lπξ_n)` for `l = 1..n_modes`.
pub fn grid_to_spectral(g: &GridFunction, n_modes: usize) -> Result<SpectralState> {
    if n_modes == 0 || n_modes > g.grid_size() {
        return Err(Error::invalid(format!(
            "cannot analyze {} grid points into {} modes",
            g.grid_size(),
            n_modes
        )));
    }
    let t = SineTransform::new(g.grid_size());
    Ok(SpectralState::from_vec_unchecked(t.analyze(g.values(), n_modes)))
}

/// Exact synthesis of `y` at the interior points of a grid of `grid_size`.
pub fn spectral_to_grid(y: &SpectralState, grid_size: usize) -> Result<GridFunction> {
    if grid_size < y.dim() {
        return Err(Error::invalid(format!(
            "grid of {} points cannot hold {} modes",
            grid_size,
            y.dim()
        )));
    }
    let t = SineTransform::new(grid_size);
    Ok(GridFunction { values: t.synthesize(y.coeffs()) })
}
