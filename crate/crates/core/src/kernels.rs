//! Per-mode exponential-integrator weights for piecewise-linear drivers.
//!
//! On one step of length `h` the linear interpolation moves at constant speed
//! `Δx/h`, so the first- and second-order convolution operators are diagonal
//! in the eigenbasis with weights
//!
//! ```text
//! w1(λ, h) = (1/h)  ∫_0^h e^{-λ(h-u)} du     = (1 - e^{-z}) / z
//! w2(λ, h) = (1/h²) ∫_0^h e^{-λ(h-u)} u du   = (z - 1 + e^{-z}) / z²
//! ```
//!
//! with `z = λh`. Below `z = 1e-4` both closed forms lose digits to
//! cancellation, so a five-term Taylor series is used instead. Above it the
//! relative error of `w2` is still about `4e-16 / z`.

use crate::spectral::eigenvalue;

const SERIES_THRESHOLD: f64 = 1e-4;

/// `(1 - e^{-λh}) / (λh)`, equal to 1 at `λ = 0`.
pub fn weight1(lambda: f64, h: f64) -> f64 {
    debug_assert!(lambda >= 0.0 && h > 0.0);
    let z = lambda * h;
    if z < SERIES_THRESHOLD {
        // Σ (-z)^n / (n+1)!
        1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0 + z * z * z * z / 120.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// `∫_0^1 e^{-λh(1-s)} s ds`, equal to 1/2 at `λ = 0`.
pub fn weight2(lambda: f64, h: f64) -> f64 {
    debug_assert!(lambda >= 0.0 && h > 0.0);
    let z = lambda * h;
    if z < SERIES_THRESHOLD {
        // Σ (-z)^n / (n+2)!
        0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0 + z * z * z * z / 720.0
    } else {
        (z + (-z).exp_m1()) / (z * z)
    }
}

/// Weight tables for one step size and truncation level.
///
/// `step` is the physical step; the semigroup clock multiplier is folded in
/// as `h_eff = time_scale * step` before evaluating the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelWeights {
    pub decay: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub step: f64,
    pub time_scale: f64,
}

impl KernelWeights {
    pub fn new(dim: usize, step: f64, time_scale: f64) -> Self {
        let h = time_scale * step;
        let lambdas = (1..=dim).map(eigenvalue);
        let mut decay = Vec::with_capacity(dim);
        let mut w1 = Vec::with_capacity(dim);
        let mut w2 = Vec::with_capacity(dim);
        for l in lambdas {
            decay.push((-l * h).exp());
            w1.push(weight1(l, h));
            w2.push(weight2(l, h));
        }
        Self { decay, w1, w2, step, time_scale }
    }

    pub fn dim(&self) -> usize {
        self.w1.len()
    }

    /// `time_scale * step`, the argument the weights were evaluated at.
    pub fn effective_step(&self) -> f64 {
        self.time_scale * self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn weight1_examples() {
        assert_eq!(weight1(0.0, 1.0), 1.0);
        assert!(rel(weight1(1.0, 1.0), 1.0 - (-1.0f64).exp()) < 1e-15);
        assert!(rel(weight1(50.0, 1.0), 0.02) < 1e-15);
    }

    #[test]
    fn weight2_examples() {
        assert_eq!(weight2(0.0, 1.0), 0.5);
        assert!(rel(weight2(1.0, 1.0), (-1.0f64).exp()) < 1e-14);
        assert!(rel(weight2(50.0, 1.0), 0.0196) < 1e-12);
    }

    #[test]
    fn branches_agree_at_threshold() {
        let below = SERIES_THRESHOLD * (1.0 - 1e-9);
        let above = SERIES_THRESHOLD * (1.0 + 1e-9);
        assert!(rel(weight1(below, 1.0), weight1(above, 1.0)) < 1e-11);
        assert!(rel(weight2(below, 1.0), weight2(above, 1.0)) < 1e-11);
    }

    #[test]
    fn table_folds_time_scale() {
        let t = KernelWeights::new(3, 0.01, 100.0);
        assert_eq!(t.dim(), 3);
        assert_eq!(t.w1[1], weight1(eigenvalue(2), 1.0));
        assert_eq!(t.decay[0], (-eigenvalue(1)).exp());
        assert!((t.effective_step() - 1.0).abs() < 1e-15);
    }
}
