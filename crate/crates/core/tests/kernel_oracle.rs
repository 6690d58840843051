mod common;

use rough_heat::kernels::{weight1, weight2, KernelWeights};

use common::{integrate, weights_extended};

/// 200 `(λ, h)` pairs with `λh` log-spaced over `[1e-8, 1e3]`.
fn lattice() -> Vec<(f64, f64)> {
    (0..200)
        .map(|i| {
            let z = 10f64.powf(-8.0 + 11.0 * i as f64 / 199.0);
            let h = [1.0, 1e-2, 1.0 / 4096.0, 0.37][i % 4];
            (z / h, h)
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn weights_match_quadrature_of_their_integrals() {
    for (lam, h) in lattice() {
        let z = lam * h;
        // w1 = (1/h)∫_0^h e^{-λ(h-u)} du,  w2 = (1/h²)∫_0^h e^{-λ(h-u)} u du, in s = u/h
        let i1 = integrate(&|s| (-z * (1.0 - s)).exp(), 0.0, 1.0, 1e-15);
        let i2 = integrate(&|s| (-z * (1.0 - s)).exp() * s, 0.0, 1.0, 1e-15);
        assert!(rel(weight1(lam, h), i1) < 1e-10, "w1 at z={z}: {} vs {i1}", weight1(lam, h));
        assert!(rel(weight2(lam, h), i2) < 1e-10, "w2 at z={z}: {} vs {i2}", weight2(lam, h));
    }
}

#[test]
fn series_branch_matches_extended_precision() {
    for i in 0..100 {
        let z = 10f64.powf(-12.0 + 8.0 * i as f64 / 99.0);
        if z >= 1e-4 {
            continue;
        }
        let (e1, e2) = weights_extended(z);
        assert!(rel(weight1(z, 1.0), e1) < 1e-12, "z={z}");
        // double-double leaves ~1e-32 absolute error on z − 1 + e^{−z} ≈ z²/2
        if z >= 1e-9 {
            assert!(rel(weight2(z, 1.0), e2) < 1e-12, "z={z}");
        }
    }
}

#[test]
fn closed_form_branch_matches_extended_precision() {
    for i in 0..100 {
        let z = 10f64.powf(-4.0 + 4.0 * i as f64 / 99.0);
        let (e1, e2) = weights_extended(z);
        assert!(rel(weight1(z, 1.0), e1) < 1e-12, "z={z}");
        // residual cancellation of order 4e-16/z just above the threshold
        assert!(rel(weight2(z, 1.0), e2) < 1e-11, "z={z}");
    }
}

#[test]
fn bounds_and_monotonicity() {
    let mut prev = (f64::INFINITY, f64::INFINITY);
    let mut zs: Vec<f64> = lattice().iter().map(|(l, h)| l * h).collect();
    zs.sort_by(f64::total_cmp);
    for z in zs {
        let (w1, w2) = (weight1(z, 1.0), weight2(z, 1.0));
        assert!(w1 > 0.0 && w1 <= 1.0);
        assert!(w2 > 0.0 && w2 <= 0.5);
        // w2 is w1 reweighted by s ∈ [0,1] with most mass at s = 1
        assert!(w2 <= w1 && w2 >= 0.5 * w1 * (1.0 - 1e-15), "z={z}");
        assert!(w1 < prev.0 && w2 < prev.1, "not decreasing at z={z}");
        prev = (w1, w2);
    }
}

#[test]
fn table_uses_rescaled_step() {
    let t = KernelWeights::new(8, 1.0 / 1000.0, 100.0);
    for l in 1..=8 {
        let lam = common::lambda(l);
        assert_eq!(t.w1[l - 1], weight1(lam, 0.1));
        assert_eq!(t.w2[l - 1], weight2(lam, 0.1));
        assert!(rel(t.decay[l - 1], (-lam * 0.1).exp()) < 1e-15);
    }
}
