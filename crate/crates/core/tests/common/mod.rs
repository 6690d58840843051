//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics.

#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

/// Adaptive Gauss–Kronrod (7, 15) quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const XGK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WGK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WGK[7] * fc;
        let mut g = WG[3] * fc;
        for j in 0..7 {
            let x = h * XGK[j];
            let s = f(c - x) + f(c + x);
            k += WGK[j] * s;
            if j % 2 == 1 {
                g += WG[j / 2] * s;
            }
        }
        (k * h, ((k - g) * h).abs())
    }
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (k, err) = rule(f, a, b);
        if err <= tol.max(1e-300) || depth > 50 {
            return k;
        }
        let m = 0.5 * (a + b);
        go(f, a, m, 0.5 * tol, depth + 1) + go(f, m, b, 0.5 * tol, depth + 1)
    }
    go(f, a, b, tol, 0)
}

/// Double-double number `hi + lo`.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let mut r = Dd::two_sum(s.hi, s.lo + t.hi);
        r = Dd::two_sum(r.hi, r.lo + t.lo);
        r
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::two_sum(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::new(q2)));
        let q3 = r.hi / o.hi;
        Dd::two_sum(q1, q2).add(Dd::new(q3))
    }

    /// `e^{-z}` for `0 ≤ z ≤ 1` by its Taylor series.
    pub fn exp_neg(z: f64) -> Dd {
        assert!((0.0..=1.0).contains(&z));
        let mz = Dd::new(-z);
        let mut term = Dd::new(1.0);
        let mut sum = Dd::new(1.0);
        for n in 1..40 {
            term = term.mul(mz).div(Dd::new(n as f64));
            sum = sum.add(term);
        }
        sum
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `(1 − e^{−z})/z` and `(z − 1 + e^{−z})/z²` evaluated in double-double.
pub fn weights_extended(z: f64) -> (f64, f64) {
    let e = Dd::exp_neg(z);
    let one = Dd::new(1.0);
    let zz = Dd::new(z);
    let w1 = one.sub(e).div(zz);
    let w2 = zz.sub(one).add(e).div(zz.mul(zz));
    (w1.to_f64(), w2.to_f64())
}

pub fn basis(l: usize, xi: f64) -> f64 {
    SQRT_2 * (PI * l as f64 * xi).sin()
}

pub fn lambda(l: usize) -> f64 {
    let n = l as f64;
    PI * PI * n * n
}

/// `Σ_q y_q e_q(ξ)` summed directly.
pub fn synth_at(y: &[f64], xi: f64) -> f64 {
    y.iter().enumerate().map(|(q, c)| c * basis(q + 1, xi)).sum()
}

/// Quadrature coefficients `(1/(G+1)) Σ_n g(ξ_n) e_l(ξ_n)` on `ξ_n = n/(G+1)`.
pub fn analyze_direct(values: &[f64], n_modes: usize) -> Vec<f64> {
    let g = values.len();
    let w = 1.0 / (g + 1) as f64;
    (1..=n_modes)
        .map(|l| {
            values
                .iter()
                .enumerate()
                .map(|(n, v)| v * basis(l, (n + 1) as f64 * w))
                .sum::<f64>()
                * w
        })
        .collect()
}

/// Discrete coefficients of the constant 1 on a grid of `g` interior points:
/// `√2 cot(lπ/(2(g+1)))/(g+1)` for odd `l`, 0 for even.
pub fn discrete_one(l: usize, g: usize) -> f64 {
    if l % 2 == 0 {
        0.0
    } else {
        let n1 = (g + 1) as f64;
        SQRT_2 / ((l as f64 * PI / (2.0 * n1)).tan() * n1)
    }
}

/// `⟨P_N f_j(Y) · f_i'(Y), e_l⟩` as the literal triple sum over the grid:
/// `(1/(G+1))² Σ_m Σ_{p≤N} Σ_n f_j(Y(ξ_n)) e_p(ξ_n) e_p(ξ_m) f_i'(Y(ξ_m)) e_l(ξ_m)`.
pub fn milstein_triple_sum(
    y: &[f64],
    fj: &dyn Fn(f64) -> f64,
    dfi: &dyn Fn(f64) -> f64,
    n_modes: usize,
    grid: usize,
) -> Vec<f64> {
    let w = 1.0 / (grid + 1) as f64;
    let pts: Vec<f64> = (1..=grid).map(|n| n as f64 * w).collect();
    let yv: Vec<f64> = pts.iter().map(|&x| synth_at(y, x)).collect();
    (1..=n_modes)
        .map(|l| {
            let mut total = 0.0;
            for (m, &xm) in pts.iter().enumerate() {
                let mut inner = 0.0;
                for p in 1..=n_modes {
                    let mut s = 0.0;
                    for (n, &xn) in pts.iter().enumerate() {
                        s += fj(yv[n]) * basis(p, xn);
                    }
                    inner += s * basis(p, xm);
                }
                total += inner * dfi(yv[m]) * basis(l, xm);
            }
            total * w * w
        })
        .collect()
}

/// Mild solution of the constant-forcing equation driven by the piecewise
/// linear path `x` (values at `k/K`), evaluated at every node:
/// `Y^l_{t_K} = e^{−κλ t_K} ψ^l + c q_l Σ_{k<K} e^{−κλ(t_K − t_{k+1})} (Δx_k/h) (1 − e^{−κλh})/(κλ)`.
pub fn linear_mild_solution(
    psi: &[f64],
    c: f64,
    q: &[f64],
    x: &[f64],
    kappa: f64,
) -> Vec<Vec<f64>> {
    let steps = x.len() - 1;
    let h = 1.0 / steps as f64;
    (0..=steps)
        .map(|big_k| {
            let t = big_k as f64 * h;
            (0..psi.len())
                .map(|l| {
                    let kl = kappa * lambda(l + 1);
                    let conv = -(-kl * h).exp_m1() / kl;
                    let forcing: f64 = (0..big_k)
                        .map(|k| {
                            let lag = t - (k + 1) as f64 * h;
                            (-kl * lag).exp() * (x[k + 1] - x[k]) / h * conv
                        })
                        .sum();
                    (-kl * t).exp() * psi[l] + c * q[l] * forcing
                })
                .collect()
        })
        .collect()
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
