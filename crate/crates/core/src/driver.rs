//! Fractional Brownian drivers and their rough-path diagnostics.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::fmt_float;

/// Whether the time partition came from a uniform mesh `k/M` or a dyadic
/// mesh `k/2^M`. Only the step count matters numerically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    Uniform,
    Dyadic,
}

/// `m` scalar paths sampled at `t_k = k/steps`, `k = 0..=steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriverPath {
    steps: usize,
    components: usize,
    hurst: f64,
    seed: u64,
    kind: MeshKind,
    /// Row-major `(steps + 1) × components`.
    data: Vec<f64>,
}

impl DriverPath {
    /// Builds a path from row-major samples. Rows are time points.
    pub fn from_rows(
        data: Vec<f64>,
        components: usize,
        hurst: f64,
        seed: u64,
    ) -> Result<Self> {
        if components == 0 {
            return Err(Error::invalid("driver needs at least one component"));
        }
        if data.len() % components != 0 || data.len() / components < 2 {
            return Err(Error::invalid(format!(
                "driver samples of length {} do not form at least two rows of {} components",
                data.len(),
                components
            )));
        }
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::invalid(format!("Hurst index {hurst} outside (0,1)")));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("driver samples must be finite"));
        }
        if data[..components].iter().any(|v| *v != 0.0) {
            return Err(Error::invalid("driver must start at 0"));
        }
        let steps = data.len() / components - 1;
        let kind = if steps.is_power_of_two() && steps > 1 {
            MeshKind::Dyadic
        } else {
            MeshKind::Uniform
        };
        Ok(Self { steps, components, hurst, seed, kind, data })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// `log2(steps)` when the mesh is dyadic.
    pub fn dyadic_exponent(&self) -> Option<u32> {
        self.steps.is_power_of_two().then(|| self.steps.trailing_zeros())
    }

    pub fn step_size(&self) -> f64 {
        1.0 / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.steps as f64
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.components..(k + 1) * self.components]
    }

    pub fn value(&self, k: usize, component: usize) -> f64 {
        self.data[k * self.components + component]
    }

    pub fn increment(&self, k: usize, component: usize) -> f64 {
        self.value(k + 1, component) - self.value(k, component)
    }

    pub fn rows(&self) -> &[f64] {
        &self.data
    }

    /// The component as a time series of `steps + 1` values.
    pub fn component(&self, component: usize) -> Vec<f64> {
        (0..=self.steps).map(|k| self.value(k, component)).collect()
    }

    /// Exact subsampling onto the nested mesh with `coarse_steps` intervals.
    pub fn restrict(&self, coarse_steps: usize) -> Result<Self> {
        let ratio = nesting_ratio(self.steps, coarse_steps)?;
        let data = (0..=coarse_steps)
            .flat_map(|k| self.row(k * ratio).iter().copied())
            .collect();
        let mut out = Self::from_rows(data, self.components, self.hurst, self.seed)?;
        out.kind = if coarse_steps.is_power_of_two() { self.kind } else { MeshKind::Uniform };
        Ok(out)
    }

    /// Linear interpolation of the `coarse_steps` subsample, evaluated on this
    /// path's own grid. Equal to `self` at every coarse node.
    pub fn coarse_interpolation(&self, coarse_steps: usize) -> Result<Self> {
        let ratio = nesting_ratio(self.steps, coarse_steps)?;
        let m = self.components;
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..=self.steps {
            let (k, r) = (j / ratio, j % ratio);
            if r == 0 {
                data.extend_from_slice(self.row(j));
            } else {
                let w = r as f64 / ratio as f64;
                let (a, b) = (self.row(k * ratio), self.row((k + 1) * ratio));
                data.extend((0..m).map(|i| a[i] + w * (b[i] - a[i])));
            }
        }
        let mut out = Self::from_rows(data, m, self.hurst, self.seed)?;
        out.kind = self.kind;
        Ok(out)
    }

    /// SHA-256 over the mesh, shape and little-endian samples.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.steps as u64).to_le_bytes());
        h.update((self.components as u64).to_le_bytes());
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// CSV with header `t,x1,…,xm` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.components).map(|i| format!("x{i}")));
        wtr.write_record(&header)?;
        for k in 0..=self.steps {
            let mut rec = vec![fmt_float(self.time(k))];
            rec.extend(self.row(k).iter().map(|v| fmt_float(*v)));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, hurst: f64, seed: u64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "t" {
            return Err(Error::invalid("driver CSV needs a header `t,x1,…`"));
        }
        let m = headers.len() - 1;
        let mut data = Vec::new();
        let mut times = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad number {s:?}: {e}")))
            };
            times.push(parse(&rec[0])?);
            for i in 1..=m {
                data.push(parse(&rec[i])?);
            }
        }
        let path = Self::from_rows(data, m, hurst, seed)?;
        for (k, t) in times.iter().enumerate() {
            if (t - path.time(k)).abs() > 1e-12 {
                return Err(Error::invalid(format!("row {k}: time {t} is not on a uniform mesh")));
            }
        }
        Ok(path)
    }
}

fn nesting_ratio(fine: usize, coarse: usize) -> Result<usize> {
    if coarse == 0 || fine % coarse != 0 {
        return Err(Error::invalid(format!(
            "mesh with {coarse} steps is not nested in mesh with {fine} steps"
        )));
    }
    Ok(fine / coarse)
}

/// Mixes a base seed and a replication index into an independent seed.
pub fn derive_seed(base: u64, replication: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(replication.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Autocovariance of unit-lag fractional Gaussian noise.
fn fgn_autocov(hurst: f64, lag: usize) -> f64 {
    let k = lag as f64;
    let p = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).abs().powf(p))
}

#[derive(Clone)]
enum Factor {
    /// `sqrt(eigenvalue / L)` of the circulant embedding of size `L`.
    Circulant(Vec<f64>, Arc<dyn Fft<f64>>),
    /// Lower-triangular Cholesky factor of the Toeplitz covariance.
    Cholesky(Vec<f64>),
}

/// Exact fBm sampler on a uniform mesh; the factorization is reused across
/// seeds.
#[derive(Clone)]
pub struct FbmSampler {
    hurst: f64,
    steps: usize,
    factor: Factor,
}

impl fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FbmSampler")
            .field("hurst", &self.hurst)
            .field("steps", &self.steps)
            .field("circulant", &self.uses_circulant())
            .finish()
    }
}

const EMBEDDING_RETRIES: u32 = 4;

impl FbmSampler {
    pub fn new(hurst: f64, steps: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::invalid(format!("Hurst index {hurst} outside (0,1)")));
        }
        if steps == 0 {
            return Err(Error::invalid("fBm mesh needs at least one step"));
        }
        let factor = match circulant_factor(hurst, steps) {
            Ok(f) => f,
            Err(e) => {
                log::debug!("{e}; falling back to dense Cholesky");
                cholesky_factor(hurst, steps)?
            }
        };
        Ok(Self { hurst, steps, factor })
    }

    /// Forces the dense Cholesky route.
    pub fn new_cholesky(hurst: f64, steps: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) || steps == 0 {
            return Err(Error::invalid("bad fBm parameters"));
        }
        Ok(Self { hurst, steps, factor: cholesky_factor(hurst, steps)? })
    }

    pub fn uses_circulant(&self) -> bool {
        matches!(self.factor, Factor::Circulant(..))
    }

    /// Unit-variance-per-lag fGn for one component.
    fn fgn(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.steps;
        match &self.factor {
            Factor::Circulant(sqrt_eig, fft) => {
                let mut buf: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..n].iter().map(|z| z.re).collect()
            }
            Factor::Cholesky(l) => {
                let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                (0..n)
                    .map(|i| (0..=i).map(|j| l[i * n + j] * z[j]).sum())
                    .collect()
            }
        }
    }

    /// Samples `components` independent paths. Component `i` draws from the
    /// ChaCha stream `i` of `seed`, so paths do not depend on scheduling.
    pub fn sample(&self, components: usize, seed: u64) -> Result<DriverPath> {
        if components == 0 {
            return Err(Error::invalid("driver needs at least one component"));
        }
        let n = self.steps;
        let scale = (n as f64).powf(-self.hurst);
        let mut data = vec![0.0; (n + 1) * components];
        for i in 0..components {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let noise = self.fgn(&mut rng);
            let mut acc = 0.0;
            for (k, g) in noise.iter().enumerate() {
                acc += scale * g;
                data[(k + 1) * components + i] = acc;
            }
        }
        DriverPath::from_rows(data, components, self.hurst, seed)
    }
}

fn circulant_factor(hurst: f64, steps: usize) -> Result<Factor> {
    let mut half = steps.next_power_of_two();
    for _ in 0..EMBEDDING_RETRIES {
        let len = 2 * half;
        let mut row: Vec<Complex<f64>> = (0..len)
            .map(|k| Complex::new(fgn_autocov(hurst, k.min(len - k)), 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(len);
        fft.process(&mut row);
        let max = row.iter().map(|z| z.re).fold(0.0f64, f64::max);
        let min = row.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        if min >= -1e-10 * max {
            let scale = 1.0 / len as f64;
            return Ok(Factor::Circulant(
                row.iter().map(|z| (z.re.max(0.0) * scale).sqrt()).collect(),
                fft,
            ));
        }
        half *= 2;
    }
    Err(Error::Embedding(format!(
        "no nonnegative circulant embedding for H = {hurst}, {steps} steps"
    )))
}

fn cholesky_factor(hurst: f64, n: usize) -> Result<Factor> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = fgn_autocov(hurst, i - j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Embedding(format!("fGn covariance not positive at row {i}")));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(Factor::Cholesky(l))
}

/// `components` independent fBm paths on `{k/steps}`.
pub fn sample_fbm(hurst: f64, steps: usize, components: usize, seed: u64) -> Result<DriverPath> {
    FbmSampler::new(hurst, steps)?.sample(components, seed)
}

/// fBm on the dyadic mesh `{k/2^exponent}`.
pub fn sample_fbm_dyadic(
    hurst: f64,
    exponent: u32,
    components: usize,
    seed: u64,
) -> Result<DriverPath> {
    let steps = 1usize
        .checked_shl(exponent)
        .filter(|s| *s > 0)
        .ok_or_else(|| Error::invalid(format!("dyadic exponent {exponent} too large")))?;
    let mut p = sample_fbm(hurst, steps, components, seed)?;
    p.kind = MeshKind::Dyadic;
    Ok(p)
}

/// Piecewise-linear interpolation `x^M_t` at `t ∈ [0,1]`.
pub fn interpolate(path: &DriverPath, t: f64) -> Vec<f64> {
    let t = t.clamp(0.0, 1.0);
    let s = t * path.steps() as f64;
    let r = s.round();
    if (s - r).abs() <= 1e-12 * path.steps() as f64 {
        return path.row(r as usize).to_vec();
    }
    let k = (s.floor() as usize).min(path.steps() - 1);
    let w = s - k as f64;
    let (a, b) = (path.row(k), path.row(k + 1));
    a.iter().zip(b).map(|(a, b)| a + w * (b - a)).collect()
}

/// Lévy areas of the piecewise-linear path through the stored samples.
///
/// Only cumulative areas from time 0 are stored; the area over any grid pair
/// is recovered through Chen's relation.
#[derive(Clone, Debug)]
pub struct LevyArea {
    components: usize,
    steps: usize,
    values: Vec<f64>,
    /// `(steps + 1) × m × m`, entry `[k][i][j] = 𝕩^{ij}_{t_k, 0}`.
    cumulative: Vec<f64>,
}

impl LevyArea {
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn x(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.components + i]
    }

    /// `𝕩^{ij}_{ts}` between grid indices `s ≤ t`, row-major `m × m`.
    pub fn area(&self, s: usize, t: usize) -> Vec<f64> {
        let m = self.components;
        let mut out = vec![0.0; m * m];
        self.area_into(s, t, &mut out);
        out
    }

    fn area_into(&self, s: usize, t: usize, out: &mut [f64]) {
        let m = self.components;
        let mm = m * m;
        for i in 0..m {
            let dxi = self.x(t, i) - self.x(s, i);
            for j in 0..m {
                let xs = self.x(s, j) - self.x(0, j);
                out[i * m + j] =
                    self.cumulative[t * mm + i * m + j] - self.cumulative[s * mm + i * m + j] - dxi * xs;
            }
        }
    }
}

/// Areas of the linear interpolation; each segment contributes `½ Δx^i Δx^j`.
pub fn levy_area_linear(path: &DriverPath) -> LevyArea {
    let m = path.components();
    let n = path.steps();
    let mm = m * m;
    let mut cumulative = vec![0.0; (n + 1) * mm];
    for k in 0..n {
        let (a, b) = (path.row(k), path.row(k + 1));
        for i in 0..m {
            let dxi = b[i] - a[i];
            for j in 0..m {
                let dxj = b[j] - a[j];
                let from_start = a[j] - path.value(0, j);
                cumulative[(k + 1) * mm + i * m + j] =
                    cumulative[k * mm + i * m + j] + 0.5 * dxi * dxj + dxi * from_start;
            }
        }
    }
    LevyArea { components: m, steps: n, values: path.rows().to_vec(), cumulative }
}

/// `|lag · step|^{-2·exponent}` stored in reverse: entry `points - 1 - lag`
/// holds the weight for `lag`, so for a fixed `t` the weights of `s = 0..t`
/// form the contiguous slice `[points - 1 - t, points - 1)`.
fn reversed_inverse_lags(points: usize, step: f64, exponent: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..points)
        .map(|lag| if lag == 0 { 0.0 } else { (lag as f64 * step).powf(-2.0 * exponent) })
        .collect();
    w.reverse();
    w
}

/// `max_i a[i] * b[i]` for nonnegative entries.
fn max_weighted(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let mut acc = [0.0f64; LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..LANES {
            let v = x[l] * y[l];
            acc[l] = if v > acc[l] { v } else { acc[l] };
        }
    }
    let mut best = acc.iter().fold(0.0f64, |m, v| m.max(*v));
    for (x, y) in ra.iter().zip(rb) {
        best = best.max(x * y);
    }
    best
}

fn transpose(rows: &[f64], width: usize) -> Vec<Vec<f64>> {
    (0..width).map(|i| rows.iter().skip(i).step_by(width).copied().collect()).collect()
}

/// Discrete γ-Hölder seminorm of rows of width `width` sampled with spacing
/// `step`: `max_{s<t} ‖y_t − y_s‖ / |t−s|^γ` (Euclidean norm across the row).
pub fn holder_norm_values(rows: &[f64], width: usize, step: f64, gamma: f64) -> f64 {
    assert!(width > 0 && rows.len() % width == 0);
    let points = rows.len() / width;
    let w = reversed_inverse_lags(points, step, gamma);
    let cols = transpose(rows, width);
    let best_sq = (1..points)
        .into_par_iter()
        .map_init(
            || vec![0.0; points],
            |d2, t| {
                let d2 = &mut d2[..t];
                d2.iter_mut().for_each(|v| *v = 0.0);
                for c in &cols {
                    let yt = c[t];
                    for (d, ys) in d2.iter_mut().zip(&c[..t]) {
                        let e = yt - ys;
                        *d += e * e;
                    }
                }
                max_weighted(d2, &w[points - 1 - t..points - 1])
            },
        )
        .reduce(|| 0.0, f64::max);
    best_sq.sqrt()
}

/// `N[x; C_1^γ]` over all pairs of stored grid times.
pub fn holder_norm(path: &DriverPath, gamma: f64) -> f64 {
    holder_norm_values(path.rows(), path.components(), path.step_size(), gamma)
}

/// `max_{s<t} ‖a_{ts} − b_{ts}‖_F / |t−s|^exponent` over grid pairs; `b` may
/// be absent, giving the norm of `a` alone.
pub fn area_holder_distance(a: &LevyArea, b: Option<&LevyArea>, exponent: f64) -> f64 {
    let m = a.components();
    let n = a.steps();
    if let Some(b) = b {
        assert_eq!((b.components(), b.steps()), (m, n), "Lévy areas live on different grids");
    }
    let points = n + 1;
    let w = reversed_inverse_lags(points, 1.0 / n as f64, exponent);
    // per component: path relative to its start
    let centered = |l: &LevyArea| -> Vec<Vec<f64>> {
        (0..m).map(|i| (0..points).map(|k| l.x(k, i) - l.x(0, i)).collect()).collect()
    };
    let xa = centered(a);
    let xb = b.map_or_else(|| vec![vec![0.0; points]; m], centered);
    let mm = m * m;
    // per (i, j): cumulative area of a minus that of b
    let dc: Vec<Vec<f64>> = (0..mm)
        .map(|ij| {
            (0..points)
                .map(|k| a.cumulative[k * mm + ij] - b.map_or(0.0, |b| b.cumulative[k * mm + ij]))
                .collect()
        })
        .collect();
    let best_sq = (1..points)
        .into_par_iter()
        .map_init(
            || vec![0.0; points],
            |d2, t| {
                let d2 = &mut d2[..t];
                d2.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..m {
                    let (ai, bi) = (&xa[i][..t], &xb[i][..t]);
                    let (ait, bit) = (xa[i][t], xb[i][t]);
                    for j in 0..m {
                        let c = &dc[i * m + j];
                        let ct = c[t];
                        let (aj, bj) = (&xa[j][..t], &xb[j][..t]);
                        for s in 0..t {
                            let e = ct - c[s] - (ait - ai[s]) * aj[s] + (bit - bi[s]) * bj[s];
                            d2[s] += e * e;
                        }
                    }
                }
                max_weighted(d2, &w[points - 1 - t..points - 1])
            },
        )
        .reduce(|| 0.0, f64::max);
    best_sq.sqrt()
}

/// Distances between a path and its coarse interpolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughnessReport {
    pub coarse_steps: usize,
    pub fine_steps: usize,
    pub gamma: f64,
    /// `N[x; C_1^γ]` of the fine path.
    pub holder_norm: f64,
    /// `N[x − x^M; C_1^γ]`.
    pub u_m: f64,
    /// `u_M + N[𝕩^M − 𝕩; C_2^{2γ}]`, areas relative to the fine path.
    pub v_m: f64,
}

/// Compares `fine` against the linear interpolation of its `coarse_steps`
/// subsample, on the fine grid. The fine path's own linear-interpolation
/// area stands in for the limiting Lévy area.
pub fn approximation_errors(
    fine: &DriverPath,
    coarse_steps: usize,
    gamma: f64,
) -> Result<RoughnessReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("Hölder exponent {gamma} outside (0,1)")));
    }
    let coarse = fine.coarse_interpolation(coarse_steps)?;
    let m = fine.components();
    let diff: Vec<f64> = fine.rows().iter().zip(coarse.rows()).map(|(a, b)| a - b).collect();
    let u_m = holder_norm_values(&diff, m, fine.step_size(), gamma);
    let area_gap = area_holder_distance(
        &levy_area_linear(&coarse),
        Some(&levy_area_linear(fine)),
        2.0 * gamma,
    );
    Ok(RoughnessReport {
        coarse_steps,
        fine_steps: fine.steps(),
        gamma,
        holder_norm: holder_norm(fine, gamma),
        u_m,
        v_m: u_m + area_gap,
    })
}
