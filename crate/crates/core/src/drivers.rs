//! Exact Gaussian drivers: Brownian motion and fractional Brownian motion on
//! finite grids, and the driver norm `‖B‖_{1-α,∞,t}`.
//!
//! fBm is normalised so that `E|B^H(1)|² = 1`, giving the covariance
//! `R(s, t) = ½ (t^{2H} + s^{2H} - |t - s|^{2H})`.

use std::sync::Arc;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::frac::kernel::NodeKernel;
use crate::grid::{SamplePath, TimeGrid};

/// Hurst index in the Young regime `1/2 < H < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstParameter(f64);

impl HurstParameter {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.5 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::Parameter(format!("Hurst parameter must lie in (1/2, 1), got {h}")))
        }
    }

    /// `H = 1/2`, for checks that fBm reduces to Brownian motion. Not a
    /// valid driver for the pathwise integral.
    pub fn brownian_reduction() -> Self {
        Self(0.5)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    Cholesky,
    CirculantFft,
}

/// Covariance of `B^H(s)` and `B^H(t)`.
pub fn fbm_covariance(s: f64, t: f64, h: HurstParameter) -> Result<f64> {
    if s < 0.0 || t < 0.0 {
        return Err(Error::Domain(format!("negative time in covariance ({s}, {t})")));
    }
    let two_h = 2.0 * h.value();
    Ok(0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h)))
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
fn fgn_autocov(k: f64, h: f64) -> f64 {
    let two_h = 2.0 * h;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// SplitMix64 finaliser; decorrelates nearby integer seeds.
pub fn mix_seed(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of path `index` in an ensemble driven by `master`.
pub fn path_seed(master: u64, index: u64) -> u64 {
    mix_seed(mix_seed(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Seeds for the two drivers of one path. W and B^H are independent unless
/// built with [`DriverSeeds::shared`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriverSeeds {
    pub w: u64,
    pub bh: u64,
}

impl DriverSeeds {
    pub fn independent(seed: u64) -> Self {
        Self { w: mix_seed(seed ^ 0x5745_4945_5253_5452), bh: mix_seed(seed ^ 0x4652_4143_5449_4F4E) }
    }

    /// Both drivers consume the same normal stream (experimental hook).
    pub fn shared(seed: u64) -> Self {
        Self { w: seed, bh: seed }
    }
}

/// Stream of standard normals for component `k` of a path seeded by `seed`.
fn normal_stream(seed: u64, k: usize) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    std::iter::repeat_with(move || StandardNormal.sample(&mut rng))
}

/// Standard `dim`-dimensional Brownian motion on `grid`. Component `k` uses
/// its own random stream, so lower components do not depend on `dim`.
pub fn sample_bm(grid: &TimeGrid, seed: u64, dim: usize) -> Result<SamplePath> {
    if dim == 0 {
        return Err(Error::Parameter("Brownian dimension must be at least 1".into()));
    }
    let n = grid.len();
    let mut values = vec![0.0; n * dim];
    for k in 0..dim {
        let mut z = normal_stream(seed, k);
        let mut acc = 0.0;
        for i in 1..n {
            let dt = grid.nodes()[i] - grid.nodes()[i - 1];
            acc += dt.sqrt() * z.next().unwrap();
            values[i * dim + k] = acc;
        }
    }
    SamplePath::new(grid.clone(), dim, values)
}

enum Factor {
    Circulant {
        /// `sqrt(λ_k / M)` for the circulant eigenvalues.
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
        /// Increment scale `h^H` for the uniform step.
        step_scale: f64,
    },
    /// Row-major lower-triangular factor of the increment covariance.
    Cholesky { lower: Vec<f64> },
    Empty,
}

/// Precomputed exact fBm sampler for one grid and Hurst index.
pub struct FbmSampler {
    grid: TimeGrid,
    factor: Factor,
    method: FbmMethod,
    warning: Option<String>,
}

impl FbmSampler {
    pub fn new(grid: &TimeGrid, h: HurstParameter, method: FbmMethod) -> Result<Self> {
        let n = grid.steps();
        if n == 0 {
            return Ok(Self { grid: grid.clone(), factor: Factor::Empty, method, warning: None });
        }
        match method {
            FbmMethod::Cholesky => Ok(Self {
                grid: grid.clone(),
                factor: cholesky_factor(grid, h)?,
                method,
                warning: None,
            }),
            FbmMethod::CirculantFft => {
                let step = grid.uniform_step().ok_or_else(|| {
                    Error::Grid("circulant embedding requires a uniform grid".into())
                })?;
                match circulant_factor(n, h.value()) {
                    Ok((scale, fft)) => Ok(Self {
                        grid: grid.clone(),
                        factor: Factor::Circulant { scale, fft, step_scale: step.powf(h.value()) },
                        method,
                        warning: None,
                    }),
                    Err(min_eig) => {
                        let msg = format!(
                            "circulant embedding not nonnegative (min eigenvalue {min_eig:e}); falling back to cholesky"
                        );
                        warn!("{msg}");
                        Ok(Self {
                            grid: grid.clone(),
                            factor: cholesky_factor(grid, h)?,
                            method: FbmMethod::Cholesky,
                            warning: Some(msg),
                        })
                    }
                }
            }
        }
    }

    /// Method actually in use (after any fallback).
    pub fn method(&self) -> FbmMethod {
        self.method
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// One `dim`-dimensional path; each component uses an independent stream.
    pub fn sample(&self, seed: u64, dim: usize) -> Result<SamplePath> {
        if dim == 0 {
            return Err(Error::Parameter("fBm dimension must be at least 1".into()));
        }
        let n_nodes = self.grid.len();
        let n = n_nodes - 1;
        let mut values = vec![0.0; n_nodes * dim];
        for k in 0..dim {
            let inc = self.increments(seed, k, n);
            let mut acc = 0.0;
            for (i, d) in inc.iter().enumerate() {
                acc += d;
                values[(i + 1) * dim + k] = acc;
            }
        }
        SamplePath::new(self.grid.clone(), dim, values)
    }

    fn increments(&self, seed: u64, k: usize, n: usize) -> Vec<f64> {
        let mut z = normal_stream(seed, k);
        match &self.factor {
            Factor::Empty => Vec::new(),
            Factor::Circulant { scale, fft, step_scale } => {
                let mut buf: Vec<Complex<f64>> = scale
                    .iter()
                    .map(|&s| {
                        let re = z.next().unwrap();
                        let im = z.next().unwrap();
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..n].iter().map(|c| c.re * step_scale).collect()
            }
            Factor::Cholesky { lower } => {
                let xi: Vec<f64> = z.take(n).collect();
                (0..n)
                    .map(|i| {
                        let row = &lower[i * n..i * n + i + 1];
                        row.iter().zip(&xi).map(|(l, x)| l * x).sum()
                    })
                    .collect()
            }
        }
    }
}

/// Eigenvalue scales of the minimal power-of-two circulant embedding of the
/// fGn covariance, or the most negative eigenvalue if the embedding fails.
fn circulant_factor(n: usize, h: f64) -> std::result::Result<(Vec<f64>, Arc<dyn Fft<f64>>), f64> {
    let g = n.next_power_of_two();
    let m = 2 * g;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= g { j } else { m - j };
            Complex::new(fgn_autocov(lag as f64, h), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut row);
    let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        return Err(min);
    }
    let scale = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
    Ok((scale, fft))
}

fn cholesky_factor(grid: &TimeGrid, h: HurstParameter) -> Result<Factor> {
    let t = grid.nodes();
    let n = grid.steps();
    let r = |a: f64, b: f64| fbm_covariance(a, b, h).expect("grid times are nonnegative");
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let c = r(t[i + 1], t[j + 1]) - r(t[i + 1], t[j]) - r(t[i], t[j + 1]) + r(t[i], t[j]);
            cov[i * n + j] = c;
            cov[j * n + i] = c;
        }
    }
    Ok(Factor::Cholesky { lower: cholesky(&cov, n)? })
}

/// Dense Cholesky factorisation `A = L Lᵀ`; returns row-major `L`.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::Cholesky { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// One-shot fBm path (scalar). Use [`FbmSampler`] for ensembles.
pub fn sample_fbm(grid: &TimeGrid, h: HurstParameter, seed: u64, method: FbmMethod) -> Result<SamplePath> {
    FbmSampler::new(grid, h, method)?.sample(seed, 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverNormEstimate {
    pub value: f64,
    pub alpha: f64,
    pub t: f64,
    /// Number of grid cells in `[0, t]` over which the supremum was taken.
    pub cells: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("alpha must lie in (0, 1/2), got {alpha}")))
    }
}

/// `‖f‖_{1-α,∞,t}` at every grid node `t`: entry `v` is the supremum over
/// node pairs `u < w ≤ t_v` of
/// `|f(w)-f(u)|/(w-u)^{1-α} + ∫_u^w |f(y)-f(u)|/(y-u)^{2-α} dy`.
///
/// The profile is a nondecreasing grid lower bound of the continuum norm.
pub fn driver_norm_profile(path: &SamplePath, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let t = path.times();
    let n = t.len();
    let dim = path.dim();
    let kernel = NodeKernel::new(path.grid(), 2.0 - alpha);
    // best[w] = max over u < w of the pair functional.
    let rows: Vec<Vec<(usize, f64)>> = (0..n.saturating_sub(1))
        .into_par_iter()
        .map(|u| {
            let fu = path.value(u);
            let mut out = Vec::with_capacity(n - u - 1);
            let mut integral = 0.0;
            let mut prev = vec![0.0; dim];
            let mut cur = vec![0.0; dim];
            for w in u + 1..n {
                let fw = path.value(w);
                for k in 0..dim {
                    cur[k] = fw[k] - fu[k];
                }
                let (p, q) = (t[w - 1] - t[u], t[w] - t[u]);
                integral += kernel.norm(&prev, &cur, p, q, w - 1 - u);
                let inc = cur.iter().map(|v| v * v).sum::<f64>().sqrt();
                out.push((w, inc / q.powf(1.0 - alpha) + integral));
                std::mem::swap(&mut prev, &mut cur);
            }
            out
        })
        .collect();
    let mut best = vec![0.0f64; n];
    for row in rows {
        for (w, v) in row {
            best[w] = best[w].max(v);
        }
    }
    for v in 1..n {
        best[v] = best[v].max(best[v - 1]);
    }
    Ok(best)
}

/// Grid estimate of `‖f‖_{1-α,∞,t}` using node pairs inside `[0, t]`.
pub fn driver_norm(path: &SamplePath, alpha: f64, t: f64) -> Result<DriverNormEstimate> {
    check_alpha(alpha)?;
    path.grid().check_time(t)?;
    let last = path.grid().last_index_at_or_before(t);
    let window = SamplePath::new(
        TimeGrid::new(path.times()[..=last].to_vec())?,
        path.dim(),
        path.values()[..(last + 1) * path.dim()].to_vec(),
    )?;
    let profile = driver_norm_profile(&window, alpha)?;
    Ok(DriverNormEstimate { value: profile[last], alpha, t, cells: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        let h7 = HurstParameter::new(0.7).unwrap();
        assert!((fbm_covariance(1.0, 1.0, h7).unwrap() - 1.0).abs() < 1e-15);
        let bm = HurstParameter::brownian_reduction();
        assert!((fbm_covariance(0.3, 0.8, bm).unwrap() - 0.3).abs() < 1e-15);
        // Oracle: ½(1 + 0.25^1.5 - 0.75^1.5) = ½(1 + 1/8 - 0.6495190528383290)
        let h75 = HurstParameter::new(0.75).unwrap();
        let expected = 0.5 * (1.0 + 0.125 - 0.649_519_052_838_329_0);
        assert!((fbm_covariance(0.25, 1.0, h75).unwrap() - expected).abs() < 1e-15);
        assert!(fbm_covariance(-0.1, 1.0, h75).is_err());
        assert_eq!(
            fbm_covariance(0.2, 0.9, h75).unwrap(),
            fbm_covariance(0.9, 0.2, h75).unwrap()
        );
    }

    #[test]
    fn hurst_range() {
        assert!(HurstParameter::new(0.5).is_err());
        assert!(HurstParameter::new(1.0).is_err());
        assert!(HurstParameter::new(0.75).is_ok());
    }

    #[test]
    fn cholesky_reports_pivot() {
        let a = [1.0, 2.0, 2.0, 1.0];
        match cholesky(&a, 2) {
            Err(Error::Cholesky { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn circulant_needs_uniform_grid() {
        let g = TimeGrid::new(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        let h = HurstParameter::new(0.7).unwrap();
        assert!(sample_fbm(&g, h, 1, FbmMethod::CirculantFft).is_err());
        assert!(sample_fbm(&g, h, 1, FbmMethod::Cholesky).is_ok());
    }

    #[test]
    fn methods_agree_in_law_at_h_half() {
        // With H = 1/2 the circulant eigenvalues are constant and the Cholesky
        // factor is diagonal, so both produce independent N(0, dt) increments.
        let g = TimeGrid::uniform(1.0, 8).unwrap();
        let s = FbmSampler::new(&g, HurstParameter::brownian_reduction(), FbmMethod::CirculantFft).unwrap();
        assert_eq!(s.method(), FbmMethod::CirculantFft);
        assert!(s.warning().is_none());
    }

    #[test]
    fn single_node_grid_gives_zero_path() {
        let g = TimeGrid::new(vec![0.0]).unwrap();
        let p = sample_bm(&g, 3, 2).unwrap();
        assert_eq!(p.values(), &[0.0, 0.0]);
    }

    #[test]
    fn driver_norm_constant_path_is_zero() {
        let g = TimeGrid::uniform(1.0, 16).unwrap();
        let p = SamplePath::constant(g, &[2.5]);
        assert_eq!(driver_norm(&p, 0.3, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn driver_norm_identity_path() {
        // f(s) = s, α = 1/4: (v-u)^α (1 + 1/α) maximised at v - u = 1 → 5.
        for n in [4, 64] {
            let g = TimeGrid::uniform(1.0, n).unwrap();
            let p = SamplePath::from_fn(g, |s| s);
            let est = driver_norm(&p, 0.25, 1.0).unwrap();
            assert!((est.value - 5.0).abs() < 1e-12, "n={n}: {}", est.value);
        }
    }

    #[test]
    fn driver_norm_rejects_bad_input() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let p = SamplePath::from_fn(g, |s| s);
        assert!(driver_norm(&p, 0.6, 1.0).is_err());
        assert!(driver_norm(&p, 0.3, 1.5).is_err());
    }
}
