//! Euler approximation with coefficients frozen at the left partition node,
//!
//! ```text
//! X(t_{i+1}) = X(t_i) + b(t_i, X_i) Δt + σ_W(t_i, X_i) ΔW + σ_H(t_i, X_i) ΔB^H,
//! ```
//!
//! plus the first-passage stopping times on the driver norm and the solution
//! norm, stopped processes, and the moment diagnostic.
//!
//! Drivers may live on a finer grid than the partition; they are restricted
//! to the partition nodes, so runs at several resolutions can share one
//! realisation of `(W, B^H)`.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;

use crate::coefficients::{CoefficientSet, Dims};
use crate::drivers::driver_norm_profile;
use crate::error::{Error, Result};
use crate::frac::{alpha_norm_profile, norms_with, NormReport};
use crate::grid::{fmt_g17, SamplePath, TimeGrid};

/// Stop at `T_R`, the first node where `‖B^H‖_{1-α,∞,t} ≥ R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub r: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerConfig {
    pub partition: TimeGrid,
    pub truncation: Option<Truncation>,
    pub x0: Vec<f64>,
}

impl EulerConfig {
    pub fn new(partition: TimeGrid, x0: Vec<f64>) -> Self {
        Self { partition, truncation: None, x0 }
    }

    pub fn with_truncation(mut self, r: f64, alpha: f64) -> Self {
        self.truncation = Some(Truncation { r, alpha });
        self
    }

    fn validate(&self) -> Result<()> {
        if let Some(tr) = self.truncation {
            if !(tr.r > 0.0) {
                return Err(Error::Parameter(format!("truncation level R must be > 0, got {}", tr.r)));
            }
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("initial condition must be finite, got {:?}", self.x0)));
        }
        Ok(())
    }
}

/// A solution on its partition; constant after `stopped_at` when set.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub path: SamplePath,
    pub stopped_at: Option<f64>,
    pub diagnostics: Vec<(f64, NormReport)>,
}

impl SolutionPath {
    pub fn new(path: SamplePath) -> Self {
        Self { path, stopped_at: None, diagnostics: Vec::new() }
    }

    /// Appends the full norm report at each of `times`.
    pub fn with_diagnostics(mut self, alpha: f64, mu: f64, times: &[f64]) -> Result<Self> {
        for &t in times {
            let r = norms_with(&self.path, alpha, mu, t)?;
            self.diagnostics.push((t, r));
        }
        Ok(self)
    }

    /// Path CSV preceded by `# stopped_at=<t>` (`none` when not stopped).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        match self.stopped_at {
            Some(t) => writeln!(out, "# stopped_at={}", fmt_g17(t))?,
            None => writeln!(out, "# stopped_at=none")?,
        }
        self.path.write_csv(out)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let text: Vec<String> = input
            .lines()
            .collect::<io::Result<_>>()
            .map_err(|e| Error::Parameter(format!("csv read: {e}")))?;
        let mut stopped_at = None;
        for line in &text {
            if let Some(v) = line.trim().strip_prefix("# stopped_at=") {
                stopped_at = match v.trim() {
                    "none" => None,
                    s => Some(s.parse::<f64>().map_err(|e| Error::Parameter(format!("stopped_at: {e}")))?),
                };
            }
        }
        let path = SamplePath::read_csv(text.join("\n").as_bytes())?;
        Ok(Self { path, stopped_at, diagnostics: Vec::new() })
    }
}

fn check_dims(cs: &CoefficientSet, cfg: &EulerConfig, w: &SamplePath, bh: &SamplePath) -> Result<()> {
    let Dims { n, m, d } = cs.dims();
    if cfg.x0.len() != n {
        return Err(Error::Dimension(format!("x0 has {} components, coefficients expect {n}", cfg.x0.len())));
    }
    if w.dim() != m {
        return Err(Error::Dimension(format!("Brownian driver has dimension {}, coefficients expect {m}", w.dim())));
    }
    if bh.dim() != d {
        return Err(Error::Dimension(format!("fractional driver has dimension {}, coefficients expect {d}", bh.dim())));
    }
    Ok(())
}

/// Euler scheme on `cfg.partition`. With a truncation the solution is
/// computed up to `T_R` (evaluated on the driver's own grid) and frozen after
/// the last partition node `≤ T_R`.
///
/// A non-finite state aborts with [`Error::NonFinite`] naming the first bad
/// cell.
pub fn euler_solve(cs: &CoefficientSet, cfg: &EulerConfig, w: &SamplePath, bh: &SamplePath) -> Result<SolutionPath> {
    cfg.validate()?;
    check_dims(cs, cfg, w, bh)?;
    let part = &cfg.partition;
    let wr = w.restrict(part)?;
    let br = bh.restrict(part)?;
    let t = part.nodes();
    let steps = part.steps();

    let (stop_index, stopped_at) = match cfg.truncation {
        Some(tr) => {
            let tau = stopping_time_tr(bh, tr.alpha, tr.r)?;
            (part.last_index_at_or_before(tau), Some(tau))
        }
        None => (steps, None),
    };

    let Dims { n, m, d } = cs.dims();
    let mut values = Vec::with_capacity(t.len() * n);
    values.extend_from_slice(&cfg.x0);
    let mut x = cfg.x0.clone();
    let mut b = vec![0.0; n];
    let mut sw = vec![0.0; n * m];
    let mut sh = vec![0.0; n * d];
    for i in 0..steps {
        if i < stop_index {
            let dt = t[i + 1] - t[i];
            let (w0, w1) = (wr.value(i), wr.value(i + 1));
            let (b0, b1) = (br.value(i), br.value(i + 1));
            cs.drift(t[i], &x, &mut b);
            cs.sigma_w(t[i], &x, &mut sw);
            cs.sigma_h(t[i], &x, &mut sh);
            for r in 0..n {
                let mut inc = b[r] * dt;
                for c in 0..m {
                    inc += sw[r * m + c] * (w1[c] - w0[c]);
                }
                for c in 0..d {
                    inc += sh[r * d + c] * (b1[c] - b0[c]);
                }
                x[r] += inc;
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what: format!("state in Euler cell {i}"), t: t[i] });
            }
        }
        values.extend_from_slice(&x);
    }
    let path = SamplePath::new(part.clone(), n, values)?;
    Ok(SolutionPath { path, stopped_at, diagnostics: Vec::new() })
}

/// `T_R = inf{t : ‖B^H‖_{1-α,∞,t} ≥ R} ∧ T`, resolved at grid nodes.
pub fn stopping_time_tr(bh: &SamplePath, alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("R must be > 0, got {r}")));
    }
    let profile = driver_norm_profile(bh, alpha)?;
    let t = bh.times();
    Ok(profile.iter().position(|&v| v >= r).map_or(bh.grid().horizon(), |i| t[i]))
}

/// `τ_M = inf{t : ‖X‖_{α,t} ∨ ‖Y‖_{α,t} > M} ∧ T`, resolved at grid nodes.
pub fn stopping_time_tau_m(x: &SolutionPath, y: &SolutionPath, alpha: f64, m: f64) -> Result<f64> {
    if x.path.times() != y.path.times() {
        return Err(Error::Grid("tau_M needs both paths on the same grid".into()));
    }
    if !(m >= 0.0) {
        return Err(Error::Parameter(format!("M must be >= 0, got {m}")));
    }
    let px = alpha_norm_profile(&x.path, alpha)?;
    let py = alpha_norm_profile(&y.path, alpha)?;
    let t = x.path.times();
    Ok(px
        .iter()
        .zip(&py)
        .position(|(a, b)| a.max(*b) > m)
        .map_or(x.path.grid().horizon(), |i| t[i]))
}

/// `X(· ∧ τ)`: values after the last node `≤ τ` are frozen.
pub fn stop_process(x: &SolutionPath, tau: f64) -> Result<SolutionPath> {
    let grid = x.path.grid();
    grid.check_time(tau)?;
    let k = grid.last_index_at_or_before(tau);
    let dim = x.path.dim();
    let mut values = x.path.values().to_vec();
    let frozen = x.path.value(k).to_vec();
    for row in values.chunks_exact_mut(dim).skip(k + 1) {
        row.copy_from_slice(&frozen);
    }
    let stopped_at = if k + 1 < x.path.len() {
        Some(x.stopped_at.map_or(tau, |s| s.min(tau)))
    } else {
        x.stopped_at
    };
    Ok(SolutionPath { path: SamplePath::new(grid.clone(), dim, values)?, stopped_at, diagnostics: Vec::new() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
}

/// Sample mean of `(max_{t_i ≤ t} ‖X‖_{α,t_i})^{2N}` over the ensemble, with
/// its standard error. Taking the running maximum over node times before
/// raising to the power makes the estimate nondecreasing in `t`.
pub fn moment_diagnostic(ensemble: &[SolutionPath], alpha: f64, t: f64, n: u32) -> Result<MomentEstimate> {
    if ensemble.is_empty() {
        return Err(Error::Parameter("moment diagnostic needs a nonempty ensemble".into()));
    }
    if n == 0 {
        return Err(Error::Parameter("moment order N must be >= 1".into()));
    }
    let samples: Vec<f64> = ensemble
        .par_iter()
        .map(|x| -> Result<f64> {
            x.path.grid().check_time(t)?;
            let k = x.path.grid().last_index_at_or_before(t);
            let head = SamplePath::new(
                TimeGrid::new(x.path.times()[..=k].to_vec())?,
                x.path.dim(),
                x.path.values()[..(k + 1) * x.path.dim()].to_vec(),
            )?;
            let profile = alpha_norm_profile(&head, alpha)?;
            let running = profile.iter().copied().fold(0.0, f64::max);
            Ok(running.powi(2 * n as i32))
        })
        .collect::<Result<_>>()?;
    let len = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / len;
    let var = if samples.len() > 1 {
        samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1.0)
    } else {
        0.0
    };
    Ok(MomentEstimate { mean, std_error: (var / len).sqrt(), paths: samples.len() })
}

/// Largest Euclidean distance between two solutions over the nodes of
/// `common`, which must be nodes of both partitions.
pub fn sup_distance(x: &SamplePath, y: &SamplePath, common: &TimeGrid) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(format!("dimensions differ: {} vs {}", x.dim(), y.dim())));
    }
    let ix = x.grid().embed(common)?;
    let iy = y.grid().embed(common)?;
    Ok(ix
        .iter()
        .zip(&iy)
        .map(|(&i, &j)| x.value(i).iter().zip(y.value(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max))
}
