//! The demo's operations as plain Rust, so they can be tested natively.

use mixedsde_core::bihari::{bihari_bound, conjugate, BihariParams};
use mixedsde_core::coefficients::{preset, ModulusOfContinuity};
use mixedsde_core::drivers::{sample_bm, DriverSeeds, FbmMethod, FbmSampler, HurstParameter};
use mixedsde_core::euler::{euler_solve, EulerConfig};
use mixedsde_core::TimeGrid;

pub type Result<T> = std::result::Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Largest grid the page may ask for; keeps the tab responsive.
pub const MAX_STEPS: usize = 1 << 14;

fn check_steps(steps: usize) -> Result<()> {
    if steps == 0 || steps > MAX_STEPS {
        return Err(format!("steps must lie in 1..={MAX_STEPS}, got {steps}"));
    }
    Ok(())
}

/// One fBm path on the uniform `steps`-step grid of `[0, 1]`.
pub fn fbm_path(hurst: f64, steps: usize, seed: u64) -> Result<Vec<f64>> {
    check_steps(steps)?;
    let g = TimeGrid::uniform(1.0, steps).map_err(err)?;
    let h = HurstParameter::new(hurst).map_err(err)?;
    let p = FbmSampler::new(&g, h, FbmMethod::CirculantFft).map_err(err)?.sample(seed, 1).map_err(err)?;
    Ok(p.values().to_vec())
}

pub fn preset_dimension(name: &str) -> Result<usize> {
    Ok(preset(name).map_err(err)?.coefficients.dims().n)
}

/// Euler path of a preset on `steps` steps, driven by a path sampled on
/// `driver_steps` (a multiple of `steps`), so that two calls with the same
/// seed and driver grid share their noise. Values are node-major:
/// `out[i * n + k]` is component `k` at node `i`.
pub fn euler_path(name: &str, hurst: f64, steps: usize, driver_steps: usize, seed: u64) -> Result<Vec<f64>> {
    check_steps(driver_steps)?;
    if steps == 0 || driver_steps % steps != 0 {
        return Err(format!("{steps} steps do not divide the {driver_steps}-step driver grid"));
    }
    let p = preset(name).map_err(err)?;
    let dims = p.coefficients.dims();
    let g = TimeGrid::uniform(1.0, driver_steps).map_err(err)?;
    let s = DriverSeeds::independent(seed);
    let w = sample_bm(&g, s.w, dims.m).map_err(err)?;
    let h = HurstParameter::new(hurst).map_err(err)?;
    let bh = FbmSampler::new(&g, h, FbmMethod::CirculantFft).map_err(err)?.sample(s.bh, dims.d).map_err(err)?;
    let cfg = EulerConfig::new(TimeGrid::uniform(1.0, steps).map_err(err)?, p.x0);
    Ok(euler_solve(&p.coefficients, &cfg, &w, &bh).map_err(err)?.path.values().to_vec())
}

/// Bihari bound at `points` equally spaced times in `(0, horizon]`; `NaN`
/// where the bound is void (`F⁻¹` undefined) or overflows.
#[allow(clippy::too_many_arguments)]
pub fn bihari_curve(
    a: f64,
    b: f64,
    alpha: f64,
    p: f64,
    modulus: &str,
    delta: f64,
    horizon: f64,
    points: usize,
) -> Result<Vec<f64>> {
    if points == 0 || points > 4096 || !(horizon > 0.0) {
        return Err("need 1..=4096 points and a positive horizon".into());
    }
    let q = conjugate(p);
    let rho = match modulus {
        "rho1" => ModulusOfContinuity::rho1(q, delta),
        "rho2" => ModulusOfContinuity::rho2(q, delta),
        "identity" => ModulusOfContinuity::identity(q),
        other => return Err(format!("unknown modulus `{other}` (rho1, rho2, identity)")),
    }
    .map_err(err)?;
    (1..=points)
        .map(|k| {
            let t = horizon * k as f64 / points as f64;
            match bihari_bound(&BihariParams { a, b_coef: b, alpha, p, q, rho: rho.clone(), t }) {
                Ok(ev) => Ok(ev.value().unwrap_or(f64::NAN)),
                Err(mixedsde_core::Error::NonFinite { .. }) => Ok(f64::NAN),
                Err(e) => Err(err(e)),
            }
        })
        .collect()
}
