//! Simulation and analysis of SDEs driven jointly by Brownian motion and
//! fractional Brownian motion with Hurst index `H > 1/2`.
//!
//! * [`drivers`]: exact BM/fBm sampling and the driver norm.
//! * [`frac`]: Weyl–Marchaud derivatives, the fractional Stieltjes integral,
//!   norms and inequality audits.
//! * [`coefficients`]: coefficient sets, moduli of continuity, hypothesis probes.
//! * [`euler`]: the Euler scheme, stopping times and moment diagnostics.
//! * [`bihari`]: the Bihari-type bound with its barrier function.

pub mod error;
pub mod grid;
pub mod quad;
pub mod drivers;
pub mod frac;
pub mod coefficients;
pub mod bihari;
pub mod euler;

pub use error::{Error, Result};
pub use grid::{SamplePath, TimeGrid};
