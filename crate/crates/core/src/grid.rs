//! Time grids and sampled vector-valued paths.
//!
//! A [`SamplePath`] is interpreted everywhere in this crate as the piecewise
//! linear interpolant of its node values.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

/// Relative tolerance used when matching time values against grid nodes.
const NODE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// Builds a grid from explicit nodes. The first node must be 0 and the
    /// nodes strictly increasing. A single node `{0}` is accepted as the
    /// degenerate grid.
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Grid("grid has no nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Grid(format!("first node must be 0, got {}", nodes[0])));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Grid(format!(
                    "nodes not strictly increasing at index {}: {} -> {}",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// Uniform grid on `[0, horizon]` with `steps` cells (`steps + 1` nodes).
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Grid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::Grid("uniform grid needs at least one step".into()));
        }
        let h = horizon / steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|i| i as f64 * h).collect();
        nodes[steps] = horizon;
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn mesh(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Step size if the grid is uniform (to relative precision 1e-9).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.steps() == 0 {
            return None;
        }
        let h = self.horizon() / self.steps() as f64;
        let uniform = self
            .nodes
            .iter()
            .enumerate()
            .all(|(i, &t)| (t - i as f64 * h).abs() <= 1e-9 * self.horizon());
        uniform.then_some(h)
    }

    /// Index of the node equal to `t` (within tolerance), if any.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let tol = NODE_TOL * self.horizon().max(1.0);
        let i = self.nodes.partition_point(|&s| s < t - tol);
        (i < self.nodes.len() && (self.nodes[i] - t).abs() <= tol).then_some(i)
    }

    /// Index of the last node `<= t`.
    pub fn last_index_at_or_before(&self, t: f64) -> usize {
        let tol = NODE_TOL * self.horizon().max(1.0);
        self.nodes.partition_point(|&s| s <= t + tol).saturating_sub(1)
    }

    /// Node indices of `coarse` inside `self`; fails unless every coarse node
    /// is also a node of this grid.
    pub fn embed(&self, coarse: &TimeGrid) -> Result<Vec<usize>> {
        if (coarse.horizon() - self.horizon()).abs() > NODE_TOL * self.horizon().max(1.0) {
            return Err(Error::Grid(format!(
                "horizons differ: {} vs {}",
                coarse.horizon(),
                self.horizon()
            )));
        }
        coarse
            .nodes
            .iter()
            .map(|&t| {
                self.node_index(t)
                    .ok_or_else(|| Error::Grid(format!("node {t} is not on the finer grid")))
            })
            .collect()
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t > self.horizon() * (1.0 + NODE_TOL) {
            return Err(Error::Domain(format!(
                "time {t} outside [0, {}]",
                self.horizon()
            )));
        }
        Ok(())
    }
}

/// Node values of a vector-valued function on a [`TimeGrid`], stored row-major
/// (`values[i * dim + k]` is component `k` at node `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("path dimension must be at least 1".into()));
        }
        if values.len() != grid.len() * dim {
            return Err(Error::Dimension(format!(
                "expected {} values for {} nodes of dimension {}, got {}",
                grid.len() * dim,
                grid.len(),
                dim,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("path component {}", i % dim),
                t: grid.nodes()[i / dim],
            });
        }
        Ok(Self { grid, dim, values })
    }

    /// Scalar path from one value per node.
    pub fn scalar(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, 1, values)
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self { grid, dim: 1, values }
    }

    pub fn constant(grid: TimeGrid, value: &[f64]) -> Self {
        let values = (0..grid.len()).flat_map(|_| value.iter().copied()).collect();
        Self { grid, dim: value.len(), values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().skip(k).step_by(self.dim).copied().collect()
    }

    /// Scalar path holding component `k`.
    pub fn component_path(&self, k: usize) -> SamplePath {
        SamplePath { grid: self.grid.clone(), dim: 1, values: self.component(k) }
    }

    /// Piecewise-linear interpolation at an arbitrary time in the horizon.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        self.grid.check_time(t)?;
        let nodes = self.grid.nodes();
        if let Some(i) = self.grid.node_index(t) {
            return Ok(self.value(i).to_vec());
        }
        let i = self.grid.last_index_at_or_before(t);
        let w = (t - nodes[i]) / (nodes[i + 1] - nodes[i]);
        Ok(self
            .value(i)
            .iter()
            .zip(self.value(i + 1))
            .map(|(a, b)| a + w * (b - a))
            .collect())
    }

    /// Restriction to the nodes of a coarser grid whose nodes are all nodes of
    /// this path's grid.
    pub fn restrict(&self, coarse: &TimeGrid) -> Result<SamplePath> {
        let idx = self.grid.embed(coarse)?;
        let values = idx.iter().flat_map(|&i| self.value(i).iter().copied()).collect();
        Ok(SamplePath { grid: coarse.clone(), dim: self.dim, values })
    }

    /// The interpolant restricted to `[a, b]` and shifted so the window starts
    /// at time 0. Non-node endpoints are inserted by interpolation.
    pub fn window(&self, a: f64, b: f64) -> Result<SamplePath> {
        self.grid.check_time(a)?;
        self.grid.check_time(b)?;
        if !(b > a) {
            return Err(Error::Domain(format!("empty window [{a}, {b}]")));
        }
        let nodes = self.grid.nodes();
        let mut times = vec![0.0];
        let mut values = self.interpolate(a)?;
        let tol = NODE_TOL * self.grid.horizon().max(1.0);
        for (i, &t) in nodes.iter().enumerate() {
            if t > a + tol && t < b - tol {
                times.push(t - a);
                values.extend_from_slice(self.value(i));
            }
        }
        times.push(b - a);
        values.extend(self.interpolate(b)?);
        Ok(SamplePath { grid: TimeGrid::new(times)?, dim: self.dim, values })
    }

    /// Euclidean norm of the value at node `i`.
    pub fn norm_at(&self, i: usize) -> f64 {
        self.value(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Writes `t,x_1,...,x_d` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(csv_header(self.dim).as_bytes())?;
        let mut line = String::new();
        for (i, &t) in self.times().iter().enumerate() {
            line.clear();
            write!(line, "{}", fmt_g17(t)).unwrap();
            for v in self.value(i) {
                write!(line, ",{}", fmt_g17(*v)).unwrap();
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    /// Reads the CSV written by [`SamplePath::write_csv`]. Lines starting with
    /// `#` are skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<SamplePath> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut dim = None;
        for line in input.lines() {
            let line = line.map_err(|e| Error::Parameter(format!("csv read: {e}")))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('t') {
                dim = Some(line.split(',').count() - 1);
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parameter(format!("csv parse: {e}")))?;
            let d = *dim.get_or_insert(fields.len() - 1);
            if fields.len() != d + 1 {
                return Err(Error::Dimension(format!("row has {} fields, expected {}", fields.len(), d + 1)));
            }
            times.push(fields[0]);
            values.extend_from_slice(&fields[1..]);
        }
        let dim = dim.ok_or_else(|| Error::Parameter("empty csv".into()))?;
        SamplePath::new(TimeGrid::new(times)?, dim, values)
    }
}

pub(crate) fn csv_header(dim: usize) -> String {
    let mut h = String::from("t");
    for k in 1..=dim {
        write!(h, ",x_{k}").unwrap();
    }
    h.push('\n');
    h
}

/// Formats a double with 17 significant digits, which round-trips exactly.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.16e}")
}
