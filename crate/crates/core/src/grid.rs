//! Uniform time grids, sampled trajectories and fractional orders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `t_j = t0 + j * dt`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::input(format!("grid start must be finite, got {t0}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::input(format!("grid step must be positive, got {dt}")));
        }
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        Ok(TimeGrid { t0, dt, n })
    }

    /// Grid covering `[start, end]` with step close to `dt` (the step is
    /// shrunk so that `end` is a node).
    pub fn spanning(start: f64, end: f64, dt: f64) -> Result<Self> {
        if !(end > start) {
            return Err(Error::input(format!("empty interval [{start}, {end}]")));
        }
        if !(dt > 0.0) {
            return Err(Error::input(format!("grid step must be positive, got {dt}")));
        }
        let cells = ((end - start) / dt).ceil().max(1.0) as usize;
        TimeGrid::new(start, (end - start) / cells as f64, cells + 1)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.t(j))
    }

    /// Index of the node nearest to `t`, if `t` lies on the grid span.
    pub fn nearest(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        let j = x.round();
        if j < 0.0 || j > (self.n - 1) as f64 {
            None
        } else {
            Some(j as usize)
        }
    }
}

/// Sampled trajectory: one `dim`-vector per grid node, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
}

impl Path {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("path dimension must be at least 1"));
        }
        if values.len() != grid.len() * dim {
            return Err(Error::input(format!(
                "path holds {} values, expected {} nodes x {} components",
                values.len(),
                grid.len(),
                dim
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite sample at node {} component {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Path { grid, dim, values })
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        Path {
            grid,
            dim: dim.max(1),
            values: vec![0.0; grid.len() * dim.max(1)],
        }
    }

    /// Scalar path sampled from `f`.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Path::new(grid, 1, grid.times().map(f).collect())
    }

    /// Vector path sampled from `f(t) -> components`.
    pub fn from_vec_fn(grid: TimeGrid, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * dim);
        for t in grid.times() {
            let v = f(t);
            if v.len() != dim {
                return Err(Error::input(format!(
                    "sample at t = {t} has {} components, expected {dim}",
                    v.len()
                )));
            }
            values.extend(v);
        }
        Path::new(grid, dim, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    /// Component 0 at node `j`; convenient for scalar paths.
    pub fn scalar(&self, j: usize) -> f64 {
        self.values[j * self.dim]
    }

    pub fn scalars(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.scalar(j)).collect()
    }

    pub fn require_scalar(&self, what: &str) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::input(format!(
                "{what} expects a scalar path, got dimension {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// Euclidean norm of each node's vector.
    pub fn node_norms(&self) -> Vec<f64> {
        (0..self.len()).map(|j| norm2(self.at(j))).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.node_norms().into_iter().fold(0.0, f64::max)
    }

    /// Linear interpolation at time `t`; errors outside the grid span.
    pub fn sample(&self, t: f64) -> Result<Vec<f64>> {
        let g = &self.grid;
        let tol = 1e-9 * g.dt;
        if t < g.t0() - tol {
            return Err(Error::coverage(
                format!("t = {t} precedes path start {}", g.t0()),
                g.t0() - t,
            ));
        }
        if t > g.t_end() + tol {
            return Err(Error::coverage(
                format!("t = {t} exceeds path end {}", g.t_end()),
                t - g.t_end(),
            ));
        }
        let x = ((t - g.t0()) / g.dt).clamp(0.0, (g.len() - 1) as f64);
        let j = (x.floor() as usize).min(g.len() - 2);
        let w = x - j as f64;
        let a = self.at(j);
        let b = self.at(j + 1);
        Ok(a.iter().zip(b).map(|(p, q)| (1.0 - w) * p + w * q).collect())
    }

    /// Pointwise `a * self + b * other` on a shared grid.
    pub fn combine(&self, a: f64, other: &Path, b: f64) -> Result<Path> {
        self.require_same_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Path::new(self.grid, self.dim, values)
    }

    pub fn scale(&self, a: f64) -> Path {
        Path {
            grid: self.grid,
            dim: self.dim,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn require_same_shape(&self, other: &Path) -> Result<()> {
        if self.dim != other.dim || !same_grid(&self.grid, &other.grid) {
            return Err(Error::input(format!(
                "paths do not share a grid: ({} nodes from {}, dt {}, dim {}) vs ({} nodes from {}, dt {}, dim {})",
                self.len(),
                self.grid.t0(),
                self.grid.dt(),
                self.dim,
                other.len(),
                other.grid.t0(),
                other.grid.dt(),
                other.dim
            )));
        }
        Ok(())
    }

    /// Sub-path on nodes `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Path> {
        if end > self.len() || end < start + 2 {
            return Err(Error::input(format!(
                "invalid node range {start}..{end} for a path of {} nodes",
                self.len()
            )));
        }
        let grid = TimeGrid::new(self.grid.t(start), self.grid.dt(), end - start)?;
        Path::new(grid, self.dim, self.values[start * self.dim..end * self.dim].to_vec())
    }

    /// CSV with a header row (`t`, then one column per component, or the
    /// given names) and 17 significant digits.
    pub fn to_csv(&self, names: Option<&[String]>) -> String {
        let mut out = String::from("t");
        for c in 0..self.dim {
            out.push(',');
            match names.and_then(|n| n.get(c)) {
                Some(name) => out.push_str(name),
                None => out.push_str(&format!("c{}", c + 1)),
            }
        }
        out.push('\n');
        for j in 0..self.len() {
            out.push_str(&fmt_f64(self.grid.t(j)));
            for v in self.at(j) {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn same_grid(a: &TimeGrid, b: &TimeGrid) -> bool {
    a.len() == b.len()
        && (a.t0() - b.t0()).abs() <= 1e-12 * (1.0 + a.t0().abs())
        && (a.dt() - b.dt()).abs() <= 1e-12 * a.dt()
}

/// Full double precision, fixed layout.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fractional order `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FracOrder(f64);

impl FracOrder {
    /// Orders accepted by the fractional calculus routines: `0 < alpha <= 2`.
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 2.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(Error::domain(format!("fractional order must lie in (0, 2], got {alpha}")))
        }
    }

    /// Orders accepted by the resolvent and solver routines: `1 < alpha < 2`.
    pub fn solver(alpha: f64) -> Result<Self> {
        if alpha > 1.0 && alpha < 2.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(Error::domain(format!("solver order must lie in (1, 2), got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn in_solver_range(self) -> bool {
        self.0 > 1.0 && self.0 < 2.0
    }
}

/// `n` points log-spaced on `[lo, hi]`, both ends included.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
