//! Uniform time grids and sampled functions on them.

use crate::error::{Error, Result};

/// Uniform partition of `[0, t1]` into `intervals` equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    intervals: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, intervals: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if intervals < 2 {
            return Err(Error::InvalidGrid(format!(
                "at least 2 intervals are required, got {intervals}"
            )));
        }
        Ok(Self { horizon, intervals })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.intervals as f64
    }

    /// Node `i`, computed so that the last node is exactly `t1`.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.horizon
        } else {
            self.horizon * (i as f64) / (self.intervals as f64)
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub(crate) fn same_horizon(&self, other: f64) -> bool {
        (self.horizon - other).abs() <= 1e-12 * self.horizon.max(other.abs())
    }
}

/// Values of a function at every node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Maximum node-wise absolute difference. Panics if the grids differ in size.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "grid size mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Piecewise-linear interpolant evaluated at `t` (clamped to `[0, t1]`).
    pub fn interpolate(&self, t: f64) -> f64 {
        let h = self.grid.step();
        let t = t.clamp(0.0, self.grid.horizon());
        let pos = t / h;
        let i = (pos.floor() as usize).min(self.grid.intervals() - 1);
        let theta = pos - i as f64;
        self.values[i] * (1.0 - theta) + self.values[i + 1] * theta
    }

    pub(crate) fn check_finite(&self, what: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { what, index }),
            None => Ok(()),
        }
    }
}
