//! Diagonal evolution systems driven by a scalar control, integrated mode by mode.
//!
//! Each mode obeys `x_j' = λ_j x_j + b_j v(t)`. Controls are grid functions; the
//! integrator treats them as piecewise-linear (or piecewise-cubic Hermite when a
//! derivative channel is supplied) and integrates each step in closed form, so the
//! only error is the interpolation of the control itself.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TimeGrid};

/// Diagonal system: eigenvalues, input coefficients and initial coefficients over a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSystem {
    eigenvalues: Vec<f64>,
    input_coeffs: Vec<f64>,
    initial_coeffs: Vec<f64>,
    horizon: f64,
}

impl SpectralSystem {
    pub fn new(
        eigenvalues: Vec<f64>,
        input_coeffs: Vec<f64>,
        initial_coeffs: Vec<f64>,
        horizon: f64,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 {
            return Err(Error::InvalidSystem("at least one mode is required".into()));
        }
        if input_coeffs.len() != n || initial_coeffs.len() != n {
            return Err(Error::InvalidSystem(format!(
                "length mismatch: {} eigenvalues, {} input coefficients, {} initial coefficients",
                n,
                input_coeffs.len(),
                initial_coeffs.len()
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidSystem(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        for (what, seq) in [
            ("eigenvalues", &eigenvalues),
            ("input coefficients", &input_coeffs),
            ("initial coefficients", &initial_coeffs),
        ] {
            if let Some(i) = seq.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidSystem(format!("{what}[{i}] is not finite")));
            }
        }
        for (i, w) in eigenvalues.windows(2).enumerate() {
            if w[1].abs() < w[0].abs() {
                return Err(Error::InvalidSystem(format!(
                    "eigenvalues must be ordered by non-decreasing modulus (index {})",
                    i + 1
                )));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if eigenvalues[i] == eigenvalues[j] {
                    return Err(Error::InvalidSystem(format!(
                        "eigenvalue {} repeats at indices {i} and {j}",
                        eigenvalues[i]
                    )));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            input_coeffs,
            initial_coeffs,
            horizon,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn input_coeffs(&self) -> &[f64] {
        &self.input_coeffs
    }

    pub fn initial_coeffs(&self) -> &[f64] {
        &self.initial_coeffs
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Same operator and input, different initial state and horizon.
    pub fn restarted(&self, initial_coeffs: Vec<f64>, horizon: f64) -> Result<Self> {
        Self::new(
            self.eigenvalues.clone(),
            self.input_coeffs.clone(),
            initial_coeffs,
            horizon,
        )
    }

    pub fn at_rest(&self) -> bool {
        self.initial_coeffs.iter().all(|&x| x == 0.0)
    }
}

/// Modal coefficients of the state at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTrajectory {
    grid: TimeGrid,
    modes: Vec<Vec<f64>>,
}

impl ModalTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    pub fn mode(&self, j: usize) -> &[f64] {
        &self.modes[j]
    }

    /// Modal coefficients at node `i`.
    pub fn state_at(&self, i: usize) -> Vec<f64> {
        self.modes.iter().map(|m| m[i]).collect()
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m[m.len() - 1]).collect()
    }
}

/// Moments `m_j` such that mode `j` is steered to zero iff `∫_0^{t1} e^{-λ_j τ} v(τ) dτ = m_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTargets {
    pub values: Vec<f64>,
    /// Modes with zero input and zero initial data: trivially at rest, no constraint.
    pub inert: Vec<bool>,
}

/// `φ_k(z) = Σ_{m≥0} z^m / (m+k)!`, so that `∫_0^h e^{λ(h-s)} s^k ds = k! h^{k+1} φ_{k+1}(λh)`.
pub(crate) fn phi(k: usize, z: f64) -> f64 {
    if z.abs() <= 2.0 {
        // (m+k)! grows fast enough that 40 terms reach rounding level for |z| <= 2
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        let mut term = 1.0 / fact;
        let mut sum = term;
        for m in 1..40 {
            term *= z / (m + k) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let mut value = z.exp();
        let mut inv_fact = 1.0;
        for j in 0..k {
            if j > 0 {
                inv_fact /= j as f64;
            }
            value = (value - inv_fact) / z;
        }
        value
    }
}

/// Integrates every mode under the piecewise-linear interpolant of `control`.
pub fn evolve_modal(system: &SpectralSystem, control: &GridFunction) -> Result<ModalTrajectory> {
    let grid = *control.grid();
    if !grid.same_horizon(system.horizon()) {
        return Err(Error::HorizonMismatch {
            system: system.horizon(),
            control: grid.horizon(),
        });
    }
    control.check_finite("control")?;
    let h = grid.step();
    let v = control.values();
    let modes = system
        .eigenvalues()
        .iter()
        .zip(system.input_coeffs())
        .zip(system.initial_coeffs())
        .map(|((&lambda, &b), &x0)| {
            let z = lambda * h;
            let decay = z.exp();
            let w0 = h * phi(1, z);
            let w1 = h * phi(2, z);
            let mut out = Vec::with_capacity(v.len());
            let mut x = x0;
            out.push(x);
            for i in 0..grid.intervals() {
                x = decay * x + b * (v[i] * w0 + (v[i + 1] - v[i]) * w1);
                out.push(x);
            }
            out
        })
        .collect();
    Ok(ModalTrajectory { grid, modes })
}

/// Integrates every mode under the piecewise-cubic Hermite interpolant built from
/// samples of the control and of its derivative.
pub fn evolve_modal_hermite(
    system: &SpectralSystem,
    values: &GridFunction,
    derivatives: &GridFunction,
) -> Result<ModalTrajectory> {
    let grid = *values.grid();
    if !grid.same_horizon(system.horizon()) {
        return Err(Error::HorizonMismatch {
            system: system.horizon(),
            control: grid.horizon(),
        });
    }
    if derivatives.grid() != values.grid() {
        return Err(Error::InvalidGrid(
            "control values and derivatives live on different grids".into(),
        ));
    }
    values.check_finite("control")?;
    derivatives.check_finite("control derivative")?;
    let h = grid.step();
    let v = values.values();
    let dv = derivatives.values();
    let modes = system
        .eigenvalues()
        .iter()
        .zip(system.input_coeffs())
        .zip(system.initial_coeffs())
        .map(|((&lambda, &b), &x0)| {
            let z = lambda * h;
            let decay = z.exp();
            // weights for the monomials θ^k, θ = s/h, under e^{λ(h-s)}
            let w = [
                h * phi(1, z),
                h * phi(2, z),
                2.0 * h * phi(3, z),
                6.0 * h * phi(4, z),
            ];
            let mut out = Vec::with_capacity(v.len());
            let mut x = x0;
            out.push(x);
            for i in 0..grid.intervals() {
                let (v0, v1) = (v[i], v[i + 1]);
                let (d0, d1) = (h * dv[i], h * dv[i + 1]);
                let c2 = 3.0 * (v1 - v0) - 2.0 * d0 - d1;
                let c3 = 2.0 * (v0 - v1) + d0 + d1;
                x = decay * x + b * (v0 * w[0] + d0 * w[1] + c2 * w[2] + c3 * w[3]);
                out.push(x);
            }
            out
        })
        .collect();
    Ok(ModalTrajectory { grid, modes })
}

pub fn moment_targets(system: &SpectralSystem) -> Result<MomentTargets> {
    let mut values = Vec::with_capacity(system.modes());
    let mut inert = Vec::with_capacity(system.modes());
    for (j, (&b, &x0)) in system
        .input_coeffs()
        .iter()
        .zip(system.initial_coeffs())
        .enumerate()
    {
        if b == 0.0 {
            if x0 != 0.0 {
                return Err(Error::UncontrollableMode {
                    mode: j,
                    initial: x0,
                });
            }
            values.push(0.0);
            inert.push(true);
        } else {
            values.push(-x0 / b);
            inert.push(false);
        }
    }
    Ok(MomentTargets { values, inert })
}

/// Exact moments `∫_0^{t1} e^{-λ_j τ} ṽ(τ) dτ` of the piecewise-linear interpolant `ṽ`.
pub fn control_moments(system: &SpectralSystem, control: &GridFunction) -> Result<Vec<f64>> {
    let grid = *control.grid();
    if !grid.same_horizon(system.horizon()) {
        return Err(Error::HorizonMismatch {
            system: system.horizon(),
            control: grid.horizon(),
        });
    }
    control.check_finite("control")?;
    let h = grid.step();
    let v = control.values();
    Ok(system
        .eigenvalues()
        .iter()
        .map(|&lambda| {
            let z = -lambda * h;
            let p1 = phi(1, z);
            let p2 = phi(2, z);
            let mut sum = 0.0;
            for i in 0..grid.intervals() {
                let local = h * (v[i] * p1 + (v[i + 1] - v[i]) * (p1 - p2));
                sum += (z * i as f64).exp() * local;
            }
            sum
        })
        .collect())
}

/// Euclidean norm of the modal coefficients at the final node.
pub fn terminal_norm(traj: &ModalTrajectory) -> f64 {
    traj.modes()
        .iter()
        .map(|m| m[m.len() - 1].powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `Σ_{j ≥ kept} |c_j|`: the part of a coefficient sequence left out by truncation.
pub fn modal_tail(coeffs: &[f64], kept: usize) -> f64 {
    coeffs.iter().skip(kept).map(|c| c.abs()).sum()
}
