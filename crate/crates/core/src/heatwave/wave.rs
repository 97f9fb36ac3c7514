//! Modal wave equation `z_tt = z_xx + b₂(x) u(t)` on `(0, π)` with Dirichlet ends.
//!
//! State coefficients are against `sin nx`: `z₁` (displacement) and `z₂` (velocity).
//! The state space pairing is `∫ z₁' y₁' + z₂ y₂ = (π/2) Σ (n² z₁ₙ y₁ₙ + z₂ₙ y₂ₙ)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TimeGrid};
use crate::volterra::{differentiate_antiderivative, ConvolutionKernel, DistributionalControl};

use super::functions::{sine_coefficients, FunctionSpec};

/// Sine coefficients of the wave input profile and of the observation pair `(c₁, c₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveModalKernel {
    b2: Vec<f64>,
    c1: Vec<f64>,
    c2: Vec<f64>,
}

impl WaveModalKernel {
    pub fn from_coefficients(b2: Vec<f64>, c1: Vec<f64>, c2: Vec<f64>) -> Result<Self> {
        if b2.len() != c1.len() || b2.len() != c2.len() || b2.is_empty() {
            return Err(Error::InvalidInput(
                "kernel coefficient sequences must be nonempty and of equal length".into(),
            ));
        }
        Ok(Self { b2, c1, c2 })
    }

    pub fn modes(&self) -> usize {
        self.b2.len()
    }

    /// `K^{(k)}(t)` where `K(t) = (π/2) Σ b₂ₙ (n c₁ₙ sin nt + c₂ₙ cos nt)`.
    pub fn derivative(&self, k: u32, t: f64) -> f64 {
        let mut sum = 0.0;
        for (i, ((b, c1), c2)) in self.b2.iter().zip(&self.c1).zip(&self.c2).enumerate() {
            let n = (i + 1) as f64;
            let (s, c) = (n * t).sin_cos();
            // sin and cos advanced by kπ/2
            let (sk, ck) = match k % 4 {
                0 => (s, c),
                1 => (c, -s),
                2 => (-s, -c),
                _ => (-c, s),
            };
            sum += b * n.powi(k as i32) * (n * c1 * sk + c2 * ck);
        }
        PI / 2.0 * sum
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// `K^{(k)}` as a smooth convolution kernel.
    pub fn kernel(&self, k: u32) -> ConvolutionKernel {
        let a = self.clone();
        let b = self.clone();
        ConvolutionKernel::smooth(move |t| a.derivative(k, t), move |t| b.derivative(k + 1, t))
    }
}

/// `K(t) = (c, S₂(t)(0, b₂))` truncated to `modes` terms.
pub fn wave_kernel(
    c1: &FunctionSpec,
    c2: &FunctionSpec,
    b2: &FunctionSpec,
    modes: usize,
) -> WaveModalKernel {
    WaveModalKernel {
        b2: sine_coefficients(b2, modes),
        c1: sine_coefficients(c1, modes),
        c2: sine_coefficients(c2, modes),
    }
}

/// Displacement and velocity coefficients of every mode at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveTrajectory {
    grid: TimeGrid,
    position: Vec<Vec<f64>>,
    velocity: Vec<Vec<f64>>,
}

impl WaveTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.position.len()
    }

    pub fn position(&self, mode: usize) -> &[f64] {
        &self.position[mode]
    }

    pub fn velocity(&self, mode: usize) -> &[f64] {
        &self.velocity[mode]
    }

    /// `(π/4) Σ (n² z₁ₙ² + z₂ₙ²)` at every node.
    pub fn energy(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| {
                let sum: f64 = self
                    .position
                    .iter()
                    .zip(&self.velocity)
                    .enumerate()
                    .map(|(k, (p, v))| {
                        let n = (k + 1) as f64;
                        n * n * p[i] * p[i] + v[i] * v[i]
                    })
                    .sum();
                PI / 4.0 * sum
            })
            .collect()
    }
}

/// `h - sin(nh)/n`, by series when `nh` is small.
fn h_minus_sinc(n: f64, h: f64) -> f64 {
    let x = n * h;
    if x < 1e-2 {
        let x2 = x * x;
        h * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        h - x.sin() / n
    }
}

/// `C(t) = ∫_0^t cos(n(t-τ)) F(τ) dτ` and `S(t) = ∫_0^t sin(n(t-τ)) F(τ) dτ` for the
/// piecewise-linear interpolant of `f`, exact on every step.
fn rotation_integrals(n: f64, f: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let (sn, c) = (n * h).sin_cos();
    let one_minus_c = 2.0 * (0.5 * n * h).sin().powi(2);
    let cos_const = sn / n;
    let cos_slope = one_minus_c / (n * n);
    let sin_const = one_minus_c / n;
    let sin_slope = h_minus_sinc(n, h) / n;
    let mut cc = vec![0.0; f.len()];
    let mut ss = vec![0.0; f.len()];
    let (mut cv, mut sv) = (0.0, 0.0);
    for i in 1..f.len() {
        let f0 = f[i - 1];
        let slope = (f[i] - f0) / h;
        let ic = f0 * cos_const + slope * cos_slope;
        let is = f0 * sin_const + slope * sin_slope;
        let next_c = c * cv - sn * sv + ic;
        let next_s = sn * cv + c * sv + is;
        cv = next_c;
        sv = next_s;
        cc[i] = cv;
        ss[i] = sv;
    }
    (cc, ss)
}

/// Modal wave response to initial data plus a control of order 0 or 1.
pub fn simulate_wave_modal(
    b2: &[f64],
    control: &DistributionalControl,
    psi0: &[f64],
    psi1: &[f64],
) -> Result<WaveTrajectory> {
    let modes = b2.len();
    if psi0.len() != modes || psi1.len() != modes {
        return Err(Error::InvalidInput(
            "wave coefficient sequences must have equal length".into(),
        ));
    }
    if control.order > 1 {
        return Err(Error::Unsupported(format!(
            "wave forcing of distributional order {} (0 or 1 only)",
            control.order
        )));
    }
    let grid = *control.antiderivative.grid();
    let h = grid.step();
    let forcing = control.antiderivative.values();
    let derivative =
        (control.order == 1).then(|| differentiate_antiderivative(&control.antiderivative));
    let mut position = Vec::with_capacity(modes);
    let mut velocity = Vec::with_capacity(modes);
    for k in 0..modes {
        let n = (k + 1) as f64;
        let (cc, ss) = rotation_integrals(n, forcing, h);
        let mut p = Vec::with_capacity(grid.len());
        let mut v = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let (s, c) = (n * grid.node(i)).sin_cos();
            let free_p = psi0[k] * c + psi1[k] * s / n;
            let free_v = -n * psi0[k] * s + psi1[k] * c;
            let (forced_p, forced_v) = match &derivative {
                None => (b2[k] * cc[i], b2[k] * (forcing[i] - n * ss[i])),
                Some(u) => (
                    b2[k] * (forcing[i] - n * ss[i]),
                    b2[k] * (u.values()[i] - n * n * cc[i]),
                ),
            };
            p.push(free_p + forced_p);
            v.push(free_v + forced_v);
        }
        position.push(p);
        velocity.push(v);
    }
    Ok(WaveTrajectory {
        grid,
        position,
        velocity,
    })
}

/// [`simulate_wave_modal`] with profiles expanded to `modes` sine coefficients.
pub fn simulate_wave(
    b2: &FunctionSpec,
    control: &DistributionalControl,
    psi0: &FunctionSpec,
    psi1: &FunctionSpec,
    modes: usize,
) -> Result<WaveTrajectory> {
    simulate_wave_modal(
        &sine_coefficients(b2, modes),
        control,
        &sine_coefficients(psi0, modes),
        &sine_coefficients(psi1, modes),
    )
}

/// `v̂(t_i) = (π/2) Σ (n² c₁ₙ z₁ₙ(t_i) + c₂ₙ z₂ₙ(t_i))`.
pub fn observe_modal(c1: &[f64], c2: &[f64], traj: &WaveTrajectory) -> Result<GridFunction> {
    if c1.len() > traj.modes() || c2.len() > traj.modes() {
        return Err(Error::InvalidInput(format!(
            "observation uses {} modes but the trajectory has {}",
            c1.len().max(c2.len()),
            traj.modes()
        )));
    }
    let values = (0..traj.grid.len())
        .map(|i| {
            let mut sum = 0.0;
            for (k, c) in c1.iter().enumerate() {
                let n = (k + 1) as f64;
                sum += n * n * c * traj.position[k][i];
            }
            for (k, c) in c2.iter().enumerate() {
                sum += c * traj.velocity[k][i];
            }
            PI / 2.0 * sum
        })
        .collect();
    GridFunction::new(traj.grid, values)
}

pub fn observe(
    c1: &FunctionSpec,
    c2: &FunctionSpec,
    traj: &WaveTrajectory,
) -> Result<GridFunction> {
    let n = traj.modes();
    observe_modal(&sine_coefficients(c1, n), &sine_coefficients(c2, n), traj)
}
