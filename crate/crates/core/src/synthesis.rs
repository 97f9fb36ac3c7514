//! Smooth null-steering controls from the truncated moment problem.
//!
//! The downstream system is augmented with `v' = u`, `v(0) = α`. Steering the augmented
//! state to zero is the moment problem
//!
//! ```text
//! ∫_0^{t1} u dτ = -α,        ∫_0^{t1} e^{-λ_j τ} u dτ = -λ_j x⁰_j / b_j - α,
//! ```
//!
//! solved by the minimum-norm `u` in the span of the test functions
//! `{1, e^{-λ_j τ}}` (a Gram solve).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TimeGrid};
use crate::linalg::solve_scaled_spd;
use crate::minimality::{gram_matrix, ExponentialFamily};
use crate::quadrature::cumulative_trapezoid;
use crate::spectral::{
    evolve_modal, evolve_modal_hermite, terminal_norm, ModalTrajectory, SpectralSystem,
};

/// Moments to match: `∫ u = targets[0]` when the zero moment is present, then
/// `∫ e^{rate_k τ} u = targets[k]` for each rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProblem {
    horizon: f64,
    alpha: f64,
    rates: Vec<f64>,
    weights: Vec<f64>,
    targets: Vec<f64>,
    includes_zero_moment: bool,
    modes: Vec<usize>,
}

impl MomentProblem {
    /// A problem with explicit test rates and targets (zero-moment target first when present).
    pub fn new(
        horizon: f64,
        alpha: f64,
        includes_zero_moment: bool,
        rates: Vec<f64>,
        targets: Vec<f64>,
    ) -> Result<Self> {
        let expected = rates.len() + usize::from(includes_zero_moment);
        if targets.len() != expected {
            return Err(Error::InvalidInput(format!(
                "expected {expected} targets, got {}",
                targets.len()
            )));
        }
        if expected == 0 {
            return Err(Error::InvalidInput(
                "moment problem has no constraints".into(),
            ));
        }
        if let Some(i) = targets.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite {
                what: "moment targets",
                index: i,
            });
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidInput("alpha must be finite".into()));
        }
        // validates horizon and rate distinctness
        let family = test_family(horizon, includes_zero_moment, &rates)?;
        let n = rates.len();
        Ok(Self {
            horizon: family.horizon(),
            alpha,
            rates,
            weights: vec![1.0; n],
            targets,
            includes_zero_moment,
            modes: (0..n).collect(),
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Test rates `-λ_j`.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Augmented-family weights `b_j / λ_j` (1 for explicitly built problems).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn includes_zero_moment(&self) -> bool {
        self.includes_zero_moment
    }

    /// System mode behind each rate; inert modes are skipped.
    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

fn test_family(horizon: f64, has_constant: bool, rates: &[f64]) -> Result<ExponentialFamily> {
    ExponentialFamily::new(
        rates.iter().map(|&r| (1.0, r)).collect(),
        has_constant,
        horizon,
    )
}

/// Moment problem whose solutions steer both the system and `v` to zero at `t1`.
pub fn build_moment_problem(system: &SpectralSystem, alpha: f64) -> Result<MomentProblem> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput("alpha must be finite".into()));
    }
    let mut rates = Vec::new();
    let mut weights = Vec::new();
    let mut targets = vec![-alpha];
    let mut modes = Vec::new();
    for (j, ((&lambda, &b), &x0)) in system
        .eigenvalues()
        .iter()
        .zip(system.input_coeffs())
        .zip(system.initial_coeffs())
        .enumerate()
    {
        if lambda == 0.0 {
            if b == 0.0 {
                return Err(Error::DegenerateZeroMode { mode: j });
            }
            return Err(Error::Unsupported(format!(
                "mode {j} has a zero eigenvalue with nonzero input; its constraint is not an exponential moment"
            )));
        }
        if b == 0.0 {
            if x0 != 0.0 {
                return Err(Error::UncontrollableMode {
                    mode: j,
                    initial: x0,
                });
            }
            continue;
        }
        rates.push(-lambda);
        weights.push(b / lambda);
        targets.push(-lambda * x0 / b - alpha);
        modes.push(j);
    }
    test_family(system.horizon(), true, &rates)?;
    Ok(MomentProblem {
        horizon: system.horizon(),
        alpha,
        rates,
        weights,
        targets,
        includes_zero_moment: true,
        modes,
    })
}

/// `v ∈ H¹` with `v(0) = α`, sampled together with `u = v'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothControl {
    pub alpha: f64,
    pub v: GridFunction,
    pub u: GridFunction,
    /// Coefficients of `u` on `{1?, e^{rate_k τ}}`.
    pub coefficients: Vec<f64>,
    pub rates: Vec<f64>,
    pub has_constant: bool,
    /// `‖Ĝy - Dm‖_∞` of the diagonally scaled system.
    pub scaled_residual: f64,
    /// `‖Ga - m‖_∞`.
    pub moment_residual: f64,
    pub ridge: f64,
    pub used_fallback: bool,
    pub warnings: Vec<String>,
}

impl SmoothControl {
    pub fn grid(&self) -> &TimeGrid {
        self.v.grid()
    }

    pub fn eval_u(&self, t: f64) -> f64 {
        let (c0, rest) = self.split();
        c0 + rest
            .iter()
            .zip(&self.rates)
            .map(|(a, r)| a * (r * t).exp())
            .sum::<f64>()
    }

    pub fn eval_v(&self, t: f64) -> f64 {
        let (c0, rest) = self.split();
        self.alpha
            + c0 * t
            + rest
                .iter()
                .zip(&self.rates)
                .map(|(a, &r)| {
                    if r == 0.0 {
                        a * t
                    } else {
                        a * (r * t).exp_m1() / r
                    }
                })
                .sum::<f64>()
    }

    fn split(&self) -> (f64, &[f64]) {
        if self.has_constant {
            (self.coefficients[0], &self.coefficients[1..])
        } else {
            (0.0, &self.coefficients[..])
        }
    }

    /// `max_i |v_i - α - trapz(u)_{0..i}|`; second order in the step.
    pub fn trapezoid_mismatch(&self) -> f64 {
        let cum = cumulative_trapezoid(self.u.values(), self.grid().step());
        self.v
            .values()
            .iter()
            .zip(cum)
            .fold(0.0_f64, |m, (v, c)| m.max((v - self.alpha - c).abs()))
    }
}

const RESIDUAL_WARN: f64 = 1e-9;

/// Minimum-norm solution of `problem`, sampled on `grid`.
pub fn solve_moment_problem(
    problem: &MomentProblem,
    grid: &TimeGrid,
    ridge: f64,
) -> Result<SmoothControl> {
    if !grid.same_horizon(problem.horizon()) {
        return Err(Error::HorizonMismatch {
            system: problem.horizon(),
            control: grid.horizon(),
        });
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ridge must be nonnegative, got {ridge}"
        )));
    }
    let family = test_family(
        problem.horizon(),
        problem.includes_zero_moment(),
        problem.rates(),
    )?;
    let n = family.len();
    let m = DVector::from_column_slice(problem.targets());
    let mut warnings = Vec::new();

    let (coefficients, scaled_residual, moment_residual, used_fallback) =
        if problem.targets().iter().all(|&t| t == 0.0) {
            (vec![0.0; n], 0.0, 0.0, false)
        } else {
            let gram = gram_matrix(&family, n)?;
            let solve = solve_scaled_spd(gram.entries(), &m, ridge)?;
            let raw = (gram.entries() * &solve.solution - &m).amax();
            if solve.scaled_residual > RESIDUAL_WARN * solve.scaled_rhs_norm.max(1.0) {
                warnings.push(format!(
                    "scaled moment residual {:.3e} exceeds {RESIDUAL_WARN:e} relative",
                    solve.scaled_residual
                ));
            }
            if solve.used_fallback {
                warnings.push("Gram matrix was not numerically positive definite; used LU".into());
            }
            (
                solve.solution.iter().cloned().collect(),
                solve.scaled_residual,
                raw,
                solve.used_fallback,
            )
        };
    if ridge > 0.0 {
        warnings.push(format!("ridge {ridge:e} regularizes the Gram solve"));
    }

    let mut control = SmoothControl {
        alpha: problem.alpha(),
        v: GridFunction::zeros(*grid),
        u: GridFunction::zeros(*grid),
        coefficients,
        rates: problem.rates().to_vec(),
        has_constant: problem.includes_zero_moment(),
        scaled_residual,
        moment_residual,
        ridge,
        used_fallback,
        warnings,
    };
    control.v = GridFunction::from_fn(*grid, |t| control.eval_v(t));
    control.u = GridFunction::from_fn(*grid, |t| control.eval_u(t));
    control.v.check_finite("synthesized control")?;
    control.u.check_finite("synthesized control derivative")?;
    Ok(control)
}

/// Outcome of driving the system with a synthesized control.
#[derive(Debug, Clone, PartialEq)]
pub struct NullVerification {
    /// Terminal norm with the control integrated as a cubic Hermite interpolant of `(v, u)`.
    pub terminal_norm: f64,
    /// Terminal norm with the piecewise-linear interpolant of `v` alone.
    pub linear_terminal_norm: f64,
    pub initial_error: f64,
    pub terminal_control: f64,
    pub trajectory: ModalTrajectory,
}

pub fn verify_smooth_null(
    system: &SpectralSystem,
    control: &SmoothControl,
) -> Result<NullVerification> {
    let trajectory = evolve_modal_hermite(system, &control.v, &control.u)?;
    let linear = evolve_modal(system, &control.v)?;
    Ok(NullVerification {
        terminal_norm: terminal_norm(&trajectory),
        linear_terminal_norm: terminal_norm(&linear),
        initial_error: (control.v.first() - control.alpha).abs(),
        terminal_control: control.v.last().abs(),
        trajectory,
    })
}
