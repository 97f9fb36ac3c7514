//! Convolution Volterra equations of the second kind, `κ U(t) + ∫_0^t K(t-τ) U(τ) dτ = w(t)`.
//!
//! Two independent solvers: forward product-trapezoid stepping, and the resolvent series
//! built from repeated kernels. The interconnection inverse uses them to recover the
//! antiderivative `U` of the upstream control from the target downstream control.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TimeGrid};

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `t ↦ K(t)`, optionally with its derivative.
#[derive(Clone)]
pub struct ConvolutionKernel {
    eval: Scalar,
    derivative: Option<Scalar>,
    k0: f64,
}

impl fmt::Debug for ConvolutionKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvolutionKernel")
            .field("k0", &self.k0)
            .field("smooth", &self.is_smooth())
            .finish()
    }
}

impl ConvolutionKernel {
    pub fn from_fn(eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let k0 = eval(0.0);
        Self {
            eval: Arc::new(eval),
            derivative: None,
            k0,
        }
    }

    pub fn smooth(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let k0 = eval(0.0);
        Self {
            eval: Arc::new(eval),
            derivative: Some(Arc::new(derivative)),
            k0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::smooth(move |_| c, |_| 0.0)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn derivative(&self, t: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(t))
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn is_smooth(&self) -> bool {
        self.derivative.is_some()
    }

    /// `K(i h)` for every node of `grid`.
    pub fn samples(&self, grid: &TimeGrid) -> Vec<f64> {
        (0..grid.len()).map(|i| self.eval(grid.node(i))).collect()
    }

    /// Finite on the grid and, if flagged smooth, `K(h) - K(0) - h K'(0) = O(h²)` over
    /// three dyadic steps starting at `h0`.
    pub fn check(&self, grid: &TimeGrid, h0: f64) -> Result<()> {
        let k = self.samples(grid);
        if let Some(index) = k.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "kernel",
                index,
            });
        }
        let Some(d) = &self.derivative else {
            return Ok(());
        };
        if let Some(index) = (0..grid.len()).position(|i| !d(grid.node(i)).is_finite()) {
            return Err(Error::NonFinite {
                what: "kernel derivative",
                index,
            });
        }
        let d0 = d(0.0);
        let err = |h: f64| (self.eval(h) - self.k0 - h * d0).abs();
        let floor = 1e-12 * (1.0 + self.k0.abs() + h0 * d0.abs());
        let c = err(h0) / (h0 * h0);
        for s in 1..=3 {
            let h = h0 / f64::from(1 << s);
            if err(h) > 2.0 * c * h * h + floor {
                return Err(Error::InvalidInput(format!(
                    "kernel flagged smooth but its first-order Taylor error at h = {h:e} is {:e}",
                    err(h)
                )));
            }
        }
        Ok(())
    }
}

/// `κ U + K * U = w` with `w(0) = 0`.
#[derive(Debug, Clone)]
pub struct SecondKindProblem {
    kappa: f64,
    kernel: ConvolutionKernel,
    rhs: GridFunction,
}

impl SecondKindProblem {
    pub fn new(kappa: f64, kernel: ConvolutionKernel, rhs: GridFunction) -> Result<Self> {
        if !(kappa.is_finite() && kappa != 0.0) {
            return Err(Error::InvalidInput(format!(
                "kappa must be finite and nonzero, got {kappa}"
            )));
        }
        rhs.check_finite("right-hand side")?;
        if rhs.first().abs() > 1e-12 * rhs.max_abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "right-hand side must vanish at t = 0, got {}",
                rhs.first()
            )));
        }
        if let Some(index) = kernel
            .samples(rhs.grid())
            .iter()
            .position(|v| !v.is_finite())
        {
            return Err(Error::NonFinite {
                what: "kernel",
                index,
            });
        }
        Ok(Self { kappa, kernel, rhs })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kernel(&self) -> &ConvolutionKernel {
        &self.kernel
    }

    pub fn rhs(&self) -> &GridFunction {
        &self.rhs
    }

    pub fn grid(&self) -> &TimeGrid {
        self.rhs.grid()
    }
}

/// Product-trapezoid forward stepping.
pub fn solve_second_kind_direct(problem: &SecondKindProblem) -> Result<GridFunction> {
    let grid = *problem.grid();
    let h = grid.step();
    let k = problem.kernel.samples(&grid);
    let w = problem.rhs.values();
    let kappa = problem.kappa;
    let denom = kappa + 0.5 * h * k[0];
    if denom.abs() < 1e-14 * kappa.abs() {
        return Err(Error::StepSize {
            denominator: denom.abs(),
            kappa,
        });
    }
    let mut u = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        let mut s = 0.5 * k[i] * u[0];
        for j in 1..i {
            s += k[i - j] * u[j];
        }
        u[i] = (w[i] - h * s) / denom;
    }
    GridFunction::new(grid, u)
}

/// Trapezoidal discrete convolution `(a * b)(t_i) = ∫_0^{t_i} a(t_i - s) b(s) ds`.
fn convolve(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        let mut s = 0.5 * (a[i] * b[0] + a[0] * b[i]);
        for j in 1..i {
            s += a[i - j] * b[j];
        }
        out[i] = h * s;
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub const DEFAULT_MAX_RESOLVENT_TERMS: usize = 64;

/// Resolvent `R = Σ_{n≥0} (-1)^{n+1} K̃_{n+1}` of the normalized kernel `K̃ = K/κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolvent {
    pub values: GridFunction,
    /// `‖K̃_n‖_∞` for every repeated kernel used, `n = 1, 2, …`.
    pub term_norms: Vec<f64>,
}

pub fn resolvent_kernel(
    problem: &SecondKindProblem,
    tol: f64,
    max_terms: usize,
) -> Result<Resolvent> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let grid = *problem.grid();
    let h = grid.step();
    let base: Vec<f64> = problem
        .kernel
        .samples(&grid)
        .iter()
        .map(|k| k / problem.kappa)
        .collect();
    let mut term = base.clone();
    let mut r: Vec<f64> = base.iter().map(|k| -k).collect();
    let mut term_norms = vec![max_abs(&term)];
    let mut sign = -1.0;
    while *term_norms.last().unwrap() > tol {
        if term_norms.len() >= max_terms {
            return Err(Error::ResolventDiverged {
                terms: term_norms.len(),
                last_norm: *term_norms.last().unwrap(),
                tol,
            });
        }
        term = convolve(&base, &term, h);
        sign = -sign;
        for (ri, ti) in r.iter_mut().zip(&term) {
            *ri += sign * ti;
        }
        term_norms.push(max_abs(&term));
    }
    Ok(Resolvent {
        values: GridFunction::new(grid, r)?,
        term_norms,
    })
}

/// `U = w̃ + R * w̃` with the resolvent summed to `tol`.
pub fn resolvent_series(problem: &SecondKindProblem, tol: f64) -> Result<GridFunction> {
    let r = resolvent_kernel(problem, tol, DEFAULT_MAX_RESOLVENT_TERMS)?;
    let grid = *problem.grid();
    let w: Vec<f64> = problem
        .rhs
        .values()
        .iter()
        .map(|v| v / problem.kappa)
        .collect();
    let rw = convolve(r.values.values(), &w, grid.step());
    GridFunction::new(grid, w.iter().zip(rw).map(|(a, b)| a + b).collect())
}

/// `U'` by second-order finite differences (centered inside, one-sided at the ends).
pub fn differentiate_antiderivative(u: &GridFunction) -> GridFunction {
    let grid = *u.grid();
    let h = grid.step();
    let v = u.values();
    let m = v.len() - 1;
    let mut d = vec![0.0; v.len()];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..m {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[m] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * h);
    GridFunction::new(grid, d).expect("same grid")
}

/// Which inversion the interconnection admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterconnectCase {
    Regular,
    Dual,
    Singular(u32),
    Unsupported,
}

impl fmt::Display for InterconnectCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterconnectCase::Regular => f.write_str("Regular"),
            InterconnectCase::Dual => f.write_str("Dual"),
            InterconnectCase::Singular(m) => write!(f, "Singular({m})"),
            InterconnectCase::Unsupported => f.write_str("Unsupported"),
        }
    }
}

/// The leading coefficient and the kernel of the second-kind equation for one case.
///
/// Regular/Dual: `κ = K(0)`, kernel `K'`. Singular(m): `κ = K^{(m)}(0)`, kernel `K^{(m+1)}`.
#[derive(Debug, Clone)]
pub struct KernelBundle {
    pub kappa: f64,
    pub kernel: ConvolutionKernel,
}

/// The upstream control recovered from `w`, as an antiderivative of given order.
///
/// Order 0: `antiderivative = U` with `U' = u ∈ L²`, and `u` is sampled.
/// Order m ≥ 1: `u` is the `m`-th distributional derivative of `U = antiderivative'`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionalControl {
    pub order: u32,
    pub antiderivative: GridFunction,
    pub u_values: Option<GridFunction>,
}

/// Solves for the antiderivative that reproduces `w` through the interconnection.
pub fn solve_interconnection(
    case: InterconnectCase,
    w: &GridFunction,
    bundle: &KernelBundle,
) -> Result<DistributionalControl> {
    let order = match case {
        InterconnectCase::Regular | InterconnectCase::Dual => 0,
        InterconnectCase::Singular(m @ 1..=2) => m,
        InterconnectCase::Singular(m) => {
            return Err(Error::Unsupported(format!(
                "singular chains of order {m} are not supported (1 or 2 only)"
            )))
        }
        InterconnectCase::Unsupported => {
            return Err(Error::Unsupported(
                "neither the direct nor the first chain coefficient is nonzero".into(),
            ))
        }
    };
    if bundle.kappa == 0.0 || !bundle.kappa.is_finite() {
        return Err(Error::Misclassified {
            kappa: bundle.kappa,
        });
    }
    let problem = SecondKindProblem::new(bundle.kappa, bundle.kernel.clone(), w.clone())?;
    let antiderivative = solve_second_kind_direct(&problem)?;
    let u_values = (order == 0).then(|| differentiate_antiderivative(&antiderivative));
    Ok(DistributionalControl {
        order,
        antiderivative,
        u_values,
    })
}

/// `max_i |κ Ũ(t_i) + ∫_0^{t_i} K(t_i - τ) Ũ(τ) dτ - w_i|` for the piecewise-linear
/// interpolant `Ũ` of `u`, integrated by Simpson's rule on every interval.
pub fn second_kind_residual(problem: &SecondKindProblem, u: &GridFunction) -> f64 {
    let grid = *problem.grid();
    let h = grid.step();
    let m = grid.intervals();
    let half: Vec<f64> = (0..=2 * m)
        .map(|k| problem.kernel.eval(0.5 * h * k as f64))
        .collect();
    let uv = u.values();
    let w = problem.rhs.values();
    let mut worst = 0.0_f64;
    for i in 0..=m {
        let mut integral = 0.0;
        for j in 0..i {
            let lag = 2 * (i - j);
            integral += h / 6.0
                * (half[lag] * uv[j]
                    + 2.0 * half[lag - 1] * (uv[j] + uv[j + 1])
                    + half[lag - 2] * uv[j + 1]);
        }
        worst = worst.max((problem.kappa * uv[i] + integral - w[i]).abs());
    }
    worst
}

/// `max_i |∫_0^{t_i} K(t_i - τ) u(τ) dτ - w_i|` with the trapezoidal rule.
pub fn first_kind_residual(kernel: &ConvolutionKernel, u: &GridFunction, w: &GridFunction) -> f64 {
    let grid = *u.grid();
    let k = kernel.samples(&grid);
    let conv = convolve(&k, u.values(), grid.step());
    conv.iter()
        .zip(w.values())
        .fold(0.0_f64, |m, (c, w)| m.max((c - w).abs()))
}
