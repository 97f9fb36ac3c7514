//! Profiles on `[0, π]` and their sine coefficients.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::simpson;

/// A square-integrable function on `[0, π]`.
///
/// `Polynomial` holds ascending coefficients `c_0 + c_1 x + …`; `Sine` holds the
/// coefficients of `Σ s_n sin nx`; `Samples` holds values at uniformly spaced points
/// from `0` to `π` inclusive, read as a piecewise-linear function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum FunctionSpec {
    Polynomial(Vec<f64>),
    Sine(Vec<f64>),
    Samples(Vec<f64>),
}

impl FunctionSpec {
    pub fn zero() -> Self {
        FunctionSpec::Polynomial(vec![0.0])
    }

    pub fn data(&self) -> &[f64] {
        match self {
            FunctionSpec::Polynomial(d) | FunctionSpec::Sine(d) | FunctionSpec::Samples(d) => d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.data();
        if d.is_empty() {
            return Err(Error::InvalidInput("function data is empty".into()));
        }
        if let Some(index) = d.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "function data",
                index,
            });
        }
        if matches!(self, FunctionSpec::Samples(_)) && d.len() < 2 {
            return Err(Error::InvalidInput(
                "sampled functions need at least 2 samples".into(),
            ));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.data().iter().all(|&v| v == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * x + a),
            FunctionSpec::Sine(s) => s
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k + 1) as f64 * x).sin())
                .sum(),
            FunctionSpec::Samples(v) => {
                let m = v.len() - 1;
                let pos = (x.clamp(0.0, PI) / PI) * m as f64;
                let i = (pos.floor() as usize).min(m - 1);
                let theta = pos - i as f64;
                v[i] * (1.0 - theta) + v[i + 1] * theta
            }
        }
    }

    /// Whether the function vanishes at both ends (membership in `H¹₀` for the smooth kinds).
    pub fn vanishes_at_ends(&self) -> bool {
        match self {
            FunctionSpec::Sine(_) => true,
            _ => {
                let scale = self.data().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                let tol = 1e-12 * scale * (1.0 + PI.powi(self.data().len() as i32));
                self.eval(0.0).abs() <= tol && self.eval(PI).abs() <= tol
            }
        }
    }
}

/// `I_k = ∫_0^π x^k sin nx dx` for `k = 0..=deg`.
fn polynomial_sine_moments(deg: usize, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 }; // cos nπ
    let mut sine = vec![0.0; deg + 1];
    let mut cosine = vec![0.0; deg + 1];
    sine[0] = (1.0 - sign) / nf;
    for k in 1..=deg {
        let kf = k as f64;
        sine[k] = -PI.powi(k as i32) * sign / nf + kf / nf * cosine[k - 1];
        cosine[k] = -kf / nf * sine[k - 1];
    }
    sine
}

/// `∫_a^b (p + q x) sin nx dx`.
fn linear_sine_integral(p: f64, q: f64, a: f64, b: f64, n: f64) -> f64 {
    let anti = |x: f64| {
        let (s, c) = (n * x).sin_cos();
        -(p + q * x) * c / n + q * s / (n * n)
    };
    anti(b) - anti(a)
}

/// Normalized coefficients `f_n = (2/π) ∫_0^π f(x) sin nx dx`, `n = 1..=count`.
///
/// Exact for every kind: closed-form moments for polynomials, the coefficients
/// themselves for sine series, exact segment integrals for samples.
pub fn sine_coefficients(f: &FunctionSpec, count: usize) -> Vec<f64> {
    match f {
        FunctionSpec::Polynomial(c) => (1..=count)
            .map(|n| {
                let moments = polynomial_sine_moments(c.len() - 1, n);
                2.0 / PI * c.iter().zip(&moments).map(|(a, m)| a * m).sum::<f64>()
            })
            .collect(),
        FunctionSpec::Sine(s) => (0..count)
            .map(|k| s.get(k).copied().unwrap_or(0.0))
            .collect(),
        FunctionSpec::Samples(v) => {
            let m = v.len() - 1;
            let dx = PI / m as f64;
            (1..=count)
                .map(|n| {
                    let nf = n as f64;
                    let total: f64 = (0..m)
                        .map(|i| {
                            let (a, b) = (dx * i as f64, dx * (i + 1) as f64);
                            let q = (v[i + 1] - v[i]) / dx;
                            linear_sine_integral(v[i] - q * a, q, a, b, nf)
                        })
                        .sum();
                    2.0 / PI * total
                })
                .collect()
        }
    }
}

/// `∫_0^π f sin nx dx = (π/2) f_n`, the convention without the biorthogonal factor.
pub fn unnormalized(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().map(|c| c * PI / 2.0).collect()
}

fn polynomial_product_integral(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let k = (i + j + 1) as i32;
            sum += x * y * PI.powi(k) / k as f64;
        }
    }
    sum
}

const FALLBACK_INTERVALS: usize = 20_000;

/// `∫_0^π f g dx`, exact unless a sampled profile is involved.
pub fn inner_product(f: &FunctionSpec, g: &FunctionSpec) -> f64 {
    use FunctionSpec::*;
    match (f, g) {
        (Polynomial(a), Polynomial(b)) => polynomial_product_integral(a, b),
        (Sine(s), other) | (other, Sine(s)) if !matches!(other, Samples(_)) => {
            let oc = sine_coefficients(other, s.len());
            PI / 2.0 * s.iter().zip(&oc).map(|(x, y)| x * y).sum::<f64>()
        }
        _ => {
            // piecewise-linear factors: align Simpson panels with the sample knots
            let knots = [f, g]
                .iter()
                .filter_map(|s| match s {
                    Samples(v) => Some(v.len() - 1),
                    _ => None,
                })
                .fold(1, |acc, m| acc * m / gcd(acc, m));
            let panels = (FALLBACK_INTERVALS / knots).max(1) * knots;
            let dx = PI / panels as f64;
            let per = (FALLBACK_INTERVALS / panels).max(2);
            (0..panels)
                .map(|i| {
                    let a = dx * i as f64;
                    simpson(|x| f.eval(x) * g.eval(x), a, a + dx, per)
                })
                .sum()
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
