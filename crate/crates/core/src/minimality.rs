//! Strong minimality of weighted exponential families.
//!
//! A family `{x_k}` is strongly minimal when `‖Σ c_k x_k‖² ≥ γ Σ |c_k|²` with `γ > 0`
//! uniformly in the number of terms. The quadratic form is `c* G c` for the Gram matrix
//! `G`, so `γ_n = λ_min(G_n)` of the leading blocks is the computable evidence.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::spectral::SpectralSystem;

/// `{1?} ∪ {β_j e^{μ_j t}}` on `[0, t1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFamily {
    weights: Vec<f64>,
    rates: Vec<f64>,
    has_constant: bool,
    horizon: f64,
}

impl ExponentialFamily {
    /// `entries` are `(weight, rate)` pairs. The constant element, when present, comes first.
    pub fn new(entries: Vec<(f64, f64)>, has_constant: bool, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidFamily(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let (weights, rates): (Vec<f64>, Vec<f64>) = entries.into_iter().unzip();
        for (i, (&w, &r)) in weights.iter().zip(&rates).enumerate() {
            if !(w.is_finite() && r.is_finite()) {
                return Err(Error::InvalidFamily(format!("entry {i} is not finite")));
            }
            if w == 0.0 {
                return Err(Error::InvalidFamily(format!("entry {i} has zero weight")));
            }
            if has_constant && r == 0.0 {
                return Err(Error::InvalidFamily(format!(
                    "entry {i} has rate 0, which duplicates the constant element"
                )));
            }
        }
        for i in 0..rates.len() {
            for j in (i + 1)..rates.len() {
                if rates[i] == rates[j] {
                    return Err(Error::InvalidFamily(format!(
                        "rate {} repeats at entries {i} and {j}",
                        rates[i]
                    )));
                }
            }
        }
        if weights.is_empty() && !has_constant {
            return Err(Error::InvalidFamily("family is empty".into()));
        }
        Ok(Self {
            weights,
            rates,
            has_constant,
            horizon,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn has_constant(&self) -> bool {
        self.has_constant
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of elements, counting the constant.
    pub fn len(&self) -> usize {
        self.rates.len() + usize::from(self.has_constant)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exponential_count(&self) -> usize {
        self.rates.len()
    }

    /// `(weight, rate)` of element `k`; the constant reads as `(1, 0)`.
    pub fn element(&self, k: usize) -> (f64, f64) {
        if self.has_constant {
            if k == 0 {
                (1.0, 0.0)
            } else {
                (self.weights[k - 1], self.rates[k - 1])
            }
        } else {
            (self.weights[k], self.rates[k])
        }
    }

    /// Value of element `k` at time `t`.
    pub fn eval(&self, k: usize, t: f64) -> f64 {
        let (w, r) = self.element(k);
        w * (r * t).exp()
    }
}

/// Symmetric matrix of `L²[0, t1]` inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
}

impl GramMatrix {
    /// Wraps an explicit matrix; it must be square, symmetric and have a positive diagonal.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidInput(
                "Gram matrix must be square and nonempty".into(),
            ));
        }
        for i in 0..n {
            if !(entries[(i, i)] > 0.0 && entries[(i, i)].is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "Gram diagonal entry {i} must be positive and finite"
                )));
            }
            for j in 0..i {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if !a.is_finite() || (a - b).abs() > 1e-14 * a.abs().max(b.abs()) {
                    return Err(Error::InvalidInput(format!(
                        "Gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn leading(&self, n: usize) -> DMatrix<f64> {
        self.entries.view((0, 0), (n, n)).into_owned()
    }

    /// `D G D` with `D = diag(1/√G_ii)`: unit diagonal.
    pub fn normalized(&self) -> DMatrix<f64> {
        let n = self.order();
        let d: Vec<f64> = (0..n).map(|i| 1.0 / self.entries[(i, i)].sqrt()).collect();
        DMatrix::from_fn(n, n, |i, j| d[i] * self.entries[(i, j)] * d[j])
    }

    /// Eigenvalues are all at least `-1e-10 ‖G‖`.
    pub fn check_psd(&self) -> bool {
        let eig = symmetric_eigenvalues(&self.entries);
        let top = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        eig[0] >= -1e-10 * top
    }
}

fn inner_product(a: (f64, f64), b: (f64, f64), t1: f64) -> f64 {
    let s = a.1 + b.1;
    let integral = if s == 0.0 { t1 } else { (s * t1).exp_m1() / s };
    a.0 * b.0 * integral
}

/// Leading `n × n` Gram block of `family`, entries in closed form.
pub fn gram_matrix(family: &ExponentialFamily, n: usize) -> Result<GramMatrix> {
    if n == 0 || n > family.len() {
        return Err(Error::InvalidInput(format!(
            "requested order {n} outside 1..={}",
            family.len()
        )));
    }
    let t1 = family.horizon();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        let ei = family.element(i);
        for j in 0..=i {
            let value = inner_product(ei, family.element(j), t1);
            if !value.is_finite() {
                return Err(Error::GramOverflow { largest_usable: i });
            }
            g[(i, j)] = value;
            g[(j, i)] = value;
        }
    }
    GramMatrix::from_entries(g)
}

/// Heuristic thresholds for turning a finite `γ_n` sequence into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimalityConfig {
    pub floor: f64,
    pub max_relative_decrement: f64,
}

impl Default for MinimalityConfig {
    fn default() -> Self {
        Self {
            floor: 1e-12,
            max_relative_decrement: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StrongEvidenceMinimal,
    Inconclusive,
    Degenerate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::StrongEvidenceMinimal => "strong-evidence-minimal",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityReport {
    /// `γ_n`, smallest eigenvalue of the leading `n × n` block, `n = 1..=n_max`.
    pub gamma_sequence: Vec<f64>,
    /// `λ_min(Ĝ) · min_i G_ii` less a rounding allowance; never exceeds `γ_{n_max}`.
    pub certified_lower_bound: f64,
    pub normalized_min_eigenvalue: f64,
    pub normalized_condition: f64,
    /// `(γ_{n-1} - γ_n) / γ_{n-1}` for the last step, if there are two terms.
    pub last_relative_decrement: Option<f64>,
    pub verdict: Verdict,
    pub dirichlet: Option<DirichletCheck>,
    pub notes: Vec<String>,
}

impl MinimalityReport {
    pub fn gamma(&self) -> f64 {
        *self.gamma_sequence.last().expect("nonempty sequence")
    }
}

/// Builds the report from an explicit Gram matrix (no Dirichlet evidence).
pub fn minimality_from_gram(gram: &GramMatrix, config: &MinimalityConfig) -> MinimalityReport {
    let n = gram.order();
    let mut gamma_sequence: Vec<f64> = (1..=n)
        .map(|k| symmetric_eigenvalues(&gram.leading(k))[0])
        .collect();
    // interlacing holds exactly; enforce it against rounding in the last bits
    for k in 1..n {
        if gamma_sequence[k] > gamma_sequence[k - 1] {
            gamma_sequence[k] = gamma_sequence[k - 1];
        }
    }
    let scaled = symmetric_eigenvalues(&gram.normalized());
    let (lo, hi) = (scaled[0], scaled[n - 1]);
    let min_diag = (0..n)
        .map(|i| gram.entries()[(i, i)])
        .fold(f64::INFINITY, f64::min);
    let margin = 64.0 * n as f64 * f64::EPSILON * hi;
    let gamma = gamma_sequence[n - 1];
    let certified_lower_bound = ((lo - margin) * min_diag).min(gamma);

    let mut notes = Vec::new();
    let last_relative_decrement = (n >= 2).then(|| {
        let prev = gamma_sequence[n - 2];
        if prev > 0.0 {
            (prev - gamma) / prev
        } else {
            f64::INFINITY
        }
    });
    let verdict = if gamma.is_nan() || gamma <= config.floor {
        notes.push(format!(
            "smallest Gram eigenvalue {gamma:e} is at or below the floor {:e}",
            config.floor
        ));
        Verdict::Degenerate
    } else {
        match last_relative_decrement {
            Some(d) if d < config.max_relative_decrement => Verdict::StrongEvidenceMinimal,
            Some(d) => {
                notes.push(format!(
                    "last relative decrement {d:.3e} is not below {}",
                    config.max_relative_decrement
                ));
                Verdict::Inconclusive
            }
            None => {
                notes.push("a single element gives no decrement to assess".into());
                Verdict::Inconclusive
            }
        }
    };
    notes.push("the verdict is finite-dimensional evidence, not a proof of minimality".into());

    MinimalityReport {
        gamma_sequence,
        certified_lower_bound,
        normalized_min_eigenvalue: lo,
        normalized_condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        last_relative_decrement,
        verdict,
        dirichlet: None,
        notes,
    }
}

/// `γ_1 ≥ … ≥ γ_{n_max}` for the leading elements of `family`, with a verdict and,
/// when there are at least three exponentials, the Dirichlet-series evidence.
pub fn strong_minimality_constant(
    family: &ExponentialFamily,
    n_max: usize,
    config: &MinimalityConfig,
) -> Result<MinimalityReport> {
    let gram = gram_matrix(family, n_max)?;
    let mut report = minimality_from_gram(&gram, config);
    if family.exponential_count() >= 3 {
        report.dirichlet = Some(dirichlet_hypothesis(family)?);
    }
    Ok(report)
}

/// Evidence for the sufficient condition "`Σ 1/μ_n < ∞` and `Σ |β_n|^{-1} e^{-μ_n α}`
/// converges for some `α > 0`" over the supplied entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCheck {
    pub partial_reciprocal_sum: f64,
    /// Integral bound on `Σ_{n>N} 1/μ_n`; infinite when the growth test fails.
    pub reciprocal_tail_bound: f64,
    pub reciprocal_rate_sum_estimate: f64,
    /// Growth exponent `p` with `μ_n ~ n^p` fitted over the window.
    pub rate_growth_exponent: f64,
    /// `max_window log(1/|β_n|) / μ_n`; infinite when the sequence grows without bound.
    pub abscissa_estimate: f64,
    /// Log-log slope of `log(1/|β_n|) / μ_n` against `n` over the window.
    pub abscissa_growth_slope: f64,
    /// 1-based indices of the first and last exponential entries in the window.
    pub window: (usize, usize),
    /// Rate shift applied to absorb a constant element.
    pub shift: Option<f64>,
    pub hypothesis_holds: bool,
    pub notes: Vec<String>,
}

const GROWTH_EXPONENT_MIN: f64 = 1.05;
const DIVERGENT_SLOPE: f64 = 0.5;

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn dirichlet_base(weights: &[f64], rates: &[f64]) -> DirichletCheck {
    let k = rates.len();
    let start = k / 2;
    let window = (start + 1, k);
    let mut notes = vec![format!(
        "evidence over entries {}..={} of {k}; not a proof",
        window.0, window.1
    )];

    if let Some(i) = rates.iter().position(|&r| r.is_nan() || r <= 0.0) {
        notes.push(format!(
            "rate {} at entry {} is not positive; the sufficient condition needs every rate positive",
            rates[i],
            i + 1
        ));
        return DirichletCheck {
            partial_reciprocal_sum: f64::NAN,
            reciprocal_tail_bound: f64::INFINITY,
            reciprocal_rate_sum_estimate: f64::INFINITY,
            rate_growth_exponent: f64::NAN,
            abscissa_estimate: f64::NAN,
            abscissa_growth_slope: f64::NAN,
            window,
            shift: None,
            hypothesis_holds: false,
            notes,
        };
    }

    let partial_reciprocal_sum: f64 = rates.iter().map(|r| 1.0 / r).sum();
    let idx: Vec<f64> = (start..k).map(|i| (i + 1) as f64).collect();
    let tail = &rates[start..];

    let (first, last) = (tail[0], tail[tail.len() - 1]);
    let rate_growth_exponent = (last / first).ln() / (idx[idx.len() - 1] / idx[0]).ln();
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let convex = diffs.windows(2).all(|d| d[1] >= d[0] * (1.0 - 1e-12));
    let reciprocal_tail_bound = if increasing
        && convex
        && rate_growth_exponent >= GROWTH_EXPONENT_MIN
    {
        k as f64 / (rates[k - 1] * (rate_growth_exponent - 1.0))
    } else {
        notes.push(format!(
                "rates do not grow fast enough for Σ1/μ to be bounded (fitted exponent {rate_growth_exponent:.3})"
            ));
        f64::INFINITY
    };

    let s: Vec<f64> = weights[start..]
        .iter()
        .zip(tail)
        .map(|(w, r)| (1.0 / w.abs()).ln() / r)
        .collect();
    let max_s = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let abscissa_growth_slope = if s.iter().all(|&v| v > 0.0) && s.len() >= 2 {
        let lx: Vec<f64> = idx.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = s.iter().map(|x| x.ln()).collect();
        least_squares_slope(&lx, &ly)
    } else {
        f64::NAN
    };
    let abscissa_estimate = if abscissa_growth_slope > DIVERGENT_SLOPE {
        notes.push(format!(
            "log(1/|β_n|)/μ_n grows like n^{abscissa_growth_slope:.2}; the Dirichlet series has no finite abscissa"
        ));
        f64::INFINITY
    } else {
        max_s
    };

    let hypothesis_holds = reciprocal_tail_bound.is_finite() && abscissa_estimate.is_finite();
    DirichletCheck {
        partial_reciprocal_sum,
        reciprocal_tail_bound,
        reciprocal_rate_sum_estimate: partial_reciprocal_sum + reciprocal_tail_bound,
        rate_growth_exponent,
        abscissa_estimate,
        abscissa_growth_slope,
        window,
        shift: None,
        hypothesis_holds,
        notes,
    }
}

/// Dirichlet evidence over the exponential entries of `family`.
///
/// A constant element is absorbed by multiplying the whole family by `e^{t}`: the
/// constant becomes `e^{t}` and every rate moves up by one. That preserves strong
/// minimality on a bounded interval, and the shifted rates are bounded below by the
/// originals, so the tail bound of the unshifted check still applies.
pub fn dirichlet_hypothesis(family: &ExponentialFamily) -> Result<DirichletCheck> {
    let k = family.exponential_count();
    if k < 3 {
        return Err(Error::InvalidFamily(format!(
            "the Dirichlet check needs at least 3 exponential entries, got {k}"
        )));
    }
    let base = dirichlet_base(family.weights(), family.rates());
    if !family.has_constant() {
        return Ok(base);
    }
    let shift = 1.0;
    let mut check = base.clone();
    check.shift = Some(shift);
    if family.rates().iter().all(|&r| r > 0.0) {
        check.partial_reciprocal_sum = 1.0 / shift
            + family
                .rates()
                .iter()
                .map(|r| 1.0 / (r + shift))
                .sum::<f64>();
        check.reciprocal_rate_sum_estimate =
            check.partial_reciprocal_sum + base.reciprocal_tail_bound;
        if base.abscissa_estimate.is_finite() {
            let start = k / 2;
            check.abscissa_estimate = family.weights()[start..]
                .iter()
                .zip(&family.rates()[start..])
                .map(|(w, r)| (1.0 / w.abs()).ln() / (r + shift))
                .fold(0.0, f64::max);
        }
    }
    check.notes.push(format!(
        "constant element absorbed by the rate shift {shift}"
    ));
    Ok(check)
}

/// `{1} ∪ {(b_j/λ_j) e^{-λ_j t}}` for the system augmented with `v' = u`.
///
/// A zero eigenvalue with nonzero input is already represented by the constant element.
pub fn augmented_family(system: &SpectralSystem) -> Result<ExponentialFamily> {
    let mut entries = Vec::with_capacity(system.modes());
    for (j, (&lambda, &b)) in system
        .eigenvalues()
        .iter()
        .zip(system.input_coeffs())
        .enumerate()
    {
        if lambda == 0.0 {
            if b == 0.0 {
                return Err(Error::DegenerateZeroMode { mode: j });
            }
            continue;
        }
        if b == 0.0 {
            return Err(Error::InvalidFamily(format!(
                "mode {j} has zero input coefficient; its family element vanishes"
            )));
        }
        entries.push((b / lambda, -lambda));
    }
    ExponentialFamily::new(entries, true, system.horizon())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    fn family(entries: Vec<(f64, f64)>, has_constant: bool, t1: f64) -> ExponentialFamily {
        ExponentialFamily::new(entries, has_constant, t1).unwrap()
    }

    #[test]
    fn gram_two_decaying_exponentials() {
        let f = family(vec![(1.0, -1.0), (1.0, -4.0)], false, 1.0);
        let g = gram_matrix(&f, 2).unwrap();
        let m = g.entries();
        assert_relative_eq!(
            m[(0, 0)],
            (1.0 - (-2.0f64).exp()) / 2.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            m[(0, 1)],
            (1.0 - (-5.0f64).exp()) / 5.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            m[(1, 1)],
            (1.0 - (-8.0f64).exp()) / 8.0,
            max_relative = 1e-15
        );
        assert!((m[(0, 0)] - 0.432332).abs() < 1e-6);
        assert!((m[(0, 1)] - 0.198652).abs() < 1e-6);
        assert!((m[(1, 1)] - 0.124958).abs() < 1e-6);
        for i in 0..2 {
            for j in 0..2 {
                let q = simpson(|t| f.eval(i, t) * f.eval(j, t), 0.0, 1.0, 2000);
                assert_relative_eq!(m[(i, j)], q, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn gram_constant_cases() {
        let f = ExponentialFamily::new(vec![], true, 2.0).unwrap();
        let g = gram_matrix(&f, 1).unwrap();
        assert_eq!(g.entries()[(0, 0)], 2.0);

        let f = family(vec![(1.0, 1.0)], true, 1.0);
        let g = gram_matrix(&f, 2).unwrap();
        let m = g.entries();
        assert_eq!(m[(0, 0)], 1.0);
        assert_relative_eq!(m[(0, 1)], E - 1.0, max_relative = 1e-15);
        assert_relative_eq!(m[(1, 1)], (E * E - 1.0) / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn opposite_rates_use_the_horizon() {
        let f = family(vec![(2.0, 3.0), (0.5, -3.0)], false, 1.5);
        let g = gram_matrix(&f, 2).unwrap();
        assert_relative_eq!(g.entries()[(0, 1)], 1.5, max_relative = 1e-15);
    }

    #[test]
    fn overflow_reports_largest_usable_block() {
        let rates: Vec<(f64, f64)> = (1..=30).map(|n| (1.0, (n * n) as f64)).collect();
        let f = family(rates, true, 1.0);
        match gram_matrix(&f, 31) {
            Err(Error::GramOverflow { largest_usable }) => {
                // 2 n² ≤ 709 holds up to n = 18; the constant shifts the index by one
                assert_eq!(largest_usable, 19);
                assert!(gram_matrix(&f, largest_usable).is_ok());
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn family_validation() {
        assert!(ExponentialFamily::new(vec![(0.0, 1.0)], false, 1.0).is_err());
        assert!(ExponentialFamily::new(vec![(1.0, 1.0), (2.0, 1.0)], false, 1.0).is_err());
        assert!(ExponentialFamily::new(vec![(1.0, 0.0)], true, 1.0).is_err());
        assert!(ExponentialFamily::new(vec![(1.0, 0.0)], false, 1.0).is_ok());
        assert!(ExponentialFamily::new(vec![], false, 1.0).is_err());
    }

    #[test]
    fn single_element_gamma() {
        let f = family(vec![(1.0, -1.0)], false, 1.0);
        let r = strong_minimality_constant(&f, 1, &MinimalityConfig::default()).unwrap();
        assert_relative_eq!(
            r.gamma(),
            (1.0 - (-2.0f64).exp()) / 2.0,
            max_relative = 1e-14
        );
        assert!(r.certified_lower_bound <= r.gamma());
    }

    #[test]
    fn identity_gram_via_seam() {
        let g = GramMatrix::from_entries(DMatrix::identity(2, 2)).unwrap();
        let r = minimality_from_gram(&g, &MinimalityConfig::default());
        assert_eq!(r.gamma_sequence, vec![1.0, 1.0]);
        assert_eq!(r.verdict, Verdict::StrongEvidenceMinimal);
        assert!(r.certified_lower_bound <= 1.0 && r.certified_lower_bound > 0.999);
    }

    #[test]
    fn two_by_two_eigenvalue_formula() {
        let f = family(vec![(1.0, -1.0), (1.0, -4.0)], false, 1.0);
        let g = gram_matrix(&f, 2).unwrap();
        let m = g.entries();
        let tr = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(0, 1)];
        let expected = (tr - (tr * tr - 4.0 * det).sqrt()) / 2.0;
        let r = strong_minimality_constant(&f, 2, &MinimalityConfig::default()).unwrap();
        assert_relative_eq!(r.gamma(), expected, max_relative = 1e-12);
        assert!((r.gamma() - 0.0274829).abs() < 1e-6);
    }

    #[test]
    fn degenerate_when_below_floor() {
        let g = GramMatrix::from_entries(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 1.0 - 1e-15, 1.0 - 1e-15, 1.0],
        ))
        .unwrap();
        let r = minimality_from_gram(&g, &MinimalityConfig::default());
        assert_eq!(r.verdict, Verdict::Degenerate);
    }

    fn heat_family(n: usize) -> ExponentialFamily {
        let entries = (1..=n)
            .map(|k| {
                let k = k as f64;
                let b = if k as usize % 2 == 1 { PI / k } else { -PI / k };
                (b / (k * k), k * k)
            })
            .collect();
        family(entries, false, 1.0)
    }

    #[test]
    fn dirichlet_heat_family_holds() {
        let d = dirichlet_hypothesis(&heat_family(40)).unwrap();
        assert!(d.hypothesis_holds, "{d:?}");
        assert!((d.rate_growth_exponent - 2.0).abs() < 1e-12);
        // Σ 1/n² = π²/6 must lie below the estimate
        assert!(d.reciprocal_rate_sum_estimate >= PI * PI / 6.0);
    }

    #[test]
    fn dirichlet_divergent_abscissa_fails() {
        let entries = (1..=8)
            .map(|k| {
                let k = k as f64;
                ((-k * k * k).exp(), k * k)
            })
            .collect();
        let d = dirichlet_hypothesis(&family(entries, false, 1.0)).unwrap();
        assert!(!d.hypothesis_holds);
        assert!(d.abscissa_estimate.is_infinite());
    }

    #[test]
    fn dirichlet_slow_rates_fail() {
        let entries = (1..=40).map(|k| (1.0, ((k + 1) as f64).ln())).collect();
        let d = dirichlet_hypothesis(&family(entries, false, 1.0)).unwrap();
        assert!(!d.hypothesis_holds);
        assert!(d.reciprocal_tail_bound.is_infinite());
    }

    #[test]
    fn dirichlet_non_positive_rate_fails_with_note() {
        let d = dirichlet_hypothesis(&family(
            vec![(1.0, -1.0), (1.0, 4.0), (1.0, 9.0)],
            false,
            1.0,
        ))
        .unwrap();
        assert!(!d.hypothesis_holds);
        assert!(d.notes.iter().any(|n| n.contains("not positive")));
        assert!(dirichlet_hypothesis(&family(vec![(1.0, 1.0), (1.0, 4.0)], false, 1.0)).is_err());
    }

    #[test]
    fn dirichlet_constant_closure() {
        let base = heat_family(30);
        let with_constant = family(
            base.weights()
                .iter()
                .cloned()
                .zip(base.rates().iter().cloned())
                .collect(),
            true,
            1.0,
        );
        let d = dirichlet_hypothesis(&with_constant).unwrap();
        assert!(d.hypothesis_holds);
        assert_eq!(d.shift, Some(1.0));
    }

    #[test]
    fn augmented_family_examples() {
        let sys = SpectralSystem::new(vec![-1.0], vec![1.0], vec![0.0], 1.0).unwrap();
        let f = augmented_family(&sys).unwrap();
        assert!(f.has_constant());
        assert_eq!(f.weights(), &[-1.0]);
        assert_eq!(f.rates(), &[1.0]);

        let lambdas: Vec<f64> = (1..=4).map(|n| -((n * n) as f64)).collect();
        let b: Vec<f64> = (1..=4)
            .map(|n| {
                if n % 2 == 1 {
                    PI / n as f64
                } else {
                    -PI / n as f64
                }
            })
            .collect();
        let sys = SpectralSystem::new(lambdas, b.clone(), vec![0.0; 4], 1.0).unwrap();
        let f = augmented_family(&sys).unwrap();
        for n in 1..=4 {
            let nf = n as f64;
            assert_eq!(f.rates()[n - 1], nf * nf);
            assert_relative_eq!(
                f.weights()[n - 1],
                -b[n - 1] / (nf * nf),
                max_relative = 1e-15
            );
        }

        let sys =
            SpectralSystem::new(vec![0.0, -1.0], vec![0.0, 1.0], vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(
            augmented_family(&sys),
            Err(Error::DegenerateZeroMode { mode: 0 })
        );
        let sys =
            SpectralSystem::new(vec![0.0, -1.0], vec![2.0, 1.0], vec![0.0, 0.0], 1.0).unwrap();
        let f = augmented_family(&sys).unwrap();
        assert_eq!(f.len(), 2);
    }
}
