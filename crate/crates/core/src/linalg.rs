//! Small dense symmetric kernels.
//!
//! Gram matrices of growing exponentials are badly graded (diagonal entries spanning
//! dozens of orders of magnitude). Cyclic Jacobi with the relative off-diagonal test
//! `|a_pq| <= eps * sqrt(a_pp * a_qq)` computes their eigenvalues to high relative
//! accuracy, which a tridiagonal-QR solver does not.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues(matrix: &DMatrix<f64>) -> Vec<f64> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");
    let mut a = matrix.clone();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

pub fn min_eigenvalue(matrix: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(matrix)[0]
}

/// Result of a diagonally scaled symmetric solve.
#[derive(Debug, Clone)]
pub(crate) struct ScaledSolve {
    pub solution: DVector<f64>,
    /// `max_i |(Ĝ y - D m)_i|` with `Ĝ = D G D`, `D = diag(1/sqrt(G_ii))`.
    pub scaled_residual: f64,
    pub scaled_rhs_norm: f64,
    pub used_fallback: bool,
}

/// Solves `(D G D + ridge I) y = D rhs` and returns `x = D y`.
///
/// Cholesky first; LU with partial pivoting if the scaled matrix is not numerically
/// positive definite.
pub(crate) fn solve_scaled_spd(
    gram: &DMatrix<f64>,
    rhs: &DVector<f64>,
    ridge: f64,
) -> Result<ScaledSolve> {
    let n = gram.nrows();
    let d = DVector::from_iterator(n, (0..n).map(|i| 1.0 / gram[(i, i)].sqrt()));
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolve(
            "Gram diagonal must be positive and finite".into(),
        ));
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| d[i] * gram[(i, j)] * d[j]);
    let scaled_rhs = rhs.component_mul(&d);
    let mut system = scaled.clone();
    for i in 0..n {
        system[(i, i)] += ridge;
    }
    let (y, used_fallback) =
        match system.clone().cholesky() {
            Some(ch) => (ch.solve(&scaled_rhs), false),
            None => match system.lu().solve(&scaled_rhs) {
                Some(y) => (y, true),
                None => return Err(Error::LinearSolve(
                    "scaled Gram matrix is singular; increase the ridge or reduce the mode count"
                        .into(),
                )),
            },
        };
    let residual = &scaled * &y - &scaled_rhs;
    Ok(ScaledSolve {
        solution: y.component_mul(&d),
        scaled_residual: residual.amax(),
        scaled_rhs_norm: scaled_rhs.amax(),
        used_fallback,
    })
}
