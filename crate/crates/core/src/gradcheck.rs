//! Central finite differences for checking reverse-mode gradients and
//! Jacobian determinants.

use crate::nn::Matrix;

/// Step used by [`central_difference`] unless the caller picks another.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Components whose magnitude is below this are compared absolutely, so at a
/// relative tolerance of 1e-4 the absolute floor is 1e-8.
pub const RELATIVE_FLOOR: f64 = 1e-4;

/// `(f(p + h e_i) - f(p - h e_i)) / 2h` for every component of `params`.
pub fn central_difference<F>(params: &[f64], h: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest `|a - n| / max(|a|, |n|, RELATIVE_FLOOR)` over the two vectors.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient lengths differ");
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(RELATIVE_FLOOR))
        .fold(0.0, f64::max)
}

/// Finite-difference Jacobian of `f: R^n -> R^m` at `x`, as an `m x n` matrix.
pub fn jacobian<F>(x: &[f64], h: f64, mut f: F) -> Matrix
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut p = x.to_vec();
    let mut columns = Vec::with_capacity(n);
    for i in 0..n {
        let orig = p[i];
        p[i] = orig + h;
        let up = f(&p);
        p[i] = orig - h;
        let down = f(&p);
        p[i] = orig;
        columns.push(
            up.iter()
                .zip(&down)
                .map(|(u, d)| (u - d) / (2.0 * h))
                .collect::<Vec<f64>>(),
        );
    }
    let m = columns.first().map_or(0, Vec::len);
    let mut out = Matrix::zeros(m, n);
    for (c, col) in columns.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            out[(r, c)] = *v;
        }
    }
    out
}

/// `ln|det A|` by LU decomposition with partial pivoting. Singular matrices
/// give negative infinity.
pub fn log_abs_det(a: &Matrix) -> f64 {
    assert_eq!(a.rows(), a.cols(), "determinant of a non-square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut total = 0.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))
            .unwrap_or(k);
        if m[(pivot, k)] == 0.0 {
            return f64::NEG_INFINITY;
        }
        if pivot != k {
            for c in 0..n {
                let tmp = m[(k, c)];
                m[(k, c)] = m[(pivot, c)];
                m[(pivot, c)] = tmp;
            }
        }
        let d = m[(k, k)];
        total += d.abs().ln();
        for r in k + 1..n {
            let factor = m[(r, k)] / d;
            for c in k..n {
                let v = m[(k, c)];
                m[(r, c)] -= factor * v;
            }
        }
    }
    total
}
