//! Dense kernels backed by `faer`, built single-threaded so every result is
//! bit-reproducible; parallelism happens one level up, across independent
//! fits.

use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, MatRef, Par, Side};
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

pub(crate) fn to_faer(a: ArrayView2<'_, f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_faer(a: MatRef<'_, f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// `aᵀ a`.
pub(crate) fn gram_cols(a: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(a.ncols(), a.ncols());
    faer::linalg::matmul::matmul(out.as_mut(), Accum::Replace, a.transpose(), a, 1.0, Par::Seq);
    out
}

/// `a aᵀ`.
pub(crate) fn gram_rows(a: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(a.nrows(), a.nrows());
    faer::linalg::matmul::matmul(out.as_mut(), Accum::Replace, a, a.transpose(), 1.0, Par::Seq);
    out
}

/// Solves `(a + shift I) x = rhs` for symmetric `a` by Cholesky.
///
/// Fails with [`Error::NumericalRank`] when the shifted matrix is not
/// numerically positive definite: a pivot fails outright, or the smallest
/// squared pivot falls below `n * eps` times the largest diagonal entry.
pub(crate) fn spd_solve_shifted(mut a: Mat<f64>, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, rhs.len());
    let mut max_diag = 0.0f64;
    for i in 0..n {
        a[(i, i)] += shift;
        max_diag = max_diag.max(a[(i, i)].abs());
    }
    let rank_error = Error::NumericalRank { lambda: shift };
    let llt = a.llt(Side::Lower).map_err(|_| rank_error)?;
    let l = llt.L();
    let threshold = max_diag * n as f64 * f64::EPSILON;
    if max_diag == 0.0 || (0..n).any(|i| l[(i, i)] * l[(i, i)] <= threshold) {
        return Err(Error::NumericalRank { lambda: shift });
    }
    let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
    let x = llt.solve(&b);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
/// Each eigenvector's sign is fixed so its largest-magnitude entry is
/// positive (first such entry on ties).
pub(crate) fn symmetric_eigen(a: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    let m = to_faer(a);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NonConvergence {
            iterations: 0,
            gap: f64::NAN,
        })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut values = Array1::zeros(n);
    let mut vectors = Array2::zeros((n, n));
    for out in 0..n {
        let src = n - 1 - out;
        values[out] = s[src];
        let mut pivot = 0;
        for i in 0..n {
            if u[(i, src)].abs() > u[(pivot, src)].abs() {
                pivot = i;
            }
        }
        let sign = if u[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[[i, out]] = sign * u[(i, src)];
        }
    }
    Ok((values, vectors))
}

/// Full SVD `a = U diag(s) Vᵀ`.
pub(crate) fn svd(a: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let m = to_faer(a);
    let svd = m.svd().map_err(|_| Error::NonConvergence {
        iterations: 0,
        gap: f64::NAN,
    })?;
    let s = svd.S().column_vector();
    let k = s.nrows();
    Ok((
        from_faer(svd.U()),
        Array1::from_shape_fn(k, |i| s[i]),
        from_faer(svd.V()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn shifted_solve() {
        let a = to_faer(array![[2.0, 1.0], [1.0, 2.0]].view());
        let x = spd_solve_shifted(a, 1.0, &[4.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = to_faer(array![[1.0, 1.0], [1.0, 1.0]].view());
        assert!(matches!(
            spd_solve_shifted(a, 0.0, &[1.0, 1.0]),
            Err(Error::NumericalRank { .. })
        ));
    }

    #[test]
    fn eigen_descending_with_fixed_sign() {
        let (vals, vecs) = symmetric_eigen(array![[2.0, 0.0], [0.0, 5.0]].view()).unwrap();
        assert_eq!(vals.to_vec(), vec![5.0, 2.0]);
        assert_eq!(vecs.column(0).to_vec(), vec![0.0, 1.0]);
        assert_eq!(vecs.column(1).to_vec(), vec![1.0, 0.0]);
    }
}
