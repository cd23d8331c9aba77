use ndarray::{Array1, Array2};

use super::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Classical MDS coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub items: Vec<String>,
    /// N x p, one row per item.
    pub coords: Array2<f64>,
    /// Top-p eigenvalues of the double-centered matrix, nonincreasing.
    pub eigenvalues: Array1<f64>,
    /// Full spectrum, nonincreasing. Negative values measure how far the
    /// input is from a Euclidean configuration.
    pub spectrum: Array1<f64>,
    /// Requested dimensions whose eigenvalue was not positive; their
    /// coordinates are zero.
    pub nonpositive_dims: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Torgerson scaling: `B = −½ J D⁽²⁾ J`, coordinates from the top-p
/// eigenpairs as `v·sqrt(λ)`.
pub fn classical_mds(d: &DissimilarityMatrix, p: usize) -> Result<Embedding> {
    let n = d.n_items();
    if p < 1 || p >= n {
        return Err(Error::invalid(format!("MDS dimensions must be in 1..={}, got {p}", n - 1)));
    }
    let sq = d.values().mapv(|v| v * v);
    let row_mean: Vec<f64> = sq.rows().into_iter().map(|r| r.sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let b = Array2::from_shape_fn((n, n), |(i, j)| -0.5 * (sq[[i, j]] - row_mean[i] - row_mean[j] + grand));
    let (spectrum, vectors) = symmetric_eigen(b.view())?;

    let scale = spectrum.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let positive_floor = scale * n as f64 * f64::EPSILON;
    let mut coords = Array2::zeros((n, p));
    let mut nonpositive_dims = Vec::new();
    for t in 0..p {
        let lambda = spectrum[t];
        if lambda > positive_floor {
            let root = lambda.sqrt();
            for i in 0..n {
                coords[[i, t]] = vectors[[i, t]] * root;
            }
        } else {
            nonpositive_dims.push(t);
        }
    }
    let mut warnings = Vec::new();
    if !nonpositive_dims.is_empty() {
        warnings.push(format!(
            "{} of {p} requested dimensions have no positive eigenvalue and were zero-filled",
            nonpositive_dims.len()
        ));
    }
    let negative = spectrum.iter().filter(|v| **v < -positive_floor).count();
    if negative > 0 {
        warnings.push(format!("{negative} negative eigenvalues: dissimilarities are not Euclidean"));
    }
    Ok(Embedding {
        items: d.items().to_vec(),
        coords,
        eigenvalues: spectrum.slice(ndarray::s![..p]).to_owned(),
        spectrum,
        nonpositive_dims,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn dm(values: Array2<f64>) -> DissimilarityMatrix {
        let items = (0..values.nrows()).map(|i| format!("p{i}")).collect();
        DissimilarityMatrix::new(items, values).unwrap()
    }

    fn distances(x: &Array2<f64>) -> Array2<f64> {
        let n = x.nrows();
        Array2::from_shape_fn((n, n), |(i, j)| (&x.row(i) - &x.row(j)).mapv(|v| v * v).sum().sqrt())
    }

    #[test]
    fn collinear_points_are_rank_one() {
        let d = dm(array![[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]);
        let e = classical_mds(&d, 2).unwrap();
        assert_eq!(e.nonpositive_dims, vec![1]);
        let back = distances(&e.coords);
        for (a, b) in back.iter().zip(d.values().iter()) {
            assert!((a - b).abs() < 1e-9);
        }
        // centered
        for c in e.coords.columns() {
            assert!(c.sum().abs() < 1e-9);
        }
    }

    #[test]
    fn zero_dissimilarities_give_zero_coordinates() {
        let e = classical_mds(&dm(Array2::zeros((4, 4))), 2).unwrap();
        assert!(e.coords.iter().all(|v| *v == 0.0));
        assert_eq!(e.nonpositive_dims, vec![0, 1]);
    }

    #[test]
    fn dimension_bounds() {
        let d = dm(Array2::zeros((3, 3)));
        assert!(classical_mds(&d, 0).is_err());
        assert!(classical_mds(&d, 3).is_err());
    }

    #[test]
    fn non_euclidean_input_reports_negative_spectrum() {
        // violates the triangle inequality
        let d = dm(array![[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]);
        let e = classical_mds(&d, 2).unwrap();
        assert!(e.spectrum[2] < 0.0);
        assert!(!e.warnings.is_empty());
        for w in e.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }
}
