//! Spatial and hierarchical representations recovered from similarity
//! matrices: classical MDS, agglomerative clustering and side-by-side
//! comparison of two matrices.

mod cluster;
mod compare;
mod mds;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::datamodel::SimilarityMatrix;
use crate::error::{Error, Result};

pub use cluster::{hierarchical_cluster, Dendrogram, Linkage, Merge};
pub use compare::{compare_representations, procrustes, CompareOptions, Comparison};
pub use mds::{classical_mds, Embedding};

/// Symmetric, nonnegative, zero-diagonal N x N matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix {
    items: Vec<String>,
    values: Array2<f64>,
}

impl DissimilarityMatrix {
    pub fn new(items: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let (n, m) = values.dim();
        if n != m || items.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} items for a {n} x {m} dissimilarity matrix",
                items.len()
            )));
        }
        for i in 0..n {
            if values[[i, i]] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = values[[i, j]];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, column: j });
                }
                if v < 0.0 {
                    return Err(Error::invalid(format!("negative dissimilarity at ({i}, {j})")));
                }
                if v != values[[j, i]] {
                    return Err(Error::Asymmetric {
                        i,
                        j,
                        difference: (v - values[[j, i]]).abs(),
                        tolerance: 0.0,
                    });
                }
            }
        }
        Ok(DissimilarityMatrix { items, values })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn n_items(&self) -> usize {
        self.values.nrows()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DissimilarityMethod {
    /// `d_ij = max_{k≠l} s_kl − s_ij`.
    #[default]
    MaxShift,
    /// `d_ij = sqrt(s_ii + s_jj − 2 s_ij)`, the Euclidean distance implied by
    /// a Gram matrix.
    GramDistance,
}

impl DissimilarityMethod {
    pub fn name(self) -> &'static str {
        match self {
            DissimilarityMethod::MaxShift => "max-shift",
            DissimilarityMethod::GramDistance => "gram-distance",
        }
    }
}

impl fmt::Display for DissimilarityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DissimilarityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-shift" => Ok(DissimilarityMethod::MaxShift),
            "gram-distance" => Ok(DissimilarityMethod::GramDistance),
            other => Err(Error::invalid(format!(
                "unknown dissimilarity `{other}` (expected max-shift or gram-distance)"
            ))),
        }
    }
}

/// Converts similarities to dissimilarities. Only the upper triangle of `s`
/// is read, so the result is exactly symmetric.
pub fn to_dissimilarity(s: &SimilarityMatrix, method: DissimilarityMethod) -> Result<DissimilarityMatrix> {
    let n = s.n_items();
    let v = s.values();
    let mut d = Array2::zeros((n, n));
    match method {
        DissimilarityMethod::MaxShift => {
            let mut max = f64::NEG_INFINITY;
            for i in 0..n {
                for j in (i + 1)..n {
                    max = max.max(v[[i, j]]);
                }
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    d[[i, j]] = max - v[[i, j]];
                    d[[j, i]] = d[[i, j]];
                }
            }
        }
        DissimilarityMethod::GramDistance => {
            if !s.has_diagonal() {
                return Err(Error::MissingDiagonal);
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    d[[i, j]] = (v[[i, i]] + v[[j, j]] - 2.0 * v[[i, j]]).max(0.0).sqrt();
                    d[[j, i]] = d[[i, j]];
                }
            }
        }
    }
    DissimilarityMatrix::new(s.items().to_vec(), d)
}
