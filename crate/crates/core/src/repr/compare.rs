use ndarray::{Array2, ArrayView2, Axis};

use super::{classical_mds, hierarchical_cluster, to_dissimilarity, Dendrogram, DissimilarityMethod, Embedding, Linkage};
use crate::datamodel::{check_same_items, PairIndex, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::simcore::{extract_targets, r2_cod, r_squared};

/// Squared error left after optimally translating and rotating (or
/// reflecting) `a` onto `b`.
///
/// With `scaled`, both centered configurations are first normalized to unit
/// Frobenius norm and `a` is also given its optimal scale, so the result is
/// a disparity in `[0, 1]` that ignores overall size.
pub fn procrustes(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, scaled: bool) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "configurations of shape {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let center = |x: ArrayView2<'_, f64>| -> Array2<f64> {
        let mean = x.mean_axis(Axis(0)).expect("at least one row");
        &x - &mean
    };
    let mut a = center(a);
    let mut b = center(b);
    if scaled {
        for x in [&mut a, &mut b] {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::UndefinedMetric("configuration collapsed to a point".into()));
            }
            *x /= norm;
        }
    }
    let (u, s, v) = svd(a.t().dot(&b).view())?;
    let rotation = u.dot(&v.t());
    let aligned = a.dot(&rotation);
    if scaled {
        let trace: f64 = s.sum();
        return Ok((1.0 - trace * trace).max(0.0));
    }
    Ok((&aligned - &b).iter().map(|v| v * v).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareOptions {
    pub dissimilarity: DissimilarityMethod,
    pub mds_dims: usize,
    pub linkage: Linkage,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            dissimilarity: DissimilarityMethod::MaxShift,
            mds_dims: 2,
            linkage: Linkage::Average,
        }
    }
}

/// Two similarity matrices over the same items, analysed side by side.
#[derive(Clone, Debug)]
pub struct Comparison {
    /// Squared Pearson correlation of the upper triangles.
    pub r_squared: f64,
    pub r2_cod: f64,
    pub embeddings: [Embedding; 2],
    pub dendrograms: [Dendrogram; 2],
    /// Scaled Procrustes disparity between the two embeddings.
    pub procrustes_disparity: f64,
}

pub fn compare_representations(
    first: &SimilarityMatrix,
    second: &SimilarityMatrix,
    options: &CompareOptions,
) -> Result<Comparison> {
    check_same_items(first.items(), second.items())?;
    let pairs = PairIndex::new(first.n_items());
    let x = extract_targets(first, &pairs)?;
    let y = extract_targets(second, &pairs)?;
    let r_squared = r_squared(x.as_slice(), y.as_slice())?;
    let cod = r2_cod(x.as_slice(), y.as_slice())?;

    let analyse = |s: &SimilarityMatrix| -> Result<(Embedding, Dendrogram)> {
        let d = to_dissimilarity(s, options.dissimilarity)?;
        Ok((classical_mds(&d, options.mds_dims)?, hierarchical_cluster(&d, options.linkage)?))
    };
    let (e1, t1) = analyse(first)?;
    let (e2, t2) = analyse(second)?;
    let procrustes_disparity = procrustes(e1.coords.view(), e2.coords.view(), true)?;
    Ok(Comparison {
        r_squared,
        r2_cod: cod,
        embeddings: [e1, e2],
        dendrograms: [t1, t2],
        procrustes_disparity,
    })
}
