//! Feature matrices, similarity matrices, pair indexing and weight vectors.
//!
//! Constructors validate every structural invariant, so a value of any type
//! in this module is always well formed. All types are immutable after
//! construction.

mod io;

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

pub use io::{
    load_feature_matrix, load_labels, load_similarity_matrix, load_weights, write_feature_matrix,
    write_similarity_matrix, write_weights, format_value, write_records, LabelRow, FILE_COMMENT,
};

/// Absolute tolerance for the symmetry check on similarity matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// An N x d matrix of stimulus features, one row per stimulus.
///
/// Row order is the canonical stimulus order for everything derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    items: Vec<String>,
    features: Vec<String>,
    values: Array2<f64>,
    label: String,
}

impl FeatureMatrix {
    /// Builds a feature matrix with generated feature names `f0, f1, ...`.
    pub fn new(items: Vec<String>, values: Array2<f64>, label: impl Into<String>) -> Result<Self> {
        let features = (0..values.ncols()).map(|k| format!("f{k}")).collect();
        Self::with_feature_names(items, features, values, label)
    }

    pub fn with_feature_names(
        items: Vec<String>,
        features: Vec<String>,
        values: Array2<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let (n, d) = values.dim();
        if n < 2 {
            return Err(Error::invalid(format!("feature matrix needs at least 2 items, got {n}")));
        }
        if d < 1 {
            return Err(Error::invalid("feature matrix needs at least 1 feature"));
        }
        if items.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} identifiers for {n} rows",
                items.len()
            )));
        }
        if features.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {d} columns",
                features.len()
            )));
        }
        check_unique(&items)?;
        check_finite(values.view())?;
        Ok(FeatureMatrix {
            items,
            features,
            values,
            label: label.into(),
        })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn feature_names(&self) -> &[String] {
        &self.features
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_items(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// Same items, feature names and label with replacement values.
    pub fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        if values.dim() != self.values.dim() {
            return Err(Error::DimensionMismatch(format!(
                "replacement values {:?} vs {:?}",
                values.dim(),
                self.values.dim()
            )));
        }
        check_finite(values.view())?;
        Ok(FeatureMatrix {
            items: self.items.clone(),
            features: self.features.clone(),
            values,
            label: self.label.clone(),
        })
    }

    pub fn relabeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Rows scaled to unit Euclidean norm; all-zero rows are left as zero.
    /// The Gram matrix of the result is the cosine-similarity matrix.
    pub fn unit_normalized(&self) -> Self {
        let mut values = self.values.clone();
        for mut row in values.rows_mut() {
            let norm = row.dot(&row).sqrt();
            if norm > 0.0 {
                row.mapv_inplace(|v| v / norm);
            }
        }
        FeatureMatrix {
            items: self.items.clone(),
            features: self.features.clone(),
            values,
            label: format!("{}+unit-norm", self.label),
        }
    }
}

/// A symmetric N x N matrix of pairwise similarities.
///
/// `has_diagonal` is false when the source carried no self-similarities
/// (blank diagonal cells); the stored diagonal is then zero and must not be
/// interpreted.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    items: Vec<String>,
    values: Array2<f64>,
    has_diagonal: bool,
}

impl SimilarityMatrix {
    pub fn new(items: Vec<String>, values: Array2<f64>) -> Result<Self> {
        Self::build(items, values, true)
    }

    /// Matrix whose diagonal carries no information; it is zeroed.
    pub fn without_diagonal(items: Vec<String>, mut values: Array2<f64>) -> Result<Self> {
        if values.is_square() {
            values.diag_mut().fill(0.0);
        }
        Self::build(items, values, false)
    }

    fn build(items: Vec<String>, values: Array2<f64>, has_diagonal: bool) -> Result<Self> {
        let (n, m) = values.dim();
        if n != m {
            return Err(Error::DimensionMismatch(format!("similarity matrix is {n} x {m}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("similarity matrix needs at least 2 items, got {n}")));
        }
        if items.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} identifiers for a {n} x {n} matrix",
                items.len()
            )));
        }
        check_unique(&items)?;
        check_finite(values.view())?;
        for i in 0..n {
            for j in (i + 1)..n {
                let difference = (values[[i, j]] - values[[j, i]]).abs();
                if difference > SYMMETRY_TOLERANCE {
                    return Err(Error::Asymmetric {
                        i,
                        j,
                        difference,
                        tolerance: SYMMETRY_TOLERANCE,
                    });
                }
            }
        }
        Ok(SimilarityMatrix {
            items,
            values,
            has_diagonal,
        })
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

    pub fn has_diagonal(&self) -> bool {
        self.has_diagonal
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }
}

/// Upper-triangle pairs `(i, j)`, `i < j`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        PairIndex { n, pairs }
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn get(&self, m: usize) -> (usize, usize) {
        self.pairs[m]
    }

    /// Position of the unordered pair `{i, j}`; `None` on the diagonal or out
    /// of range.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if i == j || j >= self.n {
            return None;
        }
        // rows before i contribute (n-1) + (n-2) + ... + (n-i) pairs
        Some(i * (2 * self.n - i - 1) / 2 + (j - i - 1))
    }
}

/// Diagonal of W plus an intercept (zero when not fitted).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    weights: Array1<f64>,
    intercept: f64,
}

impl WeightVector {
    pub fn new(weights: Array1<f64>, intercept: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite { row: 0, column: k });
        }
        if !intercept.is_finite() {
            return Err(Error::invalid("intercept is not finite"));
        }
        Ok(WeightVector { weights, intercept })
    }

    pub fn ones(d: usize) -> Self {
        WeightVector {
            weights: Array1::ones(d),
            intercept: 0.0,
        }
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn negative_indices(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w < 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|w| *w >= 0.0)
    }
}

/// Checks that two identifier lists are equal element by element.
///
/// Reports, in order of precedence: a length mismatch, a set mismatch, and
/// the first position where the orders differ. Comparison is exact byte
/// equality.
pub fn validate_alignment(f: &FeatureMatrix, s: &SimilarityMatrix) -> Result<()> {
    check_same_items(f.items(), s.items())
}

pub(crate) fn check_same_items(left: &[String], right: &[String]) -> Result<()> {
    if left.len() != right.len() {
        return Err(Error::LengthMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    if let Some(position) = left.iter().zip(right).position(|(a, b)| a != b) {
        let mut a: Vec<&String> = left.iter().collect();
        let mut b: Vec<&String> = right.iter().collect();
        a.sort();
        b.sort();
        if a != b {
            let only_left: Vec<&str> = left
                .iter()
                .filter(|x| !right.contains(x))
                .map(String::as_str)
                .take(5)
                .collect();
            let only_right: Vec<&str> = right
                .iter()
                .filter(|x| !left.contains(x))
                .map(String::as_str)
                .take(5)
                .collect();
            return Err(Error::SetMismatch(format!(
                "only in first: {only_left:?}; only in second: {only_right:?}"
            )));
        }
        return Err(Error::OrderMismatch {
            position,
            left: left[position].clone(),
            right: right[position].clone(),
        });
    }
    Ok(())
}

fn check_unique(items: &[String]) -> Result<()> {
    let mut seen: HashMap<&str, usize> = HashMap::with_capacity(items.len());
    for (row, id) in items.iter().enumerate() {
        if let Some(first) = seen.insert(id.as_str(), row) {
            return Err(Error::DuplicateId {
                id: id.clone(),
                first,
                second: row,
            });
        }
    }
    Ok(())
}

fn check_finite(values: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, column), v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, column });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn ids(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pair_index_is_lexicographic() {
        let p = PairIndex::new(4);
        assert_eq!(p.pairs(), &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for (m, &(i, j)) in p.pairs().iter().enumerate() {
            assert_eq!(p.position(i, j), Some(m));
            assert_eq!(p.position(j, i), Some(m));
        }
        assert_eq!(p.position(2, 2), None);
        assert_eq!(PairIndex::new(2).len(), 1);
        assert_eq!(PairIndex::new(120).len(), 7140);
    }

    #[test]
    fn alignment_checks() {
        let abc = ids(&["a", "b", "c"]);
        assert!(check_same_items(&abc, &abc).is_ok());
        match check_same_items(&abc, &ids(&["a", "c", "b"])) {
            Err(Error::OrderMismatch { position, .. }) => assert_eq!(position, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            check_same_items(&ids(&["a", "b"]), &abc),
            Err(Error::LengthMismatch { left: 2, right: 3 })
        ));
        assert!(matches!(
            check_same_items(&abc, &ids(&["a", "b", "d"])),
            Err(Error::SetMismatch(_))
        ));
    }

    #[test]
    fn feature_matrix_invariants() {
        assert!(FeatureMatrix::new(ids(&["a"]), array![[1.0]], "x").is_err());
        assert!(matches!(
            FeatureMatrix::new(ids(&["a", "a"]), array![[1.0], [2.0]], "x"),
            Err(Error::DuplicateId { .. })
        ));
        assert!(matches!(
            FeatureMatrix::new(ids(&["a", "b"]), array![[1.0], [f64::NAN]], "x"),
            Err(Error::NonFinite { row: 1, column: 0 })
        ));
        let f = FeatureMatrix::new(ids(&["a", "b"]), array![[3.0, 4.0], [0.0, 0.0]], "x").unwrap();
        let u = f.unit_normalized();
        assert_eq!(u.values(), array![[0.6, 0.8], [0.0, 0.0]]);
    }

    #[test]
    fn similarity_symmetry() {
        assert!(SimilarityMatrix::new(ids(&["a", "b"]), array![[0.0, 5.0], [5.0, 0.0]]).is_ok());
        match SimilarityMatrix::new(ids(&["a", "b"]), array![[0.0, 5.0], [4.0, 0.0]]) {
            Err(Error::Asymmetric { difference, .. }) => assert_eq!(difference, 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weight_vector_sign_checks() {
        let w = WeightVector::new(array![1.0, -2.0, 0.0, -0.5], 0.0).unwrap();
        assert_eq!(w.negative_indices(), vec![1, 3]);
        assert!(!w.is_nonnegative());
        assert!(WeightVector::ones(3).is_nonnegative());
    }
}
