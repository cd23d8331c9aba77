//! The diagonal-reweighting similarity model `S = F W Fᵀ`.
//!
//! For items `i` and `j` the model similarity is `Σ_k w_k f_ik f_jk`, which is
//! linear in the weights with predictors `f_ik f_jk`. Stacking those
//! predictors for every upper-triangle pair gives the [`DesignMatrix`], and
//! fitting `w` becomes an ordinary regression against the observed
//! upper-triangle similarities.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::datamodel::{FeatureMatrix, PairIndex, SimilarityMatrix, WeightVector};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// One row per item pair, holding the elementwise product of the two items'
/// feature vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    rows: Array2<f64>,
    pairs: PairIndex,
}

impl DesignMatrix {
    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    pub fn pair_index(&self) -> &PairIndex {
        &self.pairs
    }

    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    pub fn into_rows(self) -> Array2<f64> {
        self.rows
    }
}

/// Upper-triangle similarities in pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetVector(Array1<f64>);

impl TargetVector {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if let Some(m) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: m, column: 0 });
        }
        Ok(TargetVector(values))
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("owned vector is contiguous")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Raw inner products between every pair of feature rows, diagonal included.
pub fn gram_similarity(f: &FeatureMatrix) -> SimilarityMatrix {
    let n = f.n_items();
    let values = f.values();
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        let fi = values.row(i);
        for j in i..n {
            let fj = values.row(j);
            let mut acc = 0.0;
            for k in 0..fi.len() {
                acc += fi[k] * fj[k];
            }
            s[[i, j]] = acc;
            s[[j, i]] = acc;
        }
    }
    SimilarityMatrix::new(f.items().to_vec(), s).expect("gram matrix of a valid feature matrix")
}

pub fn build_design_matrix(f: &FeatureMatrix) -> DesignMatrix {
    build_design_matrix_with(f, Execution::default())
}

pub fn build_design_matrix_with(f: &FeatureMatrix, exec: Execution) -> DesignMatrix {
    let pairs = PairIndex::new(f.n_items());
    let values = f.values();
    let mut rows = Array2::zeros((pairs.len(), f.n_features()));
    exec.for_each_row(rows.view_mut(), |m, mut row| {
        let (i, j) = pairs.get(m);
        let fi = values.row(i);
        let fj = values.row(j);
        for k in 0..row.len() {
            row[k] = fi[k] * fj[k];
        }
    });
    DesignMatrix { rows, pairs }
}

pub fn extract_targets(s: &SimilarityMatrix, p: &PairIndex) -> Result<TargetVector> {
    if p.n_items() != s.n_items() {
        return Err(Error::DimensionMismatch(format!(
            "pair index built for {} items, similarity matrix has {}",
            p.n_items(),
            s.n_items()
        )));
    }
    let values = s.values();
    Ok(TargetVector(
        p.pairs().iter().map(|&(i, j)| values[[i, j]]).collect(),
    ))
}

/// Inverse of [`extract_targets`] on the off-diagonal; the diagonal is zero.
pub fn mirror_targets(t: &TargetVector, p: &PairIndex) -> Result<Array2<f64>> {
    if t.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} targets for {} pairs",
            t.len(),
            p.len()
        )));
    }
    let n = p.n_items();
    let mut out = Array2::zeros((n, n));
    for (&(i, j), &v) in p.pairs().iter().zip(t.values().iter()) {
        out[[i, j]] = v;
        out[[j, i]] = v;
    }
    Ok(out)
}

/// `s_ij = b + Σ_k w_k f_ik f_jk` for every pair, diagonal included.
pub fn predict_similarity(f: &FeatureMatrix, w: &WeightVector) -> Result<SimilarityMatrix> {
    if w.len() != f.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} features",
            w.len(),
            f.n_features()
        )));
    }
    let n = f.n_items();
    let values = f.values();
    let weights = w.weights();
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        let fi = values.row(i);
        for j in i..n {
            let fj = values.row(j);
            let mut acc = 0.0;
            for k in 0..fi.len() {
                acc += weights[k] * fi[k] * fj[k];
            }
            let v = acc + w.intercept();
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    SimilarityMatrix::new(f.items().to_vec(), s)
}

struct Moments {
    sxx: f64,
    syy: f64,
    sxy: f64,
}

fn moments(x: &[f64], y: &[f64]) -> Result<Moments> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} observations",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedMetric(format!(
            "need at least 2 values, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    // the mean of identical values can be off by an ulp, so pin it exactly
    let mean = |v: &[f64]| {
        if v.iter().all(|a| *a == v[0]) {
            v[0]
        } else {
            v.iter().sum::<f64>() / n
        }
    };
    let mx = mean(x);
    let my = mean(y);
    let mut m = Moments {
        sxx: 0.0,
        syy: 0.0,
        sxy: 0.0,
    };
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        m.sxx += dx * dx;
        m.syy += dy * dy;
        m.sxy += dx * dy;
    }
    Ok(m)
}

/// Squared Pearson correlation between predictions and observations.
pub fn r_squared(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    let m = moments(predicted, observed)?;
    if m.syy == 0.0 {
        return Err(Error::UndefinedMetric("observed values have zero variance".into()));
    }
    if m.sxx == 0.0 {
        return Err(Error::UndefinedMetric("predicted values have zero variance".into()));
    }
    Ok(((m.sxy * m.sxy) / (m.sxx * m.syy)).clamp(0.0, 1.0))
}

/// Coefficient of determination `1 - SSE/SST`. Unlike [`r_squared`] this is
/// not affine invariant and can be negative.
pub fn r2_cod(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    let m = moments(predicted, observed)?;
    if m.syy == 0.0 {
        return Err(Error::UndefinedMetric("observed values have zero variance".into()));
    }
    let sse: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (o - p) * (o - p))
        .sum();
    Ok(1.0 - sse / m.syy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn fm(values: Array2<f64>) -> FeatureMatrix {
        let items = (0..values.nrows()).map(|i| format!("i{i}")).collect();
        FeatureMatrix::new(items, values, "t").unwrap()
    }

    #[test]
    fn gram_examples() {
        assert_eq!(
            gram_similarity(&fm(array![[1.0, 0.0], [0.0, 1.0]])).values(),
            array![[1.0, 0.0], [0.0, 1.0]]
        );
        assert_eq!(
            gram_similarity(&fm(array![[1.0, 2.0], [3.0, 4.0]])).values(),
            array![[5.0, 11.0], [11.0, 25.0]]
        );
    }

    #[test]
    fn design_matrix_examples() {
        let x = build_design_matrix(&fm(array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]));
        assert_eq!(x.rows(), array![[3.0, 8.0], [5.0, 12.0], [15.0, 24.0]]);

        let x = build_design_matrix(&fm(array![[1.0, 2.0], [0.0, 0.0], [5.0, 6.0]]));
        for (m, &(i, j)) in x.pair_index().pairs().iter().enumerate() {
            if i == 1 || j == 1 {
                assert!(x.rows().row(m).iter().all(|v| *v == 0.0));
            }
        }
        assert_eq!(build_design_matrix(&fm(array![[1.0], [2.0]])).n_rows(), 1);
    }

    #[test]
    fn design_matrix_policies_agree() {
        let values = Array2::from_shape_fn((9, 5), |(i, k)| ((i * 7 + k * 3) % 11) as f64 - 5.0);
        let f = fm(values);
        assert_eq!(
            build_design_matrix_with(&f, Execution::Sequential),
            build_design_matrix_with(&f, Execution::Parallel)
        );
    }

    #[test]
    fn targets_read_upper_triangle() {
        let items: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let s = SimilarityMatrix::new(
            items.clone(),
            array![[9.0, 1.0, 2.0], [1.0, 9.0, 3.0], [2.0, 3.0, 9.0]],
        )
        .unwrap();
        let p = PairIndex::new(3);
        let t = extract_targets(&s, &p).unwrap();
        assert_eq!(t.as_slice(), &[1.0, 2.0, 3.0]);
        let back = mirror_targets(&t, &p).unwrap();
        assert_eq!(back, array![[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [2.0, 3.0, 0.0]]);

        let zero = SimilarityMatrix::new(items, Array2::zeros((3, 3))).unwrap();
        assert_eq!(extract_targets(&zero, &p).unwrap().as_slice(), &[0.0; 3]);
        assert!(extract_targets(&zero, &PairIndex::new(4)).is_err());
    }

    #[test]
    fn prediction_examples() {
        let f = fm(array![[1.0, 2.0], [3.0, 4.0]]);
        let w = WeightVector::new(array![2.0, -1.0], 0.0).unwrap();
        assert_eq!(predict_similarity(&f, &w).unwrap().get(0, 1), -2.0);

        let c = WeightVector::new(array![0.0, 0.0], 3.5).unwrap();
        assert!(predict_similarity(&f, &c).unwrap().values().iter().all(|v| *v == 3.5));

        let ones = WeightVector::ones(2);
        assert_eq!(predict_similarity(&f, &ones).unwrap(), gram_similarity(&f));

        let short = WeightVector::ones(3);
        assert!(matches!(predict_similarity(&f, &short), Err(Error::DimensionMismatch(_))));
    }

    /// Straightforward textbook Pearson, kept separate from `moments`.
    fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx: f64 = x.iter().sum::<f64>() / n;
        let my: f64 = y.iter().sum::<f64>() / n;
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx.sqrt() * vy.sqrt())
    }

    #[test]
    fn r_squared_examples() {
        let obs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(r_squared(&obs, &obs).unwrap(), 1.0);
        let neg: Vec<f64> = obs.iter().map(|v| -3.0 * v + 2.0).collect();
        assert!((r_squared(&neg, &obs).unwrap() - 1.0).abs() < 1e-15);

        let observed = [1.0, 2.0, 3.0, 100.0];
        let r = pearson_oracle(&obs, &observed);
        // frozen from the oracle (cross-checked with numpy.corrcoef)
        assert!((r * r - 0.616_266_481_609_993).abs() < 1e-12, "{}", r * r);
        assert!((r_squared(&obs, &observed).unwrap() - r * r).abs() < 1e-15);

        assert!(matches!(r_squared(&obs, &[2.0; 4]), Err(Error::UndefinedMetric(_))));
        assert!(matches!(r_squared(&[2.0; 4], &obs), Err(Error::UndefinedMetric(_))));
        assert!(r_squared(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn cod_differs_from_squared_correlation_under_scaling() {
        let obs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(r2_cod(&obs, &obs).unwrap(), 1.0);
        let doubled: Vec<f64> = obs.iter().map(|v| 2.0 * v).collect();
        assert!(r2_cod(&doubled, &obs).unwrap() < 0.0);
        assert_eq!(r_squared(&doubled, &obs).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn r_squared_affine_invariant(
            xs in proptest::collection::vec(-10.0..10.0f64, 5..40),
            noise in proptest::collection::vec(-1.0..1.0f64, 40),
            a in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64],
            b in -10.0..10.0f64,
        ) {
            let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| x + e).collect();
            let base = r_squared(&xs, &ys);
            prop_assume!(base.is_ok());
            let base = base.unwrap();
            let moved: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            prop_assert!((r_squared(&moved, &ys).unwrap() - base).abs() < 1e-12);
            let moved_y: Vec<f64> = ys.iter().map(|y| a * y + b).collect();
            prop_assert!((r_squared(&xs, &moved_y).unwrap() - base).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&base));
        }

        #[test]
        fn design_times_weights_matches_prediction(
            n in 2usize..8,
            d in 1usize..6,
            vals in proptest::collection::vec(-3.0..3.0f64, 48),
            ws in proptest::collection::vec(-2.0..2.0f64, 6),
            b in -1.0..1.0f64,
        ) {
            let values = Array2::from_shape_fn((n, d), |(i, k)| vals[i * d + k]);
            let f = fm(values);
            let w = WeightVector::new(Array1::from(ws[..d].to_vec()), b).unwrap();
            let s = predict_similarity(&f, &w).unwrap();
            let x = build_design_matrix(&f);
            let t = extract_targets(&s, x.pair_index()).unwrap();
            let lin = x.rows().dot(&w.weights()) + b;
            for (p, q) in lin.iter().zip(t.values().iter()) {
                prop_assert!((p - q).abs() <= 1e-12 * (1.0 + q.abs()));
            }

            // all-ones weights reproduce the Gram targets exactly
            let g = gram_similarity(&f);
            let gt = extract_targets(&g, x.pair_index()).unwrap();
            for (row, target) in x.rows().rows().into_iter().zip(gt.values().iter()) {
                prop_assert_eq!(row.iter().sum::<f64>(), *target);
            }
        }
    }
}
