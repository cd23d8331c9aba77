//! Reweighted classification: nonnegative elastic-net weights, `sqrt(w)`
//! feature rescaling and cross-validated softmax classifiers.

mod elastic;
mod evaluate;
mod logreg;

pub use elastic::{
    cv_nonneg_elastic_net, elastic_net_gradient, fit_nonneg_elastic_net, ElasticNetCv, ElasticNetFit,
    ElasticNetParams,
};
pub use evaluate::{
    cross_validate, evaluate_classification, stratified_kfold, ClassificationOptions, ClassificationReport,
    VariantScores,
};
pub use logreg::{fit_multinomial_logreg, ClassifierModel, LabeledDataset, LogRegParams};

use crate::datamodel::{FeatureMatrix, WeightVector};
use crate::error::{Error, Result};

/// `g_ik = f_ik · sqrt(w_k)`, so that the Gram matrix of the result equals
/// the weighted similarity of the input.
pub fn reweight_features(f: &FeatureMatrix, w: &WeightVector) -> Result<FeatureMatrix> {
    if w.len() != f.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} features",
            w.len(),
            f.n_features()
        )));
    }
    let negative = w.negative_indices();
    if !negative.is_empty() {
        return Err(Error::NegativeWeights { indices: negative });
    }
    let roots = w.weights().mapv(f64::sqrt);
    let values = &f.values() * &roots;
    Ok(f.with_values(values)?.relabeled(format!("{}+reweighted", f.label())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::{gram_similarity, predict_similarity};
    use crate::synthetic::normal_features;
    use ndarray::{array, Array1};

    #[test]
    fn reweighting_examples() {
        let f = normal_features(6, 3, 1).unwrap();
        let same = reweight_features(&f, &WeightVector::ones(3)).unwrap();
        assert_eq!(same.values(), f.values());
        assert!(same.label().ends_with("+reweighted"));
        let zero = reweight_features(&f, &WeightVector::new(Array1::zeros(3), 0.0).unwrap()).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
        match reweight_features(&f, &WeightVector::new(array![1.0, -0.5, -2.0], 0.0).unwrap()) {
            Err(Error::NegativeWeights { indices }) => assert_eq!(indices, vec![1, 2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gram_of_reweighted_features_is_weighted_similarity() {
        let f = normal_features(10, 4, 2).unwrap();
        let w = WeightVector::new(array![0.0, 0.3, 2.0, 1.1], 0.0).unwrap();
        let a = gram_similarity(&reweight_features(&f, &w).unwrap());
        let b = predict_similarity(&f, &w).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
    }
}
