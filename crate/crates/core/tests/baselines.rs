use repalign::baselines::BaselineKind;
use repalign::simcore::{build_design_matrix, gram_similarity, predict_similarity};
use repalign::synthetic::planted_instance;
use repalign::{fit_pipeline, PipelineConfig, WeightVector};

#[test]
fn shuffled_features_explain_nothing() {
    let inst = planted_instance(30, 10, 0.01, 3).unwrap();
    let config = PipelineConfig::default();
    assert!(fit_pipeline(&inst.features, &inst.similarity, &config).unwrap().report.mean_cv_r2 >= 0.95);
    for kind in BaselineKind::ALL {
        let mean = (0..3u64)
            .map(|seed| {
                let shuffled = kind.apply(&inst.features, seed).unwrap();
                fit_pipeline(&shuffled, &inst.similarity, &config).unwrap().report.mean_cv_r2
            })
            .sum::<f64>()
            / 3.0;
        assert!(mean < 0.05, "{kind}: {mean}");
    }
}

#[test]
fn all_ones_weights_reproduce_the_gram_matrix_bitwise() {
    let inst = planted_instance(20, 7, 0.0, 1).unwrap();
    let a = gram_similarity(&inst.features);
    let b = predict_similarity(&inst.features, &WeightVector::ones(7)).unwrap();
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(build_design_matrix(&inst.features).n_rows(), 190);
}
