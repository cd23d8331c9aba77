use ndarray::{Array1, Array2};
use rand::Rng as _;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use repalign::reclassify::{
    cross_validate, elastic_net_gradient, evaluate_classification, fit_nonneg_elastic_net, ClassificationOptions,
    ElasticNetParams, LabeledDataset,
};
use repalign::synthetic::class_blobs;
use repalign::WeightVector;

fn random(m: usize, d: usize, r: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((m, d), |_| r.sample::<f64, _>(StandardNormal))
}

#[test]
fn kkt_conditions_hold_on_random_instances() {
    let mut r = ChaCha8Rng::seed_from_u64(17);
    for case in 0..20 {
        let x = random(60, 10, &mut r);
        let y = Array1::from_shape_fn(60, |_| r.sample::<f64, _>(StandardNormal));
        let params = ElasticNetParams {
            alpha: r.random_range(0.001..0.1),
            l1_ratio: r.random_range(0.0..1.0),
            ..Default::default()
        };
        let fit = fit_nonneg_elastic_net(x.view(), y.view(), &params).unwrap();
        let g = elastic_net_gradient(x.view(), y.view(), &fit.weights, &params);
        for (gk, wk) in g.iter().zip(fit.weights.weights()) {
            assert!(*wk >= 0.0);
            if *wk > 0.0 {
                assert!(gk.abs() < 1e-5, "case {case}: {gk}");
            } else {
                assert!(*gk > -1e-5, "case {case}: {gk}");
            }
        }
    }
}

#[test]
fn sparse_nonnegative_support_is_recovered() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let x = random(400, 12, &mut r);
    let mut truth = Array1::zeros(12);
    truth[1] = 2.0;
    truth[5] = 1.0;
    truth[9] = 3.0;
    let noise = Array1::from_shape_fn(400, |_| 0.05 * r.sample::<f64, _>(StandardNormal));
    let y = x.dot(&truth) + noise + 0.7;
    let params = ElasticNetParams {
        alpha: 0.01,
        l1_ratio: 0.9,
        ..Default::default()
    };
    let fit = fit_nonneg_elastic_net(x.view(), y.view(), &params).unwrap();
    for k in 0..12 {
        let w = fit.weights.weights()[k];
        if truth[k] > 0.0 {
            assert!((w - truth[k]).abs() < 0.1 * truth[k], "w[{k}] = {w}");
        } else {
            assert_eq!(w, 0.0, "w[{k}]");
        }
    }
}

fn dataset(classes: usize, per_class: usize, d: usize, seed: u64) -> LabeledDataset {
    let (f, labels) = class_blobs(classes, per_class, d, 6.0, seed).unwrap();
    LabeledDataset::new(f, labels, (0..classes).map(|c| format!("class{c}")).collect()).unwrap()
}

#[test]
fn separable_classes_score_high() {
    let scores = cross_validate(&dataset(3, 40, 3, 1), &ClassificationOptions::default()).unwrap();
    assert!(scores.mean_accuracy >= 0.95, "{}", scores.mean_accuracy);
    assert!(scores.mean_macro_accuracy >= 0.95);
}

#[test]
fn zeroing_the_signal_features_drops_to_chance() {
    // the first 3 coordinates carry the class signal, the other 3 are noise
    let data = dataset(3, 40, 6, 2);
    let w = WeightVector::new(ndarray::array![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 0.0).unwrap();
    let report = evaluate_classification(&data, &w, &ClassificationOptions::default()).unwrap();
    assert!(report.original.mean_accuracy >= 0.95);
    assert!((report.reweighted.mean_accuracy - 1.0 / 3.0).abs() <= 0.1, "{}", report.reweighted.mean_accuracy);
}
