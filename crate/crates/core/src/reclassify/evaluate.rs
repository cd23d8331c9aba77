use ndarray::Axis;
use rand::seq::SliceRandom;

use super::logreg::{fit_rows, LabeledDataset, LogRegParams};
use super::reweight_features;
use crate::datamodel::WeightVector;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng;

/// Stratified fold label per item: each class's members are shuffled and
/// dealt round-robin, continuing from where the previous class stopped.
pub fn stratified_kfold(data: &LabeledDataset, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.n_classes()];
    for (i, &c) in data.labels().iter().enumerate() {
        by_class[c].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class: data.class_names()[c].clone(),
                count: members.len(),
                folds: k,
            });
        }
    }
    let mut r = rng::stream(seed, rng::streams::STRATIFIED_FOLDS);
    let mut fold = vec![0; data.labels().len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut r);
        for &i in members.iter() {
            fold[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(fold)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassificationOptions {
    pub folds: usize,
    pub seed: u64,
    pub logreg: LogRegParams,
    pub execution: Execution,
}

impl Default for ClassificationOptions {
    fn default() -> Self {
        ClassificationOptions {
            folds: crate::ridge::DEFAULT_FOLDS,
            seed: 0,
            logreg: LogRegParams::default(),
            execution: Execution::default(),
        }
    }
}

/// Held-out scores of one feature variant.
#[derive(Clone, Debug, PartialEq)]
pub struct VariantScores {
    pub label: String,
    pub per_fold_accuracy: Vec<f64>,
    /// Mean per-class recall within each fold.
    pub per_fold_macro_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    pub mean_macro_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub folds: usize,
    pub seed: u64,
    pub l2: f64,
    pub class_names: Vec<String>,
    pub fold_sizes: Vec<usize>,
    pub original: VariantScores,
    pub reweighted: VariantScores,
}

/// Stratified k-fold accuracy of one dataset.
pub fn cross_validate(data: &LabeledDataset, options: &ClassificationOptions) -> Result<VariantScores> {
    let fold = stratified_kfold(data, options.folds, options.seed)?;
    score_variant(data, &fold, options)
}

/// Scores the original features and their `sqrt(w)`-rescaled version on the
/// same stratified folds.
pub fn evaluate_classification(
    data: &LabeledDataset,
    weights: &WeightVector,
    options: &ClassificationOptions,
) -> Result<ClassificationReport> {
    let fold = stratified_kfold(data, options.folds, options.seed)?;
    let reweighted = data.with_features(reweight_features(data.features(), weights)?)?;
    let mut fold_sizes = vec![0; options.folds];
    for &f in &fold {
        fold_sizes[f] += 1;
    }
    Ok(ClassificationReport {
        folds: options.folds,
        seed: options.seed,
        l2: options.logreg.l2,
        class_names: data.class_names().to_vec(),
        fold_sizes,
        original: score_variant(data, &fold, options)?,
        reweighted: score_variant(&reweighted, &fold, options)?,
    })
}

fn score_variant(data: &LabeledDataset, fold: &[usize], options: &ClassificationOptions) -> Result<VariantScores> {
    let x = data.features().values();
    let labels = data.labels();
    let classes = data.n_classes();
    let results = options.execution.map_range(options.folds, |k| -> Result<(f64, f64)> {
        let train: Vec<usize> = (0..fold.len()).filter(|&i| fold[i] != k).collect();
        let test: Vec<usize> = (0..fold.len()).filter(|&i| fold[i] == k).collect();
        let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let model = fit_rows(x.select(Axis(0), &train).view(), &train_labels, classes, &options.logreg)?;
        let predicted = model.predict(x.select(Axis(0), &test).view());
        let mut hits = vec![0usize; classes];
        let mut totals = vec![0usize; classes];
        for (&i, &p) in test.iter().zip(&predicted) {
            totals[labels[i]] += 1;
            if p == labels[i] {
                hits[labels[i]] += 1;
            }
        }
        let accuracy = hits.iter().sum::<usize>() as f64 / test.len() as f64;
        let present: Vec<f64> = (0..classes)
            .filter(|&c| totals[c] > 0)
            .map(|c| hits[c] as f64 / totals[c] as f64)
            .collect();
        let macro_accuracy = present.iter().sum::<f64>() / present.len() as f64;
        Ok((accuracy, macro_accuracy))
    });
    let mut per_fold_accuracy = Vec::with_capacity(options.folds);
    let mut per_fold_macro_accuracy = Vec::with_capacity(options.folds);
    for r in results {
        let (a, m) = r?;
        per_fold_accuracy.push(a);
        per_fold_macro_accuracy.push(m);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(VariantScores {
        label: data.features().label().to_owned(),
        mean_accuracy: mean(&per_fold_accuracy),
        mean_macro_accuracy: mean(&per_fold_macro_accuracy),
        per_fold_accuracy,
        per_fold_macro_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::FeatureMatrix;
    use crate::synthetic::class_blobs;
    use ndarray::Array2;

    fn blobs(classes: usize, per_class: usize) -> LabeledDataset {
        let (f, labels) = class_blobs(classes, per_class, classes, 6.0, 3).unwrap();
        LabeledDataset::new(f, labels, (0..classes).map(|c| format!("k{c}")).collect()).unwrap()
    }

    #[test]
    fn folds_are_stratified_and_deterministic() {
        let data = blobs(3, 13);
        let a = stratified_kfold(&data, 4, 9).unwrap();
        assert_eq!(a, stratified_kfold(&data, 4, 9).unwrap());
        assert_ne!(a, stratified_kfold(&data, 4, 10).unwrap());
        for c in 0..3 {
            let mut counts = [0; 4];
            for (i, &f) in a.iter().enumerate() {
                if data.labels()[i] == c {
                    counts[f] += 1;
                }
            }
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn small_class_is_named() {
        let f = FeatureMatrix::new((0..5).map(|i| i.to_string()).collect(), Array2::zeros((5, 1)), "t").unwrap();
        let data = LabeledDataset::new(f, vec![0, 0, 0, 0, 1], vec!["big".into(), "tiny".into()]).unwrap();
        match stratified_kfold(&data, 2, 0) {
            Err(Error::ClassTooSmall { class, count: 1, folds: 2 }) => assert_eq!(class, "tiny"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identity_weights_give_identical_scores() {
        let data = blobs(3, 12);
        let options = ClassificationOptions {
            folds: 3,
            ..Default::default()
        };
        let r = evaluate_classification(&data, &WeightVector::ones(3), &options).unwrap();
        assert_eq!(r.original.per_fold_accuracy, r.reweighted.per_fold_accuracy);
        assert_eq!(r.fold_sizes.iter().sum::<usize>(), 36);
        assert!(r.original.mean_accuracy > 0.9);
    }
}
