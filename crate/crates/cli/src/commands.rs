use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use repalign::datamodel::{load_feature_matrix, load_labels, load_similarity_matrix, load_weights};
use repalign::reclassify::{
    cv_nonneg_elastic_net, evaluate_classification, fit_nonneg_elastic_net, ClassificationOptions, ElasticNetParams,
    LabeledDataset, LogRegParams, VariantScores,
};
use repalign::repr::{compare_representations, CompareOptions, Comparison};
use repalign::ridge::{kfold_split, FitReport, PipelineOutput};
use repalign::simcore::{build_design_matrix_with, extract_targets, gram_similarity, r2_cod, r_squared};
use repalign::{fit_pipeline, Execution, FeatureMatrix, PipelineConfig, SimilarityMatrix};
use serde::Serialize;

use crate::artifacts::Artifacts;
use crate::config::RunConfig;

pub fn run(command: &str, config: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    match command {
        "eval-raw" => eval_raw(config),
        "fit" => fit(config),
        "baseline" => baseline(config),
        "depth-sweep" => depth_sweep(config),
        "reclassify" => reclassify(config),
        other => bail!("unknown command `{other}`"),
    }
}

fn features(path: &Path) -> anyhow::Result<FeatureMatrix> {
    load_feature_matrix(path).with_context(|| format!("loading feature file `{}`", path.display()))
}

fn similarity(config: &RunConfig) -> anyhow::Result<SimilarityMatrix> {
    let path = config.inputs.similarity.as_ref().expect("validated");
    load_similarity_matrix(path).with_context(|| format!("loading similarity file `{}`", path.display()))
}

fn pipeline_config(config: &RunConfig) -> PipelineConfig {
    PipelineConfig {
        folds: config.folds,
        seed: config.seed,
        lambda_grid: config.grid.clone(),
        fit_intercept: config.fit.fit_intercept,
        normalize_rows: config.fit.normalize_rows,
        standardize: config.fit.standardize,
        execution: Execution::default(),
    }
}

fn compare_options(config: &RunConfig) -> anyhow::Result<CompareOptions> {
    Ok(CompareOptions {
        dissimilarity: config.dissimilarity()?,
        mds_dims: config.mds_dims,
        linkage: config.linkage()?,
    })
}

/// TOML has no null, so undefined scores are written as nan.
fn or_nan(v: &[Option<f64>]) -> Vec<f64> {
    v.iter().map(|x| x.unwrap_or(f64::NAN)).collect()
}

#[derive(Serialize)]
struct ComparisonSection {
    first: String,
    second: String,
    r_squared: f64,
    r2_cod: f64,
    procrustes_disparity: f64,
    first_eigenvalues: Vec<f64>,
    second_eigenvalues: Vec<f64>,
    warnings: Vec<String>,
}

fn write_comparison(
    out: &mut Artifacts<'_>,
    names: [&str; 2],
    c: &Comparison,
) -> anyhow::Result<ComparisonSection> {
    let mut warnings = Vec::new();
    for (name, (e, t)) in names.iter().zip(c.embeddings.iter().zip(&c.dendrograms)) {
        out.embedding(name, e)?;
        out.dendrogram(name, t)?;
        warnings.extend(e.warnings.iter().map(|w| format!("{name} embedding: {w}")));
    }
    Ok(ComparisonSection {
        first: names[0].into(),
        second: names[1].into(),
        r_squared: c.r_squared,
        r2_cod: c.r2_cod,
        procrustes_disparity: c.procrustes_disparity,
        first_eigenvalues: c.embeddings[0].eigenvalues.to_vec(),
        second_eigenvalues: c.embeddings[1].eigenvalues.to_vec(),
        warnings,
    })
}

#[derive(Serialize)]
struct EvalRawReport {
    features: String,
    n_items: usize,
    n_features: usize,
    comparison: ComparisonSection,
}

fn eval_raw(config: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let f = features(&config.inputs.features[0])?;
    let s = similarity(config)?;
    repalign::validate_alignment(&f, &s)?;
    let model = gram_similarity(&f);
    let c = compare_representations(&s, &model, &compare_options(config)?)?;
    let mut out = Artifacts::new("eval-raw", config);
    let comparison = write_comparison(&mut out, ["observed", "model"], &c)?;
    println!("eval-raw: R² = {:.6} between observed and raw feature similarities", c.r_squared);
    out.report(&EvalRawReport {
        features: f.label().into(),
        n_items: f.n_items(),
        n_features: f.n_features(),
        comparison,
    })?;
    Ok(out.into_written())
}

#[derive(Serialize)]
struct CvSection {
    lambda_grid: Vec<f64>,
    cv_mean_r2: Vec<f64>,
    chosen_lambda: f64,
    mean_cv_r2: f64,
    mean_cv_r2_cod: f64,
    per_fold_r2: Vec<f64>,
    per_fold_r2_cod: Vec<f64>,
    degenerate_folds: Vec<usize>,
    full_data_r2: f64,
    full_data_r2_cod: f64,
    intercept: f64,
    warnings: Vec<String>,
}

impl From<&FitReport> for CvSection {
    fn from(r: &FitReport) -> Self {
        CvSection {
            lambda_grid: r.lambda_grid.clone(),
            cv_mean_r2: or_nan(&r.cv_mean_r2),
            chosen_lambda: r.chosen_lambda,
            mean_cv_r2: r.mean_cv_r2,
            mean_cv_r2_cod: r.mean_cv_r2_cod,
            per_fold_r2: or_nan(&r.per_fold_r2),
            per_fold_r2_cod: or_nan(&r.per_fold_r2_cod),
            degenerate_folds: r.degenerate_folds.clone(),
            full_data_r2: r.full_data_r2,
            full_data_r2_cod: r.full_data_r2_cod,
            intercept: r.weights.intercept(),
            warnings: r.warnings.clone(),
        }
    }
}

#[derive(Serialize)]
struct ElasticNetSection {
    alpha: f64,
    l1_ratio: f64,
    sweeps: usize,
    kkt_violation: f64,
    nonzero_weights: usize,
    intercept: f64,
    full_data_r2: f64,
    full_data_r2_cod: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    alpha_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    alpha_cv_mean_r2: Vec<f64>,
}

#[derive(Serialize)]
struct FitCommandReport {
    features: String,
    n_items: usize,
    n_features: usize,
    n_pairs: usize,
    cv: CvSection,
    comparison: ComparisonSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    elastic_net: Option<ElasticNetSection>,
}

fn fit(config: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let f = features(&config.inputs.features[0])?;
    let s = similarity(config)?;
    let output = fit_pipeline(&f, &s, &pipeline_config(config))?;
    let mut out = Artifacts::new("fit", config);
    out.weights("weights", output.features.feature_names(), &output.report.weights)?;
    out.similarity("predicted", &output.predicted)?;
    let c = compare_representations(&s, &output.predicted, &compare_options(config)?)?;
    let comparison = write_comparison(&mut out, ["observed", "predicted"], &c)?;
    let elastic_net = if config.elastic_net.enabled {
        Some(nonneg_fit(config, &s, &output, &mut out)?)
    } else {
        None
    };
    println!(
        "fit: mean CV R² = {:.6} at lambda = {}",
        output.report.mean_cv_r2, output.report.chosen_lambda
    );
    out.report(&FitCommandReport {
        features: f.label().into(),
        n_items: f.n_items(),
        n_features: f.n_features(),
        n_pairs: f.n_items() * (f.n_items() - 1) / 2,
        cv: (&output.report).into(),
        comparison,
        elastic_net,
    })?;
    Ok(out.into_written())
}

fn nonneg_fit(
    config: &RunConfig,
    s: &SimilarityMatrix,
    output: &PipelineOutput,
    out: &mut Artifacts<'_>,
) -> anyhow::Result<ElasticNetSection> {
    let e = &config.elastic_net;
    let x = build_design_matrix_with(&output.features, Execution::default());
    let y = extract_targets(s, x.pair_index())?;
    let params = ElasticNetParams {
        alpha: e.alpha,
        l1_ratio: e.l1_ratio,
        max_sweeps: e.max_sweeps,
    };
    let (fit, alpha, alpha_cv) = if e.alphas.is_empty() {
        (fit_nonneg_elastic_net(x.rows(), y.values(), &params)?, e.alpha, Vec::new())
    } else {
        let folds = kfold_split(x.n_rows(), config.folds, config.seed)?;
        let cv = cv_nonneg_elastic_net(x.rows(), y.values(), &e.alphas, &params, &folds)?;
        (cv.fit, cv.chosen_alpha, or_nan(&cv.mean_r2))
    };
    let w = &fit.weights;
    out.weights("weights-nonneg", output.features.feature_names(), w)?;
    let fitted = x.rows().dot(&w.weights()) + w.intercept();
    let fitted = fitted.as_slice().expect("contiguous");
    // constant predictions (all weights zero) carry no signal
    let full_data_r2 = r_squared(fitted, y.as_slice()).unwrap_or(0.0);
    let full_data_r2_cod = r2_cod(fitted, y.as_slice())?;
    Ok(ElasticNetSection {
        alpha,
        l1_ratio: e.l1_ratio,
        sweeps: fit.sweeps,
        kkt_violation: fit.kkt_violation,
        nonzero_weights: w.weights().iter().filter(|v| **v > 0.0).count(),
        intercept: w.intercept(),
        full_data_r2,
        full_data_r2_cod,
        alpha_grid: if alpha_cv.is_empty() { Vec::new() } else { e.alphas.clone() },
        alpha_cv_mean_r2: alpha_cv,
    })
}

#[derive(Serialize)]
struct BaselineEntry {
    kind: String,
    seeds: Vec<u64>,
    per_seed_mean_cv_r2: Vec<f64>,
    per_seed_chosen_lambda: Vec<f64>,
    mean_cv_r2: f64,
}

#[derive(Serialize)]
struct BaselineReport {
    features: String,
    unshuffled_mean_cv_r2: f64,
    unshuffled_chosen_lambda: f64,
    baselines: Vec<BaselineEntry>,
}

fn baseline(config: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let f = features(&config.inputs.features[0])?;
    let s = similarity(config)?;
    let pc = pipeline_config(config);
    let reference = fit_pipeline(&f, &s, &pc)?.report;
    let mut baselines = Vec::new();
    for kind in config.baseline_kinds()? {
        let mut scores = Vec::new();
        let mut lambdas = Vec::new();
        for &seed in &config.baseline.seeds {
            let shuffled = kind.apply(&f, seed)?;
            let r = fit_pipeline(&shuffled, &s, &pc).with_context(|| format!("baseline {kind}, seed {seed}"))?;
            scores.push(r.report.mean_cv_r2);
            lambdas.push(r.report.chosen_lambda);
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        println!("baseline {kind}: mean CV R² = {mean:.6} over {} seeds", scores.len());
        baselines.push(BaselineEntry {
            kind: kind.name().into(),
            seeds: config.baseline.seeds.clone(),
            per_seed_mean_cv_r2: scores,
            per_seed_chosen_lambda: lambdas,
            mean_cv_r2: mean,
        });
    }
    let mut out = Artifacts::new("baseline", config);
    out.report(&BaselineReport {
        features: f.label().into(),
        unshuffled_mean_cv_r2: reference.mean_cv_r2,
        unshuffled_chosen_lambda: reference.chosen_lambda,
        baselines,
    })?;
    Ok(out.into_written())
}

#[derive(Serialize)]
struct SweepEntry {
    label: String,
    path: String,
    n_features: usize,
    mean_cv_r2: f64,
    chosen_lambda: f64,
    full_data_r2: f64,
}

#[derive(Serialize)]
struct SweepReport {
    entries: Vec<SweepEntry>,
}

fn depth_sweep(config: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let s = similarity(config)?;
    let pc = pipeline_config(config);
    let mut entries = Vec::new();
    for path in &config.inputs.features {
        let f = features(path)?;
        let r = fit_pipeline(&f, &s, &pc).with_context(|| format!("depth-sweep entry `{}`", f.label()))?;
        println!("{}: mean CV R² = {:.6}", f.label(), r.report.mean_cv_r2);
        entries.push(SweepEntry {
            label: f.label().into(),
            path: path.display().to_string(),
            n_features: f.n_features(),
            mean_cv_r2: r.report.mean_cv_r2,
            chosen_lambda: r.report.chosen_lambda,
            full_data_r2: r.report.full_data_r2,
        });
    }
    let mut out = Artifacts::new("depth-sweep", config);
    let rows = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                i.to_string(),
                e.label.clone(),
                e.n_features.to_string(),
                repalign::datamodel::format_value(e.mean_cv_r2),
                repalign::datamodel::format_value(e.chosen_lambda),
                repalign::datamodel::format_value(e.full_data_r2),
            ]
        })
        .collect();
    out.table(
        "table",
        &["order", "label", "n_features", "mean_cv_r2", "chosen_lambda", "full_data_r2"],
        rows,
    )?;
    out.report(&SweepReport { entries })?;
    Ok(out.into_written())
}

#[derive(Serialize)]
struct VariantSection {
    features: String,
    mean_accuracy: f64,
    mean_macro_accuracy: f64,
    per_fold_accuracy: Vec<f64>,
    per_fold_macro_accuracy: Vec<f64>,
}

impl From<&VariantScores> for VariantSection {
    fn from(v: &VariantScores) -> Self {
        VariantSection {
            features: v.label.clone(),
            mean_accuracy: v.mean_accuracy,
            mean_macro_accuracy: v.mean_macro_accuracy,
            per_fold_accuracy: v.per_fold_accuracy.clone(),
            per_fold_macro_accuracy: v.per_fold_macro_accuracy.clone(),
        }
    }
}

#[derive(Serialize)]
struct ReclassifyReport {
    metric: &'static str,
    note: &'static str,
    folds: usize,
    l2: f64,
    class_names: Vec<String>,
    fold_sizes: Vec<usize>,
    original: VariantSection,
    reweighted: VariantSection,
}

fn reclassify(config: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let f = features(&config.inputs.features[0])?;
    let labels_path = config.inputs.labels.as_ref().expect("validated");
    let rows = load_labels(labels_path).with_context(|| format!("loading label file `{}`", labels_path.display()))?;
    let weights_path = config.inputs.weights.as_ref().expect("validated");
    let (names, w) =
        load_weights(weights_path).with_context(|| format!("loading weight file `{}`", weights_path.display()))?;
    ensure!(
        names == f.feature_names(),
        "weight file `{}` does not list the feature columns of `{}` in order",
        weights_path.display(),
        f.label()
    );
    let negative = w.negative_indices();
    ensure!(
        negative.is_empty(),
        "weight file `{}` has negative weights at feature indices {negative:?}; reweighting needs the nonnegative fit (fit --nonneg)",
        weights_path.display()
    );
    let data = LabeledDataset::from_label_rows(f, &rows)?;
    let options = ClassificationOptions {
        folds: config.folds,
        seed: config.seed,
        logreg: LogRegParams {
            l2: config.classifier.l2,
            max_iterations: config.classifier.max_iterations,
            ..Default::default()
        },
        execution: Execution::default(),
    };
    let r = evaluate_classification(&data, &w, &options)?;
    println!(
        "reclassify: accuracy {:.4} original, {:.4} reweighted",
        r.original.mean_accuracy, r.reweighted.mean_accuracy
    );
    let mut out = Artifacts::new("reclassify", config);
    out.report(&ReclassifyReport {
        metric: "accuracy",
        note: "held-out classification accuracy under stratified k-fold; sometimes reported elsewhere under the name R²",
        folds: r.folds,
        l2: r.l2,
        class_names: r.class_names.clone(),
        fold_sizes: r.fold_sizes.clone(),
        original: (&r.original).into(),
        reweighted: (&r.reweighted).into(),
    })?;
    Ok(out.into_written())
}
