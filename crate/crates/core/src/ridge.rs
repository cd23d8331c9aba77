//! Ridge regression of pair similarities on feature products, with
//! cross-validated selection of the penalty.
//!
//! The objective is `‖y − Xw − b·1‖² + λ‖w‖²` with an unpenalized intercept
//! `b`. Two algebraically identical routes are available: the `d x d` primal
//! system `(XcᵀXc + λI) w = Xcᵀyc` and the `M x M` dual system
//! `(XcXcᵀ + λI) α = yc`, `w = Xcᵀα`, where `Xc`, `yc` are column-centered
//! when an intercept is fitted. Both are solved by Cholesky factorization.
//!
//! Cross-validation never materializes the training rows of a fold on the
//! primal route: per-fold Gram statistics are computed once, and the training
//! statistics of fold `f` are the totals minus fold `f`.

use faer::Mat;
use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;

use crate::datamodel::{validate_alignment, FeatureMatrix, SimilarityMatrix, WeightVector};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{gram_cols, gram_rows, spd_solve_shifted};
use crate::rng;
use crate::simcore::{
    build_design_matrix_with, extract_targets, predict_similarity, r2_cod, r_squared,
    DesignMatrix, TargetVector,
};

pub const DEFAULT_FOLDS: usize = 6;

/// 13 logarithmically spaced values, 1e-3 through 1e9.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..13).map(|e| 10f64.powi(e - 3)).collect()
}

/// Assignment of each pair to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_of_pair: Vec<usize>,
    k: usize,
    seed: u64,
}

impl FoldAssignment {
    pub fn fold_of_pair(&self) -> &[usize] {
        &self.fold_of_pair
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.fold_of_pair.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of_pair.is_empty()
    }

    /// Row indices held out in `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&m| self.fold_of_pair[m] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&m| self.fold_of_pair[m] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of_pair {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles `0..m` with the seeded fold stream and cuts the permutation into
/// `k` contiguous blocks; the first `m % k` blocks get one extra element.
pub fn kfold_split(m: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > m {
        return Err(Error::invalid(format!(
            "fold count must satisfy 2 <= k <= {m}, got {k}"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng::stream(seed, rng::streams::FOLDS));
    let base = m / k;
    let extra = m % k;
    let mut fold_of_pair = vec![0; m];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[pos..pos + size] {
            fold_of_pair[row] = fold;
        }
        pos += size;
    }
    Ok(FoldAssignment {
        fold_of_pair,
        k,
        seed,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RidgeSolver {
    /// Primal when `d <= rows`, dual otherwise.
    #[default]
    Auto,
    Primal,
    Dual,
}

impl RidgeSolver {
    fn resolve(self, rows: usize, d: usize) -> RidgeSolver {
        match self {
            RidgeSolver::Auto if d <= rows => RidgeSolver::Primal,
            RidgeSolver::Auto => RidgeSolver::Dual,
            other => other,
        }
    }
}

pub fn fit_ridge(
    x: &DesignMatrix,
    y: &TargetVector,
    lambda: f64,
    fit_intercept: bool,
) -> Result<WeightVector> {
    fit_ridge_rows(x.rows(), y.values(), lambda, fit_intercept, RidgeSolver::Auto)
}

/// Ridge fit on raw rows with an explicit choice of route.
pub fn fit_ridge_rows(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    lambda: f64,
    fit_intercept: bool,
    solver: RidgeSolver,
) -> Result<WeightVector> {
    let (rows, d) = x.dim();
    if rows != y.len() {
        return Err(Error::DimensionMismatch(format!("{rows} rows for {} targets", y.len())));
    }
    if rows == 0 || d == 0 {
        return Err(Error::invalid("empty regression problem"));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let all: Vec<usize> = (0..rows).collect();
    let shift = Shift::new(x, y, &all, fit_intercept);
    match solver.resolve(rows, d) {
        RidgeSolver::Dual => DualSystem::build(x, y, &all, &shift).solve(lambda),
        _ => {
            let stats = GramStats::compute(x, y, &all, &shift);
            PrimalSystem::from_stats(&stats, &shift).solve(lambda)
        }
    }
}

/// Column and target offsets subtracted before forming any product. With an
/// intercept these are the means of the fitted rows, which keeps the
/// centering downdate in [`PrimalSystem::from_stats`] well conditioned; the
/// intercept absorbs them afterwards. Without an intercept they are zero.
struct Shift {
    x: Vec<f64>,
    y: f64,
    fit_intercept: bool,
}

impl Shift {
    fn new(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, rows: &[usize], fit_intercept: bool) -> Self {
        let d = x.ncols();
        if !fit_intercept {
            return Shift {
                x: vec![0.0; d],
                y: 0.0,
                fit_intercept,
            };
        }
        let n = rows.len() as f64;
        let mut mx = vec![0.0; d];
        let mut my = 0.0;
        for &r in rows {
            for (acc, v) in mx.iter_mut().zip(x.row(r)) {
                *acc += v;
            }
            my += y[r];
        }
        mx.iter_mut().for_each(|v| *v /= n);
        Shift {
            x: mx,
            y: my / n,
            fit_intercept,
        }
    }

    fn shifted_rows(&self, x: ArrayView2<'_, f64>, rows: &[usize]) -> Mat<f64> {
        Mat::from_fn(rows.len(), x.ncols(), |r, k| x[[rows[r], k]] - self.x[k])
    }

    /// Maps a fit in shifted coordinates back to the original ones.
    fn unshift(&self, w: Vec<f64>, shifted_intercept: f64) -> Result<WeightVector> {
        let intercept = if self.fit_intercept {
            shifted_intercept + self.y - w.iter().zip(&self.x).map(|(a, b)| a * b).sum::<f64>()
        } else {
            0.0
        };
        WeightVector::new(Array1::from(w), intercept)
    }
}

/// Sufficient statistics of a set of shifted rows.
#[derive(Clone)]
struct GramStats {
    gram: Mat<f64>,
    col_sum: Vec<f64>,
    xty: Vec<f64>,
    y_sum: f64,
    n: usize,
}

impl GramStats {
    fn compute(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, rows: &[usize], shift: &Shift) -> Self {
        let d = x.ncols();
        let xs = shift.shifted_rows(x, rows);
        let gram = gram_cols(xs.as_ref());
        let mut col_sum = vec![0.0; d];
        let mut xty = vec![0.0; d];
        let mut y_sum = 0.0;
        for (r, &row) in rows.iter().enumerate() {
            let yr = y[row] - shift.y;
            y_sum += yr;
            for k in 0..d {
                let v = xs[(r, k)];
                col_sum[k] += v;
                xty[k] += v * yr;
            }
        }
        GramStats {
            gram,
            col_sum,
            xty,
            y_sum,
            n: rows.len(),
        }
    }

    fn zeros(d: usize) -> Self {
        GramStats {
            gram: Mat::zeros(d, d),
            col_sum: vec![0.0; d],
            xty: vec![0.0; d],
            y_sum: 0.0,
            n: 0,
        }
    }

    fn add(&mut self, other: &GramStats) {
        self.gram += &other.gram;
        self.col_sum.iter_mut().zip(&other.col_sum).for_each(|(a, b)| *a += b);
        self.xty.iter_mut().zip(&other.xty).for_each(|(a, b)| *a += b);
        self.y_sum += other.y_sum;
        self.n += other.n;
    }

    fn minus(&self, other: &GramStats) -> GramStats {
        let mut out = self.clone();
        out.gram -= &other.gram;
        out.col_sum.iter_mut().zip(&other.col_sum).for_each(|(a, b)| *a -= b);
        out.xty.iter_mut().zip(&other.xty).for_each(|(a, b)| *a -= b);
        out.y_sum -= other.y_sum;
        out.n -= other.n;
        out
    }
}

/// Centered normal equations, ready to be shifted by λ.
struct PrimalSystem<'s> {
    a: Mat<f64>,
    b: Vec<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
    shift: &'s Shift,
}

impl<'s> PrimalSystem<'s> {
    fn from_stats(stats: &GramStats, shift: &'s Shift) -> Self {
        let d = stats.col_sum.len();
        let mut a = stats.gram.clone();
        let mut b = stats.xty.clone();
        let (x_mean, y_mean) = if shift.fit_intercept && stats.n > 0 {
            let n = stats.n as f64;
            let xm: Vec<f64> = stats.col_sum.iter().map(|s| s / n).collect();
            let ym = stats.y_sum / n;
            for j in 0..d {
                for i in 0..d {
                    a[(i, j)] -= n * xm[i] * xm[j];
                }
                b[j] -= n * xm[j] * ym;
            }
            (xm, ym)
        } else {
            (vec![0.0; d], 0.0)
        };
        PrimalSystem {
            a,
            b,
            x_mean,
            y_mean,
            shift,
        }
    }

    fn solve(&self, lambda: f64) -> Result<WeightVector> {
        let w = spd_solve_shifted(self.a.clone(), lambda, &self.b)?;
        let b0 = self.y_mean - w.iter().zip(&self.x_mean).map(|(a, b)| a * b).sum::<f64>();
        self.shift.unshift(w, b0)
    }
}

struct DualSystem<'s> {
    xc: Mat<f64>,
    k: Mat<f64>,
    yc: Vec<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
    shift: &'s Shift,
}

impl<'s> DualSystem<'s> {
    fn build(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, rows: &[usize], shift: &'s Shift) -> Self {
        let d = x.ncols();
        let mut xc = shift.shifted_rows(x, rows);
        let mut yc: Vec<f64> = rows.iter().map(|&r| y[r] - shift.y).collect();
        let n = rows.len() as f64;
        let mut x_mean = vec![0.0; d];
        let mut y_mean = 0.0;
        if shift.fit_intercept {
            for k in 0..d {
                x_mean[k] = (0..rows.len()).map(|r| xc[(r, k)]).sum::<f64>() / n;
                for r in 0..rows.len() {
                    xc[(r, k)] -= x_mean[k];
                }
            }
            y_mean = yc.iter().sum::<f64>() / n;
            yc.iter_mut().for_each(|v| *v -= y_mean);
        }
        let k = gram_rows(xc.as_ref());
        DualSystem {
            xc,
            k,
            yc,
            x_mean,
            y_mean,
            shift,
        }
    }

    fn solve(&self, lambda: f64) -> Result<WeightVector> {
        let alpha = spd_solve_shifted(self.k.clone(), lambda, &self.yc)?;
        let d = self.xc.ncols();
        let w: Vec<f64> = (0..d)
            .map(|k| (0..alpha.len()).map(|r| self.xc[(r, k)] * alpha[r]).sum())
            .collect();
        let b0 = self.y_mean - w.iter().zip(&self.x_mean).map(|(a, b)| a * b).sum::<f64>();
        self.shift.unshift(w, b0)
    }
}

enum FoldSystem<'s> {
    Primal(PrimalSystem<'s>),
    Dual(DualSystem<'s>),
}

impl FoldSystem<'_> {
    fn solve(&self, lambda: f64) -> Result<WeightVector> {
        match self {
            FoldSystem::Primal(p) => p.solve(lambda),
            FoldSystem::Dual(d) => d.solve(lambda),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CvOptions {
    pub fit_intercept: bool,
    pub solver: RidgeSolver,
    pub execution: Execution,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            fit_intercept: true,
            solver: RidgeSolver::Auto,
            execution: Execution::default(),
        }
    }
}

/// Outcome of the penalty search and the full-data refit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub lambda_grid: Vec<f64>,
    /// Mean held-out R² per grid value; `None` where some fold's system was
    /// numerically singular.
    pub cv_mean_r2: Vec<Option<f64>>,
    pub chosen_lambda: f64,
    /// Held-out squared correlation per fold at the chosen λ; `None` for
    /// degenerate folds.
    pub per_fold_r2: Vec<Option<f64>>,
    pub per_fold_r2_cod: Vec<Option<f64>>,
    pub mean_cv_r2: f64,
    pub mean_cv_r2_cod: f64,
    pub full_data_r2: f64,
    pub full_data_r2_cod: f64,
    pub degenerate_folds: Vec<usize>,
    pub warnings: Vec<String>,
    pub folds: usize,
    pub seed: u64,
    pub fit_intercept: bool,
    pub weights: WeightVector,
}

struct FoldScore {
    r2: f64,
    cod: f64,
    constant: bool,
}

/// Grid search over λ on held-out R², then a full-data refit at the winner.
///
/// Ties in mean R² go to the larger λ. Folds whose held-out targets have
/// zero variance are excluded from every mean. A fit whose held-out
/// predictions are constant scores 0.
pub fn grid_search_cv(
    x: &DesignMatrix,
    y: &TargetVector,
    grid: &[f64],
    folds: &FoldAssignment,
) -> Result<FitReport> {
    grid_search_cv_with(x.rows(), y.values(), grid, folds, &CvOptions::default())
}

pub fn grid_search_cv_with(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    grid: &[f64],
    folds: &FoldAssignment,
    opts: &CvOptions,
) -> Result<FitReport> {
    let (m, d) = x.dim();
    if m != y.len() || m != folds.len() {
        return Err(Error::DimensionMismatch(format!(
            "{m} rows, {} targets, {} fold entries",
            y.len(),
            folds.len()
        )));
    }
    if grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::invalid(format!("grid values must be positive and finite, got {bad}")));
    }
    let exec = opts.execution;
    let k = folds.k();
    let mut warnings = Vec::new();

    let all: Vec<usize> = (0..m).collect();
    let shift = Shift::new(x, y, &all, opts.fit_intercept);
    let test_rows: Vec<Vec<usize>> = (0..k).map(|f| folds.test_indices(f)).collect();

    let degenerate: Vec<bool> = test_rows
        .iter()
        .map(|rows| {
            rows.len() < 2 || {
                let first = y[rows[0]];
                rows.iter().all(|&r| y[r] == first)
            }
        })
        .collect();
    let degenerate_folds: Vec<usize> = (0..k).filter(|&f| degenerate[f]).collect();
    for &f in &degenerate_folds {
        warnings.push(format!("fold {f}: held-out targets have zero variance; excluded"));
    }
    if degenerate_folds.len() == k {
        return Err(Error::UndefinedMetric("every fold is degenerate".into()));
    }

    let primal_folds: Vec<bool> = test_rows
        .iter()
        .map(|rows| opts.solver.resolve(m - rows.len(), d) == RidgeSolver::Primal)
        .collect();

    // Gram statistics of each held-out block; only needed on the primal route.
    let any_primal = primal_folds.iter().any(|p| *p);
    let fold_stats: Vec<Option<GramStats>> = if any_primal {
        exec.map(&test_rows, |rows| Some(GramStats::compute(x, y, rows, &shift)))
    } else {
        (0..k).map(|_| None).collect()
    };
    let total = if any_primal {
        let mut total = GramStats::zeros(d);
        for s in fold_stats.iter().flatten() {
            total.add(s);
        }
        Some(total)
    } else {
        None
    };

    let systems: Vec<FoldSystem<'_>> = exec.map_range(k, |f| {
        if primal_folds[f] {
            let stats = total
                .as_ref()
                .expect("totals exist on the primal route")
                .minus(fold_stats[f].as_ref().expect("fold stats exist on the primal route"));
            FoldSystem::Primal(PrimalSystem::from_stats(&stats, &shift))
        } else {
            FoldSystem::Dual(DualSystem::build(x, y, &folds.train_indices(f), &shift))
        }
    });
    drop(fold_stats);

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|l| (0..k).map(move |f| (l, f)))
        .filter(|&(_, f)| !degenerate[f])
        .collect();
    let outcomes: Vec<Result<FoldScore>> = exec.map(&jobs, |&(l, f)| {
        let w = systems[f].solve(grid[l])?;
        score(x, y, &test_rows[f], &w)
    });

    // assemble per-lambda results in grid order
    let mut table: Vec<Vec<Option<FoldScore>>> = (0..grid.len()).map(|_| (0..k).map(|_| None).collect()).collect();
    let mut failed = vec![false; grid.len()];
    let mut constant_predictions = Vec::new();
    for (&(l, f), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(s) => {
                if s.constant {
                    constant_predictions.push((l, f));
                }
                table[l][f] = Some(s);
            }
            Err(Error::NumericalRank { .. }) => failed[l] = true,
            Err(e) => return Err(e),
        }
    }
    for (l, &bad) in failed.iter().enumerate() {
        if bad {
            warnings.push(format!("lambda {:e}: singular system in at least one fold; skipped", grid[l]));
        }
    }

    let cv_mean_r2: Vec<Option<f64>> = (0..grid.len())
        .map(|l| {
            if failed[l] {
                return None;
            }
            let scores: Vec<f64> = table[l].iter().flatten().map(|s| s.r2).collect();
            Some(scores.iter().sum::<f64>() / scores.len() as f64)
        })
        .collect();

    let mut best: Option<usize> = None;
    for (l, score) in cv_mean_r2.iter().enumerate() {
        let Some(score) = score else { continue };
        best = match best {
            None => Some(l),
            Some(b) => {
                let current = cv_mean_r2[b].expect("best has a score");
                if *score > current || (*score == current && grid[l] > grid[b]) {
                    Some(l)
                } else {
                    Some(b)
                }
            }
        };
    }
    let best = best.ok_or(Error::NumericalRank {
        lambda: grid.iter().cloned().fold(f64::NAN, f64::max),
    })?;
    for &(l, f) in &constant_predictions {
        if l == best {
            warnings.push(format!("fold {f}: constant held-out predictions at the chosen lambda; scored 0"));
        }
    }

    let chosen_lambda = grid[best];
    let per_fold_r2: Vec<Option<f64>> = table[best].iter().map(|s| s.as_ref().map(|s| s.r2)).collect();
    let per_fold_r2_cod: Vec<Option<f64>> = table[best]
        .iter()
        .map(|s| s.as_ref().map(|s| s.cod))
        .collect();
    let cods: Vec<f64> = per_fold_r2_cod.iter().flatten().cloned().collect();
    let mean_cv_r2_cod = cods.iter().sum::<f64>() / cods.len() as f64;

    let weights = match opts.solver.resolve(m, d) {
        RidgeSolver::Dual => DualSystem::build(x, y, &all, &shift).solve(chosen_lambda)?,
        _ => {
            let stats = match total {
                Some(t) => t,
                None => GramStats::compute(x, y, &all, &shift),
            };
            PrimalSystem::from_stats(&stats, &shift).solve(chosen_lambda)?
        }
    };
    let fitted = predict_rows(x, &all, &weights);
    let observed: Vec<f64> = y.to_vec();
    let (full_data_r2, full_data_r2_cod) = match r_squared(&fitted, &observed) {
        Ok(r) => (r, r2_cod(&fitted, &observed)?),
        Err(Error::UndefinedMetric(msg)) if msg.starts_with("predicted") => {
            warnings.push("full-data predictions are constant".into());
            (0.0, r2_cod(&fitted, &observed)?)
        }
        Err(e) => return Err(e),
    };

    let mean_cv_r2 = cv_mean_r2[best].expect("chosen lambda has a score");
    Ok(FitReport {
        lambda_grid: grid.to_vec(),
        cv_mean_r2,
        chosen_lambda,
        mean_cv_r2,
        per_fold_r2,
        per_fold_r2_cod,
        mean_cv_r2_cod,
        full_data_r2,
        full_data_r2_cod,
        degenerate_folds,
        warnings,
        folds: k,
        seed: folds.seed(),
        fit_intercept: opts.fit_intercept,
        weights,
    })
}

fn predict_rows(x: ArrayView2<'_, f64>, rows: &[usize], w: &WeightVector) -> Vec<f64> {
    let weights = w.weights();
    rows.iter()
        .map(|&r| {
            let row = x.row(r);
            let mut acc = 0.0;
            for k in 0..row.len() {
                acc += row[k] * weights[k];
            }
            acc + w.intercept()
        })
        .collect()
}

fn score(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, rows: &[usize], w: &WeightVector) -> Result<FoldScore> {
    let predicted = predict_rows(x, rows, w);
    let observed: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    let cod = r2_cod(&predicted, &observed)?;
    match r_squared(&predicted, &observed) {
        Ok(r2) => Ok(FoldScore { r2, cod, constant: false }),
        // constant predictions carry no information about the ordering
        Err(Error::UndefinedMetric(_)) => Ok(FoldScore { r2: 0.0, cod, constant: true }),
        Err(e) => Err(e),
    }
}

/// Settings for [`fit_pipeline`].
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub folds: usize,
    pub seed: u64,
    pub lambda_grid: Vec<f64>,
    pub fit_intercept: bool,
    /// Scale feature rows to unit norm first (cosine instead of raw inner
    /// products).
    pub normalize_rows: bool,
    /// Divide each design column by its standard deviation before fitting;
    /// weights are mapped back to the raw scale afterwards.
    pub standardize: bool,
    pub execution: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            folds: DEFAULT_FOLDS,
            seed: 0,
            lambda_grid: default_lambda_grid(),
            fit_intercept: true,
            normalize_rows: false,
            standardize: false,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub report: FitReport,
    /// Full-data model predictions, diagonal included.
    pub predicted: SimilarityMatrix,
    /// The features the weights apply to (row-normalized when requested).
    pub features: FeatureMatrix,
}

/// Design matrix, targets, folds, grid search and prediction in one call.
pub fn fit_pipeline(f: &FeatureMatrix, s: &SimilarityMatrix, config: &PipelineConfig) -> Result<PipelineOutput> {
    validate_alignment(f, s)?;
    let features = if config.normalize_rows {
        f.unit_normalized()
    } else {
        f.clone()
    };
    let x = build_design_matrix_with(&features, config.execution);
    let y = extract_targets(s, x.pair_index())?;
    let folds = kfold_split(x.n_rows(), config.folds, config.seed)?;
    let opts = CvOptions {
        fit_intercept: config.fit_intercept,
        solver: RidgeSolver::Auto,
        execution: config.execution,
    };
    let mut report = if config.standardize {
        let mut rows = x.into_rows();
        let scales = column_scales(rows.view());
        for mut row in rows.rows_mut() {
            row.iter_mut().zip(&scales).for_each(|(v, s)| *v /= s);
        }
        let mut report = grid_search_cv_with(rows.view(), y.values(), &config.lambda_grid, &folds, &opts)?;
        let raw: Array1<f64> = report
            .weights
            .weights()
            .iter()
            .zip(&scales)
            .map(|(w, s)| w / s)
            .collect();
        report.weights = WeightVector::new(raw, report.weights.intercept())?;
        report
    } else {
        grid_search_cv_with(x.rows(), y.values(), &config.lambda_grid, &folds, &opts)?
    };
    report.seed = config.seed;
    let predicted = predict_similarity(&features, &report.weights)?;
    Ok(PipelineOutput {
        report,
        predicted,
        features,
    })
}

/// Population standard deviation per column; constant columns get 1.
fn column_scales(x: ArrayView2<'_, f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    x.columns()
        .into_iter()
        .map(|c| {
            let mean = c.sum() / n;
            let var = c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}
