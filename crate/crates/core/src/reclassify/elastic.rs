use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::datamodel::WeightVector;
use crate::error::{Error, Result};
use crate::ridge::FoldAssignment;
use crate::simcore::r_squared;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticNetParams {
    pub alpha: f64,
    /// 1 is the lasso, 0 is ridge.
    pub l1_ratio: f64,
    pub max_sweeps: usize,
}

impl Default for ElasticNetParams {
    fn default() -> Self {
        ElasticNetParams {
            alpha: 1e-3,
            l1_ratio: 0.5,
            max_sweeps: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ElasticNetFit {
    pub weights: WeightVector,
    pub sweeps: usize,
    /// Largest violation of the optimality conditions at the returned point.
    pub kkt_violation: f64,
    /// Objective value after each sweep.
    pub objective: Vec<f64>,
}

/// Minimizes `(1/2M)‖y − Xw − b‖² + α(ρ‖w‖₁ + ½(1−ρ)‖w‖²)` over `w >= 0` by
/// cyclic coordinate descent; `b` is unpenalized.
///
/// Stops when no coordinate moves more than `1e-7·(1 + ‖w‖∞)` in a sweep.
pub fn fit_nonneg_elastic_net(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    params: &ElasticNetParams,
) -> Result<ElasticNetFit> {
    let (m, d) = x.dim();
    if m != y.len() {
        return Err(Error::DimensionMismatch(format!("{m} rows for {} targets", y.len())));
    }
    if m == 0 || d == 0 {
        return Err(Error::invalid("empty regression problem"));
    }
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be > 0, got {}", params.alpha)));
    }
    if !(0.0..=1.0).contains(&params.l1_ratio) {
        return Err(Error::invalid(format!("l1_ratio must be in [0, 1], got {}", params.l1_ratio)));
    }
    let mf = m as f64;
    let l1 = params.alpha * params.l1_ratio;
    let l2 = params.alpha * (1.0 - params.l1_ratio);

    // centered columns stored contiguously
    let x_mean: Vec<f64> = x.columns().into_iter().map(|c| c.sum() / mf).collect();
    let y_mean = y.sum() / mf;
    let mut cols = Array2::zeros((d, m));
    for (k, mut row) in cols.rows_mut().into_iter().enumerate() {
        for (dst, src) in row.iter_mut().zip(x.column(k)) {
            *dst = src - x_mean[k];
        }
    }
    let scale: Vec<f64> = cols.rows().into_iter().map(|c| c.dot(&c) / mf).collect();
    let mut residual: Array1<f64> = y.mapv(|v| v - y_mean);
    let mut w = vec![0.0; d];

    let objective = |w: &[f64], r: &Array1<f64>| -> f64 {
        let l1n: f64 = w.iter().sum();
        let l2n: f64 = w.iter().map(|v| v * v).sum();
        r.dot(r) / (2.0 * mf) + l1 * l1n + 0.5 * l2 * l2n
    };
    let mut history = Vec::new();
    let mut sweeps = 0;
    loop {
        if sweeps == params.max_sweeps {
            let gap = kkt_violation(&cols, &residual, &w, l1, l2);
            return Err(Error::NonConvergence { iterations: sweeps, gap });
        }
        sweeps += 1;
        let mut max_step = 0.0f64;
        for k in 0..d {
            let denom = scale[k] + l2;
            let col = cols.row(k);
            let old = w[k];
            let rho = col.dot(&residual) / mf + scale[k] * old;
            let new = if denom > 0.0 { (rho - l1).max(0.0) / denom } else { 0.0 };
            if new != old {
                residual.scaled_add(old - new, &col);
                w[k] = new;
                max_step = max_step.max((new - old).abs());
            }
        }
        history.push(objective(&w, &residual));
        let w_max = w.iter().fold(0.0f64, |a, v| a.max(*v));
        if max_step < 1e-7 * (1.0 + w_max) {
            break;
        }
    }
    let intercept = y_mean - w.iter().zip(&x_mean).map(|(a, b)| a * b).sum::<f64>();
    Ok(ElasticNetFit {
        kkt_violation: kkt_violation(&cols, &residual, &w, l1, l2),
        weights: WeightVector::new(Array1::from(w), intercept)?,
        sweeps,
        objective: history,
    })
}

fn kkt_violation(cols: &Array2<f64>, residual: &Array1<f64>, w: &[f64], l1: f64, l2: f64) -> f64 {
    let mf = residual.len() as f64;
    cols.rows()
        .into_iter()
        .zip(w)
        .map(|(c, &wk)| {
            let g = -c.dot(residual) / mf + l1 + l2 * wk;
            if wk > 0.0 {
                g.abs()
            } else {
                (-g).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Gradient of the elastic-net objective with respect to each weight, with
/// the intercept at its optimum. Used to check optimality from outside.
pub fn elastic_net_gradient(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    w: &WeightVector,
    params: &ElasticNetParams,
) -> Array1<f64> {
    let mf = x.nrows() as f64;
    let residual = &y - &(x.dot(&w.weights()) + w.intercept());
    let l1 = params.alpha * params.l1_ratio;
    let l2 = params.alpha * (1.0 - params.l1_ratio);
    Array1::from_shape_fn(x.ncols(), |k| -x.column(k).dot(&residual) / mf + l1 + l2 * w.weights()[k])
}

/// Outcome of choosing `alpha` by cross-validation.
#[derive(Clone, Debug)]
pub struct ElasticNetCv {
    pub alphas: Vec<f64>,
    /// Mean held-out R² per alpha; `None` when every fold was degenerate.
    pub mean_r2: Vec<Option<f64>>,
    pub chosen_alpha: f64,
    pub fit: ElasticNetFit,
}

/// Picks `alpha` from `alphas` by mean held-out R² over `folds` (ties go to
/// the larger alpha), then refits on all rows.
pub fn cv_nonneg_elastic_net(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    alphas: &[f64],
    params: &ElasticNetParams,
    folds: &FoldAssignment,
) -> Result<ElasticNetCv> {
    if alphas.is_empty() {
        return Err(Error::invalid("empty alpha grid"));
    }
    if folds.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} fold labels for {} rows",
            folds.len(),
            x.nrows()
        )));
    }
    let mut mean_r2 = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let p = ElasticNetParams { alpha, ..*params };
        let mut scores = Vec::new();
        for fold in 0..folds.k() {
            let train = folds.train_indices(fold);
            let test = folds.test_indices(fold);
            let fit = fit_nonneg_elastic_net(x.select(ndarray::Axis(0), &train).view(), y.select(ndarray::Axis(0), &train).view(), &p)?;
            let xt = x.select(ndarray::Axis(0), &test);
            let pred = xt.dot(&fit.weights.weights()) + fit.weights.intercept();
            let obs = y.select(ndarray::Axis(0), &test);
            if let Ok(r2) = r_squared(pred.as_slice().expect("owned"), obs.as_slice().expect("owned")) {
                scores.push(r2);
            }
        }
        mean_r2.push((!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in mean_r2.iter().enumerate() {
        if let Some(s) = *s {
            let better = match best {
                None => true,
                Some((b, bs)) => s > bs || (s == bs && alphas[i] > alphas[b]),
            };
            if better {
                best = Some((i, s));
            }
        }
    }
    let chosen_alpha = match best {
        Some((i, _)) => alphas[i],
        None => return Err(Error::UndefinedMetric("no alpha produced a defined held-out R²".into())),
    };
    let fit = fit_nonneg_elastic_net(x, y, &ElasticNetParams { alpha: chosen_alpha, ..*params })?;
    Ok(ElasticNetCv {
        alphas: alphas.to_vec(),
        mean_r2,
        chosen_alpha,
        fit,
    })
}
