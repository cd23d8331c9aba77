use std::collections::{BTreeSet, HashMap, VecDeque};

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::datamodel::{FeatureMatrix, LabelRow};
use crate::error::{Error, Result};

/// Features with one class label per item.
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    features: FeatureMatrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(features: FeatureMatrix, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != features.n_items() {
            return Err(Error::LengthMismatch {
                left: features.n_items(),
                right: labels.len(),
            });
        }
        let c = class_names.len();
        if c < 2 {
            return Err(Error::invalid("classification needs at least 2 classes"));
        }
        let mut seen = vec![false; c];
        for &l in &labels {
            if l >= c {
                return Err(Error::invalid(format!("label {l} outside 0..{c}")));
            }
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("class `{}` has no members", class_names[missing])));
        }
        Ok(LabeledDataset {
            features,
            labels,
            class_names,
        })
    }

    /// Matches label rows to the feature items by identifier. Classes are
    /// numbered in sorted name order.
    pub fn from_label_rows(features: FeatureMatrix, rows: &[LabelRow]) -> Result<Self> {
        let mut by_id: HashMap<&str, &str> = HashMap::with_capacity(rows.len());
        for r in rows {
            if by_id.insert(&r.id, &r.class_name).is_some() {
                return Err(Error::invalid(format!("label file lists `{}` twice", r.id)));
            }
        }
        if rows.len() != features.n_items() {
            return Err(Error::LengthMismatch {
                left: features.n_items(),
                right: rows.len(),
            });
        }
        let class_names: Vec<String> = rows
            .iter()
            .map(|r| r.class_name.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut labels = Vec::with_capacity(rows.len());
        for id in features.items() {
            let class = by_id
                .get(id.as_str())
                .ok_or_else(|| Error::SetMismatch(format!("item `{id}` has no label")))?;
            labels.push(class_names.binary_search_by(|c| c.as_str().cmp(class)).expect("class listed"));
        }
        LabeledDataset::new(features, labels, class_names)
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn with_features(&self, features: FeatureMatrix) -> Result<Self> {
        LabeledDataset::new(features, self.labels.clone(), self.class_names.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRegParams {
    /// Penalty `(l2/2)‖W‖²` on the class weights, biases excluded.
    pub l2: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1e-2,
            max_iterations: 10_000,
            gradient_tolerance: 1e-6,
        }
    }
}

/// Softmax classifier: row `c` of `coefficients` holds the `d` weights of
/// class `c` followed by its bias.
#[derive(Clone, Debug)]
pub struct ClassifierModel {
    pub coefficients: Array2<f64>,
    pub regularization: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
}

impl ClassifierModel {
    pub fn n_classes(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let d = self.coefficients.ncols() - 1;
        let mut logits = x.dot(&self.coefficients.slice(s![.., ..d]).t());
        logits += &self.coefficients.column(d);
        softmax_rows(&mut logits);
        logits
    }

    /// Most probable class per row; ties go to the lower class index.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        self.predict_proba(x)
            .rows()
            .into_iter()
            .map(|p| {
                let mut best = 0;
                for (c, v) in p.iter().enumerate() {
                    if *v > p[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}

fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, v| a.max(*v));
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row /= total;
    }
}

pub fn fit_multinomial_logreg(data: &LabeledDataset, params: &LogRegParams) -> Result<ClassifierModel> {
    fit_rows(data.features().values(), data.labels(), data.n_classes(), params)
}

/// Multinomial logistic regression on raw rows: minimizes mean cross-entropy
/// plus `(l2/2)‖W‖²` with L-BFGS until the gradient norm drops below the
/// tolerance.
pub(crate) fn fit_rows(
    x: ArrayView2<'_, f64>,
    labels: &[usize],
    classes: usize,
    params: &LogRegParams,
) -> Result<ClassifierModel> {
    if !(params.l2 >= 0.0 && params.l2.is_finite()) {
        return Err(Error::invalid(format!("l2 must be finite and >= 0, got {}", params.l2)));
    }
    let problem = Problem {
        x,
        labels,
        classes,
        l2: params.l2,
    };
    let (theta, iterations, gradient_norm) = lbfgs(&problem, params)?;
    let coefficients = theta
        .into_shape_with_order((classes, x.ncols() + 1))
        .expect("parameter count matches");
    Ok(ClassifierModel {
        coefficients,
        regularization: params.l2,
        iterations,
        gradient_norm,
    })
}

struct Problem<'a> {
    x: ArrayView2<'a, f64>,
    labels: &'a [usize],
    classes: usize,
    l2: f64,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.classes * (self.x.ncols() + 1)
    }

    fn value_and_gradient(&self, theta: &Array1<f64>) -> (f64, Array1<f64>) {
        let (n, d) = self.x.dim();
        let coef = theta.view().into_shape_with_order((self.classes, d + 1)).expect("shape");
        let weights = coef.slice(s![.., ..d]);
        let mut logits = self.x.dot(&weights.t());
        logits += &coef.column(d);
        let mut loss = 0.0;
        for (row, &y) in logits.rows().into_iter().zip(self.labels) {
            let max = row.fold(f64::NEG_INFINITY, |a, v| a.max(*v));
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            loss += lse - row[y];
        }
        loss /= n as f64;
        loss += 0.5 * self.l2 * weights.iter().map(|v| v * v).sum::<f64>();

        softmax_rows(&mut logits);
        for (mut row, &y) in logits.rows_mut().into_iter().zip(self.labels) {
            row[y] -= 1.0;
        }
        let residual = logits / n as f64;
        let mut grad = Array2::zeros((self.classes, d + 1));
        grad.slice_mut(s![.., ..d]).assign(&(residual.t().dot(&self.x) + &(&weights * self.l2)));
        grad.column_mut(d).assign(&residual.sum_axis(Axis(0)));
        (loss, grad.into_shape_with_order(self.dim()).expect("shape"))
    }
}

const HISTORY: usize = 10;

fn lbfgs(problem: &Problem<'_>, params: &LogRegParams) -> Result<(Array1<f64>, usize, f64)> {
    let mut theta = Array1::zeros(problem.dim());
    let (mut f, mut g) = problem.value_and_gradient(&theta);
    let mut memory: VecDeque<(Array1<f64>, Array1<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut iterations = 0;
    loop {
        let gnorm = g.dot(&g).sqrt();
        if gnorm < params.gradient_tolerance {
            return Ok((theta, iterations, gnorm));
        }
        if iterations == params.max_iterations {
            return Err(Error::NonConvergence { iterations, gap: gnorm });
        }
        iterations += 1;

        let mut direction = two_loop(&g, &memory);
        let mut slope = g.dot(&direction);
        if slope >= 0.0 {
            memory.clear();
            direction = -&g;
            slope = -gnorm * gnorm;
        }
        let mut step = if memory.is_empty() { 1.0 / gnorm.max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = &theta + &(&direction * step);
            let (fc, gc) = problem.value_and_gradient(&candidate);
            if fc <= f + 1e-4 * step * slope {
                accepted = Some((candidate, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((next, fn_, gn)) = accepted else {
            if memory.is_empty() {
                return Err(Error::NonConvergence { iterations, gap: gnorm });
            }
            memory.clear();
            continue;
        };
        let sk = &next - &theta;
        let yk = &gn - &g;
        let sy = sk.dot(&yk);
        if sy > 1e-12 * sk.dot(&sk).sqrt() * yk.dot(&yk).sqrt() {
            if memory.len() == HISTORY {
                memory.pop_front();
            }
            memory.push_back((sk, yk, 1.0 / sy));
        }
        theta = next;
        f = fn_;
        g = gn;
    }
}

fn two_loop(g: &Array1<f64>, memory: &VecDeque<(Array1<f64>, Array1<f64>, f64)>) -> Array1<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * s.dot(&q);
        q.scaled_add(-a, y);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        q *= s.dot(y) / y.dot(y);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.dot(&q);
        q.scaled_add(a - b, s);
    }
    -q
}
