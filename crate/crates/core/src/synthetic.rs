//! Seeded synthetic instances with known ground truth, used by the test
//! suites, the benchmarks and for trying the command-line tools without real
//! data.

use ndarray::{Array1, Array2};
use rand::Rng as _;
use rand_distr::{Normal, StandardNormal, Uniform};

use crate::datamodel::{FeatureMatrix, PairIndex, SimilarityMatrix, WeightVector};
use crate::error::Result;
use crate::rng;
use crate::simcore::{extract_targets, predict_similarity};

pub fn item_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("item{i:03}")).collect()
}

/// `n x d` matrix of independent standard normals.
pub fn normal_features(n: usize, d: usize, seed: u64) -> Result<FeatureMatrix> {
    let mut r = rng::seeded(seed);
    let values = Array2::from_shape_fn((n, d), |_| r.sample::<f64, _>(StandardNormal));
    FeatureMatrix::new(item_ids(n), values, format!("normal-{n}x{d}"))
}

/// Features, the weights that generated the similarities, and the noisy
/// similarities themselves.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub features: FeatureMatrix,
    pub weights: WeightVector,
    pub similarity: SimilarityMatrix,
}

/// Standard-normal features, weights uniform on `[0.1, 1)`, and
/// `S = F W Fᵀ + ε` where `ε` is symmetric Gaussian noise on the off-diagonal
/// with standard deviation `noise_fraction` times the standard deviation of
/// the noiseless upper-triangle similarities.
pub fn planted_instance(n: usize, d: usize, noise_fraction: f64, seed: u64) -> Result<PlantedInstance> {
    let features = normal_features(n, d, seed)?;
    let mut r = rng::stream(seed, 100);
    let uniform = Uniform::new(0.1, 1.0).expect("valid range");
    let weights = WeightVector::new(Array1::from_shape_fn(d, |_| r.sample(uniform)), 0.0)?;
    let clean = predict_similarity(&features, &weights)?;
    let pairs = PairIndex::new(n);
    let targets = extract_targets(&clean, &pairs)?;
    let t = targets.values();
    let mean = t.sum() / t.len() as f64;
    let sd = (t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t.len() as f64).sqrt();
    let mut values = clean.values().to_owned();
    if noise_fraction > 0.0 {
        let noise = Normal::new(0.0, noise_fraction * sd).expect("valid sd");
        for &(i, j) in pairs.pairs() {
            let e = r.sample(noise);
            values[[i, j]] += e;
            values[[j, i]] += e;
        }
    }
    let similarity = SimilarityMatrix::new(features.items().to_vec(), values)?;
    Ok(PlantedInstance {
        features,
        weights,
        similarity,
    })
}

/// Symmetric matrix of independent standard normals, zero diagonal.
pub fn noise_similarity(items: Vec<String>, seed: u64) -> Result<SimilarityMatrix> {
    let n = items.len();
    let mut r = rng::seeded(seed);
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = r.sample(StandardNormal);
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    SimilarityMatrix::new(items, values)
}

/// Gaussian class blobs: class `c` is centered at `separation * e_c` in the
/// first `classes` coordinates (requires `d >= classes`), with unit noise on
/// all `d` coordinates. Labels are in item order, `per_class` items per
/// class.
pub fn class_blobs(
    classes: usize,
    per_class: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<usize>)> {
    assert!(d >= classes, "need one signal coordinate per class");
    let n = classes * per_class;
    let mut r = rng::seeded(seed);
    let labels: Vec<usize> = (0..n).map(|i| i / per_class).collect();
    let values = Array2::from_shape_fn((n, d), |(i, k)| {
        let center = if k == labels[i] { separation } else { 0.0 };
        center + r.sample::<f64, _>(StandardNormal)
    });
    Ok((FeatureMatrix::new(item_ids(n), values, "blobs")?, labels))
}
