//! Randomized feature controls.
//!
//! Each control destroys the correspondence between items and their features
//! while keeping the feature values themselves, so any fit they still achieve
//! is a measure of spurious structure from the number of predictors alone.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::SliceRandom;

use crate::datamodel::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaselineKind {
    /// Rows reassigned to other items.
    ShuffleRows,
    /// Values permuted within each row independently.
    PermuteColumns,
    /// Row shuffle followed by per-row permutation.
    Combined,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [
        BaselineKind::ShuffleRows,
        BaselineKind::PermuteColumns,
        BaselineKind::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::ShuffleRows => "rows",
            BaselineKind::PermuteColumns => "columns",
            BaselineKind::Combined => "combined",
        }
    }

    pub fn apply(self, f: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix> {
        match self {
            BaselineKind::ShuffleRows => shuffle_rows(f, seed),
            BaselineKind::PermuteColumns => permute_columns_per_row(f, seed),
            BaselineKind::Combined => combined_shuffle(f, seed),
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" | "1" => Ok(BaselineKind::ShuffleRows),
            "columns" | "2" => Ok(BaselineKind::PermuteColumns),
            "combined" | "3" => Ok(BaselineKind::Combined),
            other => Err(Error::invalid(format!(
                "unknown baseline `{other}` (expected rows, columns or combined)"
            ))),
        }
    }
}

/// Reassigns feature rows to items by a uniform random permutation (fixed
/// points allowed). Item identifiers keep their original order.
pub fn shuffle_rows(f: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix> {
    let n = f.n_items();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, rng::streams::SHUFFLE_ROWS));
    let values = f.values();
    let shuffled = Array2::from_shape_fn(values.dim(), |(i, k)| values[[perm[i], k]]);
    Ok(f.with_values(shuffled)?.relabeled(format!("{}+shuffle-rows", f.label())))
}

/// Permutes each row's values with its own uniform random permutation. All
/// rows draw from one seeded stream, in row order.
pub fn permute_columns_per_row(f: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix> {
    let mut values = f.values().to_owned();
    let mut r = rng::stream(seed, rng::streams::PERMUTE_COLUMNS);
    for mut row in values.rows_mut() {
        row.as_slice_mut()
            .expect("owned rows are contiguous")
            .shuffle(&mut r);
    }
    Ok(f.with_values(values)?.relabeled(format!("{}+permute-columns", f.label())))
}

/// [`shuffle_rows`] then [`permute_columns_per_row`]; the two steps use
/// distinct sub-streams of `seed`.
pub fn combined_shuffle(f: &FeatureMatrix, seed: u64) -> Result<FeatureMatrix> {
    let rows = shuffle_rows(f, seed)?;
    Ok(permute_columns_per_row(&rows, seed)?.relabeled(format!("{}+combined", f.label())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fm(values: Array2<f64>) -> FeatureMatrix {
        let items = (0..values.nrows()).map(|i| format!("i{i}")).collect();
        FeatureMatrix::new(items, values, "t").unwrap()
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    fn sorted_rows(f: &FeatureMatrix) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = f.values().rows().into_iter().map(|r| r.to_vec()).collect();
        rows.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        rows
    }

    fn sample() -> FeatureMatrix {
        fm(Array2::from_shape_fn((12, 7), |(i, k)| (i * 7 + k) as f64))
    }

    #[test]
    fn two_rows_are_either_kept_or_swapped() {
        let f = fm(array![[1.0, 2.0], [3.0, 4.0]]);
        let mut swapped = false;
        for seed in 0..20 {
            let g = shuffle_rows(&f, seed).unwrap();
            assert_eq!(g.items(), f.items());
            if g.values() == array![[3.0, 4.0], [1.0, 2.0]] {
                swapped = true;
            } else {
                assert_eq!(g.values(), f.values());
            }
        }
        assert!(swapped);
    }

    #[test]
    fn row_shuffle_preserves_row_multiset() {
        let f = sample();
        let g = shuffle_rows(&f, 3).unwrap();
        assert_eq!(sorted_rows(&f), sorted_rows(&g));
        assert_eq!(g, shuffle_rows(&f, 3).unwrap());
    }

    #[test]
    fn column_permutation_preserves_each_row() {
        let f = sample();
        let g = permute_columns_per_row(&f, 5).unwrap();
        for (a, b) in f.values().rows().into_iter().zip(g.values().rows()) {
            assert_eq!(sorted(a.to_vec()), sorted(b.to_vec()));
            assert_eq!(a.sum(), b.sum());
        }
        assert_ne!(f.values(), g.values());
        assert_eq!(g, permute_columns_per_row(&f, 5).unwrap());

        let single = fm(array![[1.0], [2.0], [3.0]]);
        assert_eq!(permute_columns_per_row(&single, 1).unwrap().values(), single.values());
    }

    #[test]
    fn combined_preserves_global_multiset() {
        let f = sample();
        let g = combined_shuffle(&f, 11).unwrap();
        assert_eq!(sorted(f.values().iter().cloned().collect()), sorted(g.values().iter().cloned().collect()));
        assert_eq!(g, combined_shuffle(&f, 11).unwrap());
        assert_eq!(g.values().dim(), f.values().dim());
    }

    #[test]
    fn kinds_parse() {
        for kind in BaselineKind::ALL {
            assert_eq!(kind.name().parse::<BaselineKind>().unwrap(), kind);
        }
        assert_eq!("2".parse::<BaselineKind>().unwrap(), BaselineKind::PermuteColumns);
        assert!("shuffle".parse::<BaselineKind>().is_err());
    }
}
