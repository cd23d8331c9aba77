//! Execution policy for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`Execution`], which maps
//! over independent work items and returns results in input order. Results
//! are therefore identical between the two policies, and between builds with
//! and without the `parallel` feature. Without the feature, `Parallel` runs
//! sequentially.

use ndarray::{ArrayViewMut1, ArrayViewMut2, Axis};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this policy will actually use worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `0..n`, preserving index order in the output.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps `f` over a slice of items, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Calls `f(row_index, row)` for every row of `out`.
    pub fn for_each_row<F>(self, out: ArrayViewMut2<'_, f64>, f: F)
    where
        F: Fn(usize, ArrayViewMut1<'_, f64>) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use ndarray::parallel::prelude::*;
            let mut out = out;
            out.axis_iter_mut(Axis(0))
                .into_par_iter()
                .enumerate()
                .for_each(|(i, row)| f(i, row));
            return;
        }
        let mut out = out;
        for (i, row) in out.axis_iter_mut(Axis(0)).enumerate() {
            f(i, row);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn policies_agree() {
        let seq = Execution::Sequential.map_range(100, |i| i * i);
        let par = Execution::Parallel.map_range(100, |i| i * i);
        assert_eq!(seq, par);

        let mut a = Array2::<f64>::zeros((17, 3));
        let mut b = a.clone();
        Execution::Sequential.for_each_row(a.view_mut(), |i, mut r| r.fill(i as f64));
        Execution::Parallel.for_each_row(b.view_mut(), |i, mut r| r.fill(i as f64));
        assert_eq!(a, b);
        assert_eq!(a[[16, 2]], 16.0);
    }
}
