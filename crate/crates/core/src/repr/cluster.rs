use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::DissimilarityMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Linkage {
    /// UPGMA: mean dissimilarity over all cross-cluster pairs.
    #[default]
    Average,
    Complete,
    Single,
}

impl Linkage {
    pub fn name(self) -> &'static str {
        match self {
            Linkage::Average => "average",
            Linkage::Complete => "complete",
            Linkage::Single => "single",
        }
    }

    /// Lance-Williams update: dissimilarity between `a ∪ b` and `c`.
    fn combine(self, d_ac: f64, d_bc: f64, n_a: usize, n_b: usize) -> f64 {
        match self {
            Linkage::Single => d_ac.min(d_bc),
            Linkage::Complete => d_ac.max(d_bc),
            Linkage::Average => (n_a as f64 * d_ac + n_b as f64 * d_bc) / (n_a + n_b) as f64,
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Linkage::Average),
            "complete" => Ok(Linkage::Complete),
            "single" => Ok(Linkage::Single),
            other => Err(Error::invalid(format!(
                "unknown linkage `{other}` (expected average, complete or single)"
            ))),
        }
    }
}

/// One agglomeration step. Leaves are clusters `0..N`; the cluster created by
/// merge `t` is `N + t`. `a < b` always.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
    pub linkage: Linkage,
}

/// Agglomerative clustering by repeated closest-pair merging.
///
/// Among pairs at the same height the one with the lexicographically
/// smallest `(a, b)` cluster identifiers is merged first, so the result is
/// fully determined by the input.
pub fn hierarchical_cluster(d: &DissimilarityMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = d.n_items();
    if n < 2 {
        return Err(Error::invalid("clustering needs at least 2 items"));
    }
    let mut dist = d.values().to_owned();
    // slot s holds cluster id[s] of size[s]; merged clusters reuse the
    // lower slot
    let mut id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);

    for t in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for s in (0..n).filter(|&s| active[s]) {
            for u in (s + 1..n).filter(|&u| active[u]) {
                let h = dist[[s, u]];
                let (lo, hi) = if id[s] < id[u] { (id[s], id[u]) } else { (id[u], id[s]) };
                let better = match best {
                    None => true,
                    Some((bh, blo, bhi, _, _)) => h < bh || (h == bh && (lo, hi) < (blo, bhi)),
                };
                if better {
                    best = Some((h, lo, hi, s, u));
                }
            }
        }
        let (height, lo, hi, s, u) = best.expect("at least two active clusters");
        for c in (0..n).filter(|&c| active[c] && c != s && c != u) {
            let v = linkage.combine(dist[[s, c]], dist[[u, c]], size[s], size[u]);
            dist[[s, c]] = v;
            dist[[c, s]] = v;
        }
        active[u] = false;
        size[s] += size[u];
        id[s] = n + t;
        merges.push(Merge {
            a: lo,
            b: hi,
            height,
            size: size[s],
        });
    }
    Ok(Dendrogram {
        leaves: d.items().to_vec(),
        merges,
        linkage,
    })
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Leaf indices under each cluster id, leaves and merged clusters alike.
    pub fn members(&self) -> Vec<BTreeSet<usize>> {
        let n = self.n_leaves();
        let mut out: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        for m in &self.merges {
            let joined = out[m.a].union(&out[m.b]).cloned().collect();
            out.push(joined);
        }
        out
    }

    /// Flat partition into `k` clusters by undoing the last `k − 1` merges.
    /// Cluster labels are numbered by their smallest leaf index.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.n_leaves();
        if k < 1 || k > n {
            return Err(Error::invalid(format!("cannot cut {n} leaves into {k} clusters")));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let members = self.members();
        for m in &self.merges[..n - k] {
            let a = *members[m.a].iter().next().expect("nonempty");
            let b = *members[m.b].iter().next().expect("nonempty");
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        let mut order: Vec<usize> = roots.clone();
        order.sort();
        order.dedup();
        Ok(roots.iter().map(|r| order.binary_search(r).expect("root listed")).collect())
    }

    /// Newick tree; branch lengths are differences of merge heights, leaves
    /// sit at height 0.
    pub fn to_newick(&self) -> String {
        let n = self.n_leaves();
        let mut heights = vec![0.0; n];
        heights.extend(self.merges.iter().map(|m| m.height));
        let mut out = String::new();
        self.write_node(n + self.merges.len() - 1, &heights, &mut out);
        out.push(';');
        out
    }

    fn write_node(&self, node: usize, heights: &[f64], out: &mut String) {
        let n = self.n_leaves();
        if node < n {
            out.push_str(&newick_label(&self.leaves[node]));
            return;
        }
        let m = &self.merges[node - n];
        out.push('(');
        for (k, child) in [m.a, m.b].into_iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            self.write_node(child, heights, out);
            let _ = write!(out, ":{}", m.height - heights[child]);
        }
        out.push(')');
    }

    /// `a,b,height,size` lines with a header.
    pub fn to_merge_table(&self) -> String {
        let mut out = String::from("a,b,height,size\n");
        for m in &self.merges {
            let _ = writeln!(out, "{},{},{:.16e},{}", m.a, m.b, m.height, m.size);
        }
        out
    }
}

fn newick_label(name: &str) -> String {
    let plain = !name.is_empty()
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !"()[]':;,".contains(c));
    if plain {
        name.to_owned()
    } else {
        format!("'{}'", name.replace('\'', "''"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn dm(values: Array2<f64>) -> DissimilarityMatrix {
        let items = (0..values.nrows()).map(|i| format!("x{i}")).collect();
        DissimilarityMatrix::new(items, values).unwrap()
    }

    #[test]
    fn two_items() {
        let t = hierarchical_cluster(&dm(array![[0.0, 2.5], [2.5, 0.0]]), Linkage::Average).unwrap();
        assert_eq!(t.merges, vec![Merge { a: 0, b: 1, height: 2.5, size: 2 }]);
        assert_eq!(t.to_newick(), "(x0:2.5,x1:2.5);");
    }

    #[test]
    fn linkage_rules() {
        // points on a line at 0, 1, 3
        let d = array![[0.0, 1.0, 3.0], [1.0, 0.0, 2.0], [3.0, 2.0, 0.0]];
        let h = |l| {
            hierarchical_cluster(&dm(d.clone()), l)
                .unwrap()
                .merges
                .iter()
                .map(|m| m.height)
                .collect::<Vec<_>>()
        };
        assert_eq!(h(Linkage::Single), vec![1.0, 2.0]);
        assert_eq!(h(Linkage::Complete), vec![1.0, 3.0]);
        assert_eq!(h(Linkage::Average), vec![1.0, 2.5]);
    }

    #[test]
    fn ties_merge_smallest_ids_first() {
        let d = Array2::from_shape_fn((4, 4), |(i, j)| if i == j { 0.0 } else { 1.0 });
        let t = hierarchical_cluster(&dm(d), Linkage::Average).unwrap();
        assert_eq!((t.merges[0].a, t.merges[0].b), (0, 1));
        assert_eq!((t.merges[1].a, t.merges[1].b), (2, 3));
        assert_eq!((t.merges[2].a, t.merges[2].b), (4, 5));
    }

    #[test]
    fn cut_and_merge_table() {
        let d = array![[0.0, 1.0, 9.0], [1.0, 0.0, 9.0], [9.0, 9.0, 0.0]];
        let t = hierarchical_cluster(&dm(d), Linkage::Complete).unwrap();
        assert_eq!(t.cut(2).unwrap(), vec![0, 0, 1]);
        assert_eq!(t.cut(1).unwrap(), vec![0, 0, 0]);
        assert_eq!(t.cut(3).unwrap(), vec![0, 1, 2]);
        assert!(t.cut(0).is_err());
        let table = t.to_merge_table();
        assert_eq!(table.lines().count(), 3);
        assert!(table.lines().nth(2).unwrap().starts_with("2,3,9."));
    }

    #[test]
    fn newick_quotes_awkward_labels() {
        assert_eq!(newick_label("zebra"), "zebra");
        assert_eq!(newick_label("snow leopard"), "'snow leopard'");
        assert_eq!(newick_label("o'hara"), "'o''hara'");
    }

    #[test]
    fn linkage_names_parse() {
        for l in [Linkage::Average, Linkage::Complete, Linkage::Single] {
            assert_eq!(l.name().parse::<Linkage>().unwrap(), l);
        }
        assert!("ward".parse::<Linkage>().is_err());
    }
}
