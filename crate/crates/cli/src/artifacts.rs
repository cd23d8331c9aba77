use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use repalign::datamodel::{format_value, write_records, write_similarity_matrix, write_weights};
use repalign::repr::{Dendrogram, Embedding};
use repalign::{SimilarityMatrix, WeightVector};
use serde::Serialize;

use crate::config::RunConfig;

pub const REPORTS: &str = "reports";
pub const WEIGHTS: &str = "weights";
pub const EMBEDDINGS: &str = "embeddings";
pub const DENDROGRAMS: &str = "dendrograms";

const TOOL: &str = concat!("repalign ", env!("CARGO_PKG_VERSION"));

/// Writes the artifacts of one command under the fixed output layout, each
/// stamped with the resolved config.
pub struct Artifacts<'a> {
    command: &'static str,
    config: &'a RunConfig,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    tool: &'static str,
    command: &'static str,
    seed: u64,
    result: &'a T,
    config: &'a RunConfig,
}

impl<'a> Artifacts<'a> {
    pub fn new(command: &'static str, config: &'a RunConfig) -> Self {
        Artifacts {
            command,
            config,
            written: Vec::new(),
        }
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }

    fn path(&mut self, dir: &str, file: String) -> anyhow::Result<PathBuf> {
        let dir = self.config.out.join(dir);
        fs::create_dir_all(&dir).with_context(|| format!("creating `{}`", dir.display()))?;
        let path = dir.join(file);
        self.written.push(path.clone());
        Ok(path)
    }

    fn stem(&self, name: &str) -> String {
        format!("{}-{name}", self.command)
    }

    /// Header lines for CSV artifacts.
    fn comments(&self) -> Vec<String> {
        let mut lines = vec![
            format!("{TOOL} {}", self.command),
            format!("seed = {}", self.config.seed),
            "resolved config:".to_owned(),
        ];
        lines.extend(self.config.to_toml().lines().map(str::to_owned));
        lines
    }

    pub fn report<T: Serialize>(&mut self, result: &T) -> anyhow::Result<PathBuf> {
        let doc = Document {
            tool: TOOL,
            command: self.command,
            seed: self.config.seed,
            result,
            config: self.config,
        };
        let text = toml::to_string(&doc).context("serializing report")?;
        let path = self.path(REPORTS, format!("{}.toml", self.command))?;
        write_text(&path, text)?;
        Ok(path)
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> anyhow::Result<PathBuf> {
        let path = self.path(REPORTS, format!("{}.csv", self.stem(name)))?;
        write_records(
            &path,
            &self.comments(),
            header.iter().map(|h| h.to_string()).collect(),
            rows.into_iter(),
        )?;
        Ok(path)
    }

    pub fn similarity(&mut self, name: &str, s: &SimilarityMatrix) -> anyhow::Result<PathBuf> {
        let path = self.path(REPORTS, format!("{}.csv", self.stem(name)))?;
        write_similarity_matrix(&path, s, &self.comments())?;
        Ok(path)
    }

    pub fn weights(&mut self, name: &str, feature_names: &[String], w: &WeightVector) -> anyhow::Result<PathBuf> {
        let path = self.path(WEIGHTS, format!("{}.csv", self.stem(name)))?;
        let mut comments = self.comments();
        comments.push(format!("intercept = {}", format_value(w.intercept())));
        write_weights(&path, feature_names, w, &comments)?;
        Ok(path)
    }

    /// Coordinates plus a sidecar with the full eigenvalue spectrum.
    pub fn embedding(&mut self, name: &str, e: &Embedding) -> anyhow::Result<()> {
        let comments = self.comments();
        let path = self.path(EMBEDDINGS, format!("{}.csv", self.stem(name)))?;
        let header = std::iter::once("id".to_owned())
            .chain((1..=e.coords.ncols()).map(|k| format!("dim{k}")))
            .collect();
        let rows = e.items.iter().zip(e.coords.rows()).map(|(id, row)| {
            std::iter::once(id.clone())
                .chain(row.iter().map(|v| format_value(*v)))
                .collect()
        });
        write_records(&path, &comments, header, rows)?;

        let path = self.path(EMBEDDINGS, format!("{}-eigenvalues.csv", self.stem(name)))?;
        let p = e.coords.ncols();
        let rows = e.spectrum.iter().enumerate().map(|(k, v)| {
            let used = k < p && !e.nonpositive_dims.contains(&k);
            vec![(k + 1).to_string(), format_value(*v), used.to_string()]
        });
        write_records(
            &path,
            &comments,
            vec!["dim".into(), "eigenvalue".into(), "used".into()],
            rows,
        )?;
        Ok(())
    }

    /// Newick tree with the config in a leading comment, and the merge table.
    pub fn dendrogram(&mut self, name: &str, t: &Dendrogram) -> anyhow::Result<()> {
        let path = self.path(DENDROGRAMS, format!("{}.nwk", self.stem(name)))?;
        let text = format!("{}\n{}\n", self.newick_comment(), t.to_newick());
        write_text(&path, text)?;

        let path = self.path(DENDROGRAMS, format!("{}-merges.csv", self.stem(name)))?;
        let rows = t.merges.iter().map(|m| {
            vec![
                m.a.to_string(),
                m.b.to_string(),
                format_value(m.height),
                m.size.to_string(),
            ]
        });
        let mut comments = self.comments();
        comments.push(format!(
            "linkage = {}; leaves are 0..{}, merge t creates cluster {} + t",
            t.linkage,
            t.n_leaves(),
            t.n_leaves()
        ));
        write_records(
            &path,
            &comments,
            ["a", "b", "height", "size"].map(String::from).to_vec(),
            rows,
        )?;
        Ok(())
    }

    /// Newick comments cannot nest brackets, so the config is flattened to
    /// `key=value` pairs with brackets in values turned into braces.
    fn newick_comment(&self) -> String {
        let value = toml::Value::try_from(self.config).expect("config is serializable");
        let mut pairs = vec![format!("tool={TOOL}"), format!("command={}", self.command)];
        flatten("", &value, &mut pairs);
        let body = pairs.join("; ").replace('[', "{").replace(']', "}");
        format!("[{body}]")
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut Vec<String>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => out.push(format!("{prefix}={other}")),
    }
}

fn write_text(path: &PathBuf, text: String) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing `{}`", path.display()))
}
