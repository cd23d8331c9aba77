#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use repalign::datamodel::{write_feature_matrix, write_records, write_similarity_matrix, write_weights};
use repalign::{FeatureMatrix, SimilarityMatrix, WeightVector};

pub fn repalign() -> Command {
    Command::new(env!("CARGO_BIN_EXE_repalign"))
}

/// Runs the binary with `args`, failing the test on a nonzero exit.
pub fn run_ok(args: &[&str]) -> Output {
    let out = repalign().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "repalign {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn run_err(args: &[&str]) -> String {
    let out = repalign().args(args).output().expect("binary runs");
    assert!(!out.status.success(), "repalign {args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn features_file(dir: &Path, name: &str, f: &FeatureMatrix) -> PathBuf {
    let p = dir.join(format!("{name}.csv"));
    write_feature_matrix(&p, f, &[]).unwrap();
    p
}

pub fn similarity_file(dir: &Path, name: &str, s: &SimilarityMatrix) -> PathBuf {
    let p = dir.join(format!("{name}.csv"));
    write_similarity_matrix(&p, s, &[]).unwrap();
    p
}

pub fn weights_file(dir: &Path, name: &str, f: &FeatureMatrix, w: &WeightVector) -> PathBuf {
    let p = dir.join(format!("{name}.csv"));
    write_weights(&p, f.feature_names(), w, &[]).unwrap();
    p
}

pub fn labels_file(dir: &Path, items: &[String], classes: &[String]) -> PathBuf {
    let p = dir.join("labels.csv");
    let rows = items.iter().zip(classes).map(|(i, c)| vec![i.clone(), c.clone()]);
    write_records(&p, &[], vec!["id".into(), "class_name".into()], rows).unwrap();
    p
}

pub fn report(out: &Path, command: &str) -> toml::Table {
    let text = std::fs::read_to_string(out.join("reports").join(format!("{command}.toml"))).unwrap();
    text.parse().unwrap()
}

pub fn float(t: &toml::Table, path: &[&str]) -> f64 {
    let mut v = t.get(path[0]).unwrap_or_else(|| panic!("missing {}", path[0]));
    for key in &path[1..] {
        v = v.get(key).unwrap_or_else(|| panic!("missing {key}"));
    }
    v.as_float().unwrap_or_else(|| panic!("{path:?} is not a float"))
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
