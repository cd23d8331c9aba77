use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use repalign::baselines::BaselineKind;
use repalign::repr::{DissimilarityMethod, Linkage};
use repalign::ridge::{default_lambda_grid, DEFAULT_FOLDS};
use serde::{Deserialize, Serialize};

use crate::{Cli, Command};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub folds: usize,
    pub grid: Vec<f64>,
    pub linkage: String,
    pub mds_dims: usize,
    pub dissimilarity: String,
    pub out: PathBuf,
    pub inputs: Inputs,
    pub fit: FitSection,
    pub baseline: BaselineSection,
    pub elastic_net: ElasticNetSection,
    pub classifier: ClassifierSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub features: Vec<PathBuf>,
    pub similarity: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub weights: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub fit_intercept: bool,
    pub normalize_rows: bool,
    pub standardize: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub kinds: Vec<String>,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElasticNetSection {
    pub enabled: bool,
    pub alpha: f64,
    pub l1_ratio: f64,
    /// When nonempty, alpha is chosen from this list by cross-validation.
    pub alphas: Vec<f64>,
    pub max_sweeps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub l2: f64,
    pub max_iterations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            folds: DEFAULT_FOLDS,
            grid: default_lambda_grid(),
            linkage: Linkage::default().name().into(),
            mds_dims: 2,
            dissimilarity: DissimilarityMethod::default().name().into(),
            out: PathBuf::from("out"),
            inputs: Inputs::default(),
            fit: FitSection::default(),
            baseline: BaselineSection::default(),
            elastic_net: ElasticNetSection::default(),
            classifier: ClassifierSection::default(),
        }
    }
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            fit_intercept: true,
            normalize_rows: false,
            standardize: false,
        }
    }
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            kinds: BaselineKind::ALL.iter().map(|k| k.name().to_owned()).collect(),
            seeds: (0..5).collect(),
        }
    }
}

impl Default for ElasticNetSection {
    fn default() -> Self {
        let p = repalign::reclassify::ElasticNetParams::default();
        ElasticNetSection {
            enabled: false,
            alpha: p.alpha,
            l1_ratio: p.l1_ratio,
            alphas: Vec::new(),
            max_sweeps: p.max_sweeps,
        }
    }
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let p = repalign::reclassify::LogRegParams::default();
        ClassifierSection {
            l2: p.l2,
            max_iterations: p.max_iterations,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config `{}`", path.display()))?;
        let mut config: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config `{}`", path.display()))?;
        // input and output paths in a config file are relative to the file
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        config.inputs.features.iter_mut().for_each(rebase);
        for p in [
            &mut config.inputs.similarity,
            &mut config.inputs.labels,
            &mut config.inputs.weights,
        ]
        .into_iter()
        .flatten()
        {
            rebase(p);
        }
        rebase(&mut config.out);
        Ok(config)
    }

    /// Defaults, then the config file, then flags; validated for `cli.command`.
    pub fn resolve(cli: &Cli) -> anyhow::Result<Self> {
        let mut c = match &cli.global.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let g = &cli.global;
        set(&mut c.seed, g.seed);
        set(&mut c.out, g.out.clone());
        set(&mut c.folds, g.folds);
        set(&mut c.grid, g.grid.clone());
        set(&mut c.linkage, g.linkage.clone());
        set(&mut c.mds_dims, g.mds_dims);
        set(&mut c.dissimilarity, g.dissimilarity.clone());

        let pair = |c: &mut RunConfig, a: &crate::PairArgs| {
            if let Some(f) = &a.features {
                c.inputs.features = vec![f.clone()];
            }
            set(&mut c.inputs.similarity, a.similarity.clone().map(Some));
        };
        match &cli.command {
            Command::EvalRaw(a) => pair(&mut c, a),
            Command::Fit(a) => {
                pair(&mut c, &a.inputs);
                c.elastic_net.enabled |= a.nonneg || a.alphas.is_some();
                set(&mut c.elastic_net.alpha, a.alpha);
                set(&mut c.elastic_net.l1_ratio, a.l1_ratio);
                set(&mut c.elastic_net.alphas, a.alphas.clone());
                c.fit.normalize_rows |= a.normalize_rows;
                c.fit.standardize |= a.standardize;
            }
            Command::Baseline(a) => {
                pair(&mut c, &a.inputs);
                set(&mut c.baseline.kinds, a.kinds.clone());
                set(&mut c.baseline.seeds, a.seeds.clone());
            }
            Command::DepthSweep(a) => {
                if !a.features.is_empty() {
                    c.inputs.features = a.features.clone();
                }
                set(&mut c.inputs.similarity, a.similarity.clone().map(Some));
            }
            Command::Reclassify(a) => {
                if let Some(f) = &a.features {
                    c.inputs.features = vec![f.clone()];
                }
                set(&mut c.inputs.labels, a.labels.clone().map(Some));
                set(&mut c.inputs.weights, a.weights.clone().map(Some));
                set(&mut c.classifier.l2, a.l2);
            }
        }
        c.normalize()?;
        c.validate_for(cli.command.name())?;
        Ok(c)
    }

    /// Canonical spelling of enumerated options, so equivalent runs record
    /// identical configs.
    fn normalize(&mut self) -> anyhow::Result<()> {
        self.linkage = self.linkage()?.name().into();
        self.dissimilarity = self.dissimilarity()?.name().into();
        let kinds = self.baseline_kinds()?;
        self.baseline.kinds = kinds.iter().map(|k| k.name().to_owned()).collect();
        Ok(())
    }

    pub fn linkage(&self) -> anyhow::Result<Linkage> {
        Ok(self.linkage.parse()?)
    }

    pub fn dissimilarity(&self) -> anyhow::Result<DissimilarityMethod> {
        Ok(self.dissimilarity.parse()?)
    }

    pub fn baseline_kinds(&self) -> anyhow::Result<Vec<BaselineKind>> {
        self.baseline
            .kinds
            .iter()
            .map(|k| k.parse().map_err(anyhow::Error::from))
            .collect()
    }

    pub fn validate_for(&self, command: &str) -> anyhow::Result<()> {
        ensure!(self.folds >= 2, "folds must be at least 2, got {}", self.folds);
        ensure!(!self.grid.is_empty(), "the lambda grid is empty");
        for &l in &self.grid {
            ensure!(l.is_finite() && l >= 0.0, "lambda grid values must be finite and >= 0, got {l}");
        }
        ensure!(self.mds_dims >= 1, "mds-dims must be at least 1");
        let need_file = |what: &str, p: &Option<PathBuf>| -> anyhow::Result<()> {
            match p {
                None => bail!("{command} needs a {what} file"),
                Some(p) => exists(what, p),
            }
        };
        match command {
            "eval-raw" | "fit" | "baseline" => {
                ensure!(
                    self.inputs.features.len() == 1,
                    "{command} takes exactly one feature file, got {}",
                    self.inputs.features.len()
                );
                exists("feature", &self.inputs.features[0])?;
                need_file("similarity", &self.inputs.similarity)?;
            }
            "depth-sweep" => {
                ensure!(
                    self.inputs.features.len() >= 2,
                    "depth-sweep needs at least 2 feature files, got {}",
                    self.inputs.features.len()
                );
                for f in &self.inputs.features {
                    exists("feature", f)?;
                }
                need_file("similarity", &self.inputs.similarity)?;
            }
            "reclassify" => {
                ensure!(
                    self.inputs.features.len() == 1,
                    "reclassify takes exactly one feature file, got {}",
                    self.inputs.features.len()
                );
                exists("feature", &self.inputs.features[0])?;
                need_file("label", &self.inputs.labels)?;
                need_file("weight", &self.inputs.weights)?;
            }
            other => bail!("unknown command `{other}`"),
        }
        if command == "baseline" {
            ensure!(!self.baseline.kinds.is_empty(), "no baseline kinds requested");
            ensure!(!self.baseline.seeds.is_empty(), "no baseline seeds given");
        }
        if command == "fit" && self.elastic_net.enabled {
            let e = &self.elastic_net;
            ensure!(e.alpha > 0.0, "elastic-net alpha must be > 0");
            ensure!((0.0..=1.0).contains(&e.l1_ratio), "elastic-net l1_ratio must be in [0, 1]");
            ensure!(e.alphas.iter().all(|a| *a > 0.0), "elastic-net alphas must be > 0");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn exists(what: &str, p: &Path) -> anyhow::Result<()> {
    ensure!(p.is_file(), "{what} file `{}` does not exist", p.display());
    Ok(())
}
