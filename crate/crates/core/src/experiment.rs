//! Experiment harness: JSON-configurable replicate runs over either tree
//! model, long-format CSV emission, and a summary with means, standard errors
//! and optional declared tolerances. Identical config and seed produce
//! byte-identical output; replicate streams are derived counter-style so
//! execution order and thread count are irrelevant.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::{mean_se, CheckOutcome};
use crate::error::{Error, Result};
use crate::rng::rng_from_words;
use crate::sequences::SequenceSpec;
use crate::stats;
use crate::trees::{self, PlaneTree};

pub const BUILD_ID: &str = env!("WRTLAB_BUILD_ID");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Wrt,
    Pat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    Profile,
    Height,
    Laplace,
    Measures,
    Mrca,
    Degrees,
}

/// Declared tolerance for one summary entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub statistic: StatKind,
    pub key: String,
    pub n: usize,
    pub target: f64,
    /// Pass when |mean - target| <= z_max standard errors (default 4).
    #[serde(default = "default_z_max")]
    pub z_max: f64,
}

fn default_z_max() -> f64 {
    4.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub seq: SequenceSpec,
    pub ns: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub statistics: Vec<StatKind>,
    /// Transform argument for the laplace statistic.
    #[serde(default)]
    pub z: Option<f64>,
    /// Exponent used for predictions; derived from the sequence spec when
    /// omitted.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Vec<ToleranceSpec>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryEntry {
    pub n: usize,
    pub statistic: StatKind,
    pub key: String,
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub build: String,
    pub config: ExperimentConfig,
    pub entries: Vec<SummaryEntry>,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

fn gamma_for(config: &ExperimentConfig) -> f64 {
    config
        .gamma
        .or_else(|| config.seq.gamma())
        .unwrap_or(1.0)
}

fn replicate_statistics(
    config: &ExperimentConfig,
    tree: &PlaneTree,
    rng: &mut impl rand::Rng,
) -> Result<Vec<(StatKind, String, f64)>> {
    let n = tree.len();
    let gamma = gamma_for(config);
    let z = config.z.unwrap_or(0.5);
    let mut rows = Vec::new();
    for &stat in &config.statistics {
        match stat {
            StatKind::Profile => {
                for (k, &c) in stats::profile(tree).counts.iter().enumerate() {
                    rows.push((stat, format!("k{}", k), c as f64));
                }
            }
            StatKind::Height => {
                let h = trees::height(tree) as f64;
                rows.push((stat, "height".into(), h));
                rows.push((stat, "height_over_log_n".into(), h / (n as f64).ln()));
            }
            StatKind::Laplace => {
                rows.push((stat, "laplace".into(), stats::laplace_profile(tree, z)));
                rows.push((
                    stat,
                    "normalized".into(),
                    stats::normalized_profile_transform(tree, gamma, z),
                ));
                if config.model == ModelKind::Wrt {
                    let w = config.seq.build_weights(n)?;
                    rows.push((
                        stat,
                        "martingale".into(),
                        stats::profile_martingale(tree, &w, z)?,
                    ));
                }
            }
            StatKind::Measures => {
                if n < 2 {
                    return Err(Error::Config("measures need n >= 2".into()));
                }
                let mu = match config.model {
                    ModelKind::Wrt => {
                        let w = config.seq.build_weights(n)?;
                        stats::tree_measure(tree, stats::MeasureKind::Weight(&w))?
                    }
                    ModelKind::Pat => stats::tree_measure(tree, stats::MeasureKind::Uniform)?,
                };
                let b = crate::sequences::FitnessSequence::constant(1.0, 1.0, n)?;
                let eta = stats::tree_measure(tree, stats::MeasureKind::Degree(&b))?;
                let nu = stats::tree_measure(tree, stats::MeasureKind::Uniform)?;
                rows.push((stat, "mu_T2".into(), stats::subtree_mass(&mu, tree, 2)?));
                rows.push((stat, "eta_T2".into(), stats::subtree_mass(&eta, tree, 2)?));
                rows.push((stat, "nu_T2".into(), stats::subtree_mass(&nu, tree, 2)?));
            }
            StatKind::Mrca => {
                let i = rng.random_range(1..=n);
                let j = rng.random_range(1..=n);
                let m = trees::mrca(tree, i, j)?;
                rows.push((stat, "mrca_is_1".into(), if m == 1 { 1.0 } else { 0.0 }));
                rows.push((stat, "mrca_is_2".into(), if m == 2 { 1.0 } else { 0.0 }));
                rows.push((stat, "d_exp".into(), trees::d_exp(tree, i, j)?));
            }
            StatKind::Degrees => {
                for k in 1..=n.min(10) {
                    rows.push((stat, format!("deg{}", k), tree.out_degree(k) as f64));
                }
                let max = (1..=n).map(|k| tree.out_degree(k)).max().unwrap_or(0);
                rows.push((stat, "max_deg".into(), max as f64));
            }
        }
    }
    Ok(rows)
}

/// Run the experiment: grow `replicates` trees at each n of the schedule,
/// emit long-format rows `replicate,n,statistic,key,value`, and summarize.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    if config.ns.is_empty() {
        return Err(Error::Config("schedule must contain at least one n".into()));
    }
    for &n in &config.ns {
        if n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
    }
    let mut rows: Vec<(u64, usize, StatKind, String, f64)> = Vec::new();
    for (ni, &n) in config.ns.iter().enumerate() {
        let per_rep: Vec<Vec<(StatKind, String, f64)>> = (0..config.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = rng_from_words(&[config.seed, ni as u64, r]);
                let tree = match config.model {
                    ModelKind::Wrt => {
                        let w = config.seq.build_weights(n)?;
                        trees::grow_wrt(&w, n, &mut rng)?.0
                    }
                    ModelKind::Pat => {
                        let f = config.seq.build_fitness(n)?;
                        trees::grow_pat(&f, n, &mut rng)?.0
                    }
                };
                replicate_statistics(config, &tree, &mut rng)
            })
            .collect::<Result<_>>()?;
        for (r, stats) in per_rep.into_iter().enumerate() {
            for (stat, key, value) in stats {
                rows.push((r as u64, n, stat, key, value));
            }
        }
    }

    if let Some(path) = &config.out {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "replicate,n,statistic,key,value")?;
        for (r, n, stat, key, value) in &rows {
            writeln!(
                file,
                "{},{},{},{},{}",
                r,
                n,
                serde_json::to_value(stat)?.as_str().expect("enum string"),
                key,
                value
            )?;
        }
        file.flush()?;
    }

    let mut grouped: BTreeMap<(usize, String, String), Vec<f64>> = BTreeMap::new();
    for (_, n, stat, key, value) in &rows {
        let stat_name = serde_json::to_value(stat)?
            .as_str()
            .expect("enum string")
            .to_string();
        grouped
            .entry((*n, stat_name, key.clone()))
            .or_default()
            .push(*value);
    }
    let mut entries = Vec::new();
    for ((n, stat_name, key), values) in &grouped {
        let (mean, se) = if values.len() > 1 {
            mean_se(values)
        } else {
            (values.first().copied().unwrap_or(f64::NAN), f64::NAN)
        };
        let statistic: StatKind = serde_json::from_value(serde_json::Value::String(
            stat_name.clone(),
        ))?;
        entries.push(SummaryEntry {
            n: *n,
            statistic,
            key: key.clone(),
            mean,
            se,
            count: values.len(),
        });
    }

    let mut checks = Vec::new();
    for tol in &config.tolerances {
        let stat_name = serde_json::to_value(tol.statistic)?
            .as_str()
            .expect("enum string")
            .to_string();
        let entry = grouped.get(&(tol.n, stat_name, tol.key.clone()));
        match entry {
            Some(values) => {
                checks.push(crate::check::mean_within_se(
                    &format!("{}@n={}", tol.key, tol.n),
                    values,
                    tol.target,
                    tol.z_max,
                ));
            }
            None => {
                return Err(Error::Config(format!(
                    "tolerance references missing entry {} at n = {}",
                    tol.key, tol.n
                )))
            }
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ExperimentSummary {
        build: BUILD_ID.to_string(),
        config: config.clone(),
        entries,
        checks,
        pass,
    })
}
