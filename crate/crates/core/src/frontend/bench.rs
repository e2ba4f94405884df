//! Benchmark manifests and the parallel bench runner.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate, Family, SizeParams};
use super::profiles::BenchRecord;
use super::{load_instance, read_file, FrontendError};
use crate::cuts::CutClass;
use crate::model::MiblpInstance;
use crate::search::{solve, Branching, IcStrategy, SolveStatus, SolverConfig};

/// Where a benchmark instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    File {
        path: PathBuf,
        #[serde(default)]
        aux: Option<PathBuf>,
    },
    Generated {
        family: Family,
        seed: u64,
        #[serde(default)]
        size: SizeParams,
    },
}

/// A named solver configuration as written in a manifest or on the command line.
///
/// `bundle` is one of `none`, `default`, `pure-integer`, `binary-first-level`
/// or `interdiction`; listed `cuts` are added on top of it with `ic_strategy`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigSpec {
    pub name: String,
    pub bundle: Option<String>,
    pub cuts: Vec<String>,
    pub ic_strategy: Option<String>,
    pub branching: Option<String>,
    pub tailoff: Option<f64>,
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
}

impl ConfigSpec {
    pub fn to_config(&self, inst: &MiblpInstance) -> Result<SolverConfig, FrontendError> {
        let bad = |what: &str, v: &str| FrontendError::Invalid(format!("unknown {what} `{v}`"));
        let mut config = match self.bundle.as_deref() {
            None | Some("none") => SolverConfig::no_cuts(),
            Some("default") => SolverConfig::default_for(inst),
            Some(name) => SolverConfig::bundles()
                .into_iter()
                .find(|(n, _)| *n == name)
                .map(|(_, c)| c)
                .ok_or_else(|| bad("bundle", name))?,
        };
        let strategy = match self.ic_strategy.as_deref() {
            None => IcStrategy::Always,
            Some(s) => IcStrategy::from_name(s).ok_or_else(|| bad("cut strategy", s))?,
        };
        for name in &self.cuts {
            let class = CutClass::from_name(name).ok_or_else(|| bad("cut class", name))?;
            config.enable(class, strategy);
        }
        if self.cuts.is_empty() && self.ic_strategy.is_some() {
            for class in config.enabled.clone() {
                if class.strategy_gated() {
                    config.ic_strategy.insert(class, strategy);
                }
            }
        }
        if let Some(b) = self.branching.as_deref() {
            config.branching = Branching::from_name(b).ok_or_else(|| bad("branching", b))?;
        }
        if let Some(t) = self.tailoff {
            config.tailoff_threshold = t;
        }
        if let Some(t) = self.time_limit {
            config.time_limit = Some(Duration::from_secs_f64(t));
        }
        if self.node_limit.is_some() {
            config.node_limit = self.node_limit;
        }
        config
            .validate()
            .map_err(|e| FrontendError::Invalid(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub instances: Vec<InstanceSpec>,
    pub configs: Vec<ConfigSpec>,
    /// Applied to every configuration that sets no limit of its own.
    #[serde(default)]
    pub time_limit: Option<f64>,
}

impl Manifest {
    pub fn from_json_str(text: &str) -> Result<Manifest, FrontendError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| FrontendError::Json {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Manifest, FrontendError> {
        Manifest::from_json_str(&read_file(path)?)
    }
}

fn load_spec(spec: &InstanceSpec, base: &Path) -> Result<(String, MiblpInstance), FrontendError> {
    match spec {
        InstanceSpec::File { path, aux } => {
            let path = base.join(path);
            let aux = aux.as_ref().map(|a| base.join(a));
            let inst = load_instance(&path, aux.as_deref(), false)?;
            Ok((path.display().to_string(), inst))
        }
        InstanceSpec::Generated { family, seed, size } => {
            let inst = generate(*family, size, *seed)?;
            Ok((inst.name.clone(), inst))
        }
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Limit => "limit",
        SolveStatus::Infeasible => "infeasible",
    }
}

/// Solves one instance under one configuration and summarizes the run.
pub fn run_one(id: &str, inst: &MiblpInstance, name: &str, config: &SolverConfig) -> BenchRecord {
    let start = Instant::now();
    let outcome = solve(inst, config);
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(res) => BenchRecord {
            instance: id.to_string(),
            config: name.to_string(),
            status: status_name(res.status).to_string(),
            cpu_seconds: seconds,
            nodes: res.stats.nodes,
            gap: res.gap,
            root_gap_before: res.stats.root_gap_before_cuts.unwrap_or(f64::INFINITY),
            root_gap_after: res.stats.root_gap_after_cuts.unwrap_or(f64::INFINITY),
            stats_json: serde_json::to_string(&res.stats).unwrap_or_default(),
        },
        Err(e) => BenchRecord {
            instance: id.to_string(),
            config: name.to_string(),
            status: "error".into(),
            cpu_seconds: seconds,
            nodes: 0,
            gap: f64::INFINITY,
            root_gap_before: f64::INFINITY,
            root_gap_after: f64::INFINITY,
            stats_json: serde_json::json!({ "error": e.to_string() }).to_string(),
        },
    }
}

/// Runs every configuration on every instance with `jobs` worker threads.
/// Records come back in manifest order (instances outer, configs inner).
/// Relative instance paths are resolved against `base`.
pub fn run_bench(manifest: &Manifest, base: &Path, jobs: usize) -> Result<Vec<BenchRecord>, FrontendError> {
    let instances = manifest
        .instances
        .iter()
        .map(|s| load_spec(s, base))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tasks = Vec::new();
    for (id, inst) in &instances {
        for spec in &manifest.configs {
            let mut config = spec.to_config(inst)?;
            if config.time_limit.is_none() {
                config.time_limit = manifest.time_limit.map(Duration::from_secs_f64);
            }
            tasks.push((id.as_str(), inst, spec.name.as_str(), config));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| FrontendError::Invalid(e.to_string()))?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .map(|(id, inst, name, config)| run_one(id, inst, name, config))
            .collect()
    }))
}
