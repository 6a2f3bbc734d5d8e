//! Experiment configuration schema (TOML).
//!
//! ```toml
//! [experiment]
//! name = "table1-cbo"
//! n_particles = 150
//! n_iters = 300
//! dt = 0.1
//! n_runs = 50
//! base_seed = 2024
//!
//! [flags]                        # optional, defaults shown in the README
//! normalize_by_dim = false
//! sidedness = "two-sided"
//! boundary = "clamp"
//!
//! [[benchmarks]]
//! name = "levy"
//! dim = 20
//!
//! [[methods]]
//! id = "cbo"
//! dynamics = { family = "cbo" }
//! noise = { kind = "none" }
//!
//! [[methods]]
//! id = "smd-cbo-meanvar"
//! dynamics = { family = "cbo" }
//! noise = { kind = "smd", observable = "mean-plus-variance" }
//! ```
//!
//! Run `r` of every method uses seed `base_seed + r`, so comparisons across
//! methods are paired.

use crate::dynamics::{CboConfig, DynamicsSpec, LangevinConfig, SbsConfig};
use crate::error::{Error, Result};
use crate::gcn::GcnSpec;
use crate::integrator::{BoundaryPolicy, NoiseSpec, RunConfig, SingularityPolicy};
use crate::objectives;
use crate::schedule::StepSchedule;
use crate::smd::{SmdObservable, SmdSpec};
use crate::stats::Sidedness;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub flags: Flags,
    pub benchmarks: Vec<BenchmarkEntry>,
    pub methods: Vec<MethodEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub name: String,
    pub n_particles: usize,
    pub n_iters: usize,
    pub dt: f64,
    pub n_runs: usize,
    pub base_seed: u64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// Output directory; `--output` on the command line overrides it.
    #[serde(default)]
    pub output: Option<String>,
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Flags {
    pub normalize_by_dim: bool,
    pub sidedness: Sidedness,
    pub boundary: BoundaryPolicy,
    pub singularity: SingularityPolicy,
    /// A (method, benchmark) cell whose diverged-run fraction exceeds this
    /// makes the run command exit with the divergence status.
    pub max_diverged_fraction: f64,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            normalize_by_dim: false,
            sidedness: Sidedness::TwoSided,
            boundary: BoundaryPolicy::Clamp,
            singularity: SingularityPolicy::ClampWarn,
            max_diverged_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub name: String,
    pub dim: usize,
}

impl BenchmarkEntry {
    /// Directory/key form, e.g. `levy-d20`.
    pub fn key(&self) -> String {
        format!("{}-d{}", self.name, self.dim)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodEntry {
    pub id: String,
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DynamicsConfig {
    Msgd,
    Langevin {
        #[serde(default = "one")]
        kappa: f64,
    },
    Cbo {
        #[serde(default = "one")]
        lambda: f64,
        /// Diffusion gain; the benchmark default follows the sigma = 5.1
        /// convention of the CBO literature.
        #[serde(default = "default_cbo_gamma")]
        gamma: f64,
        /// Gibbs weight; the benchmark default follows the beta = 1
        /// convention (the weight exponent, not the noise intensity).
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "default_heaviside_eps")]
        heaviside_eps: f64,
    },
    Sbs {
        #[serde(default = "one")]
        kappa: f64,
        /// Kernel bandwidth; omitted means the `1/N^2` default.
        #[serde(default)]
        bandwidth: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_cbo_gamma() -> f64 {
    5.1
}

fn default_heaviside_eps() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseConfig {
    #[default]
    None,
    Smd {
        observable: SmdObservable,
        #[serde(default = "two")]
        delta: f64,
        #[serde(default = "one")]
        beta: f64,
    },
    Gcn {
        #[serde(default = "one")]
        bandwidth: f64,
        #[serde(default = "one")]
        beta: f64,
        #[serde(default = "default_eig_clamp")]
        eig_clamp_rel: f64,
        #[serde(default = "default_refresh")]
        sqrt_refresh_every: usize,
    },
}

fn two() -> f64 {
    2.0
}

fn default_eig_clamp() -> f64 {
    1e-10
}

fn default_refresh() -> usize {
    1
}

impl DynamicsConfig {
    pub fn resolve(&self, n_particles: usize) -> DynamicsSpec {
        match *self {
            DynamicsConfig::Msgd => DynamicsSpec::Msgd,
            DynamicsConfig::Langevin { kappa } => DynamicsSpec::Langevin(LangevinConfig { kappa }),
            DynamicsConfig::Cbo {
                lambda,
                gamma,
                alpha,
                heaviside_eps,
            } => DynamicsSpec::Cbo(CboConfig {
                lambda,
                gamma,
                alpha,
                heaviside_eps,
            }),
            DynamicsConfig::Sbs { kappa, bandwidth } => DynamicsSpec::Sbs(SbsConfig {
                kappa,
                bandwidth: bandwidth
                    .unwrap_or_else(|| 1.0 / (n_particles as f64 * n_particles as f64)),
            }),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DynamicsConfig::Msgd => "msgd",
            DynamicsConfig::Langevin { .. } => "langevin",
            DynamicsConfig::Cbo { .. } => "cbo",
            DynamicsConfig::Sbs { .. } => "sbs",
        }
    }
}

impl NoiseConfig {
    pub fn resolve(&self) -> NoiseSpec {
        match *self {
            NoiseConfig::None => NoiseSpec::None,
            NoiseConfig::Smd {
                observable,
                delta,
                beta,
            } => NoiseSpec::Smd(SmdSpec::new(observable, delta, beta)),
            NoiseConfig::Gcn {
                bandwidth,
                beta,
                eig_clamp_rel,
                sqrt_refresh_every,
            } => NoiseSpec::Gcn(GcnSpec {
                bandwidth,
                beta,
                eig_clamp_rel,
                sqrt_refresh_every,
            }),
        }
    }

    pub fn is_vanilla(&self) -> bool {
        matches!(self, NoiseConfig::None)
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.experiment.n_runs == 0 {
            return bad("n_runs must be >= 1".into());
        }
        if self.benchmarks.is_empty() {
            return bad("at least one benchmark is required".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if !(self.flags.max_diverged_fraction >= 0.0 && self.flags.max_diverged_fraction <= 1.0) {
            return bad("max_diverged_fraction must be in [0, 1]".into());
        }
        let mut keys = std::collections::BTreeSet::new();
        for b in &self.benchmarks {
            let mindim = objectives::min_dim(&b.name)
                .ok_or_else(|| Error::UnknownObjective(b.name.clone()))?;
            if b.dim < mindim {
                return Err(Error::BadDimension {
                    name: b.name.clone(),
                    min_dim: mindim,
                    dim: b.dim,
                });
            }
            if !keys.insert(b.key()) {
                return bad(format!("duplicate benchmark {}", b.key()));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for m in &self.methods {
            if m.id.is_empty()
                || !m
                    .id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return bad(format!(
                    "method id '{}' must be non-empty and use only [A-Za-z0-9_-]",
                    m.id
                ));
            }
            if !ids.insert(m.id.clone()) {
                return bad(format!("duplicate method id '{}'", m.id));
            }
            // validate resolved specs eagerly so `run` fails before any work
            let rc = self.run_config(m, &self.benchmarks[0], 0)?;
            rc.validate()?;
        }
        Ok(())
    }

    /// The [`RunConfig`] of run `r` of `method` on `bench`; run `r` shares
    /// seed `base_seed + r` across all methods.
    pub fn run_config(
        &self,
        method: &MethodEntry,
        bench: &BenchmarkEntry,
        run: usize,
    ) -> Result<RunConfig> {
        Ok(RunConfig {
            objective: bench.name.clone(),
            dim: bench.dim,
            normalize_by_dim: self.flags.normalize_by_dim,
            dynamics: method.dynamics.resolve(self.experiment.n_particles),
            noise: method.noise.resolve(),
            n_particles: self.experiment.n_particles,
            schedule: StepSchedule::constant(self.experiment.dt, self.experiment.n_iters)?,
            seed: self.experiment.base_seed + run as u64,
            record_stride: self.experiment.record_stride,
            boundary: self.flags.boundary,
            singularity: self.flags.singularity,
        })
    }
}
