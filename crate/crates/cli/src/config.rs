//! Flag and config-file parsing into a validated [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use ymstab::bounds::ModelParams;
use ymstab::lattice::BoundaryCondition;
use ymstab::scalar::ScalarFieldParams;

#[derive(Debug, Parser)]
#[command(name = "ymstab", version, about = "Numerical checks of lattice Yang-Mills stability bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample plaquettes and count violations of the quadratic action bound.
    VerifyLemma1(RunArgs),
    /// Single-plaquette integrals against their closed-form bounds.
    Bounds(RunArgs),
    /// Monte Carlo partition function against the stability sandwich.
    Partition(RunArgs),
    /// Plaquette-field generating functional against its product bound.
    Genfun(RunArgs),
    /// Free scalar field scaling relations.
    Scalar(RunArgs),
    /// Every suite above with the same parameters.
    All(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Free,
    Periodic,
}

impl From<Bc> for BoundaryCondition {
    fn from(b: Bc) -> Self {
        match b {
            Bc::Free => BoundaryCondition::Free,
            Bc::Periodic => BoundaryCondition::Periodic,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file with [model], [sampler], [scalar], [source] and [output]
    /// sections; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub g2: Option<f64>,
    #[arg(long)]
    pub g0: Option<f64>,
    #[arg(long, value_enum)]
    pub bc: Option<Bc>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Standard errors a stochastic estimate may sit beyond its bound.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Bare scalar mass.
    #[arg(long = "m-u")]
    pub m_u: Option<f64>,
    /// Bare scalar hopping strength.
    #[arg(long = "kappa-u")]
    pub kappa_u: Option<f64>,
    /// Source magnitudes, comma separated.
    #[arg(long = "J", value_delimiter = ',')]
    pub j: Option<Vec<f64>>,
    /// Number of source plaquettes.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    sampler: SamplerSection,
    #[serde(default)]
    scalar: ScalarSection,
    #[serde(default)]
    source: SourceSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    d: Option<usize>,
    #[serde(rename = "L")]
    l: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
    a: Option<f64>,
    g2: Option<f64>,
    g0: Option<f64>,
    bc: Option<Bc>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplerSection {
    samples: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    sigma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarSection {
    m_u: Option<f64>,
    kappa_u: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceSection {
    #[serde(rename = "J")]
    j: Option<Vec<f64>>,
    r: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    out: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    VerifyLemma1,
    Bounds,
    Partition,
    Genfun,
    Scalar,
    All,
}

impl Suite {
    fn is_stochastic(self) -> bool {
        !matches!(self, Suite::Bounds | Suite::Scalar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub suite: Suite,
    pub model: ModelParams,
    pub scalar: ScalarFieldParams,
    pub sampler: Option<SamplerConfig>,
    pub sigma: f64,
    pub sources: Vec<f64>,
    pub r: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Command {
    pub fn split(self) -> (Suite, RunArgs) {
        match self {
            Command::VerifyLemma1(a) => (Suite::VerifyLemma1, a),
            Command::Bounds(a) => (Suite::Bounds, a),
            Command::Partition(a) => (Suite::Partition, a),
            Command::Genfun(a) => (Suite::Genfun, a),
            Command::Scalar(a) => (Suite::Scalar, a),
            Command::All(a) => (Suite::All, a),
        }
    }
}

fn read_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

/// Merges flags over the config file over defaults and validates the result.
pub fn resolve(suite: Suite, args: RunArgs) -> Result<RunConfig, String> {
    let file = match &args.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    let m = &file.model;
    let default_bc = if suite == Suite::Genfun { Bc::Periodic } else { Bc::Free };
    let d = args.d.or(m.d).unwrap_or(2);
    let bc: BoundaryCondition = args.bc.or(m.bc).unwrap_or(default_bc).into();
    let model = ModelParams::new(
        d,
        args.l.or(m.l).unwrap_or(2),
        args.n.or(m.n).unwrap_or(1),
        args.a.or(m.a).unwrap_or(1.0),
        args.g2.or(m.g2).unwrap_or(1.0),
        args.g0.or(m.g0),
        bc,
    )
    .map_err(|e| e.to_string())?;
    let scalar = ScalarFieldParams::new(
        d,
        model.a,
        args.m_u.or(file.scalar.m_u).unwrap_or(1.0),
        args.kappa_u.or(file.scalar.kappa_u).unwrap_or(1.0),
    )
    .map_err(|e| e.to_string())?;

    let s = &file.sampler;
    let seed = args.seed.or(s.seed);
    let sampler = if suite.is_stochastic() {
        let seed = seed.ok_or_else(|| "--seed is required for stochastic suites".to_string())?;
        let samples = args.samples.or(s.samples).unwrap_or(100_000);
        let workers = args.workers.or(s.workers).unwrap_or(1);
        if workers == 0 {
            return Err("--workers must be at least 1".into());
        }
        Some(SamplerConfig { samples, seed, workers })
    } else {
        None
    };
    let sigma = args.sigma.or(s.sigma).unwrap_or(3.0);
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(format!("--sigma {sigma} must be non-negative"));
    }
    let sources = args.j.or(file.source.j).unwrap_or_else(|| vec![0.0, 0.5, 1.0]);
    if sources.is_empty() || sources.iter().any(|j| !(*j >= 0.0 && j.is_finite())) {
        return Err("--J must list non-negative finite magnitudes".into());
    }
    let r = args.r.or(file.source.r).unwrap_or(1);
    if r == 0 {
        return Err("--r must be at least 1".into());
    }
    Ok(RunConfig {
        suite,
        model,
        scalar,
        sampler,
        sigma,
        sources,
        r,
        out: args.out.or(file.output.out),
        format: args.format.or(file.output.format).unwrap_or(Format::Csv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "[model]\nd = 3\nL = 4\nN = 2\ng2 = 0.5\n\n[sampler]\nseed = 11\nsamples = 2000").unwrap();
        let args = RunArgs { config: Some(f.path().into()), l: Some(2), seed: Some(5), ..Default::default() };
        let cfg = resolve(Suite::Partition, args).unwrap();
        assert_eq!((cfg.model.d, cfg.model.l, cfg.model.n), (3, 2, 2));
        assert_eq!(cfg.model.g2, 0.5);
        assert_eq!(cfg.sampler, Some(SamplerConfig { samples: 2000, seed: 5, workers: 1 }));
    }

    #[test]
    fn seed_is_mandatory_for_sampling() {
        assert!(resolve(Suite::Partition, RunArgs::default()).is_err());
        assert!(resolve(Suite::Bounds, RunArgs::default()).is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "[model]\nbeta = 2").unwrap();
        let args = RunArgs { config: Some(f.path().into()), ..Default::default() };
        assert!(resolve(Suite::Bounds, args).is_err());
    }

    #[test]
    fn genfun_defaults_to_periodic() {
        let args = RunArgs { seed: Some(1), ..Default::default() };
        assert_eq!(resolve(Suite::Genfun, args).unwrap().model.bc, BoundaryCondition::Periodic);
    }
}
