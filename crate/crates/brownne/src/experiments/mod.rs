//! The experiment subcommands.
//!
//! Every runner is a pure function of its configuration and the master seed:
//! parallel work is split into jobs that each draw from their own substream,
//! and results are gathered in job order before any file is written.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::{Config, ConfigError};
use crate::idx::IdxError;
use crate::report::{self, Provenance, ReportError, Table};

pub mod biased_gd;
pub mod brownian_verify;
pub mod iam;
pub mod mlp_train;
pub mod moments;
pub mod ndd_convergence;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    NddConvergence,
    Moments,
    BrownianVerify,
    Iam,
    MlpTrain,
    BiasedGd,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::NddConvergence,
        Subcommand::Moments,
        Subcommand::BrownianVerify,
        Subcommand::Iam,
        Subcommand::MlpTrain,
        Subcommand::BiasedGd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::NddConvergence => "ndd-convergence",
            Subcommand::Moments => "moments",
            Subcommand::BrownianVerify => "brownian-verify",
            Subcommand::Iam => "iam",
            Subcommand::MlpTrain => "mlp-train",
            Subcommand::BiasedGd => "biased-gd",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand {s:?}"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Core(#[from] brownne_core::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("dataset: {0}")]
    Data(#[from] IdxError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A line chart drawn from a table when SVG output is requested.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub x: String,
    pub ys: Vec<String>,
    pub log_y: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    /// File stem; the CSV is written as `<name>.csv`.
    pub name: String,
    pub table: Table,
    pub chart: Option<Chart>,
}

impl Artifact {
    pub fn new(name: &str, table: Table) -> Self {
        Artifact {
            name: name.to_string(),
            table,
            chart: None,
        }
    }

    pub fn with_chart(mut self, x: &str, ys: &[&str], log_y: bool) -> Self {
        self.chart = Some(Chart {
            x: x.to_string(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            log_y,
        });
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct Output {
    /// Configuration with every default filled in.
    pub effective: Config,
    pub artifacts: Vec<Artifact>,
    /// Extra binary files (e.g. checkpoints) by file name.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Output {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.artifacts.iter().find(|a| a.name == name).map(|a| &a.table)
    }
}

/// Validates the configuration for `sub` without running anything.
pub fn validate(sub: Subcommand, cfg: &Config) -> Result<Config, ConfigError> {
    Ok(match sub {
        Subcommand::NddConvergence => ndd_convergence::Params::from_config(cfg)?.1,
        Subcommand::Moments => moments::Params::from_config(cfg)?.1,
        Subcommand::BrownianVerify => brownian_verify::Params::from_config(cfg)?.1,
        Subcommand::Iam => iam::Params::from_config(cfg)?.1,
        Subcommand::MlpTrain => mlp_train::Params::from_config(cfg)?.1,
        Subcommand::BiasedGd => biased_gd::Params::from_config(cfg)?.1,
    })
}

pub fn run(sub: Subcommand, cfg: &Config, seed: u64) -> Result<Output, RunError> {
    let (effective, (artifacts, files)) = match sub {
        Subcommand::NddConvergence => {
            let (p, eff) = ndd_convergence::Params::from_config(cfg)?;
            (eff, (ndd_convergence::run(&p, seed)?, Vec::new()))
        }
        Subcommand::Moments => {
            let (p, eff) = moments::Params::from_config(cfg)?;
            (eff, (moments::run(&p)?, Vec::new()))
        }
        Subcommand::BrownianVerify => {
            let (p, eff) = brownian_verify::Params::from_config(cfg)?;
            (eff, (brownian_verify::run(&p, seed)?, Vec::new()))
        }
        Subcommand::Iam => {
            let (p, eff) = iam::Params::from_config(cfg)?;
            (eff, (iam::run(&p, seed)?, Vec::new()))
        }
        Subcommand::MlpTrain => {
            let (p, eff) = mlp_train::Params::from_config(cfg)?;
            (eff, mlp_train::run(&p, seed)?)
        }
        Subcommand::BiasedGd => {
            let (p, eff) = biased_gd::Params::from_config(cfg)?;
            (eff, (biased_gd::run(&p, seed)?, Vec::new()))
        }
    };
    Ok(Output {
        effective,
        artifacts,
        files,
    })
}

/// Writes every table as CSV (and SVG when `svg` is set), the extra files
/// and `effective.conf` into `dir`. Returns chart warnings.
pub fn write_output(out: &Output, dir: &Path, seed: u64, svg: bool) -> Result<Vec<String>, RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let provenance = Provenance::now(seed);
    let mut warnings = Vec::new();
    for a in &out.artifacts {
        report::emit_csv(&a.table, &provenance, &dir.join(format!("{}.csv", a.name)))?;
        if let (true, Some(c)) = (svg, &a.chart) {
            let ys: Vec<&str> = c.ys.iter().map(String::as_str).collect();
            let path = dir.join(format!("{}.svg", a.name));
            warnings.extend(report::emit_svg(&a.table, &c.x, &ys, &path, c.log_y)?);
        }
    }
    for (name, bytes) in &out.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(io(&path))?;
    }
    let path = dir.join("effective.conf");
    std::fs::write(&path, out.effective.to_string()).map_err(io(&path))?;
    Ok(warnings)
}

/// Order-preserving parallel map over job indices.
pub(crate) fn par_jobs<T, F>(count: usize, f: F) -> Result<Vec<T>, RunError>
where
    T: Send,
    F: Fn(usize) -> Result<T, RunError> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Comma-separated list of family tags accepted in configs.
pub(crate) const FAMILY_TAGS: [&str; 3] = ["gauss", "linrect", "exprect"];

pub(crate) fn check_family_range(
    r: &mut crate::config::Reader<'_>,
    key: &str,
    family: brownne_core::Family,
    ns: &[u32],
) {
    let (lo, hi) = (family.min_index(), family.max_index());
    if let Some(bad) = ns.iter().find(|&&n| n < lo || n > hi) {
        r.check(false, key, &format!("index {bad} outside [{lo}, {hi}] for {family}"));
    }
}
