//! Config to artifacts: parse, resolve, execute on a sized thread pool,
//! then write everything with a manifest.

use std::path::{Path, PathBuf};

use crate::artifacts::{Artifacts, Manifest};
use crate::config::{self, ResolvedConfig, Scale, Settings};
use crate::error::CliError;
use crate::experiments::{bounds_report, clt, decay, mle};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub paper_scale: bool,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

/// Reads and validates a config without running anything.
pub fn load(path: &Path, opts: &RunOptions) -> Result<ResolvedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let scale = if opts.paper_scale {
        Scale::Paper
    } else {
        Scale::Desk
    };
    config::parse(&text)?.resolve(scale, opts.seed, opts.out.clone())
}

/// Runs a resolved experiment and returns its artifacts, writing nothing.
pub fn execute(cfg: &ResolvedConfig, threads: Option<usize>) -> Result<Artifacts, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start thread pool: {e}")))?;
    let seed = cfg.seed;
    let mut a = pool.install(|| -> Result<Artifacts, CliError> {
        Ok(match &cfg.experiment {
            Settings::MleOu(s) | Settings::MleBistable(s) | Settings::MleInteraction(s) => {
                mle::run_mle(s, seed)?.artifacts()
            }
            Settings::CltTorus(s) => clt::run_clt(s, seed)?.artifacts()?,
            Settings::EntropyDecayLine(s) => decay::run_line_decay(s)?.artifacts()?,
            Settings::EntropyDecayTorus(s) => decay::run_torus_decay(s)?.artifacts()?,
            Settings::BoundsReport(s) => {
                let mut a = Artifacts::new();
                a.add_json("bounds_report.json", &bounds_report::report_bounds(s)?);
                a
            }
        })
    })?;
    a.add_json("config.resolved.json", cfg);
    Ok(a)
}

/// Full pipeline behind `mflin run`.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<(PathBuf, Manifest), CliError> {
    let cfg = load(config_path, opts)?;
    let artifacts = execute(&cfg, opts.threads)?;
    let manifest = artifacts.manifest(cfg.experiment.name(), cfg.seed);
    artifacts.write_to(&cfg.output_dir, &manifest)?;
    Ok((cfg.output_dir, manifest))
}
