//! JSON run configuration. A single file describes the command, the model,
//! the integrand, and the experiment sizes, so every result can be traced to
//! an auditable input; unknown keys are rejected rather than ignored.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use fracrate::convex::ConvexSpec;
use fracrate::models::CovarianceModel;
use fracrate::sampler::SamplerKind;
use fracrate::verify::VerifyOptions;
use fracrate::{Model64, Spec64};
use serde::Deserialize;

/// CLI failure carrying its process exit code: 2 for configuration and
/// validation problems, 3 for numerical failures. (Exit 1 is reserved for a
/// verification run whose suites fail; that path is not an error.)
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(fracrate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(err) => match err {
                fracrate::Error::Parameter { .. }
                | fracrate::Error::Mode { .. }
                | fracrate::Error::Fit { .. } => 2,
                fracrate::Error::NotPositiveDefinite { .. }
                | fracrate::Error::Numerical { .. }
                | fracrate::Error::Internal(_) => 3,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(message) => write!(f, "{message}"),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl From<fracrate::Error> for CliError {
    fn from(err: fracrate::Error) -> Self {
        CliError::Core(err)
    }
}

/// Everything the binary reads from `--config`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// One of `"rate"`, `"constant"`, `"verify"`, `"paths"`.
    pub command: String,
    /// Covariance model; required by every command except `verify`.
    pub model: Option<ModelConfig>,
    /// Integrand; required by `rate` and `constant`.
    pub spec: Option<SpecConfig>,
    /// Grid sizes for `rate`, strictly increasing, at least three.
    pub n_list: Option<Vec<usize>>,
    /// Optional Monte Carlo cross-check for `rate`.
    pub mc: Option<McConfig>,
    /// Seed for `verify` and `paths`; defaults to 0.
    pub seed: Option<u64>,
    /// Grid size for `paths`.
    pub n: Option<usize>,
    /// Path count for `paths`.
    pub m: Option<usize>,
    /// Backend for `paths`: `"cholesky"`, `"circulant"`, or omitted to pick
    /// automatically (circulant for plain fBm, dense factor otherwise).
    pub sampler: Option<String>,
    /// Where output files go; the `--out` flag overrides this, and the
    /// current directory is the fallback.
    pub out_dir: Option<PathBuf>,
    /// Suite-size overrides for `verify`.
    pub verify: Option<VerifyConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|err| {
            CliError::Config(format!("cannot read config {}: {err}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|err| {
            CliError::Config(format!("invalid config {}: {err}", path.display()))
        })
    }
}

/// Model block, dispatched on `"kind"`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Fbm { h: f64 },
    MultiMixedFbm { weights: Vec<f64>, hs: Vec<f64> },
    SubFbm { h: f64 },
    Bifbm { h: f64, k: f64 },
    StationaryPowexp { h: f64 },
    /// Covariance table: a dense lower-triangular matrix in a CSV file (row
    /// `k` holds `R(t_k, t_0..t_k)` for `t_j = j/n`, so `n + 1` rows), with
    /// the rate parameters declared explicitly.
    Custom { csv: PathBuf, n: usize, h_eff: f64, sigma2: f64 },
}

impl ModelConfig {
    /// Builds the model; relative custom-table paths resolve against the
    /// config file's directory.
    pub fn build(&self, config_dir: &Path) -> Result<Model64, CliError> {
        Ok(match self {
            ModelConfig::Fbm { h } => CovarianceModel::fbm(*h)?,
            ModelConfig::MultiMixedFbm { weights, hs } => {
                CovarianceModel::multi_mixed_fbm(weights.clone(), hs.clone())?
            }
            ModelConfig::SubFbm { h } => CovarianceModel::sub_fbm(*h)?,
            ModelConfig::Bifbm { h, k } => CovarianceModel::bifbm(*h, *k)?,
            ModelConfig::StationaryPowexp { h } => CovarianceModel::stationary_powexp(*h)?,
            ModelConfig::Custom { csv, n, h_eff, sigma2 } => {
                let path = if csv.is_relative() { config_dir.join(csv) } else { csv.clone() };
                let rows = load_lower_triangular(&path)?;
                if rows.len() != n + 1 {
                    return Err(CliError::Config(format!(
                        "custom table {} has {} rows but n = {n} needs {} (grid t_0..t_n)",
                        path.display(),
                        rows.len(),
                        n + 1
                    )));
                }
                CovarianceModel::custom(rows, *h_eff, *sigma2)?
            }
        })
    }
}

/// Integrand block, matching the library's atomic-measure representation.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    /// `(level, weight)` pairs.
    pub atoms: Vec<[f64; 2]>,
    #[serde(default)]
    pub signed: bool,
}

impl SpecConfig {
    pub fn build(&self) -> Result<Spec64, CliError> {
        let atoms = self.atoms.iter().map(|&[a, w]| (a, w)).collect();
        Ok(ConvexSpec::new(self.alpha, self.beta, atoms, self.signed)?)
    }
}

/// Monte Carlo block for the `rate` command.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub m: usize,
    pub seed: u64,
}

/// Optional size overrides for the `verify` command; anything omitted keeps
/// the library default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub gap_trials: Option<usize>,
    pub relation_trials: Option<usize>,
    pub fidelity_paths: Option<usize>,
    pub fidelity_n: Option<usize>,
}

impl VerifyConfig {
    pub fn build(&self, seed: u64) -> VerifyOptions {
        let mut opts = VerifyOptions { seed, ..VerifyOptions::default() };
        if let Some(v) = self.gap_trials {
            opts.gap_trials = v;
        }
        if let Some(v) = self.relation_trials {
            opts.relation_trials = v;
        }
        if let Some(v) = self.fidelity_paths {
            opts.fidelity_paths = v;
        }
        if let Some(v) = self.fidelity_n {
            opts.fidelity_n = v;
        }
        opts
    }
}

/// Parses the `sampler` config field.
pub fn parse_sampler(name: &str) -> Result<SamplerKind, CliError> {
    match name {
        "cholesky" => Ok(SamplerKind::Cholesky),
        "circulant" => Ok(SamplerKind::Circulant),
        other => Err(CliError::Config(format!(
            "unknown sampler `{other}` (expected \"cholesky\" or \"circulant\")"
        ))),
    }
}

fn load_lower_triangular(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path).map_err(|err| {
        CliError::Config(format!("cannot read covariance table {}: {err}", path.display()))
    })?;
    let mut rows = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|err| {
                    CliError::Config(format!(
                        "covariance table {} line {}: bad number `{}`: {err}",
                        path.display(),
                        index + 1,
                        cell.trim()
                    ))
                })
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        rows.push(row);
    }
    Ok(rows)
}
