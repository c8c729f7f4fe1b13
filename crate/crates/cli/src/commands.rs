//! The four subcommands. Each validates its slice of the config, runs the
//! corresponding library pipeline, and writes files with fixed schemas:
//! `rate` → rate.csv + summary.json, `constant` → constant.json, `verify` →
//! verify.json, `paths` → paths.csv.

use std::path::Path;

use fracrate::analytic::{leading_constant_detailed, QUAD_REL_TOL};
use fracrate::experiment::rate_study;
use fracrate::sampler::{sample, SamplerKind};
use fracrate::verify::run_all;
use serde_json::json;

use crate::config::{parse_sampler, CliError, RunConfig, VerifyConfig};
use crate::output::{format_float, write_json, write_text};

/// Largest `m·(n+1)` a `paths` dump may produce.
const MAX_DUMP_VALUES: u128 = 100_000_000;

/// One resolved invocation: the parsed config plus everything the flags can
/// override.
pub struct Invocation<'a> {
    pub config: &'a RunConfig,
    /// Directory of the config file; relative custom-table paths resolve
    /// against it.
    pub config_dir: &'a Path,
    pub out_dir: &'a Path,
    /// `--seed`, overriding both the config seed and the MC seed.
    pub seed_override: Option<u64>,
}

impl Invocation<'_> {
    fn model(&self) -> Result<fracrate::Model64, CliError> {
        self.config
            .model
            .as_ref()
            .ok_or_else(|| missing("model", &self.config.command))?
            .build(self.config_dir)
    }

    fn spec(&self) -> Result<fracrate::Spec64, CliError> {
        self.config
            .spec
            .as_ref()
            .ok_or_else(|| missing("spec", &self.config.command))?
            .build()
    }

    fn seed(&self) -> u64 {
        self.seed_override.or(self.config.seed).unwrap_or(0)
    }
}

fn missing(field: &str, command: &str) -> CliError {
    CliError::Config(format!("command \"{command}\" requires a `{field}` block"))
}

/// Runs the command named in the config and returns the process exit code.
pub fn dispatch(inv: &Invocation) -> Result<i32, CliError> {
    match inv.config.command.as_str() {
        "rate" => cmd_rate(inv).map(|()| 0),
        "constant" => cmd_constant(inv).map(|()| 0),
        "verify" => cmd_verify(inv),
        "paths" => cmd_paths(inv).map(|()| 0),
        other => Err(CliError::Config(format!(
            "unknown command `{other}` (expected \"rate\", \"constant\", \"verify\", or \"paths\")"
        ))),
    }
}

/// Grid-size sweep: per-`n` analytic error, leading term, remainder, and
/// scaled ratio (plus Monte Carlo columns when an `mc` block is present) in
/// `rate.csv`; the log-log fit and limiting constant in `summary.json`.
fn cmd_rate(inv: &Invocation) -> Result<(), CliError> {
    let model = inv.model()?;
    let spec = inv.spec()?;
    let n_list = inv
        .config
        .n_list
        .as_ref()
        .ok_or_else(|| missing("n_list", "rate"))?;
    let mc = inv
        .config
        .mc
        .as_ref()
        .map(|mc| (mc.m, inv.seed_override.unwrap_or(mc.seed)));
    let study = rate_study(&model, &spec, n_list, mc)?;

    let mut csv = String::from("n,analytic_error,leading_term,remainder,ratio,mc_error,mc_se\n");
    for report in &study.reports {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            report.n,
            format_float(report.analytic_error),
            format_float(report.leading_term),
            format_float(report.remainder),
            format_float(report.ratio),
            opt(report.mc_error),
            opt(report.mc_se),
        ));
    }
    write_text(&inv.out_dir.join("rate.csv"), &csv)?;

    let constant = match &study.envelope {
        Some(band) => json!({
            "lower": band.lower,
            "sigma_minus2": band.sigma_minus2,
            "sigma_plus2": band.sigma_plus2,
            "upper": band.upper,
        }),
        None => json!(study.constant),
    };
    let summary = json!({
        "constant": constant,
        "expected_slope": study.expected_slope,
        "intercept": study.fit.intercept,
        "r_squared": study.fit.r_squared,
        "slope": study.fit.slope,
    });
    write_json(&inv.out_dir.join("summary.json"), &summary)
}

/// Limiting constant: per-atom `C(aᵢ)` with the quadrature's achieved error,
/// and the aggregate `σ² Σᵢ wᵢ C(aᵢ)` (absolute weights for signed specs,
/// where only the bound direction is meaningful).
fn cmd_constant(inv: &Invocation) -> Result<(), CliError> {
    let model = inv.model()?;
    let spec = inv.spec()?;
    let sigma2 = model.sigma2();
    let mut aggregate = 0.0;
    let mut atoms = Vec::new();
    for &(level, weight) in spec.atoms() {
        let (constant, quad_error) = leading_constant_detailed(&model, level)?;
        let w = if spec.signed() { weight.abs() } else { weight };
        aggregate += w * constant;
        atoms.push(json!({
            "constant": constant,
            "level": level,
            "quad_error": quad_error,
            "weight": weight,
        }));
    }
    let value = json!({
        "aggregate": sigma2 * aggregate,
        "atoms": atoms,
        "quad_rel_tol": QUAD_REL_TOL,
        "sigma2": sigma2,
    });
    write_json(&inv.out_dir.join("constant.json"), &value)
}

/// Runs the identity and fidelity suites, writes `verify.json`, and maps the
/// outcome to the exit code: 0 if every suite passed, 1 otherwise. The seed
/// defaults to 0 and is recorded in the report.
fn cmd_verify(inv: &Invocation) -> Result<i32, CliError> {
    let defaults = VerifyConfig::default();
    let opts = inv
        .config
        .verify
        .as_ref()
        .unwrap_or(&defaults)
        .build(inv.seed());
    let report = run_all(&opts)?;
    let suites: Vec<_> = report
        .suites
        .iter()
        .map(|suite| {
            json!({
                "detail": suite.detail,
                "max_residual": suite.max_residual,
                "name": suite.name,
                "passed": suite.passed,
                "trials": suite.trials,
            })
        })
        .collect();
    let value = json!({
        "all_passed": report.all_passed(),
        "seed": report.seed,
        "suites": suites,
    });
    write_json(&inv.out_dir.join("verify.json"), &value)?;
    if report.all_passed() {
        Ok(0)
    } else {
        let failed: Vec<&str> = report
            .suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name)
            .collect();
        eprintln!("verification failed: {}", failed.join(", "));
        Ok(1)
    }
}

/// Dumps `m` sampled paths as `path_id,t,X` rows, one per grid point.
fn cmd_paths(inv: &Invocation) -> Result<(), CliError> {
    let model = inv.model()?;
    let n = inv.config.n.ok_or_else(|| missing("n", "paths"))?;
    let m = inv.config.m.ok_or_else(|| missing("m", "paths"))?;
    let values = (m as u128) * (n as u128 + 1);
    if values > MAX_DUMP_VALUES {
        return Err(CliError::Config(format!(
            "refusing to dump {values} values (m·(n+1) must not exceed {MAX_DUMP_VALUES})"
        )));
    }
    let kind = match inv.config.sampler.as_deref() {
        Some(name) => parse_sampler(name)?,
        None if model.fbm_hurst().is_some() => SamplerKind::Circulant,
        None => SamplerKind::Cholesky,
    };
    let batch = sample(&model, n, m, inv.seed(), kind)?;
    let times = batch.times();
    let mut csv = String::from("path_id,t,X\n");
    for p in 0..batch.m {
        let path = batch.path(p);
        for (t, x) in times.iter().zip(path) {
            csv.push_str(&format!("{p},{},{}\n", format_float(*t), format_float(*x)));
        }
    }
    write_text(&inv.out_dir.join("paths.csv"), &csv)
}
