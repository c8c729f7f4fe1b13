//! Acceptance gate for the whole workspace: eight end-to-end criteria, one
//! test each, covering the identity suites, sampler fidelity, analytic/Monte
//! Carlo agreement, the sharp `n^{1−2H}` rate, the limiting constant, the
//! remainder order, the envelope band, and byte-level determinism.
//!
//! Every tolerance is pinned here as a named constant; each test prints a
//! single `criterion N: PASS — …` line (visible with `--nocapture`) and
//! enforces its runtime budget.

use std::fs;
use std::process::Command;
use std::time::Instant;

use fracrate::analytic::{
    error_report, exact_expected_error, gaussian_relation_check, upper_bound_expected_error,
};
use fracrate::convex::ConvexSpec;
use fracrate::experiment::{mc_expected_error, rate_study, ratio_convergence};
use fracrate::models::CovarianceModel;
use fracrate::rng::derive_seed;
use fracrate::verify::{
    convex_gap_suite, gaussian_relation_suite, sampler_fidelity_suite, VerifyOptions,
};

/// Residual ceiling for the algebraic identity suites.
const IDENTITY_TOL: f64 = 1e-12;
/// Monte Carlo agreement band, in standard errors.
const Z_BOUND: f64 = 3.0;
/// Paths per Monte Carlo estimate in the oracle-equivalence matrix.
const MC_PATHS: usize = 100_000;
/// Base seed for the oracle-equivalence matrix; per-combination streams are
/// derived from it so one draw never influences another.
const MC_SEED_BASE: u64 = 20_260_815;
/// Slope window for models with an exact power-law variogram.
const SLOPE_TOL_EXACT: f64 = 0.05;
/// Slope window for envelope-only models.
const SLOPE_TOL_ENVELOPE: f64 = 0.08;
/// Relative deviation allowed between the scaled error and its limit.
const CONSTANT_REL_TOL: f64 = 0.10;
/// Max/min spread allowed for the `n^H`-scaled remainder.
const REMAINDER_SPREAD: f64 = 10.0;

fn budget(started: Instant, seconds: f64, label: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < seconds,
        "{label} took {elapsed:.1} s, budget {seconds} s"
    );
}

#[test]
fn criterion_1_identity_suites_hold_at_1e12() {
    let started = Instant::now();
    let opts = VerifyOptions::default(); // 10⁴ gap specs, 10⁵ relation triples
    let gap = convex_gap_suite(&opts).unwrap();
    assert!(gap.passed, "{}", gap.detail);
    assert!(gap.max_residual < IDENTITY_TOL, "{}", gap.detail);
    let relation = gaussian_relation_suite(&opts).unwrap();
    assert!(relation.passed, "{}", relation.detail);
    assert!(relation.max_residual < IDENTITY_TOL, "{}", relation.detail);
    // The worked example with a degenerate-looking variance pair: both sides
    // must equal 0.25 exactly to within the identity tolerance.
    let (lhs, rhs) = gaussian_relation_check::<f64>(1.0, 0.25, 0.5);
    assert!((lhs - 0.25).abs() < IDENTITY_TOL, "lhs {lhs}");
    assert!((rhs - 0.25).abs() < IDENTITY_TOL, "rhs {rhs}");
    budget(started, 5.0, "criterion 1");
    println!(
        "criterion 1: PASS — gap residual {:.3e} over {} specs, relation residual {:.3e} over {} triples",
        gap.max_residual, gap.trials, relation.max_residual, relation.trials
    );
}

#[test]
fn criterion_2_sampler_fidelity_at_full_size() {
    let started = Instant::now();
    let opts = VerifyOptions::default(); // fBm H=0.75, n=16, m=10⁵, seed 0
    let suite = sampler_fidelity_suite(&opts).unwrap();
    assert!(suite.passed, "{}", suite.detail);
    assert!(suite.max_residual < Z_BOUND, "{}", suite.detail);
    budget(started, 60.0, "criterion 2");
    println!(
        "criterion 2: PASS — {} ({} comparisons)",
        suite.detail, suite.trials
    );
}

#[test]
fn criterion_3_monte_carlo_matches_the_analytic_engine() {
    let started = Instant::now();
    let models: Vec<(&str, CovarianceModel<f64>)> = vec![
        ("fbm(0.60)", CovarianceModel::fbm(0.6).unwrap()),
        ("fbm(0.75)", CovarianceModel::fbm(0.75).unwrap()),
        (
            "stationary_powexp(0.75)",
            CovarianceModel::stationary_powexp(0.75).unwrap(),
        ),
        ("sub_fbm(0.75)", CovarianceModel::sub_fbm(0.75).unwrap()),
    ];
    let specs: Vec<(&str, ConvexSpec<f64>)> = vec![
        ("(x)+", ConvexSpec::positive_part()),
        ("|x-0.3|", ConvexSpec::absolute_deviation(0.3)),
    ];
    let mut combo = 0u64;
    let mut worst_z = 0.0f64;
    for (model_name, model) in &models {
        for (spec_name, spec) in &specs {
            for n in [2usize, 4, 16] {
                let exact = exact_expected_error(model, n, spec).unwrap();
                let est =
                    mc_expected_error(model, n, spec, MC_PATHS, derive_seed(MC_SEED_BASE, combo))
                        .unwrap();
                let z = (est.mean - exact).abs() / est.se;
                assert!(
                    z <= Z_BOUND,
                    "{model_name} {spec_name} n={n}: z = {z:.2} (mc {} vs exact {exact})",
                    est.mean
                );
                worst_z = worst_z.max(z);
                combo += 1;
            }
        }
    }
    // Signed specs only admit an upper bound; the Monte Carlo mean must sit
    // below it (within sampling noise).
    let signed = ConvexSpec::new(0.0, 0.0, vec![(0.0, 1.0), (0.3, -0.5)], true).unwrap();
    let model = CovarianceModel::fbm(0.75).unwrap();
    for n in [2usize, 4, 16] {
        let bound = upper_bound_expected_error(&model, n, &signed).unwrap();
        let est = mc_expected_error(
            &model,
            n,
            &signed,
            MC_PATHS,
            derive_seed(MC_SEED_BASE, 100 + n as u64),
        )
        .unwrap();
        assert!(
            est.mean <= bound + Z_BOUND * est.se,
            "signed n={n}: mc {} exceeds bound {bound} + 3·se",
            est.mean
        );
    }
    budget(started, 600.0, "criterion 3");
    println!(
        "criterion 3: PASS — 24 convex combinations within 3·SE (worst z = {worst_z:.2}), signed bound respected at n ∈ {{2,4,16}}"
    );
}

#[test]
fn criterion_4_log_log_slopes_match_the_sharp_rate() {
    let started = Instant::now();
    let n_list: Vec<usize> = (4..=14).map(|p| 1usize << p).collect();
    let spec = ConvexSpec::absolute_deviation(0.3);
    let cases: Vec<(&str, CovarianceModel<f64>, f64)> = vec![
        ("fbm(0.60)", CovarianceModel::fbm(0.6).unwrap(), SLOPE_TOL_EXACT),
        ("fbm(0.75)", CovarianceModel::fbm(0.75).unwrap(), SLOPE_TOL_EXACT),
        ("fbm(0.90)", CovarianceModel::fbm(0.9).unwrap(), SLOPE_TOL_EXACT),
        (
            "stationary_powexp(0.75)",
            CovarianceModel::stationary_powexp(0.75).unwrap(),
            SLOPE_TOL_EXACT,
        ),
        (
            "sub_fbm(0.75)",
            CovarianceModel::sub_fbm(0.75).unwrap(),
            SLOPE_TOL_ENVELOPE,
        ),
        (
            "bifbm(0.75, 0.80)",
            CovarianceModel::bifbm(0.75, 0.8).unwrap(),
            SLOPE_TOL_ENVELOPE,
        ),
    ];
    let mut summary = Vec::new();
    for (name, model, tol) in &cases {
        let study = rate_study(model, &spec, &n_list, None).unwrap();
        let dev = study.fit.slope - study.expected_slope;
        assert!(
            dev.abs() <= *tol,
            "{name}: slope {} vs expected {} (tol {tol})",
            study.fit.slope,
            study.expected_slope
        );
        summary.push(format!("{name} {dev:+.4}"));
    }
    budget(started, 120.0, "criterion 4");
    println!(
        "criterion 4: PASS — slope deviations over n = 2⁴…2¹⁴: {}",
        summary.join(", ")
    );
}

#[test]
fn criterion_5_scaled_errors_approach_the_limiting_constant() {
    let started = Instant::now();
    let spec = ConvexSpec::positive_part();

    // fBm H = 3/4: the limit is ½·φ(0)/(1−H) = √(2/π).
    let model = CovarianceModel::fbm(0.75).unwrap();
    let target = 0.7978845608028654_f64;
    let ratios = ratio_convergence(&model, &spec, &[1usize << 12, 1usize << 16]).unwrap();
    let dev_coarse = (ratios[0].1 - target).abs();
    let dev_fine = (ratios[1].1 - target).abs();
    assert!(
        dev_fine < CONSTANT_REL_TOL * target,
        "fbm ratio at 2^16 = {} vs {target}",
        ratios[1].1
    );
    assert!(
        dev_fine < dev_coarse,
        "deviation must shrink: 2^12 → {dev_coarse}, 2^16 → {dev_fine}"
    );

    // Stationary model: unit variance collapses the constant to σ²Σwᵢφ(aᵢ),
    // here 2·½·φ(0) = φ(0).
    let stationary = CovarianceModel::stationary_powexp(0.75).unwrap();
    let stationary_target = 0.39894228040143268_f64;
    let ratios = ratio_convergence(&stationary, &spec, &[1usize << 16]).unwrap();
    let dev = (ratios[0].1 - stationary_target).abs();
    assert!(
        dev < CONSTANT_REL_TOL * stationary_target,
        "stationary ratio at 2^16 = {} vs {stationary_target}",
        ratios[0].1
    );
    budget(started, 120.0, "criterion 5");
    println!(
        "criterion 5: PASS — fbm ratio dev {:.4} at 2¹⁶ (vs {:.4} at 2¹²), stationary dev {:.2e}",
        dev_fine, dev_coarse, dev
    );
}

#[test]
fn criterion_6_remainder_is_one_hurst_order_smaller() {
    let started = Instant::now();
    let model = CovarianceModel::fbm(0.75).unwrap();
    let spec = ConvexSpec::positive_part();
    let h = 0.75_f64;
    let mut scaled = Vec::new();
    for p in 6..=14 {
        let n = 1usize << p;
        let report = error_report(&model, n, &spec).unwrap();
        scaled.push(report.remainder * (n as f64).powf(h));
    }
    let same_sign = scaled.iter().all(|r| *r < 0.0) || scaled.iter().all(|r| *r > 0.0);
    assert!(same_sign, "scaled remainders change sign: {scaled:?}");
    let abs: Vec<f64> = scaled.iter().map(|r| r.abs()).collect();
    let max = abs.iter().cloned().fold(f64::MIN, f64::max);
    let min = abs.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        max / min < REMAINDER_SPREAD,
        "remainder · n^H spread {max}/{min} over n = 2⁶…2¹⁴"
    );
    budget(started, 60.0, "criterion 6");
    println!(
        "criterion 6: PASS — remainder · n^H stays within [{min:.4}, {max:.4}] (spread {:.3})",
        max / min
    );
}

#[test]
fn criterion_7_envelope_models_land_inside_the_band() {
    let started = Instant::now();
    let spec = ConvexSpec::positive_part();
    let n_list = [1usize << 10, 1 << 12, 1 << 14];
    let cases: Vec<(&str, CovarianceModel<f64>)> = vec![
        ("sub_fbm(0.75)", CovarianceModel::sub_fbm(0.75).unwrap()),
        ("bifbm(0.75, 0.80)", CovarianceModel::bifbm(0.75, 0.8).unwrap()),
    ];
    let mut summary = Vec::new();
    for (name, model) in &cases {
        let study = rate_study(model, &spec, &n_list, None).unwrap();
        let band = study.envelope.expect("envelope-only model reports a band");
        let ratio = study.reports.last().unwrap().ratio;
        assert!(
            band.lower <= ratio && ratio <= band.upper,
            "{name}: ratio {ratio} outside [{}, {}]",
            band.lower,
            band.upper
        );
        summary.push(format!(
            "{name} ratio {ratio:.4} ∈ [{:.4}, {:.4}]",
            band.lower, band.upper
        ));
    }
    budget(started, 120.0, "criterion 7");
    println!("criterion 7: PASS — {}", summary.join("; "));
}

#[test]
fn criterion_8_reruns_are_byte_identical() {
    let started = Instant::now();
    let dir = tempfile::TempDir::new().unwrap();
    let rate_config = dir.path().join("rate.json");
    fs::write(
        &rate_config,
        r#"{
  "command": "rate",
  "model": {"kind": "fbm", "h": 0.75},
  "spec": {"beta": 0.5, "atoms": [[0.0, 0.5]]},
  "n_list": [16, 64, 256],
  "mc": {"m": 20000, "seed": 3}
}"#,
    )
    .unwrap();
    let paths_config = dir.path().join("paths.json");
    fs::write(
        &paths_config,
        r#"{
  "command": "paths",
  "model": {"kind": "fbm", "h": 0.75},
  "n": 16,
  "m": 50,
  "seed": 3,
  "sampler": "circulant"
}"#,
    )
    .unwrap();
    let mut compared = 0;
    for (config, files) in [
        (&rate_config, &["rate.csv", "summary.json"][..]),
        (&paths_config, &["paths.csv"][..]),
    ] {
        let first = dir.path().join("first");
        let second = dir.path().join("second");
        // Different thread counts on purpose: the output contract is
        // deterministic in the seed alone.
        for (out, threads) in [(&first, "2"), (&second, "4")] {
            let status = Command::new(env!("CARGO_BIN_EXE_fracrate"))
                .arg("--config")
                .arg(config)
                .arg("--out")
                .arg(out)
                .arg("--threads")
                .arg(threads)
                .status()
                .unwrap();
            assert!(status.success());
        }
        for file in files {
            let a = fs::read(first.join(file)).unwrap();
            let b = fs::read(second.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between identically-seeded runs");
            compared += 1;
        }
    }
    budget(started, 120.0, "criterion 8");
    println!("criterion 8: PASS — {compared} output files byte-identical across reruns");
}
