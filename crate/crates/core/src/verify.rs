//! Self-contained verification suites: structural identities checked on
//! randomized inputs, and distributional fidelity of the two samplers
//! against the exact grid covariance. Each suite returns a pass/fail result
//! with its worst observed residual, so a report reads like a checklist.

use crate::analytic::{gaussian_relation_check, normal_tail};
use crate::convex::ConvexSpec;
use crate::error::Result;
use crate::models::{grid_time, CovarianceModel};
use crate::rng::{derive_seed, CounterRng};
use crate::sampler::{self, PathBatch, SamplerKind};

/// Per-suite stream tags, so the top-level seed spawns decorrelated streams.
const TAG_GAP: u64 = 1;
const TAG_RELATION: u64 = 2;
const TAG_FIDELITY_CHOLESKY: u64 = 3;
const TAG_FIDELITY_CIRCULANT: u64 = 4;

/// Identity residuals at double precision must clear this bar.
const IDENTITY_TOL: f64 = 1e-12;

/// Entrywise z-score bound for the distributional checks.
const Z_BOUND: f64 = 3.0;

/// 1% asymptotic critical value of the Kolmogorov–Smirnov statistic,
/// scaled by `√m`.
const KS_CRITICAL_SCALED: f64 = 1.628;

/// Sizes and seed for one verification run.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Random spec/point pairs for the convexity-gap identity.
    pub gap_trials: usize,
    /// Random variance triples for the variance–regression identity.
    pub relation_trials: usize,
    /// Paths per sampler in the fidelity suite.
    pub fidelity_paths: usize,
    /// Grid size of the fidelity suite.
    pub fidelity_n: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            gap_trials: 10_000,
            relation_trials: 100_000,
            fidelity_paths: 100_000,
            fidelity_n: 16,
            seed: 0,
        }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst residual in the suite's own normalized units (relative error
    /// for identities, |z| for distributional checks).
    pub max_residual: f64,
    /// Number of individual checks performed.
    pub trials: usize,
    /// Human-readable summary including the threshold applied.
    pub detail: String,
}

/// Results of all suites for one seed.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

fn builtin_models() -> Vec<CovarianceModel<f64>> {
    vec![
        CovarianceModel::fbm(0.6).expect("builtin"),
        CovarianceModel::fbm(0.75).expect("builtin"),
        CovarianceModel::fbm(0.9).expect("builtin"),
        CovarianceModel::multi_mixed_fbm(vec![0.6_f64.sqrt(), 0.4_f64.sqrt()], vec![0.75, 0.9])
            .expect("builtin"),
        CovarianceModel::sub_fbm(0.75).expect("builtin"),
        CovarianceModel::bifbm(0.75, 0.8).expect("builtin"),
        CovarianceModel::stationary_powexp(0.75).expect("builtin"),
    ]
}

/// Checks that the two representations of the convexity gap agree and that
/// the gap is non-negative, over randomized convex specs and points.
pub fn convex_gap_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut rng = CounterRng::new(opts.seed, TAG_GAP);
    let mut max_residual = 0.0_f64;
    let mut min_gap = f64::INFINITY;
    let mut passed = true;
    for _ in 0..opts.gap_trials {
        let atom_count = 1 + (rng.next_u64() % 3) as usize;
        let atoms: Vec<(f64, f64)> = (0..atom_count)
            .map(|_| (rng.next_normal(), 0.05 + rng.next_uniform()))
            .collect();
        let spec = ConvexSpec::new(rng.next_normal(), rng.next_normal(), atoms, false)?;
        let x = 3.0 * rng.next_normal();
        let y = 3.0 * rng.next_normal();
        match spec.convexity_gap(x, y) {
            Err(_) => {
                passed = false;
                max_residual = f64::INFINITY;
            }
            Ok(gap) => {
                let direct = spec.psi(x) - spec.psi(y) - spec.psi_prime_left(y) * (x - y);
                let scale = 1.0 + direct.abs() + gap.abs() + x.abs() + y.abs();
                let residual = (direct - gap).abs() / scale;
                max_residual = max_residual.max(residual);
                min_gap = min_gap.min(gap);
                if residual > IDENTITY_TOL || gap < -IDENTITY_TOL {
                    passed = false;
                }
            }
        }
    }
    Ok(SuiteResult {
        name: "convex_gap_identity",
        passed,
        max_residual,
        trials: opts.gap_trials,
        detail: format!(
            "max relative representation residual {max_residual:.3e} (tolerance {IDENTITY_TOL:.0e}), \
             smallest gap {min_gap:.3e}"
        ),
    })
}

/// Checks the variance–regression identity on random triples and re-derives
/// it along the grids of every built-in model (tying the variogram
/// rearrangements to the raw covariance forms).
pub fn gaussian_relation_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut rng = CounterRng::new(opts.seed, TAG_RELATION);
    let mut max_residual = 0.0_f64;
    let mut trials = 0;
    for _ in 0..opts.relation_trials {
        let v_prev = 0.05 + 4.0 * rng.next_uniform();
        let v_curr = 0.05 + 4.0 * rng.next_uniform();
        let span = v_prev.sqrt() + v_curr.sqrt();
        let theta = rng.next_uniform() * span * span;
        let (lhs, rhs) = gaussian_relation_check(v_curr, v_prev, theta);
        let residual = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
        max_residual = max_residual.max(residual);
        trials += 1;
    }
    // Worked example with a hand value on both sides.
    let (lhs, rhs) = gaussian_relation_check::<f64>(1.0, 0.25, 0.5);
    max_residual = max_residual.max((lhs - 0.25).abs()).max((rhs - 0.25).abs());
    trials += 1;
    // Grid sweep: the model's own regression coefficient against the
    // variogram-based right-hand side.
    let n = 64;
    for model in builtin_models() {
        for k in 1..=n {
            let t_prev = grid_time::<f64>(k - 1, n);
            let t_curr = grid_time::<f64>(k, n);
            let v_prev = model.variance(t_prev)?;
            if v_prev == 0.0 {
                continue;
            }
            let v_curr = model.variance(t_curr)?;
            let gamma = model.covariance(t_curr, t_prev)? / v_prev;
            let lhs = v_curr.sqrt() - gamma * v_prev.sqrt();
            let theta = model.variogram(t_curr, t_prev)?;
            let diff = v_curr.sqrt() - v_prev.sqrt();
            let rhs = -diff * diff / (2.0 * v_prev.sqrt()) + theta / (2.0 * v_prev.sqrt());
            let residual = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
            max_residual = max_residual.max(residual);
            trials += 1;
        }
    }
    Ok(SuiteResult {
        name: "gaussian_relation",
        passed: max_residual <= IDENTITY_TOL,
        max_residual,
        trials,
        detail: format!(
            "max relative residual {max_residual:.3e} over random triples, the worked \
             example, and all built-in model grids (tolerance {IDENTITY_TOL:.0e})"
        ),
    })
}

/// Checks that the level-dependent tail terms of the per-step expectations
/// telescope to their boundary values across every built-in model.
pub fn telescoping_suite() -> Result<SuiteResult> {
    let n = 64;
    let levels = [-1.5, -0.3, 0.0, 0.7, 2.0];
    let mut max_residual = 0.0_f64;
    let mut trials = 0;
    for model in builtin_models() {
        for &a in &levels {
            let mut total = 0.0_f64;
            let v_first = model.variance(grid_time(0, n))?;
            for k in 1..=n {
                let v_prev = model.variance(grid_time(k - 1, n))?;
                let v_curr = model.variance(grid_time(k, n))?;
                let tail_prev = if v_prev == 0.0 {
                    if a > 0.0 {
                        0.0
                    } else if a < 0.0 {
                        1.0
                    } else {
                        0.5
                    }
                } else {
                    normal_tail(a / v_prev.sqrt())
                };
                total += a * (tail_prev - normal_tail(a / v_curr.sqrt()));
            }
            let boundary_first = if v_first == 0.0 {
                if a > 0.0 {
                    0.0
                } else if a < 0.0 {
                    1.0
                } else {
                    0.5
                }
            } else {
                normal_tail(a / v_first.sqrt())
            };
            let v_last = model.variance(1.0)?;
            let expected = a * (boundary_first - normal_tail(a / v_last.sqrt()));
            let residual = (total - expected).abs() / expected.abs().max(1.0);
            max_residual = max_residual.max(residual);
            trials += 1;
        }
    }
    Ok(SuiteResult {
        name: "telescoping",
        passed: max_residual <= IDENTITY_TOL,
        max_residual,
        trials,
        detail: format!(
            "max relative boundary residual {max_residual:.3e} over {} models × {} levels \
             at n = {n} (tolerance {IDENTITY_TOL:.0e})",
            builtin_models().len(),
            levels.len()
        ),
    })
}

/// Upper-triangular empirical second moments over the strictly positive
/// grid times.
fn empirical_covariance(batch: &PathBatch<f64>) -> Vec<f64> {
    let n = batch.n;
    let mut acc = vec![0.0_f64; n * n];
    for i in 0..batch.m {
        let path = &batch.path(i)[1..];
        for j in 0..n {
            let xj = path[j];
            for k in j..n {
                acc[j * n + k] += xj * path[k];
            }
        }
    }
    let mf = batch.m as f64;
    for value in acc.iter_mut() {
        *value /= mf;
    }
    acc
}

/// Kolmogorov–Smirnov statistic of the batch's time-1 marginal against the
/// standard normal, scaled by `√m`.
fn ks_statistic_scaled(batch: &PathBatch<f64>) -> f64 {
    let n = batch.n;
    let mut values: Vec<f64> = (0..batch.m).map(|i| batch.path(i)[n]).collect();
    values.sort_unstable_by(f64::total_cmp);
    let m = values.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in values.iter().enumerate() {
        let cdf = 1.0 - normal_tail(x);
        let below = i as f64 / m;
        let above = (i + 1) as f64 / m;
        d = d.max((cdf - below).abs()).max((above - cdf).abs());
    }
    d * m.sqrt()
}

/// Distributional fidelity of both samplers for fBm H = 3/4: entrywise
/// covariance z-scores, cross-sampler marginal variances, and a KS test of
/// the time-1 marginal.
pub fn sampler_fidelity_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let model = CovarianceModel::fbm(0.75)?;
    let n = opts.fidelity_n;
    let m = opts.fidelity_paths;
    let cholesky = sampler::sample_cholesky(
        &model,
        n,
        m,
        derive_seed(opts.seed, TAG_FIDELITY_CHOLESKY),
    )?;
    let circulant = sampler::sample(
        &model,
        n,
        m,
        derive_seed(opts.seed, TAG_FIDELITY_CIRCULANT),
        SamplerKind::Circulant,
    )?;

    let mut theory = vec![0.0_f64; n * n];
    for j in 0..n {
        for k in j..n {
            theory[j * n + k] =
                model.covariance(grid_time(j + 1, n), grid_time(k + 1, n))?;
        }
    }

    let mf = m as f64;
    let mut max_z = 0.0_f64;
    let mut trials = 0;
    let mut emp_pair = Vec::with_capacity(2);
    for batch in [&cholesky, &circulant] {
        let emp = empirical_covariance(batch);
        for j in 0..n {
            for k in j..n {
                let r = theory[j * n + k];
                // Fourth-moment (Wick) variance of a Gaussian product.
                let se = ((theory[j * n + j] * theory[k * n + k] + r * r) / mf).sqrt();
                let z = (emp[j * n + k] - r).abs() / se;
                max_z = max_z.max(z);
                trials += 1;
            }
        }
        emp_pair.push(emp);
    }

    // Cross-sampler marginal variances: each estimate has variance 2V²/m,
    // so their difference has standard error 2V/√m.
    for j in 0..n {
        let v = theory[j * n + j];
        let se = 2.0 * v / mf.sqrt();
        let z = (emp_pair[0][j * n + j] - emp_pair[1][j * n + j]).abs() / se;
        max_z = max_z.max(z);
        trials += 1;
    }

    let ks_cholesky = ks_statistic_scaled(&cholesky);
    let ks_circulant = ks_statistic_scaled(&circulant);
    let ks_worst = ks_cholesky.max(ks_circulant);
    trials += 2;

    let passed = max_z <= Z_BOUND && ks_worst <= KS_CRITICAL_SCALED;
    Ok(SuiteResult {
        name: "sampler_fidelity",
        passed,
        max_residual: max_z,
        trials,
        detail: format!(
            "max |z| {max_z:.2} over covariance entries and cross-sampler marginals \
             (bound {Z_BOUND}); scaled KS {ks_worst:.3} (critical {KS_CRITICAL_SCALED}) \
             at n = {n}, m = {m}"
        ),
    })
}

/// Runs every suite and bundles the outcomes.
pub fn run_all(opts: &VerifyOptions) -> Result<VerifyReport> {
    Ok(VerifyReport {
        seed: opts.seed,
        suites: vec![
            convex_gap_suite(opts)?,
            gaussian_relation_suite(opts)?,
            telescoping_suite()?,
            sampler_fidelity_suite(opts)?,
        ],
    })
}
