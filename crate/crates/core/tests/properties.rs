//! Randomized cross-module properties: the convex-gap identities, the model
//! catalogue's invariants (symmetry, normalization, variogram behaviour),
//! agreement between quadrature and closed forms, and schedule-independent
//! determinism of the sampling pipeline.

use fracrate::analytic::{leading_constant, phi};
use fracrate::convex::ConvexSpec;
use fracrate::integrator::{path_error, riemann_sum};
use fracrate::models::{grid_time, CovarianceModel};
use fracrate::sampler::{sample, sample_cholesky, SamplerKind};
use proptest::prelude::*;

fn builtin_models() -> Vec<CovarianceModel<f64>> {
    vec![
        CovarianceModel::fbm(0.6).unwrap(),
        CovarianceModel::fbm(0.75).unwrap(),
        CovarianceModel::fbm(0.9).unwrap(),
        CovarianceModel::multi_mixed_fbm(vec![0.6_f64.sqrt(), 0.4_f64.sqrt()], vec![0.75, 0.9])
            .unwrap(),
        CovarianceModel::sub_fbm(0.75).unwrap(),
        CovarianceModel::bifbm(0.75, 0.8).unwrap(),
        CovarianceModel::stationary_powexp(0.75).unwrap(),
    ]
}

fn convex_atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(((-2.0..2.0), (0.05..1.0)), 1..=3)
}

fn signed_atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(
        ((-2.0..2.0), prop_oneof![0.05..1.0, -1.0..-0.05]),
        1..=3,
    )
}

proptest! {
    // The gap call itself cross-checks the direct form Ψ(x)−Ψ(y)−Ψ'₋(y)(x−y)
    // against the atom-sum form and errors on disagreement, so a clean unwrap
    // is the representation-equality assertion.
    #[test]
    fn convexity_gap_is_non_negative_for_convex_specs(
        alpha in -1.0..1.0,
        beta in -1.0..1.0,
        atoms in convex_atoms(),
        x in -3.0..3.0f64,
        y in -3.0..3.0f64,
    ) {
        let spec = ConvexSpec::new(alpha, beta, atoms, false).unwrap();
        let gap = spec.convexity_gap(x, y).unwrap();
        prop_assert!(gap >= -1e-12, "gap {gap} below tolerance");
    }

    #[test]
    fn convexity_gap_representations_agree_for_signed_specs(
        alpha in -1.0..1.0,
        beta in -1.0..1.0,
        atoms in signed_atoms(),
        x in -3.0..3.0f64,
        y in -3.0..3.0f64,
    ) {
        let spec = ConvexSpec::new(alpha, beta, atoms, true).unwrap();
        // Signed gaps may be negative; only the internal cross-check matters.
        let gap = spec.convexity_gap(x, y).unwrap();
        prop_assert!(gap.is_finite());
    }

    #[test]
    fn psi_difference_quotient_approaches_left_derivative(
        beta in -1.0..1.0,
        atoms in convex_atoms(),
        x in -3.0..3.0f64,
    ) {
        let spec = ConvexSpec::new(0.0, beta, atoms, false).unwrap();
        let clearance = spec
            .atoms()
            .iter()
            .map(|&(a, _)| (x - a).abs())
            .fold(f64::INFINITY, f64::min);
        prop_assume!(clearance > 1e-3);
        let h = 1e-6;
        let slope = (spec.psi(x) - spec.psi(x - h)) / h;
        let deriv = spec.psi_prime_left(x);
        prop_assert!((slope - deriv).abs() < 1e-4, "slope {slope} vs derivative {deriv}");
    }

    // Atom levels on a 1e-3 lattice keep a gap between distinct kinks, so a
    // 1e-6 step left of a kink crosses no other kink and the left derivative
    // must be bit-identical there.
    #[test]
    fn left_derivative_is_left_continuous_at_every_kink(
        beta in -1.0..1.0,
        levels in prop::collection::btree_set(-1999i32..2000, 1..=3),
        weight in 0.05..1.0,
    ) {
        let atoms: Vec<(f64, f64)> =
            levels.iter().map(|&i| (f64::from(i) * 1e-3, weight)).collect();
        let spec = ConvexSpec::new(0.0, beta, atoms, false).unwrap();
        for &(a, _) in spec.atoms() {
            prop_assert_eq!(spec.psi_prime_left(a), spec.psi_prime_left(a - 1e-6));
        }
    }

    #[test]
    fn path_error_is_additive_over_atom_sets(
        alpha in -1.0..1.0,
        beta in -1.0..1.0,
        atoms_a in convex_atoms(),
        atoms_b in convex_atoms(),
        path in prop::collection::vec(-2.0..2.0, 3..=20),
    ) {
        let mut joint = atoms_a.clone();
        joint.extend_from_slice(&atoms_b);
        let spec_a = ConvexSpec::new(alpha, beta, atoms_a, false).unwrap();
        let spec_b = ConvexSpec::new(alpha, beta, atoms_b, false).unwrap();
        let spec_ab = ConvexSpec::new(alpha, beta, joint, false).unwrap();
        let split = path_error(&spec_a, &path).unwrap().error
            + path_error(&spec_b, &path).unwrap().error;
        let whole = path_error(&spec_ab, &path).unwrap().error;
        prop_assert!((whole - split).abs() <= 1e-12, "joint {whole} vs split {split}");
    }

    #[test]
    fn linear_specs_accumulate_no_error(
        alpha in -1.0..1.0,
        beta in -2.0..2.0f64,
        path in prop::collection::vec(-2.0..2.0f64, 2..=30),
    ) {
        let spec = ConvexSpec::linear(alpha, beta);
        let report = path_error(&spec, &path).unwrap();
        // Kink-free integrands make every per-step gap exactly zero.
        prop_assert_eq!(report.error, 0.0);
        let telescoped = beta * (path[path.len() - 1] - path[0]);
        let sum = riemann_sum(&spec, &path).unwrap();
        prop_assert!((sum - telescoped).abs() <= 1e-12 * (1.0 + beta.abs()));
    }

    #[test]
    fn covariance_is_symmetric_for_every_builtin(
        t in 0.0..=1.0f64,
        s in 0.0..=1.0f64,
    ) {
        for model in builtin_models() {
            let fwd = model.covariance(t, s).unwrap();
            let rev = model.covariance(s, t).unwrap();
            prop_assert!((fwd - rev).abs() <= 1e-12, "{model}: R({t},{s}) vs R({s},{t})");
        }
    }

    #[test]
    fn fbm_variogram_is_exactly_the_power_law(
        h in 0.51..0.99f64,
        t in 0.0..=1.0f64,
        s in 0.0..=1.0f64,
    ) {
        let model = CovarianceModel::fbm(h).unwrap();
        let theta = model.variogram(t, s).unwrap();
        prop_assert!((theta - (t - s).abs().powf(2.0 * h)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // For plain fBm the limiting-constant integrand has the closed form
    // ∫₀¹ s^{-H} φ(0) ds = φ(0)/(1-H), pinning the adaptive quadrature and
    // the origin substitution at arbitrary admissible H.
    #[test]
    fn quadrature_matches_the_fbm_closed_form(h in 0.55..0.95f64) {
        let model = CovarianceModel::fbm(h).unwrap();
        let got = leading_constant(&model, 0.0).unwrap();
        let want = phi(0.0) / (1.0 - h);
        prop_assert!((got - want).abs() <= 1e-8 * want, "H={h}: {got} vs {want}");
    }
}

#[test]
fn terminal_variance_is_normalized_for_every_builtin() {
    for model in builtin_models() {
        let v1: f64 = model.variance(1.0).unwrap();
        assert!((v1 - 1.0).abs() <= 1e-10, "{model}: V(1) = {v1}");
    }
}

#[test]
fn sampled_paths_never_have_negative_errors() {
    let specs = [
        ConvexSpec::positive_part(),
        ConvexSpec::absolute_deviation(0.3),
    ];
    for (i, model) in builtin_models().iter().enumerate() {
        let batch = sample_cholesky(model, 16, 1500, 2024 + i as u64).unwrap();
        for spec in &specs {
            for p in 0..batch.m {
                let err = path_error(spec, batch.path(p)).unwrap().error;
                assert!(err >= -1e-12, "{model}, path {p}: error {err}");
            }
        }
    }
}

#[test]
fn adjacent_variogram_residue_shrinks_for_first_order_models() {
    // These are the models whose g(t,s) vanishes to first order, so the
    // adjacent-pair ratio must close in on σ² as the grid doubles.
    let models = [
        CovarianceModel::multi_mixed_fbm(vec![0.6_f64.sqrt(), 0.4_f64.sqrt()], vec![0.75, 0.9])
            .unwrap(),
        CovarianceModel::stationary_powexp(0.75).unwrap(),
    ];
    for model in &models {
        let sigma2 = model.sigma2();
        let mut previous = f64::INFINITY;
        let mut n = 64;
        while n <= 4096 {
            let (lo, hi) = model.adjacent_variogram_range(n).unwrap();
            let residue = (lo - sigma2).abs().max((hi - sigma2).abs());
            assert!(
                residue < previous,
                "{model}: residue {residue} at n={n} did not shrink from {previous}"
            );
            previous = residue;
            n *= 2;
        }
    }
}

#[test]
fn adjacent_ratios_stay_inside_the_all_pairs_envelope() {
    for model in builtin_models() {
        for n in [4usize, 16, 64, 256, 1024] {
            let (lo, hi) = model.variogram_bounds(n).unwrap();
            let (alo, ahi) = model.adjacent_variogram_range(n).unwrap();
            assert!(
                lo <= alo + 1e-12 && ahi <= hi + 1e-12,
                "{model} at n={n}: adjacent [{alo}, {ahi}] outside pairs [{lo}, {hi}]"
            );
            // The scaled step variogram itself sits inside the envelope.
            let p = 2.0 * model.holder_index();
            let step = model
                .variogram(grid_time(1, n), grid_time(0, n))
                .unwrap()
                * (n as f64).powf(p);
            assert!(lo <= step + 1e-12 && step <= hi + 1e-12);
        }
    }
}

#[test]
fn batches_are_bitwise_identical_across_worker_counts() {
    let model = CovarianceModel::fbm(0.75).unwrap();
    let pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
    };
    for kind in [SamplerKind::Cholesky, SamplerKind::Circulant] {
        for seed in [1u64, 7, 99] {
            let single = pool(1).install(|| sample(&model, 24, 40, seed, kind).unwrap());
            let quad = pool(4).install(|| sample(&model, 24, 40, seed, kind).unwrap());
            assert_eq!(single.values, quad.values, "{kind} diverged at seed {seed}");
        }
    }
}

#[test]
fn single_precision_pipeline_stays_finite() {
    let model = CovarianceModel::<f32>::fbm(0.75).unwrap();
    let batch = sample_cholesky(&model, 8, 16, 5).unwrap();
    let spec = ConvexSpec::<f32>::positive_part();
    for p in 0..batch.m {
        let report = path_error(&spec, batch.path(p)).unwrap();
        assert!(report.error.is_finite());
        assert!(report.error >= -1e-5);
    }
}
