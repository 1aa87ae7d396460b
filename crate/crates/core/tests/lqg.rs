mod common;

use codesign::discretize::discretize;
use codesign::instances::{random_plant, random_psd};
use codesign::linalg::{loewner_leq, psd_solve, sym_spectral_norm, LOEWNER_TOL};
use codesign::lqg::*;
use codesign::model::ContinuousPlant;
use common::{assert_mat_close, mat, s, scalar_dp};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unstable_plant() -> ContinuousPlant {
    ContinuousPlant::second_order(-1.0, 1.0, 1.0)
}

#[test]
fn kalman_scalar_hand_arithmetic() {
    let dp = scalar_dp(1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0);
    let state = EstimatorState {
        xi_hat: DVector::from_element(1, 0.0),
        p_cov: s(1.0),
    };
    let pred = predict(&state, &dp, &DVector::zeros(1));
    assert_eq!(pred.p_cov[(0, 0)], 2.0);
    let y = DVector::from_element(1, 3.0);
    let post = kalman_step(&state, &dp, &DVector::zeros(1), 1, Some(&y)).unwrap();
    assert!((post.p_cov[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
    // K = 2/3 applied to the innovation 3.
    assert!((post.xi_hat[0] - 2.0).abs() < 1e-15);
}

#[test]
fn kalman_loss_skips_correction() {
    let dp = scalar_dp(1.3, 0.5, 1.0, 0.7, 1.0, 1.0, 0.0, 1.0);
    let state = EstimatorState {
        xi_hat: DVector::from_element(1, 1.0),
        p_cov: s(2.0),
    };
    let u = DVector::from_element(1, 2.0);
    let next = kalman_step(&state, &dp, &u, 0, None).unwrap();
    assert!((next.xi_hat[0] - (1.3 + 1.0)).abs() < 1e-15);
    assert!((next.p_cov[(0, 0)] - (1.69 * 2.0 + 0.7)).abs() < 1e-14);
    assert!(kalman_step(&state, &dp, &u, 0, Some(&u)).is_err());
    assert!(kalman_step(&state, &dp, &u, 1, None).is_err());
}

#[test]
fn kalman_perfect_measurement_collapses_variance() {
    let dp = scalar_dp(1.0, 0.0, 1.0, 1.0, 1e-12, 1.0, 0.0, 1.0);
    let state = EstimatorState {
        xi_hat: DVector::zeros(1),
        p_cov: s(1.0),
    };
    let y = DVector::zeros(1);
    let post = kalman_step(&state, &dp, &DVector::zeros(1), 1, Some(&y)).unwrap();
    assert!(post.p_cov[(0, 0)] < 1e-11);
}

#[test]
fn kalman_rejects_singular_innovation() {
    let dp = scalar_dp(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0);
    let state = EstimatorState {
        xi_hat: DVector::zeros(1),
        p_cov: s(0.0),
    };
    let y = DVector::zeros(1);
    assert!(kalman_step(&state, &dp, &DVector::zeros(1), 1, Some(&y)).is_err());
}

#[test]
fn scalar_mare_fixed_points() {
    let dp = scalar_dp(1.2, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0);
    let b = covariance_bounds(&dp, &s(1.0), 0.8).unwrap();
    assert!(b.converged && b.lower_converged);
    assert!((b.p_upper[(0, 0)] - 2.5691488341418034).abs() < 1e-9);
    assert!((b.p_lower[(0, 0)] - 1.404494382022472).abs() < 1e-12);
}

#[test]
fn full_delivery_lower_bound_is_process_noise() {
    let plant = unstable_plant();
    let dp = discretize(&plant, 0.1, 0.1, 10.0).unwrap();
    let b = covariance_bounds(&dp, &plant.sigma0, 1.0).unwrap();
    assert_mat_close(&b.p_lower, &dp.rv_ext(), 1e-14);
    assert!(b.p_lower_filtered().iter().all(|v| *v == 0.0));
}

#[test]
fn no_delivery_on_stable_plant_bounds_coincide() {
    let plant = ContinuousPlant::second_order(1.0, 0.7, 2.0);
    let dp = discretize(&plant, 0.1, 0.1, 10.0).unwrap();
    let b = covariance_bounds(&dp, &plant.sigma0, 0.0).unwrap();
    assert!(b.converged);
    assert_mat_close(&b.p_upper, &b.p_lower, 1e-8);
}

#[test]
fn unstable_plant_without_delivery_diverges() {
    let plant = unstable_plant();
    let dp = discretize(&plant, 0.2, 0.2, 10.0).unwrap();
    let b = covariance_bounds(&dp, &plant.sigma0, 0.0).unwrap();
    assert!(!b.converged && !b.lower_converged);
    let g = riccati_control(&dp).unwrap();
    let c = cost_bounds(&dp, &g, &b, 0.0);
    assert!(c.j_max.is_infinite() && c.j_min.is_infinite());
}

#[test]
fn golden_ratio_riccati() {
    let dp = scalar_dp(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0);
    let g = riccati_control(&dp).unwrap();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((g.s_inf[(0, 0)] - golden).abs() < 1e-10);
    assert!((g.l_inf[(0, 0)] + golden / (golden + 1.0)).abs() < 1e-10);
}

#[test]
fn zero_cost_gives_zero_gain() {
    let dp = scalar_dp(0.5, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0);
    let g = riccati_control(&dp).unwrap();
    assert_eq!(g.s_inf[(0, 0)], 0.0);
    assert_eq!(g.l_inf[(0, 0)], 0.0);
}

#[test]
fn scalar_cost_bounds_compose() {
    let dp = scalar_dp(1.2, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0);
    let g = riccati_control(&dp).unwrap();
    assert!((g.s_inf[(0, 0)] - 1.9522337440599489).abs() < 1e-9);
    let b = covariance_bounds(&dp, &s(1.0), 0.8).unwrap();
    let c = cost_bounds(&dp, &g, &b, 0.8);
    assert!((c.j_min - 2.47441993714601).abs() < 1e-8);
    assert!((c.j_max - 3.9779426104946314).abs() < 1e-8);
}

#[test]
fn unstable_plant_matches_reference_are() {
    let plant = unstable_plant();
    let dp = discretize(&plant, 0.25, 0.1, 500.0).unwrap();
    let g = riccati_control(&dp).unwrap();
    let s_ref = mat(&[
        &[6.4744751359852595, 1.072648319222942, 0.06724802167643304],
        &[1.072648319222942, 7.373187521696033, 0.6571348473380114],
        &[0.06724802167643304, 0.6571348473380114, 0.1589787104653281],
    ]);
    let l_ref = mat(&[&[0.39866923135357313, -4.235883042051038, -0.3851438570975674]]);
    assert_mat_close(&g.s_inf, &s_ref, 1e-8);
    assert_mat_close(&g.l_inf, &l_ref, 1e-8);

    let b = covariance_bounds(&dp, &plant.sigma0, 1.0).unwrap();
    let c = cost_bounds(&dp, &g, &b, 1.0);
    assert!((c.j_max - 32.60511063143331).abs() < 1e-7 * 32.6, "{c:?}");
    assert!((c.j_min - 2.407030224980926).abs() < 1e-8);
}

#[test]
fn riccati_handles_singular_input_weight() {
    // tau = h leaves Xi_uu = 0.
    let plant = unstable_plant();
    let dp = discretize(&plant, 0.25, 0.25, 500.0).unwrap();
    assert_eq!(dp.xi_uu[(0, 0)], 0.0);
    let g = riccati_control(&dp).unwrap();
    let (s_next, _) = riccati_step(&dp, &g.s_inf);
    assert!(sym_spectral_norm(&(&s_next - &g.s_inf)) < 1e-9);
}

/// Eliminates the cross term by `u = v - Xi_uu^{-1} Xi_xu^T xi`.
fn cross_term_free(dp: &codesign::discretize::DiscretePlant) -> codesign::discretize::DiscretePlant {
    let k = psd_solve(&dp.xi_uu, &dp.xi_xu.transpose());
    let mut out = dp.clone();
    out.phi = &dp.phi - &dp.gamma * &k;
    out.xi_xx = &dp.xi_xx - &dp.xi_xu * &k;
    out.xi_xx = (&out.xi_xx + out.xi_xx.transpose()) * 0.5;
    out.xi_xu = DMatrix::zeros(dp.xi_xu.nrows(), dp.xi_xu.ncols());
    out
}

#[test]
fn completing_the_square_preserves_riccati_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let n = 2 + case % 3;
        let plant = random_plant(&mut rng, n, 1.0);
        let dp = discretize(&plant, 0.2, 0.1, 10.0).unwrap();
        let direct = riccati_control(&dp).unwrap();
        let reduced = riccati_control(&cross_term_free(&dp)).unwrap();
        let diff = sym_spectral_norm(&(&direct.s_inf - &reduced.s_inf));
        assert!(diff < 1e-9 * sym_spectral_norm(&direct.s_inf).max(1.0), "case {case}: {diff}");
    }
}

#[test]
fn finite_horizon_terminal_only() {
    let plant = unstable_plant();
    let mut dp = discretize(&plant, 0.1, 0.1, 1.0).unwrap();
    dp.xi0 = codesign::linalg::block_diag(&mat(&[&[2.0, 0.0], &[0.0, 3.0]]), &DMatrix::zeros(1, 1));
    let g = riccati_finite(&dp, 0).unwrap();
    let x0 = DVector::from_vec(vec![1.0, -1.0]);
    let cost = finite_horizon_cost(&dp, &g, &[], &x0, &plant.sigma0).unwrap();
    assert!((cost - (5.0 + 0.1 * 5.0)).abs() < 1e-14);
    assert!(finite_horizon_cost(&dp, &g, &[true], &x0, &plant.sigma0).is_err());
}

#[test]
fn finite_horizon_full_delivery_approaches_classical_cost() {
    let plant = unstable_plant();
    let dp = discretize(&plant, 0.25, 0.1, 500.0).unwrap();
    let g = riccati_finite(&dp, dp.n_steps).unwrap();
    let ones = vec![true; dp.n_steps];
    let total = finite_horizon_cost(&dp, &g, &ones, &DVector::zeros(2), &plant.sigma0).unwrap();
    let per_step = total / dp.n_steps as f64;
    let classical = 32.60511063143331;
    assert!((per_step - classical).abs() < 0.01 * classical, "{per_step}");
}

#[test]
fn finite_horizon_without_delivery_grows() {
    let plant = unstable_plant();
    let dp = discretize(&plant, 0.1, 0.1, 10.0).unwrap();
    let mut last = 0.0;
    for n in [1, 2, 5, 10, 20] {
        let g = riccati_finite(&dp, n).unwrap();
        let c = finite_horizon_cost(&dp, &g, &vec![false; n], &DVector::zeros(2), &plant.sigma0).unwrap();
        assert!(c > last);
        last = c;
    }
}

#[test]
fn j_max_non_increasing_in_reliability() {
    let plant = unstable_plant();
    let dp = discretize(&plant, 0.15, 0.15, 500.0).unwrap();
    let g = riccati_control(&dp).unwrap();
    let mut prev = f64::INFINITY;
    for k in 1..=20 {
        let rho = k as f64 * 0.05;
        let b = covariance_bounds(&dp, &plant.sigma0, rho).unwrap();
        let c = cost_bounds(&dp, &g, &b, rho);
        assert!(c.j_max <= prev * (1.0 + 1e-9), "rho {rho}");
        if c.j_max.is_finite() {
            assert!(c.j_min <= c.j_max * (1.0 + 1e-12));
        }
        prev = c.j_max;
    }
}

fn small_dp(seed: u64) -> codesign::discretize::DiscretePlant {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plant = random_plant(&mut rng, 2, 1.0);
    discretize(&plant, 0.2, 0.1, 10.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operators_are_monotone(seed in 0u64..1000, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
        let dp = small_dp(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let x = random_psd(&mut rng, 3, 0.0);
        let y = &x + random_psd(&mut rng, 3, 0.0);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(loewner_leq(&mare_op(&dp, &x, lo), &mare_op(&dp, &y, lo), LOEWNER_TOL));
        prop_assert!(loewner_leq(&correction_op(&dp, &x, lo), &correction_op(&dp, &y, lo), LOEWNER_TOL));
        prop_assert!(loewner_leq(&mare_op(&dp, &x, hi), &mare_op(&dp, &x, lo), LOEWNER_TOL));
        prop_assert!(loewner_leq(&correction_op(&dp, &x, hi), &correction_op(&dp, &x, lo), LOEWNER_TOL));
        prop_assert!(loewner_leq(&prediction_op(&dp, &x), &prediction_op(&dp, &y), LOEWNER_TOL));
    }

    #[test]
    fn trace_is_monotone(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_psd(&mut rng, 3, 0.01);
        let y = random_psd(&mut rng, 3, 0.0);
        let z = &y + random_psd(&mut rng, 3, 0.0);
        prop_assert!((&x * &y).trace() <= (&x * &z).trace() + 1e-9);
    }

    #[test]
    fn bounds_are_ordered(seed in 0u64..1000, rho in 0.3f64..1.0) {
        let dp = small_dp(seed);
        let b = covariance_bounds(&dp, &DMatrix::identity(2, 2), rho).unwrap();
        if b.converged {
            prop_assert!(loewner_leq(&b.p_lower, &b.p_upper, 1e-9 * b.p_upper.norm().max(1.0)));
        }
    }
}
