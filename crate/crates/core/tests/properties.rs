use std::f64::consts::{PI, TAU};
use std::path::Path;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use widelin::augmented::{build_augmented_covariance, stack_conjugate};
use widelin::check::{random_instance, relative_deviation};
use widelin::estimators::{bwlue_real, bwlue_real_gain, prepare, EstimatorId};
use widelin::experiments::log_grid;
use widelin::io::{format_measurement_csv, parse_measurement_csv};
use widelin::linalg::max_abs;
use widelin::measurement::{converted_noise_stats, wrap_phase, NoiseProfile, PolarMeasurement, PolarMeasurements};
use widelin::{CMatrix, RVector};

fn instance(seed: u64, n_y: usize, n_x: usize) -> widelin::check::Instance {
    random_instance(n_y, n_x, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// `Some` on success, `None` when the library refuses a near-singular
/// system; any other error fails the test.
fn accepted<T>(r: widelin::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(widelin::Error::Singular { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

/// `(N_y, N_x)` with `1 <= N_x <= 2 N_y`.
fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=8).prop_flat_map(|n_y| (Just(n_y), 1..=2 * n_y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn augmented_covariance_is_hermitian_and_psd(seed in any::<u64>(), n in 1usize..8) {
        let aug = build_augmented_covariance(&instance(seed, n, 1).stats);
        prop_assert!(aug.check_structure(1e-10).is_ok());
        let m = aug.into_matrix();
        let eig = (&m + m.adjoint()).unscale(2.0).symmetric_eigenvalues();
        prop_assert!(eig.min() >= -1e-10 * eig.max());
    }

    #[test]
    fn real_estimators_recover_noiseless_parameters(seed in any::<u64>(), (n_y, n_x) in dims()) {
        let inst = instance(seed, n_y, n_x);
        let x = RVector::from_fn(n_x, |i, _| (i as f64 - 1.5) * 0.7);
        let y = inst.model.apply(&x);
        for id in [EstimatorId::Wlls, EstimatorId::Wwlls, EstimatorId::BwlueReal, EstimatorId::RealCompositeBlue] {
            let p = accepted(prepare(id, &inst.model, &inst.stats));
            prop_assume!(p.is_some());
            let est = p.unwrap().estimate(&y).unwrap();
            let err = (est.real() - &x).amax();
            prop_assert!(err <= 1e-7 * (1.0 + x.amax()), "{} error {:e}", id, err);
        }
    }

    #[test]
    fn bwlue_real_gain_is_unbiased(seed in any::<u64>(), (n_y, n_x) in dims()) {
        let inst = instance(seed, n_y, n_x);
        let g = accepted(bwlue_real_gain(&inst.model, &inst.stats));
        prop_assume!(g.is_some());
        let g = g.unwrap();
        let defect = max_abs(&(g * stack_conjugate(inst.model.h()).as_matrix() - CMatrix::identity(n_x, n_x)));
        prop_assert!(defect <= 1e-7, "defect {:e}", defect);
    }

    #[test]
    fn bwlue_real_ignores_the_noise_scale(seed in any::<u64>(), (n_y, n_x) in dims(), log_s in -6.0f64..6.0) {
        let inst = instance(seed, n_y, n_x);
        let a = accepted(bwlue_real(&inst.model, &inst.stats, &inst.y));
        prop_assume!(a.is_some());
        let a = a.unwrap();
        let b = bwlue_real(&inst.model, &inst.stats.scaled(10f64.powf(log_s)), &inst.y).unwrap();
        prop_assert!(relative_deviation(&b.x_hat.to_complex(), &a.x_hat.to_complex()) <= 1e-7);
    }

    #[test]
    fn real_estimators_are_linear_in_the_data(seed in any::<u64>(), (n_y, n_x) in dims(), a in -3.0f64..3.0) {
        let inst = instance(seed, n_y, n_x);
        let other = instance(seed.wrapping_add(1), n_y, n_x).y;
        let p = accepted(prepare(EstimatorId::BwlueReal, &inst.model, &inst.stats));
        prop_assume!(p.is_some());
        let p = p.unwrap();
        let combined = p.estimate(&(inst.y.scale(a) + &other)).unwrap();
        let separate = p.estimate(&inst.y).unwrap().real() * a + p.estimate(&other).unwrap().real();
        prop_assert!((combined.real() - &separate).amax() <= 1e-9 * (1.0 + separate.amax()));
    }

    #[test]
    fn converted_statistics_are_valid(
        a in 0.0f64..10.0,
        phi in 0.0f64..TAU,
        sigma_a2 in 1e-8f64..1.0,
        sigma_phi2 in 1e-8f64..1.0,
    ) {
        let s = converted_noise_stats(a, phi, sigma_a2, sigma_phi2);
        prop_assert!(s.sigma2 > 0.0);
        prop_assert!(s.pseudo_sigma2.norm() <= s.sigma2 * (1.0 + 1e-12));
        prop_assert!(s.alpha > 0.0 && s.alpha <= 1.0);
        prop_assert!((s.beta - s.alpha.powi(4)).abs() <= 1e-15);
    }

    #[test]
    fn wrapped_phase_is_principal(phi in -100.0f64..100.0) {
        let w = wrap_phase(phi);
        prop_assert!(w > -PI && w <= PI);
        let turns = (phi - w) / TAU;
        prop_assert!((turns - turns.round()).abs() <= 1e-9);
    }

    #[test]
    fn log_grid_hits_both_ends(lo in -8i32..0, decades in 1i32..6, per in 1usize..10) {
        let (a, b) = (10f64.powi(lo), 10f64.powi(lo + decades));
        let g = log_grid(a, b, per).unwrap();
        prop_assert_eq!(g.len(), decades as usize * per + 1);
        prop_assert_eq!(g[0], a);
        prop_assert_eq!(*g.last().unwrap(), b);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn measurement_files_round_trip(
        y0 in -5.0f64..5.0,
        polar in prop::collection::vec((0.0f64..5.0, 0.0f64..TAU, 1e-8f64..1.0, 1e-8f64..1.0), 1..12),
        dc_var in 1e-8f64..1.0,
        f1 in 1e-3f64..1e3,
    ) {
        let meas = PolarMeasurements {
            y0,
            polar: polar.iter().enumerate().map(|(i, &(y_a, y_phi, _, _))| PolarMeasurement { y_a, y_phi, k: i + 1 }).collect(),
        };
        let mut sa = vec![dc_var];
        let mut sp = vec![0.0];
        sa.extend(polar.iter().map(|p| p.2));
        sp.extend(polar.iter().map(|p| p.3));
        let noise = NoiseProfile::new(sa, sp).unwrap();
        let text = format_measurement_csv(&meas, &noise, f1);
        let back = parse_measurement_csv(&text, Path::new("p.csv")).unwrap();
        prop_assert_eq!(back.meas, meas);
        prop_assert_eq!(back.noise, noise);
    }
}
