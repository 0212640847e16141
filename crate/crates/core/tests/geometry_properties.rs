use frachs::geometry::{correction_integrals, curvature_functionals, trial_quotient_sweep, BoundaryProfile};
use frachs::halfspace::{gauged_profile, halfspace_minimizer};
use frachs::{make_params, FracError};
use proptest::prelude::*;

fn radii() -> Vec<f64> {
    (0..14).map(|k| 0.5 * 0.6f64.powi(k)).collect()
}

#[test]
fn power_law_index_is_recovered() {
    for n in [2usize, 3] {
        let p = make_params(n, 0.5, 0.25).unwrap();
        for alpha in [1.5, 2.0, 2.5] {
            let bp = BoundaryProfile::power_law(n, alpha, 1.0, 1.0).unwrap();
            let r = curvature_functionals(&bp, &radii(), &p).unwrap();
            assert!((r.alpha_hat - alpha).abs() <= 0.05, "n={n} α={alpha}: {}", r.alpha_hat);
            assert!(r.all_pass());
        }
    }
}

#[test]
fn power_log_index_within_widened_tolerance() {
    let p = make_params(2, 0.5, 0.25).unwrap();
    for (alpha, kappa) in [(2.0, 1.0), (1.5, -1.0), (2.5, 0.5)] {
        let bp = BoundaryProfile::power_log(2, alpha, kappa, 0.9).unwrap();
        // the local slope is α − κ/|ln τ|, so sample deep
        let taus: Vec<f64> = (0..30).map(|k| 0.5 * 0.5f64.powi(k)).collect();
        let r = curvature_functionals(&bp, &taus, &p).unwrap();
        assert!((r.alpha_hat - alpha).abs() <= 0.15, "α={alpha} κ={kappa}: {}", r.alpha_hat);
        assert!(r.rv_ok, "α={alpha} κ={kappa}: slowly varying factor rejected");
    }
}

#[test]
fn sample_radii_must_lie_inside_validity_disc() {
    let p = make_params(2, 0.5, 0.25).unwrap();
    let bp = BoundaryProfile::power_law(2, 2.0, 1.0, 0.3).unwrap();
    assert!(curvature_functionals(&bp, &[0.5, 0.1, 0.01], &p).is_err());
    assert!(curvature_functionals(&bp, &[0.1, 0.01], &p).is_err());
}

#[test]
fn correction_integrals_reject_inadmissible_exponent() {
    let p = make_params(2, 0.5, 0.25).unwrap();
    let m = halfspace_minimizer(&p, 5.0, 24, 1e-6).unwrap();
    assert!(matches!(correction_integrals(&m, &p, 0.5), Err(FracError::InvalidArgument(_))));
    assert!(matches!(correction_integrals(&m, &p, 4.0), Err(FracError::InvalidArgument(_))));
}

#[test]
fn sweep_rejects_convex_profile_and_runs_in_three_dimensions() {
    let p = make_params(3, 0.5, 0.25).unwrap();
    let m = halfspace_minimizer(&p, 5.0, 32, 1e-8).unwrap();
    let g = gauged_profile(&m, 0.25, 1e-9, 2000).unwrap().minimizer;
    let convex = BoundaryProfile::convex(3, 1.0, 2.0).unwrap();
    assert!(trial_quotient_sweep(&g, &convex, &p, &[0.2, 0.1], 1.0).is_err());
    let par = BoundaryProfile::power_law(3, 2.0, 1.0, 2.0).unwrap();
    let sw = trial_quotient_sweep(&g, &par, &p, &[0.2, 0.1, 0.05], 1.0).unwrap();
    assert!(sw.points.iter().all(|t| t.quotient.is_finite() && t.quotient > 0.0));
    assert!(sw.slope < 0.0, "{sw:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn condition_trend_implies_shape_trend(alpha in 1.2f64..3.2, coeff in 0.1f64..5.0, kappa in -1.0f64..1.0, n in 2usize..4) {
        let p = make_params(n, 0.5, 0.25).unwrap();
        for bp in [
            BoundaryProfile::power_law(n, alpha, coeff, 1.0).unwrap(),
            BoundaryProfile::power_log(n, alpha, kappa, 0.9).unwrap(),
        ] {
            let r = curvature_functionals(&bp, &radii(), &p).unwrap();
            prop_assert!(r.cauchy_schwarz_holds());
            if r.cond_ok {
                prop_assert!(r.f1_ok);
            }
        }
    }
}
