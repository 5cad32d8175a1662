use approx::assert_relative_eq;
use ksat_phase::surface::{alpha_d, d2z_du2, dz_du, eval_z, find_cusp, find_fold, solve_u};
use ksat_phase::threshold::{calibrate, trace, TracePolicy, DEFAULT_STEP};
use ksat_phase::{Branch, SurfaceQuery};
use proptest::prelude::*;

/// Direct transcription of the closed form, no cancellation guards.
fn naive_z(k: u32, x: f64, u: f64) -> f64 {
    let k = k as f64;
    2.0 * (1.0 - u.powf(k)) / (k * u.powf(k - 1.0)) * ((1.0 - u - x / 2.0) / (1.0 - 2.0 * u)).ln()
}

/// Golden-section minimum of the naive form on `x = 0`.
fn naive_alpha_d(k: u32) -> f64 {
    let (mut a, mut b) = (0.05, 0.4999);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if naive_z(k, 0.0, c) < naive_z(k, 0.0, d) {
            b = d;
        } else {
            a = c;
        }
    }
    naive_z(k, 0.0, 0.5 * (a + b))
}

#[test]
fn spinodal_matches_independent_minimisation() {
    for k in 3..=10 {
        assert_relative_eq!(alpha_d(k).unwrap(), naive_alpha_d(k), max_relative = 1e-9);
    }
}

#[test]
fn spinodal_k4_direct_evaluation() {
    // z at the fold for k = 4 sits near u = 0.405
    let z = naive_z(4, 0.0, 0.405);
    assert!((z - 8.360).abs() < 2e-3, "{z}");
}

#[test]
fn cusp_is_a_degenerate_critical_point() {
    for k in 3..=7 {
        let c = find_cusp(k).unwrap();
        let h = 1e-4;
        let f = |u: f64| naive_z(k, c.x0, u);
        let d1 = (f(c.u0 + 1e-5) - f(c.u0 - 1e-5)) / 2e-5;
        let d2 = (f(c.u0 + h) - 2.0 * f(c.u0) + f(c.u0 - h)) / (h * h);
        assert!(d1.abs() < 1e-6 * c.z0, "k={k} d1={d1}");
        assert!(d2.abs() < 1e-3 * c.z0, "k={k} d2={d2}");
        assert_relative_eq!(naive_z(k, c.x0, c.u0), c.z0, max_relative = 1e-12);
        // two folds just inside, none just outside
        assert_eq!(find_fold(k, c.x0 - 1e-3).unwrap().len(), 2);
        assert!(find_fold(k, c.x0 + 1e-3).unwrap().is_empty());
    }
}

#[test]
fn cusp_k4_golden() {
    let c = find_cusp(4).unwrap();
    assert!((c.x0 - 0.30499).abs() < 1e-5, "{c:?}");
    assert!((c.z0 - 5.76599).abs() < 1e-5, "{c:?}");
    assert!((c.u0 - 0.30195).abs() < 1e-5, "{c:?}");
}

#[test]
fn three_sheets_inside_the_wedge() {
    let set = solve_u(&SurfaceQuery::new(3, 0.1, 3.6).unwrap(), 1e-10).unwrap();
    let branches: Vec<Branch> = set.points.iter().map(|p| p.branch).collect();
    assert_eq!(branches, [Branch::Lower, Branch::Middle, Branch::Upper]);
    // middle sheet is the unstable one: z decreases in u there
    assert!(dz_du(3, 0.1, set.points[1].u).unwrap() < 0.0);
}

#[test]
fn calibration_accepts_exactly_one_policy() {
    let r = calibrate(DEFAULT_STEP).unwrap();
    let passing: Vec<_> = r.candidates.iter().filter(|c| c.passes).map(|c| c.policy).collect();
    assert_eq!(passing, [TracePolicy::CALIBRATED]);
    assert_eq!(r.accepted, Some(TracePolicy::CALIBRATED));
}

#[test]
fn curve_is_monotone_and_step_converged() {
    let fine = trace(3, 1e-4, TracePolicy::CALIBRATED).unwrap();
    let coarse = trace(3, 2e-4, TracePolicy::CALIBRATED).unwrap();
    assert!(fine.points.windows(2).all(|w| w[1].x < w[0].x && w[1].z > w[0].z));
    assert_eq!(fine.points.last().unwrap().x, 0.0);
    assert!(fine.points.iter().all(|p| p.u_lower <= p.u_upper));
    assert!((fine.alpha_c - coarse.alpha_c).abs() < 1e-5, "{} {}", fine.alpha_c, coarse.alpha_c);
}

proptest! {
    #[test]
    fn eval_z_matches_naive(k in 2u32..9, x in 0.0f64..0.9, t in 0.05f64..0.95) {
        let u = 0.5 * x + t * (0.5 - 0.5 * x);
        let z = eval_z(k, x, u).unwrap();
        prop_assert!((z - naive_z(k, x, u)).abs() <= 1e-9 * z.abs().max(1.0));
    }

    #[test]
    fn initial_condition_root(k in 2u32..9, x in 0.001f64..0.9) {
        prop_assert_eq!(eval_z(k, x, 0.5 * x).unwrap(), 0.0);
    }

    #[test]
    fn derivatives_match_differences(k in 2u32..8, x in 0.0f64..0.5, t in 0.1f64..0.9) {
        let u = 0.5 * x + t * (0.5 - 0.5 * x);
        let h = 1e-6 * u;
        let fd = (eval_z(k, x, u + h).unwrap() - eval_z(k, x, u - h).unwrap()) / (2.0 * h);
        let d = dz_du(k, x, u).unwrap();
        prop_assert!((fd - d).abs() <= 1e-5 * d.abs().max(1.0), "{} vs {}", fd, d);
        let fd2 = (dz_du(k, x, u + h).unwrap() - dz_du(k, x, u - h).unwrap()) / (2.0 * h);
        let d2 = d2z_du2(k, x, u).unwrap();
        prop_assert!((fd2 - d2).abs() <= 1e-4 * d2.abs().max(1.0), "{} vs {}", fd2, d2);
    }

    #[test]
    fn roots_reproduce_z(k in 3u32..7, x in 0.0f64..0.6, z in 0.1f64..40.0) {
        let set = solve_u(&SurfaceQuery::new(k, x, z).unwrap(), 1e-10).unwrap();
        for p in &set.points {
            let slack = 8.0 * f64::EPSILON * p.u * dz_du(k, x, p.u).unwrap().abs();
            prop_assert!((eval_z(k, x, p.u).unwrap() - z).abs() <= 1e-10 * z.max(1.0) + slack);
        }
        prop_assert!(set.us().windows(2).all(|w| w[0] < w[1]));
    }
}
