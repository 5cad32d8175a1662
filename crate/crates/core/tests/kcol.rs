use ksat_phase::kcol::{evolve, init_grid, invert_state, pde_residual, rho_fields, sample, step};
use ksat_phase::ColState;
use proptest::prelude::*;

const DOMAIN: ((f64, f64), (f64, f64)) = ((0.02, 0.06), (0.22, 0.26));

#[test]
fn initial_grid_is_exact() {
    for n in [8usize, 17, 64] {
        let g = init_grid(n, n + 3, DOMAIN.0, DOMAIN.1, None).unwrap();
        for i in 0..g.nx {
            for j in 0..g.ny {
                let c = g.state(i, j);
                assert_eq!((c.u, c.u2), (g.x(i as isize), g.y(j as isize)));
            }
        }
        assert!((g.initial_slopes.0 - 1.0).abs() < 1e-12 && g.initial_slopes.1.abs() < 1e-12);
    }
}

#[test]
fn residual_is_first_order() {
    let res: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let g = init_grid(n, n, DOMAIN.0, DOMAIN.1, None).unwrap();
            let (a, b) = pde_residual(&g, &step(&g).unwrap(), 2);
            a.max(b)
        })
        .collect();
    for w in res.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{res:?}");
    }
}

#[test]
fn solution_converges_under_refinement() {
    // Richardson: successive differences at a fixed point shrink by about 2
    let at = |n: usize| {
        let g = init_grid(n, n, DOMAIN.0, DOMAIN.1, None).unwrap();
        let (g, rep) = evolve(&g, 0.25).unwrap();
        assert!(!rep.halted);
        sample(&g, 0.04, 0.24).u
    };
    let (a, b, c) = (at(16), at(32), at(64));
    let ratio = (a - b) / (b - c);
    assert!(ratio > 1.5 && ratio < 3.0, "{a} {b} {c} ratio {ratio}");
}

#[test]
fn evolution_is_deterministic() {
    let g = init_grid(24, 24, DOMAIN.0, DOMAIN.1, None).unwrap();
    assert_eq!(evolve(&g, 0.1).unwrap(), evolve(&g, 0.1).unwrap());
}

#[test]
fn wide_domain_reports_the_exit() {
    let g = init_grid(32, 32, (0.0, 0.1), (0.0, 0.1), None).unwrap();
    let (_, rep) = evolve(&g, 0.5).unwrap();
    assert!(rep.halted && rep.z_reached < 0.5);
    assert!(!rep.events.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn rho_round_trip(x in 0.0f64..0.3, y in 0.0f64..0.3, u in 0.0f64..0.3, u2 in 0.0f64..0.3) {
        let s = ColState { u, u2 };
        prop_assume!(rho_fields(&s, x, y).is_ok());
        let (r1, r2) = rho_fields(&s, x, y).unwrap();
        let back = invert_state(r1, r2, x, y).unwrap();
        prop_assert!((back.u - u).abs() < 1e-12 && (back.u2 - u2).abs() < 1e-12);
    }
}
