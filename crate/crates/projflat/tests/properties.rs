//! Randomized invariants of norms, the implicit solver, metric builders and distances.

use proptest::prelude::*;

use projflat::analysis::{self, Family};
use projflat::closed::ClosedKind;
use projflat::funk;
use projflat::geometry;
use projflat::homogeneous::HomogeneousFn;
use projflat::metrics::FinslerMetric;

fn euclid() -> HomogeneousFn<f64> {
    HomogeneousFn::euclidean(2)
}

/// Randers vector with `|a| ≤ r`.
fn small_vec(r: f64) -> impl Strategy<Value = Vec<f64>> {
    (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(m, t)| vec![m * t.cos(), m * t.sin()])
}

fn direction() -> impl Strategy<Value = Vec<f64>> {
    (0.0..std::f64::consts::TAU, 0.1f64..3.0).prop_map(|(t, m)| vec![m * t.cos(), m * t.sin()])
}

/// Point of the unit ball, at most `frac` of the way to the boundary.
fn ball_point(frac: f64) -> impl Strategy<Value = Vec<f64>> {
    (0.0..frac, 0.0..std::f64::consts::TAU).prop_map(|(m, t)| vec![m * t.cos(), m * t.sin()])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norms_are_positively_homogeneous(a in small_vec(0.9), y in direction(), s in 0.01f64..50.0) {
        let f = HomogeneousFn::randers(a).unwrap();
        let lhs = f.eval(&[s * y[0], s * y[1]]);
        prop_assert!((lhs - s * f.eval(&y)).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn euler_identity_by_central_differences(a in small_vec(0.9), y in direction()) {
        let f = HomogeneousFn::randers(a).unwrap();
        let g = f.fd_grad(&y);
        let v = f.eval(&y);
        prop_assert!((g[0] * y[0] + g[1] * y[1] - v).abs() <= 1e-6 * (1.0 + v));
    }

    #[test]
    fn randers_triangle_inequality(a in small_vec(0.99), u in direction(), v in direction()) {
        let f = HomogeneousFn::randers(a).unwrap();
        let w = [u[0] + v[0], u[1] + v[1]];
        prop_assert!(f.eval(&w) <= f.eval(&u) + f.eval(&v) + 1e-12);
    }

    #[test]
    fn solution_is_homogeneous_in_y(a in small_vec(0.8), x in ball_point(0.9), y in direction(), s in 0.05f64..20.0) {
        let phi = HomogeneousFn::randers(a).unwrap();
        let x = [x[0] * 0.2, x[1] * 0.2];
        let one = funk::solve_phi(&phi, &x, &y).unwrap().value;
        let scaled = funk::solve_phi(&phi, &x, &[s * y[0], s * y[1]]).unwrap().value;
        prop_assert!(rel(scaled, s * one) < 1e-10);
    }

    #[test]
    fn root_is_unique_for_convex_base(a in small_vec(0.8), x in ball_point(0.15), y in direction()) {
        let phi = HomogeneousFn::randers(a).unwrap();
        prop_assert_eq!(funk::root_sign_changes(&phi, &x, &y, 1000), 1);
        let t = funk::solve_phi(&phi, &x, &y).unwrap().value;
        // y + xΦ vanishes only for y = 0.
        prop_assert!((y[0] + x[0] * t).hypot(y[1] + x[1] * t) > 0.0);
    }

    #[test]
    fn builders_recover_initial_data(a in small_vec(0.5), b in small_vec(0.5), y in direction()) {
        let psi = HomogeneousFn::randers(a).unwrap();
        let phi = HomogeneousFn::randers(b).unwrap();
        let origin = [0.0, 0.0];
        let m = FinslerMetric::build_k0(psi.clone(), phi.clone()).unwrap();
        prop_assert!(rel(m.eval(&origin, &y).unwrap(), psi.eval(&y)) < 1e-9);
        let p = geometry::projective_value(&m, &origin, &y).unwrap();
        prop_assert!(rel(p, phi.eval(&y)) < 1e-9);
        let half = HomogeneousFn::scaled(0.5, phi.clone());
        let m = FinslerMetric::build_km1(psi.clone(), half.clone()).unwrap();
        prop_assert!(rel(m.eval(&origin, &y).unwrap(), psi.eval(&y)) < 1e-9);
    }

    #[test]
    fn builders_match_closed_forms(x in ball_point(0.9), y in direction()) {
        let berwald = FinslerMetric::closed_form(ClosedKind::Berwald, 2).unwrap();
        let k0 = FinslerMetric::build_k0(euclid(), euclid()).unwrap();
        prop_assert!(rel(k0.eval(&x, &y).unwrap(), berwald.eval(&x, &y).unwrap()) < 1e-8);

        let funk_half = FinslerMetric::closed_form(ClosedKind::EuclidFunk, 2).unwrap();
        // Equal initial norms ½|·| give half the unit-ball Funk metric.
        let half = HomogeneousFn::scaled(0.5, euclid());
        let km1 = FinslerMetric::build_km1(half.clone(), half).unwrap();
        prop_assert!(rel(km1.eval(&x, &y).unwrap(), 0.5 * funk_half.eval(&x, &y).unwrap()) < 1e-8);

        let hilbert = FinslerMetric::hilbert_of(FinslerMetric::closed_form(ClosedKind::EuclidFunk, 2).unwrap());
        let riemann = FinslerMetric::closed_form(ClosedKind::Riemann { lambda: -1.0 }, 2).unwrap();
        prop_assert!(rel(hilbert.eval(&x, &y).unwrap(), riemann.eval(&x, &y).unwrap()) < 1e-8);
    }

    #[test]
    fn reverse_is_an_involution(a in small_vec(0.5), x in ball_point(0.5), y in direction()) {
        let m = FinslerMetric::build_k0(euclid(), HomogeneousFn::randers(a).unwrap()).unwrap();
        let back = FinslerMetric::reverse(FinslerMetric::reverse(m.clone()));
        prop_assert_eq!(back.eval(&x, &y).unwrap(), m.eval(&x, &y).unwrap());
    }

    #[test]
    fn funk_and_hilbert_projective_bounds(x in ball_point(0.9), y in direction()) {
        let f = FinslerMetric::closed_form(ClosedKind::EuclidFunk, 2).unwrap();
        let fv = f.eval(&x, &y).unwrap();
        let p = geometry::projective_value(&f, &x, &y).unwrap();
        prop_assert!((p - 0.5 * fv).abs() / fv < 1e-6);
        let h = FinslerMetric::hilbert_of(f);
        let hv = h.eval(&x, &y).unwrap();
        let p = geometry::projective_value(&h, &x, &y).unwrap();
        prop_assert!(p.abs() <= hv * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_identities(a in small_vec(0.6), xbar in ball_point(0.3), x in ball_point(0.5), seed in 0u64..1000) {
        let phi = HomogeneousFn::randers(a).unwrap();
        prop_assert!(funk::translate_base_check(&phi, &xbar, 8, seed).unwrap() < 1e-9);
        prop_assert!(funk::indicatrix_translation_check(&phi, &x, 32).unwrap() < 1e-9);
    }

    #[test]
    fn duality_inequality(a in small_vec(0.6), x in ball_point(0.5), y in direction(), xi in direction()) {
        let m = FinslerMetric::build_k0(euclid(), HomogeneousFn::randers(a).unwrap()).unwrap();
        let dual = analysis::co_metric(&m, &x, &xi).unwrap().value;
        let slack = m.eval(&x, &y).unwrap() * dual - (y[0] * xi[0] + y[1] * xi[1]);
        prop_assert!(slack >= -1e-9, "slack {}", slack);
    }

    #[test]
    fn gradient_of_distance_has_unit_length(a in small_vec(0.4), b in small_vec(0.4), x in ball_point(0.3)) {
        prop_assume!(x[0].hypot(x[1]) > 1e-3);
        let psi = HomogeneousFn::randers(a).unwrap();
        let phi = HomogeneousFn::scaled(0.5, HomogeneousFn::randers(b).unwrap());
        for family in [Family::K0, Family::Km1] {
            let m = family.build(&psi, &phi).unwrap();
            let g = analysis::grad_r(family, &psi, &phi, &x).unwrap();
            prop_assert!((m.eval(&x, &g).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn distance_triangle_inequality(p in ball_point(0.8), q in ball_point(0.8), r in ball_point(0.8)) {
        let m = FinslerMetric::closed_form(ClosedKind::Berwald, 2).unwrap();
        let d = |a: &[f64], b: &[f64]| geometry::distance_formula(&m, 0.0, a, b).unwrap();
        prop_assert!(d(&p, &q) + d(&q, &r) - d(&p, &r) >= -1e-9);
    }
}
