//! Acceptance criteria: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::time::Instant;

use projflat::analysis::{self, Family};
use projflat::closed::ClosedKind;
use projflat::homogeneous::HomogeneousFn;
use projflat::metrics::{critical_lambda, FinslerMetric};
use projflat::tensor::{self, ScanOptions, Topology};
use projflat::{funk, geometry, sampling, sphere};

type Outcome = Result<(bool, String), String>;

fn euclid() -> HomogeneousFn<f64> {
    HomogeneousFn::euclidean(2)
}

fn closed(kind: ClosedKind<f64>) -> FinslerMetric<f64> {
    FinslerMetric::closed_form(kind, 2).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn randers_k0(a1: f64) -> FinslerMetric<f64> {
    closed(ClosedKind::RandersK0 { a: vec![a1, 0.0] })
}

fn randers_km1(a1: f64) -> FinslerMetric<f64> {
    closed(ClosedKind::RandersKm1 { a: vec![a1, 0.0], c: 2.0 })
}

fn funk_solver() -> Outcome {
    let mut rng = sampling::rng(1);
    let e = euclid();
    let f = ClosedKind::EuclidFunk;
    let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..1000)
        .map(|_| (sampling::random_in_ball(2, 0.99, &mut rng), sampling::random_in_ball(2, 2.0, &mut rng)))
        .collect();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (x, y) in &pts {
        let v = funk::solve_phi(&e, x, y).map_err(err)?.value;
        worst = worst.max(rel(v, f.eval(x, y)));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((worst < 1e-10 && secs < 1.0, format!("max rel err {worst:.2e}, {secs:.3} s")))
}

fn builders() -> Outcome {
    let mut rng = sampling::rng(2);
    let k0 = FinslerMetric::build_k0(euclid(), euclid()).map_err(err)?;
    let km1 = FinslerMetric::build_km1(euclid(), HomogeneousFn::zero(2)).map_err(err)?;
    let berwald = closed(ClosedKind::Berwald);
    let riemann = closed(ClosedKind::Riemann { lambda: -1.0 });
    let (mut w0, mut w1) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let x = sampling::random_in_ball(2, 0.99, &mut rng);
        let y = sampling::random_in_ball(2, 2.0, &mut rng);
        w0 = w0.max(rel(k0.eval(&x, &y).map_err(err)?, berwald.eval(&x, &y).map_err(err)?));
        w1 = w1.max(rel(km1.eval(&x, &y).map_err(err)?, riemann.eval(&x, &y).map_err(err)?));
    }
    Ok((w0 < 1e-8 && w1 < 1e-8, format!("k0 vs Berwald {w0:.2e}, km1 vs curvature −1 Riemann {w1:.2e}")))
}

struct Family3 {
    name: &'static str,
    metric: FinslerMetric<f64>,
    k: f64,
    tol: f64,
}

fn curvature_families() -> Vec<Family3> {
    vec![
        Family3 { name: "Berwald", metric: closed(ClosedKind::Berwald), k: 0.0, tol: 1e-5 },
        Family3 {
            name: "Hilbert ball",
            metric: FinslerMetric::hilbert_of(FinslerMetric::funk(euclid())),
            k: -1.0,
            tol: 1e-5,
        },
        Family3 { name: "Euclidean Funk", metric: closed(ClosedKind::EuclidFunk), k: -0.25, tol: 1e-5 },
        Family3 { name: "Bryant α=0.3", metric: closed(ClosedKind::Bryant { alpha: 0.3 }), k: 1.0, tol: 1e-4 },
    ]
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

fn curvature() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for fam in curvature_families() {
        let mut rng = sampling::rng(3);
        let (mut dev, mut res) = (0.0f64, 0.0f64);
        for _ in 0..100 {
            let x = fam.metric.domain().sample(2, 0.8, &mut rng);
            let y: Vec<f64> = sampling::random_unit(2, &mut rng);
            let k = geometry::curvature_formula(&fam.metric, &x, &y).map_err(err)?;
            let (r1, r2) = geometry::berwald_residuals(&fam.metric, fam.k, &x, &y).map_err(err)?;
            dev = dev.max((k - fam.k).abs());
            res = res.max(max_abs(&r1)).max(max_abs(&r2));
        }
        ok &= dev < fam.tol && res < 1e-4;
        parts.push(format!("{} |ΔK| {dev:.1e} residual {res:.1e}", fam.name));
    }
    Ok((ok, parts.join("; ")))
}

fn curvature_cross() -> Outcome {
    let psi = HomogeneousFn::randers(vec![0.2, -0.1]).map_err(err)?;
    let phi = HomogeneousFn::randers(vec![0.1, 0.3]).map_err(err)?;
    let mut fams: Vec<(String, FinslerMetric<f64>)> =
        curvature_families().into_iter().map(|f| (f.name.to_string(), f.metric)).collect();
    fams.push(("k0 builder".into(), FinslerMetric::build_k0(psi.clone(), phi.clone()).map_err(err)?));
    fams.push(("km1 builder".into(), FinslerMetric::build_km1(psi, HomogeneousFn::scaled(0.5, phi)).map_err(err)?));
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, m) in fams {
        let mut rng = sampling::rng(4);
        let mut w = 0.0f64;
        for _ in 0..50 {
            let x = m.domain().sample(2, 0.7, &mut rng);
            let y: Vec<f64> = sampling::random_unit(2, &mut rng);
            let a = geometry::curvature_formula(&m, &x, &y).map_err(err)?;
            let b = geometry::curvature_profile(&m, &x, &y).map_err(err)?;
            w = w.max((a - b).abs());
        }
        worst = worst.max(w);
        parts.push(format!("{name} {w:.1e}"));
    }
    Ok((worst < 1e-3, parts.join("; ")))
}

fn distances() -> Outcome {
    let fams: Vec<(&str, FinslerMetric<f64>, f64, f64)> = vec![
        ("K=0 Berwald", closed(ClosedKind::Berwald), 0.0, 0.95),
        ("K=−1 Hilbert ball", FinslerMetric::hilbert_of(FinslerMetric::funk(euclid())), -1.0, 0.95),
        ("K=−¼ Funk", closed(ClosedKind::EuclidFunk), -0.25, 0.95),
        ("K=1 Riemann", closed(ClosedKind::Riemann { lambda: 1.0 }), 1.0, 2.0),
        ("K=1 Bryant", closed(ClosedKind::Bryant { alpha: 0.3 }), 1.0, 2.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, m, k, radius) in &fams {
        let mut rng = sampling::rng(5);
        let mut w = 0.0f64;
        for _ in 0..200 {
            let a = sampling::random_in_ball(2, *radius, &mut rng);
            let b = sampling::random_in_ball(2, *radius, &mut rng);
            w = w.max(geometry::distance(m, *k, &a, &b).map_err(err)?.rel_err);
        }
        ok &= w < 1e-6;
        parts.push(format!("{name} {w:.1e}"));
    }
    let o = [0.0, 0.0];
    let spots = [
        (geometry::distance_formula(&fams[0].1, 0.0, &o, &[0.5, 0.0]).map_err(err)?, 1.0),
        (geometry::distance_formula(&fams[1].1, -1.0, &o, &[0.5, 0.0]).map_err(err)?, 0.5 * 3f64.ln()),
        (geometry::distance_formula(&fams[3].1, 1.0, &o, &[1.0, 0.0]).map_err(err)?, FRAC_PI_4),
    ];
    let spot = spots.iter().fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    ok &= spot < 1e-10;
    parts.push(format!("spot values max dev {spot:.1e}"));
    Ok((ok, parts.join("; ")))
}

fn randers_domain() -> Outcome {
    let cases = [
        (5f64.sqrt() / 3.0, "√5/3"),
        (2.0 * 2f64.sqrt() / 3.0, "2√2/3"),
        (34f64.sqrt() / 6.0, "√34/6"),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut slowest = 0.0f64;
    let mut violations = 0;
    for (i, (a1, name)) in cases.iter().enumerate() {
        let m = randers_k0(*a1);
        let start = Instant::now();
        let scan = tensor::scan_domain_2d(&m, &ScanOptions::new(400, 64)).map_err(err)?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let expected = match i {
            0 => matches!(scan.topology, Topology::Connected),
            1 => matches!(scan.topology, Topology::LineSplit(2)),
            _ => matches!(scan.topology, Topology::Split(2)),
        };
        ok &= expected;
        parts.push(format!("{name}: {:?}", scan.topology));
        violations += tensor::convexity_violations(&m, &scan, 200, 7);
        if i == 2 {
            let worst = scan
                .frontier
                .iter()
                .map(|f| tensor::hyperbola_residual(*a1, &f.point).map(f64::abs))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?
                .into_iter()
                .fold(0.0f64, f64::max);
            ok &= worst < 1e-4 && !scan.frontier.is_empty();
            parts.push(format!("hyperbola residual {worst:.1e} on {} frontier points", scan.frontier.len()));
        }
    }
    let t = tensor::split_transition(|a| Ok(randers_k0(a)), 0.9, 0.99, 200, 64, 1e-3).map_err(err)?;
    let target = 2.0 * 2f64.sqrt() / 3.0;
    ok &= (t - target).abs() < 0.01 && slowest < 60.0;
    parts.push(format!(
        "transition {t:.4} vs {target:.4}; slowest scan {slowest:.1} s on {} worker(s); convexity violations {violations}",
        rayon::current_num_threads()
    ));
    ok &= violations == 0;
    Ok((ok, parts.join("; ")))
}

fn km1_domain() -> Outcome {
    let lambda = critical_lambda(2.0).map_err(err)?;
    let below = tensor::scan_domain_2d(&randers_km1(0.9), &ScanOptions::new(200, 64)).map_err(err)?;
    let t = tensor::split_transition(|a| Ok(randers_km1(a)), 0.9, 0.995, 200, 64, 1e-3).map_err(err)?;
    let ok = below.components == 1 && (t - lambda).abs() < 0.01;
    Ok((ok, format!("a₁=0.9 gives {} component(s); transition {t:.4} vs Λ(2) = {lambda:.4}", below.components)))
}

fn sphere_global() -> Outcome {
    let bryant = closed(ClosedKind::Bryant { alpha: 0.3 });
    let o = [0.0, 0.0];
    let e1 = [1.0, 0.0];
    let line = geometry::line_length(&bryant, &o, &e1, 1e6).map_err(err)?;
    let mut rng = sampling::rng(8);
    let mut diam = 0.0f64;
    for _ in 0..200 {
        let a = sampling::random_in_ball(2, 50.0, &mut rng);
        let b = sampling::random_in_ball(2, 50.0, &mut rng);
        diam = diam.max(geometry::distance_formula(&bryant, 1.0, &a, &b).map_err(err)?);
    }
    let glued = sphere::glued_great_circle_length(&bryant, &o, &e1).map_err(err)?;
    let flat = sphere::equator_extension_check(FRAC_PI_4, 64).map_err(err)?;
    let round = sphere::equator_extension_check(0.3, 64).map_err(err)?;
    let ok = (line - PI).abs() < 1e-3
        && diam <= PI + 1e-9
        && (glued - TAU).abs() < 2e-3
        && flat.min_eig < 1e-6
        && round.min_eig > 1e-3;
    Ok((
        ok,
        format!(
            "line length {line:.6}; sampled diameter {diam:.6}; glued circle {glued:.6}; equator min eig {:.1e} (π/4), {:.1e} (0.3)",
            flat.min_eig, round.min_eig
        ),
    ))
}

fn analytic() -> Outcome {
    let psi = HomogeneousFn::randers(vec![0.2, -0.1]).map_err(err)?;
    let phi = HomogeneousFn::scaled(0.5, HomogeneousFn::randers(vec![0.1, 0.3]).map_err(err)?);
    let mut rng = sampling::rng(9);
    let (mut unit, mut sdiv, mut sdist) = (0.0f64, 0.0f64, 0.0f64);
    for family in [Family::K0, Family::Km1] {
        let m = family.build(&psi, &phi).map_err(err)?;
        for i in 0..100 {
            let x: Vec<f64> = sampling::random_in_ball(2, 0.45, &mut rng);
            let g = analysis::grad_r(family, &psi, &phi, &x).map_err(err)?;
            unit = unit.max((m.eval(&x, &g).map_err(err)? - 1.0).abs());
            if i < 20 {
                let s = analysis::s_curvature(&m, &x, &g).map_err(err)?;
                sdiv = sdiv.max((s.divergence - s.s).abs());
                sdist = sdist.max((s.distortion_rate - s.s).abs());
            }
        }
    }
    let rows = analysis::growth_check(Family::K0, &euclid(), &euclid(), &[1.0, 0.0], &[0.9, 0.99, 0.999]).map_err(err)?;
    let growth = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let half = HomogeneousFn::scaled(0.5, euclid());
    let m = FinslerMetric::build_km1(euclid(), half.clone()).map_err(err)?;
    let x = analysis::point_at_distance(Family::Km1, &euclid(), &half, &[1.0, 0.0], 8.0).map_err(err)?;
    let g = analysis::grad_r(Family::Km1, &euclid(), &half, &x).map_err(err)?;
    let s_lim = analysis::s_curvature(&m, &x, &g).map_err(err)?.s;
    let ok = unit < 1e-6 && sdiv < 1e-8 && sdist < 1e-3 && growth >= 0.5 && (s_lim - 3.0).abs() < 1e-2;
    Ok((
        ok,
        format!(
            "|F(x,∇r)−1| {unit:.1e}; |S−(n+1)P| {sdiv:.1e}; |S−dτ/dt| {sdist:.1e}; min growth ratio {growth:.3}; S at r=8 {s_lim:.6}"
        ),
    ))
}

fn property_suites() -> Outcome {
    let mut rng = sampling::rng(10);
    let (mut ind, mut tr, mut hom, mut slack) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for i in 0..20 {
        let a = sampling::random_in_ball(2, 0.6, &mut rng);
        let phi = HomogeneousFn::randers(a.clone()).map_err(err)?;
        let x = sampling::random_in_ball(2, 0.5, &mut rng);
        let xbar = sampling::random_in_ball(2, 0.3, &mut rng);
        ind = ind.max(funk::indicatrix_translation_check(&phi, &x, 64).map_err(err)?);
        tr = tr.max(funk::translate_base_check(&phi, &xbar, 10, i).map_err(err)?);
        for _ in 0..10 {
            let y = sampling::random_in_ball(2, 2.0, &mut rng);
            let s: f64 = sampling::uniform(0.05, 20.0, &mut rng);
            let v = funk::solve_phi(&phi, &x, &y).map_err(err)?.value;
            let w = funk::solve_phi(&phi, &x, &[s * y[0], s * y[1]]).map_err(err)?.value;
            hom = hom.max(rel(w, s * v));
        }
        let m = FinslerMetric::build_k0(euclid(), phi).map_err(err)?;
        for _ in 0..50 {
            let y: Vec<f64> = sampling::random_unit(2, &mut rng);
            let xi: Vec<f64> = sampling::random_in_ball(2, 3.0, &mut rng);
            let dual = analysis::co_metric(&m, &x, &xi).map_err(err)?.value;
            slack = slack.min(m.eval(&x, &y).map_err(err)? * dual - (y[0] * xi[0] + y[1] * xi[1]));
        }
    }
    let scan_m = randers_km1(0.97);
    let scan = tensor::scan_domain_2d(&scan_m, &ScanOptions::new(200, 64)).map_err(err)?;
    let violations = tensor::convexity_violations(&scan_m, &scan, 200, 11);
    let ok = ind < 1e-9 && tr < 1e-9 && hom < 1e-10 && slack >= -1e-9 && violations == 0;
    Ok((
        ok,
        format!(
            "indicatrix {ind:.1e}; translation {tr:.1e}; homogeneity {hom:.1e}; duality slack {slack:.1e}; convexity violations {violations} over {} components",
            scan.components
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Funk solver vs closed form", funk_solver),
        ("builders vs closed forms", builders),
        ("flag curvature and Berwald residuals", curvature),
        ("curvature formula vs geodesic profile", curvature_cross),
        ("distance formulas vs line integrals", distances),
        ("Randers domain evolution", randers_domain),
        ("curvature −1 domain transition", km1_domain),
        ("curvature 1 global lengths", sphere_global),
        ("analytic layer", analytic),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {detail} [{:.1} s]", i + 1, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
