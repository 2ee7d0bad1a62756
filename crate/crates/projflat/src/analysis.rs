//! Co-metric, gradient of the distance from the origin, S-curvature and growth of `F*(x, −dr)`.

use serde::{Deserialize, Serialize};

use crate::diff;
use crate::error::{Error, Result};
use crate::geometry;
use crate::homogeneous::HomogeneousFn;
use crate::linalg::{self, golden_min};
use crate::metrics::{classify, FinslerMetric};
use crate::sampling;
use crate::scalar::{lit, Real};
use crate::tensor;
use crate::vecops::{self, axpy, check_dim, dot, norm, scale};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoMetricValue<T> {
    pub value: T,
    pub maximizer: Vec<T>,
}

/// `F*(x, ξ) = sup ξ(y)/F(x, y)` over unit directions.
pub fn co_metric<T: Real>(metric: &FinslerMetric<T>, x: &[T], xi: &[T]) -> Result<CoMetricValue<T>> {
    check_dim(x, metric.dim())?;
    check_dim(xi, metric.dim())?;
    if !metric.contains(x) {
        return Err(Error::OutsideDomain);
    }
    if vecops::is_zero(xi) {
        return Ok(CoMetricValue { value: T::zero(), maximizer: vecops::basis(metric.dim(), 0) });
    }
    if metric.dim() == 2 {
        co_metric_2d(metric, x, xi)
    } else {
        co_metric_ascent(metric, x, xi)
    }
}

fn co_metric_2d<T: Real>(metric: &FinslerMetric<T>, x: &[T], xi: &[T]) -> Result<CoMetricValue<T>> {
    let count = 720;
    let angles = sampling::uniform_angles::<T>(count);
    let ratio = |t: T| -> Result<T> {
        let u = sampling::polar(t);
        Ok(dot(&u, xi) / metric.eval(x, &u)?)
    };
    let vals: Vec<T> = angles.iter().map(|&t| ratio(t)).collect::<Result<_>>()?;
    let best = (0..count).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    let step = T::PI() * lit::<T>(2.0 / count as f64);
    let mut failed = None;
    let (t, neg) = golden_min(
        |t| match ratio(t) {
            Ok(v) => -v,
            Err(e) => {
                failed = Some(e);
                T::infinity()
            }
        },
        angles[best] - step,
        angles[best] + step,
        lit(1e-10),
    );
    if let Some(e) = failed {
        return Err(e);
    }
    let (t, value) = if -neg >= vals[best] { (t, -neg) } else { (angles[best], vals[best]) };
    Ok(CoMetricValue { value, maximizer: sampling::polar(t) })
}

/// Projected gradient ascent on the unit sphere from 64 seeded starts.
fn co_metric_ascent<T: Real>(metric: &FinslerMetric<T>, x: &[T], xi: &[T]) -> Result<CoMetricValue<T>> {
    let n = metric.dim();
    let ratio = |u: &[T]| -> Result<T> { Ok(dot(u, xi) / metric.eval(x, u)?) };
    let mut seeds = sampling::unit_directions::<T>(n, 63, 41);
    seeds.push(vecops::unit(xi)?);
    let mut best: Option<(T, Vec<T>)> = None;
    let h = lit::<T>(1e-6);
    for seed in seeds {
        let mut u = seed;
        let mut v = ratio(&u)?;
        let mut eta = lit::<T>(0.1);
        for _ in 0..400 {
            let g = diff::gradient(|w| ratio(w), &u, h)?;
            let gn = norm(&g);
            if gn == T::zero() || eta * gn < lit(1e-13) {
                break;
            }
            let trial = vecops::unit(&axpy(&u, eta, &g))?;
            let tv = ratio(&trial)?;
            if tv > v {
                u = trial;
                v = tv;
                eta = eta * lit(2.0);
            } else {
                eta = eta * lit(0.5);
            }
        }
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, u));
        }
    }
    let (value, maximizer) = best.expect("at least one seed");
    Ok(CoMetricValue { value, maximizer })
}

/// The two constructive families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    K0,
    Km1,
}

impl Family {
    pub fn curvature(&self) -> i8 {
        match self {
            Family::K0 => 0,
            Family::Km1 => -1,
        }
    }

    pub fn build<T: Real>(&self, psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>) -> Result<FinslerMetric<T>> {
        match self {
            Family::K0 => FinslerMetric::build_k0(psi.clone(), phi.clone()),
            Family::Km1 => FinslerMetric::build_km1(psi.clone(), phi.clone()),
        }
    }

    fn domain_value<T: Real>(&self, psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>, x: &[T]) -> T {
        match self {
            Family::K0 => phi.eval(x),
            Family::Km1 => phi.eval(x) + psi.eval(x),
        }
    }
}

fn check_interior<T: Real>(family: Family, psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>, x: &[T]) -> Result<()> {
    check_dim(x, psi.dim())?;
    if vecops::is_zero(x) {
        return Err(Error::OriginExcluded);
    }
    if !(family.domain_value(psi, phi, x) < T::one() - lit(crate::funk::DOMAIN_MARGIN)) {
        return Err(Error::OutsideDomain);
    }
    Ok(())
}

/// `r(x) = d(0, x)`.
pub fn distance_from_origin<T: Real>(family: Family, psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>, x: &[T]) -> Result<T> {
    check_dim(x, psi.dim())?;
    if vecops::is_zero(x) {
        return Ok(T::zero());
    }
    check_interior(family, psi, phi, x)?;
    let (p, f) = (phi.eval(x), psi.eval(x));
    Ok(match family {
        Family::K0 => f / (T::one() - p),
        Family::Km1 => lit::<T>(0.5) * ((T::one() - p + f) / (T::one() - p - f)).ln(),
    })
}

/// Gradient vector of `r`, the Legendre dual of `dr`.
pub fn grad_r<T: Real>(family: Family, psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>, x: &[T]) -> Result<Vec<T>> {
    check_interior(family, psi, phi, x)?;
    let (p, f) = (phi.eval(x), psi.eval(x));
    let c = match family {
        Family::K0 => {
            let r = f / (T::one() - p);
            f / (f + r * p).powi(2)
        }
        Family::Km1 => (T::one() - p + f) * (T::one() - p - f) / f,
    };
    Ok(scale(c, x))
}

/// The differential `dr` as a covector.
pub fn dr<T: Real>(family: Family, psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>, x: &[T]) -> Result<Vec<T>> {
    check_interior(family, psi, phi, x)?;
    let (p, gp) = phi_value_grad(phi, x)?;
    let (f, gf) = psi.eval_and_grad(x)?;
    let n = x.len();
    Ok(match family {
        Family::K0 => {
            let d = T::one() - p;
            (0..n).map(|i| (gf[i] * d + f * gp[i]) / (d * d)).collect()
        }
        Family::Km1 => {
            let a = T::one() - p + f;
            let b = T::one() - p - f;
            let half = lit::<T>(0.5);
            (0..n).map(|i| half * ((gf[i] - gp[i]) / a + (gp[i] + gf[i]) / b)).collect()
        }
    })
}

fn phi_value_grad<T: Real>(phi: &HomogeneousFn<T>, x: &[T]) -> Result<(T, Vec<T>)> {
    if phi.is_zero_kind() {
        return Ok((T::zero(), vec![T::zero(); x.len()]));
    }
    phi.eval_and_grad(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SCurvature<T> {
    /// `(n + 1)P`.
    pub s: T,
    /// `∂(P yⁱ)/∂yⁱ` by central differences.
    pub divergence: T,
    /// `d/dt τ(γ(t), γ'(t))` at `t = 0` with `τ = ln √det g` (Lebesgue measure).
    pub distortion_rate: T,
}

fn projective<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<T> {
    match metric.known_projective(x, y) {
        Some(r) => r,
        None => geometry::projective_value(metric, x, y),
    }
}

/// Distortion `τ(x, y) = ln √det g(x, y)`.
pub fn distortion<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<T> {
    let g = tensor::fundamental_tensor(metric, x, y)?.g;
    let det = linalg::determinant(&g);
    if !(det > T::zero()) {
        return Err(Error::NonFinite);
    }
    Ok(lit::<T>(0.5) * det.ln())
}

pub fn s_curvature<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<SCurvature<T>> {
    check_dim(y, metric.dim())?;
    if vecops::is_zero(y) {
        return Err(Error::ZeroVector);
    }
    let n = metric.dim();
    let p = projective(metric, x, y)?;
    let s = lit::<T>((n + 1) as f64) * p;
    let h = metric.steps().first * norm(y).max(T::one());
    let mut divergence = T::zero();
    for i in 0..n {
        let e = vecops::basis::<T>(n, i);
        divergence = divergence
            + diff::d1(
                |t| {
                    let w = axpy(y, t, &e);
                    Ok(projective(metric, x, &w)? * w[i])
                },
                h,
            )?;
    }
    // Along the geodesic γ(t) = x + f(t)y with f'(0) = 1, and τ is 0-homogeneous in y.
    let ny = norm(y);
    let mut hs = metric.steps().nested * norm(x).max(T::one()) / ny;
    while !(metric.contains(&axpy(x, lit::<T>(4.0) * hs, y)) && metric.contains(&axpy(x, lit::<T>(-4.0) * hs, y))) {
        hs = hs * lit(0.5);
    }
    let distortion_rate = diff::d1(|t| distortion(metric, &axpy(x, t, y), y), hs)?;
    Ok(SCurvature { s, divergence, distortion_rate })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticReport<T> {
    pub grad_r: Vec<T>,
    pub s: T,
    pub distortion_rate: T,
    /// `F*(x, −dr)` over `r²` (curvature 0) or `e^{2r}` (curvature −1).
    pub bound_ratio: T,
}

pub fn analytic_report<T: Real>(family: Family, psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>, x: &[T]) -> Result<AnalyticReport<T>> {
    let metric = family.build(psi, phi)?;
    let grad = grad_r(family, psi, phi, x)?;
    let sc = s_curvature(&metric, x, &grad)?;
    let row = growth_row(&metric, family, psi, phi, x, T::zero())?;
    Ok(AnalyticReport { grad_r: grad, s: sc.s, distortion_rate: sc.distortion_rate, bound_ratio: row.ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow<T> {
    pub fraction: T,
    pub r: T,
    pub fstar: T,
    pub ratio: T,
}

fn growth_row<T: Real>(
    metric: &FinslerMetric<T>,
    family: Family,
    psi: &HomogeneousFn<T>,
    phi: &HomogeneousFn<T>,
    x: &[T],
    fraction: T,
) -> Result<GrowthRow<T>> {
    let r = distance_from_origin(family, psi, phi, x)?;
    let d = dr(family, psi, phi, x)?;
    let fstar = co_metric(metric, x, &vecops::neg(&d))?.value;
    let reference = match family {
        Family::K0 => r * r,
        Family::Km1 => (lit::<T>(2.0) * r).exp(),
    };
    Ok(GrowthRow { fraction, r, fstar, ratio: fstar / reference })
}

/// `F*(x, −dr)` against `r²` or `e^{2r}` along the ray `s · dir` at fractions of the boundary parameter.
pub fn growth_check<T: Real>(
    family: Family,
    psi: &HomogeneousFn<T>,
    phi: &HomogeneousFn<T>,
    dir: &[T],
    fractions: &[T],
) -> Result<Vec<GrowthRow<T>>> {
    if classify(psi, phi, family.curvature())?.backward_complete {
        return Err(Error::WrongClass);
    }
    let metric = family.build(psi, phi)?;
    let s_max = metric.domain().boundary_param(dir).ok_or(Error::BadParameter("ray must reach the boundary".into()))?;
    fractions
        .iter()
        .map(|&f| growth_row(&metric, family, psi, phi, &scale(f * s_max, dir), f))
        .collect()
}

/// Point on the ray `s · dir` with `r = target`, by bisection.
pub fn point_at_distance<T: Real>(family: Family, psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>, dir: &[T], target: T) -> Result<Vec<T>> {
    let v = family.domain_value(psi, phi, dir);
    if !(v > T::zero()) {
        return Err(Error::BadParameter("ray must reach the boundary".into()));
    }
    let (mut lo, mut hi) = (T::zero(), T::one() / v);
    for _ in 0..200 {
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let x = scale(mid, dir);
        let r = distance_from_origin(family, psi, phi, &x).unwrap_or(T::infinity());
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(scale(lo, dir))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed::ClosedKind;

    fn euclid() -> HomogeneousFn<f64> {
        HomogeneousFn::euclidean(2)
    }

    #[test]
    fn euclidean_is_self_dual() {
        let m = FinslerMetric::<f64>::minkowski(euclid());
        let v = co_metric(&m, &[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!((v.value - 5.0).abs() < 1e-12);
        let m3 = FinslerMetric::<f64>::minkowski(HomogeneousFn::euclidean(3));
        let v = co_metric(&m3, &[0.0; 3], &[1.0, 2.0, 2.0]).unwrap();
        assert!((v.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn randers_dual_matches_dense_scan() {
        let r = HomogeneousFn::randers(vec![0.5, 0.0]).unwrap();
        let m = FinslerMetric::minkowski(r.clone());
        let v = co_metric(&m, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let brute = (0..1_000_000)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 1e6;
                t.cos() / r.eval(&[t.cos(), t.sin()])
            })
            .fold(f64::MIN, f64::max);
        assert!((v.value - brute).abs() < 1e-10);
        // Equality case of the duality inequality.
        let u = &v.maximizer;
        assert!((dot(u, &[1.0, 0.0]) - v.value * r.eval(u)).abs() < 1e-8);
    }

    #[test]
    fn gradient_examples() {
        let g = grad_r(Family::K0, &euclid(), &euclid(), &[0.5, 0.0]).unwrap();
        assert!((g[0] - 0.25).abs() < 1e-15 && g[1] == 0.0);
        let b = FinslerMetric::closed_form(ClosedKind::Berwald, 2).unwrap();
        assert!((b.eval(&[0.5, 0.0], &g).unwrap() - 1.0).abs() < 1e-12);
        let g = grad_r(Family::Km1, &euclid(), &HomogeneousFn::zero(2), &[0.5, 0.0]).unwrap();
        assert!((g[0] - 0.75).abs() < 1e-15);
        assert_eq!(grad_r(Family::K0, &euclid(), &euclid(), &[0.0, 0.0]), Err(Error::OriginExcluded));
    }

    #[test]
    fn gradient_has_unit_length_near_origin() {
        let psi = HomogeneousFn::<f64>::randers(vec![0.2, 0.1]).unwrap();
        let phi = HomogeneousFn::randers(vec![-0.1, 0.3]).unwrap();
        let m = FinslerMetric::build_k0(psi.clone(), phi.clone()).unwrap();
        let x = [1e-6f64, -2e-6];
        let g = grad_r(Family::K0, &psi, &phi, &x).unwrap();
        assert!((m.eval(&x, &g).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn s_curvature_examples() {
        let m = FinslerMetric::<f64>::minkowski(euclid());
        let s = s_curvature(&m, &[0.3, 0.1], &[1.0, 0.5]).unwrap();
        assert!(s.s == 0.0 && s.distortion_rate.abs() < 1e-6);

        let b = FinslerMetric::build_k0(euclid(), euclid()).unwrap();
        let x = [0.5, 0.0];
        let g = grad_r(Family::K0, &euclid(), &euclid(), &x).unwrap();
        let s = s_curvature(&b, &x, &g).unwrap();
        assert!((s.s - 1.5).abs() < 1e-10);
        assert!((s.divergence - s.s).abs() < 1e-8);
        assert!((s.distortion_rate - s.s).abs() < 1e-3, "{s:?}");

        let f = FinslerMetric::<f64>::closed_form(ClosedKind::EuclidFunk, 2).unwrap();
        let y = [0.4f64, -0.3];
        let s = s_curvature(&f, &[0.2f64, 0.2], &y).unwrap();
        let fv = f.eval(&[0.2, 0.2], &y).unwrap();
        assert!((s.s - 1.5 * fv).abs() < 1e-12);
        assert!((s.distortion_rate - s.s).abs() < 1e-3);
    }

    #[test]
    fn growth_examples() {
        let rows = growth_check(Family::K0, &euclid(), &euclid(), &[1.0, 0.0], &[0.9, 0.99, 0.999]).unwrap();
        assert!((rows[0].r - 9.0).abs() < 1e-9);
        assert!(rows[0].ratio >= 1.0);
        assert!(rows.iter().all(|r| r.ratio > 0.5));
        let err = growth_check(Family::Km1, &euclid(), &HomogeneousFn::zero(2), &[1.0, 0.0], &[0.9]);
        assert_eq!(err, Err(Error::WrongClass));
    }

    #[test]
    fn s_limit_on_bounded_case() {
        let phi = HomogeneousFn::scaled(0.5, euclid());
        let m = FinslerMetric::build_km1(euclid(), phi.clone()).unwrap();
        let x = point_at_distance(Family::Km1, &euclid(), &phi, &[1.0, 0.0], 8.0).unwrap();
        let r = distance_from_origin(Family::Km1, &euclid(), &phi, &x).unwrap();
        assert!((r - 8.0).abs() < 1e-6);
        let g = grad_r(Family::Km1, &euclid(), &phi, &x).unwrap();
        let s = s_curvature(&m, &x, &g).unwrap();
        assert!((s.s / 3.0 - 1.0).abs() < 1e-2, "{}", s.s);
    }
}
