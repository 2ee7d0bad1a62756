//! Projective factor, flag curvature, geodesic profiles and distances.

use serde::{Deserialize, Serialize};

use crate::diff::{self, Steps};
use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics::FinslerMetric;
use crate::quad;
use crate::sampling;
use crate::scalar::{lit, Real};
use crate::vecops::{self, axpy, check_dim, norm, scale, sub};

/// Largest step `h ≤ h0` with `x ± 2h·y` inside the domain.
fn safe_step<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T], h0: T) -> Result<T> {
    let mut h = h0;
    let two = lit::<T>(2.0);
    for _ in 0..60 {
        if metric.contains(&axpy(x, two * h, y)) && metric.contains(&axpy(x, -two * h, y)) {
            return Ok(h);
        }
        h = h * lit(0.5);
    }
    Err(Error::OutsideDomain)
}

/// `(g, g', g'')` at `s = 0` for `g(s) = F(x + s y, y)`.
fn line_derivatives<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T], rel: T) -> Result<(T, T, T)> {
    let ny = norm(y);
    if ny == T::zero() {
        return Err(Error::ZeroVector);
    }
    let h = safe_step(metric, x, y, rel * norm(x).max(T::one()) / ny)?;
    let two = lit::<T>(2.0);
    let g = |s: T| metric.eval(&axpy(x, s, y), y);
    let g0 = g(T::zero())?;
    let gp = g(h)?;
    let gm = g(-h)?;
    let gp2 = g(two * h)?;
    let gm2 = g(-two * h)?;
    let d1 = (lit::<T>(8.0) * (gp - gm) - (gp2 - gm2)) / (lit::<T>(12.0) * h);
    let fine = (gp - two * g0 + gm) / (h * h);
    let coarse = (gp2 - two * g0 + gm2) / (lit::<T>(4.0) * h * h);
    Ok((g0, d1, (lit::<T>(4.0) * fine - coarse) / lit(3.0)))
}

/// `P = yᵏF_{xᵏ}/(2F)` by central differences along the line through `x`.
pub fn projective_value<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<T> {
    check_dim(y, metric.dim())?;
    let ny = norm(y);
    if ny == T::zero() {
        return Err(Error::ZeroVector);
    }
    if !metric.contains(x) {
        return Err(Error::OutsideDomain);
    }
    let h = safe_step(metric, x, y, metric.steps().first * norm(x).max(T::one()) / ny)?;
    let g0 = metric.eval(x, y)?;
    let d = diff::d1(|s| metric.eval(&axpy(x, s, y), y), h)?;
    Ok(d / (lit::<T>(2.0) * g0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectiveData<T> {
    pub p: T,
    pub dp_dx: Vec<T>,
    pub dp_dy: Vec<T>,
}

/// `P` with its `x`- and `y`-gradients (nested differences).
pub fn projective_factor<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<ProjectiveData<T>> {
    let p = projective_value(metric, x, y)?;
    let steps = metric.steps();
    let hx = nested_x_step(metric, x, steps)?;
    let dp_dx = diff::gradient(|q| projective_value(metric, q, y), x, hx)?;
    let hy = steps.nested * norm(y).max(T::one());
    let dp_dy = diff::gradient(|w| projective_value(metric, x, w), y, hy)?;
    Ok(ProjectiveData { p, dp_dx, dp_dy })
}

/// Nested step in `x`, shrunk until every coordinate stencil stays in the domain.
fn nested_x_step<T: Real>(metric: &FinslerMetric<T>, x: &[T], steps: Steps<T>) -> Result<T> {
    let mut h = steps.nested * norm(x).max(T::one());
    let n = metric.dim();
    for _ in 0..60 {
        let ok = (0..n).all(|k| {
            let e = vecops::basis::<T>(n, k);
            // The inner line stencil also needs room, hence the factor 3.
            metric.contains(&axpy(x, lit::<T>(3.0) * h, &e)) && metric.contains(&axpy(x, lit::<T>(-3.0) * h, &e))
        });
        if ok {
            return Ok(h);
        }
        h = h * lit(0.5);
    }
    Err(Error::OutsideDomain)
}

/// Residuals of `F_{xᵏ} = [PF]_{yᵏ}` and `P_{xᵏ} = PP_{yᵏ} − (1/3F)[K F³]_{yᵏ}`.
pub fn berwald_residuals<T: Real>(metric: &FinslerMetric<T>, k: T, x: &[T], y: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    check_dim(x, metric.dim())?;
    check_dim(y, metric.dim())?;
    if vecops::is_zero(y) {
        return Err(Error::ZeroVector);
    }
    let steps = metric.steps();
    let f = metric.eval(x, y)?;
    let hx1 = nested_x_step(metric, x, Steps { nested: steps.first, ..steps })?;
    let fx = diff::gradient(|q| metric.eval(q, y), x, hx1)?;
    let hy1 = steps.first * norm(y).max(T::one());
    let fy = diff::gradient(|w| metric.eval(x, w), y, hy1)?;
    let data = projective_factor(metric, x, y)?;
    let hy = steps.nested * norm(y).max(T::one());
    let pf_y = diff::gradient(|w| Ok(projective_value(metric, x, w)? * metric.eval(x, w)?), y, hy)?;
    let n = metric.dim();
    let r1 = (0..n).map(|i| fx[i] - pf_y[i]).collect();
    let r2 = (0..n).map(|i| data.dp_dx[i] - data.p * data.dp_dy[i] + k * f * fy[i]).collect();
    Ok((r1, r2))
}

/// `K = (P² − yⁱP_{xⁱ})/F²` from derivatives of `s ↦ F(x + s y, y)`.
pub fn curvature_formula<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<T> {
    check_dim(y, metric.dim())?;
    if !metric.contains(x) {
        return Err(Error::OutsideDomain);
    }
    let (g, g1, g2) = line_derivatives(metric, x, y, metric.steps().second)?;
    let three = lit::<T>(3.0);
    Ok((three * g1 * g1 - lit::<T>(2.0) * g * g2) / (lit::<T>(4.0) * g.powi(4)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport<T> {
    pub k_formula: T,
    pub k_profile: T,
    pub berwald_r1: Vec<T>,
    pub berwald_r2: Vec<T>,
}

/// Curvature from the formula, from a fitted geodesic profile, and Berwald residuals at the formula value.
pub fn flag_curvature<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<CurvatureReport<T>> {
    let k_formula = curvature_formula(metric, x, y)?;
    let k_profile = curvature_profile(metric, x, y)?;
    let k = metric.curvature_hint().unwrap_or(k_formula);
    let (berwald_r1, berwald_r2) = berwald_residuals(metric, k, x, y)?;
    Ok(CurvatureReport { k_formula, k_profile, berwald_r1, berwald_r2 })
}

/// RK4 for `f'' = −2P(x + f ŷ, ŷ) f'²` from `(f, f') = (0, 1)` with step `dt` for `steps` steps.
fn integrate_profile<T: Real>(metric: &FinslerMetric<T>, x: &[T], yh: &[T], dt: T, steps: usize) -> Result<Vec<(T, T, T)>> {
    let rhs = |f: T, fp: T| -> Result<T> {
        let p = axpy(x, f, yh);
        if !p.iter().all(|v| v.is_finite()) || !metric.contains(&p) {
            return Err(Error::LeftDomain { t: f64::NAN });
        }
        Ok(lit::<T>(-2.0) * projective_value(metric, &p, yh)? * fp * fp)
    };
    let half = lit::<T>(0.5);
    let sixth = lit::<T>(1.0 / 6.0);
    let two = lit::<T>(2.0);
    let (mut t, mut f, mut fp) = (T::zero(), T::zero(), T::one());
    let mut out = Vec::with_capacity(steps + 1);
    out.push((t, f, fp));
    for _ in 0..steps {
        let stage = |t: T, r: Result<T>| r.map_err(|e| match e {
            Error::LeftDomain { .. } => Error::LeftDomain { t: crate::scalar::to_f64(t) },
            e => e,
        });
        let k1 = stage(t, rhs(f, fp))?;
        let k2 = stage(t, rhs(f + half * dt * fp, fp + half * dt * k1))?;
        let k3 = stage(t, rhs(f + half * dt * (fp + half * dt * k1), fp + half * dt * k2))?;
        let k4 = stage(t, rhs(f + dt * (fp + half * dt * k2), fp + dt * k3))?;
        f = f + dt * (fp + dt * (k1 + k2 + k3) * sixth);
        fp = fp + dt * (k1 + two * k2 + two * k3 + k4) * sixth;
        t = t + dt;
        if !(f.is_finite() && fp.is_finite()) {
            return Err(Error::LeftDomain { t: crate::scalar::to_f64(t) });
        }
        out.push((t, f, fp));
    }
    Ok(out)
}

/// `K = (2f'''f' − 3f''²)/(4f'²F²)` at `t = 0`, with `f` integrated on `[−T, T]` and `f'` fitted by a polynomial.
pub fn curvature_profile<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<T> {
    let f0 = metric.eval(x, y)?;
    if !(f0 > T::zero()) {
        return Err(Error::ZeroVector);
    }
    let yh = scale(T::one() / f0, y);
    let span = lit::<T>(0.1);
    let n = 1000;
    let dt = span / lit(n as f64);
    let fwd = integrate_profile(metric, x, &yh, dt, n).map_err(|_| Error::IntegrationFailure)?;
    let bwd = integrate_profile(metric, x, &yh, -dt, n).map_err(|_| Error::IntegrationFailure)?;
    let mut ts = Vec::with_capacity(2 * n + 1);
    let mut vs = Vec::with_capacity(2 * n + 1);
    for &(t, _, fp) in bwd.iter().rev().chain(fwd.iter().skip(1)) {
        ts.push(t / span);
        vs.push(fp);
    }
    let c = linalg::polyfit(&ts, &vs, 8);
    let f2 = c[1] / span;
    let f3 = lit::<T>(2.0) * c[2] / (span * span);
    let f1 = c[0];
    Ok((lit::<T>(2.0) * f3 * f1 - lit::<T>(3.0) * f2 * f2) / (lit::<T>(4.0) * f1 * f1))
}

/// Closed-form reparametrisation families along straight lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ProfileFamily {
    /// `f = t`
    K0Line,
    /// `f = ct/(c + t)`
    K0Fractional { c: f64 },
    /// `f = (e^{2t} − 1)/2`
    Km1A,
    /// `f = (1 − e^{−2t})/2`
    Km1B,
    /// `f = (c − 1)(e^{2t} − 1)/(2(c e^{2t} − 1))`
    Km1C { c: f64 },
    /// `f = cos²c [tan(t + c) − tan c]`
    K1 { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicProfile {
    pub family: ProfileFamily,
    /// Curvature scale `μ = √|K|`: the profile is `f(μt)/μ` for the unit family.
    pub scale: f64,
    /// Largest `t` for which the profile stays finite (may be infinite).
    pub max_t: f64,
}

impl GeodesicProfile {
    /// Profile for flag curvature `k` and normalised projective factor `p = P(x, y/F)`.
    pub fn for_curvature(k: f64, p: f64) -> GeodesicProfile {
        let tol = 1e-9;
        if k.abs() < tol {
            if p.abs() < 1e-12 {
                return GeodesicProfile { family: ProfileFamily::K0Line, scale: 1.0, max_t: f64::INFINITY };
            }
            let c = 1.0 / p;
            let max_t = if c < 0.0 { -c } else { f64::INFINITY };
            return GeodesicProfile { family: ProfileFamily::K0Fractional { c }, scale: 1.0, max_t };
        }
        let mu = k.abs().sqrt();
        let q = p / mu;
        if k < 0.0 {
            let (family, max_t) = if (q + 1.0).abs() < tol {
                (ProfileFamily::Km1A, f64::INFINITY)
            } else if (q - 1.0).abs() < tol {
                (ProfileFamily::Km1B, f64::INFINITY)
            } else {
                let c = (q + 1.0) / (q - 1.0);
                // Blow-up where c e^{2t} = 1.
                let max_t = if c > 1.0 { -0.5 * c.ln() } else { f64::INFINITY };
                let max_t = if max_t > 0.0 { max_t } else { f64::INFINITY };
                (ProfileFamily::Km1C { c }, max_t)
            };
            return GeodesicProfile { family, scale: mu, max_t: max_t / mu };
        }
        let c = (-q).atan();
        GeodesicProfile { family: ProfileFamily::K1 { c }, scale: mu, max_t: (std::f64::consts::FRAC_PI_2 - c) / mu }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = self.scale * t;
        let unit = match self.family {
            ProfileFamily::K0Line => s,
            ProfileFamily::K0Fractional { c } => c * s / (c + s),
            ProfileFamily::Km1A => 0.5 * (2.0 * s).exp_m1(),
            ProfileFamily::Km1B => -0.5 * (-2.0 * s).exp_m1(),
            ProfileFamily::Km1C { c } => (c - 1.0) * (2.0 * s).exp_m1() / (2.0 * (c * (2.0 * s).exp() - 1.0)),
            ProfileFamily::K1 { c } => c.cos().powi(2) * ((s + c).tan() - c.tan()),
        };
        unit / self.scale
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Geodesic<T> {
    /// `(t, f(t), f'(t))` samples.
    pub samples: Vec<(T, T, T)>,
    /// Points `x + f(t) ŷ`.
    pub points: Vec<Vec<T>>,
    /// Unit-speed direction `ŷ = y/F(x, y)`.
    pub direction: Vec<T>,
    pub profile: Option<GeodesicProfile>,
    /// Max `|f − profile|` over the samples.
    pub fit_residual: Option<f64>,
}

/// Integrates the reparametrisation of the straight line through `x` in direction `y` on `[0, t_end]`.
pub fn geodesic<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T], t_end: T) -> Result<Geodesic<T>> {
    check_dim(x, metric.dim())?;
    let f0 = metric.eval(x, y)?;
    if !(f0 > T::zero()) {
        return Err(Error::ZeroVector);
    }
    let yh = scale(T::one() / f0, y);
    let steps = (crate::scalar::to_f64(t_end.abs()) / 1e-3).ceil().max(1000.0) as usize;
    let dt = t_end / lit(steps as f64);
    let samples = integrate_profile(metric, x, &yh, dt, steps)?;
    let points = samples.iter().map(|&(_, f, _)| axpy(x, f, &yh)).collect();
    let profile = match metric.curvature_hint() {
        Some(k) => {
            let p = projective_value(metric, x, &yh)?;
            Some(GeodesicProfile::for_curvature(crate::scalar::to_f64(k), crate::scalar::to_f64(p)))
        }
        None => None,
    };
    let fit_residual = profile.as_ref().map(|pr| {
        samples
            .iter()
            .map(|&(t, f, _)| (crate::scalar::to_f64(f) - pr.eval(crate::scalar::to_f64(t))).abs())
            .fold(0.0, f64::max)
    });
    Ok(Geodesic { samples, points, direction: yh, profile, fit_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceResult<T> {
    pub formula: T,
    pub integral: T,
    pub rel_err: T,
}

/// Closed-form distance between `x1` and `x2` for constant curvature `k`.
pub fn distance_formula<T: Real>(metric: &FinslerMetric<T>, k: T, x1: &[T], x2: &[T]) -> Result<T> {
    check_dim(x1, metric.dim())?;
    check_dim(x2, metric.dim())?;
    if !metric.contains(x1) || !metric.contains(x2) {
        return Err(Error::SegmentExitsDomain);
    }
    let y = sub(x2, x1);
    if vecops::is_zero(&y) {
        return Ok(T::zero());
    }
    let f = metric.eval(x1, &y)?;
    let p = match metric.known_projective(x1, &y) {
        Some(r) => r?,
        None => projective_value(metric, x1, &y)?,
    };
    let eps = lit::<T>(1e-12);
    if k.abs() < eps {
        let den = T::one() - p;
        if den <= eps {
            return Err(Error::DegenerateFormula);
        }
        return Ok(f / den);
    }
    let mu = k.abs().sqrt();
    let fs = mu * f;
    if k < T::zero() {
        let num = T::one() - p + fs;
        let den = T::one() - p - fs;
        if den <= eps || num <= T::zero() {
            return Err(Error::DegenerateFormula);
        }
        return Ok(lit::<T>(0.5) * (num / den).ln() / mu);
    }
    let t = ((fs * fs + p * p - p) / fs).atan() + (p / fs).atan();
    if !(t > T::zero()) {
        return Err(Error::DegenerateFormula);
    }
    Ok(t / mu)
}

/// `∫₀¹ F(x1 + t(x2 − x1), x2 − x1) dt`.
pub fn segment_length<T: Real>(metric: &FinslerMetric<T>, x1: &[T], x2: &[T]) -> Result<T> {
    if !metric.contains(x1) || !metric.contains(x2) {
        return Err(Error::SegmentExitsDomain);
    }
    let y = sub(x2, x1);
    quad::integrate(
        |t| {
            let p = axpy(x1, t, &y);
            metric.eval(&p, &y).map_err(|e| if e == Error::OutsideDomain { Error::SegmentExitsDomain } else { e })
        },
        T::zero(),
        T::one(),
        lit(1e-10),
    )
}

pub fn distance<T: Real>(metric: &FinslerMetric<T>, k: T, x1: &[T], x2: &[T]) -> Result<DistanceResult<T>> {
    let formula = distance_formula(metric, k, x1, x2)?;
    let integral = segment_length(metric, x1, x2)?;
    let rel_err = (formula - integral).abs() / formula.max(lit(1e-300));
    Ok(DistanceResult { formula, integral, rel_err })
}

/// `sup F(x, −y)/F(x, y)` over the given points and sampled directions.
pub fn reversibility<T: Real>(metric: &FinslerMetric<T>, points: &[Vec<T>], directions: usize) -> Result<T> {
    let dirs = sampling::unit_directions::<T>(metric.dim(), directions, 23);
    let mut worst = T::zero();
    for x in points {
        for d in &dirs {
            let r = metric.eval(x, &vecops::neg(d))? / metric.eval(x, d)?;
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Reversibility along the ray `s · dir` at the given fractions of the boundary parameter.
pub fn reversibility_trend<T: Real>(metric: &FinslerMetric<T>, dir: &[T], fractions: &[T], directions: usize) -> Result<Vec<T>> {
    let s_max = metric.domain().boundary_param(dir).ok_or(Error::BadParameter("unbounded ray".into()))?;
    fractions.iter().map(|&f| reversibility(metric, &[scale(f * s_max, dir)], directions)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport<T> {
    pub fractions: Vec<T>,
    /// `d(0, x)` along the ray.
    pub forward: Vec<T>,
    /// `d(x, 0)` along the ray.
    pub backward: Vec<T>,
    pub forward_diverges: bool,
    pub backward_bounded: bool,
}

pub const PROBE_FRACTIONS: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];

/// Distances to and from the origin approaching the boundary along `dir`.
pub fn completeness_probe<T: Real>(metric: &FinslerMetric<T>, k: T, dir: &[T]) -> Result<CompletenessReport<T>> {
    let s_max = metric.domain().boundary_param(dir).ok_or(Error::BadParameter("domain must be bounded".into()))?;
    let origin = vec![T::zero(); metric.dim()];
    let fractions: Vec<T> = PROBE_FRACTIONS.iter().map(|&f| lit(f)).collect();
    let mut forward = Vec::new();
    let mut backward = Vec::new();
    for &f in &fractions {
        let x = scale(f * s_max, dir);
        forward.push(distance_formula(metric, k, &origin, &x)?);
        backward.push(distance_formula(metric, k, &x, &origin)?);
    }
    let m = forward.len();
    let forward_diverges = forward[m - 1] - forward[m - 2] > lit(0.1);
    let backward_bounded = backward[m - 1] - backward[m - 2] < lit(0.01);
    Ok(CompletenessReport { fractions, forward, backward, forward_diverges, backward_bounded })
}

/// Recovers `F(x, y)` as `lim d(x, x + t y)/t`, Richardson-extrapolated over `t ∈ {1e-3, 1e-4, 1e-5}`.
pub fn busemann_mayer_recover<T: Real, D>(mut d: D, x: &[T], y: &[T]) -> Result<T>
where
    D: FnMut(&[T], &[T]) -> Result<T>,
{
    if vecops::is_zero(y) {
        return Err(Error::ZeroVector);
    }
    let q: Vec<T> = [1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&t| {
            let t = lit::<T>(t);
            d(x, &axpy(x, t, y)).map(|v| v / t)
        })
        .collect::<Result<_>>()?;
    let ten = lit::<T>(10.0);
    let r1 = (ten * q[1] - q[0]) / lit(9.0);
    let r2 = (ten * q[2] - q[1]) / lit(9.0);
    let v = (lit::<T>(100.0) * r2 - r1) / lit(99.0);
    if !v.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(v)
}

/// `∫_{−T}^{T} F(x + t y, y) dt` through the substitution `t = tan u`.
pub fn line_length<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T], t_max: T) -> Result<T> {
    let u = t_max.atan();
    quad::integrate(
        |u| {
            let t = u.tan();
            let c = u.cos();
            Ok(metric.eval(&axpy(x, t, y), y)? / (c * c))
        },
        -u,
        u,
        lit(1e-12),
    )
}
