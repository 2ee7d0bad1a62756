//! The central projection of the plane onto the open upper hemisphere and
//! spherical coordinates `(φ, θ¹, …, θⁿ⁻¹)` on it.
//!
//! A chart point `ζ = (φ, θ)` corresponds to `x = tan φ · u(θ)` where `u(θ)` is the
//! unit vector with hyperspherical angles `θ`. Negative `φ` is allowed and
//! describes `−tan|φ| · u(θ)`, which is how the antipodal equator is reached.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metrics::FinslerMetric;
use crate::quad;
use crate::sampling;
use crate::scalar::{lit, to_f64, Real};
use crate::tensor;
use crate::vecops::{dot, norm, scale};

/// `𝔭(x) = (x, 1)/√(1 + |x|²)`.
pub fn project<T: Real>(x: &[T]) -> Vec<T> {
    let s = (T::one() + dot(x, x)).sqrt();
    let mut w: Vec<T> = x.iter().map(|&v| v / s).collect();
    w.push(T::one() / s);
    w
}

/// Inverse of [`project`] on the open upper hemisphere.
pub fn inverse<T: Real>(w: &[T]) -> Result<Vec<T>> {
    let n = w.len() - 1;
    let last = w[n];
    if !(last > T::zero()) {
        return Err(Error::NotUpperHemisphere);
    }
    Ok(w[..n].iter().map(|&v| v / last).collect())
}

/// Unit vector `u(θ)` with `n − 1` hyperspherical angles.
pub fn direction<T: Real>(theta: &[T]) -> Vec<T> {
    let n = theta.len() + 1;
    (0..n).map(|k| factors(theta, k).iter().fold(T::one(), |p, f| p * f.value())).collect()
}

#[derive(Clone, Copy)]
enum Factor<T> {
    Sin(T),
    Cos(T),
}

impl<T: Real> Factor<T> {
    fn value(&self) -> T {
        match *self {
            Factor::Sin(t) => t.sin(),
            Factor::Cos(t) => t.cos(),
        }
    }

    fn derivative(&self) -> T {
        match *self {
            Factor::Sin(t) => t.cos(),
            Factor::Cos(t) => -t.sin(),
        }
    }
}

/// Factors of `uᵏ`: `sin θ^α` for `α < k`, then `cos θᵏ` unless `k` is the last index.
fn factors<T: Real>(theta: &[T], k: usize) -> Vec<Factor<T>> {
    let m = theta.len();
    let mut out: Vec<Factor<T>> = theta[..k.min(m)].iter().map(|&t| Factor::Sin(t)).collect();
    if k < m {
        out.push(Factor::Cos(theta[k]));
    }
    out
}

/// `∂uᵏ/∂θʲ`
fn direction_partial<T: Real>(theta: &[T], k: usize, j: usize) -> T {
    let fs = factors(theta, k);
    if j >= fs.len() {
        return T::zero();
    }
    fs.iter()
        .enumerate()
        .fold(T::one(), |p, (i, f)| p * if i == j { f.derivative() } else { f.value() })
}

/// Chart coordinates `(φ, θ)` of a plane point, `φ ∈ [0, π/2)`.
pub fn to_chart<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let r = norm(x);
    let mut z = vec![r.atan()];
    let mut theta = vec![T::zero(); n - 1];
    if r > T::zero() {
        for k in 0..n - 1 {
            let tail = x[k..].iter().map(|&v| v * v).sum::<T>().sqrt();
            theta[k] = if tail > T::zero() { (x[k] / tail).max(-T::one()).min(T::one()).acos() } else { T::zero() };
        }
        if x[n - 1] < T::zero() {
            theta[n - 2] = T::PI() + T::PI() - theta[n - 2];
        }
    }
    z.extend(theta);
    z
}

/// Plane point of a chart point.
pub fn from_chart<T: Real>(z: &[T]) -> Vec<T> {
    scale(z[0].tan(), &direction(&z[1..]))
}

/// Point on the unit sphere `(sin φ · u(θ), cos φ)`.
pub fn sphere_point<T: Real>(z: &[T]) -> Vec<T> {
    let mut w = scale(z[0].sin(), &direction(&z[1..]));
    w.push(z[0].cos());
    w
}

/// `J[k][i] = ∂xᵏ/∂ζⁱ` for `x = tan φ · u(θ)`.
pub fn jacobian<T: Real>(z: &[T]) -> Vec<Vec<T>> {
    let n = z.len();
    let theta = &z[1..];
    let t = z[0].tan();
    let sec2 = T::one() + t * t;
    let u = direction(theta);
    (0..n)
        .map(|k| {
            let mut row = vec![sec2 * u[k]];
            row.extend((0..n - 1).map(|j| t * direction_partial(theta, k, j)));
            row
        })
        .collect()
}

fn check_chart<T: Real>(z: &[T]) -> Result<()> {
    if !(z[0].abs() < T::FRAC_PI_2()) {
        return Err(Error::NotUpperHemisphere);
    }
    let m = z.len() - 1;
    let tiny = lit::<T>(1e-300);
    if m >= 2 && z[1..m].iter().any(|t| t.sin().abs() <= tiny) {
        return Err(Error::CoordinateSingularity);
    }
    Ok(())
}

/// Plane point and plane vector for a chart point and chart vector.
pub fn chart_to_plane<T: Real>(z: &[T], v: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if z.len() != v.len() || z.len() < 2 {
        return Err(Error::DimensionMismatch { expected: z.len(), got: v.len() });
    }
    check_chart(z)?;
    let j = jacobian(z);
    let y = j.iter().map(|row| dot(row, v)).collect();
    Ok((from_chart(z), y))
}

/// Pulls a planar metric back to chart coordinates on the upper hemisphere.
pub fn pullback<T: Real>(planar: FinslerMetric<T>) -> FinslerMetric<T> {
    FinslerMetric::pullback(planar)
}

/// Squared round metric of `𝕊ⁿ⁻¹` at angles `θ` on the angle vector `w`.
pub fn round_angle_sq<T: Real>(theta: &[T], w: &[T]) -> T {
    let mut weight = T::one();
    let mut total = T::zero();
    for i in 0..theta.len() {
        total = total + weight * w[i] * w[i];
        let s = theta[i].sin();
        weight = weight * s * s;
    }
    total
}

/// The standard sphere metric `√(dφ² + sin²φ · g_{𝕊ⁿ⁻¹})` in chart coordinates.
pub fn round_metric<T: Real>(z: &[T], v: &[T]) -> T {
    let s = z[0].sin();
    (v[0] * v[0] + s * s * round_angle_sq(&z[1..], &v[1..])).sqrt()
}

/// Closed-form limit of the Bryant pull-back at the equator.
pub fn equator_limit_metric<T: Real>(alpha: T, theta: &[T], v: &[T]) -> T {
    let two = lit::<T>(2.0);
    let c = (two * alpha).cos();
    let s = (two * alpha).sin();
    let dphi = v[0] * v[0];
    let gs = round_angle_sq(theta, &v[1..]);
    let inner = ((dphi + c * gs).powi(2) + s * s * gs * gs).sqrt();
    ((c * dphi + gs + inner) / two).max(T::zero()).sqrt()
}

#[derive(Debug, Clone)]
pub struct EquatorReport<T> {
    pub alpha: T,
    /// Largest gap between the extrapolated pull-back and the closed-form limit.
    pub max_deviation: T,
    /// Smallest fundamental-tensor eigenvalue of the limit norm.
    pub min_eig: T,
    /// Chart direction attaining `min_eig`.
    pub min_direction: Vec<T>,
}

/// Pull-back of Bryant's metric approaching the equator versus its closed-form limit.
pub fn equator_extension_check<T: Real>(alpha: T, samples: usize) -> Result<EquatorReport<T>> {
    if !(alpha > T::zero() && alpha <= T::FRAC_PI_4() + lit(1e-15)) {
        return Err(Error::BadParameter("alpha must lie in (0, π/4]".into()));
    }
    let planar = FinslerMetric::closed_form(crate::closed::ClosedKind::Bryant { alpha }, 2)?;
    let pulled = pullback(planar);
    let angles = sampling::uniform_angles::<T>(samples.max(4));
    let theta = lit::<T>(0.7);
    let mut max_deviation = T::zero();
    for (i, a) in angles.iter().enumerate() {
        let v = sampling::polar(*a);
        let th = theta + lit::<T>(i as f64 * 0.37);
        let vals: Vec<T> = (3..=6)
            .map(|k| {
                let eps = lit::<T>(10f64.powi(-k));
                pulled.eval(&[T::FRAC_PI_2() - eps, th], &v)
            })
            .collect::<Result<_>>()?;
        let ten = lit::<T>(10.0);
        let extrap = (ten * vals[3] - vals[2]) / lit(9.0);
        let exact = equator_limit_metric(alpha, &[th], &v);
        max_deviation = max_deviation.max((extrap - exact).abs());
    }
    let limit = |w: &[T]| -> Result<T> { Ok(equator_limit_metric(alpha, &[theta], w)) };
    let (min_eig, min_direction) = tensor::min_eig_over_directions_2d(limit, samples.max(64))?;
    Ok(EquatorReport { alpha, max_deviation, min_eig, min_direction })
}

/// Line in the plane whose image is the upper half great circle through `±w` with tangent limits `±V`.
pub fn boundary_line<T: Real>(w: &[T], v: &[T], lambda: T) -> Result<(Vec<T>, Vec<T>)> {
    if w.len() != v.len() || w.len() < 3 {
        return Err(Error::BadInput("w and V must be vectors of the same length n + 1 ≥ 3".into()));
    }
    let n = w.len() - 1;
    let tol = lit::<T>(1e-12);
    if w[n].abs() > tol || (norm(w) - T::one()).abs() > tol {
        return Err(Error::BadInput("w must be a unit vector on the equator".into()));
    }
    if dot(w, v).abs() > tol * (T::one() + norm(v)) {
        return Err(Error::BadInput("V must be orthogonal to w".into()));
    }
    if !(v[n] < T::zero()) {
        return Err(Error::BadInput("V must point below the equator".into()));
    }
    let x = (0..n).map(|a| (v[a] - lambda * w[a]) / v[n]).collect();
    let y = (0..n).map(|a| -w[a] / v[n]).collect();
    Ok((x, y))
}

/// Distance of the worst point from the best-fitting 2-plane through the origin.
pub fn plane_fit_residual<T: Real>(points: &[Vec<T>]) -> T {
    let rows = points.len();
    let cols = points[0].len();
    let m = DMatrix::from_fn(rows, cols, |i, j| to_f64(points[i][j]));
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let basis: Vec<Vec<f64>> = order.iter().take(2).map(|&i| vt.row(i).iter().copied().collect()).collect();
    let worst = points
        .iter()
        .map(|p| {
            let pf: Vec<f64> = p.iter().map(|&v| to_f64(v)).collect();
            let mut r = pf.clone();
            for b in &basis {
                let c: f64 = pf.iter().zip(b).map(|(a, b)| a * b).sum();
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * bi;
                }
            }
            r.iter().map(|a| a * a).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    lit(worst)
}

/// Plane-fit residual of the spherical image of the line `x + t y`.
pub fn line_image_residual<T: Real>(x: &[T], y: &[T], count: usize) -> T {
    let pts: Vec<Vec<T>> = (0..count)
        .map(|i| {
            let u = -T::FRAC_PI_2() + T::PI() * lit::<T>((i as f64 + 0.5) / count as f64);
            project(&crate::vecops::axpy(x, u.tan(), y))
        })
        .collect();
    plane_fit_residual(&pts)
}

/// Orthonormal `(e, f)` spanning the plane of `(x, 1)` and `(y, 0)`, with `e` on the equator.
fn great_circle_frame<T: Real>(x: &[T], y: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let ny = norm(y);
    if ny == T::zero() {
        return Err(Error::ZeroVector);
    }
    let mut e: Vec<T> = y.iter().map(|&v| v / ny).collect();
    e.push(T::zero());
    let mut p = x.to_vec();
    p.push(T::one());
    let c = dot(&p, &e);
    let f: Vec<T> = p.iter().zip(&e).map(|(&a, &b)| a - c * b).collect();
    let nf = norm(&f);
    Ok((e, f.into_iter().map(|v| v / nf).collect()))
}

/// Speed of the great circle `cos s · e + sin s · f` under the glued metric.
fn glued_speed<T: Real>(metric: &FinslerMetric<T>, e: &[T], f: &[T], s: T) -> Result<T> {
    let (cs, sn) = (s.cos(), s.sin());
    let mut w: Vec<T> = e.iter().zip(f).map(|(&a, &b)| cs * a + sn * b).collect();
    let mut dw: Vec<T> = e.iter().zip(f).map(|(&a, &b)| -sn * a + cs * b).collect();
    let n = w.len() - 1;
    if w[n] < T::zero() {
        w = w.iter().map(|&v| -v).collect();
        dw = dw.iter().map(|&v| -v).collect();
    }
    let x = inverse(&w)?;
    let last = w[n];
    let y: Vec<T> = (0..n).map(|a| (dw[a] * last - w[a] * dw[n]) / (last * last)).collect();
    metric.eval(&x, &y)
}

/// Length of the full great circle through the image of `x + t y`, lower half via `𝓕(−w, −V)`.
pub fn glued_great_circle_length<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<T> {
    let (e, f) = great_circle_frame(x, y)?;
    let delta = lit::<T>(1e-7);
    let pi = T::PI();
    let tol = lit::<T>(1e-10);
    let upper = quad::integrate(|s| glued_speed(metric, &e, &f, s), delta, pi - delta, tol)?;
    let lower = quad::integrate(|s| glued_speed(metric, &e, &f, s), pi + delta, pi + pi - delta, tol)?;
    Ok(upper + lower)
}

/// Rows `(φ, θ, speed)` along the upper half great circle, for plotting (n = 2).
pub fn great_circle_samples<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T], count: usize) -> Result<Vec<[T; 3]>> {
    let (e, f) = great_circle_frame(x, y)?;
    (0..count)
        .map(|i| {
            let s = T::PI() * lit::<T>((i as f64 + 0.5) / count as f64);
            let w: Vec<T> = e.iter().zip(&f).map(|(&a, &b)| s.cos() * a + s.sin() * b).collect();
            let z = to_chart(&inverse(&w)?);
            Ok([z[0], z[1], glued_speed(metric, &e, &f, s)?])
        })
        .collect()
}

/// Max over sampled equator pairs of `|𝓕₊(w, V) − 𝓕₊(−w, −V)|`, approached at `φ = ±(π/2 − ε)`.
pub fn antipodal_deviation<T: Real>(planar: &FinslerMetric<T>, samples: usize, seed: u64) -> Result<T> {
    let pulled = pullback(planar.clone());
    let n = planar.dim();
    let mut rng = sampling::rng(seed);
    let eps = lit::<T>(1e-6);
    let mut worst = T::zero();
    for _ in 0..samples {
        let theta: Vec<T> = (0..n - 1)
            .map(|k| if k + 2 == n { sampling::uniform(0.0, std::f64::consts::TAU, &mut rng) } else { sampling::uniform(0.1, 3.04, &mut rng) })
            .collect();
        let v: Vec<T> = sampling::random_unit(n, &mut rng);
        let mut zp = vec![T::FRAC_PI_2() - eps];
        zp.extend(&theta);
        let mut zm = vec![-T::FRAC_PI_2() + eps];
        zm.extend(&theta);
        let a = pulled.eval(&zp, &v)?;
        let b = pulled.eval(&zm, &v)?;
        worst = worst.max((a - b).abs() / a.abs().max(T::one()));
    }
    Ok(worst)
}

/// Max |pull-back − round metric| for the unit-curvature Riemannian metric on samples.
pub fn round_sphere_deviation<T: Real>(n: usize, samples: usize, seed: u64) -> Result<T> {
    let planar = FinslerMetric::closed_form(crate::closed::ClosedKind::Riemann { lambda: T::one() }, n)?;
    let pulled = pullback(planar);
    let mut rng = sampling::rng(seed);
    let mut worst = T::zero();
    for _ in 0..samples {
        let mut z = vec![sampling::uniform::<T>(0.05, 1.5, &mut rng)];
        for k in 0..n - 1 {
            z.push(if k + 2 == n { sampling::uniform(0.0, std::f64::consts::TAU, &mut rng) } else { sampling::uniform(0.1, 3.04, &mut rng) });
        }
        let v: Vec<T> = sampling::random_unit(n, &mut rng);
        let a = pulled.eval(&z, &v)?;
        worst = worst.max((a - round_metric(&z, &v)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed::ClosedKind;
    use crate::diff;

    #[test]
    fn projection_examples() {
        assert_eq!(project(&[0.0, 0.0]), vec![0.0, 0.0, 1.0]);
        let w = project(&[1.0f64, 0.0]);
        let r = 0.5f64.sqrt();
        assert!((w[0] - r).abs() < 1e-15 && w[1] == 0.0 && (w[2] - r).abs() < 1e-15);
        let far = project(&[1e12f64, 0.0]);
        assert!((far[0] - 1.0).abs() < 1e-12 && far[2] < 1e-11);
        assert_eq!(inverse(&[1.0, 0.0, 0.0]), Err(Error::NotUpperHemisphere));
    }

    #[test]
    fn round_trips() {
        let mut rng = sampling::rng(3);
        for n in [2usize, 3, 4] {
            for _ in 0..50 {
                let x: Vec<f64> = sampling::random_in_ball(n, 5.0, &mut rng);
                let back = inverse(&project(&x)).unwrap();
                assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
                assert!((norm(&project(&x)) - 1.0).abs() < 1e-14);
                let z = to_chart(&x);
                let y = from_chart(&z);
                assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-12), "{x:?} {y:?}");
                let w = sphere_point(&z);
                assert!(w.iter().zip(project(&x)).all(|(a, b)| (a - b).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn jacobian_two_dimensional_table() {
        let (phi, th) = (0.7f64, 1.2f64);
        let j = jacobian(&[phi, th]);
        let sec2 = 1.0 / phi.cos().powi(2);
        let expected = [[sec2 * th.cos(), -phi.tan() * th.sin()], [sec2 * th.sin(), phi.tan() * th.cos()]];
        for k in 0..2 {
            for i in 0..2 {
                assert!((j[k][i] - expected[k][i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        for z in [vec![0.4, 1.1, 2.0], vec![1.2, 0.5, 4.0, 0.3], vec![0.9, 2.5]] {
            let j = jacobian(&z);
            for i in 0..z.len() {
                let e = crate::vecops::basis::<f64>(z.len(), i);
                for k in 0..z.len() {
                    let fd = diff::directional(|q| Ok(from_chart(q)[k]), &z, &e, 1e-5).unwrap();
                    assert!((fd - j[k][i]).abs() < 1e-6, "k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn riemann_pullback_is_round() {
        assert!(round_sphere_deviation::<f64>(2, 200, 1).unwrap() < 1e-12);
        assert!(round_sphere_deviation::<f64>(3, 200, 2).unwrap() < 1e-12);
    }

    #[test]
    fn bryant_pullback_at_pole() {
        let planar = FinslerMetric::closed_form(ClosedKind::Bryant { alpha: 0.3f64 }, 2).unwrap();
        let expected = planar.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let pulled = pullback(planar);
        assert!((pulled.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn singular_angles_rejected_in_three_dimensions() {
        let pulled = pullback(FinslerMetric::closed_form(ClosedKind::Riemann { lambda: 1.0f64 }, 3).unwrap());
        assert_eq!(pulled.eval(&[0.5, 0.0, 1.0], &[1.0, 0.0, 0.0]), Err(Error::CoordinateSingularity));
    }

    #[test]
    fn boundary_line_examples() {
        let w = [1.0f64, 0.0, 0.0];
        let v = [0.0, 0.0, -1.0];
        let (x, y) = boundary_line(&w, &v, 0.0).unwrap();
        assert_eq!((x, y.clone()), (vec![0.0, 0.0], vec![1.0, 0.0]));
        let (x2, y2) = boundary_line(&w, &v, 2.0).unwrap();
        assert_eq!((x2.clone(), y2), (vec![2.0, 0.0], y.clone()));
        let far = project(&crate::vecops::axpy(&x2, 1e6, &y));
        assert!(far.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-6));
        assert!(boundary_line(&w, &[0.0, 0.0, 1.0], 0.0).is_err());
        assert!(boundary_line(&w, &[1.0, 0.0, -1.0], 0.0).is_err());
    }

    #[test]
    fn equator_limit_reduces_to_round_at_zero_angle() {
        let v = [0.6, -0.8];
        assert!((equator_limit_metric(0.0f64, &[0.3], &v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equator_degenerates_only_at_quarter_pi() {
        let r = equator_extension_check(std::f64::consts::FRAC_PI_4, 64).unwrap();
        assert!(r.min_eig < 1e-6, "{}", r.min_eig);
        assert!(r.min_direction[0].abs() < 1e-3);
        assert!(r.max_deviation < 1e-4, "{}", r.max_deviation);
        let r = equator_extension_check(0.3, 64).unwrap();
        assert!(r.min_eig > 1e-3, "{}", r.min_eig);
        assert!(r.max_deviation < 1e-4, "{}", r.max_deviation);
    }

    #[test]
    fn bryant_lines_are_half_great_circles() {
        assert!(line_image_residual(&[0.3, -1.2], &[0.5, 0.4], 200) < 1e-12);
    }
}
