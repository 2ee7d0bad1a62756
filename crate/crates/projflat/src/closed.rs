//! Explicit metric formulas used as oracles for the constructive builders.

use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Real};
use crate::vecops::{dot, wedge_sq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedKind<T> {
    /// Funk metric of the Euclidean unit ball.
    EuclidFunk,
    /// Berwald's flat metric on the unit ball.
    Berwald,
    /// Riemannian metric of constant sectional curvature `lambda`.
    Riemann { lambda: T },
    /// Bryant's metric on ℝⁿ with parameter `alpha`.
    Bryant { alpha: T },
    /// Flat metric built from the Randers norm `|y| + ⟨a,y⟩` used for both initial norms.
    RandersK0 { a: Vec<T> },
    /// Curvature −1 metric from `ψ = |y| + ⟨a,y⟩`, `φ = cψ`.
    RandersKm1 { a: Vec<T>, c: T },
}

/// Quantities `(𝒜, ℬ, 𝒞)` of the Randers Funk formula.
pub fn randers_abc<T: Real>(a: &[T], x: &[T], y: &[T]) -> (T, T, T) {
    let ax = dot(a, x);
    let ay = dot(a, y);
    let s = T::one() - ax;
    let b = s * s - dot(x, x);
    let t = dot(x, y) + s * ay;
    let aa = b * (dot(y, y) - ay * ay) + t * t;
    (aa, b, s * ay)
}

/// Funk metric of the Randers norm `|y| + ⟨a,y⟩`.
pub fn randers_funk<T: Real>(a: &[T], x: &[T], y: &[T]) -> T {
    let (aa, b, c) = randers_abc(a, x, y);
    let t = c + dot(x, y);
    let root = aa.max(T::zero()).sqrt();
    if t < T::zero() {
        // `√𝒜 + t = ℬ·w / (√𝒜 − t)` avoids cancellation near the boundary where ℬ → 0.
        let ay = dot(a, y);
        (dot(y, y) - ay * ay) / (root - t)
    } else {
        (root + t) / b
    }
}

/// `1 + xᵏ P_{yᵏ}` for the Randers Funk metric.
pub fn randers_funk_factor<T: Real>(a: &[T], x: &[T], y: &[T]) -> T {
    let (aa, _, _) = randers_abc(a, x, y);
    let s = T::one() - dot(a, x);
    (s * randers_funk(a, x, y) - dot(a, y)) / aa.sqrt()
}

fn scaled_randers_funk<T: Real>(a: &[T], k: T, x: &[T], y: &[T]) -> T {
    let kx: Vec<T> = x.iter().map(|&v| k * v).collect();
    let ky: Vec<T> = y.iter().map(|&v| k * v).collect();
    randers_funk(a, &kx, &ky)
}

/// `Φ₊` and `Φ₋` of the Randers curvature −1 family.
pub fn randers_km1_pair<T: Real>(a: &[T], c: T, x: &[T], y: &[T]) -> (T, T) {
    let plus = scaled_randers_funk(a, c + T::one(), x, y);
    let minus = scaled_randers_funk(a, c - T::one(), x, y);
    (plus, minus)
}

impl<T: Real> ClosedKind<T> {
    pub fn eval(&self, x: &[T], y: &[T]) -> T {
        let two = lit::<T>(2.0);
        match self {
            ClosedKind::EuclidFunk => {
                let xx = dot(x, x);
                let root = (dot(y, y) - wedge_sq(x, y)).max(T::zero()).sqrt();
                (root + dot(x, y)) / (T::one() - xx)
            }
            ClosedKind::Berwald => {
                let xx = dot(x, x);
                let root = (dot(y, y) - wedge_sq(x, y)).max(T::zero()).sqrt();
                if root == T::zero() {
                    return T::zero();
                }
                let s = root + dot(x, y);
                let d = T::one() - xx;
                s * s / (d * d * root)
            }
            ClosedKind::Riemann { lambda } => {
                let xx = dot(x, x);
                let q = dot(y, y) + *lambda * wedge_sq(x, y);
                q.max(T::zero()).sqrt() / (T::one() + *lambda * xx)
            }
            ClosedKind::Bryant { alpha } => {
                let (s2, c2) = (two * *alpha).sin_cos();
                let xx = dot(x, x);
                let yy = dot(y, y);
                let bb = yy * c2 + wedge_sq(x, y);
                let aa = bb * bb + (yy * s2) * (yy * s2);
                let cc = dot(x, y) * s2;
                let dd = xx * xx + two * xx * c2 + T::one();
                let inner = (aa.sqrt() + bb) / (two * dd) + (cc / dd) * (cc / dd);
                inner.max(T::zero()).sqrt() + cc / dd
            }
            ClosedKind::RandersK0 { a } => randers_funk(a, x, y) * randers_funk_factor(a, x, y),
            ClosedKind::RandersKm1 { a, c } => {
                let (p, m) = randers_km1_pair(a, *c, x, y);
                lit::<T>(0.5) * (p - m)
            }
        }
    }

    /// Projective factor in closed form (none is used for Bryant's metric).
    pub fn projective(&self, x: &[T], y: &[T]) -> Option<T> {
        match self {
            ClosedKind::EuclidFunk => Some(lit::<T>(0.5) * self.eval(x, y)),
            ClosedKind::Berwald => Some(ClosedKind::EuclidFunk.eval(x, y)),
            ClosedKind::Riemann { lambda } => Some(-*lambda * dot(x, y) / (T::one() + *lambda * dot(x, x))),
            ClosedKind::Bryant { .. } => None,
            ClosedKind::RandersK0 { a } => Some(randers_funk(a, x, y)),
            ClosedKind::RandersKm1 { a, c } => {
                let (p, m) = randers_km1_pair(a, *c, x, y);
                Some(lit::<T>(0.5) * (p + m))
            }
        }
    }

    /// Curvature of the family, when it is one of the constant values.
    pub fn curvature(&self) -> T {
        match self {
            ClosedKind::EuclidFunk => lit(-0.25),
            ClosedKind::Berwald | ClosedKind::RandersK0 { .. } => T::zero(),
            ClosedKind::Riemann { lambda } => *lambda,
            ClosedKind::Bryant { .. } => T::one(),
            ClosedKind::RandersKm1 { .. } => -T::one(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn funk_and_berwald_spot_values() {
        let x = [0.5f64, 0.0];
        assert!((ClosedKind::EuclidFunk.eval(&x, &[1.0, 0.0]) - 2.0).abs() < 1e-14);
        assert!((ClosedKind::EuclidFunk.eval(&x, &[-1.0, 0.0]) - 2.0 / 3.0).abs() < 1e-14);
        assert!((ClosedKind::Berwald.eval(&x, &[1.0, 0.0]) - 4.0).abs() < 1e-13);
        let h = ClosedKind::Riemann { lambda: -1.0 }.eval(&x, &[1.0, 0.0]);
        assert!((h - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn randers_k0_is_accurate_near_the_boundary() {
        // φ(x) = 0.9994; reference values from 50-digit arithmetic.
        let k = ClosedKind::RandersK0 { a: vec![34f64.sqrt() / 6.0, 0.0] };
        let x = [-5.329355684535912, 3.126497742977235];
        for (y, want) in [([-1.0, 0.0], 0.07452843763194523), ([0.6, -0.8], 0.02926072491363746), ([0.28, 0.96], 2581766.587821136)] {
            assert!((k.eval(&x, &y) / want - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn riemann_at_origin_is_euclidean() {
        let f = ClosedKind::Riemann { lambda: 1.0f64 }.eval(&[0.0, 0.0], &[3.0, 4.0]);
        assert!((f - 5.0).abs() < 1e-14);
    }

    #[test]
    fn bryant_zero_angle_is_round_sphere() {
        let b = ClosedKind::Bryant { alpha: 0.0f64 };
        let r = ClosedKind::Riemann { lambda: 1.0 };
        for (x, y) in [([0.3, -1.2], [0.5, 0.7]), ([5.0, 2.0], [-1.0, 0.1]), ([0.0, 0.0], [1.0, 1.0])] {
            assert!((b.eval(&x, &y) - r.eval(&x, &y)).abs() < 1e-13);
        }
    }

    #[test]
    fn randers_km1_minus_branch_example() {
        // c = 2, a = 0: Φ₋ reduces to the Euclidean Funk formula with scale 1.
        let (_, m) = randers_km1_pair(&[0.0f64, 0.0], 2.0, &[0.1, 0.0], &[1.0, 0.0]);
        assert!((m - 1.1 / 0.99).abs() < 1e-13);
    }
}
