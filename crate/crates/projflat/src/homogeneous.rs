//! Positively 1-homogeneous functions and Minkowski norms.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diff::{self, scaled_step, Steps};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, trace};
use crate::sampling::{self, polar, uniform_angles};
use crate::scalar::{lit, Real};
use crate::vecops::{self, add, check_dim, dot, norm, scale};

pub type Callable<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Concrete shape of a homogeneous function.
#[derive(Clone)]
pub enum Kind<T: Real> {
    Zero,
    Euclidean,
    /// `|y| + ⟨a, y⟩`, `|a| < 1`
    Randers { a: Vec<T> },
    /// `⟨a, y⟩`; changes sign, useful as a negative example.
    Linear { a: Vec<T> },
    Scaled { c: T, base: Box<HomogeneousFn<T>> },
    Sum(Box<HomogeneousFn<T>>, Box<HomogeneousFn<T>>),
    Difference(Box<HomogeneousFn<T>>, Box<HomogeneousFn<T>>),
    Custom(Callable<T>),
}

impl<T: Real> fmt::Debug for Kind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Zero => write!(f, "Zero"),
            Kind::Euclidean => write!(f, "Euclidean"),
            Kind::Randers { a } => write!(f, "Randers {{ a: {a:?} }}"),
            Kind::Linear { a } => write!(f, "Linear {{ a: {a:?} }}"),
            Kind::Scaled { c, base } => write!(f, "Scaled {{ c: {c:?}, base: {base:?} }}"),
            Kind::Sum(p, q) => write!(f, "Sum({p:?}, {q:?})"),
            Kind::Difference(p, q) => write!(f, "Difference({p:?}, {q:?})"),
            Kind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradMode {
    ClosedForm,
    CentralDifference,
}

/// A positively 1-homogeneous scalar function on ℝⁿ.
#[derive(Debug, Clone)]
pub struct HomogeneousFn<T: Real> {
    dim: usize,
    kind: Kind<T>,
    grad_mode: GradMode,
    steps: Steps<T>,
}

impl<T: Real> HomogeneousFn<T> {
    fn with_kind(dim: usize, kind: Kind<T>) -> Self {
        let grad_mode = match kind {
            Kind::Custom(_) => GradMode::CentralDifference,
            _ => GradMode::ClosedForm,
        };
        HomogeneousFn { dim, kind, grad_mode, steps: Steps::default() }
    }

    pub fn zero(dim: usize) -> Self {
        Self::with_kind(dim, Kind::Zero)
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::with_kind(dim, Kind::Euclidean)
    }

    pub fn randers(a: Vec<T>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::BadParameter("dimension must be at least 2".into()));
        }
        if !(norm(&a) < T::one()) {
            return Err(Error::BadParameter("Randers drift must satisfy |a| < 1".into()));
        }
        Ok(Self::with_kind(a.len(), Kind::Randers { a }))
    }

    pub fn linear(a: Vec<T>) -> Self {
        Self::with_kind(a.len(), Kind::Linear { a })
    }

    pub fn scaled(c: T, base: HomogeneousFn<T>) -> Self {
        Self::with_kind(base.dim, Kind::Scaled { c, base: Box::new(base) })
    }

    pub fn sum(p: HomogeneousFn<T>, q: HomogeneousFn<T>) -> Result<Self> {
        check_same_dim(&p, &q)?;
        Ok(Self::with_kind(p.dim, Kind::Sum(Box::new(p), Box::new(q))))
    }

    pub fn difference(p: HomogeneousFn<T>, q: HomogeneousFn<T>) -> Result<Self> {
        check_same_dim(&p, &q)?;
        Ok(Self::with_kind(p.dim, Kind::Difference(Box::new(p), Box::new(q))))
    }

    /// Wraps an arbitrary callable; homogeneity is the caller's responsibility.
    pub fn custom<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[T]) -> T + Send + Sync + 'static,
    {
        Self::with_kind(dim, Kind::Custom(Arc::new(f)))
    }

    pub fn with_grad_mode(mut self, mode: GradMode) -> Self {
        self.grad_mode = match self.kind {
            Kind::Custom(_) => GradMode::CentralDifference,
            _ => mode,
        };
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &Kind<T> {
        &self.kind
    }

    pub fn grad_mode(&self) -> GradMode {
        self.grad_mode
    }

    /// True when the function is the zero function by construction.
    pub fn is_zero_kind(&self) -> bool {
        match &self.kind {
            Kind::Zero => true,
            Kind::Scaled { c, base } => *c == T::zero() || base.is_zero_kind(),
            _ => false,
        }
    }

    pub fn eval(&self, y: &[T]) -> T {
        match &self.kind {
            Kind::Zero => T::zero(),
            Kind::Euclidean => norm(y),
            Kind::Randers { a } => norm(y) + dot(a, y),
            Kind::Linear { a } => dot(a, y),
            Kind::Scaled { c, base } => *c * base.eval(y),
            Kind::Sum(p, q) => p.eval(y) + q.eval(y),
            Kind::Difference(p, q) => p.eval(y) - q.eval(y),
            Kind::Custom(f) => f(y),
        }
    }

    fn closed_grad(&self, y: &[T]) -> Vec<T> {
        match &self.kind {
            Kind::Zero => vec![T::zero(); self.dim],
            Kind::Euclidean => scale(T::one() / norm(y), y),
            Kind::Randers { a } => add(&scale(T::one() / norm(y), y), a),
            Kind::Linear { a } => a.clone(),
            Kind::Scaled { c, base } => scale(*c, &base.grad_unchecked(y)),
            Kind::Sum(p, q) => add(&p.grad_unchecked(y), &q.grad_unchecked(y)),
            Kind::Difference(p, q) => vecops::sub(&p.grad_unchecked(y), &q.grad_unchecked(y)),
            Kind::Custom(_) => self.fd_grad(y),
        }
    }

    fn grad_unchecked(&self, y: &[T]) -> Vec<T> {
        match self.grad_mode {
            GradMode::ClosedForm => self.closed_grad(y),
            GradMode::CentralDifference => self.fd_grad(y),
        }
    }

    /// Central-difference gradient regardless of the configured mode.
    pub fn fd_grad(&self, y: &[T]) -> Vec<T> {
        let h = scaled_step(self.steps.first, y);
        diff::gradient(|p| Ok(self.eval(p)), y, h).expect("infallible evaluation")
    }

    pub fn grad(&self, y: &[T]) -> Result<Vec<T>> {
        check_dim(y, self.dim)?;
        if vecops::is_zero(y) {
            return Err(Error::ZeroVector);
        }
        let g = self.grad_unchecked(y);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(g)
    }

    pub fn eval_and_grad(&self, y: &[T]) -> Result<(T, Vec<T>)> {
        check_dim(y, self.dim)?;
        let v = self.eval(y);
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok((v, self.grad(y)?))
    }

    /// `½ ∂²(f²)/∂yⁱ∂yʲ` by second central differences.
    pub fn half_hessian_sq(&self, y: &[T]) -> Vec<Vec<T>> {
        let h = scaled_step(self.steps.second, y);
        let half = lit::<T>(0.5);
        let mut m = diff::hessian(
            |p| {
                let v = self.eval(p);
                Ok(v * v)
            },
            y,
            h,
        )
        .expect("infallible evaluation");
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v = *v * half;
            }
        }
        m
    }
}

fn check_same_dim<T: Real>(p: &HomogeneousFn<T>, q: &HomogeneousFn<T>) -> Result<()> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch { expected: p.dim, got: q.dim });
    }
    Ok(())
}

/// Convexity class of a norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    /// Positive and homogeneous only.
    Pseudo,
    /// Strictly convex indicatrix; Hessian may degenerate.
    Weak,
    /// Positive-definite Hessian of the square.
    Strong,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub quasi_regular: bool,
    pub strictly_convex: bool,
    /// Fraction of sampled directions with a positive-definite Hessian.
    pub strong_rate: f64,
    pub min_hessian_eig: f64,
    pub strength: Strength,
}

/// Samples sign, triangle inequality, indicatrix convexity and Hessian definiteness.
pub fn regularity_check<T: Real>(f: &HomogeneousFn<T>, samples: usize) -> Result<RegularityReport> {
    let n = f.dim();
    let samples = samples.max(8);
    let dirs: Vec<Vec<T>> = sampling::unit_directions(n, samples, 7);
    for d in &dirs {
        if !(f.eval(d) > T::zero()) {
            return Err(Error::NotPositive);
        }
    }

    let mut rng = sampling::rng(11);
    let mut quasi_regular = true;
    let tol = lit::<T>(1e-12);
    for _ in 0..samples {
        let a: Vec<T> = sampling::random_in_ball(n, 2.0, &mut rng);
        let b: Vec<T> = sampling::random_in_ball(n, 2.0, &mut rng);
        let lhs = f.eval(&add(&a, &b));
        let rhs = f.eval(&a) + f.eval(&b);
        if lhs > rhs + tol * (T::one() + rhs) {
            quasi_regular = false;
            break;
        }
    }

    let strictly_convex = if n == 2 {
        planar_indicatrix_convex(|d| f.eval(d), &[T::one(), T::zero()], &[T::zero(), T::one()])
    } else {
        let mut ok = true;
        for _ in 0..8 {
            let u: Vec<T> = sampling::random_unit(n, &mut rng);
            let w0: Vec<T> = sampling::random_unit(n, &mut rng);
            let w = vecops::axpy(&w0, -dot(&w0, &u), &u);
            let w = match vecops::unit(&w) {
                Ok(w) => w,
                Err(_) => continue,
            };
            if !planar_indicatrix_convex(|d| f.eval(d), &u, &w) {
                ok = false;
                break;
            }
        }
        ok
    };

    let mut strong = 0usize;
    let mut min_eig = f64::INFINITY;
    for d in &dirs {
        let g = f.half_hessian_sq(d);
        let e = min_eigenvalue(&g);
        let eps = lit::<T>(1e-9) * trace(&g) / lit(n as f64);
        if e > eps {
            strong += 1;
        }
        min_eig = min_eig.min(crate::scalar::to_f64(e));
    }
    let strong_rate = strong as f64 / dirs.len() as f64;
    let strength = if strictly_convex && strong == dirs.len() {
        Strength::Strong
    } else if strictly_convex {
        Strength::Weak
    } else {
        Strength::Pseudo
    };
    Ok(RegularityReport { quasi_regular, strictly_convex, strong_rate, min_hessian_eig: min_eig, strength })
}

/// Indicatrix points in the plane spanned by orthonormal `u, w` turn the same way
/// at every sampled vertex, with no three collinear.
fn planar_indicatrix_convex<T: Real, F: Fn(&[T]) -> T>(f: F, u: &[T], w: &[T]) -> bool {
    let count = 256;
    let pts: Vec<(T, T)> = uniform_angles::<T>(count)
        .into_iter()
        .map(|a| {
            let c = polar(a);
            let d = vecops::axpy(&scale(c[0], u), c[1], w);
            let r = f(&d);
            (c[0] / r, c[1] / r)
        })
        .collect();
    let tol = lit::<T>(1e-9);
    for k in 0..count {
        let p0 = pts[k];
        let p1 = pts[(k + 1) % count];
        let p2 = pts[(k + 2) % count];
        let (ax, ay) = (p1.0 - p0.0, p1.1 - p0.1);
        let (bx, by) = (p2.0 - p1.0, p2.1 - p1.1);
        let cross = ax * by - ay * bx;
        let scale = (ax * ax + ay * ay).sqrt() * (bx * bx + by * by).sqrt();
        if !(cross > tol * scale) {
            return false;
        }
    }
    true
}

/// A homogeneous function together with its verified convexity class.
#[derive(Debug, Clone)]
pub struct MinkowskiNorm<T: Real> {
    pub base: HomogeneousFn<T>,
    pub strength: Strength,
}

impl<T: Real> MinkowskiNorm<T> {
    /// Classifies `base` by sampling; fails when it is not positive.
    pub fn new(base: HomogeneousFn<T>, samples: usize) -> Result<Self> {
        let report = regularity_check(&base, samples)?;
        Ok(MinkowskiNorm { base, strength: report.strength })
    }

    pub fn eval(&self, y: &[T]) -> T {
        self.base.eval(y)
    }
}

/// Free-function form of [`HomogeneousFn::eval_and_grad`].
pub fn eval_and_grad<T: Real>(f: &HomogeneousFn<T>, y: &[T]) -> Result<(T, Vec<T>)> {
    f.eval_and_grad(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_value_and_gradient() {
        let f = HomogeneousFn::<f64>::euclidean(2);
        let (v, g) = f.eval_and_grad(&[3.0, 4.0]).unwrap();
        assert_eq!(v, 5.0);
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn randers_gradients() {
        let f = HomogeneousFn::randers(vec![0.5f64, 0.0]).unwrap();
        let (v, g) = f.eval_and_grad(&[1.0, 0.0]).unwrap();
        assert_eq!(v, 1.5);
        assert_eq!(g, vec![1.5, 0.0]);
        let (v, g) = f.eval_and_grad(&[0.0, 1.0]).unwrap();
        assert_eq!(v, 1.0);
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_and_fd_gradients_agree() {
        let f = HomogeneousFn::sum(
            HomogeneousFn::randers(vec![0.3f64, -0.2]).unwrap(),
            HomogeneousFn::scaled(2.0, HomogeneousFn::euclidean(2)),
        )
        .unwrap();
        let y = [0.7, -1.3];
        let a = f.grad(&y).unwrap();
        let b = f.fd_grad(&y);
        for k in 0..2 {
            assert!((a[k] - b[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_vector_gradient_is_an_error() {
        let f = HomogeneousFn::<f64>::euclidean(2);
        assert_eq!(f.grad(&[0.0, 0.0]), Err(Error::ZeroVector));
        assert_eq!(f.eval(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn randers_drift_must_be_short() {
        assert!(HomogeneousFn::randers(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn euclidean_is_strong() {
        let r = regularity_check(&HomogeneousFn::<f64>::euclidean(2), 64).unwrap();
        assert!(r.quasi_regular && r.strictly_convex);
        assert_eq!(r.strength, Strength::Strong);
    }

    #[test]
    fn randers_near_unit_drift_is_strong() {
        let r = regularity_check(&HomogeneousFn::randers(vec![0.9, 0.0]).unwrap(), 64).unwrap();
        assert_eq!(r.strength, Strength::Strong);
        assert!(r.min_hessian_eig > 0.0);
    }

    #[test]
    fn signed_linear_fails_positivity() {
        let f = HomogeneousFn::linear(vec![1.0, 0.5]);
        assert_eq!(regularity_check(&f, 64), Err(Error::NotPositive));
    }

    #[test]
    fn three_dimensional_randers_is_strong() {
        let r = regularity_check(&HomogeneousFn::randers(vec![0.2, 0.1, -0.3]).unwrap(), 64).unwrap();
        assert_eq!(r.strength, Strength::Strong);
    }

    #[test]
    fn square_indicatrix_is_not_strictly_convex() {
        let f = HomogeneousFn::custom(2, |y: &[f64]| y[0].abs().max(y[1].abs()));
        let r = regularity_check(&f, 64).unwrap();
        assert!(r.quasi_regular);
        assert!(!r.strictly_convex);
        assert_eq!(r.strength, Strength::Pseudo);
    }
}
