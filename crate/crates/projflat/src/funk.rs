//! Root solver for `Φ(x, y) = φ(y + xΦ(x, y))` and its signed variants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogeneous::HomogeneousFn;
use crate::sampling;
use crate::scalar::{lit, Real};
use crate::vecops::{self, axpy, dot, norm, sub};

/// Points with `φ(x) ≥ 1 − MARGIN` are treated as outside the domain.
pub const DOMAIN_MARGIN: f64 = 1e-12;
const TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunkSolution<T> {
    pub value: T,
    pub bracket: (T, T),
    pub iterations: usize,
    pub residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    NonNeg,
    NonPos,
    /// Whichever root the sign of `φ̃(y)` selects.
    Largest,
}

/// Safeguarded Newton on `h(t) = t − f(y + x t)` over `[lo, hi]` with `h(lo) ≤ 0 ≤ h(hi)`.
/// `start` picks the end Newton starts from.
fn bracketed_newton<T: Real>(
    f: &HomogeneousFn<T>,
    x: &[T],
    y: &[T],
    mut lo: T,
    mut hi: T,
    start_high: bool,
) -> Result<FunkSolution<T>> {
    let bracket = (lo, hi);
    let h = |t: T| -> (T, Vec<T>) {
        let xi = axpy(y, t, x);
        (t - f.eval(&xi), xi)
    };
    let mut t = if start_high { hi } else { lo };
    let tol = lit::<T>(TOL);
    let half = lit::<T>(0.5);
    for it in 1..=MAX_ITER {
        let (ht, xi) = h(t);
        if ht == T::zero() {
            return Ok(FunkSolution { value: t, bracket, iterations: it, residual: T::zero() });
        }
        if ht < T::zero() {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        let slope = if vecops::is_zero(&xi) {
            None
        } else {
            f.grad(&xi).ok().map(|g| T::one() - dot(&g, x))
        };
        let mut next = match slope {
            Some(s) if s.abs() > T::epsilon() => t - ht / s,
            _ => half * (lo + hi),
        };
        if !(next > lo && next < hi) || !next.is_finite() {
            next = half * (lo + hi);
        }
        let step = (next - t).abs();
        t = next;
        if step <= tol * (T::one() + t.abs()) || (hi - lo) <= tol * (T::one() + t.abs()) * lit(1e-3) {
            let (res, _) = h(t);
            return Ok(FunkSolution { value: t, bracket, iterations: it, residual: res });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITER })
}

/// Unique root of `t − φ(y + x t)` for a positive convex `φ` and `φ(x) < 1`.
pub fn solve_phi<T: Real>(phi: &HomogeneousFn<T>, x: &[T], y: &[T]) -> Result<FunkSolution<T>> {
    vecops::check_dim(x, phi.dim())?;
    vecops::check_dim(y, phi.dim())?;
    let px = phi.eval(x);
    if !(px < T::one() - lit(DOMAIN_MARGIN)) {
        return Err(Error::OutsideDomain);
    }
    if vecops::is_zero(y) {
        return Ok(FunkSolution { value: T::zero(), bracket: (T::zero(), T::zero()), iterations: 0, residual: T::zero() });
    }
    let py = phi.eval(y);
    let lo = T::zero();
    let mut hi = py / (T::one() - px);
    // The analytic bracket relies on subadditivity; widen if that fails.
    let mut widen = 0;
    while hi - phi.eval(&axpy(y, hi, x)) < T::zero() {
        hi = hi * lit(2.0) + T::one();
        widen += 1;
        if widen > 60 {
            return Err(Error::NoConvergence { iterations: 0 });
        }
    }
    bracketed_newton(phi, x, y, lo, hi, true)
}

/// Counts sign changes of `t − φ(y + x t)` on `points` samples of `[0, φ(y)/(1−φ(x)) + 1]`.
pub fn root_sign_changes<T: Real>(phi: &HomogeneousFn<T>, x: &[T], y: &[T], points: usize) -> usize {
    let px = phi.eval(x);
    let end = phi.eval(y) / (T::one() - px) + T::one();
    let mut changes = 0;
    let mut prev: Option<bool> = None;
    for k in 0..=points {
        let t = end * lit(k as f64 / points as f64);
        let v = t - phi.eval(&axpy(y, t, x));
        if v == T::zero() {
            continue;
        }
        let s = v > T::zero();
        if let Some(p) = prev {
            if p != s {
                changes += 1;
            }
        }
        prev = Some(s);
    }
    changes
}

/// Solves `Φ = φ̃(y + xΦ)` for a signed `φ̃` bounded by a positive dominating function.
#[derive(Debug, Clone)]
pub struct SignedSolver<T: Real> {
    tilde: HomogeneousFn<T>,
    dominating: HomogeneousFn<T>,
    /// Smallest sampled `ε` with `−ε·dominating ≤ φ̃`.
    eps: T,
}

impl<T: Real> SignedSolver<T> {
    /// Checks `φ̃ < dominating` on sampled directions and estimates the lower ratio `ε`.
    pub fn new(tilde: HomogeneousFn<T>, dominating: HomogeneousFn<T>) -> Result<Self> {
        if tilde.dim() != dominating.dim() {
            return Err(Error::DimensionMismatch { expected: dominating.dim(), got: tilde.dim() });
        }
        let n = tilde.dim();
        let dirs = sampling::unit_directions::<T>(n, if n == 2 { 720 } else { 2048 }, 5);
        let mut eps = T::zero();
        for d in &dirs {
            let dv = dominating.eval(d);
            let tv = tilde.eval(d);
            if !(dv > T::zero()) {
                return Err(Error::NotPositive);
            }
            if !(tv < dv) {
                return Err(Error::BadParameter("signed function must stay below the dominating one".into()));
            }
            eps = eps.max(-tv / dv);
        }
        let eps = eps * lit(1.05);
        Ok(SignedSolver { tilde, dominating, eps })
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn tilde(&self) -> &HomogeneousFn<T> {
        &self.tilde
    }

    pub fn dominating(&self) -> &HomogeneousFn<T> {
        &self.dominating
    }

    pub fn solve(&self, x: &[T], y: &[T], branch: Branch) -> Result<FunkSolution<T>> {
        vecops::check_dim(x, self.tilde.dim())?;
        vecops::check_dim(y, self.tilde.dim())?;
        let zero = FunkSolution { value: T::zero(), bracket: (T::zero(), T::zero()), iterations: 0, residual: T::zero() };
        let ty = self.tilde.eval(y);
        if ty == T::zero() {
            return Ok(zero);
        }
        let dx = self.dominating.eval(x);
        if !(dx < T::one() - lit(DOMAIN_MARGIN)) {
            return Err(Error::OutsideDomain);
        }
        if ty > T::zero() {
            if branch == Branch::NonPos {
                return Err(Error::BranchMissing);
            }
            let upper = solve_phi(&self.dominating, x, y)?.value;
            return bracketed_newton(&self.tilde, x, y, T::zero(), upper, true);
        }
        if branch == Branch::NonNeg {
            return Err(Error::BranchMissing);
        }
        let dy = self.dominating.eval(y);
        let denom = T::one() - self.eps * dx;
        let mut lo = if denom > T::zero() {
            -(self.eps * dy + T::one()) / denom - T::one()
        } else {
            -(self.eps * dy + T::one()) - T::one()
        };
        let h = |t: T| t - self.tilde.eval(&axpy(y, t, x));
        let mut widen = 0;
        while h(lo) > T::zero() {
            lo = lo * lit(2.0);
            widen += 1;
            if widen > 60 {
                return Err(Error::BranchMissing);
            }
        }
        bracketed_newton(&self.tilde, x, y, lo, T::zero(), false)
    }
}

/// One-shot form of [`SignedSolver::solve`].
pub fn solve_phi_signed<T: Real>(
    tilde: &HomogeneousFn<T>,
    dominating: &HomogeneousFn<T>,
    x: &[T],
    y: &[T],
    branch: Branch,
) -> Result<FunkSolution<T>> {
    SignedSolver::new(tilde.clone(), dominating.clone())?.solve(x, y, branch)
}

/// Max |Φ(x + x̄, y) − Φ̄(x, y)| over random samples, where Φ̄ solves the equation
/// with base `φ̄ = Φ(x̄, ·)`.
pub fn translate_base_check<T: Real>(phi: &HomogeneousFn<T>, xbar: &[T], samples: usize, seed: u64) -> Result<T> {
    let n = phi.dim();
    if !(phi.eval(xbar) < T::one() - lit(DOMAIN_MARGIN)) {
        return Err(Error::OutsideDomain);
    }
    let base = phi.clone();
    let xb = xbar.to_vec();
    let shifted = HomogeneousFn::custom(n, move |v: &[T]| solve_phi(&base, &xb, v).map(|s| s.value).unwrap_or(T::nan()));
    let mut rng = sampling::rng(seed);
    let mut worst = T::zero();
    let mut taken = 0;
    let mut attempts = 0;
    while taken < samples && attempts < samples * 50 {
        attempts += 1;
        let dir: Vec<T> = sampling::random_unit(n, &mut rng);
        let frac: T = sampling::uniform(0.0, 0.9, &mut rng);
        let z = vecops::scale(frac / phi.eval(&dir), &dir);
        let x = sub(&z, xbar);
        if !(shifted.eval(&x) < lit(0.95)) {
            continue;
        }
        let y: Vec<T> = sampling::random_in_ball(n, 2.0, &mut rng);
        let lhs = solve_phi(phi, &z, &y)?.value;
        let rhs = solve_phi(&shifted, &x, &y)?.value;
        worst = worst.max((lhs - rhs).abs());
        taken += 1;
    }
    Ok(worst)
}

/// Max Euclidean distance between `{Φ(x,·) = 1}` and `{φ = 1} − x` along sampled rays.
pub fn indicatrix_translation_check<T: Real>(phi: &HomogeneousFn<T>, x: &[T], samples: usize) -> Result<T> {
    let n = phi.dim();
    let px = phi.eval(x);
    if !(px < T::one() - lit(DOMAIN_MARGIN)) {
        return Err(Error::OutsideDomain);
    }
    let dirs = sampling::unit_directions::<T>(n, samples.max(1), 3);
    let mut worst = T::zero();
    for u in &dirs {
        let lhs = T::one() / solve_phi(phi, x, u)?.value;
        // Ray from x hits {φ = 1} at parameter s: φ(x + s u) = 1.
        let g = |s: T| phi.eval(&axpy(x, s, u)) - T::one();
        let mut hi = T::one();
        while g(hi) < T::zero() {
            hi = hi * lit(2.0);
        }
        let mut lo = T::zero();
        for _ in 0..200 {
            let mid = lit::<T>(0.5) * (lo + hi);
            if g(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::epsilon() * hi {
                break;
            }
        }
        let s = lit::<T>(0.5) * (lo + hi);
        worst = worst.max((lhs - s).abs() * norm(u));
    }
    Ok(worst)
}

/// `1 + xᵏ Φ_{yᵏ}` from the implicit-function identity `1/(1 − xⁱ φ_{yⁱ}(y + xΦ))`.
pub fn derivative_factor_identity<T: Real>(phi: &HomogeneousFn<T>, x: &[T], y: &[T], value: T) -> Result<T> {
    let xi = axpy(y, value, x);
    let g = phi.grad(&xi)?;
    Ok(T::one() / (T::one() - dot(&g, x)))
}
