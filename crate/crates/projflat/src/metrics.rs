//! Constant-curvature metric families built from initial norms, plus closed forms.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use crate::closed::ClosedKind;
use crate::diff::{self, Steps};
use crate::error::{Error, Result};
use crate::funk::{self, Branch, SignedSolver, DOMAIN_MARGIN};
use crate::homogeneous::{GradMode, HomogeneousFn};
use crate::sampling;
use crate::scalar::{lit, Real};
use crate::vecops::{self, axpy, check_dim, dot, neg, norm};

/// Where a metric is defined.
#[derive(Debug, Clone)]
pub enum DomainSpec<T: Real> {
    AllSpace,
    /// `{x : f(x) < 1}`
    Sublevel(HomogeneousFn<T>),
    /// Spherical chart `(φ, θ…)` with `|φ| < π/2`.
    HemisphereChart,
}

impl<T: Real> DomainSpec<T> {
    pub fn contains(&self, x: &[T]) -> bool {
        match self {
            DomainSpec::AllSpace => x.iter().all(|v| v.is_finite()),
            DomainSpec::Sublevel(f) => f.eval(x) < T::one() - lit(DOMAIN_MARGIN),
            DomainSpec::HemisphereChart => x[0].abs() < T::FRAC_PI_2(),
        }
    }

    /// Largest `s` with `s·dir` on the boundary, if the domain is a bounded sublevel set.
    pub fn boundary_param(&self, dir: &[T]) -> Option<T> {
        match self {
            DomainSpec::Sublevel(f) => {
                let v = f.eval(dir);
                if v > T::zero() {
                    Some(T::one() / v)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Random interior point: a random direction scaled to at most `max_fraction` of the way to the boundary.
    pub fn sample(&self, dim: usize, max_fraction: f64, rng: &mut sampling::SampleRng) -> Vec<T> {
        let dir: Vec<T> = sampling::random_unit(dim, rng);
        let u: T = sampling::uniform(0.0, max_fraction, rng);
        let reach = match self {
            DomainSpec::Sublevel(_) => self.boundary_param(&dir).unwrap_or(T::one()),
            DomainSpec::AllSpace | DomainSpec::HemisphereChart => T::one(),
        };
        vecops::scale(u * reach, &dir)
    }
}

pub type MetricFn<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;

#[derive(Debug, Clone)]
enum MinusBranch<T: Real> {
    Zero,
    Signed(SignedSolver<T>),
}

/// How a metric is evaluated.
#[derive(Clone)]
pub enum Source<T: Real> {
    K0 { psi: HomogeneousFn<T>, phi: HomogeneousFn<T> },
    Km1 { psi: HomogeneousFn<T>, phi: HomogeneousFn<T>, plus: HomogeneousFn<T>, minus: MinusBranchHandle<T> },
    Funk { phi: HomogeneousFn<T> },
    Hilbert(Box<FinslerMetric<T>>),
    Closed(ClosedKind<T>),
    Reverse(Box<FinslerMetric<T>>),
    Minkowski { psi: HomogeneousFn<T> },
    /// Planar metric read in spherical coordinates of the upper hemisphere.
    Pullback(Box<FinslerMetric<T>>),
    Custom(MetricFn<T>),
}

/// Opaque handle for the `Φ₋` solver of the curvature −1 builder.
#[derive(Debug, Clone)]
pub struct MinusBranchHandle<T: Real>(MinusBranch<T>);

impl<T: Real> fmt::Debug for Source<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::K0 { psi, phi } => write!(f, "K0 {{ psi: {psi:?}, phi: {phi:?} }}"),
            Source::Km1 { psi, phi, .. } => write!(f, "Km1 {{ psi: {psi:?}, phi: {phi:?} }}"),
            Source::Funk { phi } => write!(f, "Funk {{ phi: {phi:?} }}"),
            Source::Hilbert(m) => write!(f, "Hilbert({m:?})"),
            Source::Closed(k) => write!(f, "Closed({k:?})"),
            Source::Reverse(m) => write!(f, "Reverse({m:?})"),
            Source::Minkowski { psi } => write!(f, "Minkowski {{ psi: {psi:?} }}"),
            Source::Pullback(m) => write!(f, "Pullback({m:?})"),
            Source::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A Finsler metric evaluator `F(x, y)` on a domain.
#[derive(Debug, Clone)]
pub struct FinslerMetric<T: Real> {
    dim: usize,
    domain: DomainSpec<T>,
    source: Source<T>,
    steps: Steps<T>,
}

fn sampled_zero<T: Real>(f: &HomogeneousFn<T>) -> bool {
    if f.is_zero_kind() {
        return true;
    }
    let dirs = sampling::unit_directions::<T>(f.dim(), if f.dim() == 2 { 256 } else { 1024 }, 9);
    dirs.iter().all(|d| f.eval(d).abs() <= lit::<T>(1e-14))
}

impl<T: Real> FinslerMetric<T> {
    fn new(dim: usize, domain: DomainSpec<T>, source: Source<T>) -> Self {
        FinslerMetric { dim, domain, source, steps: Steps::default() }
    }

    /// `F = ψ(y + xP)(1 + xᵏP_{yᵏ})` with `P = φ(y + xP)` on `{φ < 1}`.
    pub fn build_k0(psi: HomogeneousFn<T>, phi: HomogeneousFn<T>) -> Result<Self> {
        if psi.dim() != phi.dim() {
            return Err(Error::DimensionMismatch { expected: psi.dim(), got: phi.dim() });
        }
        let dim = psi.dim();
        if sampled_zero(&phi) {
            return Ok(Self::new(dim, DomainSpec::AllSpace, Source::K0 { psi, phi: HomogeneousFn::zero(dim) }));
        }
        let dirs = sampling::unit_directions::<T>(dim, 256, 13);
        if dirs.iter().any(|d| !(phi.eval(d) > T::zero())) {
            return Err(Error::NotPositive);
        }
        Ok(Self::new(dim, DomainSpec::Sublevel(phi.clone()), Source::K0 { psi, phi }))
    }

    /// `F = ½(Φ₊ − Φ₋)` with `Φ± = (φ ± ψ)(y + xΦ±)` on `{φ + ψ < 1}`.
    pub fn build_km1(psi: HomogeneousFn<T>, phi: HomogeneousFn<T>) -> Result<Self> {
        if psi.dim() != phi.dim() {
            return Err(Error::DimensionMismatch { expected: psi.dim(), got: phi.dim() });
        }
        let dim = psi.dim();
        let plus = HomogeneousFn::sum(phi.clone(), psi.clone())?;
        let dirs = sampling::unit_directions::<T>(dim, 256, 13);
        if dirs.iter().any(|d| !(plus.eval(d) > T::zero())) {
            return Err(Error::NotPositive);
        }
        let tilde = HomogeneousFn::difference(phi.clone(), psi.clone())?;
        let minus = if psi_equals_phi(&psi, &phi) {
            MinusBranch::Zero
        } else {
            MinusBranch::Signed(SignedSolver::new(tilde, plus.clone())?)
        };
        Ok(Self::new(
            dim,
            DomainSpec::Sublevel(plus.clone()),
            Source::Km1 { psi, phi, plus, minus: MinusBranchHandle(minus) },
        ))
    }

    /// Funk metric of `φ`: the solution of `F = φ(y + xF)`.
    pub fn funk(phi: HomogeneousFn<T>) -> Self {
        Self::new(phi.dim(), DomainSpec::Sublevel(phi.clone()), Source::Funk { phi })
    }

    pub fn minkowski(psi: HomogeneousFn<T>) -> Self {
        Self::new(psi.dim(), DomainSpec::AllSpace, Source::Minkowski { psi })
    }

    pub fn closed_form(kind: ClosedKind<T>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadParameter("dimension must be at least 2".into()));
        }
        let domain = match &kind {
            ClosedKind::EuclidFunk | ClosedKind::Berwald => DomainSpec::Sublevel(HomogeneousFn::euclidean(dim)),
            ClosedKind::Riemann { lambda } => {
                if *lambda < T::zero() {
                    DomainSpec::Sublevel(HomogeneousFn::scaled((-*lambda).sqrt(), HomogeneousFn::euclidean(dim)))
                } else {
                    DomainSpec::AllSpace
                }
            }
            ClosedKind::Bryant { .. } => DomainSpec::AllSpace,
            ClosedKind::RandersK0 { a } => {
                check_dim(a, dim)?;
                DomainSpec::Sublevel(HomogeneousFn::randers(a.clone())?)
            }
            ClosedKind::RandersKm1 { a, c } => {
                check_dim(a, dim)?;
                if !(*c > T::one()) {
                    return Err(Error::BadParameter("c must exceed 1".into()));
                }
                DomainSpec::Sublevel(HomogeneousFn::scaled(*c + T::one(), HomogeneousFn::randers(a.clone())?))
            }
        };
        Ok(Self::new(dim, domain, Source::Closed(kind)))
    }

    /// `H(x, y) = ½{F(x, y) + F(x, −y)}`.
    pub fn hilbert_of(funk: FinslerMetric<T>) -> Self {
        let domain = funk.domain.clone();
        Self::new(funk.dim, domain, Source::Hilbert(Box::new(funk)))
    }

    /// `F(x, −y)`.
    pub fn reverse(metric: FinslerMetric<T>) -> Self {
        let domain = metric.domain.clone();
        Self::new(metric.dim, domain, Source::Reverse(Box::new(metric)))
    }

    /// Planar metric expressed in the spherical chart `(φ, θ…)`.
    pub fn pullback(planar: FinslerMetric<T>) -> Self {
        Self::new(planar.dim, DomainSpec::HemisphereChart, Source::Pullback(Box::new(planar)))
    }

    pub fn custom<F>(dim: usize, domain: DomainSpec<T>, f: F) -> Self
    where
        F: Fn(&[T], &[T]) -> T + Send + Sync + 'static,
    {
        Self::new(dim, domain, Source::Custom(Arc::new(f)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    pub fn source(&self) -> &Source<T> {
        &self.source
    }

    pub fn steps(&self) -> Steps<T> {
        self.steps
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim && self.domain.contains(x)
    }

    /// The constant flag curvature of the family, when known from the construction.
    pub fn curvature_hint(&self) -> Option<T> {
        match &self.source {
            Source::K0 { .. } | Source::Minkowski { .. } => Some(T::zero()),
            Source::Km1 { .. } | Source::Hilbert(_) => Some(-T::one()),
            Source::Funk { .. } => Some(lit(-0.25)),
            Source::Closed(k) => Some(k.curvature()),
            Source::Reverse(m) | Source::Pullback(m) => m.curvature_hint(),
            Source::Custom(_) => None,
        }
    }

    pub fn eval(&self, x: &[T], y: &[T]) -> Result<T> {
        check_dim(x, self.dim)?;
        check_dim(y, self.dim)?;
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain);
        }
        let v = self.eval_unchecked(x, y)?;
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(v)
    }

    fn eval_unchecked(&self, x: &[T], y: &[T]) -> Result<T> {
        if vecops::is_zero(y) {
            return Ok(T::zero());
        }
        match &self.source {
            Source::K0 { psi, phi } => {
                if phi.is_zero_kind() {
                    return Ok(psi.eval(y));
                }
                let p = funk::solve_phi(phi, x, y)?.value;
                let factor = T::one() + self.k0_derivative_term(phi, x, y, p)?;
                Ok(psi.eval(&axpy(y, p, x)) * factor)
            }
            Source::Km1 { plus, minus, .. } => {
                let (p, m) = km1_pair(plus, &minus.0, x, y)?;
                Ok(lit::<T>(0.5) * (p - m))
            }
            Source::Funk { phi } => Ok(funk::solve_phi(phi, x, y)?.value),
            Source::Hilbert(m) => Ok(lit::<T>(0.5) * (m.eval_unchecked(x, y)? + m.eval_unchecked(x, &neg(y))?)),
            Source::Closed(k) => Ok(k.eval(x, y)),
            Source::Reverse(m) => m.eval_unchecked(x, &neg(y)),
            Source::Minkowski { psi } => Ok(psi.eval(y)),
            Source::Pullback(m) => {
                let (px, py) = crate::sphere::chart_to_plane(x, y)?;
                m.eval(&px, &py)
            }
            Source::Custom(f) => Ok(f(x, y)),
        }
    }

    /// `xᵏ P_{yᵏ}` as the derivative of `s ↦ P(x, y + s x)`. Implicit differentiation of
    /// `P = φ(y + xP)` gives `φ'·x / (1 − φ'·x)` at `ξ = y + xP`; a difference quotient
    /// covers gradients that are not available in closed form.
    fn k0_derivative_term(&self, phi: &HomogeneousFn<T>, x: &[T], y: &[T], p: T) -> Result<T> {
        let nx = norm(x);
        if nx == T::zero() {
            return Ok(T::zero());
        }
        if phi.grad_mode() == GradMode::ClosedForm {
            if let Ok(g) = phi.grad(&axpy(y, p, x)) {
                let gx = dot(&g, x);
                return Ok(gx / (T::one() - gx));
            }
        }
        let h = self.steps.first * norm(y).max(T::one()) / nx;
        diff::d1(|s| funk::solve_phi(phi, x, &axpy(y, s, x)).map(|r| r.value), h)
    }

    /// Projective factor known from the construction, without differentiating in `x`.
    pub fn known_projective(&self, x: &[T], y: &[T]) -> Option<Result<T>> {
        if !self.contains(x) {
            return Some(Err(Error::OutsideDomain));
        }
        match &self.source {
            Source::K0 { phi, .. } => Some(if phi.is_zero_kind() {
                Ok(T::zero())
            } else {
                funk::solve_phi(phi, x, y).map(|s| s.value)
            }),
            Source::Km1 { plus, minus, .. } => {
                Some(km1_pair(plus, &minus.0, x, y).map(|(p, m)| lit::<T>(0.5) * (p + m)))
            }
            Source::Minkowski { .. } => Some(Ok(T::zero())),
            Source::Funk { phi } => Some(funk::solve_phi(phi, x, y).map(|s| lit::<T>(0.5) * s.value)),
            Source::Closed(k) => k.projective(x, y).map(Ok),
            Source::Hilbert(m) => {
                let my = neg(y);
                let (pp, pm) = match (m.known_projective(x, y)?, m.known_projective(x, &my)?) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => return Some(Err(e)),
                };
                Some((|| {
                    let fp = m.eval(x, y)?;
                    let fm = m.eval(x, &my)?;
                    Ok((pp * fp - pm * fm) / (fp + fm))
                })())
            }
            Source::Reverse(m) => m.known_projective(x, &neg(y)).map(|r| r.map(|p| -p)),
            Source::Pullback(_) | Source::Custom(_) => None,
        }
    }

    /// `(Φ₊, Φ₋)` for the curvature −1 builder.
    pub fn km1_components(&self, x: &[T], y: &[T]) -> Option<Result<(T, T)>> {
        match &self.source {
            Source::Km1 { plus, minus, .. } => Some(km1_pair(plus, &minus.0, x, y)),
            _ => None,
        }
    }
}

fn km1_pair<T: Real>(plus: &HomogeneousFn<T>, minus: &MinusBranch<T>, x: &[T], y: &[T]) -> Result<(T, T)> {
    let p = funk::solve_phi(plus, x, y)?.value;
    let m = match minus {
        MinusBranch::Zero => T::zero(),
        MinusBranch::Signed(s) => s.solve(x, y, Branch::Largest)?.value,
    };
    Ok((p, m))
}

fn psi_equals_phi<T: Real>(psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>) -> bool {
    let dirs = sampling::unit_directions::<T>(psi.dim(), if psi.dim() == 2 { 256 } else { 1024 }, 17);
    dirs.iter().all(|d| (psi.eval(d) - phi.eval(d)).abs() <= lit::<T>(1e-14) * psi.eval(d).abs())
}

/// Case labels of the global classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    /// Curvature 0, `φ = 0`: a Minkowski space.
    FlatMinkowski,
    /// Curvature 0, `φ` a weak Minkowski norm: bounded domain, weak Funk projective factor.
    FlatFunk,
    /// Curvature −1, `ψ` reversible, `φ` odd, `|φ| < ψ`: a Hilbert metric.
    Hilbert,
    /// Curvature −1, `ψ = φ`: twice the metric is a Funk metric.
    HalfFunk,
    /// Curvature −1, `ψ < φ`: `F ≤ P`.
    ProjectiveDominant,
    /// Curvature −1, `|φ| < ψ` but not the Hilbert case: `|P| ≤ F`.
    Bounded,
}

impl CaseLabel {
    /// Position in the theorem's enumeration.
    pub fn index(&self) -> u8 {
        match self {
            CaseLabel::FlatMinkowski | CaseLabel::Hilbert => 1,
            CaseLabel::FlatFunk | CaseLabel::HalfFunk => 2,
            CaseLabel::ProjectiveDominant => 3,
            CaseLabel::Bounded => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub curvature_sign: i8,
    pub case_label: CaseLabel,
    pub backward_complete: bool,
    pub reversibility_finite: bool,
}

/// Assigns the global case from sampled comparisons of the initial norms.
pub fn classify<T: Real>(psi: &HomogeneousFn<T>, phi: &HomogeneousFn<T>, curvature: i8) -> Result<Classification> {
    if psi.dim() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), got: phi.dim() });
    }
    let n = psi.dim();
    let dirs = sampling::unit_directions::<T>(n, if n == 2 { 512 } else { 2048 }, 19);
    let tol = lit::<T>(1e-12);
    let all = |pred: &dyn Fn(&[T]) -> bool| dirs.iter().all(|d| pred(d));
    if !all(&|d| psi.eval(d) > T::zero()) {
        return Err(Error::Inadmissible("ψ must be positive".into()));
    }
    match curvature {
        0 => {
            if all(&|d| phi.eval(d).abs() <= tol) {
                Ok(Classification {
                    curvature_sign: 0,
                    case_label: CaseLabel::FlatMinkowski,
                    backward_complete: true,
                    reversibility_finite: true,
                })
            } else if all(&|d| phi.eval(d) > T::zero()) {
                Ok(Classification {
                    curvature_sign: 0,
                    case_label: CaseLabel::FlatFunk,
                    backward_complete: false,
                    reversibility_finite: false,
                })
            } else {
                Err(Error::Inadmissible("φ must vanish or be positive".into()))
            }
        }
        -1 => {
            if !all(&|d| phi.eval(d) + psi.eval(d) > T::zero()) {
                return Err(Error::Inadmissible("φ + ψ must be positive".into()));
            }
            let rel = |a: T, b: T| (a - b).abs() <= tol * (T::one() + b.abs());
            let reversible = all(&|d| rel(psi.eval(&neg(d)), psi.eval(d)));
            let odd = all(&|d| rel(phi.eval(&neg(d)), -phi.eval(d)));
            let inside = all(&|d| phi.eval(d).abs() < psi.eval(d) - tol);
            let equal = all(&|d| rel(phi.eval(d), psi.eval(d)));
            let above = all(&|d| phi.eval(d) > psi.eval(d) + tol);
            let label = if reversible && odd && inside {
                CaseLabel::Hilbert
            } else if equal {
                CaseLabel::HalfFunk
            } else if above {
                CaseLabel::ProjectiveDominant
            } else if inside {
                CaseLabel::Bounded
            } else {
                return Err(Error::Inadmissible("φ is neither above ψ nor inside (−ψ, ψ)".into()));
            };
            let hilbert = label == CaseLabel::Hilbert;
            Ok(Classification {
                curvature_sign: -1,
                case_label: label,
                backward_complete: hilbert,
                reversibility_finite: hilbert,
            })
        }
        _ => Err(Error::BadParameter("curvature must be 0 or −1".into())),
    }
}

/// Critical Randers drift where the curvature −1 positive-definiteness domain splits.
pub fn critical_lambda<T: Real>(c: T) -> Result<T> {
    if !(c > T::one()) {
        return Err(Error::BadParameter("c must exceed 1".into()));
    }
    let e = lit::<T>(2.0 / 3.0);
    let p = (c + T::one()).powf(e);
    let m = (c - T::one()).powf(e);
    Ok(lit::<T>(0.5) * (p - m) * (p + m).sqrt())
}
