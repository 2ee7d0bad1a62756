//! Serializable descriptions of norms and metrics, plus named presets.

use serde::{Deserialize, Serialize};

use crate::closed::ClosedKind;
use crate::error::{Error, Result};
use crate::homogeneous::HomogeneousFn;
use crate::metrics::FinslerMetric;

fn is_default_dim(d: &Option<usize>) -> bool {
    d.is_none()
}

/// A Minkowski norm or other positively homogeneous function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormDescriptor {
    Euclidean {
        #[serde(default, skip_serializing_if = "is_default_dim")]
        dim: Option<usize>,
    },
    Zero {
        #[serde(default, skip_serializing_if = "is_default_dim")]
        dim: Option<usize>,
    },
    /// `|y| + ⟨a, y⟩`.
    Randers { a: Vec<f64> },
    /// `⟨a, y⟩`.
    Linear { a: Vec<f64> },
    Scaled { c: f64, base: Box<NormDescriptor> },
    Sum { left: Box<NormDescriptor>, right: Box<NormDescriptor> },
    Difference { left: Box<NormDescriptor>, right: Box<NormDescriptor> },
}

impl NormDescriptor {
    /// Dimension fixed by the descriptor itself, if any.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        match self {
            NormDescriptor::Euclidean { dim } | NormDescriptor::Zero { dim } => *dim,
            NormDescriptor::Randers { a } | NormDescriptor::Linear { a } => Some(a.len()),
            NormDescriptor::Scaled { base, .. } => base.intrinsic_dim(),
            NormDescriptor::Sum { left, right } | NormDescriptor::Difference { left, right } => {
                left.intrinsic_dim().or(right.intrinsic_dim())
            }
        }
    }

    /// Builds the function in dimension `dim` (used where the descriptor leaves it open).
    pub fn build(&self, dim: usize) -> Result<HomogeneousFn<f64>> {
        let f = match self {
            NormDescriptor::Euclidean { dim: d } => HomogeneousFn::euclidean(d.unwrap_or(dim)),
            NormDescriptor::Zero { dim: d } => HomogeneousFn::zero(d.unwrap_or(dim)),
            NormDescriptor::Randers { a } => HomogeneousFn::randers(a.clone())?,
            NormDescriptor::Linear { a } => HomogeneousFn::linear(a.clone()),
            NormDescriptor::Scaled { c, base } => HomogeneousFn::scaled(*c, base.build(dim)?),
            NormDescriptor::Sum { left, right } => HomogeneousFn::sum(left.build(dim)?, right.build(dim)?)?,
            NormDescriptor::Difference { left, right } => {
                HomogeneousFn::difference(left.build(dim)?, right.build(dim)?)?
            }
        };
        if f.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: f.dim() });
        }
        Ok(f)
    }
}

fn default_n() -> usize {
    2
}

fn is_two(n: &usize) -> bool {
    *n == 2
}

/// A metric family together with its data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricDescriptor {
    /// Curvature 0 builder.
    K0 { psi: NormDescriptor, phi: NormDescriptor },
    /// Curvature −1 builder.
    Km1 { psi: NormDescriptor, phi: NormDescriptor },
    /// Funk metric of `{φ < 1}`.
    Funk { phi: NormDescriptor },
    /// Symmetrized Funk metric of `{φ < 1}`.
    Hilbert { phi: NormDescriptor },
    Minkowski { psi: NormDescriptor },
    Closed {
        #[serde(flatten)]
        kind: ClosedKind<f64>,
        #[serde(default = "default_n", skip_serializing_if = "is_two")]
        n: usize,
    },
    /// `F(x, −y)`.
    Reverse { metric: Box<MetricDescriptor> },
    /// Pull-back of a planar metric to the upper hemisphere chart.
    Sphere { planar: Box<MetricDescriptor> },
}

fn common_dim(norms: &[&NormDescriptor]) -> usize {
    norms.iter().find_map(|d| d.intrinsic_dim()).unwrap_or(2)
}

impl MetricDescriptor {
    pub fn build(&self) -> Result<FinslerMetric<f64>> {
        match self {
            MetricDescriptor::K0 { psi, phi } => {
                let n = common_dim(&[psi, phi]);
                FinslerMetric::build_k0(psi.build(n)?, phi.build(n)?)
            }
            MetricDescriptor::Km1 { psi, phi } => {
                let n = common_dim(&[psi, phi]);
                FinslerMetric::build_km1(psi.build(n)?, phi.build(n)?)
            }
            MetricDescriptor::Funk { phi } => Ok(FinslerMetric::funk(phi.build(common_dim(&[phi]))?)),
            MetricDescriptor::Hilbert { phi } => {
                Ok(FinslerMetric::hilbert_of(FinslerMetric::funk(phi.build(common_dim(&[phi]))?)))
            }
            MetricDescriptor::Minkowski { psi } => Ok(FinslerMetric::minkowski(psi.build(common_dim(&[psi]))?)),
            MetricDescriptor::Closed { kind, n } => FinslerMetric::closed_form(kind.clone(), *n),
            MetricDescriptor::Reverse { metric } => Ok(FinslerMetric::reverse(metric.build()?)),
            MetricDescriptor::Sphere { planar } => Ok(FinslerMetric::pullback(planar.build()?)),
        }
    }

    /// Constant flag curvature of the family, when known.
    pub fn curvature(&self) -> Option<f64> {
        match self {
            MetricDescriptor::K0 { .. } | MetricDescriptor::Minkowski { .. } => Some(0.0),
            MetricDescriptor::Km1 { .. } | MetricDescriptor::Hilbert { .. } => Some(-1.0),
            MetricDescriptor::Funk { .. } => Some(-0.25),
            MetricDescriptor::Closed { kind, .. } => Some(kind.curvature()),
            MetricDescriptor::Reverse { metric } => metric.curvature(),
            MetricDescriptor::Sphere { .. } => None,
        }
    }

    /// Initial data `(ψ, φ)` and curvature sign for the builder families.
    pub fn initial_data(&self) -> Option<(HomogeneousFn<f64>, HomogeneousFn<f64>, i8)> {
        let (psi, phi, k) = match self {
            MetricDescriptor::K0 { psi, phi } => (psi, phi, 0),
            MetricDescriptor::Km1 { psi, phi } => (psi, phi, -1),
            _ => return None,
        };
        let n = common_dim(&[psi, phi]);
        Some((psi.build(n).ok()?, phi.build(n).ok()?, k))
    }
}

/// Parameters that named presets may consume.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresetParams {
    pub a1: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub n: Option<usize>,
}

pub const PRESET_NAMES: [&str; 9] = [
    "euclidean",
    "euclid_funk",
    "berwald",
    "hilbert_ball",
    "riemann",
    "bryant",
    "randers_k0",
    "randers_km1",
    "hemisphere",
];

/// Resolves a preset name into a descriptor.
pub fn preset(name: &str, p: &PresetParams) -> Result<MetricDescriptor> {
    let n = p.n.unwrap_or(2);
    let euclid = || NormDescriptor::Euclidean { dim: (n != 2).then_some(n) };
    let randers_a = || {
        let mut a = vec![0.0; n];
        a[0] = p.a1.unwrap_or(0.0);
        a
    };
    Ok(match name {
        "euclidean" => MetricDescriptor::Minkowski { psi: euclid() },
        "euclid_funk" => MetricDescriptor::Closed { kind: ClosedKind::EuclidFunk, n },
        "berwald" => MetricDescriptor::Closed { kind: ClosedKind::Berwald, n },
        "hilbert_ball" => MetricDescriptor::Hilbert { phi: euclid() },
        "riemann" => MetricDescriptor::Closed { kind: ClosedKind::Riemann { lambda: p.lambda.unwrap_or(1.0) }, n },
        "bryant" => MetricDescriptor::Closed { kind: ClosedKind::Bryant { alpha: p.alpha.unwrap_or(0.3) }, n },
        "randers_k0" => MetricDescriptor::Closed { kind: ClosedKind::RandersK0 { a: randers_a() }, n },
        "randers_km1" => MetricDescriptor::Closed {
            kind: ClosedKind::RandersKm1 { a: randers_a(), c: p.c.unwrap_or(2.0) },
            n,
        },
        "hemisphere" => MetricDescriptor::Sphere {
            planar: Box::new(MetricDescriptor::Closed { kind: ClosedKind::Bryant { alpha: p.alpha.unwrap_or(0.3) }, n }),
        },
        other => return Err(Error::BadInput(format!("unknown metric name `{other}`"))),
    })
}
