//! Fundamental tensor, strong-convexity verdicts and 2D scans of the set where a
//! metric is positive definite.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::diff::{self, scaled_step};
use crate::error::{Error, Result};
use crate::linalg::{self, golden_min};
use crate::metrics::{DomainSpec, FinslerMetric};
use crate::sampling;
use crate::scalar::{lit, to_f64, Real};
use crate::vecops::{self, check_dim, dot};

/// Relative eigenvalue threshold for n ≥ 3: `ε_pd = PD_RATIO · trace(g)/n`.
pub const PD_RATIO: f64 = 1e-9;
/// Margin on the normalised determinant `det g / F⁴ = (F + F'')/F` of a planar norm.
pub const PD_DET: f64 = 1e-10;
/// Normalised determinant under which a minimum along a segment between grid cells counts as a degenerate line.
pub const LINE_DET: f64 = 1e-8;
/// Upper bound on that minimum relative to the determinants at the segment ends.
pub const LINE_REL: f64 = 1e-3;
/// Angular step of the planar derivative stencil.
const ANGULAR_STEP: f64 = 1e-2;
/// Samples and half-width (as a fraction of the bisection segment) of the frontier polish.
const POLISH_SAMPLES: usize = 17;
const POLISH_WIDTH: f64 = 16.0;
/// Step refinements (each a factor 4) of the angular stencil.
const REFINE_LEVELS: usize = 5;
/// Accepted extrapolation error on the normalised determinant, relative to `max(|det|, 1)`.
const REFINE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTensor<T> {
    pub g: Vec<Vec<T>>,
    pub min_eig: T,
    pub y_direction: Vec<T>,
}

/// `½ ∂²(f²)/∂yⁱ∂yʲ`, symmetrised.
pub fn half_hessian_sq<T: Real, F>(mut f: F, y: &[T], h: T) -> Result<Vec<Vec<T>>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let mut m = diff::hessian(
        |p| {
            let v = f(p)?;
            Ok(v * v)
        },
        y,
        h,
    )?;
    let half = lit::<T>(0.5);
    let n = m.len();
    for i in 0..n {
        for j in i..n {
            let v = half * half * (m[i][j] + m[j][i]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    Ok(m)
}

pub fn fundamental_tensor<T: Real>(metric: &FinslerMetric<T>, x: &[T], y: &[T]) -> Result<FundamentalTensor<T>> {
    check_dim(y, metric.dim())?;
    let dir = vecops::unit(y)?;
    if !metric.contains(x) {
        return Err(Error::OutsideDomain);
    }
    let h = scaled_step(metric.steps().second, y);
    let g = half_hessian_sq(|w| metric.eval(x, w), y, h)?;
    let min_eig = linalg::min_eigenvalue(&g);
    Ok(FundamentalTensor { g, min_eig, y_direction: dir })
}

/// Eigen data of the fundamental tensor at the unit direction of angle `t` (2D).
///
/// With `F(t)` the norm on the unit circle, in the frame `(ŷ, ŷ⊥)` the tensor is
/// `[[F², FF'], [FF', F(F + F'') + F'²]]`.
#[derive(Debug, Clone, Copy)]
struct AngularEig<T> {
    min_eig: T,
    ratio: T,
    /// `det g / F⁴ = (F + F'')/F`.
    det: T,
}

fn angular_eig<T: Real, F>(f: &mut F, t: T, h: T) -> Result<AngularEig<T>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    // Close to the boundary of a domain the indicatrix bends on angular scales far below
    // the default step; shrink the stencil until the extrapolation error estimate is small.
    let mut step = h;
    let mut last = angular_stencil(f, t, step)?;
    for _ in 0..REFINE_LEVELS {
        let (eig, err) = last;
        if err <= lit::<T>(REFINE_TOL) * eig.det.abs().max(T::one()) {
            break;
        }
        step = step / lit(4.0);
        last = angular_stencil(f, t, step)?;
    }
    Ok(last.0)
}

/// Tensor of a planar norm from angular derivatives, with an error estimate on `det`.
fn angular_stencil<T: Real, F>(f: &mut F, t: T, h: T) -> Result<(AngularEig<T>, T)>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let two = lit::<T>(2.0);
    let mut at = |s: T| f(&sampling::polar(t + s));
    let f0 = at(T::zero())?;
    let mut plus = [T::zero(); 3];
    let mut minus = [T::zero(); 3];
    let mut step = h;
    for k in 0..3 {
        plus[k] = at(step)?;
        minus[k] = at(-step)?;
        step = step * two;
    }
    let d1 = (lit::<T>(8.0) * (plus[0] - minus[0]) - (plus[1] - minus[1])) / (lit::<T>(12.0) * h);
    // Second differences at h, 2h, 4h, Richardson-extrapolated twice.
    let second = |k: usize| (plus[k] - two * f0 + minus[k]) / (h * h * lit::<T>((1u32 << (2 * k)) as f64));
    let (s0, s1, s2) = (second(0), second(1), second(2));
    let four = lit::<T>(4.0);
    let r0 = (four * s0 - s1) / lit(3.0);
    let r1 = (four * s1 - s2) / lit(3.0);
    let d2 = (lit::<T>(16.0) * r0 - r1) / lit(15.0);
    let a = f0 * f0;
    let b = f0 * d1;
    let d = f0 * (f0 + d2) + d1 * d1;
    if !(a.is_finite() && b.is_finite() && d.is_finite()) {
        return Err(Error::NonFinite);
    }
    let half = lit::<T>(0.5);
    let mean = half * (a + d);
    let min_eig = mean - (half * (a - d)).hypot(b);
    let err = ((r0 - r1) / f0).abs();
    Ok((AngularEig { min_eig, ratio: min_eig / mean, det: (f0 + d2) / f0 }, err))
}

/// Result of minimising the fundamental tensor's smallest eigenvalue over directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalVerdict<T> {
    pub strong: bool,
    pub min_eig: T,
    /// `min_eig / (trace/n)` at the minimising direction.
    pub ratio: T,
    /// Normalised determinant `det g / F^{2n}` at the minimising direction.
    pub det: T,
    /// `det` divided by `(1 − f(x))²` on a sublevel domain `{f < 1}`, where the tensor of a
    /// planar norm degenerates quadratically towards the boundary; equal to `det` otherwise.
    pub scaled_det: T,
    pub direction: Vec<T>,
}

/// Which quantity a planar verdict minimises over directions.
#[derive(Debug, Clone, Copy)]
enum Key {
    Det,
    Ratio,
}

impl Key {
    fn of<T: Real>(&self, e: &AngularEig<T>) -> T {
        match self {
            Key::Det => e.det,
            Key::Ratio => e.ratio,
        }
    }
}

/// Minimises over unit directions of the plane, refining the best sampled minima by golden section.
fn verdict_2d<T: Real, F>(mut f: F, count: usize, key: Key) -> Result<DirectionalVerdict<T>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let h = lit::<T>(ANGULAR_STEP);
    let count = count.max(8);
    let angles = sampling::uniform_angles::<T>(count);
    let vals: Vec<AngularEig<T>> = angles.iter().map(|&t| angular_eig(&mut f, t, h)).collect::<Result<_>>()?;
    let k = |i: usize| key.of(&vals[i]);
    let mut minima: Vec<usize> = (0..count)
        .filter(|&i| k(i) <= k((i + count - 1) % count) && k(i) <= k((i + 1) % count))
        .collect();
    minima.sort_by(|&a, &b| k(a).partial_cmp(&k(b)).unwrap_or(std::cmp::Ordering::Equal));
    minima.truncate(3);
    let step = T::PI() * lit::<T>(2.0 / count as f64);
    let mut best_t = angles[minima[0]];
    let mut best = vals[minima[0]];
    for &i in &minima {
        let mut failed = None;
        let (t, r) = golden_min(
            |t| match angular_eig(&mut f, t, h) {
                Ok(e) => key.of(&e),
                Err(e) => {
                    failed = Some(e);
                    T::infinity()
                }
            },
            angles[i] - step,
            angles[i] + step,
            lit(1e-9),
        );
        if let Some(e) = failed {
            return Err(e);
        }
        if r < key.of(&best) {
            best = angular_eig(&mut f, t, h)?;
            best_t = t;
        }
    }
    Ok(DirectionalVerdict {
        strong: best.det > lit(PD_DET),
        min_eig: best.min_eig,
        ratio: best.ratio,
        det: best.det,
        scaled_det: best.det,
        direction: sampling::polar(best_t),
    })
}

/// Smallest tensor eigenvalue of a planar norm over unit directions, with its direction.
pub fn min_eig_over_directions_2d<T: Real, F>(f: F, count: usize) -> Result<(T, Vec<T>)>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let v = verdict_2d(f, count, Key::Ratio)?;
    Ok((v.min_eig, v.direction))
}

/// Verdict for `F(x, ·)`; 2D uses the angular form, higher dimensions sample random directions.
pub fn directional_verdict<T: Real>(metric: &FinslerMetric<T>, x: &[T], directions: usize) -> Result<DirectionalVerdict<T>> {
    check_dim(x, metric.dim())?;
    if !metric.contains(x) {
        return Err(Error::OutsideDomain);
    }
    if metric.dim() == 2 {
        let mut v = verdict_2d(|w| metric.eval(x, w), directions, Key::Det)?;
        if let DomainSpec::Sublevel(f) = metric.domain() {
            let gap = T::one() - f.eval(x);
            v.scaled_det = v.det / (gap * gap);
            v.strong = v.scaled_det > lit(PD_DET);
        }
        return Ok(v);
    }
    let n = lit::<T>(metric.dim() as f64);
    let mut best: Option<DirectionalVerdict<T>> = None;
    for d in sampling::unit_directions::<T>(metric.dim(), directions, 31) {
        let t = fundamental_tensor(metric, x, &d)?;
        let ratio = t.min_eig / (linalg::trace(&t.g) / n);
        if best.as_ref().is_none_or(|b| ratio < b.ratio) {
            let f2 = metric.eval(x, &d)?.powi(2);
            let det = linalg::determinant(&t.g) / f2.powi(metric.dim() as i32);
            best = Some(DirectionalVerdict { strong: false, min_eig: t.min_eig, ratio, det, scaled_det: det, direction: d });
        }
    }
    let mut b = best.ok_or(Error::BadParameter("no directions".into()))?;
    b.strong = b.ratio > lit(PD_RATIO);
    Ok(b)
}

/// `(g positive definite at every sampled direction, smallest eigenvalue seen)`.
pub fn is_strongly_convex<T: Real>(metric: &FinslerMetric<T>, x: &[T], directions: usize) -> Result<(bool, T)> {
    let v = directional_verdict(metric, x, directions)?;
    Ok((v.strong, v.min_eig))
}

/// Signed residual of the degeneracy hyperbola for the flat Randers family with drift `(a₁, 0)`.
pub fn hyperbola_residual<T: Real>(a1: T, x: &[T]) -> Result<T> {
    let lo = lit::<T>(8.0f64.sqrt() / 3.0);
    if !(a1 > lo && a1 < T::one()) {
        return Err(Error::BadParameter("a1 must lie in (2√2/3, 1)".into()));
    }
    check_dim(x, 2)?;
    let q = T::one() - a1 * a1;
    let k = lit::<T>(9.0) * a1 * a1 - lit(8.0);
    let s = x[0] + a1 / (lit::<T>(4.0) * q);
    Ok(lit::<T>(8.0) * q * s * s - k * x[1] * x[1] - k / (lit::<T>(2.0) * q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellLabel {
    Strong,
    Degenerate,
    Outside,
}

/// Shape of the strong set found by a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "components")]
pub enum Topology {
    Empty,
    Connected,
    /// Two or more components separated only by one-cell-wide degenerate curves.
    LineSplit(usize),
    Split(usize),
}

impl Topology {
    pub fn components(&self) -> usize {
        match *self {
            Topology::Empty => 0,
            Topology::Connected => 1,
            Topology::LineSplit(n) | Topology::Split(n) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions<T> {
    pub resolution: usize,
    pub directions: usize,
    /// `[x_min, x_max, y_min, y_max]`; derived from the domain when absent.
    pub bounds: Option<[T; 4]>,
    /// Bisection tolerance for frontier points.
    pub frontier_tol: T,
}

impl<T: Real> ScanOptions<T> {
    pub fn new(resolution: usize, directions: usize) -> Self {
        ScanOptions { resolution, directions, bounds: None, frontier_tol: lit(1e-6) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint<T> {
    pub point: [T; 2],
    /// Direction where the tensor degenerates at the frontier.
    pub direction: [T; 2],
}

#[derive(Debug, Clone)]
pub struct DomainScan<T> {
    pub resolution: usize,
    pub bounds: [T; 4],
    pub spacing: [T; 2],
    /// Row-major labels, index `j·res + i` with `i` along the first axis.
    pub labels: Vec<CellLabel>,
    pub ratios: Vec<T>,
    /// Scaled determinants (see [`DirectionalVerdict::scaled_det`]) at each cell's worst direction.
    pub dets: Vec<T>,
    pub min_eigs: Vec<T>,
    /// Degenerate cells that form a one-cell-wide curve.
    pub thin: Vec<bool>,
    pub component_of: Vec<Option<usize>>,
    pub components: usize,
    pub topology: Topology,
    pub frontier: Vec<FrontierPoint<T>>,
    pub polylines: Vec<Vec<[T; 2]>>,
    pub directions: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub components: usize,
    pub topology: Topology,
    pub resolution: usize,
    pub bounds: [f64; 4],
    pub boundary_polylines: Vec<Vec<[f64; 2]>>,
}

impl<T: Real> DomainScan<T> {
    pub fn center(&self, i: usize, j: usize) -> [T; 2] {
        cell_center(&self.bounds, self.resolution, i, j)
    }

    /// CSV rows `(x1, x2, label, min_eig, det)`.
    pub fn rows(&self) -> impl Iterator<Item = (T, T, CellLabel, T, T)> + '_ {
        let r = self.resolution;
        (0..r * r).map(move |k| {
            let c = self.center(k % r, k / r);
            (c[0], c[1], self.labels[k], self.min_eigs[k], self.dets[k])
        })
    }

    pub fn summary(&self) -> ScanSummary {
        ScanSummary {
            components: self.components,
            topology: self.topology,
            resolution: self.resolution,
            bounds: self.bounds.map(to_f64),
            boundary_polylines: self
                .polylines
                .iter()
                .map(|l| l.iter().map(|p| [to_f64(p[0]), to_f64(p[1])]).collect())
                .collect(),
        }
    }

    pub fn strong_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == CellLabel::Strong).count()
    }
}

fn cell_center<T: Real>(b: &[T; 4], res: usize, i: usize, j: usize) -> [T; 2] {
    let fx = lit::<T>((i as f64 + 0.5) / res as f64);
    let fy = lit::<T>((j as f64 + 0.5) / res as f64);
    [b[0] + fx * (b[1] - b[0]), b[2] + fy * (b[3] - b[2])]
}

fn domain_bounds<T: Real>(domain: &DomainSpec<T>) -> Result<[T; 4]> {
    let mut b = [T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity()];
    for u in sampling::unit_directions::<T>(2, 1440, 0) {
        let s = domain
            .boundary_param(&u)
            .ok_or_else(|| Error::BadParameter("scan needs explicit bounds for an unbounded domain".into()))?;
        b[0] = b[0].min(s * u[0]);
        b[1] = b[1].max(s * u[0]);
        b[2] = b[2].min(s * u[1]);
        b[3] = b[3].max(s * u[1]);
    }
    let pad = lit::<T>(0.01);
    let (wx, wy) = (b[1] - b[0], b[3] - b[2]);
    Ok([b[0] - pad * wx, b[1] + pad * wx, b[2] - pad * wy, b[3] + pad * wy])
}

/// Label cell and verdict at one point.
fn classify_point<T: Real>(metric: &FinslerMetric<T>, p: &[T; 2], directions: usize) -> (CellLabel, DirectionalVerdict<T>) {
    let nan = || DirectionalVerdict { strong: false, min_eig: T::nan(), ratio: T::nan(), det: T::nan(), scaled_det: T::nan(), direction: vec![] };
    if !metric.contains(p) {
        return (CellLabel::Outside, nan());
    }
    match directional_verdict(metric, p, directions) {
        Ok(v) if v.strong => (CellLabel::Strong, v),
        Ok(v) => (CellLabel::Degenerate, v),
        Err(_) => (CellLabel::Outside, nan()),
    }
}

/// Strong-convexity predicate at a point, false outside the domain.
pub fn strong_at<T: Real>(metric: &FinslerMetric<T>, p: &[T], directions: usize) -> bool {
    metric.contains(p) && directional_verdict(metric, p, directions).is_ok_and(|v| v.strong)
}

/// Classifies a regular grid over the domain of a planar metric and traces the frontier.
pub fn scan_domain_2d<T: Real>(metric: &FinslerMetric<T>, opts: &ScanOptions<T>) -> Result<DomainScan<T>> {
    check_dim(&[T::zero(); 2], metric.dim())?;
    let res = opts.resolution.max(2);
    let bounds = match opts.bounds {
        Some(b) => b,
        None => domain_bounds(metric.domain())?,
    };
    let cells: Vec<(CellLabel, DirectionalVerdict<T>)> = (0..res * res)
        .into_par_iter()
        .map(|k| classify_point(metric, &cell_center(&bounds, res, k % res, k / res), opts.directions))
        .collect();
    let mut labels: Vec<CellLabel> = cells.iter().map(|c| c.0).collect();
    let ratios: Vec<T> = cells.iter().map(|c| c.1.ratio).collect();
    let dets: Vec<T> = cells.iter().map(|c| c.1.scaled_det).collect();
    let min_eigs: Vec<T> = cells.iter().map(|c| c.1.min_eig).collect();
    let idx = |i: usize, j: usize| j * res + i;

    // Degenerate curves thinner than a cell: minima of the ratio along rows and columns.
    let candidates: Vec<(usize, usize, bool)> = (0..res * res)
        .flat_map(|k| [(k, true), (k, false)])
        .filter_map(|(k, along_row)| {
            let (i, j) = (k % res, k / res);
            if labels[k] != CellLabel::Strong {
                return None;
            }
            let (a, b) = if along_row {
                if i == 0 || i + 1 == res {
                    return None;
                }
                (idx(i - 1, j), idx(i + 1, j))
            } else {
                if j == 0 || j + 1 == res {
                    return None;
                }
                (idx(i, j - 1), idx(i, j + 1))
            };
            let ok = labels[a] == CellLabel::Strong && labels[b] == CellLabel::Strong;
            (ok && dets[k] < dets[a] && dets[k] < dets[b]).then_some((i, j, along_row))
        })
        .collect();
    let line_hits: Vec<usize> = candidates
        .par_iter()
        .filter_map(|&(i, j, along_row)| {
            let (ka, kb) = if along_row { (idx(i - 1, j), idx(i + 1, j)) } else { (idx(i, j - 1), idx(i, j + 1)) };
            let lo = cell_center(&bounds, res, ka % res, ka / res);
            let hi = cell_center(&bounds, res, kb % res, kb / res);
            let point = |s: T| [lo[0] + s * (hi[0] - lo[0]), lo[1] + s * (hi[1] - lo[1])];
            let (_, r) = golden_min(
                |s| {
                    let p = point(s);
                    directional_verdict(metric, &p, opts.directions).map_or(T::infinity(), |v| v.scaled_det)
                },
                T::zero(),
                T::one(),
                lit(1e-9),
            );
            // A degenerate line is a zero of the determinant; the rim only dips towards zero.
            let ends = dets[ka].min(dets[kb]);
            (r <= lit(LINE_DET) && r <= lit::<T>(LINE_REL) * ends).then_some(idx(i, j))
        })
        .collect();
    for k in line_hits {
        labels[k] = CellLabel::Degenerate;
    }
    let strong = |labels: &[CellLabel], i: usize, j: usize| labels[idx(i, j)] == CellLabel::Strong;
    let thin: Vec<bool> = (0..res * res)
        .map(|k| {
            let (i, j) = (k % res, k / res);
            if labels[k] != CellLabel::Degenerate {
                return false;
            }
            let row = i > 0 && i + 1 < res && strong(&labels, i - 1, j) && strong(&labels, i + 1, j);
            let col = j > 0 && j + 1 < res && strong(&labels, i, j - 1) && strong(&labels, i, j + 1);
            row || col
        })
        .collect();

    let (component_of, components) = flood_fill(&labels, res);
    // Components that merge once thin curves count as strong are separated only by lines.
    let bridged: Vec<CellLabel> =
        labels.iter().zip(&thin).map(|(&l, &t)| if t { CellLabel::Strong } else { l }).collect();
    let (_, merged) = flood_fill(&bridged, res);
    let topology = match components {
        0 => Topology::Empty,
        1 => Topology::Connected,
        n if merged < n => Topology::LineSplit(n),
        n => Topology::Split(n),
    };

    // Frontier between strong cells and clearly indefinite thick regions. Cells with a
    // determinant within the margin of zero (the rim of the domain, where the tensor
    // degenerates quadratically) carry no frontier.
    let mut pairs = Vec::new();
    for j in 0..res {
        for i in 0..res {
            let k = idx(i, j);
            if labels[k] != CellLabel::Strong {
                continue;
            }
            let mut nb = Vec::new();
            if i > 0 {
                nb.push(idx(i - 1, j));
            }
            if i + 1 < res {
                nb.push(idx(i + 1, j));
            }
            if j > 0 {
                nb.push(idx(i, j - 1));
            }
            if j + 1 < res {
                nb.push(idx(i, j + 1));
            }
            for m in nb {
                if labels[m] == CellLabel::Degenerate && !thin[m] && dets[m] < -lit::<T>(PD_DET) {
                    pairs.push((k, m));
                }
            }
        }
    }
    let frontier: Vec<FrontierPoint<T>> = pairs
        .par_iter()
        .filter_map(|&(k, m)| {
            let a = cell_center(&bounds, res, k % res, k / res);
            let b = cell_center(&bounds, res, m % res, m / res);
            bisect_frontier(metric, a, b, opts.directions, opts.frontier_tol)
        })
        .collect();
    let link = lit::<T>(3.0) * (bounds[1] - bounds[0]).max(bounds[3] - bounds[2]) / lit(res as f64);
    let polylines = chain(&frontier, link);
    Ok(DomainScan {
        resolution: res,
        bounds,
        spacing: [(bounds[1] - bounds[0]) / lit(res as f64), (bounds[3] - bounds[2]) / lit(res as f64)],
        labels,
        ratios,
        dets,
        min_eigs,
        thin,
        component_of,
        components,
        topology,
        frontier,
        polylines,
        directions: opts.directions,
    })
}

fn flood_fill(labels: &[CellLabel], res: usize) -> (Vec<Option<usize>>, usize) {
    let mut comp = vec![None; res * res];
    let mut count = 0;
    for start in 0..res * res {
        if labels[start] != CellLabel::Strong || comp[start].is_some() {
            continue;
        }
        comp[start] = Some(count);
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let (i, j) = (k % res, k / res);
            let mut visit = |m: usize| {
                if labels[m] == CellLabel::Strong && comp[m].is_none() {
                    comp[m] = Some(count);
                    queue.push_back(m);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < res {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - res);
            }
            if j + 1 < res {
                visit(k + res);
            }
        }
        count += 1;
    }
    (comp, count)
}

/// Bisection between a strong point `a` and a degenerate point `b`.
fn bisect_frontier<T: Real>(metric: &FinslerMetric<T>, a: [T; 2], b: [T; 2], directions: usize, tol: T) -> Option<FrontierPoint<T>> {
    let (mut lo, mut hi) = (a, b);
    let half = lit::<T>(0.5);
    let dist = |p: &[T; 2], q: &[T; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);
    let mut guard = 0;
    while dist(&lo, &hi) > tol {
        let mid = [half * (lo[0] + hi[0]), half * (lo[1] + hi[1])];
        // The frontier is the zero set of the determinant; the margin only guards labels.
        let positive = metric.contains(&mid) && directional_verdict(metric, &mid, directions).is_ok_and(|v| v.det > T::zero());
        if positive {
            lo = mid;
        } else {
            hi = mid;
        }
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let p = polish_root(metric, [half * (lo[0] + hi[0]), half * (lo[1] + hi[1])], a, b, directions);
    let v = directional_verdict(metric, &hi, directions).ok()?;
    Some(FrontierPoint { point: p, direction: [v.direction[0], v.direction[1]] })
}

/// Where the determinant varies slowly its rounding noise limits sign bisection. The minimum
/// over directions has a kink at the frontier (the minimising direction jumps), so each side is
/// fitted separately and the steeper side, the better-conditioned one, supplies the zero.
fn polish_root<T: Real>(metric: &FinslerMetric<T>, p: [T; 2], a: [T; 2], b: [T; 2], directions: usize) -> [T; 2] {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    let unit = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
    let w = len / lit(POLISH_WIDTH);
    let at = |u: T| [p[0] + u * w * unit[0], p[1] + u * w * unit[1]];
    let mut samples = Vec::with_capacity(POLISH_SAMPLES);
    for k in 0..POLISH_SAMPLES {
        let u = lit::<T>(2.0 * k as f64 / (POLISH_SAMPLES - 1) as f64 - 1.0);
        let x = at(u);
        if !metric.contains(&x) {
            return p;
        }
        match directional_verdict(metric, &x, directions) {
            Ok(v) => samples.push((u, v.det)),
            Err(_) => return p,
        }
    }
    // Samples run from the strong end towards the degenerate end.
    let Some(first_neg) = samples.iter().position(|s| s.1 <= T::zero()) else { return p };
    if first_neg == 0 || samples[first_neg..].iter().any(|s| s.1 > T::zero()) {
        return p;
    }
    let spacing = lit::<T>(2.0 / (POLISH_SAMPLES - 1) as f64);
    let (lo, hi) = (samples[first_neg - 1].0 - spacing, samples[first_neg].0 + spacing);
    let side_root = |side: &[(T, T)]| -> Option<(T, T)> {
        if side.len() < 3 {
            return None;
        }
        let us: Vec<T> = side.iter().map(|s| s.0).collect();
        let qs: Vec<T> = side.iter().map(|s| s.1).collect();
        let c = linalg::polyfit(&us, &qs, 2);
        // Newton from the bracket midpoint on the fitted quadratic.
        let mut u = lit::<T>(0.5) * (lo + hi);
        for _ in 0..20 {
            let slope = c[1] + lit::<T>(2.0) * c[2] * u;
            if slope == T::zero() {
                return None;
            }
            u = u - (c[0] + c[1] * u + c[2] * u * u) / slope;
        }
        let slope = (c[1] + lit::<T>(2.0) * c[2] * u).abs();
        (u >= lo && u <= hi && u.is_finite()).then_some((u, slope))
    };
    let strong_side = side_root(&samples[..first_neg]);
    let degenerate_side = side_root(&samples[first_neg..]);
    let best = match (strong_side, degenerate_side) {
        (Some(s), Some(d)) => Some(if s.1 > d.1 { s } else { d }),
        (s, d) => s.or(d),
    };
    best.map_or(p, |(u, _)| at(u))
}

/// Greedy nearest-neighbour chaining of frontier points into polylines.
fn chain<T: Real>(points: &[FrontierPoint<T>], link: T) -> Vec<Vec<[T; 2]>> {
    let mut used = vec![false; points.len()];
    let mut lines = Vec::new();
    let d = |p: &[T; 2], q: &[T; 2]| (p[0] - q[0]).hypot(p[1] - q[1]);
    for start in 0..points.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line = VecDeque::from([points[start].point]);
        for forward in [true, false] {
            loop {
                let end = if forward { *line.back().unwrap() } else { *line.front().unwrap() };
                let next = (0..points.len())
                    .filter(|&k| !used[k])
                    .map(|k| (k, d(&end, &points[k].point)))
                    .filter(|&(_, dist)| dist <= link)
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
                match next {
                    Some((k, _)) => {
                        used[k] = true;
                        if forward {
                            line.push_back(points[k].point);
                        } else {
                            line.push_front(points[k].point);
                        }
                    }
                    None => break,
                }
            }
        }
        lines.push(line.into_iter().collect());
    }
    lines
}

/// Midpoints of random same-component pairs of strong cells that fail the strong predicate.
pub fn convexity_violations<T: Real>(metric: &FinslerMetric<T>, scan: &DomainScan<T>, pairs: usize, seed: u64) -> usize {
    use rand::Rng;
    let mut rng = sampling::rng(seed);
    let mut by_comp: Vec<Vec<usize>> = vec![Vec::new(); scan.components];
    for (k, c) in scan.component_of.iter().enumerate() {
        if let Some(c) = c {
            by_comp[*c].push(k);
        }
    }
    let res = scan.resolution;
    let mut violations = 0;
    for comp in by_comp.iter().filter(|c| c.len() >= 2) {
        for _ in 0..pairs {
            let a = comp[rng.gen_range(0..comp.len())];
            let b = comp[rng.gen_range(0..comp.len())];
            let pa = scan.center(a % res, a / res);
            let pb = scan.center(b % res, b / res);
            let mid = [lit::<T>(0.5) * (pa[0] + pb[0]), lit::<T>(0.5) * (pa[1] + pb[1])];
            if !strong_at(metric, &mid, scan.directions) {
                violations += 1;
            }
        }
    }
    violations
}

/// Angles in degrees between the degenerate direction and the traced frontier tangent.
pub fn tangency_errors<T: Real>(scan: &DomainScan<T>) -> Vec<T> {
    let mut out = Vec::new();
    let deg = lit::<T>(180.0) / T::PI();
    for line in scan.polylines.iter().filter(|l| l.len() >= 5) {
        for w in line.windows(5) {
            let t = [w[4][0] - w[0][0], w[4][1] - w[0][1]];
            let nt = t[0].hypot(t[1]);
            if nt == T::zero() {
                continue;
            }
            let p = w[2];
            let Some(fp) = scan.frontier.iter().find(|f| f.point == p) else { continue };
            let c = (dot(&t, &fp.direction) / nt).abs().min(T::one());
            out.push(c.acos() * deg);
        }
    }
    out
}

/// Bisection on the parameter where the strong set first splits into two or more components.
pub fn split_transition<T: Real, M>(make: M, mut lo: T, mut hi: T, resolution: usize, directions: usize, tol: T) -> Result<T>
where
    M: Fn(T) -> Result<FinslerMetric<T>>,
{
    let splits = |a: T| -> Result<bool> {
        let m = make(a)?;
        Ok(scan_domain_2d(&m, &ScanOptions::new(resolution, directions))?.components >= 2)
    };
    if splits(lo)? || !splits(hi)? {
        return Err(Error::BadParameter("transition is not bracketed".into()));
    }
    while hi - lo > tol {
        let mid = lit::<T>(0.5) * (lo + hi);
        if splits(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lit::<T>(0.5) * (lo + hi))
}
