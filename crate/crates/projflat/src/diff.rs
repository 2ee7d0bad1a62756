//! Central finite differences with one Richardson pass.
//!
//! Every routine takes a fallible closure so that domain errors raised by
//! metric evaluations propagate instead of turning into NaNs.

use crate::error::Result;
use crate::scalar::{lit, Real};
use crate::vecops::norm;

/// Relative step sizes used across the crate.
#[derive(Debug, Clone, Copy)]
pub struct Steps<T> {
    /// First derivatives of directly evaluated functions.
    pub first: T,
    /// Second derivatives (fundamental tensor).
    pub second: T,
    /// Derivatives of quantities that are themselves finite differences.
    pub nested: T,
}

impl<T: Real> Default for Steps<T> {
    fn default() -> Self {
        Steps { first: lit(1e-5), second: lit(3e-4), nested: lit(1e-3) }
    }
}

/// `rel · max(1, |v|)`
pub fn scaled_step<T: Real>(rel: T, v: &[T]) -> T {
    rel * norm(v).max(T::one())
}

/// f'(0) from f(±h), f(±2h).
pub fn d1<T: Real, F>(mut f: F, h: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let two = lit::<T>(2.0);
    let fp = f(h)?;
    let fm = f(-h)?;
    let fp2 = f(two * h)?;
    let fm2 = f(-two * h)?;
    let coarse = (fp2 - fm2) / (lit::<T>(4.0) * h);
    let fine = (fp - fm) / (two * h);
    Ok((lit::<T>(4.0) * fine - coarse) / lit(3.0))
}

/// f''(0) from f(0), f(±h), f(±2h).
pub fn d2<T: Real, F>(mut f: F, h: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let two = lit::<T>(2.0);
    let f0 = f(T::zero())?;
    let fp = f(h)?;
    let fm = f(-h)?;
    let fp2 = f(two * h)?;
    let fm2 = f(-two * h)?;
    let fine = (fp - two * f0 + fm) / (h * h);
    let coarse = (fp2 - two * f0 + fm2) / (lit::<T>(4.0) * h * h);
    Ok((lit::<T>(4.0) * fine - coarse) / lit(3.0))
}

/// Gradient of `f` at `p` with absolute step `h`.
pub fn gradient<T: Real, F>(mut f: F, p: &[T], h: T) -> Result<Vec<T>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let mut q = p.to_vec();
    let mut g = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let base = p[k];
        let dk = d1(
            |s| {
                q[k] = base + s;
                f(&q)
            },
            h,
        )?;
        q[k] = base;
        g.push(dk);
    }
    Ok(g)
}

/// Directional derivative `d/ds f(p + s v)` at `s = 0`.
pub fn directional<T: Real, F>(mut f: F, p: &[T], v: &[T], h: T) -> Result<T>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let mut q = p.to_vec();
    d1(
        |s| {
            for i in 0..p.len() {
                q[i] = p[i] + s * v[i];
            }
            f(&q)
        },
        h,
    )
}

/// Symmetric Hessian of `f` at `p` with absolute step `h`.
pub fn hessian<T: Real, F>(mut f: F, p: &[T], h: T) -> Result<Vec<Vec<T>>>
where
    F: FnMut(&[T]) -> Result<T>,
{
    let n = p.len();
    let mut hess = vec![vec![T::zero(); n]; n];
    let mut q = p.to_vec();
    for i in 0..n {
        let base = p[i];
        hess[i][i] = d2(
            |s| {
                q[i] = base + s;
                f(&q)
            },
            h,
        )?;
        q[i] = base;
    }
    let two = lit::<T>(2.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut mixed = |s: T| -> Result<T> {
                let mut val = T::zero();
                for (si, sj, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                    q[i] = p[i] + lit::<T>(si) * s;
                    q[j] = p[j] + lit::<T>(sj) * s;
                    val = val + lit::<T>(sign) * f(&q)?;
                }
                q[i] = p[i];
                q[j] = p[j];
                Ok(val / (lit::<T>(4.0) * s * s))
            };
            let fine = mixed(h)?;
            let coarse = mixed(two * h)?;
            let v = (lit::<T>(4.0) * fine - coarse) / lit(3.0);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(hess)
}
