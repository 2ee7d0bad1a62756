//! Small dense-vector helpers on slices.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&p, &q)| p * q).sum()
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `a + t b`
#[inline]
pub fn axpy<T: Real>(a: &[T], t: T, b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&p, &q)| p + t * q).collect()
}

#[inline]
pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    axpy(a, T::one(), b)
}

#[inline]
pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    axpy(a, -T::one(), b)
}

#[inline]
pub fn scale<T: Real>(t: T, a: &[T]) -> Vec<T> {
    a.iter().map(|&p| t * p).collect()
}

#[inline]
pub fn neg<T: Real>(a: &[T]) -> Vec<T> {
    a.iter().map(|&p| -p).collect()
}

#[inline]
pub fn is_zero<T: Real>(a: &[T]) -> bool {
    a.iter().all(|p| *p == T::zero())
}

pub fn unit<T: Real>(a: &[T]) -> Result<Vec<T>> {
    let n = norm(a);
    if n == T::zero() {
        return Err(Error::ZeroVector);
    }
    Ok(scale(T::one() / n, a))
}

/// `|x|²|y|² − ⟨x,y⟩²` through the Lagrange identity, free of cancellation.
pub fn wedge_sq<T: Real>(x: &[T], y: &[T]) -> T {
    let mut acc = T::zero();
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let w = x[i] * y[j] - x[j] * y[i];
            acc = acc + w * w;
        }
    }
    acc
}

pub fn basis<T: Real>(n: usize, k: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n];
    e[k] = T::one();
    e
}

pub(crate) fn check_dim<T>(v: &[T], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(())
}
