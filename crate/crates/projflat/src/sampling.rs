//! Deterministic direction and point sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{lit, Real};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Golden angle in radians.
pub fn golden_angle<T: Real>() -> T {
    T::PI() * (lit::<T>(3.0) - lit::<T>(5.0).sqrt())
}

/// `count` angles in [0, 2π) spaced by the golden angle.
pub fn golden_angles<T: Real>(count: usize) -> Vec<T> {
    let ga = golden_angle::<T>();
    let tau = T::TAU();
    (0..count)
        .map(|k| {
            let a = lit::<T>(k as f64) * ga;
            a - (a / tau).floor() * tau
        })
        .collect()
}

/// `count` equally spaced angles in [0, 2π).
pub fn uniform_angles<T: Real>(count: usize) -> Vec<T> {
    let step = T::TAU() / lit(count as f64);
    (0..count).map(|k| lit::<T>(k as f64) * step).collect()
}

pub fn polar<T: Real>(angle: T) -> Vec<T> {
    vec![angle.cos(), angle.sin()]
}

/// A unit vector uniformly distributed on the sphere of dimension `n − 1`.
pub fn random_unit<T: Real>(n: usize, rng: &mut SampleRng) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|a| a * a).sum();
        if r2 > 1e-6 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|a| lit(a / r)).collect();
        }
    }
}

/// Unit directions: evenly spread angles when `n = 2`, seeded random otherwise.
pub fn unit_directions<T: Real>(n: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    if n == 2 {
        uniform_angles::<T>(count).into_iter().map(polar).collect()
    } else {
        let mut r = rng(seed);
        (0..count).map(|_| random_unit(n, &mut r)).collect()
    }
}

/// A point uniformly distributed in the Euclidean ball of radius `radius`.
pub fn random_in_ball<T: Real>(n: usize, radius: f64, rng: &mut SampleRng) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|a| a * a).sum();
        if r2 <= 1.0 {
            return v.into_iter().map(|a| lit(a * radius)).collect();
        }
    }
}

pub fn uniform<T: Real>(lo: f64, hi: f64, rng: &mut SampleRng) -> T {
    lit(rng.gen_range(lo..hi))
}
