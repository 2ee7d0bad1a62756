//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F>(f: &mut F, a: T, b: T) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let half = lit::<T>(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c)?;
    let mut kron = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for j in 0..7 {
        let dx = h * lit(XGK[j]);
        let s = f(c - dx)? + f(c + dx)?;
        kron = kron + s * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * lit(WG[j / 2]);
        }
    }
    let k = kron * h;
    let g = gauss * h;
    if !k.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((k, (k - g).abs()))
}

/// `∫ₐᵇ f` to relative tolerance `rel_tol` (with a tiny absolute floor).
pub fn integrate<T: Real, F>(mut f: F, a: T, b: T, rel_tol: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let (total, err) = gk15(&mut f, a, b)?;
    let mut intervals = vec![(a, b, total, err)];
    let mut sum = total;
    let mut err_sum = err;
    let floor = lit::<T>(1e-300);
    for _ in 0..2000 {
        if err_sum <= rel_tol * sum.abs() || err_sum <= floor {
            return Ok(sum);
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, iv)| if iv.3 > acc.1 { (i, iv.3) } else { acc });
        let (lo, hi, v, e) = intervals.swap_remove(idx);
        let mid = lit::<T>(0.5) * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid)?;
        let (v2, e2) = gk15(&mut f, mid, hi)?;
        sum = sum - v + v1 + v2;
        err_sum = err_sum - e + e1 + e2;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    if err_sum <= lit::<T>(1e3) * rel_tol * sum.abs() {
        Ok(sum)
    } else {
        Err(Error::NoConvergence { iterations: 2000 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_smooth() {
        let v = integrate(|t: f64| Ok(t * t), 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let v = integrate(|t: f64| Ok(1.0 / (1.0 + t * t)), -1e6, 1e6, 1e-12).unwrap();
        assert!((v - 2.0 * 1e6f64.atan()).abs() < 1e-9);
    }
}
