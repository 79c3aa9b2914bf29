//! Matrix exponential by scaling and squaring around a diagonal Padé core.
//!
//! The Padé degree is picked so that the truncation bound sits below the
//! working precision, which makes the method usable at any mantissa width.
//! Both `exp(sA)` and `exp(-sA)` fall out of one factorisation, so the
//! inverse residual check costs only an extra solve and the squarings.

use super::{CMatrix, Lu};
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::scalar::{Cx, Real};

/// Norm the scaled argument is reduced below before the Padé step.
const THETA: f64 = 0.5;

/// `exp(s·A)`, with the residual `exp(sA)·exp(-sA) ≈ I` verified.
pub fn mat_exp<T: Real>(a: &CMatrix<T>, s: Cx<T>, ctx: &PrecisionContext) -> Result<CMatrix<T>> {
    Ok(mat_exp_pair(a, s, ctx)?.0)
}

/// `(exp(sA), exp(-sA))`, both checked against each other.
pub fn mat_exp_pair<T: Real>(
    a: &CMatrix<T>,
    s: Cx<T>,
    ctx: &PrecisionContext,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    if !a.is_square() {
        return Err(Error::Dimension("exponential of a non-square matrix".into()));
    }
    if !a.is_finite() || !s.re.to_f64().is_finite() || !s.im.to_f64().is_finite() {
        return Err(Error::NonFinite("matrix exponential argument".into()));
    }
    let n = a.rows();
    let b = a.scale(s);
    let norm = b.norm_one().to_f64();
    if norm == 0.0 {
        return Ok((CMatrix::identity(n), CMatrix::identity(n)));
    }

    // First try the standard reduction; on a residual failure retry once
    // with a tighter reduction and a longer Padé core.
    let mut last = None;
    for (theta, extra_bits) in [(THETA, 8u32), (THETA / 8.0, 64)] {
        let (e, einv) = scaled_pade(&b, norm, theta, T::MANTISSA_BITS + extra_bits)?;
        let residual = inverse_residual(&e, &einv);
        let bound = ctx.tolerance_f64();
        if residual <= bound {
            return Ok((e, einv));
        }
        last = Some(Error::ExpResidual { residual, bound });
    }
    Err(last.unwrap())
}

/// `max|E E⁻ - I| / max(1, |E|_F |E⁻|_F)`.
fn inverse_residual<T: Real>(e: &CMatrix<T>, einv: &CMatrix<T>) -> f64 {
    let mut r = e.mul(einv);
    r.add_diagonal(Cx::new(-T::one(), T::zero()));
    let scale = (e.norm_fro().to_f64() * einv.norm_fro().to_f64()).max(1.0);
    r.norm_max().to_f64() / scale
}

/// log2 of the leading truncation term of the [m/m] Padé approximant at `‖X‖ = theta`.
fn pade_error_log2(m: u32, theta: f64) -> f64 {
    let lf = |k: u32| (1..=k).map(|i| (i as f64).log2()).sum::<f64>();
    2.0 * lf(m) - lf(2 * m) - lf(2 * m + 1) + (2 * m + 1) as f64 * theta.log2()
}

fn pade_degree(theta: f64, bits: u32) -> u32 {
    (1..400)
        .find(|&m| pade_error_log2(m, theta) < -(bits as f64))
        .expect("Padé degree search")
}

fn scaled_pade<T: Real>(
    b: &CMatrix<T>,
    norm: f64,
    theta: f64,
    bits: u32,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let n = b.rows();
    let squarings = if norm > theta {
        (norm / theta).log2().ceil() as i32
    } else {
        0
    };
    let x = b.scale_real(T::one().mul_pow2(-squarings));
    let m = pade_degree(theta, bits) as usize;

    // Padé numerator coefficients c_k; the denominator uses (-1)^k c_k.
    let mut c = vec![T::one()];
    for k in 1..=m {
        let num = T::from_i64((m - k + 1) as i64);
        let den = T::from_i64((k * (2 * m - k + 1)) as i64);
        let prev = c[k - 1];
        c.push(prev * num / den);
    }
    let even: Vec<T> = c.iter().step_by(2).copied().collect();
    let odd: Vec<T> = c.iter().skip(1).step_by(2).copied().collect();

    let y = x.mul(&x);
    let q = ((even.len().max(odd.len()) as f64).sqrt().ceil() as usize).max(1);
    let mut powers = vec![CMatrix::identity(n), y];
    while powers.len() <= q {
        let next = powers.last().unwrap().mul(&powers[1]);
        powers.push(next);
    }
    let v = paterson_stockmeyer(&even, &powers, q);
    let u = x.mul(&paterson_stockmeyer(&odd, &powers, q));

    let plus = v.add(&u);
    let minus = v.sub(&u);
    let mut e = Lu::new(&minus)?.solve(&plus)?;
    let mut einv = Lu::new(&plus)?.solve(&minus)?;
    for _ in 0..squarings {
        e = e.mul(&e);
        einv = einv.mul(&einv);
    }
    Ok((e, einv))
}

/// `Σ coef[j] Y^j` given `powers[i] = Y^i` for `i ≤ q`.
fn paterson_stockmeyer<T: Real>(coef: &[T], powers: &[CMatrix<T>], q: usize) -> CMatrix<T> {
    let n = powers[0].rows();
    let chunks: Vec<&[T]> = coef.chunks(q).collect();
    let block = |ch: &[T]| {
        let mut acc = CMatrix::zeros(n, n);
        for (i, &a) in ch.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let p = &powers[i];
            for (dst, src) in acc.as_mut_slice().iter_mut().zip(p.as_slice()) {
                dst.re += src.re * a;
                dst.im += src.im * a;
            }
        }
        acc
    };
    let mut acc = block(chunks[chunks.len() - 1]);
    for ch in chunks.iter().rev().skip(1) {
        acc = acc.mul(&powers[q]).add(&block(ch));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cis, cx};
    use crate::MpFloat;

    #[test]
    fn pade_degree_grows_with_precision() {
        let m53 = pade_degree(THETA, 61);
        let m448 = pade_degree(THETA, 456);
        assert!(m53 < m448);
        assert!((6..=9).contains(&m53), "{m53}");
    }

    #[test]
    fn diagonal_matrix_exponentiates_entrywise() {
        type T = MpFloat<4>;
        let ctx = PrecisionContext::with_digits(64).unwrap();
        let a = CMatrix::<T>::from_fn(3, 3, |i, j| {
            if i == j {
                cx(i as f64 - 1.5, 0.25 * i as f64)
            } else {
                cx(0.0, 0.0)
            }
        });
        let e = mat_exp(&a, cx(0.0, -1.0), &ctx).unwrap();
        for i in 0..3 {
            let z = a[(i, i)] * cx::<T>(0.0, -1.0);
            let expected = cis(z.im) * z.re.exp();
            assert!((e[(i, i)] - expected).norm_sqr().to_f64() < 1e-110);
        }
    }

    #[test]
    fn nilpotent_block_is_exact() {
        let ctx = PrecisionContext::double();
        let a = CMatrix::<f64>::from_real_rows(&[vec![0.0, 3.0], vec![0.0, 0.0]]);
        let e = mat_exp(&a, cx(1.0, 0.0), &ctx).unwrap();
        let want = CMatrix::from_real_rows(&[vec![1.0, 3.0], vec![0.0, 1.0]]);
        assert!(e.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn rotation_generator() {
        // exp(t [[0,-1],[1,0]]) is a rotation by t
        type T = MpFloat<3>;
        let ctx = PrecisionContext::with_digits(40).unwrap();
        let a = CMatrix::<T>::from_real_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let t = T::from_f64(7.25);
        let e = mat_exp(&a, Cx::new(t, T::ZERO), &ctx).unwrap();
        let (s, c) = t.sin_cos();
        assert!((e[(0, 0)].re - c).abs().to_f64() < 1e-50);
        assert!((e[(1, 0)].re - s).abs().to_f64() < 1e-50);
        assert!((e[(0, 1)].re + s).abs().to_f64() < 1e-50);
    }

    #[test]
    fn rejects_non_finite() {
        let ctx = PrecisionContext::double();
        let mut a = CMatrix::<f64>::identity(2);
        a[(0, 1)] = cx(f64::NAN, 0.0);
        assert!(matches!(
            mat_exp(&a, cx(1.0, 0.0), &ctx),
            Err(Error::NonFinite(_))
        ));
    }
}
