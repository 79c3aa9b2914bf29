use super::CMatrix;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::scalar::{czero, norm_sqr, Cx, Real};

/// Orthonormal basis of the column span of a tall matrix.
///
/// Classical Gram-Schmidt run twice per column, so orthogonality holds to
/// working precision for any numerically full-rank input. The implied `R`
/// has a real positive diagonal, which fixes the gauge uniquely.
pub fn thin_qr<T: Real>(w: &CMatrix<T>, ctx: &PrecisionContext) -> Result<CMatrix<T>> {
    Ok(thin_qr_r(w, ctx)?.0)
}

/// `(Q, R)` with `W = Q R`.
pub fn thin_qr_r<T: Real>(
    w: &CMatrix<T>,
    ctx: &PrecisionContext,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let (m, n) = (w.rows(), w.cols());
    if n > m {
        return Err(Error::Dimension(format!("QR of a wide {m}x{n} matrix")));
    }
    if !w.is_finite() {
        return Err(Error::NonFinite("QR input".into()));
    }
    let tol = ctx.tolerance::<T>();
    // Work column-major: row j of `qt` holds column j of Q.
    let wt = w.transpose();
    let mut qt = CMatrix::<T>::zeros(n, m);
    let mut r = CMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut v: Vec<Cx<T>> = wt.row(j).to_vec();
        let orig = sum_sq(&v).sqrt();
        if orig.is_zero() {
            return Err(Error::RankDeficient { column: j });
        }
        for _pass in 0..2 {
            if j == 0 {
                break;
            }
            // c = Q_{<j}^† v ; v -= Q_{<j} c
            let mut coef = vec![czero::<T>(); j];
            for (i, c) in coef.iter_mut().enumerate() {
                let qi = qt.row(i);
                let mut s = czero();
                for (a, b) in qi.iter().zip(&v) {
                    s += a.conj() * *b;
                }
                *c = s;
            }
            for (i, c) in coef.iter().enumerate() {
                let qi = qt.row(i);
                for (x, q) in v.iter_mut().zip(qi) {
                    *x -= *q * *c;
                }
                r[(i, j)] += *c;
            }
        }
        let nrm = sum_sq(&v).sqrt();
        if nrm <= tol * orig {
            return Err(Error::RankDeficient { column: j });
        }
        let inv = T::one() / nrm;
        r[(j, j)] = Cx::new(nrm, T::zero());
        let row = &mut qt.as_mut_slice()[j * m..(j + 1) * m];
        for (dst, x) in row.iter_mut().zip(&v) {
            *dst = Cx::new(x.re * inv, x.im * inv);
        }
    }
    Ok((qt.transpose(), r))
}

/// Orthonormal basis via Cholesky factorisation of the Gram matrix,
/// `Q = W R⁻¹` with `W†W = R†R`.
///
/// Built from two matrix products, so it is much cheaper than Gram-Schmidt
/// in multiprecision, but the loss of orthogonality scales like `κ(W)²`.
/// Fails with `RankDeficient` when a pivot is not safely positive; callers
/// fall back to [`thin_qr`] in that case. Produces the same positive-diagonal
/// gauge as [`thin_qr`].
pub fn cholesky_qr<T: Real>(w: &CMatrix<T>, ctx: &PrecisionContext) -> Result<CMatrix<T>> {
    let (q, worst_pivot) = cholesky_qr_pass(w, ctx)?;
    // An ill-conditioned input leaves Q off orthogonal by ~κ²u; a second
    // pass on the nearly orthonormal Q removes it.
    if worst_pivot < 1e-6 {
        return Ok(cholesky_qr_pass(&q, ctx)?.0);
    }
    Ok(q)
}

/// One pass; also returns the smallest pivot relative to the largest, an
/// estimate of `1/κ²`.
fn cholesky_qr_pass<T: Real>(w: &CMatrix<T>, ctx: &PrecisionContext) -> Result<(CMatrix<T>, f64)> {
    let n = w.cols();
    if n > w.rows() {
        return Err(Error::Dimension(format!("QR of a wide {}x{n} matrix", w.rows())));
    }
    if !w.is_finite() {
        return Err(Error::NonFinite("QR input".into()));
    }
    let gram = w.adjoint().mul(w);
    // Demand that squaring the condition number leaves half the digits.
    let floor = ctx.tolerance::<T>().sqrt();
    let scale = (0..n).map(|i| gram[(i, i)].re).fold(T::zero(), |a, b| a.max_of(b));
    // Upper-triangular R, row by row: R_ii = sqrt(G_ii - Σ_k |R_ki|²).
    let mut r = CMatrix::<T>::zeros(n, n);
    let mut worst = f64::INFINITY;
    for i in 0..n {
        let mut d = gram[(i, i)].re;
        for k in 0..i {
            d -= norm_sqr(&r[(k, i)]);
        }
        if d <= floor * scale {
            return Err(Error::RankDeficient { column: i });
        }
        worst = worst.min((d / scale).to_f64());
        let rii = d.sqrt();
        r[(i, i)] = Cx::new(rii, T::zero());
        let inv = T::one() / rii;
        for j in i + 1..n {
            let mut s = gram[(i, j)];
            for k in 0..i {
                s -= r[(k, i)].conj() * r[(k, j)];
            }
            r[(i, j)] = Cx::new(s.re * inv, s.im * inv);
        }
    }
    // R⁻¹ by back substitution, column by column.
    let mut rinv = CMatrix::<T>::zeros(n, n);
    for j in 0..n {
        rinv[(j, j)] = Cx::new(T::one() / r[(j, j)].re, T::zero());
        for i in (0..j).rev() {
            let mut s = czero::<T>();
            for k in i + 1..=j {
                s += r[(i, k)] * rinv[(k, j)];
            }
            let inv = T::one() / r[(i, i)].re;
            rinv[(i, j)] = Cx::new(-s.re * inv, -s.im * inv);
        }
    }
    Ok((w.mul(&rinv), worst))
}

fn sum_sq<T: Real>(v: &[Cx<T>]) -> T {
    let mut s = T::zero();
    for z in v {
        s += norm_sqr(z);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn reconstructs_and_orthonormalises() {
        let ctx = PrecisionContext::double();
        let w = CMatrix::<f64>::from_fn(6, 3, |i, j| {
            cx((i * j * j) as f64 * 0.3 + 1.0 / (1.0 + i as f64), (i + 2 * j) as f64 * 0.1)
        });
        let (q, r) = thin_qr_r(&w, &ctx).unwrap();
        assert!(q.mul(&r).max_abs_diff(&w) < 1e-13);
        assert!(q.adjoint().mul(&q).max_abs_diff(&CMatrix::identity(3)) < 1e-14);
        for i in 0..3 {
            assert!(r[(i, i)].im == 0.0 && r[(i, i)].re > 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], cx(0.0, 0.0));
            }
        }
    }

    #[test]
    fn detects_rank_deficiency() {
        let ctx = PrecisionContext::double();
        let w = CMatrix::<f64>::from_fn(4, 2, |i, _| cx(i as f64 + 1.0, 0.0));
        assert!(matches!(
            thin_qr(&w, &ctx),
            Err(Error::RankDeficient { column: 1 })
        ));
    }

    #[test]
    fn cholesky_qr_agrees_with_gram_schmidt() {
        let ctx = PrecisionContext::with_digits(40).unwrap();
        type T = crate::MpFloat<3>;
        let w = CMatrix::<T>::from_fn(8, 4, |i, j| {
            let x = ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * (i * j) as f64;
            Cx::new(T::from_f64(x), T::from_f64(0.3 * (i as f64 - j as f64)))
        });
        let a = thin_qr(&w, &ctx).unwrap();
        let b = cholesky_qr(&w, &ctx).unwrap();
        assert!(a.max_abs_diff(&b).to_f64() < 1e-40);
    }

    #[test]
    fn cholesky_qr_refuses_dependent_columns() {
        let ctx = PrecisionContext::double();
        let w = CMatrix::<f64>::from_fn(4, 2, |i, _| cx(i as f64 + 1.0, 0.0));
        assert!(cholesky_qr(&w, &ctx).is_err());
    }
}
