//! Hermitian eigenproblems.
//!
//! Real symmetric matrices go through Householder tridiagonalisation and
//! implicit QL; complex Hermitian ones use cyclic Jacobi when vectors are
//! needed, or the real `[[Re, -Im], [Im, Re]]` embedding for values only.

use super::{CMatrix, RMatrix};
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::scalar::{cabs, czero, Cx, Real};

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigh<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

const MAX_QL_ITERATIONS: usize = 80;
const MAX_JACOBI_SWEEPS: usize = 60;

/// Full eigendecomposition of a Hermitian matrix.
pub fn eigh<T: Real>(a: &CMatrix<T>, ctx: &PrecisionContext) -> Result<Eigh<T>> {
    check_hermitian(a, ctx)?;
    if a.is_real() {
        let r = to_real(a);
        let (values, z) = eigh_real(&r, true)?;
        let z = z.expect("vectors requested");
        let vectors = CMatrix::from_fn(a.rows(), a.rows(), |i, j| Cx::new(z.at(i, j), T::zero()));
        return Ok(Eigh { values, vectors });
    }
    jacobi(a)
}

/// Eigenvalues only, ascending.
pub fn eigvalsh<T: Real>(a: &CMatrix<T>, ctx: &PrecisionContext) -> Result<Vec<T>> {
    check_hermitian(a, ctx)?;
    if a.is_real() {
        return Ok(eigh_real(&to_real(a), false)?.0);
    }
    let n = a.rows();
    let mut emb = RMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            *emb.at_mut(i, j) = z.re;
            *emb.at_mut(i + n, j + n) = z.re;
            *emb.at_mut(i, j + n) = -z.im;
            *emb.at_mut(i + n, j) = z.im;
        }
    }
    let doubled = eigh_real(&emb, false)?.0;
    Ok(doubled.into_iter().step_by(2).collect())
}

/// Spectrum of a correlation block, which must lie in `[0, 1]` up to the
/// tolerance; values within the padding are clamped.
pub fn pair_spectrum<T: Real>(g: &CMatrix<T>, ctx: &PrecisionContext) -> Result<Vec<T>> {
    let tol = ctx.tolerance::<T>();
    let one = T::one();
    let mut vals = eigvalsh(g, ctx)?;
    for v in vals.iter_mut() {
        if *v < -tol || *v > one + tol {
            return Err(Error::SpectrumOutOfRange { value: v.to_f64() });
        }
        *v = v.max_of(T::zero()).min_of(one);
    }
    Ok(vals)
}

fn check_hermitian<T: Real>(a: &CMatrix<T>, ctx: &PrecisionContext) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension("eigenproblem of a non-square matrix".into()));
    }
    let scale = a.norm_max().max_of(T::one());
    let defect = a.hermitian_defect();
    if defect > ctx.tolerance::<T>() * scale {
        return Err(Error::NotHermitian((defect / scale).to_f64()));
    }
    Ok(())
}

fn to_real<T: Real>(a: &CMatrix<T>) -> RMatrix<T> {
    let n = a.rows();
    // symmetrise so tiny asymmetries within tolerance cannot leak in
    let mut r = RMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            *r.at_mut(i, j) = (a[(i, j)].re + a[(j, i)].re) * T::half();
        }
    }
    r
}

fn unit_roundoff<T: Real>() -> T {
    T::one().mul_pow2(-(T::MANTISSA_BITS as i32) + 2)
}

/// Real symmetric eigenproblem: values ascending, optional vectors as columns.
pub fn eigh_real<T: Real>(a: &RMatrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<RMatrix<T>>)> {
    let n = a.n;
    if n == 0 {
        return Ok((vec![], want_vectors.then(|| RMatrix::zeros(0))));
    }
    // 1-based working arrays keep the recurrences readable.
    let w = n + 1;
    let mut z = vec![T::zero(); w * w];
    for i in 0..n {
        for j in 0..n {
            z[(i + 1) * w + j + 1] = a.at(i, j);
        }
    }
    let mut d = vec![T::zero(); w];
    let mut e = vec![T::zero(); w];
    tridiagonalize(&mut z, &mut d, &mut e, n, want_vectors);
    ql_implicit(&mut d, &mut e, &mut z, n, want_vectors)?;

    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut v = RMatrix::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                *v.at_mut(row, col) = z[(row + 1) * w + src];
            }
        }
        v
    });
    Ok((values, vectors))
}

/// Householder reduction to tridiagonal form (`d` diagonal, `e` sub-diagonal
/// in `e[2..=n]`); with `vectors` the orthogonal transform replaces `a`.
fn tridiagonalize<T: Real>(a: &mut [T], d: &mut [T], e: &mut [T], n: usize, vectors: bool) {
    let w = n + 1;
    let ix = |i: usize, j: usize| i * w + j;
    for i in (2..=n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 1 {
            let mut scale = T::zero();
            for k in 1..=l {
                scale += a[ix(i, k)].abs();
            }
            if scale.is_zero() {
                e[i] = a[ix(i, l)];
            } else {
                let inv = T::one() / scale;
                for k in 1..=l {
                    a[ix(i, k)] *= inv;
                    h += a[ix(i, k)] * a[ix(i, k)];
                }
                let mut f = a[ix(i, l)];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[ix(i, l)] = f - g;
                f = T::zero();
                let hinv = T::one() / h;
                for j in 1..=l {
                    if vectors {
                        a[ix(j, i)] = a[ix(i, j)] * hinv;
                    }
                    let mut g = T::zero();
                    for k in 1..=j {
                        g += a[ix(j, k)] * a[ix(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[ix(k, j)] * a[ix(i, k)];
                    }
                    e[j] = g * hinv;
                    f += e[j] * a[ix(i, j)];
                }
                let hh = f / (h + h);
                for j in 1..=l {
                    let f = a[ix(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 1..=j {
                        let upd = f * e[k] + g * a[ix(i, k)];
                        a[ix(j, k)] -= upd;
                    }
                }
            }
        } else {
            e[i] = a[ix(i, l)];
        }
        d[i] = h;
    }
    d[1] = T::zero();
    e[1] = T::zero();
    for i in 1..=n {
        if vectors {
            let l = i - 1;
            if !d[i].is_zero() {
                for j in 1..=l {
                    let mut g = T::zero();
                    for k in 1..=l {
                        g += a[ix(i, k)] * a[ix(k, j)];
                    }
                    for k in 1..=l {
                        let upd = g * a[ix(k, i)];
                        a[ix(k, j)] -= upd;
                    }
                }
            }
            d[i] = a[ix(i, i)];
            a[ix(i, i)] = T::one();
            for j in 1..=l {
                a[ix(j, i)] = T::zero();
                a[ix(i, j)] = T::zero();
            }
        } else {
            d[i] = a[ix(i, i)];
        }
    }
}

/// Implicit QL on the tridiagonal `(d, e)`, accumulating rotations into `z`.
fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T], z: &mut [T], n: usize, vectors: bool) -> Result<()> {
    let w = n + 1;
    let eps = unit_roundoff::<T>();
    for i in 2..=n {
        e[i - 1] = e[i];
    }
    e[n] = T::zero();
    let two = T::from_i64(2);
    for l in 1..=n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence(iter));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = (g * g + T::one()).sqrt();
            let signed_r = if g >= T::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m - 1;
            let mut early_exit = false;
            loop {
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r.is_zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    early_exit = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if vectors {
                    for k in 1..=n {
                        let f = z[k * w + i + 1];
                        let zi = z[k * w + i];
                        z[k * w + i + 1] = s * zi + c * f;
                        z[k * w + i] = c * zi - s * f;
                    }
                }
                if i == l {
                    break;
                }
                i -= 1;
            }
            if early_exit {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Cyclic Jacobi for complex Hermitian matrices.
fn jacobi<T: Real>(a0: &CMatrix<T>) -> Result<Eigh<T>> {
    let n = a0.rows();
    let mut a = a0.clone();
    for i in 0..n {
        a[(i, i)].im = T::zero();
    }
    let mut v = CMatrix::<T>::identity(n);
    let eps = unit_roundoff::<T>();
    let scale = a.norm_fro().max_of(T::one());
    for sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                let z = a[(i, j)];
                off += z.re * z.re + z.im * z.im;
            }
        }
        if off.sqrt() <= eps * scale {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
            let values = order.iter().map(|&i| a[(i, i)].re).collect();
            let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
            return Ok(Eigh { values, vectors });
        }
        let _ = sweep;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = cabs(&apq);
                if mag.is_zero() {
                    continue;
                }
                let phase = Cx::new(apq.re / mag, apq.im / mag);
                let theta = (a[(q, q)].re - a[(p, p)].re) / (mag + mag);
                let t = {
                    let r = (theta * theta + T::one()).sqrt();
                    if theta >= T::zero() {
                        T::one() / (theta + r)
                    } else {
                        -T::one() / (-theta + r)
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // V = diag(1, conj(phase)) · [[c, s], [-s, c]] on (p, q)
                let vpp = Cx::new(c, T::zero());
                let vpq = Cx::new(s, T::zero());
                let vqp = phase.conj() * Cx::new(-s, T::zero());
                let vqq = phase.conj() * Cx::new(c, T::zero());
                for k in 0..n {
                    let x = a[(k, p)];
                    let y = a[(k, q)];
                    a[(k, p)] = x * vpp + y * vqp;
                    a[(k, q)] = x * vpq + y * vqq;
                }
                for k in 0..n {
                    let x = a[(p, k)];
                    let y = a[(q, k)];
                    a[(p, k)] = vpp.conj() * x + vqp.conj() * y;
                    a[(q, k)] = vpq.conj() * x + vqq.conj() * y;
                }
                a[(p, q)] = czero();
                a[(q, p)] = czero();
                a[(p, p)].im = T::zero();
                a[(q, q)].im = T::zero();
                for k in 0..n {
                    let x = v[(k, p)];
                    let y = v[(k, q)];
                    v[(k, p)] = x * vpp + y * vqp;
                    v[(k, q)] = x * vpq + y * vqq;
                }
            }
        }
    }
    Err(Error::NoConvergence(MAX_JACOBI_SWEEPS))
}
