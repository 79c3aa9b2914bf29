use super::{CMatrix, RMatrix};
use crate::error::{Error, Result};
use crate::scalar::{cabs, cone, Cx, Real};

/// LU factorisation with partial pivoting, `P A = L U` packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    sign_flips: usize,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("LU of a non-square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut flips = 0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = cabs(&lu[(k, k)]);
            for i in k + 1..n {
                let v = cabs(&lu[(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best.is_zero() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                flips += 1;
            }
            let inv = cone::<T>() / lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] * inv;
                lu[(i, k)] = f;
                if f.re.is_zero() && f.im.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            sign_flips: flips,
            singular,
        })
    }

    pub fn det(&self) -> Cx<T> {
        if self.singular {
            return Cx::new(T::zero(), T::zero());
        }
        let mut d = cone::<T>();
        for i in 0..self.lu.rows() {
            d *= self.lu[(i, i)];
        }
        if self.sign_flips % 2 == 1 {
            -d
        } else {
            d
        }
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &CMatrix<T>) -> Result<CMatrix<T>> {
        if self.singular {
            return Err(Error::Singular);
        }
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::Dimension("right-hand side rows".into()));
        }
        let m = b.cols();
        let mut x = CMatrix::from_fn(n, m, |i, j| b[(self.perm[i], j)]);
        for k in 0..n {
            for i in k + 1..n {
                let f = self.lu[(i, k)];
                if f.re.is_zero() && f.im.is_zero() {
                    continue;
                }
                for j in 0..m {
                    let v = x[(k, j)];
                    x[(i, j)] -= f * v;
                }
            }
        }
        for k in (0..n).rev() {
            let inv = cone::<T>() / self.lu[(k, k)];
            for j in 0..m {
                x[(k, j)] *= inv;
            }
            for i in 0..k {
                let f = self.lu[(i, k)];
                for j in 0..m {
                    let v = x[(k, j)];
                    x[(i, j)] -= f * v;
                }
            }
        }
        Ok(x)
    }
}

pub fn det<T: Real>(a: &CMatrix<T>) -> Result<Cx<T>> {
    Ok(Lu::new(a)?.det())
}

pub fn solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    Lu::new(a)?.solve(b)
}

/// Determinant of a real matrix by Gaussian elimination with partial pivoting.
pub fn det_real<T: Real>(a: &RMatrix<T>) -> T {
    let n = a.n;
    let mut m = a.data.clone();
    let mut d = T::one();
    for k in 0..n {
        let mut p = k;
        let mut best = m[k * n + k].abs();
        for i in k + 1..n {
            let v = m[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best.is_zero() {
            return T::zero();
        }
        if p != k {
            for j in k..n {
                m.swap(k * n + j, p * n + j);
            }
            d = -d;
        }
        let piv = m[k * n + k];
        d *= piv;
        let inv = T::one() / piv;
        for i in k + 1..n {
            let f = m[i * n + k] * inv;
            if f.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let u = m[k * n + j];
                m[i * n + j] -= f * u;
            }
        }
    }
    d
}
