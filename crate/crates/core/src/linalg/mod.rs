//! Dense complex linear algebra at the working precision.

mod eigh;
mod expm;
mod lu;
mod pfaffian;
mod qr;

pub use eigh::{eigh, eigh_real, eigvalsh, pair_spectrum, Eigh};
pub use expm::{mat_exp, mat_exp_pair};
pub use lu::{det, det_real, solve, Lu};
pub use pfaffian::pfaffian;
pub use qr::{cholesky_qr, thin_qr, thin_qr_r};

use crate::error::{Error, Result};
use crate::scalar::{cabs, czero, norm_sqr, Cx, Real};
use std::ops::{Index, IndexMut};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real matrix from `f64` rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| Cx::new(T::from_f64(rows[i][j]), T::zero()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Cx<T>] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Cx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Cx<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = T::cgemm(&self.data, &other.data, self.rows, self.cols, other.cols);
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// `self * other`, panicking on shape mismatch.
    pub fn mul(&self, other: &Self) -> Self {
        self.matmul(other).expect("shape mismatch")
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Cx<T>) -> Cx<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|z| Cx::new(z.re * s, z.im * s))
    }

    fn check_same_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_shape(other);
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same_shape(other);
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect(),
        }
    }

    /// Adds `s` to every diagonal entry.
    pub fn add_diagonal(&mut self, s: Cx<T>) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += s;
        }
    }

    pub fn trace(&self) -> Cx<T> {
        let mut t = czero();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    pub fn norm_fro(&self) -> T {
        let mut s = T::zero();
        for z in &self.data {
            s += norm_sqr(z);
        }
        s.sqrt()
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> T {
        let mut m = T::zero();
        for z in &self.data {
            m = m.max_of(cabs(z));
        }
        m
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        let mut best = T::zero();
        for j in 0..self.cols {
            let mut s = T::zero();
            for i in 0..self.rows {
                s += cabs(&self[(i, j)]);
            }
            best = best.max_of(s);
        }
        best
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.check_same_shape(other);
        let mut m = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            m = m.max_of(cabs(&(*a - *b)));
        }
        m
    }

    /// `max |A - A^†|`.
    pub fn hermitian_defect(&self) -> T {
        assert!(self.is_square());
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                m = m.max_of(cabs(&(self[(i, j)] - self[(j, i)].conj())));
            }
        }
        m
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im.is_zero())
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.to_f64().is_finite() && z.im.to_f64().is_finite())
    }

    /// Rows `r` and columns `c` picked out by index lists.
    pub fn select(&self, r: &[usize], c: &[usize]) -> Self {
        Self::from_fn(r.len(), c.len(), |i, j| self[(r[i], c[j])])
    }

    /// Contiguous block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Stacks `top` above `bottom`.
    pub fn vstack(top: &Self, bottom: &Self) -> Self {
        assert_eq!(top.cols, bottom.cols);
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        Self {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            data,
        }
    }

    /// Same entries in another scalar type, rounded to nearest.
    pub fn convert<U: Real>(&self) -> CMatrix<U> {
        self.convert_with(|x| U::from_f64(x.to_f64()))
    }

    pub fn convert_with<U: Real>(&self, f: impl Fn(T) -> U) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Cx::new(f(z.re), f(z.im))).collect(),
        }
    }

    pub fn to_f64(&self) -> CMatrix<f64> {
        self.convert_with(|x| x.to_f64())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut s = czero();
                for (a, x) in self.row(i).iter().zip(v) {
                    s += *a * *x;
                }
                s
            })
            .collect()
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Cx<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Row-major dense real matrix used by the real-symmetric kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> RMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}
