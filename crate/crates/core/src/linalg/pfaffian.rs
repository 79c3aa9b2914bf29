use super::CMatrix;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::scalar::{cabs, cone, czero, Cx, Real};

/// Pfaffian by Parlett-Reid tridiagonalisation with column pivoting.
///
/// Antisymmetry is checked up to `tolerance · max(1, max|A|)`.
pub fn pfaffian<T: Real>(a: &CMatrix<T>, ctx: &PrecisionContext) -> Result<Cx<T>> {
    if !a.is_square() {
        return Err(Error::Dimension("Pfaffian of a non-square matrix".into()));
    }
    let n = a.rows();
    let scale = a.norm_max().max_of(T::one());
    let mut defect = T::zero();
    for i in 0..n {
        for j in i..n {
            defect = defect.max_of(cabs(&(a[(i, j)] + a[(j, i)])));
        }
    }
    if defect > ctx.tolerance::<T>() * scale {
        return Err(Error::NotAntisymmetric((defect / scale).to_f64()));
    }
    if n % 2 == 1 {
        return Ok(czero());
    }

    let mut m = a.clone();
    let mut pf = cone::<T>();
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut kp = k + 1;
        let mut best = cabs(&m[(k + 1, k)]);
        for i in k + 2..n {
            let v = cabs(&m[(i, k)]);
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                let t = m[(k + 1, j)];
                m[(k + 1, j)] = m[(kp, j)];
                m[(kp, j)] = t;
            }
            for i in 0..n {
                let t = m[(i, k + 1)];
                m[(i, k + 1)] = m[(i, kp)];
                m[(i, kp)] = t;
            }
            pf = -pf;
        }
        if best.is_zero() {
            return Ok(czero());
        }
        let piv = m[(k, k + 1)];
        pf *= piv;
        if k + 2 < n {
            let inv = cone::<T>() / piv;
            let tau: Vec<Cx<T>> = (k + 2..n).map(|j| m[(k, j)] * inv).collect();
            let col: Vec<Cx<T>> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    let upd = tau[ii] * col[jj] - col[ii] * tau[jj];
                    m[(i, j)] += upd;
                }
            }
        }
    }
    Ok(pf)
}
