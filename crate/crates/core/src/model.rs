//! Lattice, initial BCS state parameters and the Hatano-Nelson generator.
//!
//! Conventions. Sites are `0..L`. The initial Hamiltonian is
//! `H = Σ A_ij c_i† c_j + ½ Σ (B_ij c_i† c_j† + h.c.) - μ Σ n_j` with
//! nearest-neighbour `A = -J`, `B_{j,j+1} = -Δ = -B_{j+1,j}`; a wrapping bond
//! carries an extra sign `s` (`+1` periodic, `-1` antiperiodic). The BdG
//! matrix in the Nambu basis `Ψ = (c, c†)` is `[[A - μ, B], [B†, -(A - μ)ᵀ]]`
//! so that `H = ½ Ψ† H_bdg Ψ + ½ tr(A - μ)`.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Cx, Real};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
    Antiperiodic,
}

impl Boundary {
    /// Sign carried by the wrapping bond, if there is one.
    pub fn wrap_sign(self) -> Option<i64> {
        match self {
            Boundary::Open => None,
            Boundary::Periodic => Some(1),
            Boundary::Antiperiodic => Some(-1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sites: usize,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(sites: usize, boundary: Boundary) -> Result<Self> {
        let min = if boundary == Boundary::Open { 2 } else { 3 };
        if sites < min {
            return Err(Error::InvalidParameter(format!(
                "{boundary:?} chain needs at least {min} sites, got {sites}"
            )));
        }
        Ok(Self { sites, boundary })
    }

    /// Nearest-neighbour bonds `(i, j, sign)` with `j` to the right of `i`.
    pub fn bonds(&self) -> Vec<(usize, usize, i64)> {
        let l = self.sites;
        let mut b: Vec<_> = (0..l - 1).map(|j| (j, j + 1, 1)).collect();
        if let Some(s) = self.boundary.wrap_sign() {
            b.push((l - 1, 0, s));
        }
        b
    }
}

/// Spin texture the initial cat state is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialPattern {
    /// Uniformly tilted spins.
    Ferromagnetic,
    /// Tilted spins on one sublattice, flipped on the other (odd sites).
    Antiferromagnetic,
}

/// Parameters of the initial state, on the disorder line `μ = 2√(J² - Δ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialParams {
    pub hopping: f64,
    pub pairing: f64,
    pub chemical: f64,
    /// Tilt angle the couplings derive from, when known.
    pub theta: Option<f64>,
    pub pattern: InitialPattern,
}

impl InitialParams {
    pub fn from_theta(theta: f64, hopping: f64, pattern: InitialPattern) -> Result<Self> {
        if !theta.is_finite() || !hopping.is_finite() || hopping <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "theta = {theta}, J = {hopping}"
            )));
        }
        let (pairing, chemical) = theta_to_params(theta, hopping);
        Ok(Self {
            hopping,
            pairing,
            chemical,
            theta: Some(theta),
            pattern,
        })
    }

    /// Explicit couplings; `μ` must sit on the disorder line within `tol`.
    pub fn new(hopping: f64, pairing: f64, chemical: f64, pattern: InitialPattern, tol: f64) -> Result<Self> {
        if !(hopping > 0.0 && pairing.abs() <= hopping && chemical.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need J > 0 and |Δ| ≤ J, got J = {hopping}, Δ = {pairing}"
            )));
        }
        let expected = 2.0 * (hopping * hopping - pairing * pairing).sqrt();
        if (chemical - expected).abs() > tol.max(f64::EPSILON * 8.0) {
            return Err(Error::InvalidParameter(format!(
                "μ = {chemical} is off the disorder line (expected {expected})"
            )));
        }
        Ok(Self {
            hopping,
            pairing,
            chemical,
            theta: None,
            pattern,
        })
    }

    /// `(J, Δ, μ)` at precision `T`, derived from the tilt angle when present.
    pub fn couplings<T: Real>(&self) -> (T, T, T) {
        let j = T::from_f64(self.hopping);
        match self.theta {
            Some(theta) => {
                let (d, m) = theta_to_params_t(T::from_f64(theta), j);
                (j, d, m)
            }
            None => (j, T::from_f64(self.pairing), T::from_f64(self.chemical)),
        }
    }
}

/// `(Δ, μ)` for tilt `θ`: `Δ = J (1 - cos²θ)/(1 + cos²θ)`, `μ = 2√(J² - Δ²)`.
pub fn theta_to_params(theta: f64, hopping: f64) -> (f64, f64) {
    let (d, m) = theta_to_params_t(theta, hopping);
    (d, m)
}

pub fn theta_to_params_t<T: Real>(theta: T, hopping: T) -> (T, T) {
    let c = theta.sin_cos().1;
    let c2 = c * c;
    let delta = hopping * (T::one() - c2) / (T::one() + c2);
    let four = T::from_i64(4);
    let mu = (four * (hopping * hopping - delta * delta)).max_of(T::zero()).sqrt();
    (delta, mu)
}

/// Parameters of the Hatano-Nelson evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub hopping: f64,
    pub gamma: f64,
    pub boundary: Boundary,
}

impl EvolutionParams {
    pub fn new(hopping: f64, gamma: f64, boundary: Boundary) -> Result<Self> {
        if !(hopping > 0.0 && hopping.is_finite() && gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need J > 0 and γ ≥ 0, got J = {hopping}, γ = {gamma}"
            )));
        }
        Ok(Self {
            hopping,
            gamma,
            boundary,
        })
    }
}

/// One-body pieces of the initial Hamiltonian.
#[derive(Debug, Clone)]
pub struct InitialCouplings<T> {
    /// Hopping matrix without the chemical potential.
    pub hopping: CMatrix<T>,
    /// Antisymmetric pairing matrix.
    pub pairing: CMatrix<T>,
    pub chemical: Vec<T>,
}

pub fn initial_couplings<T: Real>(p: &InitialParams, lat: &LatticeSpec) -> InitialCouplings<T> {
    let l = lat.sites;
    let (j, d, mu) = p.couplings::<T>();
    let mut a = CMatrix::<T>::zeros(l, l);
    let mut b = CMatrix::<T>::zeros(l, l);
    for (x, y, s) in lat.bonds() {
        let s = T::from_i64(s);
        a[(x, y)] += Cx::new(-s * j, T::zero());
        a[(y, x)] += Cx::new(-s * j, T::zero());
        b[(x, y)] += Cx::new(-s * d, T::zero());
        b[(y, x)] += Cx::new(s * d, T::zero());
    }
    InitialCouplings {
        hopping: a,
        pairing: b,
        chemical: vec![mu; l],
    }
}

/// Real-symmetric `2L × 2L` BdG matrix of the initial Hamiltonian.
///
/// For the antiferromagnetic pattern the matrix is conjugated by the
/// Nambu transformation of [`sublattice_flip`], whose ground state is the
/// flipped cat state.
pub fn initial_bdg_matrix<T: Real>(p: &InitialParams, lat: &LatticeSpec) -> CMatrix<T> {
    let c = initial_couplings::<T>(p, lat);
    let l = lat.sites;
    let mut a = c.hopping.clone();
    for (i, mu) in c.chemical.iter().enumerate() {
        a[(i, i)].re -= *mu;
    }
    let mut h = CMatrix::<T>::zeros(2 * l, 2 * l);
    h.set_block(0, 0, &a);
    h.set_block(0, l, &c.pairing);
    h.set_block(l, 0, &c.pairing.adjoint());
    h.set_block(l, l, &a.transpose().scale_real(-T::one()));
    match p.pattern {
        InitialPattern::Ferromagnetic => h,
        InitialPattern::Antiferromagnetic => {
            let t = sublattice_flip::<T>(l);
            t.transpose().mul(&h).mul(&t)
        }
    }
}

/// Constant `½ tr(A - μ)` completing `H = ½ Ψ† H_bdg Ψ + const`.
pub fn bdg_constant<T: Real>(p: &InitialParams, lat: &LatticeSpec) -> T {
    let c = initial_couplings::<T>(p, lat);
    let mut s = T::zero();
    for (i, mu) in c.chemical.iter().enumerate() {
        s += c.hopping[(i, i)].re - *mu;
    }
    s * T::half()
}

/// Real `2L × 2L` matrix `M` with `U Ψ U† = M Ψ` for `U = Π_{j odd} σˣ_j`
/// written in fermions: odd sites swap `c ↔ c†`, and every mode picks up the
/// Jordan-Wigner sign `(-1)^{#odd sites to its left}`.
pub fn sublattice_flip<T: Real>(l: usize) -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros(2 * l, 2 * l);
    let mut flipped_left = 0;
    for site in 0..l {
        let sign = if flipped_left % 2 == 0 { T::one() } else { -T::one() };
        let v = Cx::new(sign, T::zero());
        if site % 2 == 1 {
            m[(site, l + site)] = v;
            m[(l + site, site)] = v;
            flipped_left += 1;
        } else {
            m[(site, site)] = v;
            m[(l + site, l + site)] = v;
        }
    }
    m
}

/// `L × L` Hatano-Nelson single-particle matrix: `h[j, j+1] = -(J + γ)`,
/// `h[j+1, j] = -(J - γ)`, with the wrapping bond scaled by its sign.
pub fn hn_matrix<T: Real>(p: &EvolutionParams, sites: usize) -> Result<CMatrix<T>> {
    let lat = LatticeSpec::new(sites, p.boundary)?;
    let j = T::from_f64(p.hopping);
    let g = T::from_f64(p.gamma);
    let mut h = CMatrix::<T>::zeros(sites, sites);
    for (x, y, s) in lat.bonds() {
        let s = T::from_i64(s);
        h[(x, y)] += Cx::new(-s * (j + g), T::zero());
        h[(y, x)] += Cx::new(-s * (j - g), T::zero());
    }
    Ok(h)
}

/// Periodic-chain band `E(k) = -2J cos k - 2iγ sin k`.
pub fn dispersion(k: f64, hopping: f64, gamma: f64) -> (f64, f64) {
    (-2.0 * hopping * k.cos(), -2.0 * gamma * k.sin())
}

/// Group velocity `∂Re E/∂k = 2J sin k`.
pub fn dispersion_velocity(k: f64, hopping: f64) -> f64 {
    2.0 * hopping * k.sin()
}

/// Largest single-particle group velocity, `2J`.
pub fn max_group_velocity(hopping: f64) -> f64 {
    2.0 * hopping
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MpFloat;
    use std::f64::consts::PI;

    #[test]
    fn disorder_line_parameters() {
        let (d, m) = theta_to_params(PI / 3.0, 1.0);
        assert!((d - 0.6).abs() < 1e-15 && (m - 1.6).abs() < 1e-15);
        let (d, m) = theta_to_params(0.0, 1.0);
        assert!(d.abs() < 1e-16 && (m - 2.0).abs() < 1e-15);
        let (d, m) = theta_to_params(PI / 2.0, 1.0);
        assert!((d - 1.0).abs() < 1e-15 && m < 1e-7);
        // exact at high precision too
        type T = MpFloat<4>;
        let third = T::pi() / T::from_i64(3);
        let (d, m) = theta_to_params_t(third, T::one());
        assert!((d - T::from_f64(0.6)).abs().to_f64() < 1e-15);
        assert!((d * T::from_i64(5) - T::from_i64(3)).abs().to_f64() < 1e-70);
        assert!((m * T::from_i64(5) - T::from_i64(8)).abs().to_f64() < 1e-70);
    }

    #[test]
    fn validation() {
        assert!(LatticeSpec::new(1, Boundary::Open).is_err());
        assert!(LatticeSpec::new(2, Boundary::Periodic).is_err());
        assert!(EvolutionParams::new(1.0, -0.1, Boundary::Open).is_err());
        assert!(EvolutionParams::new(0.0, 0.1, Boundary::Open).is_err());
        assert!(InitialParams::new(1.0, 0.6, 1.6, InitialPattern::Ferromagnetic, 1e-12).is_ok());
        assert!(InitialParams::new(1.0, 0.6, 1.5, InitialPattern::Ferromagnetic, 1e-12).is_err());
        assert!(InitialParams::from_theta(f64::NAN, 1.0, InitialPattern::Ferromagnetic).is_err());
    }

    #[test]
    fn hn_matrix_is_transpose_asymmetric() {
        let p = EvolutionParams::new(1.0, 0.3, Boundary::Open).unwrap();
        let h = hn_matrix::<f64>(&p, 4).unwrap();
        assert_eq!(h[(0, 1)].re, -1.3);
        assert_eq!(h[(1, 0)].re, -0.7);
        assert_eq!(h[(0, 3)].re, 0.0);
        let p = EvolutionParams::new(1.0, 0.3, Boundary::Antiperiodic).unwrap();
        let h = hn_matrix::<f64>(&p, 4).unwrap();
        assert_eq!(h[(3, 0)].re, 1.3);
        assert_eq!(h[(0, 3)].re, 0.7);
    }

    #[test]
    fn periodic_spectrum_matches_dispersion() {
        // circulant eigenvalues are E(2πm/L)
        let p = EvolutionParams::new(1.0, 0.4, Boundary::Periodic).unwrap();
        let l = 6;
        let h = hn_matrix::<f64>(&p, l).unwrap();
        for m in 0..l {
            let k = 2.0 * PI * m as f64 / l as f64;
            let v: Vec<Cx<f64>> = (0..l).map(|j| Cx::from_polar(1.0, k * j as f64)).collect();
            let hv = h.apply(&v);
            let (re, im) = dispersion(k, 1.0, 0.4);
            for j in 0..l {
                assert!((hv[j] - v[j] * Cx::new(re, im)).norm() < 1e-13);
            }
        }
        assert!((dispersion_velocity(PI / 2.0, 1.0) - max_group_velocity(1.0)).abs() < 1e-15);
    }

    #[test]
    fn bdg_matrix_structure() {
        let lat = LatticeSpec::new(6, Boundary::Antiperiodic).unwrap();
        for pattern in [InitialPattern::Ferromagnetic, InitialPattern::Antiferromagnetic] {
            let p = InitialParams::from_theta(PI / 3.0, 1.0, pattern).unwrap();
            let h = initial_bdg_matrix::<f64>(&p, &lat);
            assert!(h.is_real());
            assert!(h.hermitian_defect() < 1e-15);
            // particle-hole symmetry: Σx H* Σx = -H
            let l = 6;
            let sx = CMatrix::from_fn(2 * l, 2 * l, |i, j| {
                if (i + l) % (2 * l) == j {
                    Cx::new(1.0, 0.0)
                } else {
                    Cx::new(0.0, 0.0)
                }
            });
            let ph = sx.mul(&h.conj()).mul(&sx);
            assert!(ph.add(&h).norm_max() < 1e-15);
        }
        let p = InitialParams::from_theta(PI / 3.0, 1.0, InitialPattern::Ferromagnetic).unwrap();
        let h = initial_bdg_matrix::<f64>(&p, &lat);
        assert!((h[(0, 0)].re + 1.6).abs() < 1e-15);
        assert!((h[(0, 7)].re + 0.6).abs() < 1e-15);
        assert!((h[(5, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sublattice_flip_is_orthogonal_involution_up_to_sign() {
        let t = sublattice_flip::<f64>(5);
        assert!(t.transpose().mul(&t).max_abs_diff(&CMatrix::identity(10)) < 1e-15);
    }
}
