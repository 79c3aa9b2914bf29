//! Fermionic Gaussian states in Bogoliubov form.
//!
//! A state is stored as a `2L × L` matrix `W` with orthonormal columns. The
//! state is annihilated by `Σ_a W_ak Ψ_a†` for every column `k`, so
//! `G_ab = ⟨Ψ_a† Ψ_b⟩ = (W̄ Wᵀ)_ab` with `Ψ = (c_0..c_{L-1}, c_0†..c_{L-1}†)`.
//!
//! Under `H = Σ h_ij c_i† c_j`, even non-Hermitian, those annihilators evolve
//! as `W → exp(-i M t) W` with `M = diag(h, -hᵀ)`. Normalisation of the ket
//! only rescales the span, so an orthonormalisation after each step keeps the
//! representation exact and well conditioned.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_qr, eigh, mat_exp_pair, thin_qr, CMatrix};
use crate::precision::PrecisionContext;
use crate::scalar::{Cx, Real};
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct BogoliubovState<T> {
    /// `2L × L`, orthonormal columns.
    pub w: CMatrix<T>,
    /// Steps taken since the initial state.
    pub step: u64,
    /// Step length the state was propagated with.
    pub dt: f64,
}

impl<T: Real> BogoliubovState<T> {
    pub fn new(w: CMatrix<T>) -> Result<Self> {
        if w.rows() != 2 * w.cols() {
            return Err(Error::Dimension(format!(
                "Bogoliubov matrix must be 2L x L, got {}x{}",
                w.rows(),
                w.cols()
            )));
        }
        Ok(Self { w, step: 0, dt: 0.0 })
    }

    pub fn sites(&self) -> usize {
        self.w.cols()
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    /// `max |W†W - I|`; zero iff `G` is an exact projector.
    pub fn purity_defect(&self) -> T {
        let gram = self.w.adjoint().mul(&self.w);
        gram.max_abs_diff(&CMatrix::identity(self.sites()))
    }
}

/// `C_ij = ⟨c_i† c_j⟩` and `F_ij = ⟨c_i c_j⟩`.
#[derive(Debug, Clone)]
pub struct NambuCorrelations<T> {
    pub c: CMatrix<T>,
    pub f: CMatrix<T>,
}

impl<T: Real> NambuCorrelations<T> {
    pub fn sites(&self) -> usize {
        self.c.rows()
    }

    /// Full `2L × 2L` matrix `[[C, F†], [F, I - Cᵀ]]`.
    pub fn nambu(&self) -> CMatrix<T> {
        self.block_over(&(0..self.sites()).collect::<Vec<_>>())
    }

    /// Restriction of the Nambu matrix to `sites`: rows and columns
    /// `{i} ∪ {L + i}`, ordered as `(c_A, c_A†)`.
    pub fn block_over(&self, sites: &[usize]) -> CMatrix<T> {
        let l = sites.len();
        let mut g = CMatrix::<T>::zeros(2 * l, 2 * l);
        for (a, &i) in sites.iter().enumerate() {
            for (b, &j) in sites.iter().enumerate() {
                g[(a, b)] = self.c[(i, j)];
                g[(a, l + b)] = self.f[(j, i)].conj();
                g[(l + a, b)] = self.f[(i, j)];
                let mut v = -self.c[(j, i)];
                if i == j {
                    v.re += T::one();
                }
                g[(l + a, l + b)] = v;
            }
        }
        g
    }

    /// `max |F + Fᵀ|`. Exact states have antisymmetric `F`; under gain and
    /// loss rounding error is amplified and shows up here first, so this
    /// serves as a running estimate of how many digits remain trustworthy.
    pub fn isotropy_defect(&self) -> T {
        let f = &self.f;
        let mut worst = T::zero();
        for i in 0..self.sites() {
            for j in 0..=i {
                let s = f[(i, j)] + f[(j, i)];
                worst = worst.max_of(s.re.abs().max_of(s.im.abs()));
            }
        }
        worst
    }

    /// Projects onto exact Nambu structure: Hermitian `C`, antisymmetric `F`.
    pub fn symmetrize(&mut self) {
        let half = T::from_f64(0.5);
        for i in 0..self.sites() {
            for j in 0..=i {
                let c = self.c[(i, j)] + self.c[(j, i)].conj();
                let c = Cx::new(c.re * half, c.im * half);
                self.c[(i, j)] = c;
                self.c[(j, i)] = c.conj();
                let f = self.f[(i, j)] - self.f[(j, i)];
                let f = Cx::new(f.re * half, f.im * half);
                self.f[(i, j)] = f;
                self.f[(j, i)] = -f;
            }
        }
    }

    pub fn density(&self) -> Vec<T> {
        (0..self.sites()).map(|j| self.c[(j, j)].re).collect()
    }

    pub fn total_number(&self) -> T {
        let mut s = T::zero();
        for v in self.density() {
            s += v;
        }
        s
    }

    pub fn to_f64(&self) -> NambuCorrelations<f64> {
        NambuCorrelations {
            c: self.c.to_f64(),
            f: self.f.to_f64(),
        }
    }
}

/// Ground state of a BdG matrix, with its energy.
///
/// Exact zero modes are resolved by shifting the particle block up and the
/// hole block down by the tolerance, which empties the zero-energy particle
/// states; the count of negative modes must then equal `L`.
pub fn ground_state<T: Real>(h_bdg: &CMatrix<T>, ctx: &PrecisionContext) -> Result<(BogoliubovState<T>, T)> {
    if !h_bdg.is_square() || h_bdg.rows() % 2 != 0 {
        return Err(Error::Dimension("BdG matrix must be 2L x 2L".into()));
    }
    let l = h_bdg.rows() / 2;
    let tol = ctx.tolerance::<T>();
    let scale = h_bdg.norm_max().max_of(T::one());
    let mut e = eigh(h_bdg, ctx)?;
    if e.values.iter().any(|v| v.abs() <= tol * scale) {
        let mut shifted = h_bdg.clone();
        let eps = tol * scale;
        for i in 0..l {
            shifted[(i, i)].re += eps;
            shifted[(l + i, l + i)].re -= eps;
        }
        e = eigh(&shifted, ctx)?;
    }
    let occupied: Vec<usize> = (0..2 * l).filter(|&k| e.values[k] < T::zero()).collect();
    if occupied.len() != l {
        return Err(Error::GroundState(format!(
            "{} negative modes for {l} sites",
            occupied.len()
        )));
    }
    let mut energy = T::zero();
    for &k in &occupied {
        energy += e.values[k];
    }
    let w = e.vectors.select(&(0..2 * l).collect::<Vec<_>>(), &occupied);
    Ok((BogoliubovState::new(w)?, energy * T::half()))
}

/// Exact one-step propagator of the annihilator span, `exp(-i M dt)`.
#[derive(Debug, Clone)]
pub struct Propagator<T> {
    /// `exp(-i h dt)`, acting on the particle rows.
    pub upper: CMatrix<T>,
    /// `exp(i hᵀ dt)`, acting on the hole rows.
    pub lower: CMatrix<T>,
    pub dt: f64,
}

pub fn make_propagator<T: Real>(h: &CMatrix<T>, dt: f64, ctx: &PrecisionContext) -> Result<Propagator<T>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step {dt}")));
    }
    let s = Cx::new(T::zero(), -T::from_f64(dt));
    let (forward, backward) = mat_exp_pair(h, s, ctx)?;
    Ok(Propagator {
        upper: forward,
        lower: backward.transpose(),
        dt,
    })
}

/// Propagators keyed by the generator entries and the step.
#[derive(Debug, Default)]
pub struct PropagatorCache<T> {
    entries: HashMap<Vec<u64>, Arc<Propagator<T>>>,
}

impl<T: Real> PropagatorCache<T> {
    pub fn new() -> Self {
        Self {
            entries: HashMap::new(),
        }
    }

    pub fn get_or_make(&mut self, h: &CMatrix<T>, dt: f64, ctx: &PrecisionContext) -> Result<Arc<Propagator<T>>> {
        let mut key = vec![dt.to_bits(), ctx.digits() as u64, h.rows() as u64];
        for z in h.as_slice() {
            key.push(z.re.to_f64().to_bits());
            key.push(z.im.to_f64().to_bits());
        }
        if let Some(p) = self.entries.get(&key) {
            return Ok(Arc::clone(p));
        }
        let p = Arc::new(make_propagator(h, dt, ctx)?);
        self.entries.insert(key, Arc::clone(&p));
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Applies the propagator without orthonormalising.
pub fn apply_propagator<T: Real>(w: &CMatrix<T>, k: &Propagator<T>) -> CMatrix<T> {
    let l = w.cols();
    let top = k.upper.mul(&w.block(0, 0, l, l));
    let bottom = k.lower.mul(&w.block(l, 0, l, l));
    CMatrix::vstack(&top, &bottom)
}

/// Advances `n_steps` steps, orthonormalising every `renorm_every` steps and
/// always after the last one.
pub fn evolve<T: Real>(
    state: &BogoliubovState<T>,
    k: &Propagator<T>,
    n_steps: u64,
    renorm_every: u64,
    ctx: &PrecisionContext,
) -> Result<BogoliubovState<T>> {
    if renorm_every == 0 {
        return Err(Error::InvalidParameter("renormalisation interval 0".into()));
    }
    if state.step > 0 && state.dt != k.dt {
        return Err(Error::InvalidParameter(format!(
            "state advanced with dt = {} cannot continue with dt = {}",
            state.dt, k.dt
        )));
    }
    let mut w = state.w.clone();
    for s in 1..=n_steps {
        w = apply_propagator(&w, k);
        if s % renorm_every == 0 || s == n_steps {
            let time = (state.step + s) as f64 * k.dt;
            w = orthonormalize(&w, ctx).map_err(|e| Error::Collapse {
                time,
                reason: e.to_string(),
            })?;
        }
    }
    Ok(BogoliubovState {
        w,
        step: state.step + n_steps,
        dt: k.dt,
    })
}

/// Cholesky QR when the columns are well conditioned, Gram-Schmidt otherwise.
pub fn orthonormalize<T: Real>(w: &CMatrix<T>, ctx: &PrecisionContext) -> Result<CMatrix<T>> {
    cholesky_qr(w, ctx).or_else(|_| thin_qr(w, ctx))
}

/// `C` and `F` of a state, after confirming `G² = G` to tolerance.
pub fn correlations<T: Real>(state: &BogoliubovState<T>, ctx: &PrecisionContext) -> Result<NambuCorrelations<T>> {
    let defect = state.purity_defect();
    if defect > ctx.tolerance::<T>() {
        return Err(Error::Purity {
            defect: defect.to_f64(),
        });
    }
    Ok(correlations_unchecked(&state.w))
}

/// `C` and `F` from any `W` with orthonormal columns.
pub fn correlations_unchecked<T: Real>(w: &CMatrix<T>) -> NambuCorrelations<T> {
    let l = w.cols();
    let top = w.block(0, 0, l, l);
    let bottom = w.block(l, 0, l, l);
    let top_t = top.transpose();
    NambuCorrelations {
        c: top.conj().mul(&top_t),
        f: bottom.conj().mul(&top_t),
    }
}

/// Correlations of a non-orthonormal `X` spanning the annihilators:
/// `G = conj(X (X†X)⁻¹ X†)`.
pub fn correlations_from_span<T: Real>(x: &CMatrix<T>) -> Result<NambuCorrelations<T>> {
    let l = x.cols();
    let gram = x.adjoint().mul(x);
    let inv = crate::linalg::solve(&gram, &CMatrix::identity(l))?;
    let p = x.mul(&inv).mul(&x.adjoint());
    let g = p.conj();
    Ok(NambuCorrelations {
        c: g.block(0, 0, l, l),
        f: g.block(l, 0, l, l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use crate::MpFloat;
    use std::f64::consts::PI;

    #[test]
    fn free_fermion_ground_state_fills_negative_band() {
        // Δ = 0 limit (θ = 0): all sites filled because μ = 2 > band top
        let ctx = PrecisionContext::with_digits(32).unwrap();
        let lat = LatticeSpec::new(6, Boundary::Antiperiodic).unwrap();
        let p = InitialParams::from_theta(0.0, 1.0, InitialPattern::Ferromagnetic).unwrap();
        let h = initial_bdg_matrix::<MpFloat<3>>(&p, &lat);
        let (gs, _) = ground_state(&h, &ctx).unwrap();
        let g = correlations(&gs, &ctx).unwrap();
        for n in g.density() {
            assert!((n.to_f64() - 1.0).abs() < 1e-25);
        }
        assert!(g.f.norm_max().to_f64() < 1e-25);
    }

    #[test]
    fn energy_matches_bdg_trace_formula() {
        let ctx = PrecisionContext::with_digits(32).unwrap();
        let lat = LatticeSpec::new(8, Boundary::Antiperiodic).unwrap();
        let p = InitialParams::from_theta(PI / 3.0, 1.0, InitialPattern::Ferromagnetic).unwrap();
        type T = MpFloat<3>;
        let h = initial_bdg_matrix::<T>(&p, &lat);
        let (gs, e) = ground_state(&h, &ctx).unwrap();
        // ⟨½ Ψ† M Ψ⟩ = ½ Σ_ab M_ab G_ab must equal half the negative spectrum
        let g = correlations(&gs, &ctx).unwrap().nambu();
        let mut s = Cx::new(T::ZERO, T::ZERO);
        for a in 0..16 {
            for b in 0..16 {
                s += h[(a, b)] * g[(a, b)];
            }
        }
        let lhs = s.re * T::half();
        assert!((lhs - e).abs().to_f64() < 1e-25, "{lhs} {e}");
        assert!(s.im.abs().to_f64() < 1e-25);
    }

    #[test]
    fn unitary_evolution_conserves_number_and_purity() {
        let ctx = PrecisionContext::with_digits(32).unwrap();
        type T = MpFloat<3>;
        let lat = LatticeSpec::new(6, Boundary::Antiperiodic).unwrap();
        let p = InitialParams::from_theta(PI / 4.0, 1.0, InitialPattern::Ferromagnetic).unwrap();
        let (gs, _) = ground_state(&initial_bdg_matrix::<T>(&p, &lat), &ctx).unwrap();
        let n0 = correlations(&gs, &ctx).unwrap().total_number();
        let ev = EvolutionParams::new(1.0, 0.0, Boundary::Open).unwrap();
        let k = make_propagator(&hn_matrix::<T>(&ev, 6).unwrap(), 0.2, &ctx).unwrap();
        let s = evolve(&gs, &k, 10, 1, &ctx).unwrap();
        assert!((s.time() - 2.0).abs() < 1e-12);
        let g = correlations(&s, &ctx).unwrap();
        assert!((g.total_number() - n0).abs().to_f64() < 1e-25);
        // renormalising less often yields the same state
        let s2 = evolve(&gs, &k, 10, 5, &ctx).unwrap();
        let g2 = correlations(&s2, &ctx).unwrap();
        assert!(g.c.max_abs_diff(&g2.c).to_f64() < 1e-25);
        assert!(g.f.max_abs_diff(&g2.f).to_f64() < 1e-25);
    }

    #[test]
    fn propagator_cache_reuses_entries() {
        let ctx = PrecisionContext::double();
        let ev = EvolutionParams::new(1.0, 0.5, Boundary::Open).unwrap();
        let h = hn_matrix::<f64>(&ev, 4).unwrap();
        let mut cache = PropagatorCache::new();
        let a = cache.get_or_make(&h, 0.1, &ctx).unwrap();
        let b = cache.get_or_make(&h, 0.1, &ctx).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.get_or_make(&h, 0.2, &ctx).unwrap();
        assert_eq!(cache.len(), 2);
    }
}
