//! Exact many-body oracle in the full Fock space.
//!
//! Basis state `n` (bit `j` = occupation of site `j`) is
//! `(c_0†)^{n_0} (c_1†)^{n_1} ⋯ |0⟩`, so `c_j` acting on it picks up
//! `(-1)^{Σ_{k<j} n_k}`. With spin up read as an occupied site, spin product
//! states map onto this basis without extra signs.

use crate::error::{Error, Result};
use crate::gaussian::NambuCorrelations;
use crate::linalg::{eigh, eigvalsh, mat_exp, CMatrix};
use crate::model::{initial_couplings, InitialParams, InitialPattern, LatticeSpec};
use crate::precision::PrecisionContext;
use crate::scalar::{cabs, czero, norm_sqr, Cx, Real};

/// Largest chain the oracle accepts.
pub const MAX_SITES: usize = 12;

fn check_size(l: usize) -> Result<()> {
    if l > MAX_SITES {
        Err(Error::TooLarge(l))
    } else if l == 0 {
        Err(Error::InvalidParameter("empty chain".into()))
    } else {
        Ok(())
    }
}

#[inline]
fn jw_sign(n: usize, j: usize) -> bool {
    (n & ((1usize << j) - 1)).count_ones() % 2 == 1
}

/// `c_j |n⟩ = ±|n'⟩`; returns `(n', negative)`.
#[inline]
pub fn annihilate(n: usize, j: usize) -> Option<(usize, bool)> {
    (n >> j & 1 == 1).then(|| (n ^ (1 << j), jw_sign(n, j)))
}

#[inline]
pub fn create(n: usize, j: usize) -> Option<(usize, bool)> {
    (n >> j & 1 == 0).then(|| (n | (1 << j), jw_sign(n, j)))
}

/// Amplitudes over the `2^L` occupation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T> {
    sites: usize,
    amps: Vec<Cx<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn zeros(sites: usize) -> Result<Self> {
        check_size(sites)?;
        Ok(Self {
            sites,
            amps: vec![czero(); 1 << sites],
        })
    }

    pub fn from_amplitudes(sites: usize, amps: Vec<Cx<T>>) -> Result<Self> {
        check_size(sites)?;
        if amps.len() != 1 << sites {
            return Err(Error::Dimension(format!("{} amplitudes for {sites} sites", amps.len())));
        }
        Ok(Self { sites, amps })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[Cx<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        let mut s = T::zero();
        for a in &self.amps {
            s += norm_sqr(a);
        }
        s.sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::Collapse {
                time: f64::NAN,
                reason: "zero vector".into(),
            });
        }
        let inv = T::one() / n;
        for a in &mut self.amps {
            *a = Cx::new(a.re * inv, a.im * inv);
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Cx<T> {
        let mut s = czero();
        for (a, b) in self.amps.iter().zip(&other.amps) {
            s += a.conj() * *b;
        }
        s
    }

    /// `|⟨self|other⟩|²` for normalised vectors.
    pub fn fidelity(&self, other: &Self) -> T {
        norm_sqr(&self.inner(other))
    }

    /// `⟨n_j⟩` for a normalised vector.
    pub fn density(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.sites];
        for (n, a) in self.amps.iter().enumerate() {
            let p = norm_sqr(a);
            if p.is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                if n >> j & 1 == 1 {
                    *dj += p;
                }
            }
        }
        d
    }

    /// `C_ij = ⟨c_i† c_j⟩` and `F_ij = ⟨c_i c_j⟩`.
    pub fn correlations(&self) -> NambuCorrelations<T> {
        let l = self.sites;
        let mut c = CMatrix::<T>::zeros(l, l);
        let mut f = CMatrix::<T>::zeros(l, l);
        for (n, a) in self.amps.iter().enumerate() {
            if a.re.is_zero() && a.im.is_zero() {
                continue;
            }
            for j in 0..l {
                let Some((m, s1)) = annihilate(n, j) else { continue };
                for i in 0..l {
                    // ⟨c_i† c_j⟩ = Σ conj(ψ(k)) ⟨k|c_i† c_j|n⟩ ψ(n)
                    if let Some((k, s2)) = create(m, i) {
                        let v = self.amps[k].conj() * *a;
                        c[(i, j)] += if s1 ^ s2 { -v } else { v };
                    }
                    if let Some((k, s2)) = annihilate(m, i) {
                        let v = self.amps[k].conj() * *a;
                        f[(i, j)] += if s1 ^ s2 { -v } else { v };
                    }
                }
            }
        }
        NambuCorrelations { c, f }
    }
}

/// Symmetry resolving the operator into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// Blocks of fixed particle number.
    Number,
    /// Blocks of fixed fermion parity.
    Parity,
}

/// One symmetry block: basis states and the dense matrix over them.
#[derive(Debug, Clone)]
pub struct Sector<T> {
    pub states: Vec<usize>,
    pub block: CMatrix<T>,
}

/// Quadratic many-body operator, stored block-diagonally.
#[derive(Debug, Clone)]
pub struct ManyBodyOperator<T> {
    pub sites: usize,
    pub symmetry: Symmetry,
    pub sectors: Vec<Sector<T>>,
}

fn sector_states(l: usize, sym: Symmetry) -> Vec<Vec<usize>> {
    match sym {
        Symmetry::Number => (0..=l)
            .map(|k| (0..1usize << l).filter(|n| n.count_ones() as usize == k).collect())
            .collect(),
        Symmetry::Parity => (0..2)
            .map(|p| (0..1usize << l).filter(|n| n.count_ones() % 2 == p).collect())
            .collect(),
    }
}

/// `H = Σ A_ij c_i† c_j + Σ_{i<j} (B_ij c_i† c_j† + h.c.) - Σ μ_i n_i`.
///
/// With a vanishing `B` the operator is number-conserving and stored per
/// particle number; otherwise per parity.
pub fn build_hamiltonian<T: Real>(
    hopping: &CMatrix<T>,
    pairing: Option<&CMatrix<T>>,
    chemical: &[T],
) -> Result<ManyBodyOperator<T>> {
    let l = hopping.rows();
    check_size(l)?;
    if !hopping.is_square() || chemical.len() != l || pairing.is_some_and(|b| b.rows() != l || b.cols() != l) {
        return Err(Error::Dimension("coupling shapes".into()));
    }
    let pairing = pairing.filter(|b| !b.norm_max().is_zero());
    let symmetry = if pairing.is_some() {
        Symmetry::Parity
    } else {
        Symmetry::Number
    };
    let mut sectors = Vec::new();
    for states in sector_states(l, symmetry) {
        let dim = states.len();
        let mut index = std::collections::HashMap::with_capacity(dim);
        for (k, &n) in states.iter().enumerate() {
            index.insert(n, k);
        }
        let mut block = CMatrix::<T>::zeros(dim, dim);
        for (col, &n) in states.iter().enumerate() {
            for (i, mu) in chemical.iter().enumerate() {
                if n >> i & 1 == 1 {
                    block[(col, col)].re -= *mu;
                }
            }
            for j in 0..l {
                let Some((m, s1)) = annihilate(n, j) else { continue };
                for i in 0..l {
                    let a = hopping[(i, j)];
                    if a.re.is_zero() && a.im.is_zero() {
                        continue;
                    }
                    if let Some((k, s2)) = create(m, i) {
                        let row = index[&k];
                        block[(row, col)] += if s1 ^ s2 { -a } else { a };
                    }
                }
            }
            if let Some(b) = pairing {
                for i in 0..l {
                    for j in i + 1..l {
                        let bij = b[(i, j)];
                        if bij.re.is_zero() && bij.im.is_zero() {
                            continue;
                        }
                        // c_i† c_j† |n⟩ and its adjoint c_j c_i back
                        let Some((m, s1)) = create(n, j) else { continue };
                        let Some((k, s2)) = create(m, i) else { continue };
                        let row = index[&k];
                        let sign = s1 ^ s2;
                        block[(row, col)] += if sign { -bij } else { bij };
                        let c = bij.conj();
                        block[(col, row)] += if sign { -c } else { c };
                    }
                }
            }
        }
        sectors.push(Sector { states, block });
    }
    Ok(ManyBodyOperator {
        sites: l,
        symmetry,
        sectors,
    })
}

impl<T: Real> ManyBodyOperator<T> {
    pub fn apply(&self, v: &FockVector<T>) -> FockVector<T> {
        let mut out = vec![czero(); v.amps.len()];
        for s in &self.sectors {
            let x: Vec<Cx<T>> = s.states.iter().map(|&n| v.amps[n]).collect();
            let y = s.block.apply(&x);
            for (&n, val) in s.states.iter().zip(y) {
                out[n] = val;
            }
        }
        FockVector {
            sites: v.sites,
            amps: out,
        }
    }

    /// Dense `2^L × 2^L` matrix.
    pub fn to_dense(&self) -> CMatrix<T> {
        let dim = 1 << self.sites;
        let mut m = CMatrix::zeros(dim, dim);
        for s in &self.sectors {
            for (r, &nr) in s.states.iter().enumerate() {
                for (c, &nc) in s.states.iter().enumerate() {
                    m[(nr, nc)] = s.block[(r, c)];
                }
            }
        }
        m
    }

    pub fn expectation(&self, v: &FockVector<T>) -> Cx<T> {
        v.inner(&self.apply(v))
    }
}

/// `exp(-i H dt)` per sector.
#[derive(Debug, Clone)]
pub struct ManyBodyPropagator<T> {
    sectors: Vec<Sector<T>>,
    pub dt: f64,
}

pub fn make_propagator<T: Real>(
    h: &ManyBodyOperator<T>,
    dt: f64,
    ctx: &PrecisionContext,
) -> Result<ManyBodyPropagator<T>> {
    let s = Cx::new(T::zero(), -T::from_f64(dt));
    let sectors = h
        .sectors
        .iter()
        .map(|sec| {
            Ok(Sector {
                states: sec.states.clone(),
                block: mat_exp(&sec.block, s, ctx)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ManyBodyPropagator { sectors, dt })
}

/// Applies the step propagator `n_steps` times, normalising after each.
pub fn evolve_normalized<T: Real>(
    psi: &FockVector<T>,
    k: &ManyBodyPropagator<T>,
    n_steps: u64,
) -> Result<FockVector<T>> {
    let mut v = psi.clone();
    for step in 1..=n_steps {
        let mut out = vec![czero(); v.amps.len()];
        for s in &k.sectors {
            let x: Vec<Cx<T>> = s.states.iter().map(|&n| v.amps[n]).collect();
            for (&n, val) in s.states.iter().zip(s.block.apply(&x)) {
                out[n] = val;
            }
        }
        v.amps = out;
        v.normalize().map_err(|_| Error::Collapse {
            time: step as f64 * k.dt,
            reason: "many-body norm vanished".into(),
        })?;
    }
    Ok(v)
}

/// Exact `d⟨n_j⟩/dt` under `|ψ̇⟩ = -iH|ψ⟩` for the normalised state:
/// `2 Im⟨n_j ψ|Hψ⟩ - 2⟨n_j⟩ Im⟨ψ|Hψ⟩`.
pub fn density_derivative<T: Real>(psi: &FockVector<T>, h: &ManyBodyOperator<T>) -> Vec<T> {
    let hpsi = h.apply(psi);
    let e_im = psi.inner(&hpsi).im;
    let dens = psi.density();
    let two = T::from_i64(2);
    (0..psi.sites)
        .map(|j| {
            let mut x = czero::<T>();
            for (n, (a, b)) in psi.amps.iter().zip(&hpsi.amps).enumerate() {
                if n >> j & 1 == 1 {
                    x += a.conj() * *b;
                }
            }
            two * (x.im - dens[j] * e_im)
        })
        .collect()
}

/// How the initial many-body state is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialConstruction {
    /// Ground state of the initial Hamiltonian in the even-parity sector.
    GroundState,
    /// Normalised sum of the `±θ` tilted spin product states.
    CatState,
}

pub fn build_initial_state<T: Real>(
    how: InitialConstruction,
    p: &InitialParams,
    lat: &LatticeSpec,
    ctx: &PrecisionContext,
) -> Result<FockVector<T>> {
    check_size(lat.sites)?;
    match how {
        InitialConstruction::GroundState => {
            let c = initial_couplings::<T>(p, lat);
            let h = build_hamiltonian(&c.hopping, Some(&c.pairing), &c.chemical)?;
            let gs = ground_state_in_parity(&h, 0, ctx)?;
            Ok(match p.pattern {
                InitialPattern::Ferromagnetic => gs,
                InitialPattern::Antiferromagnetic => flip_odd_sites(&gs),
            })
        }
        InitialConstruction::CatState => {
            let theta = p.theta.ok_or_else(|| {
                Error::InvalidParameter("the cat construction needs the tilt angle".into())
            })?;
            cat_state(T::from_f64(theta), p.pattern, lat.sites)
        }
    }
}

fn cat_state<T: Real>(theta: T, pattern: InitialPattern, l: usize) -> Result<FockVector<T>> {
    let mut v = FockVector::zeros(l)?;
    for sign in [T::one(), -T::one()] {
        let (s, c) = (theta * sign * T::half()).sin_cos();
        for n in 0..1usize << l {
            let mut a = T::one();
            for j in 0..l {
                let up = n >> j & 1 == 1;
                let flipped = pattern == InitialPattern::Antiferromagnetic && j % 2 == 1;
                a *= if up != flipped { c } else { s };
            }
            v.amps[n].re += a;
        }
    }
    v.normalize()?;
    Ok(v)
}

/// `U|ψ⟩` for `U = Π_{j odd} σˣ_j`, a pure relabelling `n → n ⊕ odd-mask`.
pub fn flip_odd_sites<T: Real>(psi: &FockVector<T>) -> FockVector<T> {
    let mask: usize = (1..psi.sites).step_by(2).map(|j| 1 << j).sum();
    let mut amps = vec![czero(); psi.amps.len()];
    for (n, a) in psi.amps.iter().enumerate() {
        amps[n ^ mask] = *a;
    }
    FockVector {
        sites: psi.sites,
        amps,
    }
}

/// Lowest eigenvector in the sector of fermion parity `parity`; the level
/// must be simple.
fn ground_state_in_parity<T: Real>(h: &ManyBodyOperator<T>, parity: u32, ctx: &PrecisionContext) -> Result<FockVector<T>> {
    let sec = h
        .sectors
        .iter()
        .find(|s| s.states.first().is_some_and(|n| n.count_ones() % 2 == parity))
        .ok_or_else(|| Error::GroundState("no sector of the requested parity".into()))?;
    let e = eigh(&sec.block, ctx)?;
    if e.values.len() > 1 {
        let gap = e.values[1] - e.values[0];
        if gap <= ctx.tolerance::<T>() * e.values[0].abs().max_of(T::one()) {
            return Err(Error::GroundState("degenerate ground state".into()));
        }
    }
    let mut v = FockVector::zeros(h.sites)?;
    for (r, &n) in sec.states.iter().enumerate() {
        v.amps[n] = e.vectors[(r, 0)];
    }
    v.normalize()?;
    Ok(v)
}

/// Lowest energy in the even-parity sector.
pub fn ground_energy_even<T: Real>(h: &ManyBodyOperator<T>, ctx: &PrecisionContext) -> Result<T> {
    let sec = h
        .sectors
        .iter()
        .find(|s| s.states.first().is_some_and(|n| n.count_ones() % 2 == 0))
        .ok_or_else(|| Error::GroundState("no even-parity sector".into()))?;
    Ok(eigvalsh(&sec.block, ctx)?[0])
}

/// Reduced density matrix on `subsystem`; index bit `k` is the occupation of
/// `subsystem[k]`. Modes are reordered subsystem-first before tracing, which
/// is exact for states of definite parity.
pub fn reduced_density_matrix<T: Real>(psi: &FockVector<T>, subsystem: &[usize]) -> Result<CMatrix<T>> {
    let l = psi.sites;
    let mut seen = vec![false; l];
    for &s in subsystem {
        if s >= l || std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidParameter(format!("bad subsystem {subsystem:?}")));
        }
    }
    let rest: Vec<usize> = (0..l).filter(|j| !seen[*j]).collect();
    let order: Vec<usize> = subsystem.iter().chain(&rest).copied().collect();
    let la = subsystem.len();
    let (da, db) = (1usize << la, 1usize << rest.len());
    let mut psi_ab = vec![czero::<T>(); da * db];
    for (n, amp) in psi.amps.iter().enumerate() {
        if amp.re.is_zero() && amp.im.is_zero() {
            continue;
        }
        // sign of sorting the occupied creators into the new order
        let mut inversions = 0u32;
        for (p, &sp) in order.iter().enumerate() {
            if n >> sp & 1 == 0 {
                continue;
            }
            for &sq in &order[p + 1..] {
                if sq < sp && n >> sq & 1 == 1 {
                    inversions += 1;
                }
            }
        }
        let a: usize = subsystem.iter().enumerate().map(|(k, &s)| (n >> s & 1) << k).sum();
        let b: usize = rest.iter().enumerate().map(|(k, &s)| (n >> s & 1) << k).sum();
        psi_ab[a * db + b] = if inversions % 2 == 1 { -*amp } else { *amp };
    }
    Ok(CMatrix::from_fn(da, da, |a, a2| {
        let mut s = czero();
        for b in 0..db {
            s += psi_ab[a * db + b] * psi_ab[a2 * db + b].conj();
        }
        s
    }))
}

/// Entanglement and asymmetry measures of a reduced density matrix.
#[derive(Debug, Clone)]
pub struct ExactMeasures<T> {
    pub von_neumann: T,
    pub renyi2: T,
    /// `tr ρ²`.
    pub purity: T,
    /// `tr ρ_{A,N}²` of the charge-dephased matrix.
    pub dephased_purity: T,
    /// Rényi-2 entanglement asymmetry `ln(tr ρ²) - ln(tr ρ_{A,N}²)`.
    pub asymmetry: T,
}

pub fn exact_measures<T: Real>(rho: &CMatrix<T>, ctx: &PrecisionContext) -> Result<ExactMeasures<T>> {
    let vals = eigvalsh(rho, ctx)?;
    let mut svn = T::zero();
    for v in vals {
        if v > T::zero() {
            svn -= v * v.ln();
        }
    }
    let dim = rho.rows();
    let mut purity = T::zero();
    let mut dephased = T::zero();
    for a in 0..dim {
        for b in 0..dim {
            let p = norm_sqr(&rho[(a, b)]);
            purity += p;
            if a.count_ones() == b.count_ones() {
                dephased += p;
            }
        }
    }
    Ok(ExactMeasures {
        von_neumann: svn,
        renyi2: -purity.ln(),
        purity,
        dephased_purity: dephased,
        asymmetry: purity.ln() - dephased.ln(),
    })
}

/// `Z₂(α) = tr[ρ e^{iαQ} ρ e^{-iαQ}]` with `Q` the subsystem charge.
pub fn charged_moment_exact<T: Real>(rho: &CMatrix<T>, alpha: T) -> T {
    let dim = rho.rows();
    let mut z = T::zero();
    for a in 0..dim {
        for b in 0..dim {
            let dq = b.count_ones() as i64 - a.count_ones() as i64;
            let w = if dq == 0 {
                T::one()
            } else {
                (alpha * T::from_i64(dq)).sin_cos().1
            };
            z += norm_sqr(&rho[(a, b)]) * w;
        }
    }
    z
}

/// Largest `|ψ_a|` difference after aligning the global phase.
pub fn phase_aligned_distance<T: Real>(a: &FockVector<T>, b: &FockVector<T>) -> T {
    let ov = a.inner(b);
    let m = cabs(&ov);
    let phase = if m.is_zero() {
        Cx::new(T::one(), T::zero())
    } else {
        Cx::new(ov.re / m, ov.im / m)
    };
    let mut d = T::zero();
    for (x, y) in a.amps.iter().zip(&b.amps) {
        d = d.max_of(cabs(&(*x * phase - *y)));
    }
    d
}
