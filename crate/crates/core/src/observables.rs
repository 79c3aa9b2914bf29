//! Physical outputs computed from Nambu correlations.
//!
//! Everything here is exact for Gaussian states; the dynamical feature
//! extraction at the bottom works on sampled `f64` series.

use crate::error::{Error, Result};
use crate::gaussian::NambuCorrelations;
use crate::linalg::{det_real, pair_spectrum, CMatrix, RMatrix};
use crate::model::{EvolutionParams, LatticeSpec};
use crate::precision::PrecisionContext;
use crate::scalar::{cx, Cx, Real};
use serde::{Deserialize, Serialize};

/// Site densities, bond currents and total particle number at one instant.
#[derive(Debug, Clone)]
pub struct DensityCurrent<T> {
    pub density: Vec<T>,
    /// One entry per bond of [`LatticeSpec::bonds`], positive for flow from
    /// the first site of the bond to the second.
    pub current: Vec<T>,
    pub total: T,
}

/// `n_j = C_jj` and `I_{i→j} = i J s (C_ji − C_ij)` for each bond `(i, j, s)`.
///
/// The current is the Hermitian part of the hopping only; the remainder of
/// `dn/dt` is what [`inflow`] reports.
pub fn density_current<T: Real>(
    g: &NambuCorrelations<T>,
    p: &EvolutionParams,
    ctx: &PrecisionContext,
) -> Result<DensityCurrent<T>> {
    let l = g.sites();
    let lat = LatticeSpec::new(l, p.boundary)?;
    let tol = ctx.tolerance::<T>();
    let mut density = Vec::with_capacity(l);
    let mut total = T::zero();
    for j in 0..l {
        let z = g.c[(j, j)];
        if z.im.abs() > tol {
            return Err(Error::ImaginaryResidue(z.im.to_f64()));
        }
        density.push(z.re);
        total += z.re;
    }
    let hop = T::from_f64(p.hopping);
    let mut current = Vec::new();
    for (i, j, s) in lat.bonds() {
        let d = g.c[(j, i)] - g.c[(i, j)];
        // i·d is real when C is Hermitian
        let z = Cx::new(-d.im, d.re) * hop * T::from_i64(s);
        if z.im.abs() > tol * hop.abs().max_of(T::one()) {
            return Err(Error::ImaginaryResidue(z.im.to_f64()));
        }
        current.push(z.re);
    }
    Ok(DensityCurrent {
        density,
        current,
        total,
    })
}

/// Exact `dn_j/dt` under `H = Σ h_ij c_i† c_j` for the normalised state with
/// orthonormal Bogoliubov matrix `w`.
///
/// With `P = W W†` the derivative of the projector is
/// `(I − P) K P + P K† (I − P)` for the generator `K = diag(−ih, ihᵀ)`, and
/// `n_j = P_jj`.
pub fn density_rate<T: Real>(w: &CMatrix<T>, h: &CMatrix<T>) -> Result<Vec<T>> {
    let l = w.cols();
    if w.rows() != 2 * l || h.rows() != l || !h.is_square() {
        return Err(Error::Dimension("density rate needs W 2L x L and h L x L".into()));
    }
    let top = w.block(0, 0, l, l);
    let bottom = w.block(l, 0, l, l);
    let mi = |z: Cx<T>| Cx::new(z.im, -z.re);
    let y_top = h.mul(&top).map(mi);
    let y_bottom = h.transpose().mul(&bottom).map(|z| -mi(z));
    let y = CMatrix::vstack(&y_top, &y_bottom);
    let z = w.adjoint().mul(&y);
    let r = y_top.sub(&top.mul(&z));
    Ok((0..l)
        .map(|j| {
            let mut s = T::zero();
            for k in 0..l {
                let a = r[(j, k)];
                let b = top[(j, k)];
                // Re(a · conj(b))
                s += a.re * b.re + a.im * b.im;
            }
            s.mul_pow2(1)
        })
        .collect())
}

/// Central finite-difference stencil for `dn/dt` on a uniform time grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// `(f₊₁ − f₋₁) / 2δ`, error `δ² f‴ / 6`.
    Second,
    /// `(f₋₂ − 8f₋₁ + 8f₊₁ − f₊₂) / 12δ`, error `δ⁴ f⁽⁵⁾ / 30`.
    #[default]
    Fourth,
}

impl Stencil {
    /// Samples needed on each side of the centre.
    pub fn reach(self) -> usize {
        match self {
            Stencil::Second => 1,
            Stencil::Fourth => 2,
        }
    }

    /// Derivative at the centre of `window`, which holds `2·reach + 1`
    /// profiles spaced by `delta`.
    pub fn derivative<T: Real>(self, window: &[&[T]], delta: T) -> Result<Vec<T>> {
        let r = self.reach();
        if window.len() != 2 * r + 1 || window.iter().any(|w| w.len() != window[0].len()) {
            return Err(Error::Dimension("stencil window".into()));
        }
        if !(delta > T::zero()) {
            return Err(Error::NonUniformGrid);
        }
        let n = window[0].len();
        Ok(match self {
            Stencil::Second => {
                let width = delta.mul_pow2(1);
                (0..n).map(|j| (window[2][j] - window[0][j]) / width).collect()
            }
            Stencil::Fourth => {
                let width = delta * T::from_i64(12);
                let eight = T::from_i64(8);
                (0..n)
                    .map(|j| (window[0][j] - window[4][j] + eight * (window[3][j] - window[1][j])) / width)
                    .collect()
            }
        })
    }
}

/// Non-Hermitian source term `σ_j = dn_j/dt + Σ_out I − Σ_in I`.
///
/// Positive values mean particle gain. `bonds` must be the list the currents
/// were computed on.
pub fn inflow_from_rate<T: Real>(dndt: Vec<T>, current: &[T], bonds: &[(usize, usize, i64)]) -> Result<Vec<T>> {
    if current.len() != bonds.len() || bonds.iter().any(|&(i, j, _)| i.max(j) >= dndt.len()) {
        return Err(Error::Dimension("inflow profile lengths differ".into()));
    }
    let mut sigma = dndt;
    for (&(i, j, _), &c) in bonds.iter().zip(current) {
        sigma[i] += c;
        sigma[j] -= c;
    }
    Ok(sigma)
}

/// [`inflow_from_rate`] with `dn/dt` from the second-order central
/// difference over `±delta`.
pub fn inflow<T: Real>(
    before: &[T],
    after: &[T],
    delta: T,
    current: &[T],
    bonds: &[(usize, usize, i64)],
) -> Result<Vec<T>> {
    if before.len() != after.len() {
        return Err(Error::Dimension("inflow profile lengths differ".into()));
    }
    if !(delta > T::zero()) {
        return Err(Error::NonUniformGrid);
    }
    let width = delta.mul_pow2(1);
    let rate = before.iter().zip(after).map(|(b, a)| (*a - *b) / width).collect();
    inflow_from_rate(rate, current, bonds)
}

/// Inflow over a uniformly sampled series at every sample the stencil
/// reaches; returns `(times, σ)`.
pub fn inflow_series(
    times: &[f64],
    density: &[Vec<f64>],
    current: &[Vec<f64>],
    bonds: &[(usize, usize, i64)],
    stencil: Stencil,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let delta = uniform_step(times)?;
    let r = stencil.reach();
    let mut ts = Vec::new();
    let mut out = Vec::new();
    for k in r..times.len().saturating_sub(r) {
        let window: Vec<&[f64]> = density[k - r..=k + r].iter().map(Vec::as_slice).collect();
        ts.push(times[k]);
        out.push(inflow_from_rate(stencil.derivative(&window, delta)?, &current[k], bonds)?);
    }
    Ok((ts, out))
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::NonUniformGrid);
    }
    let d = times[1] - times[0];
    let ok = d > 0.0
        && times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - d).abs() <= 1e-9 * d.max(1.0));
    if ok {
        Ok(d)
    } else {
        Err(Error::NonUniformGrid)
    }
}

/// Von Neumann and Rényi-2 entropies of a subsystem.
#[derive(Debug, Clone, Copy)]
pub struct Entropies<T> {
    pub von_neumann: T,
    pub renyi2: T,
}

pub fn ee_from_correlations<T: Real>(
    g: &NambuCorrelations<T>,
    subsystem: &[usize],
    ctx: &PrecisionContext,
) -> Result<Entropies<T>> {
    check_subsystem(subsystem, g.sites())?;
    let nu = pair_spectrum(&g.block_over(subsystem), ctx)?;
    let n = nu.len();
    let slack = ctx.tolerance::<T>() * T::from_i64(n as i64 * 16);
    for i in 0..n / 2 {
        let defect = (nu[i] + nu[n - 1 - i] - T::one()).abs();
        if defect > slack {
            return Err(Error::Pairing(defect.to_f64()));
        }
    }
    // each physical mode appears once as ν and once as 1-ν
    let mut svn = T::zero();
    let mut s2 = T::zero();
    for &v in &nu {
        if v > T::zero() {
            svn -= v * v.ln();
        }
        let w = T::one() - v;
        s2 -= (v * v + w * w).ln();
    }
    Ok(Entropies {
        von_neumann: svn,
        renyi2: s2.mul_pow2(-1),
    })
}

fn check_subsystem(subsystem: &[usize], l: usize) -> Result<()> {
    let mut seen = vec![false; l];
    for &s in subsystem {
        if s >= l || std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidParameter(format!("bad subsystem {subsystem:?}")));
        }
    }
    if subsystem.is_empty() {
        return Err(Error::InvalidParameter("empty subsystem".into()));
    }
    Ok(())
}

/// Sites of `0..sites` not in `subsystem`, ascending.
pub fn complement(subsystem: &[usize], sites: usize) -> Vec<usize> {
    (0..sites).filter(|j| !subsystem.contains(j)).collect()
}

/// Real antisymmetric Majorana covariance `Γ` with `⟨γ_a γ_b⟩ = δ_ab + iΓ_ab`,
/// for `γ_2k = c_k + c_k†` and `γ_2k+1 = i(c_k† − c_k)` on the subsystem.
pub fn majorana_covariance<T: Real>(g: &NambuCorrelations<T>, subsystem: &[usize]) -> RMatrix<T> {
    let l = subsystem.len();
    // γ_a = u_a c_i + v_a c_i†
    let coeff = |a: usize| -> (Cx<T>, Cx<T>) {
        if a % 2 == 0 {
            (cx(1.0, 0.0), cx(1.0, 0.0))
        } else {
            (cx(0.0, -1.0), cx(0.0, 1.0))
        }
    };
    let mut gamma = RMatrix::zeros(2 * l);
    for a in 0..2 * l {
        let i = subsystem[a / 2];
        let (ua, va) = coeff(a);
        for b in 0..2 * l {
            if a == b {
                continue;
            }
            let j = subsystem[b / 2];
            let (ub, vb) = coeff(b);
            let cc = g.f[(i, j)];
            let cdc = g.c[(i, j)];
            let cdcd = g.f[(j, i)].conj();
            let mut ccd = -g.c[(j, i)];
            if i == j {
                ccd.re += T::one();
            }
            let e = ua * ub * cc + ua * vb * ccd + va * ub * cdc + va * vb * cdcd;
            *gamma.at_mut(a, b) = e.im;
        }
    }
    gamma
}

/// `Z₂(α) = tr[ρ_A e^{iαQ_A} ρ_A e^{−iαQ_A}]`.
///
/// The charge phase rotates each Majorana pair by `α`, and the overlap of two
/// Gaussian states is `sqrt(det((I − Γ Γ')/2))`. The moment is real and
/// non-negative, so the square root needs no sign resolution.
pub fn charged_moment<T: Real>(
    g: &NambuCorrelations<T>,
    subsystem: &[usize],
    alpha: T,
    ctx: &PrecisionContext,
) -> Result<T> {
    check_subsystem(subsystem, g.sites())?;
    let gamma = majorana_covariance(g, subsystem);
    let _ = ctx;
    Ok(moment_from_covariance(&gamma, alpha))
}

fn moment_from_covariance<T: Real>(gamma: &RMatrix<T>, alpha: T) -> T {
    let n = gamma.n;
    let (s, c) = alpha.sin_cos();
    // R acts on each (2k, 2k+1) pair: γ → (cγ_0 − sγ_1, sγ_0 + cγ_1)
    let rotated = {
        let mut rg = RMatrix::zeros(n);
        for a in 0..n {
            let (p, q) = (a & !1, a | 1);
            let (ra, rb) = if a % 2 == 0 { (c, -s) } else { (s, c) };
            for b in 0..n {
                *rg.at_mut(a, b) = ra * gamma.at(p, b) + rb * gamma.at(q, b);
            }
        }
        let mut out = RMatrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                let (p, q) = (b & !1, b | 1);
                let (ra, rb) = if b % 2 == 0 { (c, -s) } else { (s, c) };
                *out.at_mut(a, b) = rg.at(a, p) * ra + rg.at(a, q) * rb;
            }
        }
        out
    };
    let mut m = RMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc += gamma.at(a, k) * rotated.at(k, b);
            }
            let delta = if a == b { T::one() } else { T::zero() };
            *m.at_mut(a, b) = (delta - acc).mul_pow2(-1);
        }
    }
    det_real(&m).max_of(T::zero()).sqrt()
}

/// Rényi-2 entanglement asymmetry with its ingredients.
#[derive(Debug, Clone, Copy)]
pub struct Asymmetry<T> {
    /// `ΔS_2 = ln tr ρ_A² − ln tr ρ_{A,N}²`.
    pub delta_s2: T,
    pub purity: T,
    pub dephased_purity: T,
    /// Quadrature points actually used.
    pub n_alpha: usize,
    /// `|ΔS_2(n) − ΔS_2(n/2)|` at the accepted grid.
    pub quadrature_change: f64,
}

/// Largest grid tried before reporting non-convergence.
const MAX_ALPHA_POINTS: usize = 4096;

/// `ΔS_2` from the periodic trapezoid rule on `n_alpha` points over `[−π, π)`.
///
/// `Z₂` is a trigonometric polynomial of degree at most `|A|`, so the rule is
/// exact once `n_alpha > |A|`. The grid doubles until halving it changes
/// `ΔS_2` by less than `budget`.
pub fn ea_renyi2<T: Real>(
    g: &NambuCorrelations<T>,
    subsystem: &[usize],
    n_alpha: usize,
    budget: f64,
    ctx: &PrecisionContext,
) -> Result<Asymmetry<T>> {
    if n_alpha < 16 || n_alpha % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n_alpha must be even and at least 16, got {n_alpha}"
        )));
    }
    check_subsystem(subsystem, g.sites())?;
    let gamma = majorana_covariance(g, subsystem);
    let z = |k: usize, n: usize| {
        let alpha = T::pi() * T::from_i64(2 * k as i64 - n as i64) / T::from_i64(n as i64);
        moment_from_covariance(&gamma, alpha)
    };
    let purity = z(n_alpha / 2, n_alpha);
    // values at k = 0..=n/2; Z is even in α so the rest mirrors
    let mut n = n_alpha;
    let mut half: Vec<T> = (0..=n / 2).map(|k| z(k, n)).collect();
    let dephased = |vals: &[T], n: usize, stride: usize| {
        let mut s = vals[0] + vals[n / 2];
        let mut k = stride;
        while k < n / 2 {
            s += vals[k].mul_pow2(1);
            k += stride;
        }
        s / T::from_i64((n / stride) as i64)
    };
    loop {
        let fine = dephased(&half, n, 1);
        let coarse = dephased(&half, n, 2);
        let ds = purity.ln() - fine.ln();
        let change = (fine.ln() - coarse.ln()).abs().to_f64();
        if change < budget {
            let floor = -ctx.tolerance_f64() * 10.0;
            if ds.to_f64() < floor {
                return Err(Error::NonConvergence(format!(
                    "negative asymmetry {}",
                    ds.to_f64()
                )));
            }
            return Ok(Asymmetry {
                delta_s2: ds,
                purity,
                dephased_purity: fine,
                n_alpha: n,
                quadrature_change: change,
            });
        }
        if n >= MAX_ALPHA_POINTS {
            return Err(Error::NonConvergence(format!(
                "asymmetry quadrature changed by {change:e} at {n} points"
            )));
        }
        // refine: keep old points as the even indices of the new grid
        let n2 = 2 * n;
        let mut next = Vec::with_capacity(n2 / 2 + 1);
        for k in 0..=n2 / 2 {
            next.push(if k % 2 == 0 { half[k / 2] } else { z(k, n2) });
        }
        half = next;
        n = n2;
    }
}

/// What a [`ProfileSeries`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Density,
    Current,
    Inflow,
}

/// Per-site (or per-bond) values on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSeries {
    pub kind: ProfileKind,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Thresholds for [`extract_features`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSettings {
    /// Relative density drop marking the front.
    pub front_fraction: f64,
    /// Per-site `|dn/dt|` below which the profile counts as stationary.
    pub stable_rate: f64,
    /// How long the rate must stay below `stable_rate`.
    pub stable_window: f64,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self {
            front_fraction: 0.01,
            stable_rate: 1e-3,
            stable_window: 2.0,
        }
    }
}

/// Straight-line fit of the front position `x = v t + b` (sites counted
/// from 1 at the left edge).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontFit {
    pub speed: f64,
    pub intercept: f64,
    /// Standard error of the fitted speed.
    pub speed_error: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpembaCrossing {
    pub label_a: String,
    pub label_b: String,
    pub time: f64,
}

/// Dynamical features of one run. Absent features are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub front: Option<FrontFit>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub mpemba_crossings: Vec<MpembaCrossing>,
}

impl FeatureReport {
    pub fn wavefront_speed(&self) -> Option<f64> {
        self.front.map(|f| f.speed)
    }
}

/// Rightmost site (1-based) whose density fell by more than `fraction` of its
/// initial value, if any.
pub fn front_position(initial: &[f64], now: &[f64], fraction: f64) -> Option<usize> {
    initial
        .iter()
        .zip(now)
        .enumerate()
        .rev()
        .find(|(_, (n0, n))| *n0 - *n > fraction * *n0 && **n0 > 0.0)
        .map(|(j, _)| j + 1)
}

/// Least-squares front fit over the samples where the front is inside the
/// chain and still moving, and the resulting arrival time at the far edge.
pub fn fit_front(density: &ProfileSeries, fraction: f64) -> Result<(FrontFit, f64)> {
    let l = density.values.first().map_or(0, Vec::len);
    if density.times.len() < 2 || l == 0 {
        return Err(Error::NotDetected("density series too short".into()));
    }
    let initial = &density.values[0];
    let mut pts = Vec::new();
    for (t, n) in density.times.iter().zip(&density.values).skip(1) {
        match front_position(initial, n, fraction) {
            Some(x) if x < l => pts.push((*t, x as f64)),
            Some(_) => break,
            None => {}
        }
    }
    // the front has to travel: demand samples spanning a quarter of the chain
    let span = pts.iter().map(|p| p.1).fold(f64::NAN, f64::max)
        - pts.iter().map(|p| p.1).fold(f64::NAN, f64::min);
    if pts.len() < 4 || !(span >= l as f64 / 4.0) {
        return Err(Error::NotDetected("front does not travel".into()));
    }
    let fit = linear_fit(&pts);
    if !(fit.speed > 0.0) {
        return Err(Error::NotDetected("front does not move right".into()));
    }
    let tau1 = (l as f64 - fit.intercept) / fit.speed;
    Ok((fit, tau1))
}

fn linear_fit(pts: &[(f64, f64)]) -> FrontFit {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum();
    let speed = stx / stt;
    let intercept = mx - speed * mt;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - speed * p.0).powi(2))
        .sum();
    let speed_error = if pts.len() > 2 {
        (rss / (n - 2.0) / stt).sqrt()
    } else {
        f64::INFINITY
    };
    FrontFit {
        speed,
        intercept,
        speed_error,
        points: pts.len(),
    }
}

/// Earliest sample time after which `max_j |dn_j/dt|` stays below `rate`
/// for at least `window` (central differences on the sample grid).
pub fn stabilization_time(density: &ProfileSeries, rate: f64, window: f64) -> Result<f64> {
    let dt = uniform_step(&density.times)?;
    let v = &density.values;
    let n = v.len();
    if n < 3 {
        return Err(Error::NotDetected("series too short".into()));
    }
    let speed: Vec<f64> = (1..n - 1)
        .map(|k| {
            v[k + 1]
                .iter()
                .zip(&v[k - 1])
                .map(|(a, b)| ((a - b) / (2.0 * dt)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let times = &density.times[1..n - 1];
    let mut start: Option<usize> = None;
    for (k, &s) in speed.iter().enumerate() {
        if s < rate {
            let st = *start.get_or_insert(k);
            if times[k] - times[st] >= window - 1e-9 {
                return Ok(times[st]);
            }
        } else {
            start = None;
        }
    }
    Err(Error::NotDetected("profile never stabilises".into()))
}

/// First sign change of `a(t) − b(t)` after `t = 0`, located by linear
/// interpolation between the bracketing samples.
pub fn first_crossing(times: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut prev: Option<(f64, f64)> = None;
    for (&t, &v) in times.iter().zip(&d) {
        if v == 0.0 && prev.is_some() {
            return Some(t);
        }
        if let Some((tp, vp)) = prev {
            if vp != 0.0 && (vp < 0.0) != (v < 0.0) {
                return Some(tp + (t - tp) * vp / (vp - v));
            }
        }
        if v != 0.0 {
            prev = Some((t, v));
        }
    }
    None
}

/// One labelled asymmetry curve for crossing detection.
#[derive(Debug, Clone)]
pub struct LabelledSeries<'a> {
    pub label: &'a str,
    pub times: &'a [f64],
    pub values: &'a [f64],
}

/// Front, `τ₁`, `τ₂` from a density series and pairwise crossings of the
/// supplied asymmetry curves (which must share a time grid).
pub fn extract_features(
    density: Option<&ProfileSeries>,
    asymmetry: &[LabelledSeries<'_>],
    settings: &FeatureSettings,
) -> Result<FeatureReport> {
    let mut report = FeatureReport::default();
    if let Some(d) = density {
        if d.kind != ProfileKind::Density {
            return Err(Error::InvalidParameter("features need a density series".into()));
        }
        let per_unit = (d.times.len().saturating_sub(1)) as f64
            / (d.times.last().copied().unwrap_or(0.0) - d.times[0]).max(f64::MIN_POSITIVE);
        if per_unit < 4.0 - 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "{per_unit:.2} samples per unit time; at least 4 needed"
            )));
        }
        if let Ok((fit, tau1)) = fit_front(d, settings.front_fraction) {
            report.front = Some(fit);
            report.tau1 = Some(tau1);
        }
        report.tau2 = stabilization_time(d, settings.stable_rate, settings.stable_window).ok();
    }
    for (i, a) in asymmetry.iter().enumerate() {
        for b in &asymmetry[i + 1..] {
            if a.times != b.times {
                return Err(Error::NonUniformGrid);
            }
            if let Some(t) = first_crossing(a.times, a.values, b.values) {
                report.mpemba_crossings.push(MpembaCrossing {
                    label_a: a.label.to_string(),
                    label_b: b.label.to_string(),
                    time: t,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    #[test]
    fn stencils_reach_their_order() {
        // f = sin t at t = 1, both stencils, two step sizes
        let err = |st: Stencil, d: f64| {
            let r = st.reach() as i64;
            let w: Vec<Vec<f64>> = (-r..=r).map(|k| vec![(1.0 + k as f64 * d).sin()]).collect();
            let w: Vec<&[f64]> = w.iter().map(Vec::as_slice).collect();
            (st.derivative(&w, d).unwrap()[0] - 1f64.cos()).abs()
        };
        let second = err(Stencil::Second, 0.1) / err(Stencil::Second, 0.05);
        let fourth = err(Stencil::Fourth, 0.1) / err(Stencil::Fourth, 0.05);
        assert!((second - 4.0).abs() < 0.05, "{second}");
        assert!((fourth - 16.0).abs() < 0.5, "{fourth}");
    }

    fn diagonal_state(occ: &[f64]) -> NambuCorrelations<f64> {
        let l = occ.len();
        let mut c = CMatrix::zeros(l, l);
        for (j, &p) in occ.iter().enumerate() {
            c[(j, j)] = cx(p, 0.0);
        }
        NambuCorrelations {
            c,
            f: CMatrix::zeros(l, l),
        }
    }

    #[test]
    fn moment_of_a_product_mixture() {
        let g = diagonal_state(&[0.3, 0.8]);
        let ctx = PrecisionContext::double();
        let z = charged_moment(&g, &[0, 1], 0.7, &ctx).unwrap();
        // charge-diagonal: Z = Π (p² + (1-p)²)
        let want = (0.09 + 0.49) * (0.64 + 0.04);
        assert!((z - want).abs() < 1e-14, "{z} vs {want}");
        let ea = ea_renyi2(&g, &[0, 1], 16, 1e-12, &ctx).unwrap();
        assert!(ea.delta_s2.abs() < 1e-14);
    }

    #[test]
    fn entropies_of_a_mixed_mode() {
        let g = diagonal_state(&[0.5, 1.0]);
        let ctx = PrecisionContext::double();
        let s = ee_from_correlations(&g, &[0, 1], &ctx).unwrap();
        assert!((s.von_neumann - 2f64.ln()).abs() < 1e-14);
        assert!((s.renyi2 - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn inflow_of_a_pure_current() {
        // one particle hopping 0 → 1 at rate 1: no sources
        let bonds = [(0, 1, 1)];
        let s = inflow(&[1.0, 0.0], &[0.8, 0.2], 0.1, &[1.0], &bonds).unwrap();
        assert!(s.iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(inflow(&[1.0], &[1.0], 0.0, &[], &[]), Err(Error::NonUniformGrid)));
    }

    #[test]
    fn front_fit_recovers_linear_motion() {
        let l = 40;
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let values = times
            .iter()
            .map(|&t| (1..=l).map(|x| if (x as f64) < 2.0 + 4.0 * t { 0.5 } else { 1.0 }).collect())
            .collect();
        let d = ProfileSeries {
            kind: ProfileKind::Density,
            times,
            values,
        };
        let (fit, tau1) = fit_front(&d, 0.1).unwrap();
        assert!((fit.speed - 4.0).abs() < 0.1, "{fit:?}");
        assert!((tau1 - 9.5).abs() < 0.3, "{tau1}");
    }

    #[test]
    fn crossing_interpolates() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(first_crossing(&t, &[1.0, 0.5, -0.5], &[0.0, 0.0, 0.0]), Some(1.5));
        assert_eq!(first_crossing(&t, &[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0]), None);
    }

    #[test]
    fn stabilization_needs_a_full_window() {
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let values = times
            .iter()
            .map(|&t| vec![if t < 3.0 { t } else { 3.0 }])
            .collect();
        let d = ProfileSeries {
            kind: ProfileKind::Density,
            times,
            values,
        };
        let tau2 = stabilization_time(&d, 1e-3, 2.0).unwrap();
        assert!((tau2 - 3.25).abs() < 1e-12, "{tau2}");
    }
}
