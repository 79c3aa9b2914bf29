//! The Gaussian engine against the exact many-body oracle on small chains.

use nhskin_core::ed::{self, FockVector, InitialConstruction, ManyBodyOperator};
use nhskin_core::gaussian::{self, BogoliubovState, NambuCorrelations};
use nhskin_core::model::*;
use nhskin_core::observables::{self, charged_moment, ea_renyi2, ee_from_correlations};
use nhskin_core::{CMatrix, MpFloat, PrecisionContext, Real};
use std::f64::consts::PI;

type T = MpFloat<4>;

fn ctx() -> PrecisionContext {
    PrecisionContext::with_digits(64).unwrap()
}

fn max_diff(a: &NambuCorrelations<T>, b: &NambuCorrelations<T>) -> f64 {
    a.c.max_abs_diff(&b.c).max_of(a.f.max_abs_diff(&b.f)).to_f64()
}

/// Both engines prepared in the same initial state, plus the evolution
/// generator in each representation.
struct Pair {
    psi: FockVector<T>,
    state: BogoliubovState<T>,
    h: CMatrix<T>,
    many_body: ManyBodyOperator<T>,
}

fn prepare(l: usize, theta: f64, gamma: f64, pattern: InitialPattern) -> Pair {
    let ctx = ctx();
    let lat = LatticeSpec::new(l, Boundary::Antiperiodic).unwrap();
    let p = InitialParams::from_theta(theta, 1.0, pattern).unwrap();
    let psi = ed::build_initial_state::<T>(InitialConstruction::CatState, &p, &lat, &ctx).unwrap();
    let (state, _) = gaussian::ground_state(&initial_bdg_matrix::<T>(&p, &lat), &ctx).unwrap();
    let ev = EvolutionParams::new(1.0, gamma, Boundary::Open).unwrap();
    let h = hn_matrix::<T>(&ev, l).unwrap();
    let many_body = ed::build_hamiltonian(&h, None, &vec![T::ZERO; l]).unwrap();
    Pair {
        psi,
        state,
        h,
        many_body,
    }
}

#[test]
fn ground_state_and_cat_construction_coincide() {
    let ctx = ctx();
    for l in [4, 6, 8] {
        let lat = LatticeSpec::new(l, Boundary::Antiperiodic).unwrap();
        for theta in [PI / 12.0, PI / 6.0, PI / 3.0, PI / 2.0] {
            for pattern in [InitialPattern::Ferromagnetic, InitialPattern::Antiferromagnetic] {
                let p = InitialParams::from_theta(theta, 1.0, pattern).unwrap();
                let gs = ed::build_initial_state::<T>(InitialConstruction::GroundState, &p, &lat, &ctx)
                    .unwrap();
                let cat = ed::build_initial_state::<T>(InitialConstruction::CatState, &p, &lat, &ctx)
                    .unwrap();
                let infidelity = (T::from_i64(1) - gs.fidelity(&cat)).abs().to_f64();
                assert!(infidelity < 1e-40, "L={l} θ={theta} {pattern:?}: {infidelity:e}");
                let (w, _) = gaussian::ground_state(&initial_bdg_matrix::<T>(&p, &lat), &ctx).unwrap();
                let g = gaussian::correlations(&w, &ctx).unwrap();
                let d = max_diff(&g, &cat.correlations());
                assert!(d < 1e-40, "L={l} θ={theta} {pattern:?}: {d:e}");
            }
        }
    }
}

#[test]
fn bdg_energy_matches_many_body_ground_energy() {
    let ctx = ctx();
    let lat = LatticeSpec::new(4, Boundary::Antiperiodic).unwrap();
    let p = InitialParams::from_theta(PI / 6.0, 1.0, InitialPattern::Ferromagnetic).unwrap();
    let (_, e_bdg) = gaussian::ground_state(&initial_bdg_matrix::<T>(&p, &lat), &ctx).unwrap();
    let c = initial_couplings::<T>(&p, &lat);
    let h = ed::build_hamiltonian(&c.hopping, Some(&c.pairing), &c.chemical).unwrap();
    let e_ed = ed::ground_energy_even(&h, &ctx).unwrap();
    let d = (e_bdg + bdg_constant::<T>(&p, &lat) - e_ed).abs().to_f64();
    assert!(d < 1e-50, "{d:e}");
}

#[test]
fn normalised_evolution_matches_oracle() {
    let ctx = ctx();
    for (gamma, pattern) in [
        (0.4, InitialPattern::Ferromagnetic),
        (0.8, InitialPattern::Ferromagnetic),
        (0.6, InitialPattern::Antiferromagnetic),
    ] {
        let mut pr = prepare(8, PI / 6.0, gamma, pattern);
        let kg = gaussian::make_propagator(&pr.h, 0.1, &ctx).unwrap();
        let ke = ed::make_propagator(&pr.many_body, 0.1, &ctx).unwrap();
        for _ in 0..4 {
            pr.psi = ed::evolve_normalized(&pr.psi, &ke, 5).unwrap();
            pr.state = gaussian::evolve(&pr.state, &kg, 5, 1, &ctx).unwrap();
            let g = gaussian::correlations(&pr.state, &ctx).unwrap();
            let d = max_diff(&g, &pr.psi.correlations());
            assert!(d < 1e-40, "γ={gamma} t={}: {d:e}", pr.state.time());
        }
    }
}

#[test]
fn single_engine_step_matches_oracle_at_l6() {
    let ctx = ctx();
    let pr = prepare(6, PI / 6.0, 0.6, InitialPattern::Ferromagnetic);
    let kg = gaussian::make_propagator(&pr.h, 0.05, &ctx).unwrap();
    let ke = ed::make_propagator(&pr.many_body, 0.05, &ctx).unwrap();
    let psi = ed::evolve_normalized(&pr.psi, &ke, 1).unwrap();
    let st = gaussian::evolve(&pr.state, &kg, 1, 1, &ctx).unwrap();
    let g = gaussian::correlations(&st, &ctx).unwrap();
    for (a, b) in g.density().iter().zip(psi.density()) {
        assert!((*a - b).abs().to_f64() < 1e-50);
    }
}

#[test]
fn hermitian_currents_close_the_continuity_equation() {
    let ctx = ctx();
    let mut pr = prepare(8, PI / 3.0, 0.0, InitialPattern::Ferromagnetic);
    let ke = ed::make_propagator(&pr.many_body, 0.7, &ctx).unwrap();
    pr.psi = ed::evolve_normalized(&pr.psi, &ke, 1).unwrap();
    let ev = EvolutionParams::new(1.0, 0.0, Boundary::Open).unwrap();
    let dc = observables::density_current(&pr.psi.correlations(), &ev, &ctx).unwrap();
    let dn = ed::density_derivative(&pr.psi, &pr.many_body);
    let mut moving = 0.0f64;
    for j in 0..8 {
        let into = if j > 0 { dc.current[j - 1] } else { T::ZERO };
        let out = if j < 7 { dc.current[j] } else { T::ZERO };
        let d = (dn[j] - (into - out)).abs().to_f64();
        assert!(d < 1e-50, "site {j}: {d:e}");
        moving = moving.max(dn[j].abs().to_f64());
    }
    assert!(moving > 1e-3, "edge dynamics expected");
}

#[test]
fn periodic_wrap_current_closes_continuity() {
    let ctx = ctx();
    let l = 6;
    let lat = LatticeSpec::new(l, Boundary::Antiperiodic).unwrap();
    let p = InitialParams::from_theta(PI / 3.0, 1.0, InitialPattern::Ferromagnetic).unwrap();
    let psi0 = ed::build_initial_state::<T>(InitialConstruction::CatState, &p, &lat, &ctx).unwrap();
    // evolve with a generic chain so the wrap bond carries current
    let mut ev = EvolutionParams::new(1.0, 0.0, Boundary::Antiperiodic).unwrap();
    let mut h = hn_matrix::<T>(&ev, l).unwrap();
    h[(0, 0)].re = T::from_f64(0.3);
    h[(2, 2)].re = T::from_f64(-0.2);
    let mb = ed::build_hamiltonian(&h, None, &vec![T::ZERO; l]).unwrap();
    let ke = ed::make_propagator(&mb, 0.5, &ctx).unwrap();
    let psi = ed::evolve_normalized(&psi0, &ke, 1).unwrap();
    ev.boundary = Boundary::Antiperiodic;
    let dc = observables::density_current(&psi.correlations(), &ev, &ctx).unwrap();
    let dn = ed::density_derivative(&psi, &mb);
    let mut net = vec![T::ZERO; l];
    for (&(i, j, _), c) in lat.bonds().iter().zip(&dc.current) {
        net[i] -= *c;
        net[j] += *c;
    }
    for j in 0..l {
        assert!((dn[j] - net[j]).abs().to_f64() < 1e-50, "site {j}");
    }
}

#[test]
fn inflow_matches_exact_source_term() {
    // σ from engine finite differences, Richardson-extrapolated, against the
    // exact derivative of the normalised oracle state
    let ctx = ctx();
    let gamma = 0.4;
    let pr = prepare(8, PI / 6.0, gamma, InitialPattern::Ferromagnetic);
    let ev = EvolutionParams::new(1.0, gamma, Boundary::Open).unwrap();
    let bonds = LatticeSpec::new(8, Boundary::Open).unwrap().bonds();
    let t0 = 1.0;
    let ke = ed::make_propagator(&pr.many_body, t0, &ctx).unwrap();
    let psi = ed::evolve_normalized(&pr.psi, &ke, 1).unwrap();
    let dn = ed::density_derivative(&psi, &pr.many_body);
    let exact_dc = observables::density_current(&psi.correlations(), &ev, &ctx).unwrap();
    let current: Vec<f64> = exact_dc.current.iter().map(|x| x.to_f64()).collect();
    let dn: Vec<f64> = dn.iter().map(|x| x.to_f64()).collect();
    let zero = vec![0.0; 8];
    let exact = observables::inflow(&zero, &dn, 0.5, &current, &bonds).unwrap();

    let sigma_at = |delta: f64| {
        let density_at = |t: f64| {
            let k = gaussian::make_propagator(&pr.h, t, &ctx).unwrap();
            let st = gaussian::evolve(&pr.state, &k, 1, 1, &ctx).unwrap();
            let g = gaussian::correlations(&st, &ctx).unwrap();
            g.density().iter().map(|x| x.to_f64()).collect::<Vec<_>>()
        };
        observables::inflow(&density_at(t0 - delta), &density_at(t0 + delta), delta, &current, &bonds)
            .unwrap()
    };
    let coarse = sigma_at(0.02);
    let fine = sigma_at(0.01);
    let mut worst = 0.0f64;
    for j in 0..8 {
        let rich = (4.0 * fine[j] - coarse[j]) / 3.0;
        worst = worst.max((rich - exact[j]).abs());
    }
    assert!(worst < 1e-6, "{worst:e}");
    assert!(exact.iter().any(|v| v.abs() > 1e-3), "sources expected at γ > 0");
}

#[test]
fn density_rate_matches_exact_derivative() {
    let ctx = ctx();
    for (gamma, pattern) in [(0.0, InitialPattern::Ferromagnetic), (0.6, InitialPattern::Ferromagnetic), (0.6, InitialPattern::Antiferromagnetic)] {
        let pr = prepare(8, PI / 5.0, gamma, pattern);
        let t0 = 0.7;
        let ke = ed::make_propagator(&pr.many_body, t0, &ctx).unwrap();
        let psi = ed::evolve_normalized(&pr.psi, &ke, 1).unwrap();
        let exact = ed::density_derivative(&psi, &pr.many_body);
        let kg = gaussian::make_propagator(&pr.h, t0, &ctx).unwrap();
        let st = gaussian::evolve(&pr.state, &kg, 1, 1, &ctx).unwrap();
        let rate = observables::density_rate(&st.w, &pr.h).unwrap();
        for j in 0..8 {
            assert!((rate[j] - exact[j]).abs().to_f64() < 1e-40, "γ={gamma} site {j}");
        }
    }
}

fn exact_block_measures(psi: &FockVector<T>, sites: &[usize]) -> ed::ExactMeasures<T> {
    let rho = ed::reduced_density_matrix(psi, sites).unwrap();
    ed::exact_measures(&rho, &ctx()).unwrap()
}

#[test]
fn entropies_match_reduced_density_matrix() {
    let ctx = ctx();
    let mut pr = prepare(8, PI / 6.0, 0.4, InitialPattern::Ferromagnetic);
    let kg = gaussian::make_propagator(&pr.h, 0.5, &ctx).unwrap();
    let ke = ed::make_propagator(&pr.many_body, 0.5, &ctx).unwrap();
    let blocks: [&[usize]; 3] = [&[0, 1, 2], &[0, 2, 5], &[3, 4, 5, 6]];
    for _ in 0..3 {
        let g = gaussian::correlations(&pr.state, &ctx).unwrap();
        for sites in blocks {
            let e = ee_from_correlations(&g, sites, &ctx).unwrap();
            let x = exact_block_measures(&pr.psi, sites);
            assert!((e.von_neumann - x.von_neumann).abs().to_f64() < 1e-30, "{sites:?}");
            assert!((e.renyi2 - x.renyi2).abs().to_f64() < 1e-40, "{sites:?}");
        }
        pr.psi = ed::evolve_normalized(&pr.psi, &ke, 1).unwrap();
        pr.state = gaussian::evolve(&pr.state, &kg, 1, 1, &ctx).unwrap();
    }
}

#[test]
fn charged_moments_match_oracle() {
    let ctx = ctx();
    let mut pr = prepare(8, PI / 6.0, 0.4, InitialPattern::Ferromagnetic);
    let kg = gaussian::make_propagator(&pr.h, 0.5, &ctx).unwrap();
    let ke = ed::make_propagator(&pr.many_body, 0.5, &ctx).unwrap();
    let blocks: [&[usize]; 2] = [&[0, 1, 2, 3], &[1, 4, 6]];
    for _ in 0..3 {
        let g = gaussian::correlations(&pr.state, &ctx).unwrap();
        for sites in blocks {
            let rho = ed::reduced_density_matrix(&pr.psi, sites).unwrap();
            for alpha in [PI / 7.0, PI / 3.0, -PI / 3.0, 0.0] {
                let a = T::from_f64(alpha);
                let z = charged_moment(&g, sites, a, &ctx).unwrap();
                let want = ed::charged_moment_exact(&rho, a);
                assert!((z - want).abs().to_f64() < 1e-40, "{sites:?} α={alpha}");
            }
            let ea = ea_renyi2(&g, sites, 64, 1e-8, &ctx).unwrap();
            let x = ed::exact_measures(&rho, &ctx).unwrap();
            assert!((ea.delta_s2 - x.asymmetry).abs().to_f64() < 1e-40, "{sites:?}");
            assert!(x.asymmetry.to_f64() > 1e-6, "initial state breaks the symmetry");
        }
        pr.psi = ed::evolve_normalized(&pr.psi, &ke, 1).unwrap();
        pr.state = gaussian::evolve(&pr.state, &kg, 1, 1, &ctx).unwrap();
    }
}

#[test]
fn pair_spectrum_of_a_block_matches_oracle_two_point_function() {
    let ctx = ctx();
    let mut pr = prepare(8, PI / 6.0, 0.4, InitialPattern::Ferromagnetic);
    let kg = gaussian::make_propagator(&pr.h, 1.0, &ctx).unwrap();
    let ke = ed::make_propagator(&pr.many_body, 1.0, &ctx).unwrap();
    pr.psi = ed::evolve_normalized(&pr.psi, &ke, 1).unwrap();
    pr.state = gaussian::evolve(&pr.state, &kg, 1, 1, &ctx).unwrap();
    let sites = [0, 1, 2, 3];
    let ours = nhskin_core::linalg::pair_spectrum(
        &gaussian::correlations(&pr.state, &ctx).unwrap().block_over(&sites),
        &ctx,
    )
    .unwrap();
    let oracle =
        nhskin_core::linalg::pair_spectrum(&pr.psi.correlations().block_over(&sites), &ctx).unwrap();
    for (a, b) in ours.iter().zip(&oracle) {
        assert!((*a - *b).abs().to_f64() < 1e-40);
    }
}
