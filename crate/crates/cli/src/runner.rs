//! Prepare → evolve → measure for one point of a scenario.

use crate::config::PointConfig;
use crate::error::{CliError, Result};
use crate::record::{fmt_small, fmt_time, Diagnostics, RunData, RunRecord, RunStatus};
use nhskin_core::gaussian::{self, BogoliubovState};
use nhskin_core::model::{hn_matrix, initial_bdg_matrix, EvolutionParams, InitialParams, LatticeSpec};
use nhskin_core::observables::{self, density_current, ea_renyi2, ee_from_correlations};
use nhskin_core::{with_precision, CMatrix, PrecisionContext, Real};

/// Printed significant digits for a working precision.
pub fn printed_digits(ctx: &PrecisionContext) -> usize {
    (ctx.digits() as usize).min(30)
}

/// Runs one point. Engine failures do not discard the samples taken so far:
/// the record comes back with a failed status and the time of failure.
pub fn run_point(point: &PointConfig) -> Result<RunRecord> {
    let ctx = point.context()?;
    let started = timestamp();
    let (data, status) = with_precision!(ctx, T => run_typed::<T>(point, &ctx))?;
    Ok(RunRecord::new(point.clone(), data, status, started, timestamp()))
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Per-sample exact values kept for the inflow differences.
struct Sample<T> {
    density: Vec<T>,
    current: Vec<T>,
}

fn run_typed<T: Real>(p: &PointConfig, ctx: &PrecisionContext) -> Result<(RunData, RunStatus)> {
    let config = |e: nhskin_core::Error| CliError::Config(e.to_string());
    let prep = LatticeSpec::new(p.sites, p.prepare_boundary).map_err(config)?;
    let evol = LatticeSpec::new(p.sites, p.evolve_boundary).map_err(config)?;
    let init = InitialParams::from_theta(p.theta.radians(), p.hopping, p.pattern).map_err(config)?;
    let ev = EvolutionParams::new(p.hopping, p.gamma, p.evolve_boundary).map_err(config)?;
    let numerical = |at: Option<f64>| {
        let run = p.id();
        move |source: nhskin_core::Error| CliError::Numerical { run, at, source }
    };
    let (state, _) = gaussian::ground_state(&initial_bdg_matrix::<T>(&init, &prep), ctx).map_err(numerical(Some(0.0)))?;
    let h = hn_matrix::<T>(&ev, p.sites).map_err(numerical(None))?;
    let k = gaussian::make_propagator(&h, p.dt, ctx).map_err(numerical(None))?;

    let digits = printed_digits(ctx);
    let mut data = RunData::new(p, evol.bonds());
    let mut samples: Vec<Sample<T>> = Vec::new();
    let mut diag = Diagnostics::default();
    let n_samples = p.steps() / p.measurements.stride;
    let mut state: BogoliubovState<T> = state;
    let mut status = RunStatus::Completed;
    for s in 0..=n_samples {
        let t = s as f64 * p.delta();
        if s > 0 {
            match gaussian::evolve(&state, &k, p.measurements.stride, p.renorm_every, ctx) {
                Ok(next) => state = next,
                Err(e) => {
                    status = RunStatus::failed(t, &e);
                    break;
                }
            }
        }
        data.times.push(t);
        match measure(p, ctx, &state, &h, &ev, digits, &mut data, &mut diag) {
            Ok(sample) => samples.push(sample),
            Err(e) => {
                status = RunStatus::failed(t, &e);
                break;
            }
        }
    }
    let stencil = p.measurements.inflow_stencil;
    let r = stencil.reach();
    if p.measurements.profiles && samples.len() > 2 * r {
        let delta = T::from_f64(p.delta());
        let bonds = evol.bonds();
        for k in r..samples.len() - r {
            let window: Vec<&[T]> = samples[k - r..=k + r].iter().map(|s| s.density.as_slice()).collect();
            let sigma = stencil
                .derivative(&window, delta)
                .and_then(|rate| observables::inflow_from_rate(rate, &samples[k].current, &bonds))
                .map_err(numerical(Some(data.times[k])))?;
            data.push_inflow(data.times[k], &sigma, digits);
        }
    }
    data.diagnostics = diag;
    Ok((data, status))
}

#[allow(clippy::too_many_arguments)]
fn measure<T: Real>(
    p: &PointConfig,
    ctx: &PrecisionContext,
    state: &BogoliubovState<T>,
    h: &CMatrix<T>,
    ev: &EvolutionParams,
    digits: usize,
    data: &mut RunData,
    diag: &mut Diagnostics,
) -> nhskin_core::Result<Sample<T>> {
    let t = state.time();
    let purity = state.purity_defect();
    if purity > ctx.tolerance::<T>() {
        return Err(nhskin_core::Error::Purity {
            defect: purity.to_f64(),
        });
    }
    let mut g = gaussian::correlations_unchecked(&state.w);
    let isotropy = g.isotropy_defect().to_f64();
    if isotropy > p.measurements.accuracy_budget {
        return Err(nhskin_core::Error::NonConvergence(format!(
            "accuracy budget exceeded: max |F + Fᵀ| = {isotropy:e} > {:e}",
            p.measurements.accuracy_budget
        )));
    }
    g.symmetrize();
    diag.note(purity.to_f64(), isotropy);
    data.diagnostic_rows
        .push(vec![fmt_time(t), fmt_small(purity.to_f64()), fmt_small(isotropy)]);

    let m = &p.measurements;
    let dc = density_current(&g, ev, ctx)?;
    data.push_number(t, dc.total, digits);
    if m.profiles {
        data.push_profiles(t, &dc.density, &dc.current, digits);
    }
    if m.rate {
        let rate = observables::density_rate(&state.w, h)?;
        data.push_rate(t, &rate, digits);
    }
    if let Some(block) = m.entropy {
        let e = ee_from_correlations(&g, &block.sites(), ctx)?;
        data.push_entropy(t, e.von_neumann, e.renyi2, digits);
    }
    if let Some(spec) = m.asymmetry {
        let a = ea_renyi2(&g, &spec.sites(p.sites), m.n_alpha, m.quadrature_budget, ctx)?;
        diag.note_quadrature(a.n_alpha, a.quadrature_change);
        data.push_asymmetry(t, a.delta_s2, digits);
    }
    Ok(Sample {
        density: dc.density,
        current: dc.current,
    })
}
