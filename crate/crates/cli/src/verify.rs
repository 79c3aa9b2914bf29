//! Oracle-equivalence suite: every point of a small scenario is run through
//! the Gaussian pipeline and compared sample by sample with exact
//! diagonalisation of the same chain.

use crate::config::{PointConfig, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::record::RunRecord;
use crate::runner::run_point;
use nhskin_core::ed::{self, FockVector, InitialConstruction};
use nhskin_core::model::{hn_matrix, EvolutionParams, InitialParams, LatticeSpec};
use nhskin_core::{with_precision, CMatrix, Cx, PrecisionContext, Real};
use serde::Serialize;

/// Agreement required for densities, currents and entropies.
pub const TOLERANCE: f64 = 1e-8;
/// Agreement required for the asymmetry, which goes through a quadrature.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-6;

/// Largest deviation per observable for one point.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Deviation {
    pub id: String,
    pub samples: usize,
    pub density: f64,
    pub current: f64,
    pub von_neumann: f64,
    pub renyi2: f64,
    pub asymmetry: f64,
}

impl Deviation {
    pub fn passes(&self) -> bool {
        self.samples > 0
            && [self.density, self.current, self.von_neumann, self.renyi2]
                .iter()
                .all(|d| *d <= TOLERANCE)
            && self.asymmetry <= ASYMMETRY_TOLERANCE
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub points: Vec<Deviation>,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(Deviation::passes)
    }

    /// Worst deviation per observable over all points.
    pub fn worst(&self) -> Deviation {
        let mut w = Deviation {
            id: "all".into(),
            ..Default::default()
        };
        for d in &self.points {
            w.samples += d.samples;
            w.density = w.density.max(d.density);
            w.current = w.current.max(d.current);
            w.von_neumann = w.von_neumann.max(d.von_neumann);
            w.renyi2 = w.renyi2.max(d.renyi2);
            w.asymmetry = w.asymmetry.max(d.asymmetry);
        }
        w
    }
}

/// Exact observables of one sample.
struct Exact {
    density: Vec<f64>,
    current: Vec<f64>,
    entropy: Option<(f64, f64)>,
    asymmetry: Option<f64>,
}

/// Runs both engines on every point of `config`.
pub fn verify(config: &ScenarioConfig) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for p in config.points() {
        let record = run_point(&p)?;
        if let crate::record::RunStatus::Failed { time, reason } = &record.manifest.status {
            return Err(CliError::RunFailed {
                run: p.id(),
                time: *time,
                reason: reason.clone(),
            });
        }
        let exact = exact_series(&p)?;
        report.points.push(compare(&record, &exact));
    }
    Ok(report)
}

fn compare(r: &RunRecord, exact: &[Exact]) -> Deviation {
    let d = &r.data;
    let diff = |a: &[f64], b: &[f64]| -> f64 {
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let mut out = Deviation {
        id: r.manifest.id.clone(),
        samples: exact.len().min(d.times.len()),
        ..Default::default()
    };
    if exact.len() != d.times.len() {
        out.samples = 0;
    }
    for (k, e) in exact.iter().enumerate().take(out.samples) {
        if let (Some(n), Some(c)) = (d.density.get(k), d.current.get(k)) {
            out.density = out.density.max(diff(n, &e.density));
            out.current = out.current.max(diff(c, &e.current));
        } else {
            out.density = f64::INFINITY;
        }
        if let Some((svn, s2)) = e.entropy {
            let (a, b) = d.entropy.get(k).copied().unwrap_or((f64::INFINITY, f64::INFINITY));
            out.von_neumann = out.von_neumann.max((a - svn).abs());
            out.renyi2 = out.renyi2.max((b - s2).abs());
        }
        if let Some(ea) = e.asymmetry {
            let a = d.asymmetry.get(k).copied().unwrap_or(f64::INFINITY);
            out.asymmetry = out.asymmetry.max((a - ea).abs());
        }
    }
    out
}

fn exact_series(p: &PointConfig) -> Result<Vec<Exact>> {
    let ctx = p.context()?;
    with_precision!(ctx, T => exact_typed::<T>(p, &ctx))
}

fn exact_typed<T: Real>(p: &PointConfig, ctx: &PrecisionContext) -> Result<Vec<Exact>> {
    let numerical = |e: nhskin_core::Error| CliError::Numerical {
        run: p.id(),
        at: None,
        source: e,
    };
    let prep = LatticeSpec::new(p.sites, p.prepare_boundary).map_err(numerical)?;
    let evol = LatticeSpec::new(p.sites, p.evolve_boundary).map_err(numerical)?;
    let init = InitialParams::from_theta(p.theta.radians(), p.hopping, p.pattern).map_err(numerical)?;
    let ev = EvolutionParams::new(p.hopping, p.gamma, p.evolve_boundary).map_err(numerical)?;
    let mut psi: FockVector<T> =
        ed::build_initial_state(InitialConstruction::GroundState, &init, &prep, ctx).map_err(numerical)?;
    let zeros = vec![T::zero(); p.sites];
    let h = ed::build_hamiltonian(&hn_matrix::<T>(&ev, p.sites).map_err(numerical)?, None, &zeros)
        .map_err(numerical)?;
    let k = ed::make_propagator(&h, p.dt, ctx).map_err(numerical)?;
    // I_{i→j} = iJs (c_j† c_i − c_i† c_j) as many-body operators
    let currents = evol
        .bonds()
        .into_iter()
        .map(|(i, j, s)| {
            let mut a = CMatrix::<T>::zeros(p.sites, p.sites);
            let x = T::from_f64(p.hopping) * T::from_i64(s);
            a[(j, i)] = Cx::new(T::zero(), x);
            a[(i, j)] = Cx::new(T::zero(), -x);
            ed::build_hamiltonian(&a, None, &zeros)
        })
        .collect::<nhskin_core::Result<Vec<_>>>()
        .map_err(numerical)?;
    let m = &p.measurements;
    let entropy_block = m.entropy.map(|b| b.sites());
    let ea_sites = m.asymmetry.map(|a| a.sites(p.sites));
    let mut out = Vec::new();
    let samples = p.steps() / m.stride;
    for s in 0..=samples {
        if s > 0 {
            psi = ed::evolve_normalized(&psi, &k, m.stride).map_err(numerical)?;
        }
        let measures = |sites: &[usize]| -> Result<ed::ExactMeasures<T>> {
            let rho = ed::reduced_density_matrix(&psi, sites).map_err(numerical)?;
            ed::exact_measures(&rho, ctx).map_err(numerical)
        };
        let entropy = match &entropy_block {
            Some(b) => {
                let x = measures(b)?;
                Some((x.von_neumann.to_f64(), x.renyi2.to_f64()))
            }
            None => None,
        };
        let asymmetry = match &ea_sites {
            Some(a) => Some(measures(a)?.asymmetry.to_f64()),
            None => None,
        };
        out.push(Exact {
            density: psi.density().iter().map(|x| x.to_f64()).collect(),
            current: currents.iter().map(|op| op.expectation(&psi).re.to_f64()).collect(),
            entropy,
            asymmetry,
        });
    }
    Ok(out)
}

/// How a preset's committed baseline is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// `<root>/<preset>/<run>/*.csv`, compared byte for byte.
    Tables,
    /// `<root>/<preset>.sha256`, the digest listing of every CSV.
    Digests,
}

pub fn baseline_kind(root: &std::path::Path, preset: &str) -> Option<BaselineKind> {
    if root.join(preset).is_dir() {
        Some(BaselineKind::Tables)
    } else if root.join(format!("{preset}.sha256")).is_file() {
        Some(BaselineKind::Digests)
    } else {
        None
    }
}

/// Checks a finished scenario directory against its committed baseline.
/// Returns the number of files compared.
pub fn check_baseline(root: &std::path::Path, preset: &str, scenario_dir: &std::path::Path) -> Result<usize> {
    match baseline_kind(root, preset) {
        Some(BaselineKind::Tables) => crate::sweep::compare_tree(scenario_dir, &root.join(preset)),
        Some(BaselineKind::Digests) => {
            let path = root.join(format!("{preset}.sha256"));
            let expected = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let path = scenario_dir.join("digests.sha256");
            let actual = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            crate::sweep::compare_digests(&actual, &expected)?;
            Ok(expected.lines().count())
        }
        None => Err(CliError::Baseline(format!("no baseline for {preset} under {}", root.display()))),
    }
}

/// Stores a finished scenario as the baseline of `preset`.
pub fn bless_baseline(
    root: &std::path::Path,
    preset: &str,
    scenario_dir: &std::path::Path,
    kind: BaselineKind,
) -> Result<()> {
    let io = |p: &std::path::Path| {
        let p = p.to_path_buf();
        move |e| CliError::io(&p, e)
    };
    match kind {
        BaselineKind::Digests => {
            let from = scenario_dir.join("digests.sha256");
            std::fs::create_dir_all(root).map_err(io(root))?;
            std::fs::copy(&from, root.join(format!("{preset}.sha256"))).map_err(io(&from))?;
        }
        BaselineKind::Tables => {
            let dest = root.join(preset);
            if dest.exists() {
                std::fs::remove_dir_all(&dest).map_err(io(&dest))?;
            }
            for run in std::fs::read_dir(scenario_dir).map_err(io(scenario_dir))? {
                let run = run.map_err(io(scenario_dir))?.path();
                if !run.is_dir() {
                    continue;
                }
                let target = dest.join(run.file_name().unwrap_or_default());
                std::fs::create_dir_all(&target).map_err(io(&target))?;
                for f in std::fs::read_dir(&run).map_err(io(&run))? {
                    let f = f.map_err(io(&run))?.path();
                    if f.extension().is_some_and(|x| x == "csv") {
                        std::fs::copy(&f, target.join(f.file_name().unwrap_or_default())).map_err(io(&f))?;
                    }
                }
            }
        }
    }
    Ok(())
}
