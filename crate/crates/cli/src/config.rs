//! Scenario configuration, its validation and expansion into single runs.

use crate::angle::Angle;
use crate::error::{CliError, Result};
use nhskin_core::model::{theta_to_params, Boundary, InitialPattern};
use nhskin_core::observables::{FeatureSettings, Stencil};
use nhskin_core::precision::max_digits;
use nhskin_core::PrecisionContext;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// A scenario: a small grid of runs sharing lattice, time grid and
/// measurements. Every field is echoed into each run's manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Free text carried into manifests, e.g. where a parameter came from.
    #[serde(default)]
    pub notes: String,
    pub lattice: LatticeConfig,
    pub initial: InitialConfig,
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub precision: PrecisionConfig,
    #[serde(default)]
    pub measurements: MeasurementConfig,
    #[serde(default)]
    pub features: FeatureSettings,
    #[serde(default)]
    pub output: OutputConfig,
    /// Extra grid axes; absent means a single lattice size and block position.
    #[serde(default)]
    pub sweep: SweepAxes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub sites: usize,
    #[serde(default = "antiperiodic")]
    pub prepare_boundary: Boundary,
    #[serde(default = "open")]
    pub evolve_boundary: Boundary,
}

fn antiperiodic() -> Boundary {
    Boundary::Antiperiodic
}

fn open() -> Boundary {
    Boundary::Open
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "ferromagnetic")]
    pub pattern: InitialPattern,
    pub thetas: Vec<Angle>,
}

fn ferromagnetic() -> InitialPattern {
    InitialPattern::Ferromagnetic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    #[serde(default = "one")]
    pub hopping: f64,
    pub gammas: Vec<f64>,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "one_u64")]
    pub renorm_every: u64,
}

fn one() -> f64 {
    1.0
}

fn one_u64() -> u64 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionConfig {
    /// Decimal digits; defaults to 64 up to 32 sites and 128 beyond.
    pub digits: Option<u32>,
}

/// A contiguous block `start .. start + length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    #[serde(default)]
    pub start: usize,
    pub length: usize,
}

impl BlockSpec {
    pub fn sites(&self) -> Vec<usize> {
        (self.start..self.start + self.length).collect()
    }
}

/// Which side of the bipartition the asymmetry is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// The block itself.
    Block,
    /// Everything outside the block (the kept part when the block is traced out).
    #[default]
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymmetrySpec {
    #[serde(default)]
    pub start: usize,
    pub length: usize,
    #[serde(default)]
    pub region: Region,
}

impl AsymmetrySpec {
    pub fn sites(&self, l: usize) -> Vec<usize> {
        let block = BlockSpec {
            start: self.start,
            length: self.length,
        }
        .sites();
        match self.region {
            Region::Block => block,
            Region::Complement => (0..l).filter(|j| !block.contains(j)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementConfig {
    /// Steps between samples; the sampling interval is `stride · dt`.
    pub stride: u64,
    /// Density, current and inflow profiles.
    pub profiles: bool,
    /// Exact `dn_j/dt` from the generator.
    pub rate: bool,
    /// Finite-difference stencil for `dn_j/dt` in the inflow.
    pub inflow_stencil: Stencil,
    pub entropy: Option<BlockSpec>,
    pub asymmetry: Option<AsymmetrySpec>,
    /// Starting charge-phase grid; refined until stable.
    pub n_alpha: usize,
    /// Largest accepted change of ΔS₂ between successive grids.
    pub quadrature_budget: f64,
    /// Largest accepted `max |F + Fᵀ|` before a run counts as inaccurate.
    pub accuracy_budget: f64,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            stride: 1,
            profiles: true,
            rate: false,
            inflow_stencil: Stencil::Fourth,
            entropy: None,
            asymmetry: None,
            n_alpha: 64,
            quadrature_budget: 1e-12,
            accuracy_budget: 1e-20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("runs"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepAxes {
    /// Lattice sizes replacing `lattice.sites`.
    pub sites: Vec<usize>,
    /// Block start positions replacing the entropy and asymmetry `start`.
    pub block_starts: Vec<usize>,
}

/// One fully specified run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub scenario: String,
    pub sites: usize,
    pub prepare_boundary: Boundary,
    pub evolve_boundary: Boundary,
    pub pattern: InitialPattern,
    pub theta: Angle,
    pub hopping: f64,
    pub gamma: f64,
    pub dt: f64,
    pub t_max: f64,
    pub renorm_every: u64,
    pub digits: u32,
    pub measurements: MeasurementConfig,
    pub features: FeatureSettings,
}

impl PointConfig {
    /// Total evolution steps.
    pub fn steps(&self) -> u64 {
        (self.t_max / self.dt).round() as u64
    }

    /// Sampling interval.
    pub fn delta(&self) -> f64 {
        self.dt * self.measurements.stride as f64
    }

    /// Directory-safe identifier, unique within a scenario.
    pub fn id(&self) -> String {
        let pattern = match self.pattern {
            InitialPattern::Ferromagnetic => "fm",
            InitialPattern::Antiferromagnetic => "afm",
        };
        let mut id = format!("L{}-g{}-th{}-{pattern}", self.sites, self.gamma, self.theta.slug());
        let start = self
            .measurements
            .entropy
            .map(|b| b.start)
            .or(self.measurements.asymmetry.map(|a| a.start))
            .unwrap_or(0);
        if start != 0 {
            id.push_str(&format!("-at{start}"));
        }
        id
    }

    /// Short legend label.
    pub fn label(&self) -> String {
        format!("θ={}, γ={}", self.theta, self.gamma)
    }

    /// SHA-256 of the canonical JSON form; identical configs share it.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn context(&self) -> Result<PrecisionContext> {
        PrecisionContext::with_digits(self.digits).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        let e = &self.evolution;
        let m = &self.measurements;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("scenario name {:?} must be a plain non-empty word", self.name));
        }
        for l in self.all_sites() {
            if l < 2 || l % 2 != 0 {
                return bad(format!("sites must be even and at least 2, got {l}"));
            }
            for start in self.block_starts() {
                if let Some(b) = m.entropy {
                    if b.length == 0 || start + b.length > l {
                        return bad(format!("entropy block {start}+{} exceeds L = {l}", b.length));
                    }
                }
                if let Some(a) = m.asymmetry {
                    if a.length == 0 || start + a.length > l || (a.region == Region::Complement && a.length == l) {
                        return bad(format!("asymmetry block {start}+{} does not fit L = {l}", a.length));
                    }
                }
            }
        }
        if self.initial.thetas.is_empty() || e.gammas.is_empty() {
            return bad("need at least one θ and one γ".into());
        }
        if !(e.hopping > 0.0 && e.hopping.is_finite()) {
            return bad(format!("hopping must be positive, got {}", e.hopping));
        }
        if e.gammas.iter().any(|g| !g.is_finite()) {
            return bad("γ must be finite".into());
        }
        if !(e.dt > 0.0 && e.dt.is_finite()) || !(e.t_max >= 0.0 && e.t_max.is_finite()) {
            return bad(format!("need dt > 0 and t_max >= 0, got dt = {}, t_max = {}", e.dt, e.t_max));
        }
        let ratio = e.t_max / e.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return bad(format!("t_max = {} is not a multiple of dt = {}", e.t_max, e.dt));
        }
        if e.renorm_every == 0 || m.stride == 0 {
            return bad("renorm_every and stride must be at least 1".into());
        }
        if (ratio.round() as u64) % m.stride != 0 {
            return bad(format!("{} steps are not a multiple of the stride {}", ratio.round(), m.stride));
        }
        if let Some(d) = self.precision.digits {
            if d < 16 || d > max_digits() {
                return bad(format!("digits must lie in 16..={}, got {d}", max_digits()));
            }
        }
        if m.n_alpha < 16 || m.n_alpha % 2 != 0 {
            return bad(format!("n_alpha must be even and at least 16, got {}", m.n_alpha));
        }
        if !(m.quadrature_budget > 0.0) || !(m.accuracy_budget > 0.0) {
            return bad("budgets must be positive".into());
        }
        let f = &self.features;
        if !(f.front_fraction > 0.0 && f.front_fraction < 1.0) || !(f.stable_rate > 0.0) || !(f.stable_window > 0.0) {
            return bad("feature thresholds out of range".into());
        }
        if self.output.formats.is_empty() {
            return bad("no output format selected".into());
        }
        Ok(())
    }

    fn all_sites(&self) -> Vec<usize> {
        if self.sweep.sites.is_empty() {
            vec![self.lattice.sites]
        } else {
            self.sweep.sites.clone()
        }
    }

    fn block_starts(&self) -> Vec<usize> {
        if self.sweep.block_starts.is_empty() {
            let m = &self.measurements;
            vec![m.entropy.map(|b| b.start).or(m.asymmetry.map(|a| a.start)).unwrap_or(0)]
        } else {
            self.sweep.block_starts.clone()
        }
    }

    /// All runs in a fixed order: sites, then γ, then θ, then block position.
    pub fn points(&self) -> Vec<PointConfig> {
        let mut out = Vec::new();
        for l in self.all_sites() {
            let digits = self
                .precision
                .digits
                .unwrap_or_else(|| PrecisionContext::default_for_sites(l).digits());
            for &gamma in &self.evolution.gammas {
                for theta in &self.initial.thetas {
                    for start in self.block_starts() {
                        let mut m = self.measurements.clone();
                        if let Some(b) = m.entropy.as_mut() {
                            b.start = start;
                        }
                        if let Some(a) = m.asymmetry.as_mut() {
                            a.start = start;
                        }
                        out.push(PointConfig {
                            scenario: self.name.clone(),
                            sites: l,
                            prepare_boundary: self.lattice.prepare_boundary,
                            evolve_boundary: self.lattice.evolve_boundary,
                            pattern: self.initial.pattern,
                            theta: theta.clone(),
                            hopping: self.evolution.hopping,
                            gamma,
                            dt: self.evolution.dt,
                            t_max: self.evolution.t_max,
                            renorm_every: self.evolution.renorm_every,
                            digits,
                            measurements: m,
                            features: self.features,
                        });
                    }
                }
            }
        }
        out
    }

    /// Applies command-line overrides and re-validates.
    pub fn with_overrides(mut self, digits: Option<u32>, dt: Option<f64>, out: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = digits {
            self.precision.digits = Some(d);
        }
        if let Some(dt) = dt {
            self.evolution.dt = dt;
        }
        if let Some(o) = out {
            self.output.directory = o;
        }
        self.validate()?;
        Ok(self)
    }
}

/// Couplings implied by a tilt angle, for `prepare`.
pub fn derived_parameters(theta: &Angle, hopping: f64) -> (f64, f64) {
    theta_to_params(theta.radians(), hopping)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "tiny"
        [lattice]
        sites = 8
        [initial]
        thetas = ["pi/6", "pi/3"]
        [evolution]
        gammas = [0.0, 0.4]
        dt = 0.1
        t_max = 1.0
    "#;

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.lattice.prepare_boundary, Boundary::Antiperiodic);
        assert_eq!(c.lattice.evolve_boundary, Boundary::Open);
        let pts = c.points();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].digits, 64);
        assert_eq!(pts[1].theta.text(), "pi/3");
        assert_eq!(pts[2].gamma, 0.4);
        assert_eq!(pts[0].steps(), 10);
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        let again = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.points()[0].hash(), again.points()[0].hash());
    }

    #[test]
    fn rejects_bad_input() {
        for (from, to) in [
            ("t_max = 1.0", "t_max = 1.05"),
            ("sites = 8", "sites = 7"),
            ("dt = 0.1", "dt = -0.1"),
            ("gammas = [0.0, 0.4]", "gammas = []"),
            ("name = \"tiny\"", "name = \"tiny\"\nunknown = 1"),
        ] {
            let text = MINIMAL.replace(from, to);
            assert!(
                matches!(ScenarioConfig::from_toml(&text), Err(CliError::Config(_))),
                "{to}"
            );
        }
    }

    #[test]
    fn ids_distinguish_points() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        let ids: std::collections::BTreeSet<String> = c.points().iter().map(|p| p.id()).collect();
        assert_eq!(ids.len(), 4);
        assert!(ids.contains("L8-g0.4-thpi_6-fm"));
    }
}
