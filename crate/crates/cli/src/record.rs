//! Run records: text tables at printed precision, `f64` copies for feature
//! extraction and plots, manifest, and the files they are written to.

use crate::config::{Format, PointConfig};
use crate::error::{CliError, Result};
use nhskin_core::observables::{extract_features, FrontFit, ProfileKind, ProfileSeries};
use nhskin_core::Real;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// A CSV table held as already formatted text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Baseline("empty CSV".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows: Vec<Vec<String>> = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        if let Some(r) = rows.iter().find(|r| r.len() != header.len()) {
            return Err(CliError::Baseline(format!("ragged CSV row {r:?}")));
        }
        Ok(Self { header, rows })
    }

    /// Column `name` parsed as `f64`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }
}

/// Times print with at most ten decimals and no trailing zeros, so that
/// `3 · 0.1` reads `0.3`.
pub fn fmt_time(t: f64) -> String {
    let s = format!("{t:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Diagnostic magnitudes: three significant digits are plenty.
pub fn fmt_small(x: f64) -> String {
    format!("{x:.2e}")
}

/// Largest defects seen over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub samples: usize,
    pub max_purity_defect: f64,
    pub max_isotropy_defect: f64,
    pub max_quadrature_change: f64,
    pub max_alpha_points: usize,
}

impl Diagnostics {
    pub fn note(&mut self, purity: f64, isotropy: f64) {
        self.samples += 1;
        self.max_purity_defect = self.max_purity_defect.max(purity);
        self.max_isotropy_defect = self.max_isotropy_defect.max(isotropy);
    }

    pub fn note_quadrature(&mut self, points: usize, change: f64) {
        self.max_alpha_points = self.max_alpha_points.max(points);
        self.max_quadrature_change = self.max_quadrature_change.max(change);
    }
}

/// Sampled observables of one run.
#[derive(Debug, Clone, Default)]
pub struct RunData {
    pub sites: usize,
    pub bonds: Vec<(usize, usize, i64)>,
    pub times: Vec<f64>,
    pub number: Vec<f64>,
    pub density: Vec<Vec<f64>>,
    pub current: Vec<Vec<f64>>,
    pub inflow_times: Vec<f64>,
    pub inflow: Vec<Vec<f64>>,
    pub rate: Vec<Vec<f64>>,
    /// `(S_vN, S_2)` per sample.
    pub entropy: Vec<(f64, f64)>,
    pub asymmetry: Vec<f64>,
    pub tables: BTreeMap<String, Table>,
    pub diagnostic_rows: Vec<Vec<String>>,
    pub diagnostics: Diagnostics,
}

fn values<T: Real>(xs: &[T], digits: usize) -> (Vec<f64>, Vec<String>) {
    (xs.iter().map(|x| x.to_f64()).collect(), xs.iter().map(|x| x.to_sci(digits)).collect())
}

impl RunData {
    pub fn new(p: &PointConfig, bonds: Vec<(usize, usize, i64)>) -> Self {
        let mut tables = BTreeMap::new();
        tables.insert("number".into(), Table::new(&["t", "N"]));
        let m = &p.measurements;
        if m.profiles {
            tables.insert("density".into(), Table::new(&["t", "site", "n"]));
            tables.insert("current".into(), Table::new(&["t", "bond", "I"]));
            tables.insert("inflow".into(), Table::new(&["t", "site", "sigma"]));
        }
        if m.rate {
            tables.insert("rate".into(), Table::new(&["t", "site", "dndt"]));
        }
        if m.entropy.is_some() {
            tables.insert("entropy".into(), Table::new(&["t", "S_vN", "S_2"]));
        }
        if m.asymmetry.is_some() {
            tables.insert("asymmetry".into(), Table::new(&["t", "dS2"]));
        }
        Self {
            sites: p.sites,
            bonds,
            tables,
            ..Default::default()
        }
    }

    fn table(&mut self, name: &str) -> &mut Table {
        self.tables.get_mut(name).expect("table registered for this configuration")
    }

    pub fn push_number<T: Real>(&mut self, t: f64, n: T, digits: usize) {
        self.number.push(n.to_f64());
        self.table("number").rows.push(vec![fmt_time(t), n.to_sci(digits)]);
    }

    pub fn push_profiles<T: Real>(&mut self, t: f64, density: &[T], current: &[T], digits: usize) {
        let ts = fmt_time(t);
        let (n, text) = values(density, digits);
        self.density.push(n);
        for (j, v) in text.into_iter().enumerate() {
            self.table("density").rows.push(vec![ts.clone(), (j + 1).to_string(), v]);
        }
        let (c, text) = values(current, digits);
        self.current.push(c);
        let labels: Vec<String> = self.bonds.iter().map(|&(i, j, _)| format!("{}-{}", i + 1, j + 1)).collect();
        for (b, v) in labels.into_iter().zip(text) {
            self.table("current").rows.push(vec![ts.clone(), b, v]);
        }
    }

    pub fn push_inflow<T: Real>(&mut self, t: f64, sigma: &[T], digits: usize) {
        let ts = fmt_time(t);
        let (s, text) = values(sigma, digits);
        self.inflow_times.push(t);
        self.inflow.push(s);
        for (j, v) in text.into_iter().enumerate() {
            self.table("inflow").rows.push(vec![ts.clone(), (j + 1).to_string(), v]);
        }
    }

    pub fn push_rate<T: Real>(&mut self, t: f64, rate: &[T], digits: usize) {
        let ts = fmt_time(t);
        let (r, text) = values(rate, digits);
        self.rate.push(r);
        for (j, v) in text.into_iter().enumerate() {
            self.table("rate").rows.push(vec![ts.clone(), (j + 1).to_string(), v]);
        }
    }

    pub fn push_entropy<T: Real>(&mut self, t: f64, svn: T, s2: T, digits: usize) {
        self.entropy.push((svn.to_f64(), s2.to_f64()));
        self.table("entropy")
            .rows
            .push(vec![fmt_time(t), svn.to_sci(digits), s2.to_sci(digits)]);
    }

    pub fn push_asymmetry<T: Real>(&mut self, t: f64, ds2: T, digits: usize) {
        self.asymmetry.push(ds2.to_f64());
        self.table("asymmetry").rows.push(vec![fmt_time(t), ds2.to_sci(digits)]);
    }

    /// The density profile as a feature-extraction series.
    pub fn density_series(&self) -> Option<ProfileSeries> {
        if self.density.is_empty() {
            return None;
        }
        Some(ProfileSeries {
            kind: ProfileKind::Density,
            times: self.times[..self.density.len()].to_vec(),
            values: self.density.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Failed { time: f64, reason: String },
}

impl RunStatus {
    pub fn failed(time: f64, e: &nhskin_core::Error) -> Self {
        RunStatus::Failed {
            time,
            reason: e.to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// Per-run features; `None` marks a feature that was looked for and absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunFeatures {
    pub n_initial: Option<f64>,
    pub n_final: Option<f64>,
    pub front: Option<FrontFit>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    /// `(time, value)` of the largest von Neumann entropy.
    pub ee_max: Option<(f64, f64)>,
    pub ee_final: Option<f64>,
    pub ea_initial: Option<f64>,
    pub ea_final: Option<f64>,
    /// Why front and `τ₂` were not extracted, when they could not be.
    pub note: Option<String>,
}

impl RunFeatures {
    fn from_data(p: &PointConfig, d: &RunData) -> Self {
        let mut f = RunFeatures {
            n_initial: d.number.first().copied(),
            n_final: d.number.last().copied(),
            ee_final: d.entropy.last().map(|e| e.0),
            ea_initial: d.asymmetry.first().copied(),
            ea_final: d.asymmetry.last().copied(),
            ..Default::default()
        };
        f.ee_max = d
            .entropy
            .iter()
            .zip(&d.times)
            .fold(None, |best: Option<(f64, f64)>, (e, &t)| match best {
                Some((_, v)) if v >= e.0 => best,
                _ => Some((t, e.0)),
            });
        if let Some(series) = d.density_series() {
            match extract_features(Some(&series), &[], &p.features) {
                Ok(r) => {
                    f.front = r.front;
                    f.tau1 = r.tau1;
                    f.tau2 = r.tau2;
                }
                Err(e) => f.note = Some(e.to_string()),
            }
        }
        f
    }

    /// Inverse of [`RunFeatures::table`].
    pub fn from_table(t: &Table) -> Self {
        let get = |k: &str| -> Option<f64> {
            t.rows.iter().find(|r| r[0] == k).and_then(|r| r[1].parse().ok())
        };
        let front = match (get("wavefront_speed"), get("wavefront_intercept")) {
            (Some(speed), Some(intercept)) => Some(FrontFit {
                speed,
                intercept,
                speed_error: get("wavefront_speed_error").unwrap_or(f64::NAN),
                points: get("wavefront_points").map_or(0, |p| p as usize),
            }),
            _ => None,
        };
        RunFeatures {
            n_initial: get("n_initial"),
            n_final: get("n_final"),
            front,
            tau1: get("tau1"),
            tau2: get("tau2"),
            ee_max: get("ee_max_time").zip(get("ee_max")),
            ee_final: get("ee_final"),
            ea_initial: get("ea_initial"),
            ea_final: get("ea_final"),
            note: None,
        }
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["metric", "value"]);
        let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v}"));
        let mut row = |k: &str, v: String| t.rows.push(vec![k.to_string(), v]);
        row("n_initial", opt(self.n_initial));
        row("n_final", opt(self.n_final));
        row("wavefront_speed", opt(self.front.map(|f| f.speed)));
        row("wavefront_speed_error", opt(self.front.map(|f| f.speed_error)));
        row("wavefront_intercept", opt(self.front.map(|f| f.intercept)));
        row("wavefront_points", opt(self.front.map(|f| f.points as f64)));
        row("tau1", opt(self.tau1));
        row("tau2", opt(self.tau2));
        row("ee_max", opt(self.ee_max.map(|e| e.1)));
        row("ee_max_time", opt(self.ee_max.map(|e| e.0)));
        row("ee_final", opt(self.ee_final));
        row("ea_initial", opt(self.ea_initial));
        row("ea_final", opt(self.ea_final));
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub config_hash: String,
    pub code_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub digits: u32,
    pub limbs: usize,
    pub status: RunStatus,
    pub diagnostics: Diagnostics,
    pub config: PointConfig,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub manifest: Manifest,
    pub data: RunData,
    pub features: RunFeatures,
}

impl RunRecord {
    pub fn new(point: PointConfig, data: RunData, status: RunStatus, started: u64, finished: u64) -> Self {
        let features = RunFeatures::from_data(&point, &data);
        let limbs = point.context().map_or(0, |c| c.limbs());
        let manifest = Manifest {
            id: point.id(),
            config_hash: point.hash(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: started,
            finished_unix: finished,
            digits: point.digits,
            limbs,
            status,
            diagnostics: data.diagnostics,
            config: point,
        };
        Self {
            manifest,
            data,
            features,
        }
    }

    pub fn point(&self) -> &PointConfig {
        &self.manifest.config
    }

    /// Every CSV table, by file stem.
    pub fn tables(&self) -> BTreeMap<String, Table> {
        let mut out = self.data.tables.clone();
        let mut diag = Table::new(&["t", "purity_defect", "isotropy_defect"]);
        diag.rows = self.data.diagnostic_rows.clone();
        out.insert("diagnostics".into(), diag);
        out.insert("features".into(), self.features.table());
        out
    }

    /// Writes the run under `root/<id>/` and returns that directory.
    pub fn write(&self, root: &Path, formats: &[Format]) -> Result<PathBuf> {
        let dir = root.join(&self.manifest.id);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let tables = self.tables();
        write_file(
            &dir.join("manifest.json"),
            &serde_json::to_string_pretty(&self.manifest).expect("manifest serialises"),
        )?;
        for f in formats {
            match f {
                Format::Csv => {
                    for (name, t) in &tables {
                        write_file(&dir.join(format!("{name}.csv")), &t.to_csv())?;
                    }
                }
                Format::Json => {
                    let json = serde_json::json!({
                        "manifest": self.manifest,
                        "features": self.features,
                        "tables": tables,
                    });
                    write_file(&dir.join("record.json"), &serde_json::to_string(&json).expect("record serialises"))?;
                }
                Format::Svg => {
                    for (name, svg) in crate::svg::run_figures(self) {
                        write_file(&dir.join(format!("{name}.svg")), &svg)?;
                    }
                }
            }
        }
        Ok(dir)
    }
}

impl RunRecord {
    /// Reads a run back from `dir`: manifest, every CSV table and the
    /// features table. Values are re-parsed from the printed text, so a
    /// loaded record is the same whether the run finished now or earlier.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = read_manifest(dir)
            .ok_or_else(|| CliError::Baseline(format!("{}: no readable manifest.json", dir.display())))?;
        let p = &manifest.config;
        let read = |name: &str| -> Result<Option<Table>> {
            let path = dir.join(format!("{name}.csv"));
            match std::fs::read_to_string(&path) {
                Ok(text) => Table::from_csv(&text).map(Some),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(CliError::io(&path, e)),
            }
        };
        let bonds = nhskin_core::model::LatticeSpec::new(p.sites, p.evolve_boundary)
            .map_err(|e| CliError::Config(e.to_string()))?
            .bonds();
        let mut data = RunData::new(p, bonds);
        let bad = |name: &str| CliError::Baseline(format!("{}: malformed {name}.csv", dir.display()));
        let number = read("number")?.ok_or_else(|| bad("number"))?;
        data.times = number.column("t").ok_or_else(|| bad("number"))?;
        data.number = number.column("N").ok_or_else(|| bad("number"))?;
        data.tables.insert("number".into(), number);
        let names: Vec<String> = data.tables.keys().cloned().collect();
        for name in names.iter().filter(|n| *n != "number") {
            let Some(t) = read(name)? else { continue };
            match name.as_str() {
                "density" => data.density = grouped(&t, "n").ok_or_else(|| bad(name))?.1,
                "current" => data.current = grouped(&t, "I").ok_or_else(|| bad(name))?.1,
                "inflow" => {
                    let (times, v) = grouped(&t, "sigma").ok_or_else(|| bad(name))?;
                    data.inflow_times = times;
                    data.inflow = v;
                }
                "rate" => data.rate = grouped(&t, "dndt").ok_or_else(|| bad(name))?.1,
                "entropy" => {
                    let a = t.column("S_vN").ok_or_else(|| bad(name))?;
                    let b = t.column("S_2").ok_or_else(|| bad(name))?;
                    data.entropy = a.into_iter().zip(b).collect();
                }
                "asymmetry" => data.asymmetry = t.column("dS2").ok_or_else(|| bad(name))?,
                _ => {}
            }
            data.tables.insert(name.clone(), t);
        }
        if let Some(t) = read("diagnostics")? {
            data.diagnostic_rows = t.rows;
        }
        data.diagnostics = manifest.diagnostics;
        let features = match read("features")? {
            Some(t) => RunFeatures::from_table(&t),
            None => RunFeatures::from_data(p, &data),
        };
        Ok(Self {
            manifest,
            data,
            features,
        })
    }
}

/// Splits a long-format `(t, label, value)` table into per-time rows.
fn grouped(t: &Table, value: &str) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let v = t.header.iter().position(|h| h == value)?;
    let mut times: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut last: Option<&str> = None;
    for r in &t.rows {
        if last != Some(r[0].as_str()) {
            times.push(r[0].parse().ok()?);
            rows.push(Vec::new());
            last = Some(&r[0]);
        }
        rows.last_mut()?.push(r[v].parse().ok()?);
    }
    Some((times, rows))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads `<dir>/manifest.json`, if present and well formed.
pub fn read_manifest(dir: &Path) -> Option<Manifest> {
    let text = std::fs::read_to_string(dir.join("manifest.json")).ok()?;
    serde_json::from_str(&text).ok()
}
