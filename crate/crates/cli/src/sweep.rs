//! Scenario execution over a worker pool, resume by manifest hash, and the
//! deterministic summary reduction.

use crate::config::{Format, PointConfig, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::record::{read_manifest, write_file, RunRecord, RunStatus, Table};
use crate::runner::run_point;
use nhskin_core::observables::first_crossing;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
    /// Skip points whose finished manifest carries the same config hash.
    pub resume: bool,
    /// Suppress per-point progress lines on stderr.
    pub quiet: bool,
}

/// Outcome of one point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointOutcome {
    Ran(RunStatus),
    Skipped,
    /// Rejected before any sample was taken.
    Error(String),
}

#[derive(Debug)]
pub struct SweepResult {
    pub directory: PathBuf,
    pub outcomes: Vec<(String, PointOutcome)>,
    /// Every run read back from disk, in point order. Points without a
    /// readable record are absent.
    pub records: Vec<RunRecord>,
    pub summary: Table,
    pub crossings: Table,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|(_, o)| matches!(o, PointOutcome::Error(_) | PointOutcome::Ran(RunStatus::Failed { .. })))
            .count()
    }

    /// Maps failures to the process error: a single-point scenario reports
    /// the run failure itself, a larger one a partial failure.
    pub fn into_result(self) -> Result<Self> {
        let failed = self.failures();
        if failed == 0 {
            return Ok(self);
        }
        if self.outcomes.len() == 1 {
            let (id, o) = &self.outcomes[0];
            return Err(match o {
                PointOutcome::Ran(RunStatus::Failed { time, reason }) => CliError::RunFailed {
                    run: id.clone(),
                    time: *time,
                    reason: reason.clone(),
                },
                PointOutcome::Error(m) => CliError::Config(m.clone()),
                _ => unreachable!("counted as a failure"),
            });
        }
        Err(CliError::PartialSweep {
            failed,
            total: self.outcomes.len(),
        })
    }

    pub fn record(&self, id: &str) -> Option<&RunRecord> {
        self.records.iter().find(|r| r.manifest.id == id)
    }
}

/// Output directory of a scenario.
pub fn scenario_dir(config: &ScenarioConfig) -> PathBuf {
    config.output.directory.join(&config.name)
}

fn finished(dir: &Path, p: &PointConfig) -> bool {
    read_manifest(&dir.join(p.id())).is_some_and(|m| m.config_hash == p.hash() && m.status.is_ok())
}

/// Runs every point of `config`, writes each run and the scenario-level
/// files, and reads everything back for the summary. Failing points are
/// recorded and the remaining points still run.
pub fn run_scenario(config: &ScenarioConfig, opts: &SweepOptions) -> Result<SweepResult> {
    config.validate()?;
    let dir = scenario_dir(config);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    write_file(&dir.join("scenario.toml"), &config.to_toml())?;
    let points = config.points();
    let total = points.len();
    let formats = &config.output.formats;
    let job = |(k, p): (usize, &PointConfig)| -> (String, PointOutcome) {
        let id = p.id();
        if opts.resume && finished(&dir, p) {
            if !opts.quiet {
                eprintln!("[{}/{total}] {id}: up to date", k + 1);
            }
            return (id, PointOutcome::Skipped);
        }
        let started = std::time::Instant::now();
        let outcome = match run_point(p).and_then(|r| r.write(&dir, formats).map(|_| r.manifest.status)) {
            Ok(status) => PointOutcome::Ran(status),
            Err(e) => PointOutcome::Error(e.to_string()),
        };
        if !opts.quiet {
            let what = match &outcome {
                PointOutcome::Ran(RunStatus::Completed) => "done".to_string(),
                PointOutcome::Ran(RunStatus::Failed { time, reason }) => format!("failed at t = {time}: {reason}"),
                PointOutcome::Error(m) => format!("error: {m}"),
                PointOutcome::Skipped => unreachable!(),
            };
            eprintln!("[{}/{total}] {id}: {what} ({:.1} s)", k + 1, started.elapsed().as_secs_f64());
        }
        (id, outcome)
    };
    let outcomes: Vec<(String, PointOutcome)> = match opts.threads {
        Some(1) => points.iter().enumerate().map(job).collect(),
        threads => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(|| points.par_iter().enumerate().map(job).collect())
        }
    };
    let records: Vec<RunRecord> = points
        .iter()
        .filter_map(|p| RunRecord::load(&dir.join(p.id())).ok())
        .collect();
    let summary = summary_table(&records);
    let crossings = crossing_table(&records);
    write_file(&dir.join("summary.csv"), &summary.to_csv())?;
    write_file(&dir.join("crossings.csv"), &crossings.to_csv())?;
    if formats.contains(&Format::Svg) {
        for (name, svg) in crate::svg::scenario_figures(&records) {
            write_file(&dir.join(format!("{name}.svg")), &svg)?;
        }
    }
    write_file(&dir.join("digests.sha256"), &digests(&dir, &points)?)?;
    Ok(SweepResult {
        directory: dir,
        outcomes,
        records,
        summary,
        crossings,
    })
}

fn block_start(p: &PointConfig) -> usize {
    let m = &p.measurements;
    m.entropy.map(|b| b.start).or(m.asymmetry.map(|a| a.start)).unwrap_or(0)
}

fn pattern(p: &PointConfig) -> String {
    serde_json::to_value(p.pattern)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn opt(x: Option<f64>) -> String {
    x.map_or("none".into(), |v| format!("{v}"))
}

/// One row per run, built only from what is on disk.
pub fn summary_table(records: &[RunRecord]) -> Table {
    let mut t = Table {
        header: [
            "id", "sites", "gamma", "theta", "pattern", "block_start", "status", "n_final", "ee_max",
            "ee_max_time", "ea_final", "wavefront_speed", "tau1", "tau2",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        rows: Vec::new(),
    };
    for r in records {
        let p = r.point();
        let f = &r.features;
        let status = match &r.manifest.status {
            RunStatus::Completed => "completed".to_string(),
            RunStatus::Failed { time, .. } => format!("failed@{time}"),
        };
        t.rows.push(vec![
            r.manifest.id.clone(),
            p.sites.to_string(),
            format!("{}", p.gamma),
            p.theta.to_string(),
            pattern(p),
            block_start(p).to_string(),
            status,
            opt(f.n_final),
            opt(f.ee_max.map(|e| e.1)),
            opt(f.ee_max.map(|e| e.0)),
            opt(f.ea_final),
            opt(f.front.map(|x| x.speed)),
            opt(f.tau1),
            opt(f.tau2),
        ]);
    }
    t
}

/// First crossing time of the asymmetry curves for every θ pair that shares
/// lattice size, pattern, γ and block position.
pub fn crossing_table(records: &[RunRecord]) -> Table {
    let mut t = Table {
        header: ["sites", "pattern", "gamma", "block_start", "theta_a", "theta_b", "crossing_time"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows: Vec::new(),
    };
    let with_ea: Vec<&RunRecord> = records.iter().filter(|r| !r.data.asymmetry.is_empty()).collect();
    for (i, a) in with_ea.iter().enumerate() {
        let pa = a.point();
        for b in &with_ea[i + 1..] {
            let pb = b.point();
            let same = pa.sites == pb.sites
                && pa.pattern == pb.pattern
                && pa.gamma == pb.gamma
                && block_start(pa) == block_start(pb)
                && pa.theta != pb.theta;
            if !same {
                continue;
            }
            let n = a.data.asymmetry.len().min(b.data.asymmetry.len());
            let times = &a.data.times[..n];
            let shared = times == &b.data.times[..n];
            let cross = shared
                .then(|| first_crossing(times, &a.data.asymmetry[..n], &b.data.asymmetry[..n]))
                .flatten();
            t.rows.push(vec![
                pa.sites.to_string(),
                pattern(pa),
                format!("{}", pa.gamma),
                block_start(pa).to_string(),
                pa.theta.to_string(),
                pb.theta.to_string(),
                opt(cross),
            ]);
        }
    }
    t
}

/// SHA-256 of every CSV of every run, one `<digest>  <id>/<file>` line each,
/// in point order then file name order.
pub fn digests(dir: &Path, points: &[PointConfig]) -> Result<String> {
    let mut out = String::new();
    for p in points {
        let run = dir.join(p.id());
        let mut files: Vec<PathBuf> = match std::fs::read_dir(&run) {
            Ok(it) => it
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect(),
            Err(_) => continue,
        };
        files.sort();
        for f in files {
            let bytes = std::fs::read(&f).map_err(|e| CliError::io(&f, e))?;
            let name = f.file_name().unwrap_or_default().to_string_lossy();
            out.push_str(&format!("{}  {}/{name}\n", hex::encode(Sha256::digest(&bytes)), p.id()));
        }
    }
    Ok(out)
}

/// Compares a digest listing against a committed one; lists every mismatch.
pub fn compare_digests(actual: &str, expected: &str) -> Result<()> {
    let parse = |s: &str| -> std::collections::BTreeMap<String, String> {
        s.lines()
            .filter_map(|l| l.split_once("  "))
            .map(|(d, f)| (f.to_string(), d.to_string()))
            .collect()
    };
    let (a, e) = (parse(actual), parse(expected));
    let mut problems = Vec::new();
    for (f, d) in &e {
        match a.get(f) {
            None => problems.push(format!("{f} missing")),
            Some(x) if x != d => problems.push(format!("{f} differs")),
            _ => {}
        }
    }
    problems.extend(a.keys().filter(|f| !e.contains_key(*f)).map(|f| format!("{f} unexpected")));
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Baseline(problems.join("; ")))
    }
}

/// Compares every CSV under `expected` (one subdirectory per run) with the
/// file of the same relative path under `actual`, byte for byte.
pub fn compare_tree(actual: &Path, expected: &Path) -> Result<usize> {
    let mut compared = 0;
    let mut problems = Vec::new();
    let runs = std::fs::read_dir(expected).map_err(|e| CliError::io(expected, e))?;
    let mut runs: Vec<PathBuf> = runs.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    runs.sort();
    for run in runs {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&run)
            .map_err(|e| CliError::io(&run, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|f| f.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        for f in files {
            let rel = f.strip_prefix(expected).expect("under the baseline root");
            let want = std::fs::read(&f).map_err(|e| CliError::io(&f, e))?;
            match std::fs::read(actual.join(rel)) {
                Ok(got) if got == want => compared += 1,
                Ok(_) => problems.push(format!("{} differs", rel.display())),
                Err(_) => problems.push(format!("{} missing", rel.display())),
            }
        }
    }
    if problems.is_empty() {
        Ok(compared)
    } else {
        Err(CliError::Baseline(problems.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_comparison_lists_every_problem() {
        let a = "aa  r1/n.csv\nbb  r1/d.csv\ncc  r2/x.csv\n";
        let e = "aa  r1/n.csv\nzz  r1/d.csv\nyy  r3/y.csv\n";
        assert!(compare_digests(a, a).is_ok());
        let Err(CliError::Baseline(m)) = compare_digests(a, e) else { panic!() };
        assert!(m.contains("r1/d.csv differs"));
        assert!(m.contains("r3/y.csv missing"));
        assert!(m.contains("r2/x.csv unexpected"));
        assert!(!m.contains("n.csv"));
    }
}
