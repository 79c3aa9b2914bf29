use clap::{Args, Parser, Subcommand};
use nhskin::config::{derived_parameters, Format, ScenarioConfig};
use nhskin::error::{CliError, Result};
use nhskin::presets;
use nhskin::record::RunRecord;
use nhskin::sweep::{run_scenario, SweepOptions};
use nhskin::verify::{self, BaselineKind};
use std::path::PathBuf;
use std::process::ExitCode;

/// Quench dynamics of U(1)-breaking pairing states under Hatano-Nelson hopping.
#[derive(Parser)]
#[command(name = "nhskin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario and print the couplings implied by each tilt angle.
    Prepare(Source),
    /// Run a scenario or preset.
    Run(RunArgs),
    /// Run every grid point of a scenario and write the summary tables.
    Sweep(RunArgs),
    /// Re-emit finished runs in other formats.
    Export(ExportArgs),
    /// Compare the Gaussian engine with exact diagonalisation, and optionally
    /// regenerate presets against committed baselines.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct Source {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: small, fig1, fig2, fig3.
    #[arg(long)]
    preset: Option<String>,
    /// Working precision in decimal digits.
    #[arg(long)]
    digits: Option<u32>,
    /// Evolution step.
    #[arg(long)]
    dt: Option<f64>,
    /// Output root; runs go to `<out>/<scenario>/<run>/`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<ScenarioConfig> {
        let c = match (&self.config, &self.preset) {
            (Some(path), None) => ScenarioConfig::load(path)?,
            (None, Some(name)) => presets::preset(name)?,
            _ => return Err(CliError::Config("give exactly one of --config or --preset".into())),
        };
        c.with_overrides(self.digits, self.dt, self.out.clone())
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Skip runs whose finished manifest matches the configuration.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct ExportArgs {
    /// A run directory, or a scenario directory holding several.
    #[arg(long)]
    from: PathBuf,
    /// Output formats.
    #[arg(long, value_delimiter = ',', default_value = "svg")]
    format: Vec<String>,
    /// Destination root; defaults to rewriting in place.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Baseline root; every preset with a baseline there is regenerated and compared.
    #[arg(long)]
    baselines: Option<PathBuf>,
    /// Restrict the baseline check to these presets.
    #[arg(long = "check", value_delimiter = ',')]
    check: Vec<String>,
    /// Store fresh outputs as the baselines instead of comparing.
    #[arg(long, requires = "baselines")]
    bless: bool,
    /// Skip the oracle comparison.
    #[arg(long)]
    no_oracle: bool,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(src) => prepare(&src),
        Command::Run(a) | Command::Sweep(a) => {
            let c = a.source.load()?;
            let opts = SweepOptions {
                threads: a.threads,
                resume: a.resume,
                quiet: false,
            };
            let r = run_scenario(&c, &opts)?;
            println!("{}", r.directory.display());
            print!("{}", r.summary.to_csv());
            r.into_result().map(|_| ())
        }
        Command::Export(a) => export(&a),
        Command::Verify(a) => verify_cmd(&a),
    }
}

fn prepare(src: &Source) -> Result<()> {
    let c = src.load()?;
    let points = c.points();
    println!("scenario {}: {} run(s)", c.name, points.len());
    for theta in &c.initial.thetas {
        let (pairing, chemical) = derived_parameters(theta, c.evolution.hopping);
        println!("  θ = {theta}: Δ = {pairing}, μ = {chemical}");
    }
    for p in &points {
        let ctx = p.context()?;
        println!(
            "  {}: {} steps, {} samples, {} digits ({} limbs)",
            p.id(),
            p.steps(),
            p.steps() / p.measurements.stride + 1,
            ctx.digits(),
            ctx.limbs()
        );
    }
    Ok(())
}

fn export(a: &ExportArgs) -> Result<()> {
    let formats = a
        .format
        .iter()
        .map(|f| match f.as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(CliError::Config(format!("unknown format {other:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let dirs: Vec<PathBuf> = if a.from.join("manifest.json").is_file() {
        vec![a.from.clone()]
    } else {
        let mut d: Vec<PathBuf> = std::fs::read_dir(&a.from)
            .map_err(|e| CliError::io(&a.from, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("manifest.json").is_file())
            .collect();
        d.sort();
        d
    };
    if dirs.is_empty() {
        return Err(CliError::Config(format!("no runs under {}", a.from.display())));
    }
    for dir in dirs {
        let r = RunRecord::load(&dir)?;
        let root = a.out.clone().unwrap_or_else(|| dir.parent().map(PathBuf::from).unwrap_or_default());
        println!("{}", r.write(&root, &formats)?.display());
    }
    Ok(())
}

fn verify_cmd(a: &VerifyArgs) -> Result<()> {
    if !a.no_oracle {
        let c = if a.source.config.is_none() && a.source.preset.is_none() {
            presets::preset("small")?.with_overrides(a.source.digits, a.source.dt, None)?
        } else {
            a.source.load()?
        };
        let report = verify::verify(&c)?;
        for d in &report.points {
            println!(
                "{:<24} samples {:>4}  n {:.1e}  I {:.1e}  S_vN {:.1e}  S_2 {:.1e}  dS2 {:.1e}  {}",
                d.id,
                d.samples,
                d.density,
                d.current,
                d.von_neumann,
                d.renyi2,
                d.asymmetry,
                if d.passes() { "ok" } else { "FAIL" }
            );
        }
        if !report.passes() {
            return Err(CliError::Baseline("oracle equivalence outside tolerance".into()));
        }
    }
    let Some(root) = &a.baselines else { return Ok(()) };
    let names: Vec<String> = if a.check.is_empty() {
        presets::names()
            .filter(|n| a.bless || verify::baseline_kind(root, n).is_some())
            .map(String::from)
            .collect()
    } else {
        a.check.clone()
    };
    let scratch = a.source.out.clone().unwrap_or_else(|| std::env::temp_dir().join("nhskin-baselines"));
    for name in names {
        let mut c = presets::preset(&name)?;
        c.output.directory = scratch.clone();
        let r = run_scenario(
            &c,
            &SweepOptions {
                threads: a.threads,
                resume: false,
                quiet: false,
            },
        )?
        .into_result()?;
        if a.bless {
            let kind = verify::baseline_kind(root, &name).unwrap_or(if c.lattice.sites <= 8 {
                BaselineKind::Tables
            } else {
                BaselineKind::Digests
            });
            verify::bless_baseline(root, &name, &r.directory, kind)?;
            println!("{name}: baseline stored");
        } else {
            let n = verify::check_baseline(root, &name, &r.directory)?;
            println!("{name}: {n} files identical");
        }
    }
    Ok(())
}
