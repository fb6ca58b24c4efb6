use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fkchain::experiments::{self, background_at, EntanglementReport, ExperimentConfig, Scenario, SolutionRecord};
use fkchain::modes::{classify_modes, write_spectrum_csv};
use fkchain::{Error, Result};

#[derive(Parser)]
#[command(name = "fkchain", version, about = "Solitons, normal modes and entanglement in the Frenkel-Kontorova chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Relax the configured background and write it out.
    Solve,
    /// Fluctuation spectrum of the configured background.
    Modes,
    /// Run an entropy scenario.
    Entropy,
    /// Run a negativity scenario.
    Negativity,
    /// Run a squeezing scenario.
    Squeeze,
    /// Run whatever scenario the config names.
    Sweep,
    /// Re-emit a saved report after checking its config hash.
    Report { input: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn sink(out: &Option<PathBuf>, name: &str) -> Result<Box<dyn Write>> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Ok(Box::new(File::create(dir.join(name))?))
        }
        None => Ok(Box::new(io::stdout())),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig> {
    let path = path.as_deref().ok_or_else(|| Error::Config("--config is required".into()))?;
    ExperimentConfig::load(path)
}

fn emit_report(report: &EntanglementReport, cli: &Cli) -> Result<()> {
    let mut w = sink(&cli.out, &format!("{}.{}", report.config.scenario.name(), cli.format.ext()))?;
    match cli.format {
        Format::Json => writeln!(w, "{}", report.to_json())?,
        Format::Csv => report.write_csv(&mut w)?,
    }
    for flag in &report.flags {
        log::warn!("{flag}");
    }
    Ok(())
}

fn run_checked(cli: &Cli, allowed: &[Scenario], what: &str) -> Result<()> {
    let cfg = load_config(&cli.config)?;
    if !allowed.is_empty() && !allowed.contains(&cfg.scenario) {
        return Err(Error::Config(format!("`{what}` cannot run scenario {}", cfg.scenario.name())));
    }
    emit_report(&experiments::run(&cfg)?, cli)
}

#[derive(Serialize)]
struct ModeRow {
    index: usize,
    omega_sq: f64,
    omega: f64,
    internal: bool,
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve => {
            let cfg = load_config(&cli.config)?;
            let bg = background_at(&cfg, cfg.chain.g)?;
            log::info!(
                "sector {}, energy {}, centers {:?}",
                bg.solution.sector.name(),
                bg.solution.energy,
                bg.solution.centers
            );
            let rec = SolutionRecord { chain: bg.spec, solution: bg.solution };
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    rec.save(&dir.join("solution.json"))
                }
                None => {
                    println!("{}", serde_json::to_string(&rec).map_err(|e| Error::Io(e.to_string()))?);
                    Ok(())
                }
            }
        }
        Command::Modes => {
            let cfg = load_config(&cli.config)?;
            let bg = background_at(&cfg, cfg.chain.g)?;
            let mut w = sink(&cli.out, &format!("spectrum.{}", cli.format.ext()))?;
            match cli.format {
                Format::Csv => write_spectrum_csv(&bg.basis, w),
                Format::Json => {
                    let internal = classify_modes(&bg.basis).internal;
                    let rows: Vec<ModeRow> = (0..bg.basis.len())
                        .map(|l| ModeRow {
                            index: l,
                            omega_sq: bg.basis.omega_sq[l],
                            omega: bg.basis.omega[l],
                            internal: internal.contains(&l),
                        })
                        .collect();
                    writeln!(w, "{}", serde_json::to_string_pretty(&rows).map_err(|e| Error::Io(e.to_string()))?)?;
                    Ok(())
                }
            }
        }
        Command::Entropy => run_checked(
            cli,
            &[
                Scenario::EntropyProfile,
                Scenario::AlphaFit,
                Scenario::MaxEntropySweep,
                Scenario::WeakCouplingProfile,
                Scenario::CorrelationCompare,
            ],
            "entropy",
        ),
        Command::Negativity => run_checked(
            cli,
            &[
                Scenario::SlidingBlocks,
                Scenario::LnVsSeparation,
                Scenario::BetaFit,
                Scenario::WkbCheck,
                Scenario::NoncriticalOscillation,
            ],
            "negativity",
        ),
        Command::Squeeze => run_checked(cli, &[Scenario::SqueezeSingle, Scenario::SqueezeDouble], "squeeze"),
        Command::Sweep => run_checked(cli, &[], "sweep"),
        Command::Report { input } => {
            let report = read_report(input)?;
            if report.config.hash() != report.config_hash {
                return Err(Error::Config(format!("{}: config hash does not match its config", input.display())));
            }
            emit_report(&report, cli)
        }
    }
}

fn read_report(path: &Path) -> Result<EntanglementReport> {
    EntanglementReport::from_json(&std::fs::read_to_string(path)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
