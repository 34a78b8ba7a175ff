//! Command-line front end for the fluid-antenna ISCSC simulator.

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use iscsc_sim::emit::{emit_results, OutputFormat, RunManifest};
use iscsc_sim::experiments::{
    run_crb_sweep, run_region_sweep, run_single, Baseline, ExperimentKind, ExperimentSpec,
    RowStatus,
};
use iscsc_sim::{validate_crb, ConfigFile, HarnessError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "iscsc-sim",
    about = "Fluid-antenna ISCSC base-station simulator and optimizer",
    version
)]
struct Cli {
    /// Output format for result rows.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Region,
    Crb,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one scenario and report the achieved operating point.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Scenario seed (defaults to the config's seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep the movable-region area or the normalized estimation bound.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated, strictly increasing sweep values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Scenario draws per sweep point.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Monte Carlo check of the echo-estimation error bound.
    ValidateCrb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let format: OutputFormat = cli.format.into();
    match cli.command {
        Command::Run { config, seed, out } => {
            let file = ConfigFile::load(&config).context("loading config")?;
            let mut cfg = file.to_system_config()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let seed = cfg.seed;
            let (row, outcome) = run_single(&cfg, seed)?;
            let manifest = RunManifest::new(format!("run --seed {seed}"), seed, file);
            emit_results(
                &[row.clone()],
                ExperimentKind::SingleRun,
                format,
                &out,
                &manifest,
            )?;
            match row.status {
                RowStatus::Ok => {
                    let o = outcome.expect("ok row has an outcome");
                    println!(
                        "s_min = {} bits (recovered), relaxed = {} bits, epochs = {}, p_cs = {} W, p_comp = {} W",
                        row.s_min_bits,
                        o.trace.relaxed_s_min,
                        row.epochs,
                        row.p_cs_w,
                        row.p_comp_w
                    );
                    Ok(ExitCode::SUCCESS)
                }
                RowStatus::Infeasible => {
                    eprintln!("infeasible configuration: no operating point satisfies the constraints");
                    Ok(ExitCode::from(2))
                }
                RowStatus::Error => {
                    eprintln!("run failed; see results for details");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Sweep {
            kind,
            config,
            values,
            trials,
            seed,
            out,
        } => {
            let file = ConfigFile::load(&config).context("loading config")?;
            let mut cfg = file.to_system_config()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (kind, label) = match kind {
                SweepKind::Region => (ExperimentKind::RegionSweep, "region"),
                SweepKind::Crb => (ExperimentKind::CrbSweep, "crb"),
            };
            let spec = ExperimentSpec {
                kind,
                values,
                baselines: vec![Baseline::Proposed, Baseline::RandomFa, Baseline::Fpa],
                trials,
                seed: cfg.seed,
            };
            let rows = match kind {
                ExperimentKind::RegionSweep => run_region_sweep(&spec, &cfg)?,
                ExperimentKind::CrbSweep => run_crb_sweep(&spec, &cfg)?,
                _ => unreachable!(),
            };
            let manifest = RunManifest::new(
                format!("sweep --kind {label} --trials {trials}"),
                spec.seed,
                file,
            );
            let written = emit_results(&rows, kind, format, &out, &manifest)?;
            let ok = rows.iter().filter(|r| r.status == RowStatus::Ok).count();
            println!(
                "{} rows ({} ok) written to {}",
                rows.len(),
                ok,
                written[0].display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateCrb {
            config,
            trials,
            seed,
            out,
        } => {
            let file = ConfigFile::load(&config).context("loading config")?;
            let mut cfg = file.to_system_config()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let v = validate_crb(&cfg, trials, cfg.seed)?;
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::Io {
                path: out.display().to_string(),
                source: e,
            })?;
            let path = out.join("crb_validation.json");
            let record = serde_json::json!({
                "trials": v.trials,
                "empirical_mse": v.empirical_mse,
                "crb": v.crb_value,
                "ratio": v.ratio,
                "frames": v.frames,
                "n_t": v.n_t,
                "n_r": v.n_r,
            });
            std::fs::write(&path, serde_json::to_string_pretty(&record)?)?;
            println!(
                "empirical MSE = {:.6e}, bound = {:.6e}, ratio = {:.4}",
                v.empirical_mse, v.crb_value, v.ratio
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
