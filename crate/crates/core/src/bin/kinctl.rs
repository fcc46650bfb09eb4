use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use kinetic_control::io::{emit_quiver, read_control, write_control, write_histograms};
use kinetic_control::objective::cost_estimate;
use kinetic_control::{initial_ensemble, run_adjoint_oneshot, run_forward, Result, RunReport, SimConfig};

#[derive(Parser)]
#[command(
    name = "kinctl",
    version,
    about = "Feedback control synthesis for a collisional kinetic model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the adjoint model backwards once and write the control field.
    SolveAdjoint {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the controlled forward model.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        control: Option<PathBuf>,
        /// Apply the time-averaged control at every step.
        #[arg(long)]
        averaged: bool,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        hist_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replace a control file by its stationary time average.
    AverageControl {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write quiver CSVs for a control file.
    EmitPlots {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate the cost of a control on a fresh forward run.
    EvaluateCost {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        control: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(config: Option<&PathBuf>, seed: Option<u64>) -> Result<SimConfig> {
    let mut cfg = match config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn load_control(cfg: &SimConfig, path: Option<&PathBuf>) -> Result<kinetic_control::ControlField> {
    match path {
        Some(p) => read_control(p),
        None => Ok(kinetic_control::ControlField::zeros(cfg.n_t, &cfg.grid()?)),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SolveAdjoint { config, out, seed } => {
            let cfg = load(config.as_ref(), seed)?;
            let adjoint = run_adjoint_oneshot(&cfg)?;
            write_control(&out, &adjoint.control)?;
            println!(
                "wrote {} ({} levels, adjoint particles at t=0: {})",
                out.display(),
                cfg.n_t + 1,
                adjoint.counts[0]
            );
        }
        Command::Simulate {
            config,
            control,
            averaged,
            report,
            hist_dir,
            seed,
        } => {
            let cfg = load(config.as_ref(), seed)?;
            let mut u = load_control(&cfg, control.as_ref())?;
            if averaged {
                u = u.averaged();
            }
            let start = Instant::now();
            let run = run_forward(&cfg, &u, initial_ensemble(&cfg)?)?;
            let rep = RunReport::from_run(&cfg, &run, &u, start.elapsed().as_secs_f64())?;
            if let Some(dir) = hist_dir {
                write_histograms(dir, &run.histograms)?;
            }
            match report {
                Some(path) => rep.write(path)?,
                None => print!("{}", rep.to_text()),
            }
        }
        Command::AverageControl { input, out, .. } => {
            write_control(&out, &read_control(&input)?.averaged())?;
        }
        Command::EmitPlots {
            input,
            out,
            config,
            seed,
        } => {
            let cfg = load(config.as_ref(), seed)?;
            let files = emit_quiver(&out, &read_control(&input)?, &cfg.grid()?)?;
            println!("wrote {} files to {}", files.len(), out.display());
        }
        Command::EvaluateCost { config, control, seed } => {
            let cfg = load(config.as_ref(), seed)?;
            let u = load_control(&cfg, control.as_ref())?;
            let run = run_forward(&cfg, &u, initial_ensemble(&cfg)?)?;
            let cost = cost_estimate(
                &run.ensembles,
                Some(&u),
                &cfg.grid()?,
                &cfg.objective(),
                &cfg.orbit(),
                run.initial_count(),
            );
            println!("{cost}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
