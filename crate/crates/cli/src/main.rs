use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use siegel_quant::transport::Kernel;

mod commands;
mod report;
mod suites;

use commands::TransportFlags;
use report::{Report, RunConfig};

/// Parallel transport over the Siegel upper half-space, with JSON reports.
#[derive(Debug, Parser)]
#[command(name = "siegel-quant", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Phase-space half-dimension for randomized suites (1 to 4).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=4))]
    n: Option<u64>,
    /// Override the tolerance of the main residual.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Gauss–Hermite nodes per dimension for quadrature checks.
    #[arg(long, global = true, default_value_t = 64)]
    nodes: usize,
    /// Fock truncation used for error norms and curvature.
    #[arg(long, global = true, default_value_t = 32)]
    trunc: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Geodesic between two points: {"from": Ω, "to": Ω'}.
    Geodesic {
        /// JSON input file; stdin when absent or `-`.
        input: Option<PathBuf>,
    },
    /// Transport a state: {"state": …, "from": Ω, "to": Ω', "via"?: Ω'', "phase"?: [re, im]}.
    Transport {
        input: Option<PathBuf>,
        /// Also transport the half-form and cross-check against the pairing times projection.
        #[arg(long)]
        corrected: bool,
        /// Recompute through an integral kernel and compare with the closed form.
        #[arg(long, value_enum)]
        kernel: Option<KernelArg>,
        /// Integrate the Fock-space ODE along the geodesic (n = 1).
        #[arg(long)]
        ode_check: bool,
        #[arg(long, default_value_t = 10_000)]
        ode_steps: usize,
    },
    /// Run an invariant suite.
    Verify {
        #[arg(value_enum)]
        suite: suites::Suite,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Bergman,
    Holomorphic,
}

impl From<KernelArg> for Kernel {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Bergman => Kernel::Bergman,
            KernelArg::Holomorphic => Kernel::Holomorphic,
        }
    }
}

fn read_input<T: DeserializeOwned>(path: Option<&PathBuf>) -> Result<T> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
            s
        }
    };
    serde_json::from_str(&text).context("parsing JSON input")
}

fn config(common: &Common) -> Result<RunConfig> {
    if let Some(t) = common.tol {
        if !(t > 0.0) {
            bail!("--tol must be positive");
        }
    }
    if common.nodes < 2 {
        bail!("--nodes must be at least 2");
    }
    if common.trunc < 4 {
        bail!("--trunc must be at least 4");
    }
    Ok(RunConfig {
        n: common.n.map(|n| n as usize),
        tol: common.tol,
        nodes: common.nodes,
        trunc: common.trunc,
        seed: common.seed,
    })
}

fn run(cli: &Cli) -> Result<Report> {
    let config = config(&cli.common)?;
    match &cli.command {
        Command::Geodesic { input } => commands::geodesic(read_input(input.as_ref())?, config),
        Command::Transport { input, corrected, kernel, ode_check, ode_steps } => {
            let flags = TransportFlags {
                corrected: *corrected,
                kernel: kernel.map(Kernel::from),
                ode_check: *ode_check,
                ode_steps: *ode_steps,
            };
            commands::transport(read_input(input.as_ref())?, flags, config)
        }
        Command::Verify { suite } => suites::run(*suite, config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &cli.common.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text + "\n") {
                eprintln!("error: writing {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => {
            // a closed pipe (e.g. `| head`) is not an error of the run
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    if let Some((name, check)) = report.first_failure() {
        eprintln!("FAIL {name}: {:.3e} exceeds {:.3e}", check.value, check.tolerance);
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
