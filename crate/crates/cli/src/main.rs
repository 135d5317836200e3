//! Benchmark harness for accelerated optimization on manifolds.
//!
//! Subcommands: `run` executes one experiment and writes a CSV; `plot`
//! renders CSVs as a log-log SVG; `verify` runs the library's self-check
//! suites; `list-problems` shows the bundled problems and their defaults.

mod config;
mod csvio;
mod experiment;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riemann_accel_core::integrate::StepVersion;
use riemann_accel_core::verify::{all_pass, run_suite, SUITE_NAMES};

use config::{parse_config_file, resolve, Algorithm, Overrides, Problem};
use experiment::{run_experiment, Failure};

#[derive(Parser)]
#[command(name = "riemann-accel", about = "Accelerated optimization benchmarks on manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trajectory as CSV
    Run(RunArgs),
    /// Render one or more result CSVs as a log-log SVG plot
    Plot(PlotArgs),
    /// Run a self-check suite: geometry, dynamics, convergence, rescaling, or all
    Verify { suite: String },
    /// List the bundled problems and their default parameters
    ListProblems,
}

#[derive(Args)]
#[command(disable_version_flag = true)]
struct RunArgs {
    /// Problem: rayleigh, hyperbolic, or quadratic
    #[arg(long)]
    problem: Option<String>,
    /// Algorithm: bregman-I, bregman-II, rgd, or reference
    #[arg(long)]
    algo: Option<String>,
    /// Acceleration order p >= 2 of the dynamics
    #[arg(long)]
    p: Option<f64>,
    /// Rate constant C > 0 in front of the potential term
    #[arg(long = "C")]
    c: Option<f64>,
    /// Step size
    #[arg(long = "h")]
    h: Option<f64>,
    /// Weak-quasi-convexity constant in (0, 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Strong-convexity constant
    #[arg(long)]
    mu: Option<f64>,
    /// Domain diameter used for the curvature factor zeta
    #[arg(long)]
    diameter: Option<f64>,
    /// Iteration budget
    #[arg(long)]
    iters: Option<usize>,
    /// Seed for the problem instance and the starting point
    #[arg(long, env = "RIEMANN_ACCEL_SEED")]
    seed: Option<u64>,
    /// Discretization version of the bregman algorithm
    #[arg(long = "version", value_parser = clap::value_parser!(u8).range(1..=2))]
    version: Option<u8>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value config file; flags given here win over it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ambient dimension of the problem
    #[arg(long)]
    n: Option<usize>,
    /// Smallest eigenvalue of the rayleigh spectrum
    #[arg(long)]
    spectrum_lo: Option<f64>,
    /// Largest eigenvalue of the rayleigh spectrum
    #[arg(long)]
    spectrum_hi: Option<f64>,
    /// Condition number of the quadratic problem
    #[arg(long)]
    condition: Option<f64>,
    /// Record every k-th iterate (the final one is always recorded)
    #[arg(long)]
    record_every: Option<usize>,
    /// Stop when the gradient norm falls to this value
    #[arg(long)]
    stop_tolerance: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    /// Output SVG path
    #[arg(long, default_value = "plot.svg")]
    out: PathBuf,
    /// Input CSV files written by `run`
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Verify { suite } => cmd_verify(&suite),
        Command::ListProblems => cmd_list_problems(),
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let file = match &args.config {
        Some(path) => match parse_config_file(path) {
            Ok(over) => Some(over),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let flags = match flag_overrides(&args) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let config = match resolve(file, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match run_experiment(&config) {
        Ok(summary) => {
            match config.problem {
                Problem::Hyperbolic => println!(
                    "problem: hyperbolic (diameter={}, mu={}, seed={})",
                    config.diameter, config.mu, config.seed
                ),
                Problem::Quadratic => println!(
                    "problem: quadratic (n={}, condition={}, seed={})",
                    config.n, config.condition, config.seed
                ),
                Problem::Rayleigh => println!(
                    "problem: rayleigh (n={}, spectrum [{}, {}], seed={})",
                    config.n, config.spectrum.0, config.spectrum.1, config.seed
                ),
            }
            println!(
                "algorithm: {} (p={}, C={}, h={})",
                summary.algorithm, config.p, config.c, config.h
            );
            println!(
                "finished at k={} (t={:.6}), {} rows -> {}",
                summary.iterations,
                summary.final_t,
                summary.rows,
                summary.out.display()
            );
            if let (Some(gap), Some(grad)) = (summary.final_gap, summary.final_grad) {
                println!("final: f_gap={gap:.6e} grad_norm={grad:.6e}");
            }
            match summary.rate {
                Some((est, (lo, hi))) => println!(
                    "rate fit over t in [{lo:.4}, {hi:.4}]: slope {:.4} (r^2 {:.4})",
                    est.slope, est.r_squared
                ),
                None => println!("rate fit: not enough usable samples"),
            }
            if let Some(ratio) = summary.bound_ratio {
                println!(
                    "bound check: max f_gap / (1.5 x bound) = {ratio:.4e} -> {}",
                    if ratio <= 1.0 { "pass" } else { "fail" }
                );
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Diverged { iteration, out }) => {
            eprintln!(
                "diverged at iteration {iteration}; last finite iterates written to {}",
                out.display()
            );
            ExitCode::from(1)
        }
    }
}

fn flag_overrides(args: &RunArgs) -> Result<Overrides, String> {
    Ok(Overrides {
        problem: args.problem.as_deref().map(Problem::parse).transpose()?,
        algo: args.algo.as_deref().map(Algorithm::parse).transpose()?,
        version: args.version.map(|v| if v == 1 { StepVersion::I } else { StepVersion::II }),
        p: args.p,
        c: args.c,
        h: args.h,
        alpha: args.alpha,
        mu: args.mu,
        diameter: args.diameter,
        iters: args.iters,
        seed: args.seed,
        n: args.n,
        spectrum_lo: args.spectrum_lo,
        spectrum_hi: args.spectrum_hi,
        condition: args.condition,
        record_every: args.record_every,
        stop_tolerance: args.stop_tolerance,
        out: args.out.clone(),
    })
}

fn cmd_plot(args: PlotArgs) -> ExitCode {
    match plot::render(&args.inputs, &args.out) {
        Ok(()) => {
            println!("wrote {}", args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_verify(suite: &str) -> ExitCode {
    let names: Vec<&str> = if suite == "all" {
        SUITE_NAMES.to_vec()
    } else if SUITE_NAMES.contains(&suite) {
        vec![suite]
    } else {
        eprintln!(
            "error: unknown suite '{suite}'\nusage: riemann-accel verify <geometry|dynamics|convergence|rescaling|all>"
        );
        return ExitCode::from(2);
    };

    let mut ok = true;
    for name in names {
        let results = match run_suite(name) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        println!("suite {name}:");
        for c in &results {
            println!(
                "  {} {:<38} residual {:>12.3e}  tolerance {:>9.1e}  ({})",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance,
                c.detail
            );
        }
        ok &= all_pass(&results);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_list_problems() -> ExitCode {
    println!("rayleigh    minimize -x'Ax on the unit sphere; A symmetric with a log-spaced");
    println!("            spectrum (defaults: n=10, eigenvalues in [1, 100], seed 42).");
    println!("            The optimum is the top eigenvector. Flags: --n, --spectrum-lo,");
    println!("            --spectrum-hi, --alpha.");
    println!("hyperbolic  minimize half the squared geodesic distance to a fixed point on");
    println!("            the hyperbolic plane (defaults: diameter 1, mu 1). Flags: --mu,");
    println!("            --diameter.");
    println!("quadratic   minimize an ill-conditioned quadratic on flat space (defaults:");
    println!("            n=10, condition 10, seed 42). Flags: --n, --condition, --mu.");
    ExitCode::SUCCESS
}
