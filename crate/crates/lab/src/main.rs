use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use degenlab::config::ExperimentConfig;
use degenlab::{run, verify};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Run every property suite and write verify.json.
    Verify,
    /// Solve all ε levels, checkpoint and analyze.
    Solve,
    /// Re-run the analysis on existing checkpoints.
    Analyze,
    /// Merge summary and tables into report.json.
    Report,
}

/// Numerical laboratory for widely degenerate parabolic equations.
#[derive(Debug, Parser)]
#[command(name = "degenlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Option<Command>,

    /// Same as the positional command.
    #[arg(long = "subcommand", value_enum)]
    subcommand: Option<Command>,

    /// JSON experiment config; the built-in default when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for the ε sweep (0 = one per core).
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Print the default config and exit.
    #[arg(long)]
    print_default_config: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_default_config {
        print!("{}", ExperimentConfig::default().to_json_string());
        return ExitCode::SUCCESS;
    }
    let command = match (cli.command, cli.subcommand) {
        (Some(a), Some(b)) if a != b => {
            eprintln!("error: conflicting commands {a:?} and {b:?}");
            return ExitCode::from(2);
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            eprintln!("error: missing command (verify, solve, analyze or report)");
            return ExitCode::from(2);
        }
    };
    match execute(command, &cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load(cli: &Cli) -> degenlab::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command, cli: &Cli) -> degenlab::Result<ExitCode> {
    let cfg = load(cli)?;
    match command {
        Command::Verify => {
            let report = verify::run_verify(&cfg)?;
            verify::write_ledger(&cfg.output, &report)?;
            for suite in &report.suites {
                let status = if suite.passed { "PASS" } else { "FAIL" };
                println!("{status} {}", suite.name);
                for c in suite.checks.iter().filter(|c| !c.passed()) {
                    println!(
                        "     {}: {}/{} failed, first: {}",
                        c.name,
                        c.failures,
                        c.samples,
                        c.first_failure.as_deref().unwrap_or("no samples")
                    );
                }
            }
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Solve => {
            let summary = run::run_solve(cfg.clone(), cli.threads)?;
            print_summary(&cfg, &summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze => {
            let summary = run::run_analyze(cfg.clone(), cli.threads)?;
            print_summary(&cfg, &summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Report => {
            let report = run::run_report(&cfg.output)?;
            println!(
                "merged {} levels into {}",
                report.summary.levels.len(),
                cfg.output.join("report.json").display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_summary(cfg: &ExperimentConfig, s: &degenlab::report::Summary) {
    println!("config {} seed {} K = {} ({})", &s.config_hash[..12], s.seed, s.k.value, s.k.policy);
    for l in &s.levels {
        println!(
            "eps {:<8} steps {:>4}  sup {:.6}  residual {:.3e}  newton<= {}",
            l.epsilon, l.steps, l.final_sup_norm, l.weak_residual, l.max_newton_iters
        );
    }
    for e in &s.epsconv {
        match e.monotone {
            Some(m) => println!("delta {}: eps-convergence monotone = {m}", e.delta),
            None => println!("delta {}: fewer than 3 eps levels, no convergence table", e.delta),
        }
    }
    println!("wrote {}", cfg.output.display());
}
