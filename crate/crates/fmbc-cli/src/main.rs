use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use fmbc_cli::reports;
use fmbc_cli::runner::{self, ALL_POLICIES};
use fmbc_cli::scenario::{parse_policy, Scenario};

#[derive(Parser)]
#[command(name = "fmbc", about = "Forecast-mediated market-based control simulator", version)]
struct Cli {
    /// Scenario TOML file (omit for the built-in desk-scale default).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Base seed (overrides the scenario's run.base_seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Bidding policy: mdp, point-forecast, naive or latest-start
    /// (overrides the scenario's run.policy).
    #[arg(long, global = true)]
    policy: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and print the initial reference schedule and prices.
    Schedule,
    /// Run one simulation and write trace/devices/reference/summary files.
    Simulate,
    /// Run every policy on identical inputs and write a comparison table.
    Compare,
    /// Sensitivity sweep over forecast uncertainty levels.
    Sweep {
        /// Comma-separated uncertainty levels.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-5, 1e-3, 1e-2, 1e-1])]
        nu: Vec<f64>,
        /// Replications per level (defaults to the scenario's).
        #[arg(long)]
        replications: Option<u32>,
    },
    /// Re-run deterministically and write equilibrium/consistency/regret reports.
    Analyze,
    /// Validate a scenario file.
    Validate,
}

fn load_scenario(cli: &Cli) -> Result<(Scenario, Option<PathBuf>)> {
    match &cli.scenario {
        Some(path) => {
            let sc = Scenario::from_path(path)?;
            Ok((sc, path.parent().map(Path::to_path_buf)))
        }
        None => Ok((Scenario::desk_default(), None)),
    }
}

fn effective(cli: &Cli, sc: &mut Scenario) -> Result<()> {
    if let Some(seed) = cli.seed {
        sc.run.base_seed = seed;
    }
    if let Some(policy) = &cli.policy {
        parse_policy(policy)?;
        sc.run.policy = policy.clone();
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let (mut sc, base_dir) = load_scenario(cli)?;
    effective(cli, &mut sc)?;
    let base_dir = base_dir.as_deref();
    match &cli.command {
        Command::Validate => {
            sc.validate()?;
            println!("scenario ok: {} steps, {} devices", sc.grid.steps, sc.clusters.iter().map(|c| c.count).sum::<usize>());
        }
        Command::Schedule => {
            let built = runner::build_scenario(&sc, sc.run.base_seed, base_dir)?;
            let solution = runner::solve_reference(&built)?;
            reports::write_reference_csv(&cli.out, &solution)?;
            println!("objective: {}", solution.objective);
            println!("starts per step written to {}", cli.out.join("reference.csv").display());
        }
        Command::Simulate => {
            let built = runner::build_scenario(&sc, sc.run.base_seed, base_dir)?;
            let trace = runner::run(&built, built.policy)?;
            reports::write_run_outputs(&cli.out, &trace)?;
            println!(
                "policy {}: total cost {} (reference {}, gap {:.4}%)",
                trace.policy.name(),
                trace.total_cost,
                trace.reference_cost,
                trace.cost_gap * 100.0
            );
        }
        Command::Compare => {
            let built = runner::build_scenario(&sc, sc.run.base_seed, base_dir)?;
            let traces = runner::compare_policies(&built)?;
            reports::write_compare_csv(&cli.out, &traces)?;
            println!("{:<16} {:>14} {:>10}", "policy", "total_cost", "gap_%");
            for (p, t) in ALL_POLICIES.iter().zip(&traces) {
                println!("{:<16} {:>14.6} {:>10.4}", p.name(), t.total_cost, t.cost_gap * 100.0);
            }
        }
        Command::Sweep { nu, replications } => {
            let reps = replications.unwrap_or(sc.run.replications);
            let (rows, _) = runner::sweep(&sc, base_dir, nu, reps)?;
            reports::write_sweep_outputs(&cli.out, &rows)?;
            let failures = rows.iter().filter(|r| r.error.is_some()).count();
            println!("{} runs ({} failed); rows in {}", rows.len(), failures, cli.out.join("sweep.csv").display());
        }
        Command::Analyze => {
            let built = runner::build_scenario(&sc, sc.run.base_seed, base_dir)?;
            let trace = runner::run(&built, built.policy)?;
            let analysis = runner::analyze(&built, &trace)?;
            reports::write_run_outputs(&cli.out, &trace)?;
            reports::write_analysis_outputs(&cli.out, &analysis)?;
            println!(
                "NE violations: {}, worst delta: {}, price-bound violations: {}, corollary violations: {}",
                analysis.equilibrium.violations.len(),
                analysis.equilibrium.worst_delta,
                analysis.consistency.price_violations,
                analysis.consistency.corollary_violations
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": format!("{e:#}"),
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
