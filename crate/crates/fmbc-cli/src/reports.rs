//! Report writers: fixed-column CSV tables per report kind plus
//! line-delimited JSON summaries. Float formatting uses Rust's shortest
//! round-trip representation, so identical runs serialize byte-identically.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::runner::{AnalysisOutput, RunTrace, SweepRow};
use fmbc_core::ReferenceSolution;

fn create(dir: &Path, name: &str) -> Result<fs::File> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::File::create(&path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_trace_csv(dir: &Path, trace: &RunTrace) -> Result<()> {
    let mut f = create(dir, "trace.csv")?;
    writeln!(
        f,
        "t,clearing_price,reference_price,n_started,n_reference,flexible_load_kw,inflexible_kw,wind_kw,dispatched_kw,supply_setpoint_kw,imbalance,tie"
    )?;
    for s in &trace.steps {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.t,
            s.clearing_price,
            s.reference_price,
            s.n_started,
            s.n_reference,
            s.flexible_load,
            s.inflexible,
            s.wind,
            s.dispatched,
            s.supply_setpoint,
            s.imbalance,
            s.tie
        )?;
    }
    Ok(())
}

pub fn write_devices_csv(dir: &Path, trace: &RunTrace) -> Result<()> {
    let mut f = create(dir, "devices.csv")?;
    writeln!(f, "id,deadline,duration,power_kw,start,payment,reference_start,reference_payment,regret")?;
    for d in &trace.devices {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{}",
            d.id,
            d.deadline,
            d.duration,
            d.power_kw,
            d.start,
            d.payment,
            d.reference_start,
            d.reference_payment,
            d.regret
        )?;
    }
    Ok(())
}

pub fn write_reference_csv(dir: &Path, solution: &ReferenceSolution) -> Result<()> {
    let mut f = create(dir, "reference.csv")?;
    writeln!(f, "t,sigma,running,flexible_gen_kw,price")?;
    for r in 0..solution.sigma.len() {
        writeln!(
            f,
            "{},{},{},{},{}",
            solution.window_start + r,
            solution.sigma[r],
            solution.running[r],
            solution.flexible_gen[r],
            solution.prices[r]
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RunSummary<'a> {
    policy: &'a str,
    seed: u64,
    total_cost: f64,
    reference_cost: f64,
    cost_gap: f64,
    devices: usize,
    steps: usize,
    ties: usize,
    total_imbalance: f64,
}

pub fn write_summary_json(dir: &Path, trace: &RunTrace) -> Result<()> {
    let mut f = create(dir, "summary.json")?;
    let summary = RunSummary {
        policy: trace.policy.name(),
        seed: trace.seed,
        total_cost: trace.total_cost,
        reference_cost: trace.reference_cost,
        cost_gap: trace.cost_gap,
        devices: trace.devices.len(),
        steps: trace.steps.len(),
        ties: trace.steps.iter().filter(|s| s.tie).count(),
        total_imbalance: trace.steps.iter().map(|s| s.imbalance).sum(),
    };
    writeln!(f, "{}", serde_json::to_string(&summary)?)?;
    Ok(())
}

pub fn write_compare_csv(dir: &Path, traces: &[RunTrace]) -> Result<()> {
    let mut f = create(dir, "compare.csv")?;
    writeln!(f, "policy,total_cost,reference_cost,cost_gap")?;
    for t in traces {
        writeln!(f, "{},{},{},{}", t.policy.name(), t.total_cost, t.reference_cost, t.cost_gap)?;
    }
    Ok(())
}

pub fn write_sweep_outputs(dir: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut f = create(dir, "sweep.csv")?;
    writeln!(
        f,
        "nu,replication,seed,total_cost,reference_cost,cost_gap,mean_payment_delta,sd_payment_delta,min_regret,max_regret,error"
    )?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.nu,
            r.replication,
            r.seed,
            r.total_cost,
            r.reference_cost,
            r.cost_gap,
            r.mean_payment_delta,
            r.sd_payment_delta,
            r.min_regret,
            r.max_regret,
            r.error.as_deref().unwrap_or("")
        )?;
    }
    let mut f = create(dir, "summary.jsonl")?;
    for r in rows {
        writeln!(f, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

pub fn write_analysis_outputs(dir: &Path, analysis: &AnalysisOutput) -> Result<()> {
    let mut f = create(dir, "nash.csv")?;
    writeln!(f, "device,chosen_start,best_alternative_start,chosen_payment,best_payment,delta")?;
    for d in &analysis.equilibrium.devices {
        let chosen_idx = d.feasible_starts.iter().position(|s| *s == d.chosen_start).unwrap_or(0);
        writeln!(
            f,
            "{},{},{},{},{},{}",
            d.device.0,
            d.chosen_start,
            d.feasible_starts[d.best_alternative],
            d.payments[chosen_idx],
            d.payments[d.best_alternative],
            d.delta
        )?;
    }

    let mut f = create(dir, "consistency.csv")?;
    writeln!(f, "t,price_diff,price_lower,price_upper,price_ok,count_diff,count_lower,count_upper,count_ok")?;
    for (p, c) in analysis.consistency.price.iter().zip(&analysis.consistency.counts) {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{}",
            p.t,
            p.diff,
            p.lower,
            p.upper,
            p.ok,
            c.diff,
            c.lower.map(|v| v.to_string()).unwrap_or_default(),
            c.upper.map(|v| v.to_string()).unwrap_or_default(),
            c.ok
        )?;
    }

    #[derive(Serialize)]
    struct AnalysisSummary {
        ne_violations: usize,
        worst_delta: f64,
        epsilon: f64,
        delta_bound_holds: bool,
        eta: f64,
        price_bound_violations: usize,
        count_bound_violations: usize,
        corollary_violations: usize,
        corollary_interval: (i64, i64),
    }
    let mut f = create(dir, "analysis.json")?;
    let summary = AnalysisSummary {
        ne_violations: analysis.equilibrium.violations.len(),
        worst_delta: analysis.equilibrium.worst_delta,
        epsilon: analysis.equilibrium.epsilon,
        delta_bound_holds: analysis.equilibrium.delta_bound_holds,
        eta: analysis.eta,
        price_bound_violations: analysis.consistency.price_violations,
        count_bound_violations: analysis.consistency.count_violations,
        corollary_violations: analysis.consistency.corollary_violations,
        corollary_interval: analysis.consistency.corollary_interval,
    };
    writeln!(f, "{}", serde_json::to_string(&summary)?)?;
    Ok(())
}

/// Write the full single-run report set (the `simulate` command).
pub fn write_run_outputs(dir: &Path, trace: &RunTrace) -> Result<()> {
    write_trace_csv(dir, trace)?;
    write_devices_csv(dir, trace)?;
    write_reference_csv(dir, &trace.initial_reference)?;
    write_summary_json(dir, trace)?;
    Ok(())
}
