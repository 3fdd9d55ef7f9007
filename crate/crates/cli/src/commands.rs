//! Subcommand implementations. Each returns the process exit code:
//! 0 = goal reached (or command succeeded), 2 = step budget exhausted,
//! 3 = collision, 1 = configuration, parse, or I/O failure. `compare`
//! exits 0 whenever every run completes, whatever the outcomes were.

use crate::csv::{compare_csv, trajectory_csv, CompareRow};
use crate::resolve::{apply_overrides, load_scenario};
use crate::svg::{render_overlay_svg, render_run_svg};
use nav_core::{builtin_scenarios, clearance, run, Outcome, Policy, RunResult, Scenario};
use std::path::Path;
use std::str::FromStr;

/// Exit code for a completed run.
pub fn exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::GoalReached => 0,
        Outcome::MaxStepsExceeded => 2,
        Outcome::Collision => 3,
    }
}

fn fail(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    1
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn prepare(scenario_arg: &str, sets: &[String]) -> Result<Scenario, String> {
    let scenario = load_scenario(scenario_arg)?;
    let scenario = apply_overrides(&scenario, sets)?;
    scenario.validate().map_err(|e| e.to_string())?;
    Ok(scenario)
}

/// Run one scenario under one policy; optionally write the trajectory CSV
/// and an SVG plot.
pub fn cmd_simulate(
    scenario_arg: &str,
    policy_arg: &str,
    seed: u64,
    csv_path: Option<&Path>,
    svg_path: Option<&Path>,
    sets: &[String],
) -> i32 {
    let policy = match Policy::from_str(policy_arg) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let scenario = match prepare(scenario_arg, sets) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let config = match scenario.build() {
        Ok(c) => c,
        Err(e) => return fail(&e.to_string()),
    };
    let result = match run(&config, policy, seed) {
        Ok(r) => r,
        Err(e) => return fail(&e.to_string()),
    };
    if let Some(path) = csv_path {
        if let Err(e) = write_text(path, &trajectory_csv(&result.records)) {
            return fail(&e);
        }
    }
    if let Some(path) = svg_path {
        let svg = render_run_svg(
            &scenario.name,
            &config.world,
            &result.records,
            &result.memory,
            config.sim.goal_tol,
        );
        if let Err(e) = write_text(path, &svg) {
            return fail(&e);
        }
    }
    let min_clearance = clearance(&config.world, &result.records, config.sim.radius);
    println!(
        "outcome={} ticks={} path_length={:.3} switches={} min_clearance={:.3}",
        result.outcome,
        result.final_tick,
        result.path_length,
        result.switch_count(),
        min_clearance,
    );
    exit_code(result.outcome)
}

/// Run several policies on the same scenario and seed; print the
/// comparison table and write it (plus a path overlay SVG) to `out_dir`.
pub fn cmd_compare(
    scenario_arg: &str,
    policy_args: &[String],
    seed: u64,
    out_dir: &Path,
    sets: &[String],
) -> i32 {
    if policy_args.len() < 2 {
        return fail("compare needs at least two --policies");
    }
    let mut policies = Vec::new();
    for arg in policy_args {
        match Policy::from_str(arg) {
            Ok(p) => policies.push(p),
            Err(e) => return fail(&e),
        }
    }
    let scenario = match prepare(scenario_arg, sets) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let config = match scenario.build() {
        Ok(c) => c,
        Err(e) => return fail(&e.to_string()),
    };
    let mut results: Vec<(Policy, RunResult)> = Vec::new();
    for &policy in &policies {
        match run(&config, policy, seed) {
            Ok(r) => results.push((policy, r)),
            Err(e) => return fail(&format!("{policy}: {e}")),
        }
    }
    let rows: Vec<CompareRow> = results
        .iter()
        .map(|(p, r)| CompareRow::from_result(*p, r))
        .collect();
    let table = compare_csv(&rows);
    print!("{table}");
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(&format!("cannot create {}: {e}", out_dir.display()));
    }
    let csv_path = out_dir.join(format!("{}-compare.csv", scenario.name));
    if let Err(e) = write_text(&csv_path, &table) {
        return fail(&e);
    }
    let overlay_runs: Vec<(Policy, &RunResult)> = results.iter().map(|(p, r)| (*p, r)).collect();
    let svg = render_overlay_svg(
        &scenario.name,
        &config.world,
        &overlay_runs,
        config.sim.goal_tol,
    );
    let svg_path = out_dir.join(format!("{}-compare.svg", scenario.name));
    if let Err(e) = write_text(&svg_path, &svg) {
        return fail(&e);
    }
    0
}

/// Parse and check a scenario without running it.
pub fn cmd_validate(scenario_arg: &str) -> i32 {
    let scenario = match load_scenario(scenario_arg) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    match scenario.validate() {
        Ok(()) => {
            println!("ok: {}", scenario.name);
            0
        }
        Err(e) => fail(&format!("{}: {e}", scenario.name)),
    }
}

/// Print the bundled scenario names with a one-line shape summary.
pub fn cmd_list_scenarios() -> i32 {
    for s in builtin_scenarios() {
        let (min, max) = s.world.bounds;
        println!(
            "{:<24} {:>4} x {:<4} m, {} obstacles",
            s.name,
            max.x - min.x,
            max.y - min.y,
            s.world.obstacles.len(),
        );
    }
    0
}
