//! Scenario lookup and `--set` parameter overrides.
//!
//! A scenario argument is resolved in order: literal file path, then
//! `$NAV_SCENARIO_DIR/<arg>` and `$NAV_SCENARIO_DIR/<arg>.json`, then the
//! bundled set. Overrides address fields by dotted path into the scenario
//! document (`apf.rho=0.25`); the path must lead through existing
//! sections, and a misspelled leaf is still caught because scenario
//! parsing rejects unknown fields.

use nav_core::{builtin_scenario, builtin_scenarios, Scenario};
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};

/// Environment variable holding an extra scenario search directory.
pub const SCENARIO_DIR_ENV: &str = "NAV_SCENARIO_DIR";

fn parse_file(path: &Path) -> Result<Scenario, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Scenario::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Resolve a scenario argument to a parsed scenario.
pub fn load_scenario(arg: &str) -> Result<Scenario, String> {
    let literal = Path::new(arg);
    if literal.is_file() {
        return parse_file(literal);
    }
    if let Ok(dir) = std::env::var(SCENARIO_DIR_ENV) {
        let candidates = [
            PathBuf::from(&dir).join(arg),
            PathBuf::from(&dir).join(format!("{arg}.json")),
        ];
        for cand in candidates {
            if cand.is_file() {
                return parse_file(&cand);
            }
        }
    }
    if let Some(s) = builtin_scenario(arg) {
        return Ok(s);
    }
    let names: Vec<String> = builtin_scenarios().into_iter().map(|s| s.name).collect();
    Err(format!(
        "scenario not found: {arg} (not a file, not under ${SCENARIO_DIR_ENV}, \
         and not a bundled name; bundled: {})",
        names.join(", ")
    ))
}

/// Parse an override value: JSON when it is valid JSON, bare string
/// otherwise (so `--set sensors.preset=uav5` works without quotes).
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, dotted: &str, value: Value) -> Result<(), String> {
    let mut segments: Vec<&str> = dotted.split('.').collect();
    let leaf = segments
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| format!("override path '{dotted}' is empty"))?;
    let mut cursor = &mut *root;
    let mut walked = Vec::new();
    for seg in segments {
        walked.push(seg);
        cursor = cursor.get_mut(seg).ok_or_else(|| {
            format!(
                "override path '{dotted}': no section '{}'",
                walked.join(".")
            )
        })?;
    }
    let table = cursor.as_object_mut().ok_or_else(|| {
        format!(
            "override path '{dotted}': '{}' is not a table of parameters",
            walked.join(".")
        )
    })?;
    table.insert(leaf.to_string(), value);
    Ok(())
}

/// Apply `KEY.PATH=VALUE` overrides to a scenario and re-validate the
/// result. Unknown keys and ill-typed values surface as errors here.
pub fn apply_overrides(scenario: &Scenario, sets: &[String]) -> Result<Scenario, String> {
    if sets.is_empty() {
        return Ok(scenario.clone());
    }
    let mut root =
        serde_json::to_value(scenario).map_err(|e| format!("cannot serialize scenario: {e}"))?;
    for spec in sets {
        let (path, raw) = spec
            .split_once('=')
            .ok_or_else(|| format!("override '{spec}' is not KEY.PATH=VALUE"))?;
        set_path(&mut root, path, parse_value(raw))?;
    }
    serde_json::from_value(root).map_err(|e| format!("overrides produce an invalid scenario: {e}"))
}
