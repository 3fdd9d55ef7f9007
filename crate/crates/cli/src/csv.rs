//! CSV emission for trajectories and policy-comparison tables.
//!
//! Both column sets are a stable contract: order is fixed, a header row is
//! always present, and floats are printed with Rust's locale-independent
//! `Display` (decimal point, shortest round-trip form), so identical runs
//! yield byte-identical files.

use nav_core::{Outcome, Policy, RunResult, StepRecord};
use std::fmt::Write as _;

/// Column order of a trajectory file.
pub const TRAJECTORY_HEADER: &str = "tick,t,x,y,vx,vy,mode,fx,fy,min_reading,keyframe,event";

/// Column order of a comparison table.
pub const COMPARE_HEADER: &str = "policy,outcome,path_length,switches,wfm_fraction";

/// Render a run's step log as CSV text.
///
/// `mode` is `apf`/`wfm`, `keyframe` is `0`/`1`, and `event` is empty or a
/// transition tag such as `apf->wfm:local_minimum`. No field ever contains
/// a comma, so no quoting is needed.
pub fn trajectory_csv(records: &[StepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in records {
        let event = r.event.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.tick,
            r.t,
            r.position.x,
            r.position.y,
            r.velocity.x,
            r.velocity.y,
            r.mode,
            r.force.x,
            r.force.y,
            r.min_reading,
            u8::from(r.keyframe_recorded),
            event,
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// One row of a comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub policy: Policy,
    pub outcome: Outcome,
    pub path_length: f64,
    pub switches: usize,
    pub wfm_fraction: f64,
}

impl CompareRow {
    pub fn from_result(policy: Policy, result: &RunResult) -> Self {
        CompareRow {
            policy,
            outcome: result.outcome,
            path_length: result.path_length,
            switches: result.switch_count(),
            wfm_fraction: result.wfm_fraction(),
        }
    }
}

/// Render a comparison table as CSV text, one row per policy run.
pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(COMPARE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.policy, r.outcome, r.path_length, r.switches, r.wfm_fraction,
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nav_core::{Mode, SwitchEvent, SwitchReason, Vec2};

    fn record(tick: u32, event: Option<SwitchEvent>) -> StepRecord {
        StepRecord {
            tick,
            t: tick as f64 * 0.05,
            position: Vec2::new(1.5, -2.0),
            velocity: Vec2::new(0.5, 0.0),
            mode: Mode::Apf,
            force: Vec2::new(0.25, 0.0),
            min_reading: 4.0,
            keyframe_recorded: tick == 0,
            event,
        }
    }

    #[test]
    fn header_and_columns_match_contract() {
        let rows = trajectory_csv(&[record(0, None)]);
        let mut lines = rows.lines();
        assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
        assert_eq!(lines.next(), Some("0,0,1.5,-2,0.5,0,apf,0.25,0,4,1,"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn events_render_with_arrow_tags() {
        let ev = SwitchEvent {
            from: Mode::Apf,
            to: Mode::Wfm,
            reason: SwitchReason::LocalMinimum,
        };
        let rows = trajectory_csv(&[record(7, Some(ev))]);
        let line = rows.lines().nth(1).unwrap();
        assert!(line.ends_with(",0,apf->wfm:local_minimum"));
        assert_eq!(line.split(',').count(), 12);
    }

    #[test]
    fn no_field_contains_a_comma_or_quote() {
        let ev = SwitchEvent {
            from: Mode::Wfm,
            to: Mode::Apf,
            reason: SwitchReason::WallLost,
        };
        let rows = trajectory_csv(&[record(0, None), record(1, Some(ev))]);
        for line in rows.lines() {
            assert_eq!(line.split(',').count(), 12, "line: {line}");
            assert!(!line.contains('"'));
        }
    }

    #[test]
    fn compare_table_shape() {
        let rows = vec![CompareRow {
            policy: Policy::Full,
            outcome: Outcome::GoalReached,
            path_length: 8.25,
            switches: 2,
            wfm_fraction: 0.125,
        }];
        let text = compare_csv(&rows);
        assert_eq!(
            text,
            "policy,outcome,path_length,switches,wfm_fraction\nfull,goal-reached,8.25,2,0.125\n"
        );
    }
}
