//! Self-contained SVG plots of arenas and trajectories.
//!
//! The visual idiom: obstacles filled grey, arena bounds outlined,
//! start/goal markers, the path drawn solid while the field controller
//! drives and dashed while wall-following, key frames as dots and
//! local-minimum frames as crosses. A comparison overlay draws one
//! solid path per policy instead, with a legend.

use nav_core::{Mode, Policy, RunResult, StepRecord, TrajectoryMemory, Vec2, World};
use std::fmt::Write as _;

const MARGIN: f64 = 0.5;
const PATH_WIDTH: f64 = 0.045;
const WFM_DASH: &str = "0.16 0.1";
const APF_COLOR: &str = "#1f77b4";
const WFM_COLOR: &str = "#e8771e";
/// Points closer together than this are dropped when drawing (keeps files
/// small when the robot dithers in place).
const THIN_DIST: f64 = 0.01;

/// Stable plot color for each policy in overlays.
pub fn policy_color(policy: Policy) -> &'static str {
    match policy {
        Policy::Full => "#1f77b4",
        Policy::Memoryless => "#d62728",
        Policy::WfmMemoryOnly => "#2ca02c",
        Policy::ApfOnly => "#9467bd",
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Drawing surface: accumulates elements and flips y (SVG y grows down,
/// world y grows up) so the picture matches the world's orientation.
struct Canvas {
    out: String,
    y_flip: f64,
}

impl Canvas {
    fn new(world: &World, title: &str) -> Canvas {
        let (min, max) = (world.bounds().min(), world.bounds().max());
        let w = world.bounds().width() + 2.0 * MARGIN;
        let h = world.bounds().height() + 2.0 * MARGIN;
        let mut out = String::with_capacity(16 * 1024);
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.3} {:.3} {:.3} {:.3}" width="{}">"#,
            min.x - MARGIN,
            min.y - MARGIN,
            w,
            h,
            800,
        )
        .unwrap();
        writeln!(out, "<title>{}</title>", xml_escape(title)).unwrap();
        Canvas {
            out,
            y_flip: min.y + max.y,
        }
    }

    fn pt(&self, p: Vec2) -> (f64, f64) {
        (p.x, self.y_flip - p.y)
    }

    fn arena(&mut self, world: &World) {
        let (min, _) = (world.bounds().min(), world.bounds().max());
        writeln!(
            self.out,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#000" stroke-width="0.035"/>"##,
            min.x,
            min.y,
            world.bounds().width(),
            world.bounds().height(),
        )
        .unwrap();
        for poly in world.obstacles() {
            let mut points = String::new();
            for &v in poly.vertices() {
                let (x, y) = self.pt(v);
                write!(points, "{x:.3},{y:.3} ").unwrap();
            }
            writeln!(
                self.out,
                r##"<polygon points="{}" fill="#b8b8b8" stroke="#707070" stroke-width="0.02"/>"##,
                points.trim_end(),
            )
            .unwrap();
        }
    }

    fn markers(&mut self, world: &World, goal_tol: f64) {
        let (sx, sy) = self.pt(world.start());
        let (gx, gy) = self.pt(world.goal());
        writeln!(
            self.out,
            r##"<circle cx="{sx:.3}" cy="{sy:.3}" r="0.12" fill="#2ca02c"/>"##
        )
        .unwrap();
        writeln!(
            self.out,
            r##"<circle cx="{gx:.3}" cy="{gy:.3}" r="{goal_tol:.3}" fill="none" stroke="#d62728" stroke-width="0.03"/>"##
        )
        .unwrap();
        writeln!(
            self.out,
            r##"<circle cx="{gx:.3}" cy="{gy:.3}" r="0.05" fill="#d62728"/>"##
        )
        .unwrap();
    }

    fn polyline(&mut self, pts: &[Vec2], color: &str, dash: Option<&str>) {
        if pts.len() < 2 {
            return;
        }
        let mut points = String::new();
        let mut last: Option<Vec2> = None;
        for (i, &p) in pts.iter().enumerate() {
            let keep = match last {
                Some(q) => p.dist(q) >= THIN_DIST || i == pts.len() - 1,
                None => true,
            };
            if keep {
                let (x, y) = self.pt(p);
                write!(points, "{x:.3},{y:.3} ").unwrap();
                last = Some(p);
            }
        }
        let dash = dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{PATH_WIDTH}" stroke-linejoin="round" stroke-linecap="round"{dash}/>"#,
            points.trim_end(),
        )
        .unwrap();
    }

    fn memory_marks(&mut self, memory: &TrajectoryMemory) {
        for frame in memory.frames() {
            let (x, y) = self.pt(frame.position);
            if frame.is_local_min {
                const R: f64 = 0.09;
                writeln!(
                    self.out,
                    r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#d62728" stroke-width="0.035"/>"##,
                    x - R,
                    y - R,
                    x + R,
                    y + R,
                )
                .unwrap();
                writeln!(
                    self.out,
                    r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#d62728" stroke-width="0.035"/>"##,
                    x - R,
                    y + R,
                    x + R,
                    y - R,
                )
                .unwrap();
            } else {
                writeln!(
                    self.out,
                    r##"<circle cx="{x:.3}" cy="{y:.3}" r="0.045" fill="#404040"/>"##
                )
                .unwrap();
            }
        }
    }

    fn legend(&mut self, world: &World, entries: &[(Policy, &'static str)]) {
        let min = world.bounds().min();
        let max = world.bounds().max();
        for (i, (policy, color)) in entries.iter().enumerate() {
            let y = self.y_flip - (max.y - 0.35 - 0.4 * i as f64);
            let x = min.x + 0.25;
            writeln!(
                self.out,
                r#"<line x1="{:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="{color}" stroke-width="{PATH_WIDTH}"/>"#,
                x,
                x + 0.6,
            )
            .unwrap();
            writeln!(
                self.out,
                r##"<text x="{:.3}" y="{:.3}" font-size="0.28" font-family="sans-serif" fill="#000">{}</text>"##,
                x + 0.75,
                y + 0.1,
                xml_escape(&policy.to_string()),
            )
            .unwrap();
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Split a step log into maximal same-mode stretches. The segment leaving
/// record `i` is attributed to `records[i].mode` (the controller that
/// produced that motion), so each stretch ends at the position where the
/// next mode takes over.
fn mode_polylines(records: &[StepRecord]) -> Vec<(Mode, Vec<Vec2>)> {
    let mut out: Vec<(Mode, Vec<Vec2>)> = Vec::new();
    for r in records {
        match out.last_mut() {
            Some((mode, pts)) if *mode == r.mode => pts.push(r.position),
            Some((_, pts)) => {
                pts.push(r.position);
                out.push((r.mode, vec![r.position]));
            }
            None => out.push((r.mode, vec![r.position])),
        }
    }
    out.retain(|(_, pts)| pts.len() >= 2);
    out
}

/// Render one run: arena, mode-styled path, and memory marks.
pub fn render_run_svg(
    title: &str,
    world: &World,
    records: &[StepRecord],
    memory: &TrajectoryMemory,
    goal_tol: f64,
) -> String {
    let mut canvas = Canvas::new(world, title);
    canvas.arena(world);
    for (mode, pts) in mode_polylines(records) {
        match mode {
            Mode::Apf => canvas.polyline(&pts, APF_COLOR, None),
            Mode::Wfm => canvas.polyline(&pts, WFM_COLOR, Some(WFM_DASH)),
        }
    }
    canvas.memory_marks(memory);
    canvas.markers(world, goal_tol);
    canvas.finish()
}

/// Render several runs of the same scenario on one canvas, one solid
/// path per policy, with a legend.
pub fn render_overlay_svg(
    title: &str,
    world: &World,
    runs: &[(Policy, &RunResult)],
    goal_tol: f64,
) -> String {
    let mut canvas = Canvas::new(world, title);
    canvas.arena(world);
    let mut legend = Vec::new();
    for (policy, result) in runs {
        let color = policy_color(*policy);
        let pts: Vec<Vec2> = result.records.iter().map(|r| r.position).collect();
        canvas.polyline(&pts, color, None);
        legend.push((*policy, color));
    }
    canvas.markers(world, goal_tol);
    canvas.legend(world, &legend);
    canvas.finish()
}
