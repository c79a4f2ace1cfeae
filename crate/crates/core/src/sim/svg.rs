use std::fmt::Write;

use super::{OutputError, Scenario, TraceRecord};
use crate::controller::HaltReason;

/// Pixels per inch.
const SCALE: f64 = 4.0;
const MARGIN: f64 = 12.0;

/// Top-down plot: walls, goal, start, the pose path and a halt marker.
/// Coordinates map straight through (the world frame is already y-down).
pub fn plot_svg(scenario: &Scenario, trace: &[TraceRecord]) -> Result<String, OutputError> {
    let first = trace.first().ok_or(OutputError::EmptyTrace)?;
    let last = trace.last().unwrap();
    let b = scenario.env.bounds();
    let (min_x, min_y) = (b.min.x - MARGIN, b.min.y - MARGIN);
    let (w, h) = (b.width() + 2.0 * MARGIN, b.height() + 2.0 * MARGIN);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="{min_x:.3} {min_y:.3} {w:.3} {h:.3}">"#,
        w * SCALE,
        h * SCALE
    )
    .unwrap();
    writeln!(out, r##"<rect x="{min_x:.3}" y="{min_y:.3}" width="{w:.3}" height="{h:.3}" fill="#ffffff"/>"##).unwrap();

    out.push_str(r##"<g class="walls" stroke="#5a3e1b" stroke-width="0.8" stroke-linecap="round">"##);
    out.push('\n');
    for wall in scenario.env.walls() {
        writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            wall.a().x,
            wall.a().y,
            wall.b().x,
            wall.b().y
        )
        .unwrap();
    }
    out.push_str("</g>\n");

    if let Some(goal) = scenario.goal {
        writeln!(
            out,
            r##"<circle class="goal" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#c8f0c8" stroke="#2e7d32" stroke-width="0.3"/>"##,
            goal.center.x, goal.center.y, goal.radius
        )
        .unwrap();
    }

    let points: Vec<String> = std::iter::once(first.before)
        .chain(trace.iter().map(|r| r.after))
        .map(|p| format!("{:.3},{:.3}", p.x(), p.y()))
        .collect();
    writeln!(
        out,
        r##"<polyline class="path" points="{}" fill="none" stroke="#1565c0" stroke-width="0.5"/>"##,
        points.join(" ")
    )
    .unwrap();
    writeln!(
        out,
        r##"<circle class="start" cx="{:.3}" cy="{:.3}" r="1.5" fill="#1565c0"/>"##,
        first.before.x(),
        first.before.y()
    )
    .unwrap();

    let (x, y) = (last.after.x(), last.after.y());
    match last.halted {
        Some(HaltReason::Collision) => {
            let r = scenario.motion.body_radius.max(1.0);
            writeln!(
                out,
                r##"<g class="collision-marker" stroke="#d32f2f" stroke-width="0.8"><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/><line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/></g>"##,
                x - r,
                y - r,
                x + r,
                y + r,
                x - r,
                y + r,
                x + r,
                y - r
            )
            .unwrap();
        }
        reason => {
            let name = reason.map_or("none", |h| h.name());
            writeln!(
                out,
                r##"<circle class="halt-marker halt-{name}" cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="#d32f2f" stroke-width="0.5"/>"##,
                scenario.motion.body_radius.max(1.0)
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
