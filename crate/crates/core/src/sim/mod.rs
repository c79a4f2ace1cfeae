//! End-to-end runs: scenario in, per-tick trace out, plus CSV and SVG writers.

mod scenario;
mod svg;
mod trace;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use scenario::{Scenario, ScenarioError, DEFAULT_MAX_TICKS, SCENARIO_MAGIC};
pub use svg::plot_svg;
pub use trace::{trace_csv, CSV_HEADER};

use crate::ann::{Decision, Network};
use crate::controller::{tick, ControllerState, HaltReason, Robot};
use crate::sensor::ScanVector;
use crate::world::Pose;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub tick: u64,
    pub before: Pose<f64>,
    pub after: Pose<f64>,
    pub scan: ScanVector,
    pub decision: Decision,
    pub fallback_used: bool,
    pub halted: Option<HaltReason>,
}

/// Ticks until the controller halts or `max_ticks` records exist.
///
/// If the budget runs out first, the last record is marked [`HaltReason::Budget`].
pub fn run(scenario: &Scenario, net: &Network<f64>) -> Vec<TraceRecord> {
    let robot = Robot {
        env: &scenario.env,
        net,
        sensor: &scenario.sensor,
        motion: &scenario.motion,
        decision: &scenario.decision,
        goal: scenario.goal,
        check_every: scenario.check_every,
    };
    let mut state = ControllerState::new(scenario.start);
    let mut trace = Vec::new();
    while !state.is_halted() && trace.len() < scenario.max_ticks as usize {
        let before = state.pose;
        let tick_index = state.step_index;
        state = tick(&state, &robot).expect("scenario configs are validated at load");
        trace.push(TraceRecord {
            tick: tick_index,
            before,
            after: state.pose,
            scan: state.last_scan.expect("tick records a scan"),
            decision: state.last_decision.expect("tick records a decision"),
            fallback_used: state.last_fallback,
            halted: state.halted(),
        });
    }
    if let Some(last) = trace.last_mut() {
        if last.halted.is_none() {
            last.halted = Some(HaltReason::Budget);
        }
    }
    trace
}

fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    std::fs::write(path, contents).map_err(|source| OutputError::Io { path: path.to_owned(), source })
}

pub fn emit_trace_csv(trace: &[TraceRecord], path: &Path) -> Result<(), OutputError> {
    write_file(path, &trace_csv(trace)?)
}

pub fn emit_plot_svg(scenario: &Scenario, trace: &[TraceRecord], path: &Path) -> Result<(), OutputError> {
    write_file(path, &plot_svg(scenario, trace)?)
}
