//! Scan → decide → act loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ann::{classify, Classification, Decision, DecisionConfig, Network};
use crate::sensor::{apply_jitter, sense, ObstacleBits, ScanVector, SensorConfig};
use crate::vehicle::{drive, turn_step_count, MotionConfig, StepCommand};
use crate::world::{point_in_collision, Environment, Point, Pose};
use crate::Scalar;

/// Steps between collision/goal checks inside a maneuver.
pub const DEFAULT_CHECK_EVERY: u32 = 10;

#[derive(Debug, Error, PartialEq)]
pub enum ControllerError {
    #[error("controller already halted ({0:?})")]
    Halted(HaltReason),
    #[error("collision check cadence must be at least 1 step")]
    CheckCadence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaltReason {
    Stop,
    Collision,
    Goal,
    Budget,
}

impl HaltReason {
    pub fn name(self) -> &'static str {
        match self {
            HaltReason::Stop => "stop",
            HaltReason::Collision => "collision",
            HaltReason::Goal => "goal",
            HaltReason::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goal<T> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Scalar> Goal<T> {
    pub fn contains(&self, p: Point<T>) -> bool {
        self.center.distance(p) <= self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManeuverKind {
    Forward,
    TurnLeft,
    TurnRight,
    Halt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManeuverPlan<T> {
    pub kind: ManeuverKind,
    pub steps: u32,
    pub steer: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState<T> {
    pub pose: Pose<T>,
    /// Number of completed ticks.
    pub step_index: u64,
    pub last_scan: Option<ScanVector>,
    pub last_decision: Option<Decision>,
    /// Whether the last decision came from the rule fallback instead of the network.
    pub last_fallback: bool,
    halted: Option<HaltReason>,
}

impl<T: Scalar> ControllerState<T> {
    pub fn new(pose: Pose<T>) -> Self {
        Self { pose, step_index: 0, last_scan: None, last_decision: None, last_fallback: false, halted: None }
    }

    pub fn halted(&self) -> Option<HaltReason> {
        self.halted
    }

    pub fn is_halted(&self) -> bool {
        self.halted.is_some()
    }

    /// Halts the controller; an existing halt reason is kept.
    pub fn halt(&mut self, reason: HaltReason) {
        self.halted.get_or_insert(reason);
    }
}

/// Everything a tick needs besides the state.
#[derive(Debug, Clone)]
pub struct Robot<'a, T> {
    pub env: &'a Environment<T>,
    pub net: &'a Network<T>,
    pub sensor: &'a SensorConfig<T>,
    pub motion: &'a MotionConfig<T>,
    pub decision: &'a DecisionConfig<T>,
    pub goal: Option<Goal<T>>,
    pub check_every: u32,
}

/// Reads the five scan angles in the acquisition order 0°, −45°, −90°, 0°, +45°, +90°.
///
/// The repeated 0° reading is discarded; X3 keeps the first one. With noise
/// enabled the jitter comes from `jitter`, one draw per acquisition.
pub fn scan_sequence<T: Scalar>(
    pose: &Pose<T>,
    env: &Environment<T>,
    scfg: &SensorConfig<T>,
    mcfg: &MotionConfig<T>,
    mut jitter: impl FnMut() -> i16,
) -> ScanVector {
    // Indices into X1..X5 in the order the sensor is swept.
    const ACQUISITION: [usize; 6] = [2, 1, 0, 2, 3, 4];
    let mut adc = [0u8; 5];
    let mut seen = [false; 5];
    for slot in ACQUISITION {
        let reading = apply_jitter(sense(pose, mcfg.scan_angles[slot], env, scfg), jitter());
        if !seen[slot] {
            adc[slot] = reading;
            seen[slot] = true;
        }
    }
    ScanVector::from_adc(adc, scfg.th)
}

/// Noise source for one tick, derived from the seed and tick index only.
fn tick_jitter(noise: u8, seed: u64, tick: u64) -> impl FnMut() -> i16 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tick.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let k = noise as i16;
    move || if k == 0 { 0 } else { rng.gen_range(-k..=k) }
}

/// Rule form of the decision table: stop when boxed in front and both sides,
/// straight while the front is clear, otherwise turn toward the open side.
pub fn oracle_decide(bits: ObstacleBits) -> Decision {
    let [x1, _, x3, _, x5] = bits.0;
    if x1 && x3 && x5 {
        Decision::Stop
    } else if !x3 {
        Decision::Straight
    } else if !x1 {
        Decision::Left
    } else {
        Decision::Right
    }
}

/// Network decision with the all-ones stop override and rule fallback when undecided.
/// Returns the decision and whether the fallback was used.
pub fn decide<T: Scalar>(net: &Network<T>, bits: ObstacleBits, dcfg: &DecisionConfig<T>) -> (Decision, bool) {
    if bits == ObstacleBits::ALL_SET {
        return (Decision::Stop, false);
    }
    match classify(net, bits, dcfg) {
        Classification::Decided(d) => (d, false),
        Classification::Undecided => {
            let d = oracle_decide(bits);
            log::info!("network undecided on {bits}; falling back to rule decision {d}");
            (d, true)
        }
    }
}

pub fn plan<T: Scalar>(decision: Decision, mcfg: &MotionConfig<T>) -> ManeuverPlan<T> {
    let turn_steps = || turn_step_count(mcfg, mcfg.turn_angle);
    let steer = mcfg.turn_steer_angle.abs();
    match decision {
        Decision::Straight => ManeuverPlan { kind: ManeuverKind::Forward, steps: mcfg.steps_per_6in, steer: T::zero() },
        Decision::Left => ManeuverPlan { kind: ManeuverKind::TurnLeft, steps: turn_steps(), steer: -steer },
        Decision::Right => ManeuverPlan { kind: ManeuverKind::TurnRight, steps: turn_steps(), steer },
        Decision::Stop => ManeuverPlan { kind: ManeuverKind::Halt, steps: 0, steer: T::zero() },
    }
}

/// One scan–decide–act cycle.
///
/// The maneuver is driven in chunks of `robot.check_every` steps; after each
/// chunk a collision halts the robot at the offending pose, and entering the
/// goal region halts it there.
pub fn tick<T: Scalar>(
    state: &ControllerState<T>,
    robot: &Robot<'_, T>,
) -> Result<ControllerState<T>, ControllerError> {
    if let Some(reason) = state.halted {
        return Err(ControllerError::Halted(reason));
    }
    if robot.check_every == 0 {
        return Err(ControllerError::CheckCadence);
    }
    let mut next = state.clone();
    let jitter = tick_jitter(robot.sensor.noise, robot.sensor.noise_seed, state.step_index);
    let scan = scan_sequence(&state.pose, robot.env, robot.sensor, robot.motion, jitter);
    let (decision, fallback) = decide(robot.net, scan.bits(), robot.decision);
    next.last_scan = Some(scan);
    next.last_decision = Some(decision);
    next.last_fallback = fallback;
    next.step_index += 1;

    let maneuver = plan(decision, robot.motion);
    if maneuver.kind == ManeuverKind::Halt {
        next.halt(HaltReason::Stop);
        return Ok(next);
    }

    let mut remaining = maneuver.steps;
    while remaining > 0 {
        let chunk = remaining.min(robot.check_every);
        let cmd = StepCommand { n_steps: chunk, steer_angle: maneuver.steer };
        next.pose = drive(next.pose, cmd, robot.motion).expect("planned steer angle is within limits");
        remaining -= chunk;
        if point_in_collision(next.pose.position(), robot.motion.body_radius, robot.env) {
            next.halt(HaltReason::Collision);
            return Ok(next);
        }
        if robot.goal.is_some_and(|g| g.contains(next.pose.position())) {
            next.halt(HaltReason::Goal);
            return Ok(next);
        }
    }
    Ok(next)
}
