//! Car-like kinematics driven in stepper-motor quanta.
//!
//! Bicycle model about the rear axle. Each step first turns the heading by
//! `s/L · tan(φ)` and then advances `s` along the new heading, where `s` is the
//! distance of one drive step and `L` the wheelbase.

use thiserror::Error;

use crate::world::{normalize_angle, Pose};
use crate::Scalar;

/// Calibrated stepper count for 6 inches: 7 outer × 50 inner loops × 4 phases.
pub const DEFAULT_STEPS_PER_6IN: u32 = 7 * 50 * 4;
pub const DEFAULT_WHEELBASE: f64 = 10.0;
pub const DEFAULT_BODY_RADIUS: f64 = 3.0;
pub const DEFAULT_TURN_STEER_DEG: f64 = 60.0;
pub const DEFAULT_TURN_ANGLE_DEG: f64 = 90.0;
pub const DEFAULT_SCAN_ANGLES_DEG: [f64; 5] = [-90.0, -45.0, 0.0, 45.0, 90.0];

#[derive(Debug, Error, PartialEq)]
pub enum VehicleError {
    #[error("steer angle {0} rad is not inside (-90°, 90°)")]
    SteerOutOfRange(f64),
    #[error("invalid motion config: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionConfig<T> {
    pub steps_per_6in: u32,
    pub wheelbase: T,
    pub body_radius: T,
    /// Magnitude of the steering angle used for turn maneuvers.
    pub turn_steer_angle: T,
    /// Heading change a turn maneuver aims for.
    pub turn_angle: T,
    /// Scan directions relative to heading, X1..X5.
    pub scan_angles: [T; 5],
}

impl<T: Scalar> Default for MotionConfig<T> {
    fn default() -> Self {
        Self {
            steps_per_6in: DEFAULT_STEPS_PER_6IN,
            wheelbase: T::lit(DEFAULT_WHEELBASE),
            body_radius: T::lit(DEFAULT_BODY_RADIUS),
            turn_steer_angle: T::lit(DEFAULT_TURN_STEER_DEG).to_radians(),
            turn_angle: T::lit(DEFAULT_TURN_ANGLE_DEG).to_radians(),
            scan_angles: DEFAULT_SCAN_ANGLES_DEG.map(|d| T::lit(d).to_radians()),
        }
    }
}

impl<T: Scalar> MotionConfig<T> {
    pub fn validate(&self) -> Result<(), VehicleError> {
        if self.steps_per_6in == 0 {
            return Err(VehicleError::Config("steps_per_6in must be at least 1"));
        }
        if !(self.wheelbase > T::zero() && self.wheelbase.is_finite()) {
            return Err(VehicleError::Config("wheelbase must be positive"));
        }
        if !(self.body_radius >= T::zero() && self.body_radius.is_finite()) {
            return Err(VehicleError::Config("body_radius must be non-negative"));
        }
        check_steer(self.turn_steer_angle)?;
        if self.turn_steer_angle == T::zero() {
            return Err(VehicleError::Config("turn steer angle must be non-zero"));
        }
        if !(self.turn_angle > T::zero() && self.turn_angle.is_finite()) {
            return Err(VehicleError::Config("turn angle must be positive"));
        }
        if !self.scan_angles.iter().all(|a| a.is_finite()) || !self.scan_angles.windows(2).all(|w| w[0] < w[1]) {
            return Err(VehicleError::Config("scan angles must be finite and strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCommand<T> {
    pub n_steps: u32,
    pub steer_angle: T,
}

/// Inches travelled per drive step.
pub fn step_distance<T: Scalar>(cfg: &MotionConfig<T>) -> T {
    T::lit(6.0) / T::from_u32(cfg.steps_per_6in).unwrap()
}

fn check_steer<T: Scalar>(steer: T) -> Result<(), VehicleError> {
    if steer.is_finite() && steer.abs() < T::FRAC_PI_2() {
        Ok(())
    } else {
        Err(VehicleError::SteerOutOfRange(steer.to_f64_lossy()))
    }
}

/// Heading increment per step at the given steer angle.
fn heading_per_step<T: Scalar>(steer: T, cfg: &MotionConfig<T>) -> T {
    step_distance(cfg) / cfg.wheelbase * steer.tan()
}

/// Integrates `cmd.n_steps` quantized steps.
///
/// Splitting a command into consecutive commands with the same steer angle
/// gives a bitwise identical pose.
pub fn drive<T: Scalar>(pose: Pose<T>, cmd: StepCommand<T>, cfg: &MotionConfig<T>) -> Result<Pose<T>, VehicleError> {
    check_steer(cmd.steer_angle)?;
    let s = step_distance(cfg);
    let dh = heading_per_step(cmd.steer_angle, cfg);
    let (mut x, mut y, mut h) = (pose.x(), pose.y(), pose.heading());
    for _ in 0..cmd.n_steps {
        h = normalize_angle(h + dh);
        x = x + s * h.cos();
        y = y + s * h.sin();
    }
    Ok(Pose::new(x, y, h))
}

/// Fewest steps at `turn_steer_angle` whose cumulative heading change reaches `heading_change`.
pub fn turn_step_count<T: Scalar>(cfg: &MotionConfig<T>, heading_change: T) -> u32 {
    let per_step = heading_per_step(cfg.turn_steer_angle, cfg).abs();
    let mut n = (heading_change / per_step).ceil().to_u32().unwrap_or(u32::MAX).max(1);
    while n > 1 && T::from_u32(n - 1).unwrap() * per_step >= heading_change {
        n -= 1;
    }
    while T::from_u32(n).unwrap() * per_step < heading_change {
        n += 1;
    }
    n
}
