//! Deterministic simulator and training toolkit for a scanning IR wall-follower.
//!
//! A robot scans five angles with an IR range sensor, thresholds the 8-bit
//! readings into obstacle bits, asks a small tanh network which way to go and
//! executes the answer as a stepper-quantized car-like maneuver.
//!
//! The continuous math is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root pin everything to `f64`, which is what the
//! simulator and CLI use.
//!
//! World frame: inches, screen convention (x right, y down), so a positive
//! angle turns clockwise. Negative scan and steer angles point to the
//! robot's left.

pub mod ann;
pub mod cli;
pub mod controller;
pub mod scalar;
pub mod sensor;
pub mod sim;
pub mod vehicle;
pub mod world;

pub use scalar::Scalar;

pub use ann::{Classification, Decision};
pub use sensor::{ObstacleBits, ScanVector};

pub type Point = world::Point<f64>;
pub type WallSegment = world::WallSegment<f64>;
pub type Environment = world::Environment<f64>;
pub type Pose = world::Pose<f64>;
pub type CalibrationTable = sensor::CalibrationTable<f64>;
pub type SensorConfig = sensor::SensorConfig<f64>;
pub type Network = ann::Network<f64>;
pub type Hyperparams = ann::Hyperparams<f64>;
pub type DecisionConfig = ann::DecisionConfig<f64>;
pub type MotionConfig = vehicle::MotionConfig<f64>;
pub type StepCommand = vehicle::StepCommand<f64>;
pub type ControllerState = controller::ControllerState<f64>;
pub type ManeuverPlan = controller::ManeuverPlan<f64>;

pub type PoseF32 = world::Pose<f32>;
pub type NetworkF32 = ann::Network<f32>;
