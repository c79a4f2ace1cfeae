//! IR range sensor: distance to 8-bit ADC through a piecewise-linear calibration,
//! and the binary threshold that turns readings into obstacle bits.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::world::{cast_ray, Environment, Pose};
use crate::Scalar;

/// ADC threshold at which a reading counts as an obstacle.
pub const DEFAULT_TH: u8 = 95;
/// Distance (inches) at which the default calibration reads exactly [`DEFAULT_TH`].
pub const DEFAULT_TURN_DISTANCE: f64 = 12.0;
pub const DEFAULT_MAX_RANGE: f64 = 60.0;

const DEFAULT_CALIBRATION: &str = include_str!("../data/default_calibration.txt");

#[derive(Debug, Error, PartialEq)]
pub enum SensorError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("calibration needs at least 2 anchors, got {0}")]
    TooFewAnchors(usize),
    #[error("calibration distances must be finite, non-negative and strictly increasing (anchor {0})")]
    DistanceOrder(usize),
    #[error("calibration ADC values must not increase with distance (anchor {0})")]
    AdcOrder(usize),
    #[error("max_range must be positive and finite")]
    MaxRange,
}

/// Monotone distance→ADC response, linear between anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable<T> {
    anchors: Vec<(T, u8)>,
}

impl<T: Scalar> CalibrationTable<T> {
    pub fn new(anchors: Vec<(T, u8)>) -> Result<Self, SensorError> {
        if anchors.len() < 2 {
            return Err(SensorError::TooFewAnchors(anchors.len()));
        }
        for (i, (d, _)) in anchors.iter().enumerate() {
            if !d.is_finite() || *d < T::zero() {
                return Err(SensorError::DistanceOrder(i));
            }
        }
        for (i, pair) in anchors.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(SensorError::DistanceOrder(i + 1));
            }
            if pair[1].1 > pair[0].1 {
                return Err(SensorError::AdcOrder(i + 1));
            }
        }
        Ok(Self { anchors })
    }

    /// The bundled synthetic table (6-inch anchors over 6..30 in, ADC 95 at 12 in).
    pub fn default_table() -> Self {
        Self::parse(DEFAULT_CALIBRATION).expect("bundled calibration is valid")
    }

    /// Parses `distance adc` pairs, one per line. `#` starts a comment; an
    /// optional leading `CAL1` line is accepted as the format tag.
    pub fn parse(text: &str) -> Result<Self, SensorError> {
        let mut anchors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() || (anchors.is_empty() && content == "CAL1") {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [d, adc] = fields.as_slice() else {
                return Err(SensorError::Parse {
                    line,
                    msg: format!("expected `distance adc`, got {} fields", fields.len()),
                });
            };
            let d: f64 = d.parse().map_err(|_| SensorError::Parse { line, msg: format!("bad distance `{d}`") })?;
            let adc: u8 = adc.parse().map_err(|_| SensorError::Parse {
                line,
                msg: format!("ADC value `{adc}` is not an integer in 0..=255"),
            })?;
            anchors.push((T::lit(d), adc));
        }
        Self::new(anchors)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("CAL1\n");
        for (d, adc) in &self.anchors {
            out.push_str(&format!("{d} {adc}\n"));
        }
        out
    }

    pub fn anchors(&self) -> &[(T, u8)] {
        &self.anchors
    }

    /// ADC reading for an obstacle at `d` inches, clamped to the end anchors.
    pub fn adc_from_distance(&self, d: T) -> u8 {
        let first = self.anchors[0];
        let last = self.anchors[self.anchors.len() - 1];
        if d <= first.0 {
            return first.1;
        }
        if d >= last.0 {
            return last.1;
        }
        let i = self.anchors.partition_point(|(ad, _)| *ad <= d);
        let (d0, a0) = self.anchors[i - 1];
        let (d1, a1) = self.anchors[i];
        let a0 = T::from_u8(a0).unwrap();
        let a1 = T::from_u8(a1).unwrap();
        let v = a0 + (a1 - a0) * (d - d0) / (d1 - d0);
        v.round().max(T::zero()).min(T::lit(255.0)).to_u8().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorConfig<T> {
    pub calibration: CalibrationTable<T>,
    pub th: u8,
    pub max_range: T,
    /// Uniform integer jitter amplitude; 0 disables noise.
    pub noise: u8,
    pub noise_seed: u64,
}

impl<T: Scalar> SensorConfig<T> {
    pub fn new(calibration: CalibrationTable<T>, th: u8, max_range: T) -> Result<Self, SensorError> {
        if !(max_range > T::zero() && max_range.is_finite()) {
            return Err(SensorError::MaxRange);
        }
        Ok(Self { calibration, th, max_range, noise: 0, noise_seed: 0 })
    }
}

impl<T: Scalar> Default for SensorConfig<T> {
    fn default() -> Self {
        Self::new(CalibrationTable::default_table(), DEFAULT_TH, T::lit(DEFAULT_MAX_RANGE))
            .expect("default sensor config is valid")
    }
}

/// Binary threshold: obstacle when `adc >= th`.
pub fn threshold_bit(adc: u8, th: u8) -> bool {
    adc >= th
}

/// Simulated ADC reading for a scan at `scan_angle` relative to the pose heading.
pub fn sense<T: Scalar>(pose: &Pose<T>, scan_angle: T, env: &Environment<T>, cfg: &SensorConfig<T>) -> u8 {
    let d = cast_ray(pose.position(), pose.heading() + scan_angle, env, cfg.max_range);
    cfg.calibration.adc_from_distance(d)
}

/// Adds a signed jitter to a reading, saturating at the 8-bit limits.
pub fn apply_jitter(adc: u8, offset: i16) -> u8 {
    (adc as i16 + offset).clamp(0, 255) as u8
}

/// Obstacle bits X1..X5 for scan angles −90°, −45°, 0°, +45°, +90°.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ObstacleBits(pub [bool; 5]);

impl ObstacleBits {
    pub const ALL_SET: Self = Self([true; 5]);

    /// Bit pattern from an integer with X1 as the most significant of 5 bits.
    pub fn from_index(index: u8) -> Self {
        let mut bits = [false; 5];
        for (i, b) in bits.iter_mut().enumerate() {
            *b = index >> (4 - i) & 1 == 1;
        }
        Self(bits)
    }

    /// All 32 patterns in index order.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..32u8).map(Self::from_index)
    }

    pub fn x(&self, n: usize) -> bool {
        self.0[n - 1]
    }

    pub fn as_inputs<T: Scalar>(&self) -> [T; 5] {
        self.0.map(|b| if b { T::one() } else { T::zero() })
    }
}

impl fmt::Display for ObstacleBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ObstacleBits {
    type Err = String;

    /// Accepts `11011` or whitespace separated `1 1 0 1 1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if digits.len() != 5 {
            return Err(format!("expected 5 bits, got `{s}`"));
        }
        let mut bits = [false; 5];
        for (b, c) in bits.iter_mut().zip(digits) {
            *b = match c {
                '0' => false,
                '1' => true,
                other => return Err(format!("bit must be 0 or 1, got `{other}`")),
            };
        }
        Ok(Self(bits))
    }
}

/// Five ADC readings and the bits they threshold to, ordered X1..X5.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanVector {
    adc: [u8; 5],
    bits: ObstacleBits,
}

impl ScanVector {
    pub fn from_adc(adc: [u8; 5], th: u8) -> Self {
        Self { adc, bits: ObstacleBits(adc.map(|a| threshold_bit(a, th))) }
    }

    pub fn adc(&self) -> [u8; 5] {
        self.adc
    }

    pub fn bits(&self) -> ObstacleBits {
        self.bits
    }
}
