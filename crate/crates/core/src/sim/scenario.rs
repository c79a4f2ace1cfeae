//! Line-based scenario files.
//!
//! ```text
//! SCN1
//! WALL x1 y1 x2 y2
//! START x y heading_deg
//! GOAL x y radius
//! CAL distance adc          # inline calibration anchors (replace the default table)
//! SET key value...
//! ```
//!
//! Units are inches and degrees. `#` starts a comment. `SET calibration <path>`
//! loads a calibration file relative to the scenario's directory.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ann::DecisionConfig;
use crate::controller::{Goal, DEFAULT_CHECK_EVERY};
use crate::sensor::{CalibrationTable, SensorConfig, SensorError};
use crate::vehicle::MotionConfig;
use crate::world::{point_in_collision, Environment, Point, Pose, WallSegment, WorldError};

pub const SCENARIO_MAGIC: &str = "SCN1";
pub const DEFAULT_MAX_TICKS: u32 = 200;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Invariant(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { line, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub env: Environment<f64>,
    pub start: Pose<f64>,
    pub goal: Option<Goal<f64>>,
    pub sensor: SensorConfig<f64>,
    pub motion: MotionConfig<f64>,
    pub decision: DecisionConfig<f64>,
    pub max_ticks: u32,
    pub check_every: u32,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_owned(), source })?;
        Self::parse(&text, path.parent())
    }

    /// Parses scenario text; `base_dir` resolves `SET calibration` paths.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, ScenarioError> {
        let mut walls = Vec::new();
        let mut start = None;
        let mut goal = None;
        let mut cal_anchors = Vec::new();
        let mut calibration = None;
        let mut sensor = SensorConfig::<f64>::default();
        let mut motion = MotionConfig::<f64>::default();
        let mut decision = DecisionConfig::<f64>::default();
        let mut max_ticks = DEFAULT_MAX_TICKS;
        let mut check_every = DEFAULT_CHECK_EVERY;
        let mut saw_magic = false;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !saw_magic {
                if tokens != [SCENARIO_MAGIC] {
                    return Err(parse_err(line, format!("expected `{SCENARIO_MAGIC}` header")));
                }
                saw_magic = true;
                continue;
            }
            let (record, args) = tokens.split_first().unwrap();
            let nums = |n: usize| -> Result<Vec<f64>, ScenarioError> {
                if args.len() != n {
                    return Err(parse_err(line, format!("{record} takes {n} values, got {}", args.len())));
                }
                args.iter()
                    .map(|a| {
                        a.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| parse_err(line, format!("bad number `{a}`")))
                    })
                    .collect()
            };
            match *record {
                "WALL" => {
                    let v = nums(4)?;
                    let wall = WallSegment::new(Point::new(v[0], v[1]), Point::new(v[2], v[3]))
                        .map_err(|e: WorldError| parse_err(line, e.to_string()))?;
                    walls.push(wall);
                }
                "START" => {
                    let v = nums(3)?;
                    start = Some(Pose::new(v[0], v[1], v[2].to_radians()));
                }
                "GOAL" => {
                    let v = nums(3)?;
                    if v[2] <= 0.0 {
                        return Err(parse_err(line, "goal radius must be positive"));
                    }
                    goal = Some(Goal { center: Point::new(v[0], v[1]), radius: v[2] });
                }
                "CAL" => {
                    let v = nums(2)?;
                    if !(0.0..=255.0).contains(&v[1]) || v[1].fract() != 0.0 {
                        return Err(parse_err(line, "ADC value must be an integer in 0..=255"));
                    }
                    cal_anchors.push((v[0], v[1] as u8));
                }
                "SET" => {
                    let Some((key, values)) = args.split_first() else {
                        return Err(parse_err(line, "SET needs a key"));
                    };
                    if *key == "calibration" {
                        let [p] = values else {
                            return Err(parse_err(line, "SET calibration takes one path"));
                        };
                        let path = base_dir.map_or_else(|| PathBuf::from(p), |d| d.join(p));
                        let text =
                            std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io { path, source })?;
                        calibration = Some(CalibrationTable::parse(&text).map_err(|e| parse_err(line, e.to_string()))?);
                        continue;
                    }
                    apply_setting(
                        line,
                        key,
                        values,
                        &mut sensor,
                        &mut motion,
                        &mut decision,
                        &mut max_ticks,
                        &mut check_every,
                    )?;
                }
                other => return Err(parse_err(line, format!("unknown record `{other}`"))),
            }
        }
        if !saw_magic {
            return Err(parse_err(1, format!("expected `{SCENARIO_MAGIC}` header")));
        }

        if !cal_anchors.is_empty() {
            if calibration.is_some() {
                return Err(ScenarioError::Invariant("use either CAL records or SET calibration, not both".into()));
            }
            calibration = Some(
                CalibrationTable::new(cal_anchors).map_err(|e: SensorError| ScenarioError::Invariant(e.to_string()))?,
            );
        }
        if let Some(cal) = calibration {
            sensor.calibration = cal;
        }

        let env = Environment::new(walls).map_err(|e| ScenarioError::Invariant(e.to_string()))?;
        let start = start.ok_or_else(|| ScenarioError::Invariant("missing START".into()))?;
        motion.validate().map_err(|e| ScenarioError::Invariant(e.to_string()))?;
        if max_ticks == 0 {
            return Err(ScenarioError::Invariant("max_ticks must be positive".into()));
        }
        if check_every == 0 {
            return Err(ScenarioError::Invariant("check_every must be positive".into()));
        }
        if point_in_collision(start.position(), motion.body_radius, &env) {
            return Err(ScenarioError::Invariant(format!(
                "start ({}, {}) is within body radius {} of a wall",
                start.x(),
                start.y(),
                motion.body_radius
            )));
        }
        Ok(Self { env, start, goal, sensor, motion, decision, max_ticks, check_every })
    }

    /// Serializes every field, so `parse(to_text())` rebuilds the scenario.
    pub fn to_text(&self) -> String {
        let mut out = format!("{SCENARIO_MAGIC}\n");
        for w in self.env.walls() {
            out.push_str(&format!("WALL {} {} {} {}\n", w.a().x, w.a().y, w.b().x, w.b().y));
        }
        out.push_str(&format!("START {} {} {}\n", self.start.x(), self.start.y(), self.start.heading().to_degrees()));
        if let Some(g) = self.goal {
            out.push_str(&format!("GOAL {} {} {}\n", g.center.x, g.center.y, g.radius));
        }
        for (d, adc) in self.sensor.calibration.anchors() {
            out.push_str(&format!("CAL {d} {adc}\n"));
        }
        let m = &self.motion;
        let scan: Vec<String> = m.scan_angles.iter().map(|a| a.to_degrees().to_string()).collect();
        let settings = [
            ("th", self.sensor.th.to_string()),
            ("max_range", self.sensor.max_range.to_string()),
            ("noise", self.sensor.noise.to_string()),
            ("noise_seed", self.sensor.noise_seed.to_string()),
            ("steps_per_6in", m.steps_per_6in.to_string()),
            ("wheelbase", m.wheelbase.to_string()),
            ("body_radius", m.body_radius.to_string()),
            ("turn_steer_deg", m.turn_steer_angle.to_degrees().to_string()),
            ("turn_angle_deg", m.turn_angle.to_degrees().to_string()),
            ("scan_angles_deg", scan.join(" ")),
            ("activation_threshold", self.decision.activation_threshold.to_string()),
            ("max_ticks", self.max_ticks.to_string()),
            ("check_every", self.check_every.to_string()),
        ];
        for (k, v) in settings {
            out.push_str(&format!("SET {k} {v}\n"));
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn apply_setting(
    line: usize,
    key: &str,
    values: &[&str],
    sensor: &mut SensorConfig<f64>,
    motion: &mut MotionConfig<f64>,
    decision: &mut DecisionConfig<f64>,
    max_ticks: &mut u32,
    check_every: &mut u32,
) -> Result<(), ScenarioError> {
    fn one<V: std::str::FromStr>(line: usize, key: &str, values: &[&str]) -> Result<V, ScenarioError> {
        match values {
            [v] => v.parse().map_err(|_| parse_err(line, format!("bad value `{v}` for {key}"))),
            _ => Err(parse_err(line, format!("SET {key} takes one value"))),
        }
    }
    let real = |values: &[&str]| -> Result<f64, ScenarioError> {
        let v: f64 = one(line, key, values)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(parse_err(line, format!("{key} must be finite")))
        }
    };
    match key {
        "th" => sensor.th = one(line, key, values)?,
        "max_range" => {
            let v = real(values)?;
            if v <= 0.0 {
                return Err(parse_err(line, "max_range must be positive"));
            }
            sensor.max_range = v;
        }
        "noise" => sensor.noise = one(line, key, values)?,
        "noise_seed" => sensor.noise_seed = one(line, key, values)?,
        "steps_per_6in" => motion.steps_per_6in = one(line, key, values)?,
        "wheelbase" => motion.wheelbase = real(values)?,
        "body_radius" => motion.body_radius = real(values)?,
        "turn_steer_deg" => motion.turn_steer_angle = real(values)?.to_radians(),
        "turn_angle_deg" => motion.turn_angle = real(values)?.to_radians(),
        "scan_angles_deg" => {
            if values.len() != 5 {
                return Err(parse_err(line, "scan_angles_deg takes 5 values"));
            }
            for (slot, v) in motion.scan_angles.iter_mut().zip(values) {
                let deg: f64 = v.parse().map_err(|_| parse_err(line, format!("bad angle `{v}`")))?;
                *slot = deg.to_radians();
            }
        }
        "activation_threshold" => {
            *decision = DecisionConfig::new(real(values)?).map_err(|e| parse_err(line, e.to_string()))?;
        }
        "max_ticks" => *max_ticks = one(line, key, values)?,
        "check_every" => *check_every = one(line, key, values)?,
        other => return Err(parse_err(line, format!("unknown setting `{other}`"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "SCN1\nWALL 0 0 10 0\nSTART 5 5 -90\n";

    #[test]
    fn minimal_scenario_uses_defaults() {
        let s = Scenario::parse(MINIMAL, None).unwrap();
        assert_eq!(s.env.walls().len(), 1);
        assert!((s.start.heading() + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(s.sensor.th, 95);
        assert_eq!(s.motion.steps_per_6in, 1400);
        assert_eq!(s.max_ticks, DEFAULT_MAX_TICKS);
        assert!(s.goal.is_none());
    }

    #[test]
    fn settings_override_defaults() {
        let text = format!(
            "{MINIMAL}SET th 100\nSET steps_per_6in 700\nSET turn_steer_deg 45\nSET scan_angles_deg -80 -40 0 40 80\nGOAL 1 2 3\nSET max_ticks 7\n"
        );
        let s = Scenario::parse(&text, None).unwrap();
        assert_eq!(s.sensor.th, 100);
        assert_eq!(s.motion.steps_per_6in, 700);
        assert!((s.motion.turn_steer_angle - 45f64.to_radians()).abs() < 1e-15);
        assert!((s.motion.scan_angles[0] + 80f64.to_radians()).abs() < 1e-15);
        assert_eq!(s.goal, Some(Goal { center: Point::new(1.0, 2.0), radius: 3.0 }));
        assert_eq!(s.max_ticks, 7);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("SCN1\nWALL 0 0 10\nSTART 0 5 0\n", 2),
            ("SCN1\n# c\n\nWALL 0 0 1 x\n", 4),
            ("SCN1\nWALL 0 0 0 0\n", 2),
            ("SCN1\nWALL 0 0 1 0\nSET warp 9\n", 3),
            ("SCN1\nWALL 0 0 1 0\nSET th 300\n", 3),
            ("SCN1\nWALL 0 0 1 0\nGOAL 0 0 0\n", 3),
            ("SCN1\nBLOB 1\n", 2),
            ("WALL 0 0 1 0\n", 1),
        ];
        for (text, expected) in cases {
            match Scenario::parse(text, None) {
                Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, expected, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn invariant_errors() {
        let cases = [
            "SCN1\nSTART 0 0 0\n",
            "SCN1\nWALL 0 0 10 0\n",
            "SCN1\nWALL 0 0 10 0\nSTART 5 1 0\n",
            "SCN1\nWALL 0 0 10 0\nSTART 5 5 0\nSET max_ticks 0\n",
            "SCN1\nWALL 0 0 10 0\nSTART 5 5 0\nCAL 6 10\nCAL 12 20\n",
            "SCN1\nWALL 0 0 10 0\nSTART 5 5 0\nSET wheelbase 0\n",
        ];
        for text in cases {
            assert!(matches!(Scenario::parse(text, None), Err(ScenarioError::Invariant(_))), "{text}");
        }
    }

    #[test]
    fn calibration_file_is_resolved_relative_to_scenario() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("cal.txt"), "6 200\n12 95\n30 10\n").unwrap();
        let path = dir.path().join("s.scn");
        std::fs::write(&path, format!("{MINIMAL}SET calibration cal.txt\n")).unwrap();
        let s = Scenario::load(&path).unwrap();
        assert_eq!(s.sensor.calibration.anchors()[0], (6.0, 200));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = Scenario::load(Path::new("/nonexistent/x.scn")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.scn"));
    }

    #[test]
    fn written_scenario_reloads() {
        let text = format!(
            "{MINIMAL}GOAL 3 4 2\nCAL 5 150\nCAL 20 30\nSET noise 2\nSET wheelbase 8.5\nSET start_unused_check 1\n"
        );
        assert!(Scenario::parse(&text, None).is_err());
        let s = Scenario::parse(&text.replace("SET start_unused_check 1\n", ""), None).unwrap();
        let again = Scenario::parse(&s.to_text(), None).unwrap();
        assert_eq!(again.env, s.env);
        assert_eq!(again.goal, s.goal);
        assert_eq!(again.sensor, s.sensor);
        assert_eq!(again.max_ticks, s.max_ticks);
        assert_eq!(again.motion.steps_per_6in, s.motion.steps_per_6in);
        assert!((again.start.heading() - s.start.heading()).abs() < 1e-12);
        assert!((again.motion.turn_steer_angle - s.motion.turn_steer_angle).abs() < 1e-12);
    }
}
