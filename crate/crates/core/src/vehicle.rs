//! Vehicle parameters and drive-log types.
//!
//! Everything is SI internally: m/s, N, kg, rad, s. Throttle and brake are
//! the raw integer signals read from the car, with configurable ranges.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRAVITY: f64 = 9.81;
pub const DEFAULT_THROTTLE_RANGE: SignalRange = SignalRange { min: 0, max: 186 };
pub const DEFAULT_BRAKE_RANGE: SignalRange = SignalRange { min: 0, max: 255 };

/// Sampling gaps longer than this split a log into independent segments.
pub const SEGMENT_GAP_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signal {
    Throttle,
    Brake,
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Throttle => f.write_str("throttle"),
            Signal::Brake => f.write_str("brake"),
        }
    }
}

/// Inclusive integer interval of a command signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct SignalRange {
    pub min: i32,
    pub max: i32,
}

impl From<[i32; 2]> for SignalRange {
    fn from([min, max]: [i32; 2]) -> Self {
        SignalRange { min, max }
    }
}

impl From<SignalRange> for [i32; 2] {
    fn from(r: SignalRange) -> Self {
        [r.min, r.max]
    }
}

impl SignalRange {
    pub fn contains(&self, value: i32) -> bool {
        (self.min..=self.max).contains(&value)
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min as f64, self.max as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wheel {
    #[serde(rename = "inertia_kgm2")]
    pub inertia: f64,
    #[serde(rename = "radius_m")]
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    #[serde(rename = "base_mass_kg")]
    pub base_mass: f64,
    #[serde(rename = "payload_mass_kg", default)]
    pub payload_mass: f64,
    #[serde(rename = "gravity_mps2", default = "default_gravity")]
    pub gravity: f64,
    #[serde(default)]
    pub wheels: Vec<Wheel>,
    #[serde(default = "default_throttle_range")]
    pub throttle_range: SignalRange,
    #[serde(default = "default_brake_range")]
    pub brake_range: SignalRange,
}

fn default_gravity() -> f64 {
    DEFAULT_GRAVITY
}

fn default_throttle_range() -> SignalRange {
    DEFAULT_THROTTLE_RANGE
}

fn default_brake_range() -> SignalRange {
    DEFAULT_BRAKE_RANGE
}

impl VehicleParams {
    pub fn new(base_mass: f64, payload_mass: f64, wheels: Vec<Wheel>) -> Result<Self> {
        let params = VehicleParams {
            base_mass,
            payload_mass,
            gravity: DEFAULT_GRAVITY,
            wheels,
            throttle_range: DEFAULT_THROTTLE_RANGE,
            brake_range: DEFAULT_BRAKE_RANGE,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let params: VehicleParams = serde_json::from_str(s)?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("vehicle params serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.base_mass.is_finite() && self.base_mass > 0.0) {
            return bad(format!("base mass must be > 0, got {}", self.base_mass));
        }
        if !(self.payload_mass.is_finite() && self.payload_mass >= 0.0) {
            return bad(format!(
                "payload mass must be >= 0, got {}",
                self.payload_mass
            ));
        }
        if !(self.gravity.is_finite() && self.gravity > 0.0) {
            return bad(format!("gravity must be > 0, got {}", self.gravity));
        }
        for (i, w) in self.wheels.iter().enumerate() {
            if !(w.radius.is_finite() && w.radius > 0.0) {
                return bad(format!("wheel {i}: radius must be > 0, got {}", w.radius));
            }
            if !(w.inertia.is_finite() && w.inertia >= 0.0) {
                return bad(format!(
                    "wheel {i}: inertia must be >= 0, got {}",
                    w.inertia
                ));
            }
        }
        for (name, r) in [
            ("throttle", self.throttle_range),
            ("brake", self.brake_range),
        ] {
            if r.min >= r.max {
                return bad(format!("{name} range [{}, {}] is empty", r.min, r.max));
            }
        }
        Ok(())
    }

    /// Translational mass `m`: the car plus payload.
    pub fn total_mass(&self) -> f64 {
        self.base_mass + self.payload_mass
    }

    /// Mass with the same kinetic energy as the car including rotating
    /// wheels: `m + sum(J / R^2)`.
    pub fn equivalent_mass(&self) -> Result<f64> {
        let mut rotating = 0.0;
        for (i, w) in self.wheels.iter().enumerate() {
            if !(w.radius > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "wheel {i}: radius must be > 0, got {}",
                    w.radius
                )));
            }
            rotating += w.inertia / (w.radius * w.radius);
        }
        Ok(self.total_mass() + rotating)
    }

    pub fn range(&self, signal: Signal) -> SignalRange {
        match signal {
            Signal::Throttle => self.throttle_range,
            Signal::Brake => self.brake_range,
        }
    }
}

/// Gear position during a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gear {
    Neutral,
    Drive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMetadata {
    pub gear: Gear,
    #[serde(default)]
    pub description: String,
}

/// One telemetry sample. Speed in m/s, slope in rad (positive uphill).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSample {
    pub t: f64,
    pub speed: f64,
    pub throttle: i32,
    pub brake: i32,
    pub slope: f64,
}

impl DriveSample {
    pub fn signal(&self, signal: Signal) -> i32 {
        match signal {
            Signal::Throttle => self.throttle,
            Signal::Brake => self.brake,
        }
    }
}

/// Time-ordered telemetry with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveLog {
    metadata: LogMetadata,
    samples: Vec<DriveSample>,
}

impl<'de> Deserialize<'de> for DriveLog {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            metadata: LogMetadata,
            samples: Vec<DriveSample>,
        }
        let raw = Raw::deserialize(d)?;
        DriveLog::new(raw.samples, raw.metadata).map_err(serde::de::Error::custom)
    }
}

impl DriveLog {
    pub fn new(samples: Vec<DriveSample>, metadata: LogMetadata) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.speed.is_finite() && s.slope.is_finite()) {
                return Err(Error::Schema(format!("sample {i} has a non-finite value")));
            }
            if s.speed < 0.0 {
                return Err(Error::Schema(format!(
                    "sample {i} has negative speed {}",
                    s.speed
                )));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::Schema(format!(
                "time is not strictly increasing at sample {}",
                i + 1
            )));
        }
        Ok(DriveLog { metadata, samples })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("drive log serialize")
    }

    pub fn metadata(&self) -> &LogMetadata {
        &self.metadata
    }

    pub fn samples(&self) -> &[DriveSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index ranges of the contiguous pieces of the log, split wherever
    /// consecutive samples are more than [`SEGMENT_GAP_S`] apart.
    pub fn segments(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..self.samples.len() {
            if self.samples[i].t - self.samples[i - 1].t > SEGMENT_GAP_S {
                out.push(start..i);
                start = i;
            }
        }
        if start < self.samples.len() {
            out.push(start..self.samples.len());
        }
        out
    }

    /// Splits the log wherever `signal` changes value, so each piece holds a
    /// single constant command level.
    pub fn split_constant(&self, signal: Signal) -> Vec<DriveLog> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.samples.len() {
            let boundary = i == self.samples.len()
                || self.samples[i].signal(signal) != self.samples[i - 1].signal(signal);
            if boundary {
                out.push(DriveLog {
                    metadata: self.metadata.clone(),
                    samples: self.samples[start..i].to_vec(),
                });
                start = i;
            }
        }
        out
    }

    /// The log with its time axis mirrored: `t -> -t`, sample order reversed.
    pub fn time_reversed(&self) -> DriveLog {
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|s| DriveSample { t: -s.t, ..*s })
            .collect();
        DriveLog {
            metadata: self.metadata.clone(),
            samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zoe_wheels() -> Vec<Wheel> {
        vec![
            Wheel {
                inertia: 0.86,
                radius: 0.29
            };
            4
        ]
    }

    #[test]
    fn total_mass_adds_payload() {
        assert_eq!(
            VehicleParams::new(1480.0, 200.0, vec![])
                .unwrap()
                .total_mass(),
            1680.0
        );
        assert_eq!(
            VehicleParams::new(1480.0, 0.0, vec![])
                .unwrap()
                .total_mass(),
            1480.0
        );
        assert_eq!(
            VehicleParams::new(1000.0, 250.0, vec![])
                .unwrap()
                .total_mass(),
            1250.0
        );
    }

    #[test]
    fn equivalent_mass_of_reference_car() {
        let p = VehicleParams::new(1480.0, 200.0, zoe_wheels()).unwrap();
        let meq = p.equivalent_mass().unwrap();
        assert!((meq - 1720.0).abs() <= 1.0, "{meq}");
        // 4 * 0.86 / 0.29^2
        assert!((meq - (1680.0 + 4.0 * 0.86 / 0.0841)).abs() < 1e-9);
    }

    #[test]
    fn equivalent_mass_degenerate_wheels() {
        let p = VehicleParams::new(1480.0, 200.0, vec![]).unwrap();
        assert_eq!(p.equivalent_mass().unwrap(), 1680.0);
        let p = VehicleParams::new(
            1480.0,
            200.0,
            vec![Wheel {
                inertia: 0.0,
                radius: 0.3,
            }],
        )
        .unwrap();
        assert_eq!(p.equivalent_mass().unwrap(), 1680.0);
    }

    #[test]
    fn zero_radius_is_rejected() {
        let mut p = VehicleParams::new(1480.0, 200.0, vec![]).unwrap();
        p.wheels.push(Wheel {
            inertia: 0.86,
            radius: 0.0,
        });
        assert!(matches!(
            p.equivalent_mass(),
            Err(Error::InvalidParameter(_))
        ));
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_reject_bad_values() {
        assert!(VehicleParams::new(0.0, 0.0, vec![]).is_err());
        assert!(VehicleParams::new(1000.0, -1.0, vec![]).is_err());
        let mut p = VehicleParams::new(1000.0, 0.0, vec![]).unwrap();
        p.brake_range = SignalRange { min: 10, max: 10 };
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_json_schema() {
        let json = r#"{"base_mass_kg":1480,"payload_mass_kg":200,
            "wheels":[{"inertia_kgm2":0.86,"radius_m":0.29}],
            "throttle_range":[0,186],"brake_range":[0,255]}"#;
        let p = VehicleParams::from_json_str(json).unwrap();
        assert_eq!(p.gravity, 9.81);
        assert_eq!(p.throttle_range, SignalRange { min: 0, max: 186 });
        let back = VehicleParams::from_json_str(&p.to_json_string()).unwrap();
        assert_eq!(back, p);
    }

    fn sample(t: f64, throttle: i32) -> DriveSample {
        DriveSample {
            t,
            speed: 1.0,
            throttle,
            brake: 0,
            slope: 0.0,
        }
    }

    fn meta() -> LogMetadata {
        LogMetadata {
            gear: Gear::Drive,
            description: String::new(),
        }
    }

    #[test]
    fn log_rejects_repeated_time() {
        let r = DriveLog::new(vec![sample(0.0, 0), sample(0.0, 0)], meta());
        assert!(r.is_err());
    }

    #[test]
    fn segments_split_on_gaps() {
        let log = DriveLog::new(
            vec![
                sample(0.0, 0),
                sample(0.01, 0),
                sample(0.6, 0),
                sample(0.61, 0),
                sample(1.2, 0),
            ],
            meta(),
        )
        .unwrap();
        assert_eq!(log.segments(), vec![0..2, 2..4, 4..5]);
    }

    #[test]
    fn split_constant_groups_levels() {
        let log = DriveLog::new(
            vec![
                sample(0.0, 0),
                sample(0.01, 0),
                sample(0.02, 50),
                sample(0.03, 50),
                sample(0.04, 0),
            ],
            meta(),
        )
        .unwrap();
        let parts = log.split_constant(Signal::Throttle);
        let lens: Vec<_> = parts.iter().map(|p| p.len()).collect();
        assert_eq!(lens, vec![2, 2, 1]);
        assert_eq!(parts[1].samples()[0].throttle, 50);
    }
}
