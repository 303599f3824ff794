//! Force observations from protocol test logs via the longitudinal force
//! balance `F_p - m g sin(alpha) - F_f - F_b = m_eq a`.
//!
//! Each extractor solves the balance for one unknown force, with the other
//! forces either zero by protocol or taken from previously fitted models.

use crate::error::{Error, Result};
use crate::estimation::AccelSeries;
use crate::spline::{ForceKind, Spline1D};
use crate::vehicle::{DriveLog, Gear, Signal, VehicleParams};

/// Samples slower than this are dominated by quantization and skipped.
pub const MIN_EXTRACTION_SPEED: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ForceObservationSet {
    pub kind: ForceKind,
    /// Constant command level of the run; `None` for friction.
    pub signal_level: Option<i32>,
    /// (speed m/s, force N)
    pub points: Vec<(f64, f64)>,
}

struct Balance {
    mass: f64,
    equivalent_mass: f64,
    gravity: f64,
}

impl Balance {
    fn new(params: &VehicleParams) -> Result<Self> {
        params.validate()?;
        Ok(Balance {
            mass: params.total_mass(),
            equivalent_mass: params.equivalent_mass()?,
            gravity: params.gravity,
        })
    }

    fn grade(&self, slope: f64) -> f64 {
        self.mass * self.gravity * slope.sin()
    }

    fn inertial(&self, accel: f64) -> f64 {
        self.equivalent_mass * accel
    }
}

fn check_aligned(log: &DriveLog, accel: &AccelSeries) -> Result<()> {
    if accel.len() != log.len() {
        return Err(Error::InvalidParameter(format!(
            "acceleration series has {} samples, log has {}",
            accel.len(),
            log.len()
        )));
    }
    Ok(())
}

pub(crate) fn require_gear(log: &DriveLog, gear: Gear) -> Result<()> {
    if log.metadata().gear != gear {
        return Err(Error::ProtocolViolation {
            reason: format!(
                "log recorded in {:?}, test requires {:?}",
                log.metadata().gear,
                gear
            ),
            indices: Vec::new(),
        });
    }
    Ok(())
}

pub(crate) fn require_zero(log: &DriveLog, signal: Signal) -> Result<()> {
    let bad: Vec<usize> = log
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.signal(signal) != 0)
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::ProtocolViolation {
            reason: format!("nonzero {signal}"),
            indices: bad,
        });
    }
    Ok(())
}

/// The constant level of `signal` over the log, or a split request.
fn require_constant(log: &DriveLog, signal: Signal) -> Result<Option<i32>> {
    let samples = log.samples();
    let change_indices: Vec<usize> = (1..samples.len())
        .filter(|&i| samples[i].signal(signal) != samples[i - 1].signal(signal))
        .collect();
    if !change_indices.is_empty() {
        return Err(Error::SegmentSplit {
            signal,
            change_indices,
        });
    }
    Ok(samples.first().map(|s| s.signal(signal)))
}

fn usable<'a>(
    log: &'a DriveLog,
    accel: &'a AccelSeries,
) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    log.samples()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.speed >= MIN_EXTRACTION_SPEED)
        .filter_map(move |(i, s)| accel.get(i).map(|a| (s.speed, s.slope, a)))
}

/// Coast-down in neutral: `F_f = -m g sin(alpha) - m_eq a`.
pub fn extract_friction(
    log: &DriveLog,
    accel: &AccelSeries,
    params: &VehicleParams,
) -> Result<ForceObservationSet> {
    check_aligned(log, accel)?;
    require_gear(log, Gear::Neutral)?;
    let bad: Vec<usize> = log
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.throttle != 0 || s.brake != 0)
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::ProtocolViolation {
            reason: "coast-down requires zero throttle and zero brake".into(),
            indices: bad,
        });
    }
    let b = Balance::new(params)?;
    let points = usable(log, accel)
        .map(|(v, slope, a)| (v, -b.grade(slope) - b.inertial(a)))
        .collect();
    Ok(ForceObservationSet {
        kind: ForceKind::Friction,
        signal_level: None,
        points,
    })
}

/// Constant-throttle run in drive, no brake:
/// `F_p = F_f(v) + m g sin(alpha) + m_eq a`.
pub fn extract_propulsion(
    log: &DriveLog,
    accel: &AccelSeries,
    friction: &Spline1D,
    params: &VehicleParams,
) -> Result<ForceObservationSet> {
    check_aligned(log, accel)?;
    require_gear(log, Gear::Drive)?;
    require_zero(log, Signal::Brake)?;
    let level = require_constant(log, Signal::Throttle)?;
    let b = Balance::new(params)?;
    let points = usable(log, accel)
        .map(|(v, slope, a)| (v, friction.eval(v) + b.grade(slope) + b.inertial(a)))
        .collect();
    Ok(ForceObservationSet {
        kind: ForceKind::Propulsion,
        signal_level: level,
        points,
    })
}

/// Constant-brake run in drive, no throttle:
/// `F_b = F_p(v, 0) - F_f(v) - m g sin(alpha) - m_eq a`.
pub fn extract_braking(
    log: &DriveLog,
    accel: &AccelSeries,
    friction: &Spline1D,
    propulsion_at_zero_throttle: &Spline1D,
    params: &VehicleParams,
) -> Result<ForceObservationSet> {
    check_aligned(log, accel)?;
    require_gear(log, Gear::Drive)?;
    require_zero(log, Signal::Throttle)?;
    let level = require_constant(log, Signal::Brake)?;
    let b = Balance::new(params)?;
    let points = usable(log, accel)
        .map(|(v, slope, a)| {
            (
                v,
                propulsion_at_zero_throttle.eval(v)
                    - friction.eval(v)
                    - b.grade(slope)
                    - b.inertial(a),
            )
        })
        .collect();
    Ok(ForceObservationSet {
        kind: ForceKind::Braking,
        signal_level: level,
        points,
    })
}
