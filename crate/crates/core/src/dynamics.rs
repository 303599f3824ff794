//! Direct model (commands to acceleration), fixed-step simulation, and the
//! inverse model (desired acceleration to a throttle or brake command).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::{ForceSurface, InversionFlag, Spline1D};
use crate::vehicle::{DriveLog, DriveSample, Gear, LogMetadata, VehicleParams};

/// Fitted friction, propulsion and braking models for one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    friction: Spline1D,
    propulsion: ForceSurface,
    braking: ForceSurface,
    params: VehicleParams,
    mass: f64,
    equivalent_mass: f64,
}

impl ModelSet {
    /// Both surfaces must start at level 0: the creep curve for propulsion
    /// and the regenerative curve for braking.
    pub fn new(
        friction: Spline1D,
        propulsion: ForceSurface,
        braking: ForceSurface,
        params: VehicleParams,
    ) -> Result<Self> {
        params.validate()?;
        for (name, s) in [("propulsion", &propulsion), ("braking", &braking)] {
            if s.levels()[0] != 0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} surface must start at level 0, starts at {}",
                    s.levels()[0]
                )));
            }
        }
        let mass = params.total_mass();
        let equivalent_mass = params.equivalent_mass()?;
        Ok(ModelSet {
            friction,
            propulsion,
            braking,
            params,
            mass,
            equivalent_mass,
        })
    }

    /// The same vehicle with the drivetrain disengaged: no propulsion, no
    /// braking of any kind.
    pub fn in_neutral(&self) -> ModelSet {
        let t = self.params.throttle_range;
        let b = self.params.brake_range;
        ModelSet {
            propulsion: ForceSurface::zero(0, t.max.max(1)),
            braking: ForceSurface::zero(0, b.max.max(1)),
            ..self.clone()
        }
    }

    pub fn friction(&self) -> &Spline1D {
        &self.friction
    }

    pub fn propulsion(&self) -> &ForceSurface {
        &self.propulsion
    }

    pub fn braking(&self) -> &ForceSurface {
        &self.braking
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn equivalent_mass(&self) -> f64 {
        self.equivalent_mass
    }

    fn grade_force(&self, slope: f64) -> f64 {
        self.mass * self.params.gravity * slope.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Forces {
    pub propulsion: f64,
    pub friction: f64,
    pub braking: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectOutput {
    pub accel: f64,
    pub forces: Forces,
}

/// Acceleration from the force balance. Regenerative braking (brake level
/// 0) only acts while the throttle is released.
pub fn direct_acceleration(
    m: &ModelSet,
    speed: f64,
    throttle: f64,
    brake: f64,
    slope: f64,
) -> DirectOutput {
    let friction = m.friction.eval(speed);
    let propulsion = m.propulsion.eval(speed, throttle);
    let braking = if throttle == 0.0 || brake > 0.0 {
        m.braking.eval(speed, brake)
    } else {
        0.0
    };
    let accel = (propulsion - m.grade_force(slope) - friction - braking) / m.equivalent_mass;
    DirectOutput {
        accel,
        forces: Forces {
            propulsion,
            friction,
            braking,
        },
    }
}

/// A stopped vehicle does not roll backwards: negative acceleration at
/// zero speed is held by static friction.
pub fn resolve_standstill(speed: f64, accel: f64) -> f64 {
    if speed <= 0.0 && accel < 0.0 {
        0.0
    } else {
        accel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Controls {
    pub throttle: f64,
    pub brake: f64,
    pub slope: f64,
}

/// Time-dependent commands and road slope for a simulation.
pub trait Schedule {
    fn controls(&self, t: f64) -> Controls;
}

impl<F: Fn(f64) -> Controls> Schedule for F {
    fn controls(&self, t: f64) -> Controls {
        self(t)
    }
}

/// Piecewise-constant schedule: each row holds until the next row's time.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    rows: Vec<(f64, Controls)>,
}

impl StepSchedule {
    pub fn new(rows: Vec<(f64, Controls)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Schema("schedule has no rows".into()));
        }
        if let Some(i) = rows.windows(2).position(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Schema(format!(
                "schedule time is not strictly increasing at row {}",
                i + 1
            )));
        }
        Ok(StepSchedule { rows })
    }

    pub fn rows(&self) -> &[(f64, Controls)] {
        &self.rows
    }
}

impl Schedule for StepSchedule {
    fn controls(&self, t: f64) -> Controls {
        let idx = self.rows.partition_point(|(rt, _)| *rt <= t);
        self.rows[idx.saturating_sub(1)].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub speed: f64,
    pub accel: f64,
    pub controls: Controls,
    pub forces: Forces,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.speed).collect()
    }

    /// Recorded commands are rounded to the nearest integer signal.
    pub fn to_drive_log(&self, gear: Gear, description: &str) -> Result<DriveLog> {
        let samples = self
            .points
            .iter()
            .map(|p| DriveSample {
                t: p.t,
                speed: p.speed,
                throttle: p.controls.throttle.round() as i32,
                brake: p.controls.brake.round() as i32,
                slope: p.controls.slope,
            })
            .collect();
        DriveLog::new(
            samples,
            LogMetadata {
                gear,
                description: description.to_string(),
            },
        )
    }

    pub fn to_csv_string(&self) -> String {
        let mut out =
            String::from("t_s,speed_mps,accel_mps2,throttle,brake,slope_rad,fp_N,ff_N,fb_N\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                p.t,
                p.speed,
                p.accel,
                p.controls.throttle,
                p.controls.brake,
                p.controls.slope,
                p.forces.propulsion,
                p.forces.friction,
                p.forces.braking
            ));
        }
        out
    }
}

/// Largest accepted step, in seconds.
pub const MAX_DT: f64 = 0.1;

/// Integrates speed with classic fixed-step RK4 from `t = 0` to `duration`.
///
/// Speed never goes negative: a vehicle at rest with a non-positive net
/// force stays at rest.
pub fn simulate(
    m: &ModelSet,
    schedule: &dyn Schedule,
    v0: f64,
    dt: f64,
    duration: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::InvalidParameter(format!(
            "dt must be in (0, {MAX_DT}], got {dt}"
        )));
    }
    if !(v0 >= 0.0 && v0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "v0 must be >= 0, got {v0}"
        )));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "duration must be >= 0, got {duration}"
        )));
    }
    let steps = (duration / dt).round() as usize;
    let rate = |t: f64, v: f64| {
        let c = schedule.controls(t);
        direct_acceleration(m, v.max(0.0), c.throttle, c.brake, c.slope).accel
    };

    let mut points = Vec::with_capacity(steps + 1);
    let mut v = v0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let controls = schedule.controls(t);
        let out = direct_acceleration(m, v, controls.throttle, controls.brake, controls.slope);
        let accel = resolve_standstill(v, out.accel);
        points.push(TrajectoryPoint {
            t,
            speed: v,
            accel,
            controls,
            forces: out.forces,
        });
        if k == steps {
            break;
        }
        if v <= 0.0 && accel <= 0.0 {
            v = 0.0;
            continue;
        }
        let k1 = rate(t, v);
        let k2 = rate(t + 0.5 * dt, v + 0.5 * dt * k1);
        let k3 = rate(t + 0.5 * dt, v + 0.5 * dt * k2);
        let k4 = rate(t + dt, v + dt * k3);
        v = (v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).max(0.0);
    }
    Ok(Trajectory { points })
}

/// Throttle and brake signals from the inverse model. At most one of them
/// is nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuationCommand {
    pub throttle: f64,
    pub brake: f64,
    pub flags: Vec<InversionFlag>,
}

impl ActuationCommand {
    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

/// Feedforward command that produces `desired_accel` at `speed` on `slope`.
///
/// The required tractive force is compared with the creep force at zero
/// throttle: above it the propulsion surface is inverted, below it the
/// braking surface is inverted for the force that has to be removed.
pub fn inverse_actuation(
    m: &ModelSet,
    speed: f64,
    slope: f64,
    desired_accel: f64,
) -> Result<ActuationCommand> {
    let required =
        m.equivalent_mass * desired_accel + m.grade_force(slope) + m.friction.eval(speed);
    let creep = m.propulsion.eval(speed, 0.0);
    let regen = m.braking.eval(speed, 0.0);

    if required >= creep {
        let inv = m.propulsion.invert(speed, required)?;
        let mut flags: Vec<InversionFlag> = inv.flag.into_iter().collect();
        // Zero throttle re-enables regeneration, so the force balance is
        // only met if there is none to speak of.
        if inv.signal == 0.0 && regen > 0.0 {
            flags.push(InversionFlag::Underflow);
        }
        Ok(ActuationCommand {
            throttle: inv.signal,
            brake: 0.0,
            flags,
        })
    } else {
        let inv = m.braking.invert(speed, creep - required)?;
        Ok(ActuationCommand {
            throttle: 0.0,
            brake: inv.signal,
            flags: inv.flag.into_iter().collect(),
        })
    }
}
