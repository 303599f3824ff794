//! Identification, simulation and inversion of longitudinal force models
//! for road vehicles.
//!
//! Drive logs from three test protocols (coast-down in neutral,
//! constant-throttle runs, constant-brake runs) are turned into friction,
//! propulsion and braking models through the force balance
//! `F_p - m g sin(alpha) - F_f - F_b = m_eq a`. The fitted models drive a
//! direct model (commands to acceleration), an RK4 simulator, and an
//! inverse model (desired acceleration to a throttle or brake command).

// `!(a > b)` checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod extraction;
pub mod io;
pub mod pipeline;
pub mod presets;
pub mod spline;
pub mod validation;
pub mod vehicle;

pub use dynamics::{
    direct_acceleration, inverse_actuation, simulate, ActuationCommand, Controls, ModelSet,
    Schedule,
};
pub use error::{Error, Result};
pub use estimation::{estimate_acceleration, AccelSeries, EstimatorSettings};
pub use spline::{ForceKind, ForceSurface, ModelFile, Spline1D};
pub use validation::ErrorReport;
pub use vehicle::{DriveLog, DriveSample, Gear, VehicleParams};
