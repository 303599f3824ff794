//! Reference data shipped with the crate: a compact electric hatchback and
//! a ground-truth force model shaped like its measured curves.

use crate::config::PipelineConfig;
use crate::dynamics::ModelSet;
use crate::error::Result;
use crate::vehicle::VehicleParams;

pub const VEHICLE_JSON: &str = include_str!("../presets/vehicle.json");
pub const TRUTH_JSON: &str = include_str!("../presets/truth.json");
pub const PIPELINE_JSON: &str = include_str!("../presets/pipeline.json");

pub fn vehicle() -> VehicleParams {
    VehicleParams::from_json_str(VEHICLE_JSON).expect("shipped vehicle parameters are valid")
}

/// Anchor points of the ground-truth curves.
pub fn truth_config() -> PipelineConfig {
    PipelineConfig::from_json_str(TRUTH_JSON).expect("shipped truth anchors are valid")
}

/// Example fitting configuration with low-speed anchors.
pub fn pipeline_config() -> PipelineConfig {
    PipelineConfig::from_json_str(PIPELINE_JSON).expect("shipped pipeline config is valid")
}

/// Models built by shape-preserving interpolation through the truth anchors.
pub fn truth_models() -> Result<ModelSet> {
    let cfg = truth_config();
    ModelSet::new(
        cfg.friction.interpolated_curve()?,
        cfg.propulsion.interpolated_surface()?,
        cfg.braking.interpolated_surface()?,
        vehicle(),
    )
}
