//! Fitting stages from raw logs to force models: estimate acceleration,
//! extract force observations, bin by speed, fit curves per level.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::{CurveSetConfig, PipelineConfig};
use crate::error::{Error, Result};
use crate::estimation::{bin_by_speed, estimate_acceleration, AccelSeries, BinnedPoints};
use crate::extraction::{
    extract_braking, extract_friction, extract_propulsion, require_gear, require_zero,
};
use crate::spline::{fit_curve_clamped, ForceKind, ForceSurface, Spline1D};
use crate::vehicle::{DriveLog, Gear, Signal, VehicleParams};

/// Fit summary for one curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: Option<i32>,
    pub points: usize,
    pub bins: usize,
    pub residual_rms: f64,
}

#[derive(Debug, Clone)]
pub struct CurveStage {
    pub curve: Spline1D,
    pub report: LevelReport,
    pub binned: BinnedPoints,
}

#[derive(Debug, Clone)]
pub struct SurfaceStage {
    pub surface: ForceSurface,
    pub reports: Vec<LevelReport>,
    pub binned: Vec<(i32, BinnedPoints)>,
}

/// A drive log with a name used in error messages.
#[derive(Debug, Clone, Copy)]
pub struct NamedLog<'a> {
    pub name: &'a str,
    pub log: &'a DriveLog,
}

/// Number of speeds at which a fitted surface is checked for monotonicity
/// in the signal.
const MONOTONE_CHECK_POINTS: usize = 400;

fn fit_one(
    points: &[(f64, f64)],
    curves: &CurveSetConfig,
    level: Option<i32>,
    cfg: &PipelineConfig,
) -> Result<(Spline1D, LevelReport, BinnedPoints)> {
    let binned = bin_by_speed(points, &cfg.bins.edges()?)?;
    let spec = curves.spec_for(level)?;
    let fit = fit_curve_clamped(&binned, &spec.anchors, &spec.knots, 0.0)?;
    let report = LevelReport {
        level,
        points: points.len(),
        bins: binned.len(),
        residual_rms: fit.residual_rms,
    };
    Ok((fit.spline, report, binned))
}

fn accel(log: &DriveLog, cfg: &PipelineConfig) -> Result<Option<AccelSeries>> {
    match estimate_acceleration(log, &cfg.estimator) {
        Ok(a) => Ok(Some(a)),
        Err(Error::EmptySeries { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Coast-down logs to a friction curve.
pub fn fit_friction(
    logs: &[NamedLog],
    params: &VehicleParams,
    cfg: &PipelineConfig,
) -> Result<CurveStage> {
    let mut points = Vec::new();
    for l in logs {
        let mut run = || -> Result<()> {
            if let Some(a) = accel(l.log, cfg)? {
                points.extend(extract_friction(l.log, &a, params)?.points);
            }
            Ok(())
        };
        run().map_err(|e| e.context(l.name))?;
    }
    let (curve, report, binned) = fit_one(&points, &cfg.friction, None, cfg)?;
    Ok(CurveStage {
        curve,
        report,
        binned,
    })
}

fn surface_stage(
    grouped: BTreeMap<i32, Vec<(f64, f64)>>,
    kind: ForceKind,
    cfg: &PipelineConfig,
    levels: Option<&[i32]>,
) -> Result<SurfaceStage> {
    let mut surface_levels = Vec::new();
    let mut curves = Vec::new();
    let mut reports = Vec::new();
    let mut binned = Vec::new();
    if let Some(wanted) = levels {
        if let Some(&missing) = wanted.iter().find(|l| !grouped.contains_key(l)) {
            return Err(Error::UnknownLevel {
                requested: missing,
                available: grouped.keys().copied().collect(),
            });
        }
    }
    for (level, points) in &grouped {
        if levels.is_some_and(|w| !w.contains(level)) {
            continue;
        }
        let (curve, report, b) = fit_one(points, cfg.curves(kind), Some(*level), cfg)
            .map_err(|e| e.context(format!("{kind} level {level}")))?;
        surface_levels.push(*level);
        curves.push(curve);
        reports.push(report);
        binned.push((*level, b));
    }
    if curves.is_empty() {
        return Err(Error::InvalidParameter(format!("no {kind} observations")));
    }
    let surface = ForceSurface::new(surface_levels, curves)?;
    let max_speed = cfg.bins.max_mps;
    let speeds: Vec<f64> = (0..MONOTONE_CHECK_POINTS)
        .map(|i| max_speed * i as f64 / (MONOTONE_CHECK_POINTS - 1) as f64)
        .collect();
    surface.check_monotone(&speeds)?;
    Ok(SurfaceStage {
        surface,
        reports,
        binned,
    })
}

/// Constant-throttle logs (split wherever the throttle changes) to a
/// propulsion surface. `levels` restricts the fitted levels.
pub fn fit_propulsion(
    logs: &[NamedLog],
    friction: &Spline1D,
    params: &VehicleParams,
    cfg: &PipelineConfig,
    levels: Option<&[i32]>,
) -> Result<SurfaceStage> {
    let mut grouped: BTreeMap<i32, Vec<(f64, f64)>> = BTreeMap::new();
    for l in logs {
        let mut run = || -> Result<()> {
            require_gear(l.log, Gear::Drive)?;
            require_zero(l.log, Signal::Brake)?;
            for piece in l.log.split_constant(Signal::Throttle) {
                if let Some(a) = accel(&piece, cfg)? {
                    let obs = extract_propulsion(&piece, &a, friction, params)?;
                    if let Some(level) = obs.signal_level {
                        grouped.entry(level).or_default().extend(obs.points);
                    }
                }
            }
            Ok(())
        };
        run().map_err(|e| e.context(l.name))?;
    }
    surface_stage(grouped, ForceKind::Propulsion, cfg, levels)
}

/// Constant-brake logs (split wherever the brake changes) to a braking
/// surface, using the zero-throttle propulsion curve for creep.
pub fn fit_braking(
    logs: &[NamedLog],
    friction: &Spline1D,
    propulsion: &ForceSurface,
    params: &VehicleParams,
    cfg: &PipelineConfig,
    levels: Option<&[i32]>,
) -> Result<SurfaceStage> {
    let creep = propulsion.curve(0).ok_or_else(|| Error::UnknownLevel {
        requested: 0,
        available: propulsion.levels().to_vec(),
    })?;
    let mut grouped: BTreeMap<i32, Vec<(f64, f64)>> = BTreeMap::new();
    for l in logs {
        let mut run = || -> Result<()> {
            require_gear(l.log, Gear::Drive)?;
            require_zero(l.log, Signal::Throttle)?;
            for piece in l.log.split_constant(Signal::Brake) {
                if let Some(a) = accel(&piece, cfg)? {
                    let obs = extract_braking(&piece, &a, friction, creep, params)?;
                    if let Some(level) = obs.signal_level {
                        grouped.entry(level).or_default().extend(obs.points);
                    }
                }
            }
            Ok(())
        };
        run().map_err(|e| e.context(l.name))?;
    }
    surface_stage(grouped, ForceKind::Braking, cfg, levels)
}
