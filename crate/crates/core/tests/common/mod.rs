//! Synthetic test drives generated from the shipped ground-truth models.

#![allow(dead_code)]

use longdyn::config::{AnchorPoint, CurveConfig, CurveSetConfig, PipelineConfig};
use longdyn::dynamics::{simulate, Controls, ModelSet, Trajectory};
use longdyn::estimation::{bin_by_speed, default_bin_edges};
use longdyn::vehicle::{DriveLog, DriveSample, Gear, LogMetadata};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub const DT: f64 = 0.01;
pub const COAST_START_MPS: f64 = 125.0 / 3.6;
pub const THROTTLE_LEVELS: [i32; 5] = [0, 50, 100, 150, 186];
pub const BRAKE_LEVELS: [i32; 5] = [0, 40, 80, 120, 160];
pub const MIN_BIN_SAMPLES: usize = 20;

pub struct Run {
    pub name: String,
    pub level: Option<i32>,
    pub log: DriveLog,
}

pub struct Protocol {
    pub coast: Run,
    pub throttle: Vec<Run>,
    pub brake: Vec<Run>,
}

/// Drops the samples after the vehicle first comes to rest.
pub fn until_stopped(traj: Trajectory) -> Trajectory {
    match traj.points.iter().skip(1).position(|p| p.speed <= 0.0) {
        Some(i) => Trajectory {
            points: traj.points[..=i].to_vec(),
        },
        None => traj,
    }
}

/// Adds Gaussian noise to the recorded speed, clamped at zero.
pub fn noisy_log(
    traj: &Trajectory,
    gear: Gear,
    sigma: f64,
    rng: &mut impl Rng,
    name: &str,
) -> DriveLog {
    let noise = Normal::new(0.0, sigma).unwrap();
    let samples = traj
        .points
        .iter()
        .map(|p| DriveSample {
            t: p.t,
            speed: (p.speed + noise.sample(rng)).max(0.0),
            throttle: p.controls.throttle.round() as i32,
            brake: p.controls.brake.round() as i32,
            slope: p.controls.slope,
        })
        .collect();
    DriveLog::new(
        samples,
        LogMetadata {
            gear,
            description: name.to_string(),
        },
    )
    .unwrap()
}

fn constant(throttle: f64, brake: f64) -> impl Fn(f64) -> Controls {
    move |_t| Controls {
        throttle,
        brake,
        slope: 0.0,
    }
}

/// Coast-down from 125 km/h in neutral, constant-throttle runs from rest
/// and constant-brake runs from 125 km/h, sampled at 100 Hz.
pub fn simulate_protocol(truth: &ModelSet, sigma: f64, rng: &mut impl Rng) -> Protocol {
    let neutral = truth.in_neutral();
    let coast =
        until_stopped(simulate(&neutral, &constant(0.0, 0.0), COAST_START_MPS, DT, 400.0).unwrap());
    let coast = Run {
        name: "coast".into(),
        level: None,
        log: noisy_log(&coast, Gear::Neutral, sigma, rng, "coast"),
    };

    let throttle = THROTTLE_LEVELS
        .iter()
        .map(|&l| {
            let duration = if l == 0 { 40.0 } else { 120.0 };
            let traj = simulate(truth, &constant(l as f64, 0.0), 0.0, DT, duration).unwrap();
            let name = format!("throttle-{l}");
            Run {
                level: Some(l),
                log: noisy_log(&traj, Gear::Drive, sigma, rng, &name),
                name,
            }
        })
        .collect();

    let brake = BRAKE_LEVELS
        .iter()
        .map(|&l| {
            let traj =
                simulate(truth, &constant(0.0, l as f64), COAST_START_MPS, DT, 150.0).unwrap();
            let name = format!("brake-{l}");
            Run {
                level: Some(l),
                log: noisy_log(&until_stopped(traj), Gear::Drive, sigma, rng, &name),
                name,
            }
        })
        .collect();

    Protocol {
        coast,
        throttle,
        brake,
    }
}

/// Speed interval in m/s spanned by the samples that fall in bins holding
/// enough of them.
pub fn covered_span(log: &DriveLog) -> Option<(f64, f64)> {
    let edges = default_bin_edges();
    let speeds: Vec<f64> = log.samples().iter().map(|s| s.speed).collect();
    let pts: Vec<(f64, f64)> = speeds.iter().map(|v| (*v, 0.0)).collect();
    let binned = bin_by_speed(&pts, &edges).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (c, _, n) in binned.iter() {
        if n >= MIN_BIN_SAMPLES {
            let i = edges.partition_point(|e| *e <= c) - 1;
            for v in speeds
                .iter()
                .filter(|v| **v >= edges[i] && **v <= edges[i + 1])
            {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// Observed speed span per level, `None` where nothing was recorded.
pub type Spans = [(Option<i32>, Option<(f64, f64)>)];

/// Fit settings for curves of the same family as the truth: knots at the
/// truth anchor speeds, and truth anchors only where no data was recorded.
pub fn fit_curves(truth: &CurveSetConfig, spans: &Spans) -> CurveSetConfig {
    let curves = truth
        .curves
        .iter()
        .map(|c| {
            let span = spans
                .iter()
                .find(|(l, _)| *l == c.level)
                .and_then(|(_, s)| *s);
            let to_mps = |v: f64| truth.units.to_mps(v);
            let anchors: Vec<AnchorPoint> = c
                .anchors
                .iter()
                .filter(|a| {
                    span.is_none_or(|(lo, hi)| to_mps(a.speed) < lo || to_mps(a.speed) > hi)
                })
                .map(|a| AnchorPoint { weight: 50.0, ..*a })
                .collect();
            CurveConfig {
                level: c.level,
                knots: Some(c.anchors.iter().map(|a| a.speed).collect()),
                anchors,
            }
        })
        .collect();
    CurveSetConfig {
        units: truth.units,
        curves,
    }
}

pub fn fit_config(truth: &PipelineConfig, protocol: &Protocol) -> PipelineConfig {
    let spans = |runs: &[Run]| {
        runs.iter()
            .map(|r| (r.level, covered_span(&r.log)))
            .collect::<Vec<_>>()
    };
    PipelineConfig {
        friction: fit_curves(
            &truth.friction,
            &[(None, covered_span(&protocol.coast.log))],
        ),
        propulsion: fit_curves(&truth.propulsion, &spans(&protocol.throttle)),
        braking: fit_curves(&truth.braking, &spans(&protocol.brake)),
        ..PipelineConfig::default()
    }
}
