mod common;

use longdyn::config::{CurveConfig, CurveSetConfig, SpeedUnit};
use longdyn::dynamics::{simulate, Controls};
use longdyn::pipeline::{fit_friction, fit_propulsion, NamedLog};
use longdyn::presets;
use longdyn::vehicle::Gear;
use longdyn::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn noiseless_coast_down_recovers_friction_within_two_percent() {
    let truth = presets::truth_models().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let protocol = common::simulate_protocol(&truth, 0.0, &mut rng);
    let cfg = common::fit_config(&presets::truth_config(), &protocol);
    let coast = [NamedLog {
        name: "coast",
        log: &protocol.coast.log,
    }];
    let stage = fit_friction(&coast, &presets::vehicle(), &cfg).unwrap();
    let mut compared = 0;
    for (v, _, n) in stage.binned.iter() {
        if n < common::MIN_BIN_SAMPLES {
            continue;
        }
        let (f, t) = (stage.curve.eval(v), truth.friction().eval(v));
        assert!((f - t).abs() <= 0.02 * t, "{f} vs {t} at {v} m/s");
        compared += 1;
    }
    assert!(compared >= 30, "{compared}");
    assert!(stage.report.points > 10_000 && stage.report.points <= protocol.coast.log.len());
}

#[test]
fn mixed_throttle_log_is_split_per_level() {
    let truth = presets::truth_models().unwrap();
    let schedule = |t: f64| Controls {
        throttle: if t < 30.0 { 50.0 } else { 186.0 },
        ..Controls::default()
    };
    let log = simulate(&truth, &schedule, 0.0, 0.01, 60.0)
        .unwrap()
        .to_drive_log(Gear::Drive, "two levels")
        .unwrap();
    let logs = [NamedLog {
        name: "two",
        log: &log,
    }];
    let mut cfg = presets::pipeline_config();
    cfg.propulsion = CurveSetConfig {
        units: SpeedUnit::Mps,
        curves: vec![CurveConfig {
            level: None,
            knots: Some(vec![0.0, 15.0, 40.0]),
            anchors: Vec::new(),
        }],
    };
    let stage = fit_propulsion(&logs, truth.friction(), &presets::vehicle(), &cfg, None).unwrap();
    assert_eq!(stage.surface.levels(), &[50, 186]);
    assert!(stage.reports.iter().all(|r| r.points > 2000));

    let only = fit_propulsion(
        &logs,
        truth.friction(),
        &presets::vehicle(),
        &cfg,
        Some(&[186]),
    )
    .unwrap();
    assert_eq!(only.surface.levels(), &[186]);
}

#[test]
fn drive_log_in_friction_stage_is_a_protocol_error() {
    let truth = presets::truth_models().unwrap();
    let schedule = |_t: f64| Controls {
        throttle: 20.0,
        ..Controls::default()
    };
    let log = simulate(&truth, &schedule, 0.0, 0.01, 5.0)
        .unwrap()
        .to_drive_log(Gear::Drive, "")
        .unwrap();
    let err = fit_friction(
        &[NamedLog {
            name: "run-7",
            log: &log,
        }],
        &presets::vehicle(),
        &presets::pipeline_config(),
    )
    .unwrap_err();
    assert!(err.is_input_error());
    assert!(
        matches!(&err, Error::Context { context, source } if context == "run-7"
        && matches!(**source, Error::ProtocolViolation { .. }))
    );
}
