#![no_main]

use libfuzzer_sys::fuzz_target;
use longdyn::config::SpeedUnit;
use longdyn::io::parse_drive_csv;
use longdyn::vehicle::{Gear, LogMetadata, DEFAULT_BRAKE_RANGE, DEFAULT_THROTTLE_RANGE};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for units in [SpeedUnit::Mps, SpeedUnit::Kmh] {
        let meta = LogMetadata {
            gear: Gear::Drive,
            description: String::new(),
        };
        if let Ok(out) = parse_drive_csv(
            text,
            units,
            DEFAULT_THROTTLE_RANGE,
            DEFAULT_BRAKE_RANGE,
            meta,
        ) {
            assert!(out.log.samples().windows(2).all(|w| w[1].t > w[0].t));
            assert!(out
                .log
                .samples()
                .iter()
                .all(|s| s.speed >= 0.0 && s.slope.is_finite()));
        }
    }
});
