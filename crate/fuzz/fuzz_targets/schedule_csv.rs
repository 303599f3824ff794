#![no_main]

use libfuzzer_sys::fuzz_target;
use longdyn::dynamics::Schedule;
use longdyn::io::parse_schedule_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(schedule) = parse_schedule_csv(text) {
        let rows = schedule.rows();
        assert!(rows.windows(2).all(|w| w[1].0 > w[0].0));
        let (t0, first) = rows[0];
        assert_eq!(schedule.controls(t0 - 1.0), first);
    }
});
