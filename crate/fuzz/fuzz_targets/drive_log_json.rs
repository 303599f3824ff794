#![no_main]

use libfuzzer_sys::fuzz_target;
use longdyn::vehicle::DriveLog;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(log) = DriveLog::from_json_str(text) {
        let again = DriveLog::from_json_str(&log.to_json_string()).expect("reparse");
        assert_eq!(again.len(), log.len());
    }
});
