#![no_main]

use libfuzzer_sys::fuzz_target;
use longdyn::vehicle::VehicleParams;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(params) = VehicleParams::from_json_str(text) {
        let m_eq = params.equivalent_mass().expect("validated params");
        assert!(m_eq >= params.total_mass());
        let again = VehicleParams::from_json_str(&params.to_json_string()).expect("reparse");
        assert_eq!(again, params);
    }
});
