#![no_main]

use libfuzzer_sys::fuzz_target;
use longdyn::spline::ModelFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = ModelFile::from_json_str(text) {
        let again = ModelFile::from_json_str(&model.to_json_string()).expect("reparse");
        assert_eq!(again, model);
    }
});
