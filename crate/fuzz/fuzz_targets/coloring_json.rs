#![no_main]

use libfuzzer_sys::fuzz_target;
use secluded::sperner::validate_no_opposite_faces;
use secluded::GridColoring;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 8192 {
        return;
    }
    let Ok(c) = GridColoring::from_json(text) else {
        return;
    };
    let again = GridColoring::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(again, c);
    let report = validate_no_opposite_faces(&c);
    assert_eq!(report.valid, report.violations.is_empty());
});
