#![no_main]

use libfuzzer_sys::fuzz_target;
use secluded::{PartitionSpec, Point};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 4096 {
        return;
    }
    let Ok(spec) = PartitionSpec::from_json(text) else {
        return;
    };
    assert_eq!(PartitionSpec::from_json(&spec.to_json()).unwrap(), spec);
    if spec.dim() <= 8 {
        let origin = Point::origin(spec.dim());
        let id = spec.member_of(&origin).unwrap();
        assert!(spec.contains(&id, &origin).unwrap());
    }
});
