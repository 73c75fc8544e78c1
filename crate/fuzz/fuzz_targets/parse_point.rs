#![no_main]

use libfuzzer_sys::fuzz_target;
use secluded::Point;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 1024 {
        return;
    }
    if let Ok(p) = text.parse::<Point>() {
        assert_eq!(p.to_string().parse::<Point>().unwrap(), p);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Point>(&json).unwrap(), p);
    }
});
