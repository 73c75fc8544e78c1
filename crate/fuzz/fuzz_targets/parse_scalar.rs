#![no_main]

use libfuzzer_sys::fuzz_target;
use secluded::Scalar;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 512 {
        return;
    }
    if let Ok(x) = text.parse::<Scalar>() {
        assert_eq!(x.to_string().parse::<Scalar>().unwrap(), x);
        assert_eq!(Scalar::parse_allow_inexact(text).unwrap(), x);
    }
    if let Ok(x) = Scalar::parse_allow_inexact(text) {
        assert_eq!(x.to_string().parse::<Scalar>().unwrap(), x);
    }
});
