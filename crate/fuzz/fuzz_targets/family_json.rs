#![no_main]

use libfuzzer_sys::fuzz_target;
use secluded::depth::multiplicity_identity_check;
use secluded::BoxFamily;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 8192 {
        return;
    }
    let Ok(fam) = BoxFamily::from_json(text) else {
        return;
    };
    if fam.dim() <= 3 && fam.members.len() <= 16 {
        let check = multiplicity_identity_check(&fam).unwrap();
        assert!(check.equal);
    }
});
