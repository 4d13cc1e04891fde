#![no_main]

use libfuzzer_sys::fuzz_target;
use tmotive::field::GaloisField;
use tmotive::laurent::{LaurentJson, LaurentU};

fuzz_target!(|data: &[u8]| {
    let Ok(json) = serde_json::from_slice::<LaurentJson>(data) else { return };
    let f = GaloisField::for_q(4, 1).unwrap();
    let Ok(x) = LaurentU::from_json(&f, &json) else { return };
    let back = LaurentU::from_json(&f, &x.to_json()).unwrap();
    assert_eq!(back, x);
    let _ = x.inv();
});
