#![no_main]

use libfuzzer_sys::fuzz_target;
use tmotive::field::{FieldParams, GaloisField};

fuzz_target!(|data: &[u8]| {
    let Ok(params) = serde_json::from_slice::<FieldParams>(data) else { return };
    let Ok(f) = GaloisField::new(params) else { return };
    // a field that decodes must have working arithmetic
    for x in f.elements().take(64) {
        if !x.is_zero() {
            assert_eq!(f.mul(x, f.inv(x).unwrap()), f.one());
        }
        assert_eq!(f.frobenius(f.qth_root(x), 1), x);
    }
});
