#![no_main]

use libfuzzer_sys::fuzz_target;
use tmotive::field::GaloisField;
use tmotive::motives::{carlitz_dual, carlitz_motive, verify_trivialization, Descriptor, Trivialization};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let f = GaloisField::for_q(3, 1).unwrap();
    let Ok(t) = Trivialization::from_json_str(&f, text) else { return };
    for d in [Descriptor::Motive(carlitz_motive(&f, 1)), Descriptor::Dual(carlitz_dual(&f, 1))] {
        let _ = verify_trivialization(&d, &t, 16);
    }
});
