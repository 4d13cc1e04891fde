#![no_main]

use libfuzzer_sys::fuzz_target;
use tmotive::motives::Descriptor;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok((_, d)) = Descriptor::from_json_str(text) else { return };
    let explicit = serde_json::to_string(&d.to_json()).unwrap();
    assert_eq!(Descriptor::from_json_str(&explicit).unwrap().1, d);
    let _ = d.prolong(1);
});
