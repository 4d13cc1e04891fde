#![no_main]

use libfuzzer_sys::fuzz_target;
use tmotive::field::GaloisField;
use tmotive::tseries::{TSeries, TSeriesJson};

fuzz_target!(|data: &[u8]| {
    let Ok(json) = serde_json::from_slice::<TSeriesJson>(data) else { return };
    let f = GaloisField::for_q(3, 1).unwrap();
    let Ok(s) = TSeries::from_json(&f, &json) else { return };
    assert_eq!(TSeries::from_json(&f, &s.to_json()).unwrap(), s);
    let _ = s.hyperderive(2);
    let _ = s.eval_at_theta(Some(32));
    let _ = s.eval_at_zeta(f.one(), Some(32));
});
