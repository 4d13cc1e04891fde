#![no_main]

use libfuzzer_sys::fuzz_target;
use tmotive::field::GaloisField;
use tmotive::matrix::{rho_mat, BlockMat};
use tmotive::tseries::TSeriesJson;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = serde_json::from_slice::<Vec<Vec<TSeriesJson>>>(data) else { return };
    if rows.len() > 8 {
        return;
    }
    let f = GaloisField::for_q(2, 1).unwrap();
    let Ok(m) = BlockMat::from_json(&f, &rows) else { return };
    assert_eq!(BlockMat::from_json(&f, &m.to_json()).unwrap(), m);
    let _ = rho_mat(&m, 1).det();
});
