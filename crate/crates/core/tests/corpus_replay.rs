//! Replays the checked-in fuzz corpus through the decoders the fuzz targets
//! exercise, with the same round-trip assertions.

use std::fs;
use std::path::{Path, PathBuf};

use tmotive::field::{FieldParams, GaloisField};
use tmotive::laurent::{LaurentJson, LaurentU};
use tmotive::matrix::BlockMat;
use tmotive::motives::{carlitz_dual, carlitz_motive, verify_trivialization, Descriptor, Trivialization};
use tmotive::report::RunConfig;
use tmotive::tseries::{TSeries, TSeriesJson};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

/// Number of seeds that decoded.
fn replay(target: &str, run: impl Fn(&[u8]) -> bool) -> usize {
    seeds(target).iter().filter(|(_, b)| run(b)).count()
}

#[test]
fn field_params() {
    let ok = replay("field_params", |data| {
        let Ok(params) = serde_json::from_slice::<FieldParams>(data) else { return false };
        let Ok(f) = GaloisField::new(params) else { return false };
        for x in f.elements().filter(|x| !x.is_zero()) {
            assert_eq!(f.mul(x, f.inv(x).unwrap()), f.one());
        }
        true
    });
    assert_eq!(ok, 3);
}

#[test]
fn laurent() {
    let f = GaloisField::for_q(4, 1).unwrap();
    let ok = replay("laurent", |data| {
        let Ok(json) = serde_json::from_slice::<LaurentJson>(data) else { return false };
        let Ok(x) = LaurentU::from_json(&f, &json) else { return false };
        assert_eq!(LaurentU::from_json(&f, &x.to_json()).unwrap(), x);
        true
    });
    assert_eq!(ok, 3);
}

#[test]
fn tseries() {
    let f = GaloisField::for_q(3, 1).unwrap();
    let ok = replay("tseries", |data| {
        let Ok(json) = serde_json::from_slice::<TSeriesJson>(data) else { return false };
        let Ok(s) = TSeries::from_json(&f, &json) else { return false };
        assert_eq!(TSeries::from_json(&f, &s.to_json()).unwrap(), s);
        let _ = s.eval_at_theta(Some(32));
        true
    });
    assert_eq!(ok, 3);
}

#[test]
fn blockmat() {
    let f = GaloisField::for_q(2, 1).unwrap();
    let ok = replay("blockmat", |data| {
        let Ok(rows) = serde_json::from_slice::<Vec<Vec<TSeriesJson>>>(data) else { return false };
        let Ok(m) = BlockMat::from_json(&f, &rows) else { return false };
        assert_eq!(BlockMat::from_json(&f, &m.to_json()).unwrap(), m);
        true
    });
    assert_eq!(ok, 2);
}

#[test]
fn descriptor() {
    let ok = replay("descriptor", |data| {
        let Ok((_, d)) = Descriptor::from_json_str(std::str::from_utf8(data).unwrap()) else { return false };
        let explicit = serde_json::to_string(&d.to_json()).unwrap();
        assert_eq!(Descriptor::from_json_str(&explicit).unwrap().1, d);
        true
    });
    assert_eq!(ok, 6);
}

#[test]
fn trivialization() {
    let f = GaloisField::for_q(3, 1).unwrap();
    let ok = replay("trivialization", |data| {
        let Ok(t) = Trivialization::from_json_str(&f, std::str::from_utf8(data).unwrap()) else { return false };
        for d in [Descriptor::Motive(carlitz_motive(&f, 1)), Descriptor::Dual(carlitz_dual(&f, 1))] {
            let _ = verify_trivialization(&d, &t, 16);
        }
        true
    });
    assert_eq!(ok, 2);
}

#[test]
fn run_config() {
    let ok = replay("run_config", |data| RunConfig::from_json_str(std::str::from_utf8(data).unwrap()).is_ok());
    assert_eq!(ok, 4);
}
