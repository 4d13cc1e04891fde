#![no_main]

use libfuzzer_sys::fuzz_target;
use tmotive::report::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json_str(text) {
        let _ = cfg.theta_config();
        let _ = cfg.zeta_config(cfg.d);
    }
});
