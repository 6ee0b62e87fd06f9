#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        // No base directory: external traces must be rejected, never read.
        if let Ok(cfg) = windfreq::io::parse_config(s, None) {
            assert!(cfg.validate().is_ok());
        }
    }
});
