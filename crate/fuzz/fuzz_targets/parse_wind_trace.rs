#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(points) = windfreq::io::parse_wind_trace(s) {
            assert!(points.len() >= 2);
            assert!(points.windows(2).all(|w| w[1].0 > w[0].0));
            assert!(points.iter().all(|&(t, v)| t.is_finite() && v.is_finite() && v >= 0.0));
        }
    }
});
