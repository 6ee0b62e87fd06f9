#![no_main]
use libfuzzer_sys::fuzz_target;
use windfreq::io::{parse_timeseries_csv, timeseries_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(ts) = parse_timeseries_csv(s) {
            assert!(ts.is_consistent());
            // Nine significant digits can merge nearly equal times, which the
            // reader then rejects; anything it accepts must keep its shape.
            if let Ok(again) = parse_timeseries_csv(&timeseries_csv(&ts)) {
                assert_eq!(again.len(), ts.len());
                assert_eq!(again.support, ts.support);
            }
        }
    }
});
