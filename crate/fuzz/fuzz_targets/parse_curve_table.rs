#![no_main]
use libfuzzer_sys::fuzz_target;
use windfreq::io::{curve_table_toml, parse_curve_table};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(table) = parse_curve_table(s) {
            let again = parse_curve_table(&curve_table_toml(&table)).expect("written table reparses");
            assert_eq!(again.k_de.to_bits(), table.k_de.to_bits());
        }
    }
});
