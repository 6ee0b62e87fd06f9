//! Replays the fuzz corpus seeds and random inputs through every parser.

use std::path::PathBuf;

use proptest::prelude::*;
use windfreq::io::{
    curve_table_toml, parse_config, parse_curve_table, parse_timeseries_csv, parse_wind_trace, timeseries_csv,
};

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fuzz/corpus")).join(target);
    let mut seeds: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("seed_"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    seeds.sort();
    assert!(!seeds.is_empty(), "no seeds for {target}");
    seeds
}

fn check_config(s: &str) -> bool {
    match parse_config(s, None) {
        Ok(cfg) => {
            assert!(cfg.validate().is_ok());
            true
        }
        Err(_) => false,
    }
}

fn check_trace(s: &str) -> bool {
    match parse_wind_trace(s) {
        Ok(points) => {
            assert!(points.len() >= 2);
            assert!(points.windows(2).all(|w| w[1].0 > w[0].0));
            assert!(points.iter().all(|&(t, v)| t.is_finite() && v.is_finite() && v >= 0.0));
            true
        }
        Err(_) => false,
    }
}

fn check_curve_table(s: &str) -> bool {
    match parse_curve_table(s) {
        Ok(table) => {
            let again = parse_curve_table(&curve_table_toml(&table)).expect("written table reparses");
            assert_eq!(again.k_de.to_bits(), table.k_de.to_bits());
            assert_eq!(again.pitch_table.len(), table.pitch_table.len());
            true
        }
        Err(_) => false,
    }
}

fn check_timeseries(s: &str) -> bool {
    match parse_timeseries_csv(s) {
        Ok(ts) => {
            assert!(ts.is_consistent());
            if let Ok(again) = parse_timeseries_csv(&timeseries_csv(&ts)) {
                assert_eq!(again.len(), ts.len());
                assert_eq!(again.support, ts.support);
            }
            true
        }
        Err(_) => false,
    }
}

fn replay(target: &str, check: fn(&str) -> bool, rejected: &[&str]) {
    for (name, text) in corpus(target) {
        let accepted = check(&text);
        assert_eq!(accepted, !rejected.contains(&name.as_str()), "{target}/{name}");
    }
}

#[test]
fn config_seeds() {
    replay("parse_config", check_config, &["seed_unknown_field.toml"]);
    // External traces need a base directory to resolve against.
    assert!(!check_config("schema_version = 1\n[scenario.wind]\nkind = \"trace\"\npath = \"wind.csv\"\n"));
}

#[test]
fn wind_trace_seeds() {
    replay("parse_wind_trace", check_trace, &["seed_repeated_time.csv"]);
}

#[test]
fn curve_table_seeds() {
    replay("parse_curve_table", check_curve_table, &["seed_bad_order.toml"]);
}

#[test]
fn timeseries_seeds() {
    replay("parse_timeseries_csv", check_timeseries, &["seed_bad_support.csv", "seed_header_only.csv"]);
}

/// Seed text with one byte range replaced by arbitrary characters.
fn mutated(target: &'static str) -> impl Strategy<Value = String> {
    let seeds: Vec<String> = corpus(target).into_iter().map(|(_, t)| t).collect();
    (prop::sample::select(seeds), any::<prop::sample::Index>(), 0usize..8, ".{0,8}").prop_map(
        |(seed, at, len, insert)| {
            let chars: Vec<char> = seed.chars().collect();
            let start = at.index(chars.len() + 1);
            let end = (start + len).min(chars.len());
            chars[..start].iter().chain(insert.chars().collect::<Vec<_>>().iter()).chain(&chars[end..]).collect()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
        check_config(&s);
        check_trace(&s);
        check_curve_table(&s);
        check_timeseries(&s);
    }

    #[test]
    fn numeric_csv_lines(rows in prop::collection::vec((-1e3f64..1e3, -50f64..50.0), 0..12)) {
        let mut s = String::from("t_s,v_mps\n");
        for (t, v) in &rows {
            s.push_str(&format!("{t},{v}\n"));
        }
        check_trace(&s);
    }

    #[test]
    fn mutated_config(s in mutated("parse_config")) { check_config(&s); }

    #[test]
    fn mutated_trace(s in mutated("parse_wind_trace")) { check_trace(&s); }

    #[test]
    fn mutated_curve_table(s in mutated("parse_curve_table")) { check_curve_table(&s); }

    #[test]
    fn mutated_timeseries(s in mutated("parse_timeseries_csv")) { check_timeseries(&s); }
}
