//! Every checked-in fuzz seed is a valid input for its entry point.

use std::path::PathBuf;

use scfde::harness::{read_results, Scenario};
use scfde::pa::PaModel;
use scfde::postdist::ModelDump;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out.sort();
    out
}

#[test]
fn config_seeds_parse() {
    for (p, text) in seeds("config_parse") {
        Scenario::from_toml_str(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn pa_seeds_parse() {
    for (p, text) in seeds("pa_params") {
        PaModel::from_toml_str(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn model_seeds_decode() {
    for (p, text) in seeds("model_decode") {
        ModelDump::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn results_seeds_read() {
    for (p, text) in seeds("results_csv") {
        read_results(text.as_bytes()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
