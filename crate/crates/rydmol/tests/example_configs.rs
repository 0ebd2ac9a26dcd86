use std::path::Path;

use rydmol::config::parse_config;
use rydmol::run::run_text;

fn configs() -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn every_example_config_parses_and_round_trips() {
    let all = configs();
    assert!(all.len() >= 10);
    for (name, text) in &all {
        let c = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_config(&c.to_json()).unwrap();
        assert_eq!(again, c, "{name}");
    }
}

#[test]
fn quick_examples_run_deterministically() {
    for name in ["budget_caf.json", "gate_caf.json", "readout.json", "scan_frequency.json", "optimize_10ghz.json", "scan_distance_two_atom.json", "longrange_two_atom.json"] {
        let text = configs().into_iter().find(|(n, _)| n == name).unwrap().1;
        let a = run_text(&text, None).unwrap_or_else(|e| panic!("{name}: {e}"));
        let b = run_text(&text, None).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
