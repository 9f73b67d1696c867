//! The four reference networks.

use super::spec::{GaOverrides, LinkEntry, ScenarioSpec, DEFAULT_TAU};

pub const PRESET_NAMES: [&str; 4] = ["scenario1", "scenario2", "scenario3", "scenario4"];

const SCENARIO12_LINKS: [(&str, f64, f64); 5] = [
    ("AB", 0.0, 0.0),
    ("CD", 0.04, 0.007),
    ("EF", 0.0, 0.125),
    ("GH", 0.11, 0.019),
    ("IJ", 0.15, 0.025),
];

// CD carries y2 = 0.0006, the same pairing as CD in the twelve-link network.
const SCENARIO3_LINKS: [(&str, f64, f64); 5] = [
    ("AB", 0.0, 0.0),
    ("CD", 0.0034, 0.0006),
    ("EF", 0.0104, 0.0018),
    ("GH", 0.0179, 0.0031),
    ("IJ", 0.0, 0.0515),
];

const SCENARIO4_LINKS: [(&str, f64, f64); 12] = [
    ("AB", 0.0, 0.0),
    ("CD", 0.0034, 0.0006),
    ("EF", 0.0, 0.0357),
    ("GH", 0.0299, 0.0051),
    ("IJ", 0.0385, 0.0066),
    ("KL", 0.0625, 0.0107),
    ("MN", 0.0733, 0.0126),
    ("OP", 0.0, 0.1818),
    ("QR", 0.1106, 0.019),
    ("ST", 0.125, 0.0214),
    ("UV", 0.1489, 0.0256),
    ("WX", 0.0, 0.2979),
];

fn build(name: &str, f_min: f64, k_list: &[usize], links: &[(&str, f64, f64)]) -> ScenarioSpec {
    ScenarioSpec {
        name: name.to_string(),
        tau: DEFAULT_TAU,
        f_min,
        k_list: k_list.to_vec(),
        ga: GaOverrides::default(),
        links: links
            .iter()
            .map(|&(n, y1, y2)| LinkEntry::noise(n, y1, y2))
            .collect(),
    }
}

/// Built-in scenario by name, `None` for anything else.
pub fn preset(name: &str) -> Option<ScenarioSpec> {
    let k5 = [5, 10, 20, 40];
    match name {
        "scenario1" => Some(build(name, 0.0, &k5, &SCENARIO12_LINKS)),
        "scenario2" => Some(build(name, 0.7, &k5, &SCENARIO12_LINKS)),
        "scenario3" => Some(build(name, 0.9, &k5, &SCENARIO3_LINKS)),
        "scenario4" => Some(build(name, 0.7, &[12, 24, 48, 96], &SCENARIO4_LINKS)),
        _ => None,
    }
}
