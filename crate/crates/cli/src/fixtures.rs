//! Bundled scenarios and the expected-report fixtures derived from them.

use std::fs;
use std::io;
use std::path::Path;

use crate::run::{run_text, Overrides};

/// `(file name, contents)` of every bundled scenario.
pub const SCENARIOS: &[(&str, &str)] = &[
    ("e1_sharpness.json", include_str!("../scenarios/e1_sharpness.json")),
    ("positive_q.json", include_str!("../scenarios/positive_q.json")),
    ("cone_quadrant.json", include_str!("../scenarios/cone_quadrant.json")),
    ("closure_rotations.json", include_str!("../scenarios/closure_rotations.json")),
    ("onedim.json", include_str!("../scenarios/onedim.json")),
    ("warped_e5.json", include_str!("../scenarios/warped_e5.json")),
    ("sobolev_beta_diagnostic.json", include_str!("../scenarios/sobolev_beta_diagnostic.json")),
    ("profile_e1.json", include_str!("../scenarios/profile_e1.json")),
];

pub const SCHEMA: &str = include_str!("../schema/scenario.schema.json");

pub fn scenario(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Writes every scenario, its expected CSV (`<stem>.expected.csv`) and the schema into `dir`.
pub fn emit_fixtures(dir: &Path) -> io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    fs::write(dir.join("scenario.schema.json"), SCHEMA)?;
    written.push("scenario.schema.json".to_string());
    for (name, text) in SCENARIOS {
        fs::write(dir.join(name), text)?;
        written.push(name.to_string());
        let report = run_text(text, &Overrides::default()).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{name}: {e}")))?;
        let csv = report.to_csv().map_err(io::Error::other)?;
        let stem = name.trim_end_matches(".json");
        let out = format!("{stem}.expected.csv");
        fs::write(dir.join(&out), csv)?;
        written.push(out);
    }
    Ok(written)
}
