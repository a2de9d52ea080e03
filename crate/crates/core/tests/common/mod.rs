//! Fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use semshift::cli::RunConfig;

pub const KJV: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/kjv.txt.gz");

/// (target, donor) pairs; the donor's contexts become a second sense of the
/// target.
pub const PSEUDO_TARGETS: [(&str, &str); 5] = [
    ("gold", "sword"),
    ("bread", "brethren"),
    ("water", "kingdom"),
    ("silver", "wife"),
    ("heart", "city"),
];
pub const STABLE_WORDS: [&str; 5] = ["lord", "god", "king", "people", "house"];
pub const FRACTION: f64 = 0.75;

/// Verses of the King James Bible, lowercased, one per line.
pub fn kjv_lines() -> Vec<String> {
    let mut text = String::new();
    GzDecoder::new(fs::File::open(KJV).expect("corpus fixture"))
        .read_to_string(&mut text)
        .expect("gzip corpus");
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(String::from)
        .collect()
}

/// Interleaved halves: even-numbered verses form the earlier slice, odd ones
/// the later slice. `limit` caps the verses per slice.
pub fn write_kjv_halves(dir: &Path, limit: Option<usize>) -> (PathBuf, PathBuf) {
    let lines = kjv_lines();
    let cap = limit.unwrap_or(usize::MAX);
    let half = |parity: usize| -> String {
        let mut s: String = lines
            .iter()
            .skip(parity)
            .step_by(2)
            .take(cap)
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join("\n");
        s.push('\n');
        s
    };
    let earlier = dir.join("earlier.txt");
    let later = dir.join("later.txt");
    fs::write(&earlier, half(0)).unwrap();
    fs::write(&later, half(1)).unwrap();
    (earlier, later)
}

pub fn plan_toml() -> String {
    let mut s = format!(
        "stable_words = [{}]\n",
        STABLE_WORDS.map(|w| format!("\"{w}\"")).join(", ")
    );
    for (target, donor) in PSEUDO_TARGETS {
        s.push_str(&format!(
            "\n[[pseudo_targets]]\ntarget = \"{target}\"\ndonor = \"{donor}\"\nfraction = {FRACTION}\n"
        ));
    }
    s
}

pub fn write_targets(dir: &Path, words: &[&str]) -> PathBuf {
    let path = dir.join("targets.txt");
    fs::write(&path, words.join("\n") + "\n").unwrap();
    path
}

pub fn synthetic_targets() -> Vec<&'static str> {
    PSEUDO_TARGETS
        .iter()
        .map(|&(t, _)| t)
        .chain(STABLE_WORDS)
        .collect()
}

/// Minimal config text; extend with `--set`-style overrides.
pub fn config(
    earlier: &Path,
    later: &Path,
    targets: &Path,
    out: &Path,
    overrides: &[&str],
) -> RunConfig {
    let text = format!(
        "targets = {:?}\noutput_dir = {:?}\n[corpus]\nearlier = {:?}\nlater = {:?}\n",
        targets, out, earlier, later
    );
    let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::from_toml(&text, &overrides, None).expect("valid test config")
}
