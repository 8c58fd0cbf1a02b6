#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use clap::Parser;
use prognos_cli::{run, Cli, CliResult};

/// A small fleet CSV and a bundle trained on it, shared by one test binary.
pub struct Fixture {
    _dir: tempfile::TempDir,
    pub csv: PathBuf,
    pub bundle: PathBuf,
}

pub const SMALL_GEOMETRY: [&str; 8] = [
    "--window",
    "20",
    "--horizon",
    "3",
    "--train-stride",
    "2",
    "--eval-stride",
    "4",
];

pub fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("fleet.csv");
        let bundle = dir.path().join("small.bin");
        cli(&["synth", "--out", path(&csv), "--units", "8", "--seed", "3"]).unwrap();
        let mut args = vec!["train", "--data", path(&csv), "--out", path(&bundle), "--epochs", "2", "--seed", "7"];
        args.extend(SMALL_GEOMETRY);
        cli(&args).unwrap();
        Fixture { _dir: dir, csv, bundle }
    })
}

pub fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs a command in-process and returns its standard output.
pub fn cli(args: &[&str]) -> CliResult<String> {
    let parsed = Cli::try_parse_from(std::iter::once("prognos").chain(args.iter().copied()))
        .map_err(|e| prognos_cli::CliError::Usage(e.to_string()))?;
    let mut out = Vec::new();
    run(parsed, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}
