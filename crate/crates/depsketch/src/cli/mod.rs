//! The `depsketch` command line.
//!
//! Every subcommand writes JSON and CSV files plus `manifest.json` into the
//! output directory. `replay <manifest>` reruns the recorded command and
//! compares every output by SHA-256.

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

mod args;
mod commands;
mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use depsketch_core::rng::DEFAULT_SEED;

pub use args::*;
pub use commands::parse_grid;

use crate::manifest::{ExperimentManifest, FileDigest, OutputDir, MANIFEST_FILE};
use crate::{Error, Parallel, Result};

pub const DEFAULT_OUT: &str = "depsketch-out";
pub const SEED_ENV: &str = "DEPSKETCH_SEED";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Parses `argv` (program name first) and runs it; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    let argv: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// `--seed`, then `$DEPSKETCH_SEED`, then the built-in default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => parse_seed(&v).map_err(|e| Error::Usage(format!("{SEED_ENV}: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(Error::Usage(format!("{SEED_ENV}: {e}"))),
    }
}

pub fn execute(cli: Cli, argv: Vec<String>) -> Result<i32> {
    if cli.workers == Some(0) {
        return Err(Error::Usage("--workers must be at least 1".into()));
    }
    match cli.command {
        Command::Replay(a) => replay(&a.manifest, cli.out, cli.workers),
        command => {
            let seed = resolve_seed(cli.seed)?;
            let out = cli.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            Ok(run_recorded(command, seed, cli.workers.unwrap_or(1), &out, argv)?.exit_code)
        }
    }
}

/// Runs `command` into `out` and writes its manifest.
pub fn run_recorded(
    mut command: Command,
    seed: u64,
    workers: usize,
    out: &Path,
    argv: Vec<String>,
) -> Result<ExperimentManifest> {
    let mut inputs = Vec::new();
    for p in command.input_paths_mut() {
        *p = std::path::absolute(&*p).map_err(|e| Error::io(p.clone(), e))?;
        inputs.push(FileDigest::of_file(p)?);
    }
    let exec = Parallel::new(workers)?;
    let start = Instant::now();
    let mut dir = OutputDir::create(out)?;
    let exit_code = commands::dispatch(&command, seed, &exec, &mut dir)?;
    let manifest = ExperimentManifest {
        subcommand: command.name(),
        argv,
        parameters: serde_json::to_value(&command)?,
        seed,
        workers: exec.workers(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        outputs: dir.into_files(),
        exit_code,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    let path = manifest.save(out)?;
    say!("manifest: {}", path.display());
    Ok(manifest)
}

/// Outcome of comparing a replay with its manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub matched: Vec<String>,
    pub mismatched: Vec<String>,
    pub missing: Vec<String>,
    pub exit_code_matches: bool,
}

impl ReplayOutcome {
    pub fn identical(&self) -> bool {
        self.mismatched.is_empty() && self.missing.is_empty() && self.exit_code_matches
    }
}

/// Reruns the manifest at `path` into `out` (default `<dir>/replay`) and
/// compares outputs.
pub fn replay_manifest(path: &Path, out: Option<PathBuf>, workers: Option<usize>) -> Result<ReplayOutcome> {
    let original = ExperimentManifest::load(path)?;
    let command: Command = serde_json::from_value(original.parameters.clone())
        .map_err(|e| Error::parse(path.display().to_string(), e))?;
    if matches!(command, Command::Replay(_)) {
        return Err(Error::Usage("a replay manifest cannot itself be replayed".into()));
    }
    for input in &original.inputs {
        let now = FileDigest::of_file(Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            return Err(Error::Usage(format!("input {} changed since the manifest was written", input.path)));
        }
    }
    let source_dir = std::path::absolute(path.parent().unwrap_or(Path::new(".")))
        .map_err(|e| Error::io(path, e))?;
    let out = out.unwrap_or_else(|| source_dir.join("replay"));
    if std::path::absolute(&out).map_err(|e| Error::io(&out, e))? == source_dir {
        return Err(Error::Usage("replay output must not overwrite the original directory".into()));
    }
    let fresh = run_recorded(command, original.seed, workers.unwrap_or(original.workers), &out, original.argv.clone())?;

    let mut outcome = ReplayOutcome {
        matched: Vec::new(),
        mismatched: Vec::new(),
        missing: Vec::new(),
        exit_code_matches: fresh.exit_code == original.exit_code,
    };
    for f in &original.outputs {
        match fresh.outputs.iter().find(|g| g.path == f.path) {
            Some(g) if g.sha256 == f.sha256 => outcome.matched.push(f.path.clone()),
            Some(_) => outcome.mismatched.push(f.path.clone()),
            None => outcome.missing.push(f.path.clone()),
        }
    }
    for g in &fresh.outputs {
        if !original.outputs.iter().any(|f| f.path == g.path) {
            outcome.missing.push(g.path.clone());
        }
    }
    Ok(outcome)
}

fn replay(path: &Path, out: Option<PathBuf>, workers: Option<usize>) -> Result<i32> {
    let outcome = replay_manifest(path, out, workers)?;
    let mut t = table::Table::new(format!("replay of {}", path.display()), &["file", "status"]);
    for (files, status) in
        [(&outcome.matched, "identical"), (&outcome.mismatched, "DIFFERENT"), (&outcome.missing, "missing")]
    {
        for f in files {
            t.row(vec![f.clone(), status.into()]);
        }
    }
    t.print();
    if !outcome.exit_code_matches {
        say!("exit code differs from the manifest");
    }
    say!("replay: {}", if outcome.identical() { "bit-identical" } else { "MISMATCH" });
    Ok(if outcome.identical() { EXIT_PASS } else { EXIT_FAIL })
}

/// Manifest path inside an output directory.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.join(MANIFEST_FILE)
}
