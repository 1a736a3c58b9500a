use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;

/// A command failure and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or a scenario/plan that does not validate.
    Input(String),
    /// A solver guard or limit stopped the run.
    Limit(String),
    /// An engine broke its own contract.
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Input(_) => 2,
            Failure::Limit(_) => 3,
            Failure::Internal(_) => 4,
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Limit(m) | Failure::Internal(m) => f.write_str(m),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub fn read_text(path: &Path) -> CmdResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> CmdResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| Failure::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, enough to re-run the command.
    pub args: Vec<String>,
    pub scenario: Option<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new(command: &str, scenario: Option<&Path>, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            scenario: scenario.map(|p| p.display().to_string()),
            config,
            seed,
            wall_time_s: 0.0,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    /// Write every output atomically, then the manifest next to the first.
    pub fn write_outputs(mut self, files: &[(PathBuf, String)], started: std::time::Instant) -> CmdResult {
        for (path, text) in files {
            write_atomic(path, text)?;
            self.outputs.push(path.display().to_string());
        }
        let Some((first, _)) = files.first() else { return Ok(()) };
        self.wall_time_s = started.elapsed().as_secs_f64();
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        write_atomic(&sibling(first, ".manifest.json"), &text)
    }
}

pub fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    text
}
