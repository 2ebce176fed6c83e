//! Run directory: artifacts, the manifest, and error classification.

use serde::Serialize;
use std::fmt;
use std::path::{Path, PathBuf};

use wl2_core::fourier::io::write_csv;
use wl2_core::report::{to_json, write_atomic, write_dat, write_json};
use wl2_core::{CoeffVector, Error, Tolerances};

use crate::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    /// 2 for anything the caller got wrong, 1 for failed premises and I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::InvalidParameter(_) | Error::Parse { .. } | Error::GridNotPowerOfTwo(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Verdict of a subcommand: the list of failed checks, empty on success.
#[derive(Debug, Default)]
pub struct Verdict {
    pub failures: Vec<String>,
}

impl Verdict {
    pub fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    core_version: &'static str,
    command: &'a Command,
    seed: u64,
    parallel: bool,
    tolerances: &'a Tolerances,
    outputs: &'a [String],
    status: &'static str,
    failures: &'a [String],
}

/// Output directory of one invocation; records every artifact it writes.
pub struct RunDir {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let p = self.path(name);
        Ok(write_json(&p, value)?)
    }

    pub fn coeffs(&mut self, name: &str, c: &CoeffVector) -> CliResult<()> {
        let p = self.path(name);
        Ok(write_csv(&p, c)?)
    }

    pub fn dat(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> CliResult<()> {
        let p = self.path(name);
        Ok(write_dat(&p, header, rows)?)
    }

    /// Writes `manifest.json`. No timestamps, so reruns are byte-identical.
    pub fn manifest(&self, cli: &Cli, tol: &Tolerances, status: &'static str, failures: &[String]) -> CliResult<()> {
        let m = Manifest {
            tool: "wl2",
            tool_version: env!("CARGO_PKG_VERSION"),
            core_version: wl2_core::VERSION,
            command: &cli.command,
            seed: cli.seed,
            parallel: cli.parallel,
            tolerances: tol,
            outputs: &self.outputs,
            status,
            failures,
        };
        let p = self.dir.join("manifest.json");
        Ok(write_atomic(&p, to_json(&m).as_bytes())?)
    }
}
