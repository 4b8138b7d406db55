use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Core(simulmt::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Core(simulmt::Error::NoFeasibleAgent { .. }) => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "{m}"),
            Self::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Self::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<simulmt::Error> for CliError {
    fn from(e: simulmt::Error) -> Self {
        Self::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// One whitespace-tokenized sentence per line.
pub fn read_corpus(path: &Path) -> CliResult<Vec<Vec<String>>> {
    Ok(read_text(path)?
        .lines()
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect())
}

pub fn corpus_text<S: AsRef<str>>(sentences: &[Vec<S>]) -> String {
    let mut out = String::new();
    for s in sentences {
        for (i, w) in s.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(w.as_ref());
        }
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |e| CliError::Io(path.to_path_buf(), e);
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Record of one run, written next to its main output.
pub struct Manifest {
    subcommand: &'static str,
    flags: Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seeds: Value,
    results: Value,
    started: Instant,
}

impl Manifest {
    pub fn new(subcommand: &'static str, flags: &impl Serialize) -> Self {
        Self {
            subcommand,
            flags: serde_json::to_value(flags).unwrap_or(Value::Null),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seeds: json!({}),
            results: json!({}),
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    pub fn output(&mut self, p: &Path) {
        self.outputs.push(p.to_path_buf());
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds[name] = value.into();
    }

    pub fn result(&mut self, name: &str, value: impl Serialize) {
        self.results[name] = serde_json::to_value(value).unwrap_or(Value::Null);
    }

    /// Writes to `explicit`, or to `<primary>.manifest.json`.
    pub fn write(&self, explicit: Option<&Path>, primary: &Path) -> CliResult<()> {
        let path = explicit.map(Path::to_path_buf).unwrap_or_else(|| {
            let mut p = primary.as_os_str().to_owned();
            p.push(".manifest.json");
            PathBuf::from(p)
        });
        let doc = json!({
            "subcommand": self.subcommand,
            "flags": self.flags,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "results": self.results,
            "versions": {
                "simulmt": env!("CARGO_PKG_VERSION"),
                "checkpoint_format": simulmt::model::FORMAT_VERSION,
            },
            "duration_secs": self.started.elapsed().as_secs_f64(),
        });
        let mut text = serde_json::to_string_pretty(&doc).map_err(simulmt::Error::from)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())
    }
}
