//! CSV tables, the JSONL manifest and file digests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Digest of the toolkit version and every configuration field.
pub fn config_digest(cfg: &RunConfig) -> String {
    let mut text = format!("version={VERSION}\n");
    for (k, v) in &cfg.echo {
        let _ = writeln!(text, "{k}={v}");
    }
    sha256_hex(text.as_bytes())
}

/// A CSV table with a fixed header. Floats use the shortest representation
/// that round-trips, so identical values give identical bytes.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    header: Vec<String>,
    body: String,
    rows: usize,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            body: String::new(),
            rows: 0,
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table {
            name: name.to_string(),
            header,
            body: String::new(),
            rows: 0,
        }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<Cell>,
    {
        let cells: Vec<String> = fields.into_iter().map(|c| c.into().0).collect();
        assert_eq!(cells.len(), self.header.len(), "row width of {}", self.name);
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut s = self.header.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s.into_bytes()
    }
}

pub struct Cell(String);

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell(format!("{v}"))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell(v)
    }
}

/// Everything one stage produced, written in a single ordered pass.
pub struct StageOutput {
    pub stage: &'static str,
    pub tables: Vec<Table>,
    pub plots: Vec<(String, String)>,
    pub results: Map<String, Value>,
}

impl StageOutput {
    pub fn new(stage: &'static str) -> Self {
        StageOutput {
            stage,
            tables: Vec::new(),
            plots: Vec::new(),
            results: Map::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }
}

/// Writes stage outputs and keeps the manifest.
pub struct Writer {
    dir: PathBuf,
    cfg: RunConfig,
    manifest: Vec<Value>,
    started: Instant,
    pub written: Vec<PathBuf>,
}

impl Writer {
    /// Creates the output directory and checks that it is writable.
    pub fn open(cfg: &RunConfig) -> Result<Self, CliError> {
        let dir = cfg.output.dir.clone();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let probe = dir.join(".write-test");
        fs::write(&probe, b"").map_err(|e| CliError::io(&probe, e))?;
        fs::remove_file(&probe).map_err(|e| CliError::io(&probe, e))?;
        let echo: Map<String, Value> = cfg
            .echo
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
            .collect();
        let header = json!({
            "record": "run",
            "version": VERSION,
            "seed": cfg.seed,
            "experiment": cfg.experiment.kind().name(),
            "config": echo,
            "config_digest": config_digest(cfg),
        });
        Ok(Writer {
            dir,
            cfg: cfg.clone(),
            manifest: vec![header],
            started: Instant::now(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<String, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(sha256_hex(bytes))
    }

    pub fn stage(&mut self, out: StageOutput, stage_start: Instant) -> Result<(), CliError> {
        let formats = self.cfg.output.formats;
        let mut files = Vec::new();
        if formats.csv {
            for t in &out.tables {
                let bytes = t.to_bytes();
                let digest = self.put(&t.name, &bytes)?;
                files.push(json!({"name": t.name, "rows": t.rows(), "sha256": digest}));
            }
        }
        if formats.svg {
            for (name, svg) in &out.plots {
                let digest = self.put(name, svg.as_bytes())?;
                files.push(json!({"name": name, "sha256": digest}));
            }
        }
        self.manifest.push(json!({
            "record": "stage",
            "stage": out.stage,
            "wall_ms": stage_start.elapsed().as_secs_f64() * 1e3,
            "files": files,
            "results": Value::Object(out.results),
        }));
        Ok(())
    }

    pub fn finish(mut self) -> Result<Vec<PathBuf>, CliError> {
        if self.cfg.output.formats.jsonl {
            self.manifest.push(json!({
                "record": "end",
                "wall_ms": self.started.elapsed().as_secs_f64() * 1e3,
            }));
            let mut text = String::new();
            for v in &self.manifest {
                text.push_str(&v.to_string());
                text.push('\n');
            }
            self.put("manifest.jsonl", text.as_bytes())?;
        }
        Ok(self.written)
    }
}
