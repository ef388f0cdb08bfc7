use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::CliError;
use crate::run::{execute, RunOutput};

/// Everything needed to reproduce the files of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub code_version: String,
    pub command: String,
    pub config: RunConfig,
    pub tolerances: Value,
    pub truncation: Value,
    pub diagnostics: Map<String, Value>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

pub fn manifest_name(command: &str) -> String {
    format!("{}.manifest.json", command.replace('-', "_"))
}

pub fn write_outputs(dir: &Path, cfg: &RunConfig, out: &RunOutput, seconds: f64) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in &out.files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents)?;
        written.push(path);
    }
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        command: cfg.command.name().to_string(),
        config: cfg.clone(),
        tolerances: out.tolerances.clone(),
        truncation: out.truncation.clone(),
        diagnostics: out.diagnostics.clone(),
        warnings: out.warnings.clone(),
        outputs: out.files.iter().map(|f| f.name.clone()).collect(),
        duration_seconds: seconds,
    };
    let path = dir.join(manifest_name(cfg.command.name()));
    fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    written.push(path);
    Ok(written)
}

/// Runs `cfg` and writes its files into its output directory.
pub fn run_and_write(cfg: &RunConfig) -> Result<(Vec<PathBuf>, Vec<String>), CliError> {
    let start = Instant::now();
    let out = execute(cfg)?;
    let written = write_outputs(&cfg.output.dir, cfg, &out, start.elapsed().as_secs_f64())?;
    Ok((written, out.warnings))
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(path)?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::config("manifest", e.to_string()))?;
    if m.schema_version != SCHEMA_VERSION {
        return Err(CliError::config("schema_version", format!("manifest version {} is not {SCHEMA_VERSION}", m.schema_version)));
    }
    Ok(m)
}
