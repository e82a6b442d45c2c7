//! CSV and manifest persistence, and bit-exact replay.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::experiments::{execute, RunOutput, Table};
use crate::spec::RunSpec;

pub const MANIFEST: &str = "manifest.json";
pub const TIMING: &str = "timing.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub code_version: String,
    /// SHA-256 of the serialized run specification.
    pub config_hash: String,
    pub spec: RunSpec,
    /// CSV file name to SHA-256 of its contents.
    pub outputs: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(spec: &RunSpec) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(spec)?.as_bytes()))
}

pub fn render_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::io("<csv buffer>", e.into_error()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

/// Writes every table, the timing sidecar and the manifest into `dir`.
pub fn persist(spec: &RunSpec, out: &RunOutput, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut outputs = BTreeMap::new();
    for t in &out.tables {
        let bytes = render_csv(t)?;
        let name = format!("{}.csv", t.name);
        write(&dir.join(&name), &bytes)?;
        outputs.insert(name, sha256_hex(&bytes));
    }
    let timing = Table {
        name: "timing".into(),
        header: vec!["table".into(), "row".into(), "seconds".into()],
        rows: out
            .timing
            .iter()
            .map(|(t, i, s)| vec![t.clone(), i.to_string(), format!("{s}")])
            .collect(),
    };
    write(&dir.join(TIMING), &render_csv(&timing)?)?;
    let manifest = Manifest {
        code_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config_hash(spec)?,
        spec: spec.clone(),
        outputs,
    };
    write(&dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Clone, Debug)]
pub struct ReplayReport {
    pub dir: PathBuf,
    pub output: RunOutput,
    pub matched: Vec<String>,
}

/// Re-executes the manifest's run into `dir` and compares every CSV digest.
pub fn replay(manifest_path: &Path, dir: &Path) -> Result<ReplayReport> {
    let m = load_manifest(manifest_path)?;
    if config_hash(&m.spec)? != m.config_hash {
        return Err(HarnessError::Replay("manifest specification does not match its config hash".into()));
    }
    let output = execute(&m.spec)?;
    let fresh = persist(&m.spec, &output, dir)?;
    let mut problems = Vec::new();
    for (name, digest) in &m.outputs {
        match fresh.outputs.get(name) {
            Some(d) if d == digest => {}
            Some(_) => problems.push(format!("{name} differs")),
            None => problems.push(format!("{name} was not produced")),
        }
    }
    for name in fresh.outputs.keys() {
        if !m.outputs.contains_key(name) {
            problems.push(format!("unexpected output {name}"));
        }
    }
    if !problems.is_empty() {
        return Err(HarnessError::Replay(problems.join(", ")));
    }
    Ok(ReplayReport {
        dir: dir.to_path_buf(),
        output,
        matched: m.outputs.keys().cloned().collect(),
    })
}
