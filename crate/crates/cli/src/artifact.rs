//! Artifact files and stage manifests.
//!
//! JSON artifacts are `{"meta": .., "data": ..}` envelopes. CSV artifacts
//! start with one `#` comment line carrying the same metadata. Files are
//! written to a temporary sibling and renamed into place.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tennis_frontier::game::STATE_ORDER_VERSION;

pub const MANIFEST: &str = "manifest.json";

/// Embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub stage: String,
    pub config_hash: String,
    pub state_order: String,
    /// Set for outputs that depend on the optimizer budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
}

impl Meta {
    pub fn new(stage: &str, config_hash: &str, profile: Option<&str>) -> Self {
        Meta {
            stage: stage.into(),
            config_hash: config_hash.into(),
            state_order: STATE_ORDER_VERSION.into(),
            profile: profile.map(String::from),
        }
    }

    fn csv_line(&self) -> String {
        let mut s = format!(
            "# tennis-frontier stage={} config_hash={} state_order={}",
            self.stage, self.config_hash, self.state_order
        );
        if let Some(p) = &self.profile {
            s.push_str(&format!(" profile={p}"));
        }
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub meta: Meta,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Input files (relative names) and their SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Files written, relative to the output root.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    meta: Meta,
    data: T,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Writes via a temporary file in the same directory and renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Collects a stage's outputs under `root`, recording their hashes.
pub struct ArtifactWriter {
    root: PathBuf,
    meta: Meta,
    written: BTreeMap<String, String>,
}

impl ArtifactWriter {
    pub fn new(root: &Path, meta: Meta) -> Self {
        ArtifactWriter { root: root.to_path_buf(), meta, written: BTreeMap::new() }
    }

    pub fn bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(rel), bytes)?;
        self.written.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, data: &T) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(&Envelope { meta: self.meta.clone(), data })?;
        text.push(b'\n');
        self.bytes(rel, &text)
    }

    /// `body` is complete CSV text including its header row.
    pub fn csv_text(&mut self, rel: &str, body: &[u8]) -> Result<()> {
        let mut text = self.meta.csv_line().into_bytes();
        text.extend_from_slice(body);
        self.bytes(rel, &text)
    }

    pub fn csv_rows<I, R>(&mut self, rel: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let body = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.csv_text(rel, &body)
    }

    pub fn into_outputs(self) -> BTreeMap<String, String> {
        self.written
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(Meta, T)> {
    let text = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let env: Envelope<T> = serde_json::from_slice(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((env.meta, env.data))
}

/// CSV text with `#` comment lines removed.
pub fn read_csv_body(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().filter(|l| !l.starts_with('#')).flat_map(|l| [l, "\n"]).collect())
}

pub fn read_manifest(dir: &Path) -> Option<Manifest> {
    let text = std::fs::read(dir.join(MANIFEST)).ok()?;
    serde_json::from_slice(&text).ok()
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(manifest)?;
    text.push(b'\n');
    write_atomic(&dir.join(MANIFEST), &text)
}

/// First output whose file is missing or whose hash differs, if any.
pub fn first_changed_output(root: &Path, manifest: &Manifest) -> Option<String> {
    manifest
        .outputs
        .iter()
        .find(|(rel, hash)| hash_file(&root.join(rel)).ok().as_deref() != Some(hash.as_str()))
        .map(|(rel, _)| rel.clone())
}

/// File-name friendly form of a player name.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() {
        "player".into()
    } else {
        trimmed.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("Roger Federer"), "roger_federer");
        assert_eq!(slug("J.-L. Struff"), "j_l_struff");
        assert_eq!(slug("  "), "player");
    }

    #[test]
    fn round_trips_and_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), Meta::new("fit", "abc", Some("reduced")));
        w.json("a/x.json", &vec![1, 2, 3]).unwrap();
        w.csv_rows("b.csv", &["k", "v"], [vec!["a".to_string(), "1".to_string()]]).unwrap();
        let outputs = w.into_outputs();
        let (meta, data): (Meta, Vec<i32>) = read_json(&dir.path().join("a/x.json")).unwrap();
        assert_eq!(meta.profile.as_deref(), Some("reduced"));
        assert_eq!(data, vec![1, 2, 3]);
        assert_eq!(read_csv_body(&dir.path().join("b.csv")).unwrap(), "k,v\na,1\n");
        let m = Manifest { meta, tool_version: "0".into(), seed: None, inputs: BTreeMap::new(), outputs };
        assert_eq!(first_changed_output(dir.path(), &m), None);
        std::fs::write(dir.path().join("b.csv"), "changed").unwrap();
        assert_eq!(first_changed_output(dir.path(), &m).as_deref(), Some("b.csv"));
    }
}
