use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cli::Command;
use crate::error::{Error, ParseError, Result};
use crate::io;

/// Record of one run: the fully resolved command, its files and stage timings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub version: String,
    pub command: Command,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Wall-clock seconds per stage, e.g. "sampling", "training", "evaluation".
    pub stage_seconds: BTreeMap<String, f64>,
    #[serde(default)]
    pub summary: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            stage_seconds: BTreeMap::new(),
            summary: serde_json::Value::Null,
        }
    }

    /// Runs `f`, adding its wall time to `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.stage_seconds.entry(stage.to_string()).or_insert(0.0) += start.elapsed().as_secs_f64();
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_file(path, |w| {
            serde_json::to_writer_pretty(&mut *w, self).map_err(std::io::Error::from)?;
            writeln!(w)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_reader(io::open(path)?)
            .map_err(|e| Error::Parse(ParseError::new(e.line(), e.to_string()).in_file(path)))
    }
}

/// `<output>.manifest.json` beside a file output.
pub fn path_for_file(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// `manifest.json` inside a directory output.
pub fn path_for_dir(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::GenerateArgs;

    #[test]
    fn sits_next_to_outputs() {
        assert_eq!(path_for_file(Path::new("out/emb.txt")), PathBuf::from("out/emb.txt.manifest.json"));
        assert_eq!(path_for_dir(Path::new("split")), PathBuf::from("split/manifest.json"));
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cmd = Command::Generate(GenerateArgs { nodes: 10, degree: 2.0, seed: 1, output: "g.txt".into() });
        let mut m = RunManifest::new(cmd);
        m.time("generation", || ());
        m.seed = Some(1);
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        assert_eq!(RunManifest::load(&path).unwrap(), m);
        std::fs::write(&path, "{").unwrap();
        assert_eq!(RunManifest::load(&path).unwrap_err().exit_code(), 3);
    }
}
