use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Output directory bound to one resolved configuration.
pub struct Sink {
    dir: PathBuf,
    command: &'static str,
    params: Value,
    hash: String,
}

impl Sink {
    pub fn new<P: Serialize>(dir: &Path, command: &'static str, params: &P) -> Result<Self, CliError> {
        let params = serde_json::to_value(params)?;
        let hash = config_hash(command, &params)?;
        fs::create_dir_all(dir)?;
        Ok(Sink { dir: dir.to_path_buf(), command, params, hash })
    }

    pub fn write_json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf, CliError> {
        let doc = json!({
            "command": self.command,
            "config_hash": self.hash,
            "params": self.params,
            "version": env!("CARGO_PKG_VERSION"),
            "result": result,
        });
        let path = self.dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        Ok(path)
    }

    /// Writes `body` (header line first) behind a `# config_hash=` comment line.
    pub fn write_csv(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, format!("# config_hash={}\n{body}", self.hash))?;
        Ok(path)
    }
}

pub fn config_hash(command: &str, params: &Value) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(&json!({ "command": command, "params": params }))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
