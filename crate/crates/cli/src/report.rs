use std::fs;
use std::path::Path;

use anyhow::Context;
use medlab_core::io::{InputDigest, RunReport, Versions};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn digest(path: &Path) -> anyhow::Result<InputDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

pub fn render(command: &str, inputs: Vec<InputDigest>, results: Value) -> String {
    let report = RunReport {
        command: command.to_owned(),
        inputs,
        results,
        versions: Versions::default(),
    };
    serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
}
