use std::fs;
use std::io::Write;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::{Format, GlobalOpts};

pub const TOOL: &str = "secluded";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever a report field changes meaning or disappears.
pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
pub struct Report<R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub command: String,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub result: R,
}

impl<R: Serialize> Report<R> {
    pub fn new(command: &str, params: Value, seed: Option<u64>, result: R) -> Self {
        Report {
            tool: TOOL,
            version: VERSION,
            schema: SCHEMA,
            command: command.to_string(),
            params,
            seed,
            result,
        }
    }
}

/// Write `bytes` to `--out` or stdout.
pub fn emit_bytes(global: &GlobalOpts, bytes: &[u8]) -> Result<()> {
    match &global.out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn emit<R: Serialize>(global: &GlobalOpts, report: &Report<R>) -> Result<()> {
    if global.format != Format::Json {
        bail!("`{}` only writes JSON reports", report.command);
    }
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    emit_bytes(global, text.as_bytes())
}
