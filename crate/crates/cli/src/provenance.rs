//! Header attached to every artifact: enough to rerun and get the same bytes.

use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub core_version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    /// The resolved configuration as TOML, output location and thread
    /// count left at their defaults.
    pub config: String,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            core_version: lmsm_core::VERSION,
            command: command.to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            config: cfg.normalized().to_toml(),
        }
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("provenance serializes")
    }

    /// Lines for a `# `-commented CSV header; the config goes on one line as JSON.
    pub fn csv_lines(&self) -> Vec<String> {
        vec![
            format!("{} {} (lmsm-core {})", self.tool, self.tool_version, self.core_version),
            format!("command: {}", self.command),
            format!("config_hash: sha256:{}", self.config_hash),
            format!("seed: {}", self.seed),
            format!("config: {}", serde_json::Value::String(self.config.clone())),
        ]
    }

    /// Aligned-text preamble.
    pub fn text_header(&self) -> String {
        self.csv_lines().iter().take(4).map(|l| format!("# {l}\n")).collect()
    }
}
