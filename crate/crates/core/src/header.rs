use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "portgnn";
pub const SCHEMA_VERSION: u32 = 1;

/// Provenance block carried by every file the tool writes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    /// SHA-256 of the canonical JSON of the parameters that produced the file.
    pub spec_hash: String,
    pub seed: Option<u64>,
}

impl Header {
    pub fn new<T: Serialize>(params: &T, seed: Option<u64>) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            schema: SCHEMA_VERSION,
            spec_hash: params_hash(params),
            seed,
        }
    }

    /// `# key=value` comment lines for CSV outputs.
    pub fn comment_lines(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# tool={} version={} schema={}\n# spec_hash={}\n# seed={}\n",
            self.tool, self.version, self.schema, self.spec_hash, seed
        )
    }
}

pub fn params_hash<T: Serialize>(params: &T) -> String {
    let bytes = serde_json::to_vec(params).expect("parameters serialize");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
