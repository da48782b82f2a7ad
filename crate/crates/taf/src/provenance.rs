//! Output provenance: every file the tool writes carries the tool version,
//! a hash of the resolved configuration, and the seed in effect.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    /// Hashes the given configuration byte slices (order-sensitive) together
    /// with the seed.
    pub fn new(config_parts: &[&[u8]], seed: u64) -> Self {
        let mut hasher = Sha256::new();
        for part in config_parts {
            hasher.update(part);
        }
        hasher.update(seed.to_le_bytes());
        let digest = hasher.finalize();
        let config_hash = digest
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seed,
        }
    }

    /// `# key=value` comment lines for CSV-style outputs.
    pub fn csv_comment(&self) -> String {
        format!(
            "# tool_version={}\n# config_hash={}\n# seed={}\n",
            self.tool_version, self.config_hash, self.seed
        )
    }
}
