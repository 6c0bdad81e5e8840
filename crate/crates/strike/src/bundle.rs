//! Versioned JSON model bundle.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use strike_core::stacking::StrikeModel;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub config: RunConfig,
    pub model: StrikeModel,
}

impl ModelBundle {
    pub fn new(config: RunConfig, model: StrikeModel) -> Self {
        ModelBundle {
            format_version: FORMAT_VERSION,
            config,
            model,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| CliError::runtime(format!("cannot serialize bundle: {e}")))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| CliError::write(path, e))
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("bundle: {e}")))?;
        let found = v.get("format_version").and_then(Value::as_u64);
        match found {
            Some(n) if n == u64::from(FORMAT_VERSION) => {}
            Some(n) => {
                return Err(strike_core::Error::FormatVersion {
                    found: u32::try_from(n).unwrap_or(u32::MAX),
                    expected: FORMAT_VERSION,
                }
                .into())
            }
            None => return Err(CliError::config("bundle: missing `format_version`")),
        }
        serde_path_to_error::deserialize(v)
            .map_err(|e| CliError::config(format!("bundle field `{}`: {}", e.path(), e.inner())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        Self::from_json(&text)
    }
}
