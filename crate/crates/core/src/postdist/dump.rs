use serde::{Deserialize, Serialize};

use super::{MmTable, PostdistModel};
use crate::error::{Error, Result};

pub const DUMP_FORMAT: &str = "scfde-postdist";
pub const DUMP_VERSION: u32 = 1;

/// Conditions under which a slow-time model was trained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingMeta {
    pub pa: String,
    pub backoff_db: f64,
    pub order: usize,
    pub training_symbols: usize,
    pub seed: u64,
}

/// Versioned JSON dump of a trained post-distorter, reusable across
/// fast-time runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDump {
    pub format: String,
    pub version: u32,
    pub meta: TrainingMeta,
    pub model: PostdistModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mm_table: Option<MmTable>,
}

impl ModelDump {
    pub fn new(meta: TrainingMeta, model: PostdistModel) -> Self {
        Self {
            format: DUMP_FORMAT.to_string(),
            version: DUMP_VERSION,
            meta,
            model,
            mm_table: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::ModelDump(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: ModelDump = serde_json::from_str(text).map_err(|e| Error::ModelDump(e.to_string()))?;
        if dump.format != DUMP_FORMAT {
            return Err(Error::ModelDump(format!("unknown format {:?}", dump.format)));
        }
        if dump.version != DUMP_VERSION {
            return Err(Error::ModelDump(format!("unsupported version {}", dump.version)));
        }
        dump.model.validate()?;
        if let Some(t) = &dump.mm_table {
            if t.coeffs.len() != dump.meta.order || t.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::ModelDump("correction table does not match the constellation".into()));
            }
        }
        Ok(dump)
    }
}
