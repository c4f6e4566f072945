use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rle::MaskRle;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskSource {
    /// Automatic, class-agnostic proposal.
    Auto,
    /// Mask reachable only through a box/point prompt.
    Prompt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskEntry {
    pub id: u32,
    pub rle: MaskRle,
    pub source: MaskSource,
}

/// Class-agnostic mask proposals for one image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSet {
    pub image_id: String,
    pub height: u32,
    pub width: u32,
    pub masks: Vec<MaskEntry>,
}

impl MaskSet {
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for m in &self.masks {
            if !ids.insert(m.id) {
                return Err(Error::Invalid(format!("duplicate mask id {}", m.id)));
            }
            if m.rle.dims() != self.dims() {
                return Err(Error::dims(self.dims(), m.rle.dims()));
            }
            m.rle.validate()?;
        }
        Ok(())
    }

    /// Only the automatic proposals, in the original order.
    pub fn auto_only(&self) -> MaskSet {
        MaskSet { masks: self.masks.iter().filter(|m| m.source == MaskSource::Auto).cloned().collect(), ..self.clone() }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let set: MaskSet = serde_json::from_str(&text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_vec(self)?).map_err(|e| Error::file(path, e))
    }
}
