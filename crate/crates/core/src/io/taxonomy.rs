use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Stuff,
    Things,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub name: String,
    pub kind: ClassKind,
}

/// Ordered class list; a class index is its position. Serialized as a bare
/// JSON list of `{name, kind}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ClassInfo>", into = "Vec<ClassInfo>")]
pub struct Taxonomy {
    classes: Vec<ClassInfo>,
}

/// Largest class count; 255 is reserved for void.
pub const MAX_CLASSES: usize = 254;

impl Taxonomy {
    pub fn new(classes: Vec<ClassInfo>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Taxonomy("no classes".into()));
        }
        if classes.len() > MAX_CLASSES {
            return Err(Error::Taxonomy(format!("{} classes exceeds the maximum of {MAX_CLASSES}", classes.len())));
        }
        let mut seen = HashSet::new();
        for c in &classes {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Taxonomy(format!("duplicate class name {:?}", c.name)));
            }
        }
        Ok(Self { classes })
    }

    /// Convenience constructor from `(name, kind)` pairs.
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, ClassKind)>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|(name, kind)| ClassInfo { name: name.into(), kind }).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn kind(&self, class: u8) -> Option<ClassKind> {
        self.classes.get(class as usize).map(|c| c.kind)
    }

    pub fn is_kind(&self, class: u8, kind: ClassKind) -> bool {
        self.kind(class) == Some(kind)
    }

    pub fn name(&self, class: u8) -> Option<&str> {
        self.classes.get(class as usize).map(|c| c.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<u8> {
        self.classes.iter().position(|c| c.name == name).map(|i| i as u8)
    }

    pub fn classes_of(&self, kind: ClassKind) -> Vec<u8> {
        (0..self.classes.len() as u8).filter(|&c| self.is_kind(c, kind)).collect()
    }
}

impl TryFrom<Vec<ClassInfo>> for Taxonomy {
    type Error = Error;

    fn try_from(classes: Vec<ClassInfo>) -> Result<Self> {
        Taxonomy::new(classes)
    }
}

impl From<Taxonomy> for Vec<ClassInfo> {
    fn from(t: Taxonomy) -> Self {
        t.classes
    }
}
