//! Connectivity records and the refinement results built from them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rle::{BitMask, MaskRle};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ThingsPrompt,
    StuffAlign,
    Corrected,
}

/// One aggregated region with its connectivity-level label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connectivity {
    pub id: u32,
    pub label: u8,
    pub provenance: Provenance,
    pub area: u64,
    /// Area of the pseudo-label component that seeded a prompted mask.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_area: Option<u64>,
    /// Label before correction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_label: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    pub mask: MaskRle,
}

impl Connectivity {
    pub fn new(id: u32, mask: &BitMask, label: u8, provenance: Provenance) -> Result<Self> {
        Self::from_rle(id, mask.encode(), label, provenance)
    }

    pub fn from_rle(id: u32, mask: MaskRle, label: u8, provenance: Provenance) -> Result<Self> {
        let area = mask.area();
        if area == 0 {
            return Err(Error::EmptyMask);
        }
        Ok(Self {
            id,
            label,
            provenance,
            area,
            seed_area: None,
            prior_label: None,
            loss: None,
            eta: None,
            probs: None,
            mask,
        })
    }

    pub fn validate(&self, num_classes: usize) -> Result<()> {
        self.mask.validate()?;
        if self.area == 0 || self.area != self.mask.area() {
            return Err(Error::Invalid(format!(
                "connectivity {}: area {} does not match mask area {}",
                self.id,
                self.area,
                self.mask.area()
            )));
        }
        if self.label as usize >= num_classes {
            return Err(Error::Invalid(format!("connectivity {}: label {} out of range", self.id, self.label)));
        }
        if let Some(p) = &self.probs {
            let sum: f64 = p.iter().sum();
            if p.len() != num_classes || (sum - 1.0).abs() > 1e-6 {
                return Err(Error::Invalid(format!("connectivity {}: probs are not a simplex", self.id)));
            }
        }
        if let Some(eta) = self.eta {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::Invalid(format!("connectivity {}: eta {eta} outside [0, 1]", self.id)));
            }
        }
        Ok(())
    }

    /// `(class, probability)` of the most probable class; ties go to the lower index.
    pub fn top_class(&self) -> Option<(u8, f64)> {
        let probs = self.probs.as_ref()?;
        let mut best = (0u8, f64::NEG_INFINITY);
        for (k, &p) in probs.iter().enumerate() {
            if p > best.1 {
                best = (k as u8, p);
            }
        }
        Some(best)
    }
}

/// Connectivities of one image as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivitySet {
    pub image_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    pub height: u32,
    pub width: u32,
    pub connectivities: Vec<Connectivity>,
}

impl ConnectivitySet {
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn validate(&self, num_classes: usize) -> Result<()> {
        for c in &self.connectivities {
            if c.mask.dims() != self.dims() {
                return Err(Error::dims(self.dims(), c.mask.dims()));
            }
            c.validate(num_classes)?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(self, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Two-component 1-D Gaussian mixture, components ordered by mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmFit {
    pub low: GaussianComponent,
    pub high: GaussianComponent,
    pub log_likelihood: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau_ns: f64,
    pub tau_cr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Clean,
    Corrected,
    Dropped,
}

/// Outcome of noise selection: kept, relabeled, and discarded connectivities.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedSet {
    pub clean: Vec<Connectivity>,
    pub corrected: Vec<Connectivity>,
    pub dropped: Vec<Connectivity>,
    pub thresholds: Thresholds,
}

impl RefinedSet {
    /// The union of clean and corrected connectivities.
    pub fn all(&self) -> impl Iterator<Item = &Connectivity> {
        self.clean.iter().chain(&self.corrected)
    }

    pub fn partition_of(&self, id: u32) -> Option<Partition> {
        let has = |v: &[Connectivity]| v.iter().any(|c| c.id == id);
        if has(&self.clean) {
            Some(Partition::Clean)
        } else if has(&self.corrected) {
            Some(Partition::Corrected)
        } else if has(&self.dropped) {
            Some(Partition::Dropped)
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.clean.len() + self.corrected.len() + self.dropped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionedConnectivity {
    pub partition: Partition,
    #[serde(flatten)]
    pub connectivity: Connectivity,
}

/// A [`RefinedSet`] for one image as stored on disk; entries sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedFile {
    pub image_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    pub height: u32,
    pub width: u32,
    pub thresholds: Thresholds,
    pub connectivities: Vec<PartitionedConnectivity>,
}

impl RefinedFile {
    pub fn new(image_id: String, image: Option<String>, dims: (u32, u32), set: &RefinedSet) -> Self {
        let mut connectivities: Vec<_> = [
            (Partition::Clean, &set.clean),
            (Partition::Corrected, &set.corrected),
            (Partition::Dropped, &set.dropped),
        ]
        .into_iter()
        .flat_map(|(partition, v)| {
            v.iter().map(move |c| PartitionedConnectivity { partition, connectivity: c.clone() })
        })
        .collect();
        connectivities.sort_by_key(|p| p.connectivity.id);
        Self { image_id, image, width: dims.0, height: dims.1, thresholds: set.thresholds, connectivities }
    }

    pub fn to_refined_set(&self) -> RefinedSet {
        let mut set =
            RefinedSet { clean: Vec::new(), corrected: Vec::new(), dropped: Vec::new(), thresholds: self.thresholds };
        for p in &self.connectivities {
            let bucket = match p.partition {
                Partition::Clean => &mut set.clean,
                Partition::Corrected => &mut set.corrected,
                Partition::Dropped => &mut set.dropped,
            };
            bucket.push(p.connectivity.clone());
        }
        set
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(self, path)
    }
}

/// Settings for connectivity correction. Missing JSON fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SccConfig {
    pub tau_ns: f64,
    pub tau_cr: f64,
    pub warmup_iters: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    pub em_max_iters: usize,
    pub em_tol: f64,
    /// Fit one mixture per image instead of one over the whole shard.
    pub per_image_gmm: bool,
}

impl Default for SccConfig {
    fn default() -> Self {
        Self {
            tau_ns: 0.60,
            tau_cr: 0.95,
            warmup_iters: 5000,
            batch_size: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            seed: 0,
            em_max_iters: 100,
            em_tol: 1e-6,
            per_image_gmm: false,
        }
    }
}

impl SccConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.tau_ns) {
            return Err(Error::Config(format!("tau_ns must be in (0, 1), got {}", self.tau_ns)));
        }
        if !open_unit(self.tau_cr) {
            return Err(Error::Config(format!("tau_cr must be in (0, 1), got {}", self.tau_cr)));
        }
        if self.warmup_iters == 0 {
            return Err(Error::Config("warmup_iters must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config("learning_rate must be positive and momentum in [0, 1)".into()));
        }
        if self.em_max_iters == 0 || self.em_tol.is_nan() || self.em_tol <= 0.0 {
            return Err(Error::Config("em_max_iters and em_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds { tau_ns: self.tau_ns, tau_cr: self.tau_cr }
    }
}

pub(crate) fn load_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub(crate) fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| Error::file(path, e))
}
