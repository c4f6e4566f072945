//! Minority-class copy-paste from refined connectivities.

use std::collections::{BTreeMap, HashMap};

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Connectivity, LabelMap, RefinedFile, Taxonomy};

/// A connectivity eligible for pasting, with the image it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolItem {
    pub image_id: String,
    pub image: Option<String>,
    pub connectivity: Connectivity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResamplePool {
    /// Pixel count per class over all kept and corrected connectivities.
    pub frequencies: BTreeMap<u8, u64>,
    pub median: f64,
    pub items: BTreeMap<u8, Vec<PoolItem>>,
}

impl ResamplePool {
    pub fn minority_classes(&self) -> Vec<u8> {
        self.items.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.values().map(Vec::len).sum()
    }
}

/// Collects connectivities of classes whose pixel frequency is strictly
/// below the median over the classes that occur at all.
pub fn build_resample_pool(files: &[RefinedFile], tax: Option<&Taxonomy>) -> Result<ResamplePool> {
    let mut frequencies: BTreeMap<u8, u64> = BTreeMap::new();
    let mut kept: Vec<(&RefinedFile, &Connectivity)> = Vec::new();
    for f in files {
        for p in &f.connectivities {
            if p.partition == crate::io::Partition::Dropped {
                continue;
            }
            let c = &p.connectivity;
            if let Some(t) = tax {
                c.validate(t.num_classes())?;
            }
            *frequencies.entry(c.label).or_default() += c.area;
            kept.push((f, c));
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted: Vec<u64> = frequencies.values().copied().collect();
    sorted.sort_unstable();
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] as f64 } else { (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0 };

    let mut items: BTreeMap<u8, Vec<PoolItem>> = BTreeMap::new();
    for (f, c) in kept {
        if (frequencies[&c.label] as f64) < median {
            items.entry(c.label).or_default().push(PoolItem {
                image_id: f.image_id.clone(),
                image: f.image.clone(),
                connectivity: c.clone(),
            });
        }
    }
    Ok(ResamplePool { frequencies, median, items })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Keep the source position, shifted only as far as needed to fit.
    #[default]
    Original,
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PasteConfig {
    pub n_paste: usize,
    pub placement: Placement,
}

impl Default for PasteConfig {
    fn default() -> Self {
        Self { n_paste: 1, placement: Placement::Original }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasteRecord {
    pub image_id: String,
    pub connectivity: u32,
    pub class: u8,
    /// Translation applied to the source mask.
    pub offset: (i64, i64),
    pub area: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PasteOutcome {
    pub image: RgbImage,
    pub label: LabelMap,
    pub pastes: Vec<PasteRecord>,
}

/// Pastes `cfg.n_paste` pool connectivities onto a copy of the destination.
///
/// Each draw picks a class uniformly, then an item of that class uniformly.
/// The item's RGB pixels (from `load_source`) and its label are copied under
/// its translated mask; later pastes overwrite earlier ones.
pub fn copy_paste(
    pool: &ResamplePool,
    dst_image: &RgbImage,
    dst_label: &LabelMap,
    seed: u64,
    cfg: &PasteConfig,
    mut load_source: impl FnMut(&PoolItem) -> Result<RgbImage>,
) -> Result<PasteOutcome> {
    if pool.is_empty() {
        return Err(Error::PoolEmpty);
    }
    let dims = dst_image.dimensions();
    if dims != dst_label.dims() {
        return Err(Error::dims(dims, dst_label.dims()));
    }
    let (w, h) = dims;
    let classes = pool.minority_classes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut image = dst_image.clone();
    let mut label = dst_label.clone();
    let mut sources: HashMap<String, RgbImage> = HashMap::new();
    let mut pastes = Vec::with_capacity(cfg.n_paste);

    for _ in 0..cfg.n_paste {
        let class = classes[rng.random_range(0..classes.len())];
        let bucket = &pool.items[&class];
        let item = &bucket[rng.random_range(0..bucket.len())];
        let c = &item.connectivity;
        let mask = c.mask.decode()?;
        let bbox = mask.bbox().ok_or(Error::EmptyMask)?;
        let (bw, bh) = (bbox.width(), bbox.height());
        if bw > w || bh > h {
            return Err(Error::DoesNotFit { id: c.id, w: bw, h: bh });
        }
        let (x0, y0) = match cfg.placement {
            Placement::Original => (bbox.x0.min(w - bw), bbox.y0.min(h - bh)),
            Placement::UniformRandom => (rng.random_range(0..=w - bw), rng.random_range(0..=h - bh)),
        };
        let offset = (x0 as i64 - bbox.x0 as i64, y0 as i64 - bbox.y0 as i64);

        let key = format!("{}\u{0}{}", item.image_id, item.image.as_deref().unwrap_or(""));
        if !sources.contains_key(&key) {
            sources.insert(key.clone(), load_source(item)?);
        }
        let src = &sources[&key];
        if src.dimensions() != mask.dims() {
            return Err(Error::dims(mask.dims(), src.dimensions()));
        }
        for (x, y) in mask.ones() {
            let (tx, ty) = ((x as i64 + offset.0) as u32, (y as i64 + offset.1) as u32);
            image.put_pixel(tx, ty, *src.get_pixel(x, y));
            label.set(tx, ty, c.label);
        }
        pastes.push(PasteRecord {
            image_id: item.image_id.clone(),
            connectivity: c.id,
            class: c.label,
            offset,
            area: c.area,
        });
    }
    Ok(PasteOutcome { image, label, pastes })
}
