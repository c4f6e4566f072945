//! Pixel semantic aggregation: turns speckled pixel labels into
//! connectivity labels with the help of a promptable segmenter.
//!
//! Things classes are prompted per pseudo-label component (enlarged box plus
//! center point). Stuff classes are assigned to automatic proposals by
//! majority vote of the pseudo-label pixels under them. The merge pass gives
//! things precedence and renders the aggregated label map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{ImageRef, SegmenterBackend};
use crate::components::{connected_components, enlarge_box, mask_iou, Adjacency};
use crate::error::{Error, Result};
use crate::io::{BitMask, ClassKind, Connectivity, LabelMap, MaskSet, Provenance, Taxonomy, VOID};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsaConfig {
    /// Area scale applied to a seed's bounding box before prompting.
    pub area_factor: f64,
    /// Things components smaller than this are not prompted.
    pub min_seed_area: u64,
    pub adjacency: Adjacency,
    /// Minimum share of a proposal's pixels that must carry a vote.
    pub min_labeled_frac: f64,
    pub overlap_thresh: f64,
    /// Connectivities smaller than this after merging are dropped.
    pub min_area: u64,
}

impl Default for PsaConfig {
    fn default() -> Self {
        Self {
            area_factor: 1.5,
            min_seed_area: 16,
            adjacency: Adjacency::Eight,
            min_labeled_frac: 0.01,
            overlap_thresh: 0.5,
            min_area: 16,
        }
    }
}

impl PsaConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.area_factor.is_finite() || self.area_factor < 1.0 {
            return Err(Error::Config(format!("area_factor must be >= 1, got {}", self.area_factor)));
        }
        if !(0.0..=1.0).contains(&self.min_labeled_frac) {
            return Err(Error::Config(format!("min_labeled_frac must be in [0, 1], got {}", self.min_labeled_frac)));
        }
        if !(0.0..=1.0).contains(&self.overlap_thresh) {
            return Err(Error::Config(format!("overlap_thresh must be in [0, 1], got {}", self.overlap_thresh)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsaOutput {
    /// Surviving connectivities sorted by id.
    pub connectivities: Vec<Connectivity>,
    pub label: LabelMap,
}

/// Prompts the backend once per things-class component of `pseudo`.
///
/// Ids follow seed order. A prompt answered with an empty mask keeps the
/// seed component itself.
pub fn aggregate_things(
    pseudo: &LabelMap,
    tax: &Taxonomy,
    backend: &dyn SegmenterBackend,
    image: &ImageRef,
    cfg: &PsaConfig,
) -> Result<Vec<Connectivity>> {
    if pseudo.dims() != image.dims() {
        return Err(Error::dims(image.dims(), pseudo.dims()));
    }
    let things = tax.classes_of(ClassKind::Things);
    if things.is_empty() {
        return Ok(Vec::new());
    }
    let seeds: Vec<_> = connected_components(pseudo, cfg.adjacency, Some(&things))
        .into_iter()
        .filter(|c| c.area >= cfg.min_seed_area)
        .collect();
    let dims = pseudo.dims();
    seeds
        .par_iter()
        .enumerate()
        .map(|(i, seed)| {
            let prompt_box = enlarge_box(&seed.bbox, cfg.area_factor, dims);
            let mask = match backend.prompt_segment(image, prompt_box, seed.centroid) {
                Ok(m) if m.area() > 0 => m,
                Ok(_) | Err(Error::EmptyResult) => {
                    log::debug!("empty prompt result for seed {i} of {}; keeping the seed", image.id);
                    seed.mask.clone()
                }
                Err(e) => return Err(e),
            };
            if mask.dims() != dims {
                return Err(Error::dims(dims, mask.dims()));
            }
            let mut c = Connectivity::from_rle(i as u32, mask, seed.class, Provenance::ThingsPrompt)?;
            c.seed_area = Some(seed.area);
            Ok(c)
        })
        .collect()
}

/// Labels each automatic proposal with the most frequent stuff class under it.
pub fn align_stuff(
    pseudo: &LabelMap,
    tax: &Taxonomy,
    proposals: &MaskSet,
    cfg: &PsaConfig,
) -> Result<Vec<Connectivity>> {
    let stuff = tax.classes_of(ClassKind::Stuff);
    align_by_majority(pseudo, proposals, &stuff, cfg.min_labeled_frac, Provenance::StuffAlign)
}

/// Majority-vote alignment restricted to `classes`; pixels of other classes
/// and void do not vote. Proposals whose voting share is below
/// `min_labeled_frac` (or zero) are skipped. Ids are assigned in output order.
pub fn align_by_majority(
    pseudo: &LabelMap,
    proposals: &MaskSet,
    classes: &[u8],
    min_labeled_frac: f64,
    provenance: Provenance,
) -> Result<Vec<Connectivity>> {
    if proposals.dims() != pseudo.dims() {
        return Err(Error::dims(pseudo.dims(), proposals.dims()));
    }
    let mut votes_for = [false; 256];
    classes.iter().for_each(|&c| votes_for[c as usize] = true);
    votes_for[VOID as usize] = false;

    let mut out = Vec::new();
    for entry in &proposals.masks {
        if entry.rle.dims() != pseudo.dims() {
            return Err(Error::dims(pseudo.dims(), entry.rle.dims()));
        }
        let counts = class_counts(pseudo, &entry.rle);
        let area = entry.rle.area();
        let labeled: u64 = (0..256).filter(|&c| votes_for[c]).map(|c| counts[c]).sum();
        if area == 0 || labeled == 0 || (labeled as f64) < min_labeled_frac * area as f64 {
            continue;
        }
        let mut best = 0usize;
        for c in 0..256 {
            if votes_for[c] && (!votes_for[best] || counts[c] > counts[best]) {
                best = c;
            }
        }
        out.push(Connectivity::from_rle(out.len() as u32, entry.rle.clone(), best as u8, provenance)?);
    }
    Ok(out)
}

/// Pixel count of each label value under a mask, read straight off the runs.
pub fn class_counts(map: &LabelMap, rle: &crate::io::MaskRle) -> [u64; 256] {
    let mut counts = [0u64; 256];
    let (w, h) = (map.width() as u64, map.height() as u64);
    let data = map.data();
    for (start, end) in rle.one_runs() {
        for s in start..end {
            let (x, y) = (s / h, s % h);
            counts[data[(y * w + x) as usize] as usize] += 1;
        }
    }
    counts
}

/// Resolves overlaps between the two branches and renders the result.
///
/// Things masks overlapping another things mask above `overlap_thresh` IoU
/// lose to the one with the larger seed (then the lower id). Stuff masks lose
/// every pixel claimed by a surviving things mask and are dropped if that
/// removes more than `overlap_thresh` of their area. Anything below
/// `min_area` is dropped. Survivors are painted in id order, so a later id
/// wins the pixels still shared.
pub fn merge_connectivities(
    things: Vec<Connectivity>,
    stuff: Vec<Connectivity>,
    dims: (u32, u32),
    cfg: &PsaConfig,
) -> Result<PsaOutput> {
    for c in things.iter().chain(&stuff) {
        if c.mask.dims() != dims {
            return Err(Error::dims(dims, c.mask.dims()));
        }
    }

    let mut order: Vec<Connectivity> = things;
    order.sort_by(|a, b| {
        let sa = a.seed_area.unwrap_or(a.area);
        let sb = b.seed_area.unwrap_or(b.area);
        sb.cmp(&sa).then(a.id.cmp(&b.id))
    });
    let mut kept: Vec<Connectivity> = Vec::new();
    for c in order {
        let mut suppressed = false;
        for k in &kept {
            if mask_iou(&c.mask, &k.mask)? > cfg.overlap_thresh {
                suppressed = true;
                break;
            }
        }
        if !suppressed {
            kept.push(c);
        }
    }
    kept.retain(|c| c.area >= cfg.min_area);

    let mut things_union = BitMask::new(dims.0, dims.1);
    for c in &kept {
        things_union.union_with(&c.mask.decode()?);
    }
    for mut s in stuff {
        let mut m = s.mask.decode()?;
        let before = m.area();
        m.subtract(&things_union);
        let after = m.area();
        if (before - after) as f64 > cfg.overlap_thresh * before as f64 || after < cfg.min_area || after == 0 {
            continue;
        }
        if after != before {
            s.mask = m.encode();
            s.area = after;
        }
        kept.push(s);
    }

    kept.sort_by_key(|c| c.id);
    let mut label = LabelMap::void(dims.0, dims.1);
    let h = dims.1 as u64;
    for c in &kept {
        for (start, end) in c.mask.one_runs() {
            for s in start..end {
                label.set((s / h) as u32, (s % h) as u32, c.label);
            }
        }
    }
    Ok(PsaOutput { connectivities: kept, label })
}

/// The full aggregation for one image. Stuff ids are numbered after the
/// things ids.
pub fn run_psa(
    pseudo: &LabelMap,
    tax: &Taxonomy,
    backend: &dyn SegmenterBackend,
    image: &ImageRef,
    cfg: &PsaConfig,
) -> Result<PsaOutput> {
    cfg.validate()?;
    let things = aggregate_things(pseudo, tax, backend, image, cfg)?;
    let proposals = backend.auto_masks(image)?;
    if proposals.dims() != image.dims() {
        return Err(Error::dims(image.dims(), proposals.dims()));
    }
    let offset = things.len() as u32;
    let mut stuff = align_stuff(pseudo, tax, &proposals.auto_only(), cfg)?;
    stuff.iter_mut().for_each(|c| c.id += offset);
    merge_connectivities(things, stuff, pseudo.dims(), cfg)
}
