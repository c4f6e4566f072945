//! Synthetic benchmark cases with known ground truth.
//!
//! A case is a label layout (stuff background regions with things shapes on
//! top), an RGB rendering of it, a corrupted pseudo-label, and a proposal set
//! built from the ground-truth components. Corruption erodes each region
//! away from class boundaries, thins what is left to random speckles, and
//! relabels a share of the components. Some adjacent things pairs are
//! offered to the stuff branch only as one merged proposal; their separate
//! masks remain reachable through prompts.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::components::{connected_components, Adjacency, Component};
use crate::error::{Error, Result};
use crate::io::{
    save_json, save_label_map, save_rgb, BBox, ClassKind, LabelMap, MaskEntry, MaskSet, MaskSource, Point, Taxonomy,
    MAX_CLASSES, VOID,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub width: u32,
    pub height: u32,
    pub stuff_classes: usize,
    pub things_classes: usize,
    /// Seeds of the background partition.
    pub stuff_regions: usize,
    /// Free-standing rectangles and ellipses.
    pub things_shapes: usize,
    /// Side-by-side rectangles of two different things classes.
    pub adjacent_pairs: usize,
    /// Inclusive range of shape side lengths.
    pub thing_size: [u32; 2],
    /// Chebyshev radius removed from every class boundary.
    pub erosion_radius: u32,
    pub speckle_keep_prob: f64,
    pub label_flip_rate: f64,
    pub distractor_merge_rate: f64,
    /// Amplitude of uniform per-channel pixel noise.
    pub color_noise: f64,
    pub seed: u64,
    /// Number of cases written by [`write_dataset`]; case `i` uses `seed + i`.
    pub cases: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            stuff_classes: 4,
            things_classes: 4,
            stuff_regions: 6,
            things_shapes: 8,
            adjacent_pairs: 3,
            thing_size: [16, 48],
            erosion_radius: 0,
            speckle_keep_prob: 1.0,
            label_flip_rate: 0.0,
            distractor_merge_rate: 0.0,
            color_noise: 12.0,
            seed: 0,
            cases: 1,
        }
    }
}

impl SynthConfig {
    pub fn num_classes(&self) -> usize {
        self.stuff_classes + self.things_classes
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.width == 0 || self.height == 0 {
            return err("dims must be positive".into());
        }
        if self.stuff_classes == 0 || self.stuff_regions == 0 {
            return err("at least one stuff class and region is required".into());
        }
        if self.num_classes() > MAX_CLASSES {
            return err(format!("{} classes exceeds {MAX_CLASSES}", self.num_classes()));
        }
        if (self.things_shapes > 0 || self.adjacent_pairs > 0) && self.things_classes == 0 {
            return err("things shapes need at least one things class".into());
        }
        if self.adjacent_pairs > 0 && self.things_classes < 2 {
            return err("adjacent pairs need two things classes".into());
        }
        let [lo, hi] = self.thing_size;
        if lo == 0 || lo > hi || hi > self.width.min(self.height) {
            return err(format!("thing_size {lo}..{hi} does not fit a {}x{} image", self.width, self.height));
        }
        if self.adjacent_pairs > 0 && 2 * lo > self.width {
            return err("adjacent pairs do not fit the image width".into());
        }
        for (name, p) in [
            ("speckle_keep_prob", self.speckle_keep_prob),
            ("label_flip_rate", self.label_flip_rate),
            ("distractor_merge_rate", self.distractor_merge_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.color_noise.is_nan() || self.color_noise < 0.0 {
            return err("color_noise must be non-negative".into());
        }
        Ok(())
    }

    /// Stuff classes first, then things.
    pub fn taxonomy(&self) -> Taxonomy {
        Taxonomy::from_pairs(
            (0..self.stuff_classes)
                .map(|i| (format!("stuff{i}"), ClassKind::Stuff))
                .chain((0..self.things_classes).map(|i| (format!("thing{i}"), ClassKind::Things))),
        )
        .expect("validated class count")
    }
}

/// Bookkeeping for one ground-truth component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentTruth {
    /// Index into the ground truth's component list (8-adjacency order).
    pub id: u32,
    pub class: u8,
    pub area: u64,
    pub anchor: Point,
    pub flipped: bool,
    /// Label the pseudo-label carries on this component's surviving pixels.
    pub pseudo_class: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedPair {
    pub first: u32,
    pub second: u32,
    /// Id of the merged automatic proposal.
    pub proposal: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub seed: u64,
    pub components: Vec<ComponentTruth>,
    pub merged_pairs: Vec<MergedPair>,
    pub flipped_pixels: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCase {
    pub id: String,
    pub image: RgbImage,
    pub gt: LabelMap,
    pub pseudo: LabelMap,
    pub proposals: MaskSet,
    pub truth: SynthTruth,
}

// independent random streams so that e.g. changing corruption leaves the layout alone
const LAYOUT: u64 = 1;
const COLOR: u64 = 2;
const CORRUPT: u64 = 3;
const MERGE: u64 = 4;

fn stream(seed: u64, n: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n);
    rng
}

pub fn synth_case(cfg: &SynthConfig, id: &str) -> Result<SynthCase> {
    cfg.validate()?;
    let gt = layout(cfg);
    let comps = connected_components(&gt, Adjacency::Eight, None);
    let image = render(cfg, &gt);
    let (pseudo, components, flipped_pixels) = corrupt(cfg, &gt, &comps);
    let (proposals, merged_pairs) = proposals(cfg, &gt, &comps, id);
    Ok(SynthCase {
        id: id.to_string(),
        image,
        gt,
        pseudo,
        proposals,
        truth: SynthTruth { seed: cfg.seed, components, merged_pairs, flipped_pixels },
    })
}

fn layout(cfg: &SynthConfig) -> LabelMap {
    let mut rng = stream(cfg.seed, LAYOUT);
    let (w, h) = (cfg.width, cfg.height);
    let seeds: Vec<(f64, f64, u8)> = (0..cfg.stuff_regions)
        .map(|_| {
            (
                rng.random_range(0.0..w as f64),
                rng.random_range(0.0..h as f64),
                rng.random_range(0..cfg.stuff_classes) as u8,
            )
        })
        .collect();
    let mut map = LabelMap::void(w, h);
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let nearest = seeds
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 - px).powi(2) + (a.1 - py).powi(2);
                    let db = (b.0 - px).powi(2) + (b.1 - py).powi(2);
                    da.total_cmp(&db)
                })
                .expect("at least one region");
            map.set(x, y, nearest.2);
        }
    }

    let first_thing = cfg.stuff_classes as u8;
    let [lo, hi] = cfg.thing_size;
    for _ in 0..cfg.things_shapes {
        let class = first_thing + rng.random_range(0..cfg.things_classes) as u8;
        let (sw, sh) = (rng.random_range(lo..=hi), rng.random_range(lo..=hi));
        let (x0, y0) = (rng.random_range(0..=w - sw), rng.random_range(0..=h - sh));
        let b = BBox::new(x0, y0, x0 + sw - 1, y0 + sh - 1);
        if rng.random_bool(0.5) {
            fill_rect(&mut map, &b, class);
        } else {
            fill_ellipse(&mut map, &b, class);
        }
    }
    for _ in 0..cfg.adjacent_pairs {
        let a = rng.random_range(0..cfg.things_classes) as u8;
        let b = (a as usize + rng.random_range(1..cfg.things_classes)) % cfg.things_classes;
        let (wa, wb) = (rng.random_range(lo..=hi), rng.random_range(lo..=hi));
        let (wa, wb) = if wa + wb > w { (lo, lo) } else { (wa, wb) };
        let sh = rng.random_range(lo..=hi);
        let (x0, y0) = (rng.random_range(0..=w - wa - wb), rng.random_range(0..=h - sh));
        fill_rect(&mut map, &BBox::new(x0, y0, x0 + wa - 1, y0 + sh - 1), first_thing + a);
        fill_rect(&mut map, &BBox::new(x0 + wa, y0, x0 + wa + wb - 1, y0 + sh - 1), first_thing + b as u8);
    }
    map
}

fn fill_rect(map: &mut LabelMap, b: &BBox, class: u8) {
    for y in b.y0..=b.y1 {
        for x in b.x0..=b.x1 {
            map.set(x, y, class);
        }
    }
}

fn fill_ellipse(map: &mut LabelMap, b: &BBox, class: u8) {
    let (cx, cy) = ((b.x0 + b.x1) as f64 / 2.0, (b.y0 + b.y1) as f64 / 2.0);
    let (rx, ry) = (b.width() as f64 / 2.0, b.height() as f64 / 2.0);
    for y in b.y0..=b.y1 {
        for x in b.x0..=b.x1 {
            if ((x as f64 - cx) / rx).powi(2) + ((y as f64 - cy) / ry).powi(2) <= 1.0 {
                map.set(x, y, class);
            }
        }
    }
}

/// Base color of each class: points spread over a sphere around mid-gray.
pub fn class_colors(num_classes: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..num_classes)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / num_classes as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [128.0 + 100.0 * r * t.cos(), 128.0 + 100.0 * r * t.sin(), 128.0 + 100.0 * z]
        })
        .collect()
}

fn render(cfg: &SynthConfig, gt: &LabelMap) -> RgbImage {
    let colors = class_colors(cfg.num_classes());
    let mut rng = stream(cfg.seed, COLOR);
    let a = cfg.color_noise;
    RgbImage::from_fn(cfg.width, cfg.height, |x, y| {
        let base = colors[gt.get(x, y) as usize];
        let mut px = [0u8; 3];
        for (p, b) in px.iter_mut().zip(base) {
            let noise = if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 };
            *p = (b + noise).round().clamp(0.0, 255.0) as u8;
        }
        Rgb(px)
    })
}

/// Pixels whose Chebyshev `radius` neighborhood (clipped to the image) holds
/// a single class.
fn eroded(gt: &LabelMap, radius: u32) -> Vec<bool> {
    let (w, h) = (gt.width() as i64, gt.height() as i64);
    let r = radius as i64;
    let mut keep = vec![true; (w * h) as usize];
    if r == 0 {
        return keep;
    }
    for y in 0..h {
        for x in 0..w {
            let c = gt.get(x as u32, y as u32);
            'win: for ny in (y - r).max(0)..=(y + r).min(h - 1) {
                for nx in (x - r).max(0)..=(x + r).min(w - 1) {
                    if gt.get(nx as u32, ny as u32) != c {
                        keep[(y * w + x) as usize] = false;
                        break 'win;
                    }
                }
            }
        }
    }
    keep
}

fn corrupt(cfg: &SynthConfig, gt: &LabelMap, comps: &[Component]) -> (LabelMap, Vec<ComponentTruth>, u64) {
    let mut rng = stream(cfg.seed, CORRUPT);
    let tax = cfg.taxonomy();
    let keep = eroded(gt, cfg.erosion_radius);
    let mut pseudo = LabelMap::void(gt.width(), gt.height());
    for (i, (&g, &k)) in gt.data().iter().zip(&keep).enumerate() {
        if k && rng.random_bool(cfg.speckle_keep_prob) {
            pseudo.data_mut()[i] = g;
        }
    }

    let mut truth = Vec::with_capacity(comps.len());
    let mut flipped_pixels = 0;
    let h = gt.height() as u64;
    for (i, c) in comps.iter().enumerate() {
        let mut pseudo_class = c.class;
        if rng.random_bool(cfg.label_flip_rate) {
            pseudo_class = wrong_class(&tax, c.class, &mut rng);
            for (start, end) in c.mask.one_runs() {
                for s in start..end {
                    let (x, y) = ((s / h) as u32, (s % h) as u32);
                    if pseudo.get(x, y) != VOID {
                        pseudo.set(x, y, pseudo_class);
                        flipped_pixels += 1;
                    }
                }
            }
        }
        truth.push(ComponentTruth {
            id: i as u32,
            class: c.class,
            area: c.area,
            anchor: c.anchor,
            flipped: pseudo_class != c.class,
            pseudo_class,
        });
    }
    (pseudo, truth, flipped_pixels)
}

/// A different class of the same kind, or of any kind if the kind has one class.
fn wrong_class(tax: &Taxonomy, class: u8, rng: &mut ChaCha8Rng) -> u8 {
    let kind = tax.kind(class).expect("class in taxonomy");
    let mut choices: Vec<u8> = tax.classes_of(kind).into_iter().filter(|&c| c != class).collect();
    if choices.is_empty() {
        choices = (0..tax.num_classes() as u8).filter(|&c| c != class).collect();
    }
    choices[rng.random_range(0..choices.len())]
}

/// Ground-truth components as automatic proposals, with some adjacent
/// things pairs replaced by their union. The separate masks of a merged
/// pair stay in the set as prompt-only entries.
fn proposals(cfg: &SynthConfig, gt: &LabelMap, comps: &[Component], id: &str) -> (MaskSet, Vec<MergedPair>) {
    let (w, h) = gt.dims();
    let mut owner = vec![0u32; (w * h) as usize];
    for (i, c) in comps.iter().enumerate() {
        for (start, end) in c.mask.one_runs() {
            for s in start..end {
                let (x, y) = (s / h as u64, s % h as u64);
                owner[(y * w as u64 + x) as usize] = i as u32;
            }
        }
    }
    let is_thing = |i: u32| comps[i as usize].class as usize >= cfg.stuff_classes;
    let mut pairs = BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            let a = owner[(y * w + x) as usize];
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx >= w || ny >= h {
                    continue;
                }
                let b = owner[(ny * w + nx) as usize];
                if a != b && is_thing(a) && is_thing(b) && comps[a as usize].class != comps[b as usize].class {
                    pairs.insert((a.min(b), a.max(b)));
                }
            }
        }
    }

    let mut rng = stream(cfg.seed, MERGE);
    let mut used = vec![false; comps.len()];
    let mut merged = Vec::new();
    for (a, b) in pairs {
        let roll = rng.random_bool(cfg.distractor_merge_rate);
        if roll && !used[a as usize] && !used[b as usize] {
            used[a as usize] = true;
            used[b as usize] = true;
            merged.push((a, b));
        }
    }

    let mut masks = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        if !used[i] {
            masks.push(MaskEntry { id: masks.len() as u32, rle: c.mask.clone(), source: MaskSource::Auto });
        }
    }
    let mut merged_pairs = Vec::new();
    for &(a, b) in &merged {
        let mut union = comps[a as usize].mask.decode().expect("valid component mask");
        union.union_with(&comps[b as usize].mask.decode().expect("valid component mask"));
        let proposal = masks.len() as u32;
        masks.push(MaskEntry { id: proposal, rle: union.encode(), source: MaskSource::Auto });
        merged_pairs.push(MergedPair { first: a, second: b, proposal });
    }
    for &(a, b) in &merged {
        for c in [a, b] {
            masks.push(MaskEntry {
                id: masks.len() as u32,
                rle: comps[c as usize].mask.clone(),
                source: MaskSource::Prompt,
            });
        }
    }
    (MaskSet { image_id: id.to_string(), width: w, height: h, masks }, merged_pairs)
}

/// Writes `image.png`, `gt.png`, `pseudo.png`, `masks.json` and `truth.json`.
pub fn write_case(case: &SynthCase, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    save_rgb(&case.image, dir.join("image.png"))?;
    save_label_map(&case.gt, dir.join("gt.png"))?;
    save_label_map(&case.pseudo, dir.join("pseudo.png"))?;
    case.proposals.save(dir.join("masks.json"))?;
    save_json(&case.truth, dir.join("truth.json"))
}

/// One entry of a refinement manifest. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub pseudo: PathBuf,
    pub out: PathBuf,
    /// Key for the segmenter backend; defaults to the image file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Precomputed feature file; handcrafted features otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
}

/// Writes `cfg.cases` cases as `case_000`, `case_001`, ... under `out`, plus
/// `taxonomy.json`, a `manifest.json` for refinement, and a `proposals/`
/// directory usable as a file backend.
pub fn write_dataset(cfg: &SynthConfig, out: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    cfg.validate()?;
    let out = out.as_ref();
    let proposals_dir = out.join("proposals");
    std::fs::create_dir_all(&proposals_dir).map_err(|e| Error::file(&proposals_dir, e))?;
    save_json(&cfg.taxonomy(), out.join("taxonomy.json"))?;
    let mut manifest = Vec::new();
    for i in 0..cfg.cases {
        let name = format!("case_{i:03}");
        let case_cfg = SynthConfig { seed: cfg.seed.wrapping_add(i as u64), ..cfg.clone() };
        let case = synth_case(&case_cfg, &name)?;
        write_case(&case, out.join(&name))?;
        case.proposals.save(proposals_dir.join(format!("{name}.json")))?;
        manifest.push(ManifestEntry {
            image: Path::new(&name).join("image.png"),
            pseudo: Path::new(&name).join("pseudo.png"),
            out: Path::new(&name).join("refined"),
            id: Some(name),
            features: None,
        });
    }
    save_json(&manifest, out.join("manifest.json"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig { width: 96, height: 80, thing_size: [10, 24], ..Default::default() }
    }

    #[test]
    fn no_corruption_means_pseudo_is_gt() {
        let case = synth_case(&small(), "c").unwrap();
        assert_eq!(case.pseudo, case.gt);
        assert_eq!(case.gt.coverage(), 1.0);
        assert!(case.truth.components.iter().all(|c| !c.flipped));
        assert!(case.proposals.masks.iter().all(|m| m.source == MaskSource::Auto));
    }

    #[test]
    fn same_seed_same_case() {
        let cfg = SynthConfig {
            erosion_radius: 2,
            speckle_keep_prob: 0.5,
            label_flip_rate: 0.3,
            distractor_merge_rate: 0.5,
            ..small()
        };
        assert_eq!(synth_case(&cfg, "c").unwrap(), synth_case(&cfg, "c").unwrap());
        let other = synth_case(&SynthConfig { seed: 1, ..cfg.clone() }, "c").unwrap();
        assert_ne!(other.gt, synth_case(&cfg, "c").unwrap().gt);
    }

    #[test]
    fn thinning_rate() {
        let cfg = SynthConfig { speckle_keep_prob: 0.2, ..Default::default() };
        let case = synth_case(&cfg, "c").unwrap();
        let ratio = case.pseudo.coverage() / case.gt.coverage();
        assert!((ratio - 0.2).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn corruption_stays_inside_support_and_bookkeeping_holds() {
        let cfg = SynthConfig { erosion_radius: 3, speckle_keep_prob: 0.3, label_flip_rate: 0.3, ..Default::default() };
        for seed in 0..4 {
            let case = synth_case(&SynthConfig { seed, ..cfg.clone() }, "c").unwrap();
            let comps = connected_components(&case.gt, Adjacency::Eight, None);
            let tax = cfg.taxonomy();
            for (c, t) in comps.iter().zip(&case.truth.components) {
                assert_eq!((c.class, c.anchor), (t.class, t.anchor));
                assert_eq!(t.flipped, t.pseudo_class != t.class);
                if t.flipped {
                    assert_eq!(tax.kind(t.class), tax.kind(t.pseudo_class));
                }
                for (x, y) in c.mask.decode().unwrap().ones() {
                    let p = case.pseudo.get(x, y);
                    assert!(p == VOID || p == t.pseudo_class);
                }
            }
        }
    }

    #[test]
    fn erosion_clears_boundaries() {
        let cfg = SynthConfig { erosion_radius: 2, ..small() };
        let case = synth_case(&cfg, "c").unwrap();
        let (w, h) = case.gt.dims();
        for y in 0..h {
            for x in 0..w {
                if case.pseudo.get(x, y) == VOID {
                    continue;
                }
                for ny in y.saturating_sub(2)..=(y + 2).min(h - 1) {
                    for nx in x.saturating_sub(2)..=(x + 2).min(w - 1) {
                        assert_eq!(case.gt.get(nx, ny), case.gt.get(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn merged_pairs_are_adjacent_things() {
        let cfg = SynthConfig { distractor_merge_rate: 1.0, ..Default::default() };
        let case = synth_case(&cfg, "c").unwrap();
        assert!(!case.truth.merged_pairs.is_empty());
        case.proposals.validate().unwrap();
        let comps = connected_components(&case.gt, Adjacency::Eight, None);
        for p in &case.truth.merged_pairs {
            let (a, b) = (&comps[p.first as usize], &comps[p.second as usize]);
            assert!(a.class as usize >= cfg.stuff_classes && b.class as usize >= cfg.stuff_classes);
            assert_ne!(a.class, b.class);
            let union = &case.proposals.masks[p.proposal as usize];
            assert_eq!(union.source, MaskSource::Auto);
            assert_eq!(union.rle.area(), a.area + b.area);
            let prompts: Vec<_> = case.proposals.masks.iter().filter(|m| m.source == MaskSource::Prompt).collect();
            assert!(prompts.iter().any(|m| m.rle == a.mask) && prompts.iter().any(|m| m.rle == b.mask));
        }
        // every pixel is covered by exactly one automatic proposal
        let auto = case.proposals.auto_only();
        let total: u64 = auto.masks.iter().map(|m| m.rle.area()).sum();
        assert_eq!(total, (cfg.width * cfg.height) as u64);
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(SynthConfig { speckle_keep_prob: 1.5, ..small() }.validate().is_err());
        assert!(SynthConfig { thing_size: [30, 20], ..small() }.validate().is_err());
        assert!(SynthConfig { things_classes: 1, ..small() }.validate().is_err());
        assert!(serde_json::from_str::<SynthConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn dataset_layout() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig { cases: 2, ..small() };
        let manifest = write_dataset(&cfg, dir.path()).unwrap();
        assert_eq!(manifest.len(), 2);
        for f in [
            "taxonomy.json",
            "manifest.json",
            "proposals/case_001.json",
            "case_000/image.png",
            "case_000/gt.png",
            "case_000/pseudo.png",
            "case_000/masks.json",
            "case_000/truth.json",
        ] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        let tax = Taxonomy::load(dir.path().join("taxonomy.json")).unwrap();
        assert_eq!(tax.num_classes(), 8);
    }
}
