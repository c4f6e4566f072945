//! Box/point prompt emulation over a fixed pool of precomputed masks.

use crate::error::{Error, Result};
use crate::io::{BBox, MaskRle, MaskSet, Point};

/// A mask pool indexed for prompt queries. All geometry is computed on the
/// column-major runs, so nothing is decoded.
#[derive(Debug, Clone)]
pub struct PromptPool {
    height: u64,
    entries: Vec<PoolMask>,
}

#[derive(Debug, Clone)]
struct PoolMask {
    id: u32,
    area: u64,
    runs: Vec<(u64, u64)>,
}

/// Ranking of one pool mask against a prompt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PromptScore {
    pub id: u32,
    pub contains_point: bool,
    pub box_iou: f64,
    pub area: u64,
}

impl PromptPool {
    pub fn new(set: &MaskSet) -> Self {
        let entries = set
            .masks
            .iter()
            .map(|m| PoolMask { id: m.id, area: m.rle.area(), runs: m.rle.one_runs().collect() })
            .collect();
        Self { height: set.height as u64, entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self, b: &BBox, point: Point) -> Vec<PromptScore> {
        self.entries
            .iter()
            .map(|m| {
                let inter = box_intersection(&m.runs, b, self.height);
                PromptScore {
                    id: m.id,
                    contains_point: contains(&m.runs, point, self.height),
                    box_iou: inter as f64 / (m.area + b.area() - inter) as f64,
                    area: m.area,
                }
            })
            .collect()
    }

    /// Id of the winning mask: among masks holding `point`, the highest IoU
    /// with the box interior, then the smaller area, then the lower id. With
    /// no mask holding the point the same ranking runs over the whole pool.
    pub fn resolve(&self, b: &BBox, point: Point) -> Result<u32> {
        let scores = self.scores(b, point);
        let any_hit = scores.iter().any(|s| s.contains_point);
        scores
            .into_iter()
            .filter(|s| !any_hit || s.contains_point)
            .min_by(|a, b| b.box_iou.total_cmp(&a.box_iou).then(a.area.cmp(&b.area)).then(a.id.cmp(&b.id)))
            .map(|s| s.id)
            .ok_or(Error::EmptyPool)
    }
}

/// Resolves a box + point prompt against `pool` and returns the chosen mask.
pub fn resolve_prompt(pool: &MaskSet, b: &BBox, point: Point) -> Result<MaskRle> {
    let id = PromptPool::new(pool).resolve(b, point)?;
    Ok(pool.masks.iter().find(|m| m.id == id).expect("resolved id is in the pool").rle.clone())
}

fn contains(runs: &[(u64, u64)], p: Point, height: u64) -> bool {
    let s = p.x as u64 * height + p.y as u64;
    let i = runs.partition_point(|&(_, end)| end <= s);
    i < runs.len() && runs[i].0 <= s
}

fn box_intersection(runs: &[(u64, u64)], b: &BBox, height: u64) -> u64 {
    let (x0, x1) = (b.x0 as u64, b.x1 as u64);
    let (y0, y1) = (b.y0 as u64, b.y1 as u64 + 1);
    let first = runs.partition_point(|&(_, end)| end <= x0 * height);
    let mut total = 0;
    for &(s, e) in &runs[first..] {
        let (cs, ce) = (s / height, (e - 1) / height);
        if cs > x1 {
            break;
        }
        for col in cs.max(x0)..=ce.min(x1) {
            let top = if col == cs { s % height } else { 0 };
            let bottom = if col == ce { (e - 1) % height + 1 } else { height };
            let (lo, hi) = (top.max(y0), bottom.min(y1));
            if hi > lo {
                total += hi - lo;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{BitMask, MaskEntry, MaskSource};
    use rand::{Rng, SeedableRng};

    fn set(masks: Vec<(u32, BitMask)>) -> MaskSet {
        let (w, h) = masks[0].1.dims();
        MaskSet {
            image_id: "t".into(),
            width: w,
            height: h,
            masks: masks
                .into_iter()
                .map(|(id, m)| MaskEntry { id, rle: m.encode(), source: MaskSource::Auto })
                .collect(),
        }
    }

    fn rect(w: u32, h: u32, b: BBox) -> BitMask {
        BitMask::from_box(w, h, &b)
    }

    /// Scores every pool mask by decoding it; independent of the run arithmetic.
    fn brute_force(pool: &MaskSet, b: &BBox, p: Point) -> u32 {
        let boxed = BitMask::from_box(pool.width, pool.height, b);
        let scored: Vec<(u32, bool, f64, u64)> = pool
            .masks
            .iter()
            .map(|m| {
                let d = m.rle.decode().unwrap();
                let inter = d.intersection_count(&boxed);
                let uni = d.area() + boxed.area() - inter;
                (m.id, d.contains(p), inter as f64 / uni as f64, d.area())
            })
            .collect();
        let hit = scored.iter().any(|s| s.1);
        let mut best: Option<(u32, bool, f64, u64)> = None;
        for s in scored.into_iter().filter(|s| !hit || s.1) {
            best = match best {
                None => Some(s),
                Some(cur) => {
                    let better = s.2 > cur.2 || (s.2 == cur.2 && (s.3 < cur.3 || (s.3 == cur.3 && s.0 < cur.0)));
                    Some(if better { s } else { cur })
                }
            };
        }
        best.unwrap().0
    }

    #[test]
    fn exact_box_mask_wins() {
        let b = BBox::new(2, 2, 5, 6);
        let pool = set(vec![(7, rect(10, 10, BBox::new(7, 0, 9, 2))), (3, rect(10, 10, b))]);
        let got = resolve_prompt(&pool, &b, Point::new(3, 4)).unwrap();
        assert_eq!(got, rect(10, 10, b).encode());
    }

    #[test]
    fn nested_masks_follow_box() {
        let inner = BBox::new(3, 3, 6, 6);
        let outer = BBox::new(1, 1, 8, 8);
        let pool = set(vec![(0, rect(10, 10, outer)), (1, rect(10, 10, inner))]);
        let p = Point::new(4, 4);
        let near_inner = BBox::new(3, 3, 6, 7);
        let near_outer = BBox::new(1, 1, 8, 7);
        assert_eq!(PromptPool::new(&pool).resolve(&near_inner, p).unwrap(), 1);
        assert_eq!(PromptPool::new(&pool).resolve(&near_outer, p).unwrap(), 0);
        for b in [near_inner, near_outer] {
            assert_eq!(PromptPool::new(&pool).resolve(&b, p).unwrap(), brute_force(&pool, &b, p));
        }
    }

    #[test]
    fn point_outside_every_mask_falls_back() {
        let pool = set(vec![(0, rect(10, 10, BBox::new(0, 0, 2, 2))), (1, rect(10, 10, BBox::new(5, 5, 9, 9)))]);
        let b = BBox::new(4, 4, 9, 9);
        assert_eq!(PromptPool::new(&pool).resolve(&b, Point::new(0, 9)).unwrap(), 1);
        assert_eq!(brute_force(&pool, &b, Point::new(0, 9)), 1);
    }

    #[test]
    fn ties_go_to_smaller_area_then_lower_id() {
        let b = BBox::new(0, 0, 3, 3);
        // two masks with equal IoU against b and equal area: lower id wins regardless of order
        let a = rect(8, 8, BBox::new(0, 0, 3, 1));
        let c = rect(8, 8, BBox::new(0, 2, 3, 3));
        let pool = set(vec![(9, a.clone()), (4, c.clone())]);
        assert_eq!(PromptPool::new(&pool).resolve(&b, Point::new(7, 7)).unwrap(), 4);
        let pool = set(vec![(4, c), (9, a)]);
        assert_eq!(PromptPool::new(&pool).resolve(&b, Point::new(7, 7)).unwrap(), 4);
    }

    #[test]
    fn empty_pool() {
        let pool = MaskSet { image_id: "e".into(), width: 4, height: 4, masks: vec![] };
        assert!(matches!(resolve_prompt(&pool, &BBox::new(0, 0, 1, 1), Point::new(0, 0)), Err(Error::EmptyPool)));
    }

    #[test]
    fn run_geometry_matches_decoded_masks() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let (w, h) = (rng.random_range(1..20), rng.random_range(1..20));
            let n = rng.random_range(1..6);
            let masks: Vec<(u32, BitMask)> = (0..n)
                .map(|i| {
                    let p = rng.random_range(0.0..1.0);
                    (i * 3 + 1, BitMask::from_bits(w, h, (0..w * h).map(|_| rng.random_bool(p)).collect()).unwrap())
                })
                .collect();
            let mut pool = set(masks);
            let (x0, y0) = (rng.random_range(0..w), rng.random_range(0..h));
            let b = BBox::new(x0, y0, rng.random_range(x0..w), rng.random_range(y0..h));
            let p = Point::new(rng.random_range(0..w), rng.random_range(0..h));
            let idx = PromptPool::new(&pool);
            for (s, m) in idx.scores(&b, p).iter().zip(&pool.masks) {
                let d = m.rle.decode().unwrap();
                assert_eq!(s.contains_point, d.contains(p));
                let inter = d.intersection_count(&BitMask::from_box(w, h, &b));
                assert_eq!(s.box_iou, inter as f64 / (d.area() + b.area() - inter) as f64);
            }
            let winner = idx.resolve(&b, p).unwrap();
            assert_eq!(winner, brute_force(&pool, &b, p));
            // pool order never matters
            pool.masks.reverse();
            assert_eq!(PromptPool::new(&pool).resolve(&b, p).unwrap(), winner);
        }
    }
}
