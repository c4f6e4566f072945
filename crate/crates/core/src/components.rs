//! Connected-component extraction and mask geometry.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{BBox, LabelMap, MaskRle, Point, VOID};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Adjacency {
    #[serde(rename = "4")]
    Four,
    #[default]
    #[serde(rename = "8")]
    Eight,
}

impl Adjacency {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            4 => Some(Adjacency::Four),
            8 => Some(Adjacency::Eight),
            _ => None,
        }
    }

    fn offsets(self) -> &'static [(i32, i32)] {
        const FOUR: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const EIGHT: [(i32, i32); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        match self {
            Adjacency::Four => &FOUR,
            Adjacency::Eight => &EIGHT,
        }
    }
}

/// A maximal same-class region of a label map.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub class: u8,
    pub mask: MaskRle,
    pub area: u64,
    pub bbox: BBox,
    /// Rounded mean pixel position, snapped onto the region if it falls outside.
    pub centroid: Point,
    /// First pixel in row-major order.
    pub anchor: Point,
}

/// Extracts connected components of non-void pixels.
///
/// Output is sorted by class, then area descending, then the row-major
/// position of the first pixel.
pub fn connected_components(map: &LabelMap, adjacency: Adjacency, class_filter: Option<&[u8]>) -> Vec<Component> {
    let (w, h) = (map.width() as usize, map.height() as usize);
    let data = map.data();
    let wanted = |c: u8| c != VOID && class_filter.is_none_or(|f| f.contains(&c));
    let mut label = vec![u32::MAX; w * h];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    let mut pixels: Vec<(u32, u32)> = Vec::new();

    for start in 0..w * h {
        let class = data[start];
        if label[start] != u32::MAX || !wanted(class) {
            continue;
        }
        let idx = comps.len() as u32;
        label[start] = idx;
        queue.push_back(start);
        pixels.clear();
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i32, (i / w) as i32);
            pixels.push((x as u32, y as u32));
            for &(dx, dy) in adjacency.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if label[j] == u32::MAX && data[j] == class {
                    label[j] = idx;
                    queue.push_back(j);
                }
            }
        }
        let anchor = Point::new((start % w) as u32, (start / w) as u32);
        comps.push(build_component(class, &pixels, anchor, map.dims(), |x, y| {
            label[y as usize * w + x as usize] == idx
        }));
    }

    comps.sort_by(|a, b| {
        a.class.cmp(&b.class).then(b.area.cmp(&a.area)).then((a.anchor.y, a.anchor.x).cmp(&(b.anchor.y, b.anchor.x)))
    });
    comps
}

fn build_component(
    class: u8,
    pixels: &[(u32, u32)],
    anchor: Point,
    (w, h): (u32, u32),
    inside: impl Fn(u32, u32) -> bool,
) -> Component {
    let mut bbox = BBox::new(anchor.x, anchor.y, anchor.x, anchor.y);
    let (mut sx, mut sy) = (0u64, 0u64);
    for &(x, y) in pixels {
        bbox.x0 = bbox.x0.min(x);
        bbox.x1 = bbox.x1.max(x);
        bbox.y0 = bbox.y0.min(y);
        bbox.y1 = bbox.y1.max(y);
        sx += x as u64;
        sy += y as u64;
    }
    let n = pixels.len() as f64;
    let mean = Point::new((sx as f64 / n).round() as u32, (sy as f64 / n).round() as u32);
    let centroid = if inside(mean.x, mean.y) { mean } else { nearest_pixel(pixels, mean) };
    Component {
        class,
        mask: MaskRle::from_pixels(w, h, pixels.iter().copied()),
        area: pixels.len() as u64,
        bbox,
        centroid,
        anchor,
    }
}

/// Region pixel closest to `target`; ties go to the first in row-major order.
fn nearest_pixel(pixels: &[(u32, u32)], target: Point) -> Point {
    let (x, y) = pixels
        .iter()
        .copied()
        .min_by_key(|&(x, y)| {
            let dx = x as i64 - target.x as i64;
            let dy = y as i64 - target.y as i64;
            (dx * dx + dy * dy, y, x)
        })
        .expect("component has at least one pixel");
    Point::new(x, y)
}

/// Scales a box's area by `area_factor` about its center, rounding outward
/// and clamping to a `width` x `height` image.
pub fn enlarge_box(b: &BBox, area_factor: f64, (width, height): (u32, u32)) -> BBox {
    debug_assert!(area_factor >= 1.0);
    let scale = area_factor.max(1.0).sqrt();
    let grow = |lo: u32, hi: u32, limit: u32| {
        let center = (lo as f64 + hi as f64) / 2.0;
        let half = (hi as f64 - lo as f64) / 2.0 * scale;
        let new_lo = (center - half).floor().max(0.0) as u32;
        let new_hi = ((center + half).ceil() as u32).min(limit - 1);
        (new_lo.min(lo), new_hi.max(hi))
    };
    let (x0, x1) = grow(b.x0, b.x1, width);
    let (y0, y1) = grow(b.y0, b.y1, height);
    BBox { x0, y0, x1, y1 }
}

/// Intersection over union of two encoded masks.
pub fn mask_iou(a: &MaskRle, b: &MaskRle) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::dims(a.dims(), b.dims()));
    }
    let (area_a, area_b) = (a.area(), b.area());
    if area_a == 0 && area_b == 0 {
        return Err(Error::BothEmpty);
    }
    let inter = run_intersection(a, b);
    Ok(inter as f64 / (area_a + area_b - inter) as f64)
}

/// Number of pixels set in both masks, computed on the runs directly.
pub(crate) fn run_intersection(a: &MaskRle, b: &MaskRle) -> u64 {
    let mut ra = a.one_runs().peekable();
    let mut rb = b.one_runs().peekable();
    let mut inter = 0;
    while let (Some(&(s1, e1)), Some(&(s2, e2))) = (ra.peek(), rb.peek()) {
        let lo = s1.max(s2);
        let hi = e1.min(e2);
        if hi > lo {
            inter += hi - lo;
        }
        if e1 <= e2 {
            ra.next();
        } else {
            rb.next();
        }
    }
    inter
}
