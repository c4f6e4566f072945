//! Binary masks and their column-major run-length encoding.
//!
//! Runs alternate zero/one starting with a zero-run, which may be empty when
//! the first pixel (top-left) is set. Scan order is column-major: pixel
//! `(x, y)` sits at scan index `y + height * x`.

use serde::{Deserialize, Serialize};

use super::geometry::{BBox, Point};
use crate::error::{Error, Result};

/// Row-major binary raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BitMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![false; width as usize * height as usize] }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(Error::Invalid(format!(
                "mask raster has {} pixels, expected {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, bits })
    }

    /// Mask of every pixel inside `b` (inclusive corners).
    pub fn from_box(width: u32, height: u32, b: &BBox) -> Self {
        let mut m = Self::new(width, height);
        for y in b.y0..=b.y1.min(height.saturating_sub(1)) {
            for x in b.x0..=b.x1.min(width.saturating_sub(1)) {
                m.set(x, y, true);
            }
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = v;
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x < self.width && p.y < self.height && self.get(p.x, p.y)
    }

    pub fn area(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels as `(x, y)` in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    /// Tight bounding box, `None` for an empty mask.
    pub fn bbox(&self) -> Option<BBox> {
        let mut it = self.ones();
        let (x, y) = it.next()?;
        let mut b = BBox { x0: x, y0: y, x1: x, y1: y };
        for (x, y) in it {
            b.x0 = b.x0.min(x);
            b.x1 = b.x1.max(x);
            b.y1 = b.y1.max(y);
        }
        Some(b)
    }

    pub fn intersection_count(&self, other: &BitMask) -> u64 {
        self.bits.iter().zip(&other.bits).filter(|(&a, &b)| a && b).count() as u64
    }

    pub fn union_with(&mut self, other: &BitMask) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn subtract(&mut self, other: &BitMask) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    pub fn encode(&self) -> MaskRle {
        rle_encode(self)
    }
}

/// Column-major run-length encoded binary mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaskRle {
    pub height: u32,
    pub width: u32,
    pub counts: Vec<u32>,
}

impl MaskRle {
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.width as u64 * self.height as u64;
        let actual: u64 = self.counts.iter().map(|&c| c as u64).sum();
        if actual != expected {
            return Err(Error::SumMismatch { expected, actual });
        }
        if let Some(pos) = self.counts.iter().skip(1).position(|&c| c == 0) {
            return Err(Error::ZeroRun(pos + 1));
        }
        Ok(())
    }

    /// Number of set pixels (sum of the odd-indexed runs).
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }

    pub fn decode(&self) -> Result<BitMask> {
        rle_decode(self)
    }

    /// Builds the encoding from set-pixel coordinates (any order, no duplicates).
    pub fn from_pixels(width: u32, height: u32, pixels: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let h = height as u64;
        let mut scan: Vec<u64> = pixels.into_iter().map(|(x, y)| x as u64 * h + y as u64).collect();
        scan.sort_unstable();
        let total = width as u64 * h;
        let mut counts = Vec::new();
        let mut pos = 0u64;
        let mut i = 0;
        while i < scan.len() {
            let start = scan[i];
            let mut end = start + 1;
            i += 1;
            while i < scan.len() && scan[i] == end {
                end += 1;
                i += 1;
            }
            counts.push((start - pos) as u32);
            counts.push((end - start) as u32);
            pos = end;
        }
        if pos < total || counts.is_empty() {
            counts.push((total - pos) as u32);
        }
        MaskRle { height, width, counts }
    }

    /// Half-open scan-index intervals of set pixels.
    pub fn one_runs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let mut pos = 0u64;
        self.counts.iter().enumerate().filter_map(move |(i, &c)| {
            let start = pos;
            pos += c as u64;
            (i % 2 == 1).then_some((start, pos))
        })
    }
}

pub fn rle_encode(mask: &BitMask) -> MaskRle {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for x in 0..w {
        for y in 0..h {
            let v = mask.bits[y * w + x];
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    MaskRle { height: mask.height, width: mask.width, counts }
}

pub fn rle_decode(rle: &MaskRle) -> Result<BitMask> {
    rle.validate()?;
    let (w, h) = (rle.width as usize, rle.height as usize);
    let mut bits = vec![false; w * h];
    let mut scan = 0usize;
    let mut value = false;
    for &c in &rle.counts {
        if value {
            for s in scan..scan + c as usize {
                let (x, y) = (s / h, s % h);
                bits[y * w + x] = true;
            }
        }
        scan += c as usize;
        value = !value;
    }
    Ok(BitMask { width: rle.width, height: rle.height, bits })
}
