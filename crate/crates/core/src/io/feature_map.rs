//! Dense per-pixel features and the `SECOFM1` container.
//!
//! Layout: 8 magic bytes `SECOFM1\0`, little-endian `u32` height, width and
//! depth, then `height * width * depth` little-endian `f32` values ordered
//! pixel-major (row-major pixels, channels contiguous).

use std::path::Path;

use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 8] = b"SECOFM1\0";
const HEADER_LEN: usize = 8 + 12;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: u32,
    width: u32,
    depth: u32,
    data: Vec<f32>,
}

impl FeatureMap {
    pub fn new(width: u32, height: u32, depth: u32, data: Vec<f32>) -> Result<Self> {
        let expected = width as usize * height as usize * depth as usize;
        if data.len() != expected {
            return Err(Error::Invalid(format!(
                "feature map has {} values, expected {height}x{width}x{depth}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Self { height, width, depth, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Feature vector of pixel `(x, y)`.
    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> &[f32] {
        let d = self.depth as usize;
        let start = (y as usize * self.width as usize + x as usize) * d;
        &self.data[start..start + d]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * 4);
        out.extend_from_slice(FEATURE_MAGIC);
        for v in [self.height, self.width, self.depth] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < FEATURE_MAGIC.len() {
            return Err(Error::TruncatedFile { expected: HEADER_LEN as u64, actual: bytes.len() as u64 });
        }
        if &bytes[..8] != FEATURE_MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedFile { expected: HEADER_LEN as u64, actual: bytes.len() as u64 });
        }
        let word = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap());
        let (height, width, depth) = (word(0), word(1), word(2));
        let n = height as u64 * width as u64 * depth as u64;
        let expected = HEADER_LEN as u64 + 4 * n;
        let actual = bytes.len() as u64;
        if actual < expected {
            return Err(Error::TruncatedFile { expected, actual });
        }
        if actual > expected {
            return Err(Error::Format(format!("{} trailing bytes after feature payload", actual - expected)));
        }
        let data = bytes[HEADER_LEN..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        FeatureMap::new(width, height, depth, data)
    }
}

pub fn load_feature_map(path: impl AsRef<Path>) -> Result<FeatureMap> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
    FeatureMap::from_bytes(&bytes)
}

pub fn save_feature_map(fm: &FeatureMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, fm.to_bytes()).map_err(|e| Error::file(path, e))
}
