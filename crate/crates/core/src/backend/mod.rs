//! Promptable segmentation backends.
//!
//! A backend produces class-agnostic mask proposals for an image and answers
//! box + point prompts with a single mask. Two implementations exist:
//! [`FileBackend`] reads precomputed proposal sets and emulates prompting
//! with [`resolve_prompt`]; [`HttpBackend`] talks to a segmentation server.

mod file;
mod http;
mod prompt;

use std::path::{Path, PathBuf};

pub use file::FileBackend;
pub use http::{HttpBackend, HttpConfig, ImageTransport};
pub use prompt::{resolve_prompt, PromptPool, PromptScore};

use crate::error::{Error, Result};
use crate::io::{BBox, MaskRle, MaskSet, Point};

/// The image a query is about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRef {
    /// Stable identifier; the file backend keys mask files by it.
    pub id: String,
    pub path: PathBuf,
    pub width: u32,
    pub height: u32,
}

impl ImageRef {
    /// Reference named after the file stem of `path`.
    pub fn from_path(path: impl AsRef<Path>, (width, height): (u32, u32)) -> Self {
        let path = path.as_ref();
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self { id, path: path.to_path_buf(), width, height }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

pub trait SegmenterBackend: Send + Sync {
    fn supports_auto(&self) -> bool;

    fn supports_prompt(&self) -> bool;

    /// Automatic class-agnostic proposals for the whole image.
    fn auto_masks(&self, image: &ImageRef) -> Result<MaskSet>;

    /// Mask for a box prompt combined with a point prompt inside it.
    fn prompt_segment(&self, image: &ImageRef, bbox: BBox, point: Point) -> Result<MaskRle>;
}

/// Opens a backend from `file:DIR` or `http://HOST:PORT`.
pub fn open_backend(target: &str) -> Result<Box<dyn SegmenterBackend>> {
    if let Some(dir) = target.strip_prefix("file:") {
        Ok(Box::new(FileBackend::new(dir)))
    } else if target.starts_with("http://") || target.starts_with("https://") {
        Ok(Box::new(HttpBackend::new(target, HttpConfig::default())?))
    } else {
        Err(Error::Config(format!("unknown backend {target:?}; expected file:DIR or http://HOST:PORT")))
    }
}

pub(crate) fn check_mask_dims(image: &ImageRef, rle: &MaskRle) -> Result<()> {
    if rle.dims() != image.dims() {
        return Err(Error::dims(image.dims(), rle.dims()));
    }
    rle.validate()
}
