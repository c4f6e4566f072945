use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use super::prompt::PromptPool;
use super::{ImageRef, SegmenterBackend};
use crate::error::{Error, Result};
use crate::io::{BBox, MaskRle, MaskSet, Point};

/// Reads `<dir>/<image id>.json` mask sets; prompts are answered from the
/// same pool.
pub struct FileBackend {
    dir: PathBuf,
    cache: Mutex<HashMap<String, Arc<Cached>>>,
}

struct Cached {
    set: MaskSet,
    pool: PromptPool,
}

impl FileBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn mask_path(&self, image: &ImageRef) -> PathBuf {
        self.dir.join(format!("{}.json", image.id))
    }

    fn load(&self, image: &ImageRef) -> Result<Arc<Cached>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&image.id) {
            return Ok(hit.clone());
        }
        if !self.dir.is_dir() {
            return Err(Error::BackendUnavailable(format!("{} is not a directory", self.dir.display())));
        }
        let path = self.mask_path(image);
        if !path.is_file() {
            return Err(Error::ImageNotFound(format!("no mask set at {}", path.display())));
        }
        let set = MaskSet::load(&path)?;
        if set.dims() != image.dims() {
            return Err(Error::dims(image.dims(), set.dims()));
        }
        let entry = Arc::new(Cached { pool: PromptPool::new(&set), set });
        self.cache.lock().unwrap().insert(image.id.clone(), entry.clone());
        Ok(entry)
    }
}

impl SegmenterBackend for FileBackend {
    fn supports_auto(&self) -> bool {
        true
    }

    fn supports_prompt(&self) -> bool {
        true
    }

    fn auto_masks(&self, image: &ImageRef) -> Result<MaskSet> {
        Ok(self.load(image)?.set.clone())
    }

    fn prompt_segment(&self, image: &ImageRef, bbox: BBox, point: Point) -> Result<MaskRle> {
        let cached = self.load(image)?;
        let id = cached.pool.resolve(&bbox, point)?;
        let rle = &cached.set.masks.iter().find(|m| m.id == id).expect("resolved id is in the pool").rle;
        if rle.area() == 0 {
            return Err(Error::EmptyResult);
        }
        Ok(rle.clone())
    }
}
