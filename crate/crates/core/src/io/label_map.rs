use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, ImageReader};

use crate::error::{Error, Result};

/// Label value for unlabeled pixels.
pub const VOID: u8 = 255;

/// Row-major raster of class indices; [`VOID`] marks unlabeled pixels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid("label map dims must be positive".into()));
        }
        if data.len() != width as usize * height as usize {
            return Err(Error::Invalid(format!("label map has {} values, expected {}x{}", data.len(), width, height)));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self { width, height, data: vec![value; width as usize * height as usize] }
    }

    pub fn void(width: u32, height: u32) -> Self {
        Self::filled(width, height, VOID)
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

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = v;
    }

    /// Fraction of non-void pixels.
    pub fn coverage(&self) -> f64 {
        let labeled = self.data.iter().filter(|&&v| v != VOID).count();
        labeled as f64 / self.data.len() as f64
    }

    /// Checks every value is a class index below `num_classes` or void.
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        let w = self.width as usize;
        for (i, &v) in self.data.iter().enumerate() {
            if v != VOID && v as usize >= num_classes {
                return Err(Error::ClassOutOfRange {
                    value: v,
                    x: (i % w) as u32,
                    y: (i / w) as u32,
                    classes: num_classes,
                });
            }
        }
        Ok(())
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_raw(self.width, self.height, self.data.clone()).expect("label map buffer matches its dims")
    }
}

/// Reads an 8-bit single-channel PNG. With `num_classes`, every non-void
/// value must be a valid class index.
pub fn load_label_map(path: impl AsRef<Path>, num_classes: Option<usize>) -> Result<LabelMap> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::file(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::file(path, e))?;
    if reader.format() != Some(ImageFormat::Png) {
        return Err(Error::Format(format!("{}: not a PNG file", path.display())));
    }
    let img = reader.decode().map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let gray = match img {
        DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(Error::Format(format!(
                "{}: expected 8-bit grayscale PNG, found {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    let (w, h) = gray.dimensions();
    let map = LabelMap::new(w, h, gray.into_raw())?;
    if let Some(k) = num_classes {
        map.validate(k)?;
    }
    Ok(map)
}

pub fn save_label_map(map: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    map.to_gray_image().save_with_format(path.as_ref(), ImageFormat::Png)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let data = (0..40 * 30).map(|_| if rng.random_bool(0.1) { VOID } else { rng.random_range(0..19) }).collect();
        let map = LabelMap::new(40, 30, data).unwrap();
        save_label_map(&map, &path).unwrap();
        assert_eq!(load_label_map(&path, Some(19)).unwrap(), map);
    }

    #[test]
    fn value_254_is_out_of_range_for_19_classes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let mut map = LabelMap::filled(4, 4, 3);
        map.set(2, 1, 254);
        save_label_map(&map, &path).unwrap();
        let err = load_label_map(&path, Some(19)).unwrap_err();
        assert!(matches!(err, Error::ClassOutOfRange { value: 254, x: 2, y: 1, .. }));
        // without validation the raw value passes through
        assert_eq!(load_label_map(&path, None).unwrap().get(2, 1), 254);
    }

    #[test]
    fn rgb_png_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        image::RgbImage::new(3, 3).save(&path).unwrap();
        assert!(matches!(load_label_map(&path, None), Err(Error::Format(_))));
    }

    #[test]
    fn all_void_has_zero_coverage() {
        assert_eq!(LabelMap::void(5, 5).coverage(), 0.0);
    }

    #[test]
    fn saving_twice_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let map = LabelMap::new(3, 2, vec![0, 1, 2, VOID, 4, 5]).unwrap();
        let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
        save_label_map(&map, &a).unwrap();
        save_label_map(&map, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}
