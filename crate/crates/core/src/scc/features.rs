use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{load_feature_map, FeatureMap, MaskRle, RgbImage};

/// Channels of the handcrafted extractor: x/W, y/H, R, G, B, gray, and the
/// standard deviation of gray over the clipped 3x3 neighbourhood.
pub const HANDCRAFTED_DEPTH: usize = 7;

/// Where per-pixel features come from.
#[derive(Debug, Clone, Copy)]
pub enum FeatureSource<'a> {
    Handcrafted(&'a RgbImage),
    Precomputed(&'a Path),
}

pub fn extract_features(source: FeatureSource<'_>) -> Result<FeatureMap> {
    match source {
        FeatureSource::Handcrafted(img) => Ok(handcrafted_features(img)),
        FeatureSource::Precomputed(path) => load_feature_map(path),
    }
}

pub fn gray_level(rgb: [u8; 3]) -> f64 {
    (0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64) / 255.0
}

pub fn handcrafted_features(img: &RgbImage) -> FeatureMap {
    let (w, h) = img.dimensions();
    let gray: Vec<f64> = img.pixels().map(|p| gray_level(p.0)).collect();
    let mut data = Vec::with_capacity(w as usize * h as usize * HANDCRAFTED_DEPTH);
    let mut window = Vec::with_capacity(9);
    for y in 0..h {
        for x in 0..w {
            let p = img.get_pixel(x, y).0;
            window.clear();
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    window.push(gray[(ny * w + nx) as usize]);
                }
            }
            let mean = window.iter().sum::<f64>() / window.len() as f64;
            let var = window.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / window.len() as f64;
            data.extend_from_slice(&[
                x as f32 / w as f32,
                y as f32 / h as f32,
                p[0] as f32 / 255.0,
                p[1] as f32 / 255.0,
                p[2] as f32 / 255.0,
                gray[(y * w + x) as usize] as f32,
                var.sqrt() as f32,
            ]);
        }
    }
    FeatureMap::new(w, h, HANDCRAFTED_DEPTH as u32, data).expect("handcrafted features are finite")
}

/// Mean feature vector over the pixels of `mask`.
pub fn pool_features(fm: &FeatureMap, mask: &MaskRle) -> Result<Vec<f64>> {
    if mask.dims() != fm.dims() {
        return Err(Error::DimMismatch { expected: fm.dims(), actual: mask.dims() });
    }
    let h = fm.height() as u64;
    let mut sum = vec![0.0f64; fm.depth()];
    let mut n = 0u64;
    for (start, end) in mask.one_runs() {
        for s in start..end {
            let v = fm.pixel((s / h) as u32, (s % h) as u32);
            for (acc, &f) in sum.iter_mut().zip(v) {
                *acc += f as f64;
            }
        }
        n += end - start;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sum.into_iter().map(|s| s / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::BitMask;
    use image::Rgb;
    use rand::{Rng, SeedableRng};

    #[test]
    fn uniform_image_has_zero_texture() {
        let img = RgbImage::from_pixel(6, 5, Rgb([100, 100, 100]));
        let fm = handcrafted_features(&img);
        assert_eq!(fm.depth(), 7);
        for y in 0..5 {
            for x in 0..6 {
                let v = fm.pixel(x, y);
                assert_eq!(&v[2..6], fm.pixel(0, 0)[2..6].as_ref());
                assert_eq!(v[6], 0.0);
            }
        }
        assert_eq!(&fm.pixel(0, 0)[..2], &[0.0, 0.0]);
        assert_eq!(&fm.pixel(3, 4)[..2], &[0.5, 0.8]);
    }

    #[test]
    fn local_std_matches_window_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let img = RgbImage::from_fn(9, 7, |_, _| Rgb([rng.random(), rng.random(), rng.random()]));
        let fm = handcrafted_features(&img);
        for y in 0..7i64 {
            for x in 0..9i64 {
                let mut vals = Vec::new();
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if (0..9).contains(&nx) && (0..7).contains(&ny) {
                            let p = img.get_pixel(nx as u32, ny as u32).0;
                            vals.push((0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64) / 255.0);
                        }
                    }
                }
                let m = vals.iter().sum::<f64>() / vals.len() as f64;
                let sd = (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64).sqrt();
                assert!((fm.pixel(x as u32, y as u32)[6] as f64 - sd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn pool_constant_and_single_pixel() {
        let fm = FeatureMap::new(4, 3, 2, vec![2.5; 24]).unwrap();
        let mut m = BitMask::new(4, 3);
        m.set(1, 1, true);
        m.set(3, 2, true);
        assert_eq!(pool_features(&fm, &m.encode()).unwrap(), vec![2.5, 2.5]);

        let fm = FeatureMap::new(4, 3, 2, (0..24).map(|i| i as f32).collect()).unwrap();
        let mut one = BitMask::new(4, 3);
        one.set(2, 1, true);
        assert_eq!(pool_features(&fm, &one.encode()).unwrap(), vec![12.0, 13.0]);
    }

    #[test]
    fn pool_errors() {
        let fm = FeatureMap::new(4, 3, 1, vec![0.0; 12]).unwrap();
        assert!(matches!(pool_features(&fm, &BitMask::new(4, 3).encode()), Err(Error::EmptyMask)));
        assert!(matches!(pool_features(&fm, &BitMask::new(3, 4).encode()), Err(Error::DimMismatch { .. })));
    }
}
