//! Loss histogram with the fitted mixture, as CSV and as a bitmap.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use image::{Rgb, RgbImage};
use seco_core::io::{GaussianComponent, GmmFit};

pub const BINS: usize = 40;

pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<u64>,
    /// Expected count per bin under each mixture component, if a fit exists.
    pub expected: Option<Vec<(f64, f64)>>,
}

fn weighted_pdf(c: &GaussianComponent, x: f64) -> f64 {
    c.weight * (-(x - c.mean).powi(2) / (2.0 * c.variance)).exp() / (2.0 * PI * c.variance).sqrt()
}

pub fn histogram(losses: &[f64], fit: Option<&GmmFit>) -> Histogram {
    let hi = losses.iter().copied().fold(0.0f64, f64::max);
    let width = if hi > 0.0 { hi / BINS as f64 } else { 1.0 / BINS as f64 };
    let mut counts = vec![0u64; BINS];
    for &l in losses {
        let b = ((l / width) as usize).min(BINS - 1);
        counts[b] += 1;
    }
    let n = losses.len() as f64;
    let expected = fit.map(|f| {
        (0..BINS)
            .map(|b| {
                let x = (b as f64 + 0.5) * width;
                (n * width * weighted_pdf(&f.low, x), n * width * weighted_pdf(&f.high, x))
            })
            .collect()
    });
    Histogram { lo: 0.0, width, counts, expected }
}

pub fn write_csv(h: &Histogram, path: &Path) -> Result<()> {
    let mut out = String::from("bin_start,bin_end,count,expected_low,expected_high\n");
    for (b, c) in h.counts.iter().enumerate() {
        let start = h.lo + b as f64 * h.width;
        let (el, eh) = match &h.expected {
            Some(e) => (format!("{:.6}", e[b].0), format!("{:.6}", e[b].1)),
            None => (String::new(), String::new()),
        };
        writeln!(out, "{start:.6},{:.6},{c},{el},{eh}", start + h.width).unwrap();
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

const W: u32 = 640;
const H: u32 = 360;
const MARGIN: u32 = 30;

/// Gray bars for the counts; blue and red curves for the low- and
/// high-loss components.
pub fn write_png(h: &Histogram, path: &Path) -> Result<()> {
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let plot_w = (W - 2 * MARGIN) as f64;
    let plot_h = (H - 2 * MARGIN) as f64;
    let mut top = h.counts.iter().copied().max().unwrap_or(0) as f64;
    if let Some(e) = &h.expected {
        top = e.iter().fold(top, |m, (a, b)| m.max(*a).max(*b));
    }
    let top = top.max(1.0);
    let bar_w = plot_w / BINS as f64;
    let to_y = |v: f64| (H - MARGIN) as f64 - v / top * plot_h;

    for (b, &c) in h.counts.iter().enumerate() {
        let x0 = MARGIN as f64 + b as f64 * bar_w;
        let y0 = to_y(c as f64).round() as u32;
        for x in (x0.round() as u32 + 1)..(x0 + bar_w).round() as u32 {
            for y in y0..H - MARGIN {
                img.put_pixel(x, y, Rgb([170, 170, 170]));
            }
        }
    }
    if let Some(e) = &h.expected {
        let pts = |pick: fn(&(f64, f64)) -> f64| -> Vec<(f64, f64)> {
            e.iter().enumerate().map(|(b, v)| (MARGIN as f64 + (b as f64 + 0.5) * bar_w, to_y(pick(v)))).collect()
        };
        polyline(&mut img, &pts(|v| v.0), Rgb([30, 80, 200]));
        polyline(&mut img, &pts(|v| v.1), Rgb([210, 40, 40]));
    }
    for x in MARGIN..W - MARGIN {
        img.put_pixel(x, H - MARGIN, Rgb([0, 0, 0]));
    }
    for y in MARGIN..=H - MARGIN {
        img.put_pixel(MARGIN, y, Rgb([0, 0, 0]));
    }
    img.save_with_format(path, image::ImageFormat::Png).with_context(|| format!("writing {}", path.display()))
}

fn polyline(img: &mut RgbImage, pts: &[(f64, f64)], color: Rgb<u8>) {
    for seg in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (seg[0], seg[1]);
        let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let (x, y) = (x0 + (x1 - x0) * t, y0 + (y1 - y0) * t);
            for (dx, dy) in [(0, 0), (0, 1), (1, 0)] {
                let (px, py) = (x.round() as i64 + dx, y.round() as i64 + dy);
                if px >= 0 && py >= 0 && (px as u32) < img.width() && (py as u32) < img.height() {
                    img.put_pixel(px as u32, py as u32, color);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_sum_to_sample_size() {
        let losses: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let h = histogram(&losses, None);
        assert_eq!(h.counts.iter().sum::<u64>(), 100);
        assert!(h.counts[BINS - 1] > 0);
        let h = histogram(&[0.0; 5], None);
        assert_eq!(h.counts[0], 5);
    }
}
