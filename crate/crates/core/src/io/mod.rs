//! Domain types and file codecs shared by the pipeline stages.

mod feature_map;
mod geometry;
mod label_map;
mod mask_set;
mod records;
mod rle;
mod taxonomy;

use std::path::Path;

pub use feature_map::{load_feature_map, save_feature_map, FeatureMap, FEATURE_MAGIC};
pub use geometry::{BBox, Point};
pub use image::RgbImage;
pub use label_map::{load_label_map, save_label_map, LabelMap, VOID};
pub use mask_set::{MaskEntry, MaskSet, MaskSource};
#[allow(unused_imports)]
pub(crate) use records::{load_json, save_json};
pub use records::{
    Connectivity, ConnectivitySet, GaussianComponent, GmmFit, Partition, PartitionedConnectivity, Provenance,
    RefinedFile, RefinedSet, SccConfig, Thresholds,
};
pub use rle::{rle_decode, rle_encode, BitMask, MaskRle};
pub use taxonomy::{ClassInfo, ClassKind, Taxonomy, MAX_CLASSES};

use crate::error::{Error, Result};

pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::ImageNotFound(path.display().to_string()));
    }
    Ok(image::open(path)?.to_rgb8())
}

pub fn save_rgb(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    img.save_with_format(path.as_ref(), image::ImageFormat::Png)?;
    Ok(())
}
