//! Aggregation followed by correction over a shard of images.

use rayon::prelude::*;

use crate::backend::{ImageRef, SegmenterBackend};
use crate::error::Result;
use crate::io::{FeatureMap, LabelMap, SccConfig, Taxonomy};
use crate::psa::{run_psa, PsaConfig, PsaOutput};
use crate::scc::{run_scc, SccImage, SccOutcome};

pub struct ShardItem {
    pub image: ImageRef,
    pub pseudo: LabelMap,
    pub features: FeatureMap,
}

pub struct ShardResult {
    /// Aggregation output per item, in input order.
    pub psa: Vec<PsaOutput>,
    pub scc: SccOutcome,
}

/// Aggregates every item in parallel, then corrects the whole shard with one
/// classifier.
pub fn refine_shard(
    items: &[ShardItem],
    tax: &Taxonomy,
    backend: &dyn SegmenterBackend,
    psa_cfg: &PsaConfig,
    scc_cfg: &SccConfig,
) -> Result<ShardResult> {
    let psa: Vec<PsaOutput> =
        items.par_iter().map(|it| run_psa(&it.pseudo, tax, backend, &it.image, psa_cfg)).collect::<Result<_>>()?;
    let images = items
        .iter()
        .zip(&psa)
        .map(|(it, out)| SccImage { connectivities: out.connectivities.clone(), features: &it.features })
        .collect();
    let scc = run_scc(images, tax.num_classes(), scc_cfg)?;
    Ok(ShardResult { psa, scc })
}
