//! Connectivity-level noise detection and correction.
//!
//! A linear classifier over mask-pooled features is warmed up on the
//! aggregated connectivities and their (noisy) labels. Each connectivity's
//! cross-entropy under that classifier is modelled with a two-component
//! Gaussian mixture; the responsibility of the high-loss component is the
//! noise posterior `eta`, which drives the keep / correct / drop decision.

mod classifier;
mod features;
mod gmm;
mod select;

use rayon::prelude::*;

pub use classifier::{per_connectivity_loss, softmax, train_classifier, ClassifierHead, Standardizer};
pub use features::{
    extract_features, gray_level, handcrafted_features, pool_features, FeatureSource, HANDCRAFTED_DEPTH,
};
pub use gmm::{fit_gmm2, fit_gmm2_traced, noise_posterior, EmConfig, MIN_SAMPLES, VARIANCE_FLOOR};
pub use select::{classify, render_pseudo_label, select_and_correct};

use crate::error::Result;
use crate::io::{Connectivity, FeatureMap, GmmFit, RefinedSet, SccConfig};

/// Connectivities of one image with the features they are pooled from.
pub struct SccImage<'a> {
    pub connectivities: Vec<Connectivity>,
    pub features: &'a FeatureMap,
}

pub struct SccOutcome {
    /// One refined set per input image, in input order.
    pub refined: Vec<RefinedSet>,
    pub head: ClassifierHead,
    /// Mixture per loss group: one for the shard, or one per image with
    /// `per_image_gmm`. `None` where the group was too small to fit.
    pub fits: Vec<Option<GmmFit>>,
}

/// Runs correction over a shard of images with one shared classifier.
pub fn run_scc(images: Vec<SccImage<'_>>, num_classes: usize, cfg: &SccConfig) -> Result<SccOutcome> {
    cfg.validate()?;
    let pooled: Vec<Vec<Vec<f64>>> = images
        .par_iter()
        .map(|img| img.connectivities.iter().map(|c| pool_features(img.features, &c.mask)).collect())
        .collect::<Vec<Result<Vec<_>>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let items: Vec<(Vec<f64>, u8)> = images
        .iter()
        .zip(&pooled)
        .flat_map(|(img, vecs)| img.connectivities.iter().zip(vecs).map(|(c, v)| (v.clone(), c.label)))
        .collect();
    let head = train_classifier(&items, num_classes, cfg)?;

    let mut per_image: Vec<Vec<Connectivity>> = images
        .into_iter()
        .zip(&pooled)
        .map(|(img, vecs)| {
            img.connectivities
                .into_iter()
                .zip(vecs)
                .map(|(mut c, v)| {
                    c.loss = Some(head.loss(v, c.label));
                    c.probs = Some(head.probs(v));
                    c
                })
                .collect()
        })
        .collect();

    let em = EmConfig::from(cfg);
    let mut fits = Vec::new();
    if cfg.per_image_gmm {
        for conns in &mut per_image {
            fits.push(assign_eta(conns.iter_mut(), em)?);
        }
    } else {
        fits.push(assign_eta(per_image.iter_mut().flatten(), em)?);
    }

    let refined =
        per_image.into_iter().map(|conns| select_and_correct(conns, cfg.thresholds())).collect::<Result<_>>()?;
    Ok(SccOutcome { refined, head, fits })
}

fn assign_eta<'a>(conns: impl Iterator<Item = &'a mut Connectivity>, em: EmConfig) -> Result<Option<GmmFit>> {
    let mut group: Vec<&mut Connectivity> = conns.collect();
    if group.len() < MIN_SAMPLES {
        log::warn!("only {} connectivities; skipping noise modelling and keeping all", group.len());
        group.iter_mut().for_each(|c| c.eta = Some(0.0));
        return Ok(None);
    }
    let losses: Vec<f64> = group.iter().map(|c| c.loss.expect("loss assigned")).collect();
    let fit = fit_gmm2(&losses, em)?;
    for (c, l) in group.iter_mut().zip(&losses) {
        c.eta = Some(noise_posterior(&fit, *l));
    }
    Ok(Some(fit))
}
