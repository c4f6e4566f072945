use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use seco_core::augment::{build_resample_pool, copy_paste, PasteConfig};
use seco_core::backend::{open_backend, ImageRef};
use seco_core::eval::{connectivity_label_accuracy, evaluate, Metrics};
use seco_core::io::{
    load_feature_map, load_label_map, load_rgb, save_label_map, save_rgb, Connectivity, ConnectivitySet, FeatureMap,
    GmmFit, RefinedFile, RefinedSet, Taxonomy,
};
use seco_core::pipeline::{refine_shard, ShardItem};
use seco_core::psa::{run_psa, PsaOutput};
use seco_core::scc::{handcrafted_features, render_pseudo_label, run_scc, SccImage};
use seco_core::synth::{write_dataset, ManifestEntry, SynthConfig};

use crate::args::*;
use crate::config::{psa_config, scc_config, FileConfig};
use crate::plot;

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Psa(a) => psa(a),
        Command::Scc(a) => scc(a),
        Command::Refine(a) => refine(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
        Command::Augment(a) => augment(a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn image_ref(path: &Path, id: Option<&str>) -> Result<ImageRef> {
    if !path.is_file() {
        return Err(seco_core::Error::ImageNotFound(path.display().to_string()).into());
    }
    let dims = image::image_dimensions(path).map_err(seco_core::Error::from)?;
    let mut r = ImageRef::from_path(path, dims);
    if let Some(id) = id {
        r.id = id.to_string();
    }
    Ok(r)
}

fn write_psa(out: &Path, image: &ImageRef, psa: &PsaOutput) -> Result<()> {
    create_dir(out)?;
    let set = ConnectivitySet {
        image_id: image.id.clone(),
        image: Some(image.path.display().to_string()),
        width: image.width,
        height: image.height,
        connectivities: psa.connectivities.clone(),
    };
    set.save(out.join("connectivities.json"))?;
    save_label_map(&psa.label, out.join("psa.png"))?;
    Ok(())
}

fn psa(a: PsaArgs) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let cfg = psa_config(&file.psa, &a.psa)?;
    let backend = open_backend(&file.backend(a.backend.as_deref())?)?;
    let tax = Taxonomy::load(&a.taxonomy)?;
    let image = image_ref(&a.image, a.image_id.as_deref())?;
    let pseudo = load_label_map(&a.pseudo, Some(tax.num_classes()))?;
    let out = run_psa(&pseudo, &tax, backend.as_ref(), &image, &cfg)?;
    write_psa(&a.out, &image, &out)?;
    log::info!("{}: {} connectivities", image.id, out.connectivities.len());
    Ok(())
}

fn write_refined(out: &Path, id: &str, image: Option<String>, dims: (u32, u32), set: &RefinedSet) -> Result<()> {
    create_dir(out)?;
    RefinedFile::new(id.to_string(), image, dims, set).save(out.join("refined.json"))?;
    save_label_map(&render_pseudo_label(set, dims)?, out.join("refined.png"))?;
    Ok(())
}

fn write_histogram(out: &Path, losses: &[f64], fit: Option<&GmmFit>) -> Result<()> {
    create_dir(out)?;
    let h = plot::histogram(losses, fit);
    plot::write_csv(&h, &out.join("loss_hist.csv"))?;
    plot::write_png(&h, &out.join("loss_hist.png"))
}

fn losses_of<'a>(sets: impl IntoIterator<Item = &'a RefinedSet>) -> Vec<f64> {
    let mut all: Vec<(u32, f64)> = Vec::new();
    for s in sets {
        let mut v: Vec<&Connectivity> = s.clean.iter().chain(&s.corrected).chain(&s.dropped).collect();
        v.sort_by_key(|c| c.id);
        all.extend(v.into_iter().filter_map(|c| c.loss.map(|l| (c.id, l))));
    }
    all.into_iter().map(|(_, l)| l).collect()
}

fn scc(a: SccArgs) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let cfg = scc_config(&file.scc, &a.scc)?;
    let tax = Taxonomy::load(&a.taxonomy)?;
    let set = ConnectivitySet::load(&a.connectivities)?;
    set.validate(tax.num_classes())?;
    let features = match &a.features {
        FeatureArg::Handcrafted(p) => handcrafted_features(&load_rgb(p)?),
        FeatureArg::File(p) => load_feature_map(p)?,
    };
    check_feature_dims(&features, set.dims())?;
    let images = vec![SccImage { connectivities: set.connectivities.clone(), features: &features }];
    let outcome = run_scc(images, tax.num_classes(), &cfg)?;
    let refined = &outcome.refined[0];
    write_refined(&a.out, &set.image_id, set.image.clone(), set.dims(), refined)?;
    write_histogram(&a.out, &losses_of([refined]), outcome.fits[0].as_ref())?;
    log::info!(
        "{}: {} clean, {} corrected, {} dropped",
        set.image_id,
        refined.clean.len(),
        refined.corrected.len(),
        refined.dropped.len()
    );
    Ok(())
}

fn check_feature_dims(fm: &FeatureMap, dims: (u32, u32)) -> Result<()> {
    if fm.dims() != dims {
        return Err(seco_core::Error::DimMismatch { expected: dims, actual: fm.dims() }.into());
    }
    Ok(())
}

fn load_manifest(path: &Path) -> Result<(PathBuf, Vec<ManifestEntry>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text).map_err(seco_core::Error::from)?;
    if entries.is_empty() {
        return Err(seco_core::Error::EmptyInput.into());
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((base, entries))
}

fn refine(a: RefineArgs) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let psa_cfg = psa_config(&file.psa, &a.psa)?;
    let scc_cfg = scc_config(&file.scc, &a.scc)?;
    let backend = open_backend(&file.backend(a.backend.as_deref())?)?;
    let tax = Taxonomy::load(&a.taxonomy)?;
    let (base, entries) = load_manifest(&a.manifest)?;
    let workers = a.workers.or(file.workers).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;

    let (items, outs) = pool.install(|| -> Result<(Vec<ShardItem>, Vec<PathBuf>)> {
        let loaded: Vec<(ShardItem, PathBuf)> = entries
            .par_iter()
            .map(|e| -> Result<(ShardItem, PathBuf)> {
                let image = image_ref(&base.join(&e.image), e.id.as_deref())?;
                let pseudo = load_label_map(base.join(&e.pseudo), Some(tax.num_classes()))?;
                let features = match &e.features {
                    Some(p) => load_feature_map(base.join(p))?,
                    None => handcrafted_features(&load_rgb(&image.path)?),
                };
                check_feature_dims(&features, image.dims())?;
                Ok((ShardItem { image, pseudo, features }, base.join(&e.out)))
            })
            .collect::<Result<_>>()?;
        Ok(loaded.into_iter().unzip())
    })?;

    let result = pool.install(|| refine_shard(&items, &tax, backend.as_ref(), &psa_cfg, &scc_cfg))?;
    for ((item, out), (psa, refined)) in items.iter().zip(&outs).zip(result.psa.iter().zip(&result.scc.refined)) {
        write_psa(out, &item.image, psa)?;
        write_refined(out, &item.image.id, Some(item.image.path.display().to_string()), item.image.dims(), refined)?;
    }
    if let Some(report) = &a.report {
        if scc_cfg.per_image_gmm {
            log::warn!("per-image mixtures: the report shows losses without a fitted curve");
        }
        let fit = if scc_cfg.per_image_gmm { None } else { result.scc.fits[0].as_ref() };
        write_histogram(report, &losses_of(&result.scc.refined), fit)?;
    }
    let total: usize = result.scc.refined.iter().map(RefinedSet::len).sum();
    let kept: usize = result.scc.refined.iter().map(|s| s.clean.len() + s.corrected.len()).sum();
    log::info!("{} images, {kept} of {total} connectivities kept", items.len());
    Ok(())
}

fn print_metrics(m: &Metrics, tax: &Taxonomy) {
    println!("miou {:.4}", m.miou);
    println!("pixel_accuracy {:.4}", m.pixel_accuracy);
    println!("labeled_accuracy {:.4}", m.labeled_accuracy);
    println!("coverage {:.4}", m.coverage);
    if let Some(c) = m.connectivity_label_accuracy {
        println!("connectivity_label_accuracy {c:.4}");
    }
    for (i, iou) in m.per_class_iou.iter().enumerate() {
        let name = tax.name(i as u8).unwrap_or("?");
        match iou {
            Some(v) => println!("iou {name} {v:.4}"),
            None => println!("iou {name} -"),
        }
    }
}

fn eval(a: EvalArgs) -> Result<()> {
    let tax = Taxonomy::load(&a.taxonomy)?;
    let k = Some(tax.num_classes());
    let pred = load_label_map(&a.pred, k)?;
    let gt = load_label_map(&a.gt, k)?;
    let mut m = evaluate(&pred, &gt, &tax)?;
    if let Some(p) = &a.connectivities {
        let set = ConnectivitySet::load(p)?;
        m.connectivity_label_accuracy = connectivity_label_accuracy(&set.connectivities, &gt)?;
    } else if let Some(p) = &a.refined {
        let set = RefinedFile::load(p)?.to_refined_set();
        m.connectivity_label_accuracy = connectivity_label_accuracy(set.all(), &gt)?;
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&m)?);
    } else {
        print_metrics(&m, &tax);
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut cfg: SynthConfig = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| seco_core::Error::Config(format!("{}: {e}", p.display())))?
        }
        None => SynthConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.cases {
        cfg.cases = n;
    }
    let manifest = write_dataset(&cfg, &a.out)?;
    log::info!("wrote {} cases to {}", manifest.len(), a.out.display());
    Ok(())
}

fn find_refined(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            find_refined(&p, out)?;
        } else if e.file_name() == "refined.json" {
            out.push(p);
        }
    }
    Ok(())
}

fn augment(a: AugmentArgs) -> Result<()> {
    let tax = a.taxonomy.as_deref().map(Taxonomy::load).transpose()?;
    let mut paths = Vec::new();
    find_refined(&a.pool_from, &mut paths)?;
    let files: Vec<RefinedFile> = paths.iter().map(RefinedFile::load).collect::<seco_core::Result<_>>()?;
    let pool = build_resample_pool(&files, tax.as_ref())?;
    let dst_image = load_rgb(&a.dst_image)?;
    let dst_label = load_label_map(&a.dst_label, tax.as_ref().map(Taxonomy::num_classes))?;
    let cfg = PasteConfig { n_paste: a.n_paste, placement: a.placement.into() };

    // a relative source path resolves against the working directory, then
    // against the directory of the refined file naming it
    let origin = |id: &str| {
        files.iter().zip(&paths).find(|(f, _)| f.image_id == id).and_then(|(_, p)| p.parent().map(Path::to_path_buf))
    };
    let outcome = copy_paste(&pool, &dst_image, &dst_label, a.seed, &cfg, |item| {
        let raw = item
            .image
            .as_deref()
            .ok_or_else(|| seco_core::Error::ImageNotFound(format!("{} records no source image", item.image_id)))?;
        let mut p = PathBuf::from(raw);
        if !p.exists() {
            if let Some(dir) = origin(&item.image_id) {
                p = dir.join(raw);
            }
        }
        load_rgb(&p)
    })?;

    create_dir(&a.out)?;
    save_rgb(&outcome.image, a.out.join("image.png"))?;
    save_label_map(&outcome.label, a.out.join("label.png"))?;
    let mut json = serde_json::to_vec_pretty(&outcome.pastes)?;
    json.push(b'\n');
    std::fs::write(a.out.join("pastes.json"), json)?;
    log::info!("pasted {} connectivities from classes {:?}", outcome.pastes.len(), pool.minority_classes());
    Ok(())
}
