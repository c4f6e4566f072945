use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use seco_core::augment::Placement;

#[derive(Debug, Parser)]
#[command(name = "seco", version, about = "Refine speckled pseudo-labels into connectivity-level labels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate pseudo-label pixels into connectivities with a mask backend.
    Psa(PsaArgs),
    /// Detect and correct noisy connectivity labels.
    Scc(SccArgs),
    /// Aggregation and correction over every image of a manifest.
    Refine(RefineArgs),
    /// Score a label map against ground truth.
    Eval(EvalArgs),
    /// Generate synthetic benchmark cases.
    Synth(SynthArgs),
    /// Copy-paste minority-class connectivities onto an image.
    Augment(AugmentArgs),
}

#[derive(Debug, Args)]
pub struct PsaArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub pseudo: PathBuf,
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// `file:DIR` or `http://HOST:PORT`; falls back to the config file, then SECO_BACKEND.
    #[arg(long)]
    pub backend: Option<String>,
    /// Backend key for the image; defaults to the image file stem.
    #[arg(long)]
    pub image_id: Option<String>,
    #[command(flatten)]
    pub psa: PsaFlags,
    /// JSON settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PsaFlags {
    /// Area scale of a seed's box before prompting [default: 1.5].
    #[arg(long)]
    pub area_factor: Option<f64>,
    /// Pixel connectivity of seeds, 4 or 8 [default: 8].
    #[arg(long, value_parser = parse_adjacency)]
    pub adjacency: Option<u32>,
    /// Smallest things component that is prompted [default: 16].
    #[arg(long)]
    pub min_seed_area: Option<u64>,
    /// Smallest connectivity kept after merging [default: 16].
    #[arg(long)]
    pub min_area: Option<u64>,
    /// Overlap above which a prompted mask or a carved stuff region is dropped [default: 0.5].
    #[arg(long)]
    pub overlap_thresh: Option<f64>,
    /// Share of a proposal that must carry stuff labels to be aligned [default: 0.01].
    #[arg(long)]
    pub min_labeled_frac: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SccFlags {
    /// Noise posterior below which a connectivity is kept [default: 0.60].
    #[arg(long)]
    pub tau_ns: Option<f64>,
    /// Top class probability above which a noisy connectivity is relabeled [default: 0.95].
    #[arg(long)]
    pub tau_cr: Option<f64>,
    /// Classifier training steps [default: 5000].
    #[arg(long)]
    pub warmup_iters: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Shuffling seed for classifier training [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fit one loss mixture per image instead of one per shard.
    #[arg(long)]
    pub per_image_gmm: bool,
}

#[derive(Debug, Clone)]
pub enum FeatureArg {
    Handcrafted(PathBuf),
    File(PathBuf),
}

fn parse_features(s: &str) -> Result<FeatureArg, String> {
    if let Some(p) = s.strip_prefix("handcrafted:") {
        Ok(FeatureArg::Handcrafted(p.into()))
    } else if let Some(p) = s.strip_prefix("file:") {
        Ok(FeatureArg::File(p.into()))
    } else {
        Err("expected handcrafted:IMAGE or file:PATH".into())
    }
}

fn parse_adjacency(s: &str) -> Result<u32, String> {
    match s {
        "4" => Ok(4),
        "8" => Ok(8),
        _ => Err("adjacency must be 4 or 8".into()),
    }
}

#[derive(Debug, Args)]
pub struct SccArgs {
    #[arg(long)]
    pub connectivities: PathBuf,
    /// `handcrafted:IMAGE` to compute features, or `file:PATH` for a SECOFM1 file.
    #[arg(long, value_parser = parse_features)]
    pub features: FeatureArg,
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[command(flatten)]
    pub scc: SccFlags,
    /// JSON settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    /// JSON list of {image, pseudo, out[, id][, features]}; relative paths
    /// resolve against the manifest's directory.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// `file:DIR` or `http://HOST:PORT`; falls back to the config file, then SECO_BACKEND.
    #[arg(long)]
    pub backend: Option<String>,
    /// Parallel aggregation workers; defaults to the CPU count.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory for the shard-wide loss histogram.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub psa: PsaFlags,
    #[command(flatten)]
    pub scc: SccFlags,
    /// JSON settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Also score a connectivity set's labels against the ground truth.
    #[arg(long)]
    pub connectivities: Option<PathBuf>,
    /// Also score the kept and corrected connectivities of a refined set.
    #[arg(long)]
    pub refined: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator settings as JSON; omitted fields take defaults.
    /// JSON settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Directory searched recursively for refined.json files.
    #[arg(long)]
    pub pool_from: PathBuf,
    #[arg(long)]
    pub dst_image: PathBuf,
    #[arg(long)]
    pub dst_label: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub n_paste: usize,
    #[arg(long, value_enum, default_value_t = PlacementArg::Original)]
    pub placement: PlacementArg,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum PlacementArg {
    Original,
    UniformRandom,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Original => Placement::Original,
            PlacementArg::UniformRandom => Placement::UniformRandom,
        }
    }
}
