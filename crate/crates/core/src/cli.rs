//! Command-line front end. Every numeric step is delegated to the library;
//! commands only parse flags, move files and print.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classify::{
    accuracy, export_features, knn_predict_all, read_features, softmax_predict_all, softmax_train, SoftmaxConfig,
};
use crate::data::{load_amat, load_idx, rotgen, write_amat, Dataset};
use crate::imageops::Image;
use crate::model_file::{load_model, save_model, ModelKind};
use crate::orientation::{dominant_from_histogram, gradient_histogram, AngleSet};
use crate::pipeline::{extract_features, train_model, TrainSettings};
use crate::rbm::{CdSampling, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "eri-rbm", version, about = "Rotation-invariant RBM training and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it to a model file.
    Train(TrainArgs),
    /// Extract hidden features for every sample into a CSV file.
    Features(FeaturesArgs),
    /// Score a classifier trained on one feature CSV against another.
    Eval(EvalArgs),
    /// Tile the filters of one weight matrix into an image.
    DumpFilters(DumpArgs),
    /// Print the orientation histogram of one sample.
    Orient(OrientArgs),
    /// Rotate every image by a random angle and write an amat file.
    Rotgen(RotgenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Rbm,
    Eri,
    Drbm,
    Orbm,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Rbm => ModelKind::Plain,
            ModelArg::Eri => ModelKind::Eri,
            ModelArg::Drbm => ModelKind::Drbm,
            ModelArg::Orbm => ModelKind::Orbm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// MNIST IDX pair; needs --labels.
    Idx,
    /// Whitespace-separated rows: V pixels in [0,1], then the label.
    Amat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    /// Visible units kept at their probabilities.
    Reconstruction,
    /// Visible units sampled every step.
    Gibbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Knn,
    Softmax,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Image file (IDX images or amat).
    #[arg(long = "data", alias = "train")]
    pub data: PathBuf,
    /// Label file for IDX input.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Amat)]
    pub format: Format,
    /// Amat rows store the raster column-major [default: row-major].
    #[arg(long)]
    pub transposed: bool,
    /// Skip this many samples from the start.
    #[arg(long, default_value_t = 0)]
    pub skip: usize,
    /// Keep at most this many samples after skipping [default: all].
    #[arg(long)]
    pub limit: Option<usize>,
}

impl DataArgs {
    pub fn load(&self) -> anyhow::Result<Dataset> {
        let d = match self.format {
            Format::Idx => {
                let Some(labels) = &self.labels else {
                    bail!("--format idx needs --labels");
                };
                load_idx(&self.data, labels)?
            }
            Format::Amat => load_amat(&self.data, self.transposed)?,
        };
        let start = self.skip.min(d.len());
        let end = self.limit.map_or(d.len(), |n| (start + n).min(d.len()));
        Ok(d.slice(start, end))
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Eri)]
    pub model: ModelArg,
    #[command(flatten)]
    pub data: DataArgs,
    /// Hidden units (reference setting).
    #[arg(long, default_value_t = 100)]
    pub hidden: usize,
    /// Orientation bins S (reference setting; ignored by --model rbm).
    #[arg(long, default_value_t = 18)]
    pub bins: usize,
    /// Training epochs (reference setting).
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Learning rate (reference setting).
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    /// Momentum (reference setting).
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    /// Minibatch size (implementation choice).
    #[arg(long, default_value_t = 100)]
    pub batch: usize,
    /// Gibbs steps per CD update (implementation choice).
    #[arg(long, default_value_t = 1)]
    pub cdk: usize,
    /// Binarization threshold, strict p > tau (reference setting).
    #[arg(long, default_value_t = 0.3)]
    pub tau: f64,
    /// Seed for initialization, shuffling and sampling (implementation choice).
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Std of the Gaussian weight initialization (implementation choice).
    #[arg(long, default_value_t = 0.01)]
    pub init_std: f64,
    /// Negative-phase visible units (implementation choice).
    #[arg(long, value_enum, default_value_t = SamplingArg::Reconstruction)]
    pub sampling: SamplingArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Binarization threshold, strict p > tau.
    #[arg(long, default_value_t = 0.3)]
    pub tau: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub train_csv: PathBuf,
    #[arg(long)]
    pub test_csv: PathBuf,
    #[arg(long, value_enum, default_value_t = ClassifierArg::Knn)]
    pub classifier: ClassifierArg,
    /// Neighbors for k-NN (reference setting).
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Softmax learning rate (implementation choice).
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Softmax epochs (implementation choice).
    #[arg(long, default_value_t = 100)]
    pub softmax_epochs: usize,
    /// Softmax L2 penalty (implementation choice).
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    /// Softmax shuffling seed (implementation choice).
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    /// Weight matrix to draw, 1-based.
    #[arg(long, default_value_t = 1)]
    pub matrix: usize,
    /// Output image; `.pgm` writes a binary graymap, anything else PNG.
    #[arg(long)]
    pub out: PathBuf,
    /// Cells per row.
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct OrientArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Sample index within the loaded (skipped/limited) set.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, default_value_t = 18)]
    pub bins: usize,
    /// Binarize with this threshold first, as training does [default: raw pixels].
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RotgenArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output amat file (row-major).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::Features(a) => cmd_features(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::DumpFilters(a) => cmd_dump_filters(&a, out),
        Command::Orient(a) => cmd_orient(&a, out),
        Command::Rotgen(a) => cmd_rotgen(&a, out),
    }
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let d = a.data.load()?;
    let settings = TrainSettings {
        kind: a.model.into(),
        hidden: a.hidden,
        bins: if a.model == ModelArg::Rbm { 1 } else { a.bins },
        tau: a.tau,
        config: TrainConfig {
            eta: a.eta,
            momentum: a.momentum,
            epochs: a.epochs,
            cd_k: a.cdk,
            batch_size: a.batch,
            seed: a.seed,
            weight_init_std: a.init_std,
            sampling: match a.sampling {
                SamplingArg::Reconstruction => CdSampling::Reconstruction,
                SamplingArg::Gibbs => CdSampling::Gibbs,
            },
            ..TrainConfig::default()
        },
    };
    let mut log_err = Ok(());
    let model = train_model(&d, &settings, |r| {
        if log_err.is_ok() {
            log_err = writeln!(out, "{r}").and_then(|_| out.flush());
        }
    })?;
    log_err?;
    save_model(&model, &a.out)?;
    Ok(())
}

pub fn cmd_features(a: &FeaturesArgs, _out: &mut dyn Write) -> anyhow::Result<()> {
    let model = load_model(&a.model_file)?;
    let d = a.data.load()?;
    let fs = extract_features(&model, &d, a.tau)
        .with_context(|| format!("{} does not fit {}", a.model_file.display(), a.data.data.display()))?;
    export_features(&fs, &a.out)?;
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let train = read_features(&a.train_csv)?;
    let test = read_features(&a.test_csv)?;
    if train.dim() != test.dim() {
        bail!("feature widths differ: train {} vs test {}", train.dim(), test.dim());
    }
    let pred = match a.classifier {
        ClassifierArg::Knn => knn_predict_all(&train, &test.vectors, a.k)?,
        ClassifierArg::Softmax => {
            let cfg = SoftmaxConfig {
                lr: a.lr,
                epochs: a.softmax_epochs,
                l2: a.l2,
                seed: a.seed,
                ..SoftmaxConfig::default()
            };
            softmax_predict_all(&softmax_train(&train, &cfg)?, &test.vectors)?
        }
    };
    writeln!(out, "accuracy={:.2}", accuracy(&pred, &test.labels)?)?;
    Ok(())
}

/// Tiles the rows of an `H × V` matrix as `w × h` cells, `cols` per row,
/// with one dark pixel between cells. Each cell is min-max scaled on its own;
/// a constant cell is drawn mid-gray.
pub fn filter_grid(weights: &ndarray::Array2<f64>, w: usize, h: usize, cols: usize) -> anyhow::Result<Image> {
    if cols == 0 {
        bail!("--grid must be at least 1");
    }
    let n = weights.nrows();
    let rows = n.div_ceil(cols).max(1);
    let width = cols * w + (cols - 1);
    let height = rows * h + (rows - 1);
    let mut img = Image::zeros(width, height);
    for (k, filter) in weights.rows().into_iter().enumerate() {
        let (lo, hi) = filter.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let (ox, oy) = ((k % cols) * (w + 1), (k / cols) * (h + 1));
        for y in 0..h {
            for x in 0..w {
                let v = filter[y * w + x];
                let g = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                img.set(ox + x, oy + y, g);
            }
        }
    }
    Ok(img)
}

fn write_gray(img: &Image, path: &Path) -> anyhow::Result<()> {
    let bytes: Vec<u8> = img.data().iter().map(|&g| (g * 255.0).round().clamp(0.0, 255.0) as u8).collect();
    let pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if pgm {
        let mut file = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
        file.extend_from_slice(&bytes);
        std::fs::write(path, file).with_context(|| format!("writing {}", path.display()))?;
    } else {
        image::GrayImage::from_raw(img.width() as u32, img.height() as u32, bytes)
            .context("filter grid buffer size")?
            .save_with_format(path, image::ImageFormat::Png)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn cmd_dump_filters(a: &DumpArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let model = load_model(&a.model_file)?;
    let (weights, _) = model.matrix(a.matrix)?;
    let (w, h) = model.raster();
    let grid = filter_grid(weights, w, h, a.grid)?;
    write_gray(&grid, &a.out)?;
    writeln!(out, "wrote {}x{} grid of {} filters to {}", grid.width(), grid.height(), weights.nrows(), a.out.display())?;
    Ok(())
}

pub fn cmd_orient(a: &OrientArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let d = a.data.load()?;
    let Some(img) = d.images().get(a.index) else {
        bail!("index {} outside a set of {} samples", a.index, d.len());
    };
    let img = match a.tau {
        Some(tau) => crate::data::binarize_image(img, tau),
        None => img.clone(),
    };
    let angles = AngleSet::new(a.bins)?;
    let hist = gradient_histogram(&img, &angles)?;
    let dom = dominant_from_histogram(&hist, &angles);
    writeln!(out, "s={} psi={} degenerate={}", dom.index, dom.psi, dom.degenerate)?;
    for (j, (w, phi)) in hist.weights.iter().zip(angles.angles()).enumerate() {
        writeln!(out, "bin={} angle={} weight={:.9e}", j + 1, phi, w)?;
    }
    writeln!(out, "total={:.9e}", hist.total())?;
    Ok(())
}

pub fn cmd_rotgen(a: &RotgenArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let d = a.data.load()?;
    let rotated = rotgen(&d, a.seed);
    write_amat(&rotated, &a.out, false)?;
    writeln!(out, "wrote {} rotated samples to {}", rotated.len(), a.out.display())?;
    Ok(())
}
