//! Bernoulli restricted Boltzmann machine trained by contrastive divergence
//! with momentum SGD.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::imageops::Image;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbmModel {
    /// `H × V`; row `k` is the filter of hidden unit `k`.
    pub weights: Array2<f64>,
    pub hidden_bias: Array1<f64>,
    pub visible_bias: Array1<f64>,
    pub width: usize,
    pub height: usize,
}

impl RbmModel {
    pub fn zeros(hidden: usize, width: usize, height: usize) -> Self {
        let v = width * height;
        Self {
            weights: Array2::zeros((hidden, v)),
            hidden_bias: Array1::zeros(hidden),
            visible_bias: Array1::zeros(v),
            width,
            height,
        }
    }

    pub fn from_parts(
        weights: Array2<f64>,
        hidden_bias: Array1<f64>,
        visible_bias: Array1<f64>,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let (h, v) = weights.dim();
        if v != width * height || hidden_bias.len() != h || visible_bias.len() != v {
            return Err(Error::dim(format!(
                "weights {h}x{v}, hidden bias {}, visible bias {}, raster {width}x{height}",
                hidden_bias.len(),
                visible_bias.len()
            )));
        }
        Ok(Self {
            weights,
            hidden_bias,
            visible_bias,
            width,
            height,
        })
    }

    pub fn hidden(&self) -> usize {
        self.weights.nrows()
    }

    pub fn visible(&self) -> usize {
        self.weights.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.hidden_bias).chain(&self.visible_bias).all(|v| v.is_finite())
    }
}

/// How the negative phase treats visible units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdSampling {
    /// Visible units stay at their probabilities at every step.
    #[default]
    Reconstruction,
    /// Visible units are sampled to binary states at every step, giving a
    /// true Gibbs chain; the final hidden term still uses probabilities.
    Gibbs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub cd_k: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub weight_init_std: f64,
    pub sampling: CdSampling,
    /// Multiplier on rotated gradients shared between orientation matrices.
    pub share_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: 1e-3,
            momentum: 0.9,
            epochs: 200,
            cd_k: 1,
            batch_size: 100,
            seed: 42,
            weight_init_std: 0.01,
            sampling: CdSampling::Reconstruction,
            share_scale: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return bad("eta must be non-negative");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.cd_k == 0 {
            return bad("cd_k must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.weight_init_std.is_finite() && self.weight_init_std >= 0.0) {
            return bad("weight_init_std must be non-negative");
        }
        if !self.share_scale.is_finite() {
            return bad("share_scale must be finite");
        }
        Ok(())
    }
}

/// Mean CD statistics over one batch; ascent direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CdGradients {
    pub weights: Array2<f64>,
    pub hidden_bias: Array1<f64>,
    pub visible_bias: Array1<f64>,
    pub batch_count: usize,
    /// Summed cross-entropy between the batch and its first reconstruction.
    pub reconstruction_error: f64,
}

impl CdGradients {
    pub fn zeros(hidden: usize, visible: usize) -> Self {
        Self {
            weights: Array2::zeros((hidden, visible)),
            hidden_bias: Array1::zeros(hidden),
            visible_bias: Array1::zeros(visible),
            batch_count: 0,
            reconstruction_error: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Velocity {
    pub weights: Array2<f64>,
    pub hidden_bias: Array1<f64>,
    pub visible_bias: Array1<f64>,
}

impl Velocity {
    pub fn zeros_like(m: &RbmModel) -> Self {
        Self {
            weights: Array2::zeros(m.weights.raw_dim()),
            hidden_bias: Array1::zeros(m.hidden()),
            visible_bias: Array1::zeros(m.visible()),
        }
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::dim(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// `E(v, h) = −hᵀWv − cᵀv − bᵀh`.
pub fn energy(m: &RbmModel, v: &[f64], h: &[f64]) -> Result<f64> {
    check_len("visible vector", v.len(), m.visible())?;
    check_len("hidden vector", h.len(), m.hidden())?;
    let v = ArrayView1::from(v);
    let h = ArrayView1::from(h);
    let interaction = h.dot(&m.weights.dot(&v));
    Ok(-interaction - m.visible_bias.dot(&v) - m.hidden_bias.dot(&h))
}

/// Partial derivatives of [`energy`] with respect to each parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGradient {
    /// `∂E/∂W_kj = −h_k·v_j`.
    pub weights: Array2<f64>,
    /// `∂E/∂b_k = −h_k`.
    pub hidden_bias: Array1<f64>,
    /// `∂E/∂c_j = −v_j`.
    pub visible_bias: Array1<f64>,
}

pub fn energy_gradient(m: &RbmModel, v: &[f64], h: &[f64]) -> Result<EnergyGradient> {
    check_len("visible vector", v.len(), m.visible())?;
    check_len("hidden vector", h.len(), m.hidden())?;
    Ok(EnergyGradient {
        weights: Array2::from_shape_fn((h.len(), v.len()), |(k, j)| -h[k] * v[j]),
        hidden_bias: h.iter().map(|x| -x).collect(),
        visible_bias: v.iter().map(|x| -x).collect(),
    })
}

/// `p(h_k = 1 | v) = σ(b_k + W_k·v)`.
pub fn hidden_probs(m: &RbmModel, v: &[f64]) -> Result<Array1<f64>> {
    check_len("visible vector", v.len(), m.visible())?;
    Ok(hidden_probs_with(&m.weights, &m.hidden_bias, ArrayView1::from(v)))
}

/// `p(v_j = 1 | h) = σ(c_j + hᵀW_{·j})`.
pub fn visible_probs(m: &RbmModel, h: &[f64]) -> Result<Array1<f64>> {
    check_len("hidden vector", h.len(), m.hidden())?;
    let mut out = ArrayView1::from(h).dot(&m.weights) + &m.visible_bias;
    out.mapv_inplace(sigmoid);
    Ok(out)
}

pub(crate) fn hidden_probs_with(weights: &Array2<f64>, bias: &Array1<f64>, v: ArrayView1<'_, f64>) -> Array1<f64> {
    let mut out = weights.dot(&v) + bias;
    out.mapv_inplace(sigmoid);
    out
}

fn sample_bernoulli(p: &Array2<f64>, rng: &mut impl Rng) -> Array2<f64> {
    p.mapv(|p| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
}

fn cross_entropy(v: ArrayView2<'_, f64>, pv: &Array2<f64>) -> f64 {
    const EPS: f64 = 1e-12;
    let mut total = 0.0;
    Zip::from(v).and(pv).for_each(|&x, &p| {
        let p = p.clamp(EPS, 1.0 - EPS);
        total -= x * p.ln() + (1.0 - x) * (1.0 - p).ln();
    });
    total
}

/// CD-k on a `B × V` batch against explicit parameters.
pub(crate) fn cd_with(
    weights: &Array2<f64>,
    hidden_bias: &Array1<f64>,
    visible_bias: &Array1<f64>,
    v0: ArrayView2<'_, f64>,
    k: usize,
    sampling: CdSampling,
    rng: &mut impl Rng,
) -> Result<CdGradients> {
    let n = v0.nrows();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("cd_k must be at least 1".into()));
    }
    check_len("batch row", v0.ncols(), weights.ncols())?;

    let hidden_probs = |v: &ArrayView2<'_, f64>| {
        let mut p = v.dot(&weights.t()) + hidden_bias;
        p.mapv_inplace(sigmoid);
        p
    };
    let ph0 = hidden_probs(&v0);
    let mut ph = ph0.clone();
    let mut v = Array2::zeros((0, 0));
    let mut reconstruction_error = 0.0;
    for step in 0..k {
        let h = sample_bernoulli(&ph, rng);
        let mut pv = h.dot(weights) + visible_bias;
        pv.mapv_inplace(sigmoid);
        if step == 0 {
            reconstruction_error = cross_entropy(v0, &pv);
        }
        v = match sampling {
            CdSampling::Reconstruction => pv,
            CdSampling::Gibbs => sample_bernoulli(&pv, rng),
        };
        ph = hidden_probs(&v.view());
    }

    let scale = 1.0 / n as f64;
    let positive = ph0.t().dot(&v0);
    let negative = ph.t().dot(&v);
    Ok(CdGradients {
        weights: (positive - negative) * scale,
        hidden_bias: (ph0.sum_axis(Axis(0)) - ph.sum_axis(Axis(0))) * scale,
        visible_bias: (v0.sum_axis(Axis(0)) - v.sum_axis(Axis(0))) * scale,
        batch_count: n,
        reconstruction_error,
    })
}

/// Batch rows are visible vectors.
pub fn cd_gradients(
    m: &RbmModel,
    batch: ArrayView2<'_, f64>,
    k: usize,
    sampling: CdSampling,
    rng: &mut impl Rng,
) -> Result<CdGradients> {
    cd_with(&m.weights, &m.hidden_bias, &m.visible_bias, batch, k, sampling, rng)
}

/// Deterministic positive-phase statistic `p(h|v)·vᵀ` for one sample.
pub fn positive_statistics(m: &RbmModel, v: &[f64]) -> Result<Array2<f64>> {
    let ph = hidden_probs(m, v)?;
    let v = ArrayView1::from(v);
    Ok(Array2::from_shape_fn((m.hidden(), m.visible()), |(k, j)| ph[k] * v[j]))
}

pub(crate) fn momentum_update<D: ndarray::Dimension>(
    param: &mut ndarray::Array<f64, D>,
    velocity: &mut ndarray::Array<f64, D>,
    grad: &ndarray::Array<f64, D>,
    eta: f64,
    momentum: f64,
) {
    Zip::from(param).and(velocity).and(grad).for_each(|p, v, &g| {
        *v = momentum * *v + eta * g;
        *p += *v;
    });
}

/// `velocity := α·velocity + η·gradient; parameter += velocity`.
pub fn sgd_step(m: &mut RbmModel, g: &CdGradients, velocity: &mut Velocity, cfg: &TrainConfig) -> Result<()> {
    if g.weights.dim() != m.weights.dim()
        || velocity.weights.dim() != m.weights.dim()
        || g.hidden_bias.len() != m.hidden()
        || g.visible_bias.len() != m.visible()
        || velocity.hidden_bias.len() != m.hidden()
        || velocity.visible_bias.len() != m.visible()
    {
        return Err(Error::dim("gradient or velocity shape differs from model"));
    }
    momentum_update(&mut m.weights, &mut velocity.weights, &g.weights, cfg.eta, cfg.momentum);
    momentum_update(&mut m.hidden_bias, &mut velocity.hidden_bias, &g.hidden_bias, cfg.eta, cfg.momentum);
    momentum_update(&mut m.visible_bias, &mut velocity.visible_bias, &g.visible_bias, cfg.eta, cfg.momentum);
    Ok(())
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochReport {
    /// 1-based.
    pub epoch: usize,
    /// Mean reconstruction cross-entropy per sample (NaN without data).
    pub reconstruction: f64,
    pub seconds: f64,
}

impl std::fmt::Display for EpochReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "epoch={} recon={:.6} secs={:.3}", self.epoch, self.reconstruction, self.seconds)
    }
}

/// Stacks flattened images into an `N × V` matrix.
pub fn design_matrix(images: &[Image], visible: usize) -> Array2<f64> {
    let mut out = Array2::zeros((images.len(), visible));
    for (mut row, img) in out.rows_mut().into_iter().zip(images) {
        row.assign(&ArrayView1::from(img.data()));
    }
    out
}

pub(crate) fn init_weights(hidden: usize, visible: usize, std: f64, rng: &mut impl Rng) -> Array2<f64> {
    let normal = Normal::new(0.0, std).expect("validated std");
    Array2::from_shape_simple_fn((hidden, visible), || normal.sample(rng))
}

/// Epoch-at-a-time trainer; the whole run draws from one seeded stream.
pub struct RbmTrainer {
    model: RbmModel,
    velocity: Velocity,
    cfg: TrainConfig,
    rng: ChaCha8Rng,
    data: Array2<f64>,
    order: Vec<usize>,
    epoch: usize,
}

impl RbmTrainer {
    pub fn new(d: &Dataset, hidden: usize, cfg: &TrainConfig) -> Result<Self> {
        Self::from_images(d.images(), d.width(), d.height(), hidden, cfg)
    }

    pub fn from_images(images: &[Image], width: usize, height: usize, hidden: usize, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if hidden == 0 || width == 0 || height == 0 {
            return Err(Error::InvalidArgument("hidden units and raster dims must be positive".into()));
        }
        if let Some(bad) = images.iter().find(|i| (i.width(), i.height()) != (width, height)) {
            return Err(Error::dim(format!(
                "image {}x{} in a {width}x{height} dataset",
                bad.width(),
                bad.height()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let visible = width * height;
        let weights = init_weights(hidden, visible, cfg.weight_init_std, &mut rng);
        let model = RbmModel::from_parts(weights, Array1::zeros(hidden), Array1::zeros(visible), width, height)?;
        let velocity = Velocity::zeros_like(&model);
        Ok(Self {
            model,
            velocity,
            cfg: cfg.clone(),
            rng,
            data: design_matrix(images, visible),
            order: (0..images.len()).collect(),
            epoch: 0,
        })
    }

    pub fn model(&self) -> &RbmModel {
        &self.model
    }

    pub fn into_model(self) -> RbmModel {
        self.model
    }

    pub fn run_epoch(&mut self) -> Result<EpochReport> {
        let start = Instant::now();
        self.order.shuffle(&mut self.rng);
        let mut error = 0.0;
        for chunk in self.order.chunks(self.cfg.batch_size) {
            let batch = self.data.select(Axis(0), chunk);
            let g = cd_gradients(&self.model, batch.view(), self.cfg.cd_k, self.cfg.sampling, &mut self.rng)?;
            error += g.reconstruction_error;
            sgd_step(&mut self.model, &g, &mut self.velocity, &self.cfg)?;
        }
        self.epoch += 1;
        Ok(EpochReport {
            epoch: self.epoch,
            reconstruction: error / self.order.len() as f64,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}

pub fn train(d: &Dataset, hidden: usize, cfg: &TrainConfig) -> Result<RbmModel> {
    train_with(d, hidden, cfg, |_| {})
}

pub fn train_with(
    d: &Dataset,
    hidden: usize,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochReport),
) -> Result<RbmModel> {
    let mut trainer = RbmTrainer::new(d, hidden, cfg)?;
    for _ in 0..cfg.epochs {
        let report = trainer.run_epoch()?;
        on_epoch(&report);
    }
    Ok(trainer.into_model())
}

/// Hidden probabilities of a flattened image.
pub fn features(m: &RbmModel, img: &Image) -> Result<Array1<f64>> {
    if (img.width(), img.height()) != (m.width, m.height) {
        return Err(Error::dim(format!(
            "image {}x{} for a {}x{} model",
            img.width(),
            img.height(),
            m.width,
            m.height
        )));
    }
    hidden_probs(m, img.data())
}
