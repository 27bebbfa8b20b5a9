//! Orientation-indexed RBM: one weight matrix and hidden bias per angle bin,
//! a shared visible bias, and CD gradients that are shared between matrices
//! by rotating their update filters.
//!
//! Each training image is routed to the matrix of its dominant orientation
//! `φ_s`. After the per-bin CD statistics are computed, every matrix `t`
//! receives the update filters of every other bin `s` rotated by
//! `φ_t − φ_s`:
//!
//! ```text
//! ∇W(t) := ∇W(t) + Σ_{s≠t} R_{φt−φs}(∇W(s))
//! ```
//!
//! The sum reads from a snapshot of the unshared gradients, so the order in
//! which pairs are visited does not matter. Hidden and visible bias gradients
//! are never rotated.

use std::collections::HashMap;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::imageops::{Image, RotationPlan};
use crate::orientation::{dominant_index, AngleSet};
use crate::rbm::{cd_with, design_matrix, hidden_probs_with, init_weights, momentum_update, CdSampling, EpochReport, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct EriModel {
    /// `W(s)`, each `H × V`, indexed by `s − 1`.
    pub weights: Vec<Array2<f64>>,
    /// `b(s)`, indexed by `s − 1`.
    pub hidden_biases: Vec<Array1<f64>>,
    pub visible_bias: Array1<f64>,
    pub angles: AngleSet,
    pub width: usize,
    pub height: usize,
}

impl EriModel {
    pub fn zeros(hidden: usize, width: usize, height: usize, angles: AngleSet) -> Self {
        let s = angles.len();
        let v = width * height;
        Self {
            weights: vec![Array2::zeros((hidden, v)); s],
            hidden_biases: vec![Array1::zeros(hidden); s],
            visible_bias: Array1::zeros(v),
            angles,
            width,
            height,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.angles.len();
        let v = self.width * self.height;
        if self.weights.len() != s || self.hidden_biases.len() != s {
            return Err(Error::dim(format!(
                "{} weight matrices and {} hidden biases for {s} angles",
                self.weights.len(),
                self.hidden_biases.len()
            )));
        }
        let h = self.hidden();
        if self.visible_bias.len() != v
            || self.weights.iter().any(|w| w.dim() != (h, v))
            || self.hidden_biases.iter().any(|b| b.len() != h)
        {
            return Err(Error::dim("orientation matrices disagree in shape"));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.angles.len()
    }

    pub fn hidden(&self) -> usize {
        self.weights.first().map_or(0, |w| w.nrows())
    }

    pub fn visible(&self) -> usize {
        self.visible_bias.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationStats {
    /// Images with an all-zero orientation histogram (assigned `s = 1`).
    pub degenerate: usize,
    /// Images per bin, indexed by `s − 1`.
    pub per_bin: Vec<usize>,
}

/// Fills each sample's dominant orientation index.
pub fn annotate_orientations(d: &Dataset, angles: &AngleSet) -> Result<(Dataset, AnnotationStats)> {
    let found = d
        .images()
        .par_iter()
        .map(|img| dominant_index(img, angles))
        .collect::<Result<Vec<_>>>()?;
    let mut stats = AnnotationStats {
        degenerate: 0,
        per_bin: vec![0; angles.len()],
    };
    for o in &found {
        stats.per_bin[o.index - 1] += 1;
        stats.degenerate += o.degenerate as usize;
    }
    let annotated = d.clone().with_orientation(found.iter().map(|o| o.index).collect())?;
    Ok((annotated, stats))
}

/// Visible vectors grouped by orientation; `groups[s − 1]` holds rows for bin `s`.
#[derive(Debug, Clone)]
pub struct OrientedBatch {
    pub groups: Vec<Array2<f64>>,
}

impl OrientedBatch {
    /// Groups rows of `data` (in `rows` order) by their 1-based `index`.
    pub fn from_rows(data: &Array2<f64>, rows: &[usize], index: &[usize], bins: usize) -> Result<Self> {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); bins];
        for &r in rows {
            let s = index[r];
            if s == 0 || s > bins {
                return Err(Error::InvalidArgument(format!("orientation index {s} outside 1..={bins}")));
            }
            members[s - 1].push(r);
        }
        Ok(Self {
            groups: members.iter().map(|m| data.select(Axis(0), m)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.nrows()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-bin CD statistics plus the shared visible-bias gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedGradients {
    pub weights: Vec<Array2<f64>>,
    pub hidden_biases: Vec<Array1<f64>>,
    pub visible_bias: Array1<f64>,
    pub group_sizes: Vec<usize>,
    pub reconstruction_error: f64,
}

/// Runs CD on each nonempty group with `(W(s), b(s), c)`. Empty groups get
/// zero gradients; the visible-bias gradient is the size-weighted mean of the
/// per-group ones.
pub fn oriented_cd(
    m: &EriModel,
    batch: &OrientedBatch,
    k: usize,
    sampling: CdSampling,
    rng: &mut impl Rng,
) -> Result<OrientedGradients> {
    if batch.groups.len() != m.bins() {
        return Err(Error::dim(format!("{} groups for {} bins", batch.groups.len(), m.bins())));
    }
    let total = batch.len();
    if total == 0 {
        return Err(Error::EmptyBatch);
    }
    let (h, v) = (m.hidden(), m.visible());
    let mut out = OrientedGradients {
        weights: Vec::with_capacity(m.bins()),
        hidden_biases: Vec::with_capacity(m.bins()),
        visible_bias: Array1::zeros(v),
        group_sizes: batch.groups.iter().map(|g| g.nrows()).collect(),
        reconstruction_error: 0.0,
    };
    let mut visible: Option<Array1<f64>> = None;
    for (s, group) in batch.groups.iter().enumerate() {
        if group.nrows() == 0 {
            out.weights.push(Array2::zeros((h, v)));
            out.hidden_biases.push(Array1::zeros(h));
            continue;
        }
        let g = cd_with(&m.weights[s], &m.hidden_biases[s], &m.visible_bias, group.view(), k, sampling, rng)?;
        let share = g.batch_count as f64 / total as f64;
        let weighted = g.visible_bias * share;
        visible = Some(match visible {
            None => weighted,
            Some(acc) => acc + weighted,
        });
        out.reconstruction_error += g.reconstruction_error;
        out.weights.push(g.weights);
        out.hidden_biases.push(g.hidden_bias);
    }
    out.visible_bias = visible.expect("at least one nonempty group");
    Ok(out)
}

/// Rotation plans keyed by angle, reused across minibatches.
#[derive(Debug, Default)]
pub struct ShareKernel {
    width: usize,
    height: usize,
    plans: HashMap<u64, RotationPlan>,
}

impl ShareKernel {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            plans: HashMap::new(),
        }
    }

    fn key(theta: f64) -> u64 {
        theta.rem_euclid(360.0).to_bits()
    }

    fn ensure_plan(&mut self, theta: f64) {
        let turn = theta.rem_euclid(360.0);
        let (w, h) = (self.width, self.height);
        self.plans
            .entry(turn.to_bits())
            .or_insert_with(|| RotationPlan::new(w, h, turn));
    }

    /// Adds `scale · R_{φt−φs}(∇W(s))` into every `∇W(t)`, `s ≠ t`, reading
    /// the unshared gradients from `grads` and returning the shared ones.
    pub fn share(&mut self, grads: &[Array2<f64>], angles: &AngleSet, scale: f64) -> Result<Vec<Array2<f64>>> {
        let bins = angles.len();
        if grads.len() != bins {
            return Err(Error::dim(format!("{} gradient matrices for {bins} bins", grads.len())));
        }
        let v = self.width * self.height;
        let dim = grads.first().map(|g| g.dim()).unwrap_or((0, v));
        if dim.1 != v || grads.iter().any(|g| g.dim() != dim) {
            return Err(Error::dim("gradient matrices disagree with each other or the raster"));
        }
        let active: Vec<bool> = grads.iter().map(|g| g.iter().any(|&x| x != 0.0)).collect();
        for t in 1..=bins {
            for s in 1..=bins {
                self.ensure_plan(angles.angle(t) - angles.angle(s));
            }
        }
        let plans = &self.plans;
        let mut out = grads.to_vec();
        out.par_iter_mut().enumerate().for_each(|(t, target)| {
            let mut row = Array1::<f64>::zeros(v);
            for s in (0..bins).filter(|&s| s != t && active[s]) {
                let plan = &plans[&Self::key(angles.angle(t + 1) - angles.angle(s + 1))];
                for (src, mut dst) in grads[s].rows().into_iter().zip(target.rows_mut()) {
                    plan.apply_into(src, row.view_mut());
                    if scale == 1.0 {
                        dst += &row;
                    } else {
                        dst.scaled_add(scale, &row);
                    }
                }
            }
        });
        Ok(out)
    }
}

/// Shares update filters across all orientation bins; biases pass through.
pub fn share_gradients(
    grads: &OrientedGradients,
    angles: &AngleSet,
    width: usize,
    height: usize,
    scale: f64,
) -> Result<OrientedGradients> {
    let mut kernel = ShareKernel::new(width, height);
    Ok(OrientedGradients {
        weights: kernel.share(&grads.weights, angles, scale)?,
        ..grads.clone()
    })
}

struct EriVelocity {
    weights: Vec<Array2<f64>>,
    hidden_biases: Vec<Array1<f64>>,
    visible_bias: Array1<f64>,
}

/// Epoch-at-a-time trainer over an orientation-annotated dataset.
pub struct EriTrainer {
    model: EriModel,
    velocity: EriVelocity,
    cfg: TrainConfig,
    rng: ChaCha8Rng,
    data: Array2<f64>,
    index: Vec<usize>,
    order: Vec<usize>,
    kernel: ShareKernel,
    epoch: usize,
}

impl EriTrainer {
    pub fn new(d: &Dataset, hidden: usize, angles: &AngleSet, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if hidden == 0 {
            return Err(Error::InvalidArgument("hidden units must be positive".into()));
        }
        let index = d
            .orientation()
            .ok_or_else(|| Error::InvalidArgument("dataset has no orientation annotation".into()))?
            .to_vec();
        if let Some(&s) = index.iter().find(|&&s| s == 0 || s > angles.len()) {
            return Err(Error::InvalidArgument(format!(
                "orientation index {s} outside 1..={}",
                angles.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (width, height) = (d.width(), d.height());
        let v = width * height;
        let mut model = EriModel::zeros(hidden, width, height, angles.clone());
        for w in model.weights.iter_mut() {
            *w = init_weights(hidden, v, cfg.weight_init_std, &mut rng);
        }
        Self::with_model(model, d, index, cfg, rng)
    }

    /// Starts from an explicit model; the RNG is seeded from `cfg.seed`.
    pub fn from_model(model: EriModel, d: &Dataset, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        model.validate()?;
        let index = d
            .orientation()
            .ok_or_else(|| Error::InvalidArgument("dataset has no orientation annotation".into()))?
            .to_vec();
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Self::with_model(model, d, index, cfg, rng)
    }

    fn with_model(model: EriModel, d: &Dataset, index: Vec<usize>, cfg: &TrainConfig, rng: ChaCha8Rng) -> Result<Self> {
        if !d.is_empty() && (d.width(), d.height()) != (model.width, model.height) {
            return Err(Error::dim("dataset raster differs from model raster"));
        }
        let velocity = EriVelocity {
            weights: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            hidden_biases: model.hidden_biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            visible_bias: Array1::zeros(model.visible()),
        };
        let kernel = ShareKernel::new(model.width, model.height);
        Ok(Self {
            velocity,
            cfg: cfg.clone(),
            rng,
            data: design_matrix(d.images(), model.visible()),
            order: (0..index.len()).collect(),
            index,
            kernel,
            epoch: 0,
            model,
        })
    }

    pub fn model(&self) -> &EriModel {
        &self.model
    }

    pub fn into_model(self) -> EriModel {
        self.model
    }

    /// CD, sharing and a momentum update on the given rows.
    pub fn step(&mut self, rows: &[usize]) -> Result<f64> {
        let batch = OrientedBatch::from_rows(&self.data, rows, &self.index, self.model.bins())?;
        let g = oriented_cd(&self.model, &batch, self.cfg.cd_k, self.cfg.sampling, &mut self.rng)?;
        let shared = self.kernel.share(&g.weights, &self.model.angles, self.cfg.share_scale)?;
        let (eta, alpha) = (self.cfg.eta, self.cfg.momentum);
        let (model, velocity) = (&mut self.model, &mut self.velocity);
        for ((w, vw), dw) in model.weights.iter_mut().zip(&mut velocity.weights).zip(&shared) {
            momentum_update(w, vw, dw, eta, alpha);
        }
        for ((b, vb), db) in model.hidden_biases.iter_mut().zip(&mut velocity.hidden_biases).zip(&g.hidden_biases) {
            momentum_update(b, vb, db, eta, alpha);
        }
        momentum_update(
            &mut self.model.visible_bias,
            &mut self.velocity.visible_bias,
            &g.visible_bias,
            eta,
            alpha,
        );
        Ok(g.reconstruction_error)
    }

    pub fn run_epoch(&mut self) -> Result<EpochReport> {
        let start = Instant::now();
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        let mut error = 0.0;
        let result = order
            .chunks(self.cfg.batch_size)
            .try_for_each(|chunk| self.step(chunk).map(|e| error += e));
        self.order = order;
        result?;
        self.epoch += 1;
        Ok(EpochReport {
            epoch: self.epoch,
            reconstruction: error / self.order.len() as f64,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}

pub fn train_eri(d: &Dataset, hidden: usize, angles: &AngleSet, cfg: &TrainConfig) -> Result<EriModel> {
    train_eri_with(d, hidden, angles, cfg, |_| {})
}

pub fn train_eri_with(
    d: &Dataset,
    hidden: usize,
    angles: &AngleSet,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochReport),
) -> Result<EriModel> {
    let mut trainer = EriTrainer::new(d, hidden, angles, cfg)?;
    for _ in 0..cfg.epochs {
        let report = trainer.run_epoch()?;
        on_epoch(&report);
    }
    Ok(trainer.into_model())
}

/// Hidden probabilities under the matrix of the image's dominant orientation.
pub fn features_eri(m: &EriModel, img: &Image) -> Result<Array1<f64>> {
    if (img.width(), img.height()) != (m.width, m.height) {
        return Err(Error::dim(format!(
            "image {}x{} for a {}x{} model",
            img.width(),
            img.height(),
            m.width,
            m.height
        )));
    }
    let s = dominant_index(img, &m.angles)?.index;
    Ok(hidden_probs_with(&m.weights[s - 1], &m.hidden_biases[s - 1], ArrayView1::from(img.data())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageops::rotate_filter_rows;
    use crate::rbm::{cd_gradients, RbmModel};

    fn patterned(h: usize, v: usize, seed: f64) -> Array2<f64> {
        Array2::from_shape_fn((h, v), |(i, j)| ((i * 31 + j * 17) as f64 * seed).sin())
    }

    #[test]
    fn quarter_turn_sharing_from_one_bin() {
        let angles = AngleSet::new(4).unwrap();
        let (w, h) = (4, 4);
        let a = patterned(3, 16, 0.37);
        let z = Array2::zeros((3, 16));
        let grads = OrientedGradients {
            weights: vec![a.clone(), z.clone(), z.clone(), z],
            hidden_biases: vec![Array1::zeros(3); 4],
            visible_bias: Array1::zeros(16),
            group_sizes: vec![5, 0, 0, 0],
            reconstruction_error: 0.0,
        };
        let out = share_gradients(&grads, &angles, w, h, 1.0).unwrap();
        assert_eq!(out.weights[0], a);
        for t in 1..4 {
            assert_eq!(out.weights[t], rotate_filter_rows(&a, 90.0 * t as f64, w, h).unwrap());
        }
    }

    #[test]
    fn zero_gradients_stay_zero() {
        let angles = AngleSet::new(5).unwrap();
        let z = vec![Array2::<f64>::zeros((2, 12)); 5];
        let out = ShareKernel::new(4, 3).share(&z, &angles, 1.0).unwrap();
        assert_eq!(out, z);
    }

    #[test]
    fn two_bins_exchange_half_turns() {
        let angles = AngleSet::new(2).unwrap();
        let (w, h) = (5, 3);
        let a = patterned(2, 15, 0.11);
        let b = patterned(2, 15, 0.53);
        let out = ShareKernel::new(w, h).share(&[a.clone(), b.clone()], &angles, 1.0).unwrap();
        assert_eq!(out[0], &a + &rotate_filter_rows(&b, -180.0, w, h).unwrap());
        assert_eq!(out[1], &b + &rotate_filter_rows(&a, 180.0, w, h).unwrap());
    }

    #[test]
    fn sharing_ignores_visit_order() {
        // the snapshot result equals an explicit per-pair reference computed
        // in reverse order
        let angles = AngleSet::new(6).unwrap();
        let (w, h) = (6, 6);
        let grads: Vec<_> = (0..6).map(|s| patterned(2, 36, 0.1 + s as f64 * 0.07)).collect();
        let out = ShareKernel::new(w, h).share(&grads, &angles, 1.0).unwrap();
        for t in 0..6 {
            let mut expected = grads[t].clone();
            for s in (0..6).rev().filter(|&s| s != t) {
                let theta = angles.angle(t + 1) - angles.angle(s + 1);
                expected = expected + rotate_filter_rows(&grads[s], theta, w, h).unwrap();
            }
            for (x, y) in out[t].iter().zip(&expected) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn share_scale_multiplies_contributions() {
        let angles = AngleSet::new(4).unwrap();
        let a = patterned(2, 16, 0.3);
        let z = Array2::zeros((2, 16));
        let out = ShareKernel::new(4, 4)
            .share(&[a.clone(), z.clone(), z.clone(), z], &angles, 0.5)
            .unwrap();
        assert_eq!(out[2], rotate_filter_rows(&a, 180.0, 4, 4).unwrap() * 0.5);
    }

    #[test]
    fn biases_are_not_shared() {
        let angles = AngleSet::new(3).unwrap();
        let mut grads = OrientedGradients {
            weights: (0..3).map(|s| patterned(2, 9, 0.2 + s as f64)).collect(),
            hidden_biases: (0..3).map(|s| Array1::from_elem(2, s as f64)).collect(),
            visible_bias: Array1::from_elem(9, 0.25),
            group_sizes: vec![1, 1, 1],
            reconstruction_error: 0.0,
        };
        let before = share_gradients(&grads, &angles, 3, 3, 1.0).unwrap();
        grads.weights[1] *= 3.0;
        let after = share_gradients(&grads, &angles, 3, 3, 1.0).unwrap();
        assert_eq!(before.hidden_biases, after.hidden_biases);
        assert_eq!(after.hidden_biases, grads.hidden_biases);
        assert_eq!(after.visible_bias, grads.visible_bias);
    }

    fn eri_toy(bins: usize) -> EriModel {
        let angles = AngleSet::new(bins).unwrap();
        let mut m = EriModel::zeros(3, 3, 3, angles);
        for (s, w) in m.weights.iter_mut().enumerate() {
            *w = patterned(3, 9, 0.2 + 0.1 * s as f64) * 0.5;
        }
        m.visible_bias = Array1::from_shape_fn(9, |j| 0.1 * j as f64 - 0.4);
        m
    }

    #[test]
    fn single_group_matches_plain_cd() {
        let m = eri_toy(3);
        let data = Array2::from_shape_fn((6, 9), |(i, j)| ((i + 2 * j) % 3 == 0) as u8 as f64);
        let index = vec![2; 6];
        let batch = OrientedBatch::from_rows(&data, &[0, 1, 2, 3, 4, 5], &index, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = oriented_cd(&m, &batch, 1, CdSampling::Reconstruction, &mut rng).unwrap();
        let plain = RbmModel::from_parts(m.weights[1].clone(), m.hidden_biases[1].clone(), m.visible_bias.clone(), 3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = cd_gradients(&plain, data.view(), 1, CdSampling::Reconstruction, &mut rng).unwrap();
        assert_eq!(g.weights[1], p.weights);
        assert_eq!(g.hidden_biases[1], p.hidden_bias);
        assert_eq!(g.visible_bias, p.visible_bias);
        for s in [0, 2] {
            assert!(g.weights[s].iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn visible_gradient_is_size_weighted() {
        let m = eri_toy(2);
        let data = Array2::from_shape_fn((5, 9), |(i, j)| ((i * 3 + j) % 4 == 0) as u8 as f64);
        let index = vec![1, 2, 2, 1, 2];
        let rows = [0, 1, 2, 3, 4];
        let batch = OrientedBatch::from_rows(&data, &rows, &index, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = oriented_cd(&m, &batch, 1, CdSampling::Reconstruction, &mut rng).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut per_group = Vec::new();
        for s in 0..2 {
            let p = cd_with(&m.weights[s], &m.hidden_biases[s], &m.visible_bias, batch.groups[s].view(), 1, CdSampling::Reconstruction, &mut rng).unwrap();
            per_group.push(p.visible_bias);
        }
        let expected = &per_group[0] * (2.0 / 5.0) + &per_group[1] * (3.0 / 5.0);
        for (x, y) in g.visible_bias.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(g.group_sizes, vec![2, 3]);
    }

    #[test]
    fn bad_orientation_index_is_rejected() {
        let data = Array2::zeros((2, 9));
        assert!(OrientedBatch::from_rows(&data, &[0, 1], &[1, 4], 3).is_err());
    }

    #[test]
    fn features_use_dominant_matrix() {
        let m = EriModel::zeros(5, 8, 8, AngleSet::new(4).unwrap());
        let img = Image::from_fn(8, 8, |x, _| (x >= 4) as u8 as f64);
        let f = features_eri(&m, &img).unwrap();
        assert_eq!(f.len(), 5);
        assert!(f.iter().all(|&p| p == 0.5));
        assert!(features_eri(&m, &Image::zeros(4, 4)).is_err());
    }

    #[test]
    fn annotation_is_idempotent() {
        let images = (0..6)
            .map(|i| crate::synth::grating(16, 16, 60.0 * i as f64))
            .collect();
        let d = Dataset::new(images, vec![0; 6]).unwrap();
        let angles = AngleSet::new(6).unwrap();
        let (a, stats) = annotate_orientations(&d, &angles).unwrap();
        let (b, _) = annotate_orientations(&a, &angles).unwrap();
        assert_eq!(a.orientation(), b.orientation());
        assert!(a.orientation().unwrap().iter().all(|&s| (1..=6).contains(&s)));
        assert_eq!(stats.per_bin.iter().sum::<usize>(), 6);
        assert_eq!(stats.degenerate, 0);
    }
}
