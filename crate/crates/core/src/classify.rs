//! Classifiers on extracted features: softmax regression and brute-force
//! K-nearest-neighbors, plus the CSV feature format used to hand features to
//! external tools.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const NUM_CLASSES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    /// `N × H`, one row per sample.
    pub vectors: Array2<f64>,
    pub labels: Vec<u8>,
}

impl FeatureSet {
    pub fn new(vectors: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        if vectors.nrows() != labels.len() {
            return Err(Error::dim(format!(
                "{} feature rows but {} labels",
                vectors.nrows(),
                labels.len()
            )));
        }
        Ok(Self { vectors, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    /// `C × H`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl SoftmaxModel {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self {
            weights: Array2::zeros((classes, dim)),
            bias: Array1::zeros(classes),
        }
    }

    pub fn classes(&self) -> usize {
        self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for SoftmaxConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            epochs: 100,
            batch: 100,
            l2: 1e-4,
            seed: 42,
        }
    }
}

fn softmax_rows(scores: &mut Array2<f64>) {
    for mut row in scores.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|s| (s - max).exp());
        let z = row.sum();
        row /= z;
    }
}

/// Class probabilities for each row of `x`.
pub fn softmax_probabilities(m: &SoftmaxModel, x: &Array2<f64>) -> Array2<f64> {
    let mut scores = x.dot(&m.weights.t()) + &m.bias;
    softmax_rows(&mut scores);
    scores
}

/// Mean cross-entropy plus `l2/2·‖W‖²`, and its gradient `(dW, db)`.
pub fn softmax_loss_and_grad(m: &SoftmaxModel, x: &Array2<f64>, labels: &[u8], l2: f64) -> (f64, Array2<f64>, Array1<f64>) {
    let n = x.nrows() as f64;
    let mut p = softmax_probabilities(m, x);
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        loss -= p[[i, y as usize]].max(f64::MIN_POSITIVE).ln();
        p[[i, y as usize]] -= 1.0;
    }
    loss /= n;
    loss += 0.5 * l2 * m.weights.iter().map(|w| w * w).sum::<f64>();
    let dw = p.t().dot(x) / n + &m.weights * l2;
    let db = p.sum_axis(Axis(0)) / n;
    (loss, dw, db)
}

/// Minibatch gradient descent on regularized cross-entropy from a zero start.
pub fn softmax_train(train: &FeatureSet, cfg: &SoftmaxConfig) -> Result<SoftmaxModel> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("softmax training set is empty".into()));
    }
    if cfg.batch == 0 {
        return Err(Error::InvalidArgument("softmax batch must be at least 1".into()));
    }
    let classes = (train.labels.iter().copied().max().unwrap_or(0) as usize + 1).max(NUM_CLASSES);
    let mut m = SoftmaxModel::zeros(classes, train.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch) {
            let x = train.vectors.select(Axis(0), chunk);
            let y: Vec<u8> = chunk.iter().map(|&i| train.labels[i]).collect();
            let (_, dw, db) = softmax_loss_and_grad(&m, &x, &y, cfg.l2);
            m.weights.scaled_add(-cfg.lr, &dw);
            m.bias.scaled_add(-cfg.lr, &db);
        }
    }
    Ok(m)
}

/// Highest-scoring class; lowest class id on exact ties.
pub fn softmax_predict(m: &SoftmaxModel, x: ArrayView1<'_, f64>) -> Result<u8> {
    if x.len() != m.weights.ncols() {
        return Err(Error::dim(format!(
            "feature length {} for a model of width {}",
            x.len(),
            m.weights.ncols()
        )));
    }
    let scores = m.weights.dot(&x) + &m.bias;
    Ok(argmax_lowest(scores.iter().copied()) as u8)
}

fn argmax_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority label among the `k` nearest training rows (Euclidean). Distance
/// ties go to the lower training index, vote ties to the smaller class id.
pub fn knn_predict(train: &FeatureSet, x: ArrayView1<'_, f64>, k: usize) -> Result<u8> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("k-NN training set is empty".into()));
    }
    if k == 0 || k > train.len() {
        return Err(Error::InvalidArgument(format!("k = {k} with {} training samples", train.len())));
    }
    if x.len() != train.dim() {
        return Err(Error::dim(format!("query length {} for features of width {}", x.len(), train.dim())));
    }
    // sorted by (distance, index), at most k entries
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, row) in train.vectors.rows().into_iter().enumerate() {
        let d = squared_distance(row, x);
        if best.len() == k && d >= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|&(bd, _)| bd <= d);
        best.insert(pos, (d, i));
        best.truncate(k);
    }
    let mut votes = [0usize; 256];
    for &(_, i) in &best {
        votes[train.labels[i] as usize] += 1;
    }
    let top = *votes.iter().max().unwrap();
    Ok(votes.iter().position(|&v| v == top).unwrap() as u8)
}

pub fn knn_predict_all(train: &FeatureSet, queries: &Array2<f64>, k: usize) -> Result<Vec<u8>> {
    (0..queries.nrows())
        .into_par_iter()
        .map(|i| knn_predict(train, queries.row(i), k))
        .collect()
}

pub fn softmax_predict_all(m: &SoftmaxModel, queries: &Array2<f64>) -> Result<Vec<u8>> {
    queries.rows().into_iter().map(|q| softmax_predict(m, q)).collect()
}

/// Percentage of matching entries.
pub fn accuracy(pred: &[u8], truth: &[u8]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::dim(format!("{} predictions for {} labels", pred.len(), truth.len())));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty set".into()));
    }
    let correct = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(100.0 * correct as f64 / pred.len() as f64)
}

/// `label,f0,...,f{H-1}` header, then one row per sample with 9 significant digits.
pub fn export_features(fs: &FeatureSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["label".to_string()];
    header.extend((0..fs.dim()).map(|i| format!("f{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for (row, &label) in fs.vectors.rows().into_iter().zip(&fs.labels) {
        let mut rec = vec![label.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.8e}")));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureSet> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("label") {
        return Err(Error::InvalidArgument(format!("{}: missing label column", path.display())));
    }
    let dim = headers.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != dim + 1 {
            return Err(Error::FieldCount {
                path: path.to_path_buf(),
                row: row + 1,
                expected: dim + 1,
                found: rec.len(),
            });
        }
        let bad = |tok: &str| Error::BadToken {
            path: path.to_path_buf(),
            row: row + 1,
            token: tok.to_string(),
        };
        let label: u8 = rec[0].parse().map_err(|_| bad(&rec[0]))?;
        labels.push(label);
        for tok in rec.iter().skip(1) {
            values.push(tok.parse::<f64>().map_err(|_| bad(tok))?);
        }
    }
    let vectors = Array2::from_shape_vec((labels.len(), dim), values).map_err(|e| Error::dim(e.to_string()))?;
    FeatureSet::new(vectors, labels)
}
