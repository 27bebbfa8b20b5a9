//! Grayscale dataset in, trained model or feature set out. The CLI and the C
//! API both go through these two functions.

use ndarray::Array2;
use rayon::prelude::*;

use crate::baselines::{features_drbm, features_orbm, train_drbm_with, train_orbm_with};
use crate::classify::FeatureSet;
use crate::data::{binarize, binarize_image, Dataset};
use crate::eri::{annotate_orientations, features_eri, train_eri_with};
use crate::error::{Error, Result};
use crate::model_file::{Model, ModelKind};
use crate::orientation::AngleSet;
use crate::rbm::{self, EpochReport, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub kind: ModelKind,
    pub hidden: usize,
    /// Ignored for plain RBMs.
    pub bins: usize,
    pub tau: f64,
    pub config: TrainConfig,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            kind: ModelKind::Eri,
            hidden: 100,
            bins: 18,
            tau: crate::data::DEFAULT_TAU,
            config: TrainConfig::default(),
        }
    }
}

pub fn train_model(d: &Dataset, s: &TrainSettings, on_epoch: impl FnMut(&EpochReport)) -> Result<Model> {
    if !(0.0..1.0).contains(&s.tau) {
        return Err(Error::InvalidArgument(format!("tau = {} outside [0, 1)", s.tau)));
    }
    if d.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let angles = AngleSet::new(s.bins)?;
    Ok(match s.kind {
        ModelKind::Plain => Model::Plain(rbm::train_with(&binarize(d, s.tau), s.hidden, &s.config, on_epoch)?),
        ModelKind::Eri => {
            let (annotated, _) = annotate_orientations(&binarize(d, s.tau), &angles)?;
            Model::Eri(train_eri_with(&annotated, s.hidden, &angles, &s.config, on_epoch)?)
        }
        ModelKind::Drbm => {
            let (annotated, _) = annotate_orientations(&binarize(d, s.tau), &angles)?;
            Model::Drbm(train_drbm_with(&annotated, s.hidden, &angles, &s.config, on_epoch)?)
        }
        ModelKind::Orbm => Model::Orbm(train_orbm_with(d, s.hidden, &angles, s.tau, &s.config, on_epoch)?),
    })
}

/// Features of every sample of a grayscale dataset, in dataset order.
pub fn extract_features(m: &Model, d: &Dataset, tau: f64) -> Result<FeatureSet> {
    let (w, h) = m.raster();
    if !d.is_empty() && (d.width(), d.height()) != (w, h) {
        return Err(Error::dim(format!(
            "{} model expects {w}x{h} images, data is {}x{}",
            m.kind().name(),
            d.width(),
            d.height()
        )));
    }
    let rows = d
        .images()
        .par_iter()
        .map(|img| match m {
            Model::Plain(r) => rbm::features(r, &binarize_image(img, tau)),
            Model::Eri(e) => features_eri(e, &binarize_image(img, tau)),
            Model::Drbm(dr) => features_drbm(dr, &binarize_image(img, tau)),
            Model::Orbm(o) => features_orbm(o, img, tau),
        })
        .collect::<Result<Vec<_>>>()?;
    let hidden = m.hidden();
    let mut vectors = Array2::zeros((rows.len(), hidden));
    for (mut dst, src) in vectors.rows_mut().into_iter().zip(rows) {
        dst.assign(&src);
    }
    FeatureSet::new(vectors, d.labels().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_file::payload_bytes;
    use crate::synth::grating;

    fn gratings(n: usize) -> Dataset {
        let images = (0..n).map(|i| grating(10, 10, (i * 53 % 360) as f64)).collect();
        Dataset::new(images, (0..n).map(|i| (i % 10) as u8).collect()).unwrap()
    }

    fn settings(kind: ModelKind, bins: usize) -> TrainSettings {
        TrainSettings {
            kind,
            hidden: 5,
            bins,
            config: TrainConfig {
                epochs: 2,
                batch_size: 4,
                eta: 0.05,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn single_bin_eri_payload_equals_plain() {
        let d = gratings(12);
        let plain = train_model(&d, &settings(ModelKind::Plain, 1), |_| {}).unwrap().to_bytes();
        let eri = train_model(&d, &settings(ModelKind::Eri, 1), |_| {}).unwrap().to_bytes();
        assert_eq!(payload_bytes(&plain).unwrap(), payload_bytes(&eri).unwrap());
    }

    #[test]
    fn every_kind_extracts_one_row_per_sample() {
        let d = gratings(9);
        for kind in [ModelKind::Plain, ModelKind::Eri, ModelKind::Drbm, ModelKind::Orbm] {
            let mut epochs = 0;
            let m = train_model(&d, &settings(kind, 4), |_| epochs += 1).unwrap();
            assert_eq!(epochs, 2);
            assert_eq!(m.kind(), kind);
            let fs = extract_features(&m, &d, 0.3).unwrap();
            assert_eq!((fs.len(), fs.dim()), (9, 5));
            assert_eq!(fs.labels, d.labels());
            assert!(fs.vectors.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn plain_features_ignore_annotation() {
        let d = gratings(6);
        let m = train_model(&d, &settings(ModelKind::Plain, 1), |_| {}).unwrap();
        let annotated = d.clone().with_orientation(vec![1, 2, 3, 1, 2, 3]).unwrap();
        assert_eq!(extract_features(&m, &d, 0.3).unwrap(), extract_features(&m, &annotated, 0.3).unwrap());
    }

    #[test]
    fn raster_mismatch_is_an_error() {
        let m = train_model(&gratings(4), &settings(ModelKind::Plain, 1), |_| {}).unwrap();
        let other = Dataset::new(vec![grating(12, 12, 0.0)], vec![0]).unwrap();
        assert!(extract_features(&m, &other, 0.3).is_err());
    }

    #[test]
    fn bad_tau_and_empty_data_are_rejected() {
        let d = gratings(4);
        let mut s = settings(ModelKind::Plain, 1);
        s.tau = 1.0;
        assert!(train_model(&d, &s, |_| {}).is_err());
        let empty = Dataset::new(vec![], vec![]).unwrap();
        assert!(train_model(&empty, &settings(ModelKind::Eri, 2), |_| {}).is_err());
    }
}
