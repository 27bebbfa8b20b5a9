//! Comparison models: independent per-orientation RBMs (D-RBM) and a single
//! RBM trained on orientation-aligned images (O-RBM).

use std::time::Instant;

use ndarray::Array1;

use crate::data::{binarize, binarize_image, Dataset};
use crate::error::{Error, Result};
use crate::imageops::{rotate, Image};
use crate::orientation::{dominant_index, AngleSet};
use crate::rbm::{self, EpochReport, RbmModel, RbmTrainer, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DrbmModel {
    /// Member `s − 1` serves orientation bin `s`.
    pub members: Vec<RbmModel>,
    pub angles: AngleSet,
}

impl DrbmModel {
    pub fn validate(&self) -> Result<()> {
        if self.members.len() != self.angles.len() {
            return Err(Error::dim(format!(
                "{} members for {} bins",
                self.members.len(),
                self.angles.len()
            )));
        }
        if let Some(first) = self.members.first() {
            let shape = (first.hidden(), first.width, first.height);
            if self.members.iter().any(|m| (m.hidden(), m.width, m.height) != shape) {
                return Err(Error::dim("D-RBM members disagree in shape"));
            }
        }
        Ok(())
    }
}

/// Seed of member `s` (1-based); member 1 uses the run seed itself.
pub fn member_seed(seed: u64, s: usize) -> u64 {
    seed.wrapping_add(s as u64 - 1)
}

/// Trains one RBM per orientation partition. Members never see each other's
/// data or random streams; an empty partition leaves its member at its
/// initialization. Each reported epoch covers all members.
pub fn train_drbm_with(
    d: &Dataset,
    hidden: usize,
    angles: &AngleSet,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochReport),
) -> Result<DrbmModel> {
    let index = d
        .orientation()
        .ok_or_else(|| Error::InvalidArgument("dataset has no orientation annotation".into()))?;
    let mut partitions: Vec<Vec<Image>> = vec![Vec::new(); angles.len()];
    for (img, &s) in d.images().iter().zip(index) {
        if s == 0 || s > angles.len() {
            return Err(Error::InvalidArgument(format!(
                "orientation index {s} outside 1..={}",
                angles.len()
            )));
        }
        partitions[s - 1].push(img.clone());
    }
    let mut trainers = partitions
        .iter()
        .enumerate()
        .map(|(i, part)| {
            let member_cfg = TrainConfig {
                seed: member_seed(cfg.seed, i + 1),
                ..cfg.clone()
            };
            RbmTrainer::from_images(part, d.width(), d.height(), hidden, &member_cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        let (mut error, mut count) = (0.0, 0usize);
        for (trainer, part) in trainers.iter_mut().zip(&partitions) {
            let r = trainer.run_epoch()?;
            if !part.is_empty() {
                error += r.reconstruction * part.len() as f64;
                count += part.len();
            }
        }
        on_epoch(&EpochReport {
            epoch,
            reconstruction: error / count as f64,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(DrbmModel {
        members: trainers.into_iter().map(RbmTrainer::into_model).collect(),
        angles: angles.clone(),
    })
}

pub fn train_drbm(d: &Dataset, hidden: usize, angles: &AngleSet, cfg: &TrainConfig) -> Result<DrbmModel> {
    train_drbm_with(d, hidden, angles, cfg, |_| {})
}

/// Hidden probabilities of the member matching the image's orientation.
pub fn features_drbm(m: &DrbmModel, img: &Image) -> Result<Array1<f64>> {
    let s = dominant_index(img, &m.angles)?.index;
    rbm::features(&m.members[s - 1], img)
}

/// Rotates an image by `−ψ` so its dominant orientation sits at 0°.
/// Images without gradients are returned unchanged.
pub fn orient_align(img: &Image, angles: &AngleSet) -> Result<Image> {
    let d = dominant_index(img, angles)?;
    if d.degenerate {
        return Ok(img.clone());
    }
    Ok(rotate(img, -d.psi))
}

/// A plain RBM trained on aligned images, with the angle set used to align.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbmModel {
    pub model: RbmModel,
    pub angles: AngleSet,
}

/// Aligns the grayscale image, then thresholds it.
pub fn orbm_input(img: &Image, angles: &AngleSet, tau: f64) -> Result<Image> {
    Ok(binarize_image(&orient_align(img, angles)?, tau))
}

/// `d` holds grayscale images; each is aligned, then binarized with `tau`.
pub fn train_orbm_with(
    d: &Dataset,
    hidden: usize,
    angles: &AngleSet,
    tau: f64,
    cfg: &TrainConfig,
    on_epoch: impl FnMut(&EpochReport),
) -> Result<OrbmModel> {
    let aligned = align_dataset(d, angles)?;
    let model = rbm::train_with(&binarize(&aligned, tau), hidden, cfg, on_epoch)?;
    Ok(OrbmModel {
        model,
        angles: angles.clone(),
    })
}

pub fn train_orbm(d: &Dataset, hidden: usize, angles: &AngleSet, tau: f64, cfg: &TrainConfig) -> Result<OrbmModel> {
    train_orbm_with(d, hidden, angles, tau, cfg, |_| {})
}

pub fn align_dataset(d: &Dataset, angles: &AngleSet) -> Result<Dataset> {
    use rayon::prelude::*;
    let aligned = d
        .images()
        .par_iter()
        .map(|img| orient_align(img, angles))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(aligned, d.labels().to_vec())
}

/// Features of a grayscale image under an O-RBM.
pub fn features_orbm(m: &OrbmModel, img: &Image, tau: f64) -> Result<Array1<f64>> {
    rbm::features(&m.model, &orbm_input(img, &m.angles, tau)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eri::annotate_orientations;
    use crate::synth::grating;

    fn oriented_set(n: usize, bins: usize) -> Dataset {
        let images: Vec<Image> = (0..n)
            .map(|i| binarize_image(&grating(12, 12, (i * 47 % 360) as f64), 0.5))
            .collect();
        let d = Dataset::new(images, vec![3; n]).unwrap();
        annotate_orientations(&d, &AngleSet::new(bins).unwrap()).unwrap().0
    }

    fn cfg() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 4,
            eta: 0.05,
            ..Default::default()
        }
    }

    #[test]
    fn single_bin_drbm_is_plain_rbm() {
        let d = oriented_set(10, 1);
        let drbm = train_drbm(&d, 4, &AngleSet::new(1).unwrap(), &cfg()).unwrap();
        let plain = rbm::train(&d, 4, &cfg()).unwrap();
        assert_eq!(drbm.members, vec![plain]);
    }

    #[test]
    fn empty_partition_keeps_initialization() {
        let angles = AngleSet::new(4).unwrap();
        let d = oriented_set(12, 4);
        let idx = d.orientation().unwrap().to_vec();
        let keep: Vec<usize> = (0..d.len()).filter(|&i| idx[i] != 2).collect();
        let d = d.select(&keep);
        let trained = train_drbm(&d, 3, &angles, &cfg()).unwrap();
        let init_cfg = TrainConfig {
            seed: member_seed(cfg().seed, 2),
            ..cfg()
        };
        let init = RbmTrainer::from_images(&[], 12, 12, 3, &init_cfg).unwrap().into_model();
        assert_eq!(trained.members[1], init);
    }

    #[test]
    fn members_ignore_other_partitions() {
        let angles = AngleSet::new(4).unwrap();
        let d = oriented_set(16, 4);
        let idx = d.orientation().unwrap().to_vec();
        let a = train_drbm(&d, 3, &angles, &cfg()).unwrap();
        // reverse the order of samples in partition 1 only
        let mut order: Vec<usize> = (0..d.len()).collect();
        let p1: Vec<usize> = order.iter().copied().filter(|&i| idx[i] == 1).collect();
        for (slot, &src) in order.iter_mut().filter(|i| idx[**i] == 1).zip(p1.iter().rev()) {
            *slot = src;
        }
        let b = train_drbm(&d.select(&order), 3, &angles, &cfg()).unwrap();
        for t in 1..4 {
            assert_eq!(a.members[t], b.members[t]);
        }
    }

    #[test]
    fn drbm_features_route_to_member() {
        let angles = AngleSet::new(4).unwrap();
        let d = oriented_set(8, 4);
        let m = train_drbm(&d, 3, &angles, &cfg()).unwrap();
        let img = &d.images()[5];
        let s = d.orientation().unwrap()[5];
        let f = features_drbm(&m, img).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f, rbm::features(&m.members[s - 1], img).unwrap());
    }

    #[test]
    fn alignment_moves_dominant_orientation_to_first_bin() {
        let angles = AngleSet::new(18).unwrap();
        for deg in (0..360).step_by(30) {
            let aligned = orient_align(&grating(28, 28, deg as f64 + 5.0), &angles).unwrap();
            let s = dominant_index(&aligned, &angles).unwrap().index;
            assert!(s == 1 || s == 2 || s == 18, "angle {deg}: aligned to bin {s}");
        }
    }

    #[test]
    fn blank_image_is_not_aligned() {
        let angles = AngleSet::new(18).unwrap();
        let blank = Image::zeros(28, 28);
        assert_eq!(orient_align(&blank, &angles).unwrap(), blank);
    }

    #[test]
    fn orbm_on_aligned_images_matches_plain_training() {
        let angles = AngleSet::new(9).unwrap();
        let base = orient_align(&grating(12, 12, 100.0), &angles).unwrap();
        // rotating an already aligned image by its residual half-bin keeps
        // training equivalent to plain training on the aligned inputs
        let d = Dataset::new(vec![base.clone(); 6], vec![1; 6]).unwrap();
        let orbm = train_orbm(&d, 3, &angles, 0.3, &cfg()).unwrap();
        let plain = rbm::train(&binarize(&align_dataset(&d, &angles).unwrap(), 0.3), 3, &cfg()).unwrap();
        assert_eq!(orbm.model, plain);
        assert_eq!(orbm, train_orbm(&d, 3, &angles, 0.3, &cfg()).unwrap());
    }
}
