//! Dominant-orientation estimation from a Gaussian-weighted histogram of
//! Sobel gradient angles, and the mapping from that angle to a bin index.

use crate::error::{Error, Result};
use crate::imageops::{gaussian_window, sobel, Image};

/// Angles within this fraction of a bin below a bin edge are assigned to the
/// upper bin, so exact edge angles survive `atan2` round-off.
const EDGE_SNAP: f64 = 1e-9;

/// `S` evenly spaced angles `φ_j = (j − 1)·360/S` degrees, `j = 1..=S`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSet {
    angles: Vec<f64>,
}

impl AngleSet {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("angle set needs at least one bin".into()));
        }
        let step = 360.0 / bins as f64;
        Ok(Self {
            angles: (0..bins).map(|j| j as f64 * step).collect(),
        })
    }

    /// Rebuilds an angle set from a stored list, checking even spacing.
    pub fn from_angles(angles: Vec<f64>) -> Result<Self> {
        let expected = Self::new(angles.len())?;
        let ok = angles
            .iter()
            .zip(&expected.angles)
            .all(|(a, e)| (a - e).abs() <= 1e-9);
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "angles {angles:?} are not evenly spaced from 0"
            )));
        }
        Ok(Self { angles })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        360.0 / self.angles.len() as f64
    }

    /// `φ_s` for a 1-based index.
    pub fn angle(&self, s: usize) -> f64 {
        self.angles[s - 1]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// 0-based bin holding `angle_deg` (any real, taken modulo 360).
    pub fn bin_of(&self, angle_deg: f64) -> usize {
        let pos = angle_deg.rem_euclid(360.0) / self.bin_width() + EDGE_SNAP;
        (pos.floor() as usize) % self.len()
    }

    /// Largest 1-based `j` with `φ_j ≤ psi`.
    pub fn index_at_or_below(&self, psi: f64) -> usize {
        let psi = psi.rem_euclid(360.0);
        self.angles.iter().rposition(|&phi| phi <= psi).map_or(1, |j| j + 1)
    }
}

/// Orientation histogram; bin `j` (0-based) covers `[φ_{j+1}, φ_{j+1} + 360/S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationHistogram {
    pub weights: Vec<f64>,
}

impl OrientationHistogram {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantOrientation {
    /// 1-based bin index `s`.
    pub index: usize,
    /// Center of the winning bin, degrees.
    pub psi: f64,
    /// Set when the histogram is all zero; `index` is then 1 and `psi` 0.
    pub degenerate: bool,
}

/// Gaussian width used for an image of the given size.
pub fn window_sigma(width: usize, height: usize) -> f64 {
    width.min(height) as f64 / 5.0
}

pub fn gradient_histogram(img: &Image, aset: &AngleSet) -> Result<OrientationHistogram> {
    let (gx, gy) = sobel(img)?;
    let window = gaussian_window(img.width(), img.height(), window_sigma(img.width(), img.height()))?;
    let mut weights = vec![0.0; aset.len()];
    for ((&dx, &dy), &g) in gx.data().iter().zip(gy.data()).zip(window.data()) {
        let magnitude = (dx * dx + dy * dy).sqrt();
        if magnitude == 0.0 {
            continue;
        }
        let angle = dy.atan2(dx).to_degrees();
        weights[aset.bin_of(angle)] += magnitude * g;
    }
    Ok(OrientationHistogram { weights })
}

/// Picks the heaviest bin (lowest index on ties) and reports its center.
pub fn dominant_from_histogram(hist: &OrientationHistogram, aset: &AngleSet) -> DominantOrientation {
    let mut best = 0;
    for (j, &w) in hist.weights.iter().enumerate() {
        if w > hist.weights[best] {
            best = j;
        }
    }
    if hist.weights[best] <= 0.0 {
        return DominantOrientation {
            index: 1,
            psi: 0.0,
            degenerate: true,
        };
    }
    let psi = aset.angle(best + 1) + aset.bin_width() / 2.0;
    DominantOrientation {
        index: aset.index_at_or_below(psi),
        psi,
        degenerate: false,
    }
}

pub fn dominant_index(img: &Image, aset: &AngleSet) -> Result<DominantOrientation> {
    Ok(dominant_from_histogram(&gradient_histogram(img, aset)?, aset))
}
