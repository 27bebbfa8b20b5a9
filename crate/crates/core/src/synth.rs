//! Synthetic test patterns with a known dominant orientation.

use std::f64::consts::PI;

use crate::imageops::Image;

/// Disc-supported sinusoidal grating whose intensity rises along `angle_deg`
/// (measured like gradient angles: `atan2(dy, dx)` in raster coordinates).
///
/// The period is twice the shorter side, so inside the disc the intensity is
/// monotone along the grating direction and the gradient field points one way.
pub fn grating(width: usize, height: usize, angle_deg: f64) -> Image {
    let side = width.min(height) as f64;
    let period = 2.0 * side;
    let radius = side / 2.0 - 1.0;
    let band = 3.0;
    let (sin, cos) = angle_deg.to_radians().sin_cos();
    let cx = (width as f64 - 1.0) / 2.0;
    let cy = (height as f64 - 1.0) / 2.0;
    Image::from_fn(width, height, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let r = (dx * dx + dy * dy).sqrt();
        let taper = if r >= radius {
            0.0
        } else if r <= radius - band {
            1.0
        } else {
            let u = (radius - r) / band;
            (u * PI / 2.0).sin().powi(2)
        };
        let t = dx * cos + dy * sin;
        taper * (0.5 + 0.5 * (2.0 * PI * t / period).sin())
    })
}
