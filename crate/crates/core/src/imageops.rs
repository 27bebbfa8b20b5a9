//! Raster primitives: rotation with bilinear interpolation, Sobel derivatives,
//! Gaussian windows and row-wise rotation of filter matrices.
//!
//! Pixels are stored row-major with the origin at the top-left corner and `y`
//! growing downward. A positive angle rotates counterclockwise in the `(x, y)`
//! coordinates of the raster, which appears clockwise on screen.

use ndarray::{Array2, ArrayView1, ArrayViewMut1};

use crate::error::{Error, Result};

/// A `width × height` grid of real values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::dim(format!("image must be at least 1x1, got {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::dim(format!(
                "image {width}x{height} needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "image must be at least 1x1");
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut img = Self::zeros(width, height);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y);
            }
        }
        img
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn transpose(&self) -> Image {
        Image::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }
}

/// Precomputed inverse map for rotating a fixed raster by a fixed angle.
///
/// Quarter turns whose source coordinates land on the integer grid are pure
/// index permutations; every other angle uses bilinear taps with zero fill.
#[derive(Debug, Clone)]
pub struct RotationPlan {
    width: usize,
    height: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Identity,
    Permutation(Vec<Option<u32>>),
    Bilinear {
        offsets: Vec<u32>,
        sources: Vec<u32>,
        weights: Vec<f64>,
    },
}

impl RotationPlan {
    pub fn new(width: usize, height: usize, theta_deg: f64) -> Self {
        assert!(width > 0 && height > 0, "image must be at least 1x1");
        let turn = theta_deg.rem_euclid(360.0);
        let kind = if turn == 0.0 {
            PlanKind::Identity
        } else if turn == 180.0 || ((turn == 90.0 || turn == 270.0) && (width + height).is_multiple_of(2)) {
            Self::permutation(width, height, turn)
        } else {
            Self::bilinear(width, height, turn)
        };
        Self { width, height, kind }
    }

    fn permutation(width: usize, height: usize, turn: f64) -> PlanKind {
        let (w, h) = (width as i64, height as i64);
        let mut map = Vec::with_capacity(width * height);
        for y in 0..h {
            for x in 0..w {
                let (sx, sy) = if turn == 180.0 {
                    (w - 1 - x, h - 1 - y)
                } else if turn == 90.0 {
                    (y + (w - h) / 2, (w + h) / 2 - 1 - x)
                } else {
                    ((w + h) / 2 - 1 - y, x + (h - w) / 2)
                };
                let inside = (0..w).contains(&sx) && (0..h).contains(&sy);
                map.push(inside.then(|| (sy * w + sx) as u32));
            }
        }
        PlanKind::Permutation(map)
    }

    fn bilinear(width: usize, height: usize, turn: f64) -> PlanKind {
        let (sin, cos) = turn.to_radians().sin_cos();
        let cx = (width as f64 - 1.0) / 2.0;
        let cy = (height as f64 - 1.0) / 2.0;
        let mut offsets = Vec::with_capacity(width * height + 1);
        let mut sources = Vec::with_capacity(4 * width * height);
        let mut weights = Vec::with_capacity(4 * width * height);
        offsets.push(0u32);
        for y in 0..height {
            for x in 0..width {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                let sx = cos * dx + sin * dy + cx;
                let sy = -sin * dx + cos * dy + cy;
                let x0 = sx.floor();
                let y0 = sy.floor();
                let fx = sx - x0;
                let fy = sy - y0;
                let taps = [
                    (x0, y0, (1.0 - fx) * (1.0 - fy)),
                    (x0 + 1.0, y0, fx * (1.0 - fy)),
                    (x0, y0 + 1.0, (1.0 - fx) * fy),
                    (x0 + 1.0, y0 + 1.0, fx * fy),
                ];
                for (tx, ty, wt) in taps {
                    if wt == 0.0 || tx < 0.0 || ty < 0.0 {
                        continue;
                    }
                    let (tx, ty) = (tx as usize, ty as usize);
                    if tx >= width || ty >= height {
                        continue;
                    }
                    sources.push((ty * width + tx) as u32);
                    weights.push(wt);
                }
                offsets.push(sources.len() as u32);
            }
        }
        PlanKind::Bilinear {
            offsets,
            sources,
            weights,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// True when the plan moves pixels without interpolating.
    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, PlanKind::Bilinear { .. })
    }

    /// Writes the rotated `src` into `dst`. Both have `width * height` entries.
    pub fn apply_into(&self, src: ArrayView1<'_, f64>, mut dst: ArrayViewMut1<'_, f64>) {
        let n = self.width * self.height;
        assert_eq!(src.len(), n);
        assert_eq!(dst.len(), n);
        match &self.kind {
            PlanKind::Identity => dst.assign(&src),
            PlanKind::Permutation(map) => {
                for (out, m) in dst.iter_mut().zip(map) {
                    *out = m.map_or(0.0, |i| src[i as usize]);
                }
            }
            PlanKind::Bilinear {
                offsets,
                sources,
                weights,
            } => {
                for (p, out) in dst.iter_mut().enumerate() {
                    let (lo, hi) = (offsets[p] as usize, offsets[p + 1] as usize);
                    let mut acc = 0.0;
                    for t in lo..hi {
                        acc += weights[t] * src[sources[t] as usize];
                    }
                    *out = acc;
                }
            }
        }
    }

    pub fn apply(&self, img: &Image) -> Image {
        assert_eq!((img.width, img.height), (self.width, self.height));
        let mut out = vec![0.0; img.len()];
        self.apply_into(
            ArrayView1::from(img.data.as_slice()),
            ArrayViewMut1::from(out.as_mut_slice()),
        );
        Image {
            width: self.width,
            height: self.height,
            data: out,
        }
    }
}

/// Rotates `img` by `theta_deg` about its pixel-grid center, keeping `w × h`.
pub fn rotate(img: &Image, theta_deg: f64) -> Image {
    RotationPlan::new(img.width, img.height, theta_deg).apply(img)
}

/// 3×3 Sobel derivatives with edge replication. `gx` grows with intensity to
/// the right, `gy` with intensity downward.
pub fn sobel(img: &Image) -> Result<(Image, Image)> {
    let (w, h) = (img.width, img.height);
    if w < 3 || h < 3 {
        return Err(Error::dim(format!("sobel needs at least 3x3, got {w}x{h}")));
    }
    let at = |x: isize, y: isize| -> f64 {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        img.data[y * w + x]
    };
    let mut gx = Image::zeros(w, h);
    let mut gy = Image::zeros(w, h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let right = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1);
            let left = at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1);
            let down = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1);
            let up = at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1);
            let i = y as usize * w + x as usize;
            gx.data[i] = right - left;
            gy.data[i] = down - up;
        }
    }
    Ok((gx, gy))
}

/// Unnormalized isotropic Gaussian with peak 1 at the pixel-grid center.
pub fn gaussian_window(width: usize, height: usize, sigma: f64) -> Result<Image> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("gaussian sigma must be positive, got {sigma}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::dim("gaussian window must be at least 1x1"));
    }
    let cx = (width as f64 - 1.0) / 2.0;
    let cy = (height as f64 - 1.0) / 2.0;
    let denom = 2.0 * sigma * sigma;
    Ok(Image::from_fn(width, height, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        (-(dx * dx + dy * dy) / denom).exp()
    }))
}

/// Rotates every row of an `H × (w·h)` matrix as a `w × h` image.
pub fn rotate_filter_rows(grad: &Array2<f64>, theta_deg: f64, width: usize, height: usize) -> Result<Array2<f64>> {
    if width == 0 || height == 0 || grad.ncols() != width * height {
        return Err(Error::dim(format!(
            "filter rows have {} columns, raster is {width}x{height}",
            grad.ncols()
        )));
    }
    let plan = RotationPlan::new(width, height, theta_deg);
    Ok(rotate_rows_with(&plan, grad))
}

pub(crate) fn rotate_rows_with(plan: &RotationPlan, grad: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(grad.raw_dim());
    for (src, dst) in grad.rows().into_iter().zip(out.rows_mut()) {
        plan.apply_into(src, dst);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn checker(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| ((x * 7 + y * 13) % 11) as f64 / 10.0)
    }

    fn disc_blob(n: usize) -> Image {
        let c = (n as f64 - 1.0) / 2.0;
        Image::from_fn(n, n, |x, y| {
            let dx = x as f64 - c - 2.0;
            let dy = y as f64 - c + 1.0;
            (-(dx * dx + 2.0 * dy * dy) / 12.0).exp()
        })
    }

    #[test]
    fn rotate_zero_is_identity() {
        let img = checker(9, 7);
        assert_eq!(rotate(&img, 0.0), img);
        assert_eq!(rotate(&img, 360.0), img);
    }

    #[test]
    fn quarter_turn_four_times_is_identity() {
        let img = checker(8, 8);
        let mut r = img.clone();
        for _ in 0..4 {
            r = rotate(&r, 90.0);
        }
        assert_eq!(r, img);
    }

    #[test]
    fn quarter_turn_moves_single_pixel() {
        // brute-force forward map of the quarter turn: (x, y) -> (c - (y - c), c + (x - c))
        let n = 6;
        for (r, c) in [(0usize, 0usize), (1, 4), (5, 2), (3, 3)] {
            let mut img = Image::zeros(n, n);
            img.set(c, r, 1.0);
            let out = rotate(&img, 90.0);
            let center = (n as f64 - 1.0) / 2.0;
            let (dx, dy) = (c as f64 - center, r as f64 - center);
            let (nx, ny) = (-dy + center, dx + center);
            let mut expected = Image::zeros(n, n);
            expected.set(nx.round() as usize, ny.round() as usize, 1.0);
            assert_eq!(out, expected, "pixel at row {r} col {c}");
        }
    }

    #[test]
    fn half_turn_is_point_reflection_on_rectangles() {
        let img = checker(5, 4);
        let out = rotate(&img, 180.0);
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(out.get(x, y), img.get(4 - x, 3 - y));
            }
        }
    }

    #[test]
    fn rotation_preserves_shape_for_any_angle() {
        for theta in [13.0, -47.5, 90.0, 271.0] {
            let out = rotate(&checker(7, 5), theta);
            assert_eq!((out.width(), out.height()), (7, 5));
        }
    }

    #[test]
    fn generic_rotation_preserves_disc_mass() {
        let img = disc_blob(28);
        for theta in [10.0, 33.0, 45.0, 123.0, 200.0, 317.0] {
            let out = rotate(&img, theta);
            assert!((out.sum() - img.sum()).abs() <= 0.05 * img.sum(), "theta {theta}");
        }
    }

    #[test]
    fn rotate_back_recovers_disc_image() {
        let img = disc_blob(28);
        for theta in [10.0, 33.0, 77.0, 145.0] {
            let back = rotate(&rotate(&img, theta), -theta);
            let err = img
                .data()
                .iter()
                .zip(back.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 0.1, "theta {theta}: max err {err}");
        }
    }

    #[test]
    fn sobel_constant_is_zero() {
        let img = Image::from_fn(6, 5, |_, _| 0.7);
        let (gx, gy) = sobel(&img).unwrap();
        assert!(gx.data().iter().chain(gy.data()).all(|&v| v == 0.0));
    }

    #[test]
    fn sobel_vertical_step() {
        // left half 0, right half 1; hand convolution gives gx = 4 on both
        // columns adjacent to the edge and 0 elsewhere, gy = 0 everywhere
        let img = Image::from_fn(6, 6, |x, _| if x >= 3 { 1.0 } else { 0.0 });
        let (gx, gy) = sobel(&img).unwrap();
        for y in 0..6 {
            for x in 0..6 {
                let expected = if x == 2 || x == 3 { 4.0 } else { 0.0 };
                assert_eq!(gx.get(x, y), expected);
                assert_eq!(gy.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn sobel_transpose_swaps_components() {
        let img = checker(7, 5);
        let (gx, gy) = sobel(&img).unwrap();
        let (tx, ty) = sobel(&img.transpose()).unwrap();
        assert_eq!(tx, gy.transpose());
        assert_eq!(ty, gx.transpose());
    }

    #[test]
    fn sobel_rejects_small_images() {
        assert!(sobel(&Image::zeros(2, 5)).is_err());
    }

    #[test]
    fn gaussian_window_values() {
        let g = gaussian_window(29, 29, 5.6).unwrap();
        assert_eq!(g.get(14, 14), 1.0);
        // (14 + 4, 14 + 3) is exactly 5 pixels from the center
        let at_five = gaussian_window(29, 29, 5.0).unwrap().get(18, 17);
        assert!((at_five - (-0.5f64).exp()).abs() < 1e-15);
        assert!(((-0.5f64).exp() - 0.6065).abs() < 1e-4);
        assert!(gaussian_window(4, 4, 0.0).is_err());
        assert!(gaussian_window(4, 4, -1.0).is_err());
    }

    #[test]
    fn filter_rows_identity_and_zero() {
        let grad = Array2::from_shape_fn((3, 20), |(r, c)| (r * 20 + c) as f64);
        assert_eq!(rotate_filter_rows(&grad, 0.0, 5, 4).unwrap(), grad);
        let zero = Array2::<f64>::zeros((3, 20));
        assert_eq!(rotate_filter_rows(&zero, 37.0, 5, 4).unwrap(), zero);
        assert!(rotate_filter_rows(&grad, 10.0, 4, 4).is_err());
    }

    #[test]
    fn filter_rows_half_turn_reflects_pixel() {
        let (w, h) = (5, 4);
        for (x, y) in [(0usize, 0usize), (1, 3), (4, 2)] {
            let mut row = Array2::<f64>::zeros((1, w * h));
            row[[0, y * w + x]] = 2.5;
            let out = rotate_filter_rows(&row, 180.0, w, h).unwrap();
            let mut expected = Array2::<f64>::zeros((1, w * h));
            expected[[0, (h - 1 - y) * w + (w - 1 - x)]] = 2.5;
            assert_eq!(out, expected);
        }
    }

    proptest! {
        #[test]
        fn quarter_turns_permute_values(vals in proptest::collection::vec(0.0f64..1.0, 36), k in 1usize..4) {
            let img = Image::new(6, 6, vals).unwrap();
            let out = rotate(&img, 90.0 * k as f64);
            let mut a = img.data().to_vec();
            let mut b = out.data().to_vec();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn filter_rotation_commutes_with_row_permutation(
            vals in proptest::collection::vec(-1.0f64..1.0, 3 * 30),
            theta in -360.0f64..360.0,
        ) {
            let grad = Array2::from_shape_vec((3, 30), vals).unwrap();
            let perm = [2usize, 0, 1];
            let permuted = grad.select(ndarray::Axis(0), &perm);
            let a = rotate_filter_rows(&permuted, theta, 6, 5).unwrap();
            let b = rotate_filter_rows(&grad, theta, 6, 5).unwrap().select(ndarray::Axis(0), &perm);
            prop_assert_eq!(a, b);
        }
    }
}
