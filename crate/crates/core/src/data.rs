//! MNIST (IDX) and MNIST-rot (amat) loading, binarization and the rotated
//! dataset synthesizer.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imageops::{rotate, Image};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

pub const MNIST_SIDE: usize = 28;
const AMAT_FIELDS: usize = MNIST_SIDE * MNIST_SIDE + 1;

/// Default threshold applied before training.
pub const DEFAULT_TAU: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    width: usize,
    height: usize,
    images: Vec<Image>,
    labels: Vec<u8>,
    orientation: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(images: Vec<Image>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::dim(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        let (width, height) = images.first().map_or((0, 0), |i| (i.width(), i.height()));
        if let Some(bad) = images.iter().find(|i| (i.width(), i.height()) != (width, height)) {
            return Err(Error::dim(format!(
                "mixed image sizes {width}x{height} and {}x{}",
                bad.width(),
                bad.height()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::InvalidArgument(format!("label {l} outside 0..=9")));
        }
        Ok(Self {
            width,
            height,
            images,
            labels,
            orientation: None,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// 1-based orientation indices, present after annotation.
    pub fn orientation(&self) -> Option<&[usize]> {
        self.orientation.as_deref()
    }

    pub fn with_orientation(mut self, orientation: Vec<usize>) -> Result<Self> {
        if orientation.len() != self.images.len() {
            return Err(Error::dim(format!(
                "{} orientation indices for {} images",
                orientation.len(),
                self.images.len()
            )));
        }
        self.orientation = Some(orientation);
        Ok(self)
    }

    /// Rows `start..end` (clamped), keeping any annotation.
    pub fn slice(&self, start: usize, end: usize) -> Dataset {
        let end = end.min(self.len());
        let start = start.min(end);
        Dataset {
            width: self.width,
            height: self.height,
            images: self.images[start..end].to_vec(),
            labels: self.labels[start..end].to_vec(),
            orientation: self.orientation.as_ref().map(|o| o[start..end].to_vec()),
        }
    }

    /// Samples at the given positions, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            width: self.width,
            height: self.height,
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            orientation: self
                .orientation
                .as_ref()
                .map(|o| indices.iter().map(|&i| o[i]).collect()),
        }
    }

    /// Applies `f` to every image, dropping orientation annotations.
    pub fn map_images(&self, f: impl Fn(&Image) -> Image) -> Dataset {
        Dataset {
            width: self.width,
            height: self.height,
            images: self.images.iter().map(f).collect(),
            labels: self.labels.clone(),
            orientation: None,
        }
    }

    pub fn pixels_in_unit_interval(&self) -> bool {
        self.images
            .iter()
            .all(|img| img.data().iter().all(|&p| (0.0..=1.0).contains(&p)))
    }
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                offset: self.pos as u64,
                needed: (n - (self.bytes.len() - self.pos)) as u64,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let offset = self.pos as u64;
        let found = self.u32()?;
        if found != expected {
            return Err(Error::BadMagic {
                path: self.path.to_path_buf(),
                offset,
                expected,
                found,
            });
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads an IDX image/label pair, scaling bytes to `[0, 1]`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let (images_path, labels_path) = (images_path.as_ref(), labels_path.as_ref());
    let image_bytes = read(images_path)?;
    let label_bytes = read(labels_path)?;

    let mut cur = Cursor {
        path: images_path,
        bytes: &image_bytes,
        pos: 0,
    };
    cur.magic(IDX_IMAGES_MAGIC)?;
    let count = cur.u32()? as usize;
    let rows = cur.u32()? as usize;
    let cols = cur.u32()? as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::dim(format!("{}: zero-sized images", images_path.display())));
    }

    let mut lcur = Cursor {
        path: labels_path,
        bytes: &label_bytes,
        pos: 0,
    };
    lcur.magic(IDX_LABELS_MAGIC)?;
    let label_count = lcur.u32()? as usize;
    if label_count != count {
        return Err(Error::CountMismatch {
            images_path: images_path.to_path_buf(),
            labels_path: labels_path.to_path_buf(),
            images: count,
            labels: label_count,
        });
    }

    let mut images = Vec::with_capacity(count);
    for _ in 0..count {
        let px = cur.take(rows * cols)?;
        images.push(Image::new(cols, rows, px.iter().map(|&b| b as f64 / 255.0).collect())?);
    }
    let labels = lcur.take(count)?.to_vec();
    if let Some(pos) = labels.iter().position(|&l| l > 9) {
        return Err(Error::LabelOutOfRange {
            path: labels_path.to_path_buf(),
            row: pos,
            label: labels[pos].to_string(),
        });
    }
    Dataset::new(images, labels)
}

/// Writes an IDX pair; pixels are clamped to `[0, 1]` and rounded to bytes.
pub fn write_idx(d: &Dataset, images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<()> {
    let (images_path, labels_path) = (images_path.as_ref(), labels_path.as_ref());
    let mut img = Vec::with_capacity(16 + d.len() * d.width * d.height);
    img.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    img.extend_from_slice(&(d.len() as u32).to_be_bytes());
    img.extend_from_slice(&(d.height as u32).to_be_bytes());
    img.extend_from_slice(&(d.width as u32).to_be_bytes());
    for image in &d.images {
        img.extend(image.data().iter().map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
    }
    fs::write(images_path, img).map_err(|e| Error::io(images_path, e))?;

    let mut lab = Vec::with_capacity(8 + d.len());
    lab.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(d.len() as u32).to_be_bytes());
    lab.extend_from_slice(&d.labels);
    fs::write(labels_path, lab).map_err(|e| Error::io(labels_path, e))
}

/// Loads a 28×28 amat file: 784 pixels then a (possibly float-coded) label
/// per row. With `transposed`, each row's pixels are stored column-major.
pub fn load_amat(path: impl AsRef<Path>, transposed: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (row, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != AMAT_FIELDS {
            return Err(Error::FieldCount {
                path: path.to_path_buf(),
                row,
                expected: AMAT_FIELDS,
                found: tokens.len(),
            });
        }
        let parse = |tok: &str| -> Result<f64> {
            tok.parse::<f64>().map_err(|_| Error::BadToken {
                path: path.to_path_buf(),
                row,
                token: tok.to_string(),
            })
        };
        let mut px = vec![0.0; AMAT_FIELDS - 1];
        for (k, tok) in tokens[..AMAT_FIELDS - 1].iter().enumerate() {
            let v = parse(tok)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::PixelOutOfRange {
                    path: path.to_path_buf(),
                    row,
                    value: v,
                });
            }
            let dst = if transposed {
                (k % MNIST_SIDE) * MNIST_SIDE + k / MNIST_SIDE
            } else {
                k
            };
            px[dst] = v;
        }
        let label_tok = tokens[AMAT_FIELDS - 1];
        let label = parse(label_tok)?;
        if label.fract() != 0.0 || !(0.0..=9.0).contains(&label) {
            return Err(Error::LabelOutOfRange {
                path: path.to_path_buf(),
                row,
                label: label_tok.to_string(),
            });
        }
        images.push(Image::new(MNIST_SIDE, MNIST_SIDE, px)?);
        labels.push(label as u8);
    }
    Dataset::new(images, labels)
}

/// Writes the amat text format; `transposed` mirrors `load_amat`.
pub fn write_amat(d: &Dataset, path: impl AsRef<Path>, transposed: bool) -> Result<()> {
    let path = path.as_ref();
    if !d.is_empty() && (d.width, d.height) != (MNIST_SIDE, MNIST_SIDE) {
        return Err(Error::dim(format!("amat holds 28x28 images, got {}x{}", d.width, d.height)));
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let n = MNIST_SIDE * MNIST_SIDE;
    for (img, &label) in d.images.iter().zip(&d.labels) {
        let mut line = String::with_capacity(n * 10);
        for k in 0..n {
            let src = if transposed {
                (k % MNIST_SIDE) * MNIST_SIDE + k / MNIST_SIDE
            } else {
                k
            };
            line.push_str(&format!("{} ", img.data()[src]));
        }
        line.push_str(&format!("{}.0\n", label));
        out.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Strict threshold: pixels above `tau` become 1, the rest 0.
pub fn binarize_image(img: &Image, tau: f64) -> Image {
    img.map(|p| if p > tau { 1.0 } else { 0.0 })
}

pub fn binarize(d: &Dataset, tau: f64) -> Dataset {
    let mut out = d.map_images(|img| binarize_image(img, tau));
    out.orientation = d.orientation.clone();
    out
}

/// Rotates each image about its center by an independent uniform angle in
/// `[0, 360)` drawn from a ChaCha stream seeded with `seed`.
pub fn rotgen(d: &Dataset, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<f64> = (0..d.len()).map(|_| rng.random_range(0.0..360.0)).collect();
    rotate_each(d, &angles)
}

pub(crate) fn rotate_each(d: &Dataset, angles: &[f64]) -> Dataset {
    Dataset {
        width: d.width,
        height: d.height,
        images: d.images.iter().zip(angles).map(|(img, &a)| rotate(img, a)).collect(),
        labels: d.labels.clone(),
        orientation: None,
    }
}
