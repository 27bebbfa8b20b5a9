//! Binary model persistence.
//!
//! ```text
//! "ERIRBM01"                      8 bytes
//! kind                            u8   (0 plain, 1 eri, 2 drbm, 3 orbm)
//! H, V, S, w, h                   u32 LE each
//! angles                          S × f64 LE, degrees
//! visible bias block              V × f64 (drbm: S × V, one per member)
//! per matrix: b[H] then W[H·V]    f64 LE, row-major
//! ```
//!
//! Plain and ERI files with one bin carry the same payload. An O-RBM file
//! stores the alignment angle set in its header but a single matrix.

use std::path::Path;

use ndarray::{Array1, Array2};

use crate::baselines::{DrbmModel, OrbmModel};
use crate::eri::EriModel;
use crate::error::{Error, Result};
use crate::orientation::AngleSet;
use crate::rbm::RbmModel;

pub const MAGIC: &[u8; 8] = b"ERIRBM01";
const HEADER_LEN: usize = 8 + 1 + 5 * 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ModelKind {
    Plain = 0,
    Eri = 1,
    Drbm = 2,
    Orbm = 3,
}

impl ModelKind {
    fn from_tag(tag: u8) -> Result<Self> {
        Ok(match tag {
            0 => ModelKind::Plain,
            1 => ModelKind::Eri,
            2 => ModelKind::Drbm,
            3 => ModelKind::Orbm,
            other => return Err(Error::ModelFormat(format!("unknown kind tag {other}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Plain => "rbm",
            ModelKind::Eri => "eri",
            ModelKind::Drbm => "drbm",
            ModelKind::Orbm => "orbm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Plain(RbmModel),
    Eri(EriModel),
    Drbm(DrbmModel),
    Orbm(OrbmModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Plain(_) => ModelKind::Plain,
            Model::Eri(_) => ModelKind::Eri,
            Model::Drbm(_) => ModelKind::Drbm,
            Model::Orbm(_) => ModelKind::Orbm,
        }
    }

    pub fn hidden(&self) -> usize {
        match self {
            Model::Plain(m) => m.hidden(),
            Model::Eri(m) => m.hidden(),
            Model::Drbm(m) => m.members.first().map_or(0, RbmModel::hidden),
            Model::Orbm(m) => m.model.hidden(),
        }
    }

    /// `(width, height)` of the image raster.
    pub fn raster(&self) -> (usize, usize) {
        match self {
            Model::Plain(m) => (m.width, m.height),
            Model::Eri(m) => (m.width, m.height),
            Model::Drbm(m) => m.members.first().map_or((0, 0), |r| (r.width, r.height)),
            Model::Orbm(m) => (m.model.width, m.model.height),
        }
    }

    pub fn bins(&self) -> usize {
        match self {
            Model::Plain(_) => 1,
            Model::Eri(m) => m.bins(),
            Model::Drbm(m) => m.angles.len(),
            Model::Orbm(m) => m.angles.len(),
        }
    }

    /// `(W, b)` of matrix `s` (1-based).
    pub fn matrix(&self, s: usize) -> Result<(&Array2<f64>, &Array1<f64>)> {
        let count = match self {
            Model::Plain(_) | Model::Orbm(_) => 1,
            _ => self.bins(),
        };
        if s == 0 || s > count {
            return Err(Error::InvalidArgument(format!("matrix {s} outside 1..={count}")));
        }
        Ok(match self {
            Model::Plain(m) => (&m.weights, &m.hidden_bias),
            Model::Orbm(m) => (&m.model.weights, &m.model.hidden_bias),
            Model::Eri(m) => (&m.weights[s - 1], &m.hidden_biases[s - 1]),
            Model::Drbm(m) => (&m.members[s - 1].weights, &m.members[s - 1].hidden_bias),
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (w, h) = self.raster();
        let (hid, v) = (self.hidden(), w * h);
        let angles: Vec<f64> = match self {
            Model::Plain(_) => vec![0.0],
            Model::Eri(m) => m.angles.angles().to_vec(),
            Model::Drbm(m) => m.angles.angles().to_vec(),
            Model::Orbm(m) => m.angles.angles().to_vec(),
        };
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * payload_len(self.kind(), hid, v, angles.len()));
        out.extend_from_slice(MAGIC);
        out.push(self.kind() as u8);
        for dim in [hid, v, angles.len(), w, h] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        let mut put = |values: &mut dyn Iterator<Item = &f64>| {
            for x in values {
                out.extend_from_slice(&x.to_le_bytes());
            }
        };
        put(&mut angles.iter());
        match self {
            Model::Plain(m) | Model::Orbm(OrbmModel { model: m, .. }) => {
                put(&mut m.visible_bias.iter());
                put(&mut m.hidden_bias.iter());
                put(&mut m.weights.iter());
            }
            Model::Eri(m) => {
                put(&mut m.visible_bias.iter());
                for (b, wt) in m.hidden_biases.iter().zip(&m.weights) {
                    put(&mut b.iter());
                    put(&mut wt.iter());
                }
            }
            Model::Drbm(m) => {
                for member in &m.members {
                    put(&mut member.visible_bias.iter());
                }
                for member in &m.members {
                    put(&mut member.hidden_bias.iter());
                    put(&mut member.weights.iter());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            if bytes.len() >= 8 && &bytes[..8] != MAGIC {
                return Err(bad_magic(&bytes[..8]));
            }
            return Err(Error::ModelTruncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        if &bytes[..8] != MAGIC {
            return Err(bad_magic(&bytes[..8]));
        }
        let kind = ModelKind::from_tag(bytes[8])?;
        let dim = |i: usize| {
            let at = 9 + 4 * i;
            u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
        };
        let (hid, v, s, w, h) = (dim(0), dim(1), dim(2), dim(3), dim(4));
        if v != w * h {
            return Err(Error::ModelFormat(format!("V = {v} but raster is {w}x{h}")));
        }
        if s == 0 {
            return Err(Error::ModelFormat("S = 0".into()));
        }
        if kind == ModelKind::Plain && s != 1 {
            return Err(Error::ModelFormat(format!("plain model with S = {s}")));
        }
        let expected = HEADER_LEN + 8 * (s + payload_len(kind, hid, v, s));
        if bytes.len() != expected {
            if bytes.len() < expected {
                return Err(Error::ModelTruncated {
                    expected,
                    actual: bytes.len(),
                });
            }
            return Err(Error::ModelFormat(format!(
                "{} trailing bytes after a {expected}-byte model",
                bytes.len() - expected
            )));
        }

        let mut reals = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut take = |n: usize| -> Vec<f64> { reals.by_ref().take(n).collect() };
        let angles = AngleSet::from_angles(take(s)).map_err(|e| Error::ModelFormat(e.to_string()))?;
        let matrix = |values: Vec<f64>| Array2::from_shape_vec((hid, v), values).expect("length checked above");

        Ok(match kind {
            ModelKind::Plain | ModelKind::Orbm => {
                let c = Array1::from(take(v));
                let b = Array1::from(take(hid));
                let model = RbmModel::from_parts(matrix(take(hid * v)), b, c, w, h)?;
                if kind == ModelKind::Plain {
                    Model::Plain(model)
                } else {
                    Model::Orbm(OrbmModel { model, angles })
                }
            }
            ModelKind::Eri => {
                let visible_bias = Array1::from(take(v));
                let mut weights = Vec::with_capacity(s);
                let mut hidden_biases = Vec::with_capacity(s);
                for _ in 0..s {
                    hidden_biases.push(Array1::from(take(hid)));
                    weights.push(matrix(take(hid * v)));
                }
                Model::Eri(EriModel {
                    weights,
                    hidden_biases,
                    visible_bias,
                    angles,
                    width: w,
                    height: h,
                })
            }
            ModelKind::Drbm => {
                let cs: Vec<Array1<f64>> = (0..s).map(|_| Array1::from(take(v))).collect();
                let mut members = Vec::with_capacity(s);
                for c in cs {
                    let b = Array1::from(take(hid));
                    members.push(RbmModel::from_parts(matrix(take(hid * v)), b, c, w, h)?);
                }
                Model::Drbm(DrbmModel { members, angles })
            }
        })
    }
}

fn bad_magic(found: &[u8]) -> Error {
    Error::ModelFormat(format!(
        "bad magic {:?}, expected {:?}",
        String::from_utf8_lossy(found),
        String::from_utf8_lossy(MAGIC)
    ))
}

/// Number of reals after the angle list.
fn payload_len(kind: ModelKind, hidden: usize, visible: usize, bins: usize) -> usize {
    let per_matrix = hidden + hidden * visible;
    match kind {
        ModelKind::Plain | ModelKind::Orbm => visible + per_matrix,
        ModelKind::Eri => visible + bins * per_matrix,
        ModelKind::Drbm => bins * (visible + per_matrix),
    }
}

/// Bytes after the angle list; used to compare payloads across kinds.
pub fn payload_bytes(bytes: &[u8]) -> Result<&[u8]> {
    Model::from_bytes(bytes)?;
    let s = u32::from_le_bytes(bytes[17..21].try_into().unwrap()) as usize;
    Ok(&bytes[HEADER_LEN + 8 * s..])
}

pub fn save_model(m: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, m.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Model::from_bytes(&bytes)
}
