//! C ABI over the `eri-rbm` library.
//!
//! Models are opaque `EriModel *` handles created by `eri_model_load` or
//! `eri_train` and released with `eri_model_free`. Every fallible call returns
//! an `EriStatus`; on failure `eri_last_error()` describes the problem for the
//! calling thread. Images are row-major `double` rasters with values in
//! `[0, 1]`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eri_rbm::data::Dataset;
use eri_rbm::imageops::{rotate, Image};
use eri_rbm::model_file::{load_model, save_model, Model, ModelKind};
use eri_rbm::orientation::{dominant_index, AngleSet};
use eri_rbm::pipeline::{extract_features, train_model, TrainSettings};
use eri_rbm::rbm::{CdSampling, TrainConfig};
use eri_rbm::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EriStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Dimension = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EriModelKind {
    Plain = 0,
    Eri = 1,
    Drbm = 2,
    Orbm = 3,
}

impl From<ModelKind> for EriModelKind {
    fn from(k: ModelKind) -> Self {
        match k {
            ModelKind::Plain => EriModelKind::Plain,
            ModelKind::Eri => EriModelKind::Eri,
            ModelKind::Drbm => EriModelKind::Drbm,
            ModelKind::Orbm => EriModelKind::Orbm,
        }
    }
}

/// Opaque model handle.
pub struct EriModel {
    inner: Model,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EriTrainOptions {
    /// An `EriModelKind` value.
    pub kind: u8,
    pub hidden: usize,
    pub bins: usize,
    pub epochs: usize,
    pub eta: f64,
    pub momentum: f64,
    pub batch: usize,
    pub cd_k: usize,
    pub tau: f64,
    pub seed: u64,
    /// Nonzero samples visible units in the negative phase.
    pub gibbs: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EriModelInfo {
    pub hidden: usize,
    pub width: usize,
    pub height: usize,
    pub bins: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(EriStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => EriStatus::Io,
            Error::BadMagic { .. }
            | Error::Truncated { .. }
            | Error::FieldCount { .. }
            | Error::BadToken { .. }
            | Error::LabelOutOfRange { .. }
            | Error::PixelOutOfRange { .. }
            | Error::ModelFormat(_)
            | Error::ModelTruncated { .. } => EriStatus::Format,
            Error::CountMismatch { .. } | Error::Dimension(_) => EriStatus::Dimension,
            Error::InvalidArgument(_) | Error::EmptyBatch => EriStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EriStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EriStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EriStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            EriStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(EriStatus::InvalidArgument, "path is not UTF-8".into()))
}

unsafe fn image_arg(pixels: *const f64, width: usize, height: usize) -> Result<Image, Failure> {
    if pixels.is_null() {
        return Err(null("pixels"));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Failure(EriStatus::InvalidArgument, "image size overflows".into()))?;
    Ok(Image::new(width, height, std::slice::from_raw_parts(pixels, n).to_vec())?)
}

unsafe fn model_arg<'a>(m: *const EriModel) -> Result<&'a Model, Failure> {
    m.as_ref().map(|h| &h.inner).ok_or_else(|| null("model"))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn eri_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Reference defaults: ERI, H=100, S=18, 200 epochs, eta 1e-3, momentum 0.9,
/// batch 100, CD-1, tau 0.3, seed 42.
#[no_mangle]
pub extern "C" fn eri_train_options_default() -> EriTrainOptions {
    let s = TrainSettings::default();
    EriTrainOptions {
        kind: EriModelKind::from(s.kind) as u8,
        hidden: s.hidden,
        bins: s.bins,
        epochs: s.config.epochs,
        eta: s.config.eta,
        momentum: s.config.momentum,
        batch: s.config.batch_size,
        cd_k: s.config.cd_k,
        tau: s.tau,
        seed: s.config.seed,
        gibbs: 0,
    }
}

#[no_mangle]
pub unsafe extern "C" fn eri_model_load(path: *const c_char, out: *mut *mut EriModel) -> EriStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = load_model(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(EriModel { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn eri_model_save(model: *const EriModel, path: *const c_char) -> EriStatus {
    guard(|| {
        save_model(model_arg(model)?, path_arg(path)?)?;
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn eri_model_free(model: *mut EriModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub unsafe extern "C" fn eri_model_kind(model: *const EriModel, out: *mut EriModelKind) -> EriStatus {
    guard(|| {
        let m = model_arg(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        // the caller's storage may not hold a valid enum value yet
        out.write(m.kind().into());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn eri_model_info(model: *const EriModel, out: *mut EriModelInfo) -> EriStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (width, height) = m.raster();
        *out = EriModelInfo {
            hidden: m.hidden(),
            width,
            height,
            bins: m.bins(),
        };
        Ok(())
    })
}

/// Hidden-unit probabilities for one grayscale image. `out` must hold
/// `hidden` values; pass `out_len` to have it checked.
#[no_mangle]
pub unsafe extern "C" fn eri_model_features(
    model: *const EriModel,
    pixels: *const f64,
    width: usize,
    height: usize,
    tau: f64,
    out: *mut f64,
    out_len: usize,
) -> EriStatus {
    guard(|| {
        let m = model_arg(model)?;
        let img = image_arg(pixels, width, height)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len < m.hidden() {
            return Err(Failure(
                EriStatus::Dimension,
                format!("output holds {out_len} values, model has {} hidden units", m.hidden()),
            ));
        }
        let fs = extract_features(m, &Dataset::new(vec![img], vec![0])?, tau)?;
        std::slice::from_raw_parts_mut(out, m.hidden()).copy_from_slice(fs.vectors.as_slice().expect("standard layout"));
        Ok(())
    })
}

/// Dominant orientation of an image with `bins` reference angles. `index`
/// is 1-based; `degenerate` is set to 1 for images without gradients.
#[no_mangle]
pub unsafe extern "C" fn eri_dominant_orientation(
    pixels: *const f64,
    width: usize,
    height: usize,
    bins: usize,
    index: *mut usize,
    psi: *mut f64,
    degenerate: *mut u8,
) -> EriStatus {
    guard(|| {
        let img = image_arg(pixels, width, height)?;
        let d = dominant_index(&img, &AngleSet::new(bins)?)?;
        if let Some(i) = index.as_mut() {
            *i = d.index;
        }
        if let Some(p) = psi.as_mut() {
            *p = d.psi;
        }
        if let Some(g) = degenerate.as_mut() {
            *g = d.degenerate as u8;
        }
        Ok(())
    })
}

/// Rotates an image by `degrees` about its center into `out` (same size).
#[no_mangle]
pub unsafe extern "C" fn eri_rotate(
    pixels: *const f64,
    width: usize,
    height: usize,
    degrees: f64,
    out: *mut f64,
) -> EriStatus {
    guard(|| {
        let img = image_arg(pixels, width, height)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = rotate(&img, degrees);
        std::slice::from_raw_parts_mut(out, r.len()).copy_from_slice(r.data());
        Ok(())
    })
}

/// Trains on `count` grayscale images stored back to back.
#[no_mangle]
pub unsafe extern "C" fn eri_train(
    pixels: *const f64,
    labels: *const u8,
    count: usize,
    width: usize,
    height: usize,
    options: *const EriTrainOptions,
    out: *mut *mut EriModel,
) -> EriStatus {
    guard(|| {
        if pixels.is_null() {
            return Err(null("pixels"));
        }
        if labels.is_null() {
            return Err(null("labels"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        let v = width
            .checked_mul(height)
            .filter(|&v| v > 0 && count.checked_mul(v).is_some())
            .ok_or_else(|| Failure(EriStatus::InvalidArgument, format!("bad raster {width}x{height}")))?;
        let flat = std::slice::from_raw_parts(pixels, count * v);
        let images = flat
            .chunks_exact(v)
            .map(|c| Image::new(width, height, c.to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        let d = Dataset::new(images, std::slice::from_raw_parts(labels, count).to_vec())?;
        let kind = match o.kind {
            0 => ModelKind::Plain,
            1 => ModelKind::Eri,
            2 => ModelKind::Drbm,
            3 => ModelKind::Orbm,
            other => return Err(Failure(EriStatus::InvalidArgument, format!("unknown model kind {other}"))),
        };
        let settings = TrainSettings {
            kind,
            hidden: o.hidden,
            bins: if kind == ModelKind::Plain { 1 } else { o.bins },
            tau: o.tau,
            config: TrainConfig {
                eta: o.eta,
                momentum: o.momentum,
                epochs: o.epochs,
                cd_k: o.cd_k,
                batch_size: o.batch,
                seed: o.seed,
                sampling: if o.gibbs != 0 { CdSampling::Gibbs } else { CdSampling::Reconstruction },
                ..TrainConfig::default()
            },
        };
        let inner = train_model(&d, &settings, |_| {})?;
        *out = Box::into_raw(Box::new(EriModel { inner }));
        Ok(())
    })
}
