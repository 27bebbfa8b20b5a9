use std::ffi::{CStr, CString};
use std::ptr;

use eri_rbm::data::Dataset;
use eri_rbm::model_file::load_model;
use eri_rbm::pipeline::extract_features;
use eri_rbm::synth::grating;
use eri_rbm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(eri_last_error()) }.to_string_lossy().into_owned()
}

fn toy_set(n: usize) -> (Vec<f64>, Vec<u8>) {
    let mut pixels = Vec::new();
    for i in 0..n {
        pixels.extend_from_slice(grating(10, 10, (i * 41 % 360) as f64).data());
    }
    (pixels, (0..n).map(|i| (i % 10) as u8).collect())
}

fn small_options(kind: EriModelKind) -> EriTrainOptions {
    EriTrainOptions {
        kind: kind as u8,
        hidden: 6,
        bins: 4,
        epochs: 2,
        eta: 0.05,
        batch: 5,
        ..eri_train_options_default()
    }
}

fn train(kind: EriModelKind) -> *mut EriModel {
    let (pixels, labels) = toy_set(12);
    let mut model = ptr::null_mut();
    let status = unsafe { eri_train(pixels.as_ptr(), labels.as_ptr(), 12, 10, 10, &small_options(kind), &mut model) };
    assert_eq!(status, EriStatus::Ok, "{}", last_error());
    model
}

#[test]
fn defaults_are_the_reference_settings() {
    let o = eri_train_options_default();
    assert_eq!(o.kind, EriModelKind::Eri as u8);
    assert_eq!((o.hidden, o.bins, o.epochs, o.batch, o.cd_k, o.seed), (100, 18, 200, 100, 1, 42));
    assert_eq!((o.eta, o.momentum, o.tau), (1e-3, 0.9, 0.3));
}

#[test]
fn train_save_load_and_extract() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    for kind in [EriModelKind::Plain, EriModelKind::Eri, EriModelKind::Drbm, EriModelKind::Orbm] {
        let model = train(kind);
        unsafe {
            assert_eq!(eri_model_save(model, cpath.as_ptr()), EriStatus::Ok);
            let mut loaded = ptr::null_mut();
            assert_eq!(eri_model_load(cpath.as_ptr(), &mut loaded), EriStatus::Ok);

            let mut k = EriModelKind::Plain;
            assert_eq!(eri_model_kind(loaded, &mut k), EriStatus::Ok);
            assert_eq!(k, kind);
            let mut info = EriModelInfo::default();
            assert_eq!(eri_model_info(loaded, &mut info), EriStatus::Ok);
            assert_eq!((info.hidden, info.width, info.height), (6, 10, 10));
            assert_eq!(info.bins, if kind == EriModelKind::Plain { 1 } else { 4 });

            // the C path gives the same features as the library path
            let img = grating(10, 10, 123.0);
            let mut out = vec![0.0; 6];
            let status = eri_model_features(loaded, img.data().as_ptr(), 10, 10, 0.3, out.as_mut_ptr(), out.len());
            assert_eq!(status, EriStatus::Ok, "{}", last_error());
            let reference = load_model(&path).unwrap();
            let fs = extract_features(&reference, &Dataset::new(vec![img.clone()], vec![0]).unwrap(), 0.3).unwrap();
            assert_eq!(out, fs.vectors.row(0).to_vec());

            let mut short = vec![0.0; 5];
            let status = eri_model_features(loaded, img.data().as_ptr(), 10, 10, 0.3, short.as_mut_ptr(), 5);
            assert_eq!(status, EriStatus::Dimension);
            let status = eri_model_features(loaded, img.data().as_ptr(), 5, 20, 0.3, out.as_mut_ptr(), 6);
            assert_eq!(status, EriStatus::Dimension);

            eri_model_free(loaded);
            eri_model_free(model);
        }
    }
}

#[test]
fn corrupt_file_reports_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.bin");
    std::fs::write(&path, b"NOTAMODEL and then some more bytes to pass the header").unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { eri_model_load(cpath.as_ptr(), &mut model) }, EriStatus::Format);
    assert!(model.is_null());
    assert!(last_error().contains("bad magic"), "{}", last_error());

    let missing = CString::new(dir.path().join("missing.bin").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { eri_model_load(missing.as_ptr(), &mut model) }, EriStatus::Io);
}

#[test]
fn null_arguments_are_rejected() {
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(eri_model_load(ptr::null(), &mut model), EriStatus::NullPointer);
        assert_eq!(eri_model_save(ptr::null(), c"x".as_ptr()), EriStatus::NullPointer);
        let mut info = EriModelInfo::default();
        assert_eq!(eri_model_info(ptr::null(), &mut info), EriStatus::NullPointer);
        assert_eq!(eri_rotate(ptr::null(), 3, 3, 90.0, ptr::null_mut()), EriStatus::NullPointer);
        eri_model_free(ptr::null_mut());
    }
    assert!(last_error().contains("NULL"));
}

#[test]
fn bad_training_options() {
    let (pixels, labels) = toy_set(4);
    let mut model = ptr::null_mut();
    let mut o = small_options(EriModelKind::Eri);
    o.kind = 9;
    let status = unsafe { eri_train(pixels.as_ptr(), labels.as_ptr(), 4, 10, 10, &o, &mut model) };
    assert_eq!(status, EriStatus::InvalidArgument);
    o.kind = EriModelKind::Eri as u8;
    o.bins = 0;
    let status = unsafe { eri_train(pixels.as_ptr(), labels.as_ptr(), 4, 10, 10, &o, &mut model) };
    assert_eq!(status, EriStatus::InvalidArgument);
    let status = unsafe { eri_train(pixels.as_ptr(), labels.as_ptr(), 4, 0, 10, &o, &mut model) };
    assert_eq!(status, EriStatus::InvalidArgument);
    assert!(model.is_null());
}

#[test]
fn orientation_and_rotation() {
    let blank = vec![0.0; 28 * 28];
    let (mut index, mut psi, mut degenerate) = (0usize, -1.0, 0u8);
    let status = unsafe { eri_dominant_orientation(blank.as_ptr(), 28, 28, 18, &mut index, &mut psi, &mut degenerate) };
    assert_eq!(status, EriStatus::Ok);
    assert_eq!((index, psi, degenerate), (1, 0.0, 1));

    let g = grating(28, 28, 50.0);
    let status = unsafe { eri_dominant_orientation(g.data().as_ptr(), 28, 28, 18, &mut index, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(status, EriStatus::Ok);
    assert_eq!(index, 3);

    let img: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
    let mut half = vec![0.0; 12];
    let mut back = vec![0.0; 12];
    unsafe {
        assert_eq!(eri_rotate(img.as_ptr(), 4, 3, 180.0, half.as_mut_ptr()), EriStatus::Ok);
        assert_eq!(eri_rotate(half.as_ptr(), 4, 3, 180.0, back.as_mut_ptr()), EriStatus::Ok);
    }
    assert_eq!(half[0], img[11]);
    assert_eq!(back, img);
}

#[test]
fn header_is_generated_and_compiles() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/eri_rbm.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["eri_model_load", "eri_model_free", "eri_train", "ERI_STATUS_FORMAT", "typedef struct EriModel EriModel"] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // syntax check with a system C compiler when one is present
    if let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
