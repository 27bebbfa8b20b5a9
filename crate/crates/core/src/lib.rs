//! Rotation-invariant restricted Boltzmann machines for rotated digit images.
//!
//! The main model, [`eri::EriModel`], keeps one weight matrix per dominant
//! image orientation and shares CD gradients between matrices by rotating
//! update filters. Plain RBMs, per-orientation RBMs ([`baselines`]) and the
//! classifiers used to score extracted features live alongside it.

pub mod baselines;
pub mod classify;
pub mod cli;
pub mod data;
pub mod eri;
pub mod error;
pub mod imageops;
pub mod model_file;
pub mod orientation;
pub mod pipeline;
pub mod rbm;
pub mod synth;

pub use error::{Error, Result};
