//! Preprocessing, classification and evaluation for color fundus photographs.
//!
//! The pipeline runs in four stages:
//!
//! * [`fov`] locates the circular field of view with a robust direct
//!   least-squares ellipse fit.
//! * [`imaging`] equalizes intensity without shifting hue, masks the
//!   background and resamples to a fixed square size.
//! * [`model`] is a small convolutional classifier with a softmax head,
//!   trained with Adam and early stopping.
//! * [`stats`] computes empirical ROC curves, Mann-Whitney AUC with DeLong
//!   confidence intervals, confusion matrices and Cohen's Kappa.
//!
//! [`dataset`] handles manifests, stratified splitting, augmentation and a
//! synthetic image generator used for end-to-end testing.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the precision used by the pipeline itself.

pub mod dataset;
pub mod error;
pub mod fov;
pub mod imaging;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Field-of-view geometry in pixel coordinates.
pub type Ellipse = fov::Ellipse<f64>;
/// Implicit conic produced by the direct fit.
pub type Conic = fov::ConicCoefficients<f64>;
/// A 2-D point in pixel coordinates.
pub type Point = fov::Point<f64>;
/// Learnable weights, stored in single precision.
pub type ModelParams = model::Params<f32>;
/// Adam moments matching [`ModelParams`].
pub type AdamState = model::AdamState<f32>;
/// Classifier output paired with ground truth.
pub type ScoredCase = stats::ScoredCase<f64>;
/// Cohen's Kappa with its null-hypothesis test.
pub type KappaResult = stats::KappaResult<f64>;
