//! Track extraction from gaze rays cast through volumetric time-series images.
//!
//! The pipeline turns a *hedgehog* — the ordered set of gaze rays (*spines*)
//! recorded while an observer visually follows one object through a playing
//! 4D dataset — into a world-space track:
//!
//! 1. [`volume`] models the image data and samples intensities along rays,
//! 2. [`gaze`] holds the spine/hedgehog data model and plausibility filters,
//! 3. [`maxima`] detects candidate detections along each spine profile,
//! 4. [`linker`] chains nearest world-space maxima over time and prunes
//!    statistical outlier links,
//! 5. [`simulator`] generates synthetic scenes and smooth-pursuit gaze with
//!    exact ground truth,
//! 6. [`metrics`] scores recovered tracks against that truth.

pub mod error;
pub mod fsutil;
pub mod gaze;
pub mod linker;
pub mod maxima;
pub mod metrics;
pub mod simulator;
pub mod volume;

pub use error::{Error, Result};
