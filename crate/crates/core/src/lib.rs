//! Benchmark harness and processing pipeline for scene text detection and
//! recognition on egocentric imagery.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: box algebra, IoU and the line/gap merge heuristic.
//! * [`raster`] and [`photometry`]: 8-bit images and the lighting metrics.
//! * [`preprocess`]: upscaling and brightness enhancement.
//! * [`engines`]: detector/recognizer contracts, mock engines, the
//!   detect → merge → recognize pipeline and a parallel batch runner.
//! * [`evaluation`]: CER, IoU-thresholded matching and aggregation.
//! * [`gaze`]: gaze alignment and gaze-window processing.
//! * [`dataset`]: ground-truth JSON, manifests and the synthetic poster generator.
//! * [`analysis`]: correlation matrices, condition summaries and reports.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod dataset;
pub mod engines;
pub mod error;
pub mod evaluation;
pub mod gaze;
pub mod geometry;
pub mod io;
pub mod par;
pub mod photometry;
pub mod preprocess;
pub mod raster;

mod font;

pub use error::{Error, Result};
pub use geometry::{BBox, MergeMode, MergeParams, ScoredBox};
pub use raster::{Channels, Image};
