//! Multi-layer salient object detection.
//!
//! The pipeline over-segments an image into superpixels at several scales. At
//! each scale it builds two coarse maps:
//!
//! 1. a background prior measuring each region's contrast against the regions
//!    touching the four image corners ([`corner`]),
//! 2. a foreground prior pooled from scored window proposals, recentred on the
//!    background-prior object centre and weighted by how well each window
//!    agrees with that map ([`objectness`]).
//!
//! Both maps are cleaned up by minimizing a quadratic energy on the superpixel
//! graph and fused into a single-layer map ([`energy`]). The single-layer maps
//! of all scales are then integrated with weights derived from their mutual
//! agreement, and the result is refined with a guided filter ([`multilayer`]).
//!
//! [`eval`] and [`synth`] provide a precision/recall harness and a synthetic
//! ground-truth corpus for regression testing.
//!
//! ```no_run
//! use saliency_core::{io, pipeline::{run_pipeline, PipelineConfig}};
//!
//! let img = io::read_image("input.png").unwrap();
//! let out = run_pipeline(&img, &PipelineConfig::default()).unwrap();
//! io::write_map("input_mlp.png", &out.mlp).unwrap();
//! ```

// `!(x > 0.0)` guards are meant to reject NaN too; index loops mirror the matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod affinity;
pub mod color;
pub mod corner;
pub mod energy;
mod error;
pub mod eval;
pub mod guided;
pub mod io;
pub mod multilayer;
pub mod objectness;
pub mod pipeline;
pub mod pixel;
pub mod region;
pub mod solver;
pub mod superpixel;
pub mod synth;

pub use error::{Error, Result};
pub use pixel::{LabImage, PixelMap, RgbImage};
pub use region::RegionSaliency;
