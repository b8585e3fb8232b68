//! Camera degradation synthesis, full-reference image quality, panoptic
//! quality and correlation analysis for robustness benchmarks.

pub mod bench;
pub mod correlate;
pub mod degrade;
pub mod depth;
pub mod error;
pub mod image;
pub mod io;
pub mod iqa;
pub mod kernel;
pub mod panoptic;
pub mod pq;
pub mod resize;
pub mod seed;

pub use degrade::{apply_degradation, DegradationSpec, Factor, Severity};
pub use depth::{load_depth, DepthIngest, DepthMap, DepthMode};
pub use error::{Error, Result};
pub use image::ImageBuffer;
pub use io::{load_image, save_image, ImageFormat};
pub use panoptic::{load_panoptic, save_panoptic, PanopticMap, SegmentInfo};
pub use resize::resize_bicubic;
pub use seed::derive_seed;
