//! Multi-camera pedestrian tracking core: depth lifting, ground-plane
//! calibration, occupancy tracking, late fusion and MOT metrics.
#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assignment;
pub mod depth_lift;
pub mod fusion;
pub mod geometry;
pub mod metrics;
pub mod occupancy;
pub mod plane_calib;
pub mod sweep;
pub mod synth;
pub mod types;

pub use geometry::{CameraIntrinsics, GeometryError, GroundPlane, StereoRig};
pub use nalgebra;
pub use nalgebra::{Point3, Vector3};
pub use types::{BBox2D, BBox3D, ClassLabel, Extent3, Occlusion, SourceId};
