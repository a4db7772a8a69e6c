//! Gaussian-weighted box depth and lifting of 2D detections to 3D boxes.
//!
//! Depth inside a detection box is a weighted mean of the valid depth
//! samples, with a separable Gaussian centered on the box middle and one
//! standard deviation per box side. Objects tend to fill the box center, so
//! background pixels near the border contribute little.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{backproject, to_ground_frame, CameraIntrinsics, GroundPlane};
use crate::types::{BBox2D, BBox3D, Extent3, PixelWindow};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DepthError {
    #[error("pixel ({u}, {v}) lies outside a {width}x{height} box")]
    OutOfBox { u: u32, v: u32, width: u32, height: u32 },
    #[error("box has no valid depth sample")]
    NoValidDepth,
    #[error("box lies outside the image")]
    OutsideImage,
    #[error("depth estimate must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("depth map buffer has {got} samples, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

/// Per-pixel depth in meters with a validity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    depth: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    /// Samples that are not finite or not positive are marked invalid.
    pub fn new(width: u32, height: u32, depth: Vec<f64>) -> Result<Self, DepthError> {
        let expected = width as usize * height as usize;
        if depth.len() != expected {
            return Err(DepthError::SizeMismatch { expected, got: depth.len() });
        }
        let valid = depth.iter().map(|d| d.is_finite() && *d > 0.0).collect::<Vec<_>>();
        let depth = depth
            .into_iter()
            .zip(&valid)
            .map(|(d, ok)| if *ok { d } else { 0.0 })
            .collect();
        Ok(Self { width, height, depth, valid })
    }

    pub fn invalid(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        Self { width, height, depth: vec![0.0; n], valid: vec![false; n] }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> Option<f64>) -> Self {
        let mut depth = Vec::with_capacity(width as usize * height as usize);
        for v in 0..height {
            for u in 0..width {
                depth.push(f(u, v).unwrap_or(0.0));
            }
        }
        // length always matches
        Self::new(width, height, depth).unwrap_or_else(|_| Self::invalid(width, height))
    }

    /// Millimeter samples with `0` meaning invalid.
    pub fn from_millimeters(width: u32, height: u32, mm: &[u16]) -> Result<Self, DepthError> {
        Self::new(width, height, mm.iter().map(|&m| m as f64 / 1000.0).collect())
    }

    /// Millimeter samples, rounded, saturating at `u16::MAX`; invalid → 0.
    pub fn to_millimeters(&self) -> Vec<u16> {
        self.depth
            .iter()
            .zip(&self.valid)
            .map(|(d, ok)| if *ok { (d * 1000.0).round().clamp(1.0, u16::MAX as f64) as u16 } else { 0 })
            .collect()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, u: u32, v: u32) -> Option<f64> {
        if u >= self.width || v >= self.height {
            return None;
        }
        let i = v as usize * self.width as usize + u as usize;
        if self.valid[i] {
            Some(self.depth[i])
        } else {
            None
        }
    }

    pub fn set(&mut self, u: u32, v: u32, depth: Option<f64>) {
        if u >= self.width || v >= self.height {
            return;
        }
        let i = v as usize * self.width as usize + u as usize;
        match depth {
            Some(d) if d.is_finite() && d > 0.0 => {
                self.depth[i] = d;
                self.valid[i] = true;
            }
            _ => {
                self.depth[i] = 0.0;
                self.valid[i] = false;
            }
        }
    }

    /// Valid samples as `(u, v, depth)` in row-major order.
    pub fn valid_pixels(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let w = self.width as usize;
        self.depth
            .iter()
            .zip(&self.valid)
            .enumerate()
            .filter(|(_, (_, ok))| **ok)
            .map(move |(i, (d, _))| ((i % w) as u32, (i / w) as u32, *d))
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Kernel weight at box-local pixel `(u, v)` for a `w_bb × h_bb` box.
pub fn gaussian_weight(u: u32, v: u32, w_bb: u32, h_bb: u32) -> Result<f64, DepthError> {
    if u >= w_bb || v >= h_bb {
        return Err(DepthError::OutOfBox { u, v, width: w_bb, height: h_bb });
    }
    Ok(kernel(u as f64, v as f64, w_bb as f64, h_bb as f64))
}

#[inline]
fn kernel(u: f64, v: f64, w: f64, h: f64) -> f64 {
    let du = u - w / 2.0;
    let dv = v - h / 2.0;
    let norm = 1.0 / (2.0 * PI * (w * h).sqrt());
    norm * (-(du * du / (2.0 * w * w) + dv * dv / (2.0 * h * h))).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthEstimate {
    pub depth: f64,
    /// Sum of kernel weights over valid pixels.
    pub weight_sum: f64,
}

/// Weighted depth of the pixels under `bbox` (clamped to the image).
pub fn estimate_box_depth(depth: &DepthMap, bbox: &BBox2D) -> Result<DepthEstimate, DepthError> {
    let window = bbox.pixel_window(depth.width(), depth.height()).ok_or(DepthError::OutsideImage)?;
    estimate_window_depth(depth, window)
}

pub fn estimate_window_depth(depth: &DepthMap, window: PixelWindow) -> Result<DepthEstimate, DepthError> {
    let (w, h) = (window.width as f64, window.height as f64);
    weighted_depth(depth, window, |u, v| kernel(u as f64, v as f64, w, h))
}

/// Normalized weighted mean over the window for an arbitrary kernel.
pub(crate) fn weighted_depth(
    depth: &DepthMap,
    window: PixelWindow,
    weight: impl Fn(u32, u32) -> f64,
) -> Result<DepthEstimate, DepthError> {
    let mut weight_sum = 0.0;
    let mut acc = 0.0;
    for v in 0..window.height {
        for u in 0..window.width {
            if let Some(d) = depth.get(window.u0 + u, window.v0 + v) {
                let w = weight(u, v);
                weight_sum += w;
                acc += w * d;
            }
        }
    }
    if !(weight_sum > 0.0) {
        return Err(DepthError::NoValidDepth);
    }
    Ok(DepthEstimate { depth: acc / weight_sum, weight_sum })
}

/// Lifts a 2D box to a plane-frame 3D box.
///
/// `surface_depth` is the depth of the object surface facing the camera; the
/// box center is placed half a box depth further along the viewing ray and
/// the box depth is set equal to its width.
pub fn lift_bbox(
    bbox: &BBox2D,
    surface_depth: f64,
    intr: &CameraIntrinsics,
    plane: &GroundPlane,
) -> Result<BBox3D, DepthError> {
    if !(surface_depth > 0.0) || !surface_depth.is_finite() {
        return Err(DepthError::NonPositiveDepth(surface_depth));
    }
    let window = bbox.pixel_window(intr.width, intr.height).ok_or(DepthError::OutsideImage)?;
    let (w_bb, h_bb) = (window.width as f64, window.height as f64);
    let uc = window.u0 as f64 + w_bb / 2.0;
    let vc = window.v0 as f64 + h_bb / 2.0;
    let width = w_bb * surface_depth / intr.fx;
    let height = h_bb * surface_depth / intr.fy;
    let extent = Extent3::new(width, height, width);

    let surface = backproject(intr, uc, vc, surface_depth).map_err(|_| DepthError::NonPositiveDepth(surface_depth))?;
    let ray = surface.coords.normalize();
    let center_cam = surface + ray * (extent.depth / 2.0);
    let center = to_ground_frame(plane, &center_cam);

    Ok(BBox3D {
        center,
        extent,
        yaw: 0.0,
        confidence: bbox.confidence,
        source_id: bbox.source_id.clone(),
        track_id: bbox.track_id,
        frame_index: 0,
    })
}

/// Estimates depth and lifts in one step.
pub fn lift_detection(
    depth: &DepthMap,
    bbox: &BBox2D,
    intr: &CameraIntrinsics,
    plane: &GroundPlane,
) -> Result<BBox3D, DepthError> {
    let est = estimate_box_depth(depth, bbox)?;
    lift_bbox(bbox, est.depth, intr, plane)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    #[test]
    fn kernel_center_value() {
        let w = gaussian_weight(50, 50, 100, 100).unwrap();
        assert_relative_eq!(w, 1.0 / (2.0 * PI * 100.0), max_relative = 1e-15);
        let w = gaussian_weight(20, 10, 40, 20).unwrap();
        assert_relative_eq!(w, 1.0 / (2.0 * PI * 800f64.sqrt()), max_relative = 1e-15);
    }

    #[test]
    fn kernel_edge_value() {
        // independent scalar evaluation: du = -50, sigma = 100 -> exponent -2500/20000 = -1/8
        let center = 1.0 / (2.0 * PI * 100.0);
        let expected = center * libm_exp(-0.125);
        assert_relative_eq!(gaussian_weight(0, 50, 100, 100).unwrap(), expected, max_relative = 1e-14);
    }

    fn libm_exp(x: f64) -> f64 {
        x.exp()
    }

    #[test]
    fn kernel_rejects_outside() {
        assert!(matches!(gaussian_weight(100, 0, 100, 100), Err(DepthError::OutOfBox { .. })));
        assert!(gaussian_weight(0, 7, 5, 7).is_err());
    }

    #[test]
    fn corner_weight_below_center() {
        for (w, h) in [(1, 1), (2, 3), (17, 40), (300, 10)] {
            let c = gaussian_weight(w / 2, h / 2, w, h).unwrap();
            let corner = gaussian_weight(0, 0, w, h).unwrap();
            assert!(corner <= c);
            if w > 1 || h > 1 {
                assert!(corner < c);
            }
        }
    }

    #[test]
    fn constant_depth() {
        let map = DepthMap::from_fn(20, 20, |_, _| Some(5.0));
        let est = estimate_box_depth(&map, &BBox2D::new(2.0, 3.0, 10.0, 12.0)).unwrap();
        assert_relative_eq!(est.depth, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn all_invalid() {
        let map = DepthMap::invalid(20, 20);
        assert!(matches!(
            estimate_box_depth(&map, &BBox2D::new(2.0, 3.0, 10.0, 12.0)),
            Err(DepthError::NoValidDepth)
        ));
    }

    #[test]
    fn three_by_three_rows() {
        let rows = [2.0, 4.0, 6.0];
        let map = DepthMap::from_fn(3, 3, |_, v| Some(rows[v as usize]));
        let est = estimate_box_depth(&map, &BBox2D::new(0.0, 0.0, 3.0, 3.0)).unwrap();
        // hand summation: row weights depend on (v - 1.5)^2 / 18
        let row_w = |v: f64| (-((v - 1.5) * (v - 1.5)) / 18.0).exp();
        let col_w: f64 = (0..3).map(|u| (-((u as f64 - 1.5).powi(2)) / 18.0).exp()).sum();
        let num: f64 = (0..3).map(|v| row_w(v as f64) * col_w * rows[v]).sum();
        let den: f64 = (0..3).map(|v| row_w(v as f64) * col_w).sum();
        assert_relative_eq!(est.depth, num / den, max_relative = 1e-12);
        assert!(est.depth > 2.0 && est.depth < 6.0);
    }

    #[test]
    fn lift_extent_example() {
        let intr = CameraIntrinsics::new(1000.0, 1000.0, 640.0, 360.0, 1280, 720).unwrap();
        let plane = GroundPlane::from_normal_offset(Vector3::new(0.0, -1.0, 0.0), -3.0).unwrap();
        let b = BBox2D::new(640.0 - 125.0, 360.0 - 250.0, 250.0, 500.0);
        let lifted = lift_bbox(&b, 4.0, &intr, &plane).unwrap();
        assert_relative_eq!(lifted.extent.width, 1.0, epsilon = 1e-12);
        assert_relative_eq!(lifted.extent.height, 2.0, epsilon = 1e-12);
        assert_relative_eq!(lifted.extent.depth, 1.0, epsilon = 1e-12);
        // 4 m surface + 0.5 m push back along the optical axis
        assert_relative_eq!(lifted.center.y, 4.5, epsilon = 1e-9);
        assert_relative_eq!(lifted.center.z, 3.0, epsilon = 1e-9);
        assert!(lift_bbox(&b, 0.0, &intr, &plane).is_err());
    }

    #[test]
    fn millimeter_round_trip() {
        let mm = [1000u16, 2000, 0, 4000];
        let map = DepthMap::from_millimeters(2, 2, &mm).unwrap();
        assert_eq!(map.get(0, 0), Some(1.0));
        assert_eq!(map.get(0, 1), None);
        assert_eq!(map.get(1, 1), Some(4.0));
        assert_eq!(map.to_millimeters(), mm.to_vec());
        assert!(DepthMap::from_millimeters(2, 2, &mm[..3]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn weight_scaling_cancels(scale in 1e-6f64..1e6, seed in 0u64..1000, w in 1u32..20, h in 1u32..20) {
            let map = DepthMap::from_fn(20, 20, |u, v| {
                let k = (u as u64 * 31 + v as u64 * 17 + seed) % 11;
                (k != 0).then_some(1.0 + k as f64 * 0.7)
            });
            let window = PixelWindow { u0: 0, v0: 0, width: w, height: h };
            let base = weighted_depth(&map, window, |u, v| gaussian_weight(u, v, w, h).unwrap());
            let scaled = weighted_depth(&map, window, |u, v| scale * gaussian_weight(u, v, w, h).unwrap());
            match (base, scaled) {
                (Ok(a), Ok(b)) => proptest::prop_assert!((a.depth - b.depth).abs() <= 1e-12 * a.depth),
                (a, b) => proptest::prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }
}
