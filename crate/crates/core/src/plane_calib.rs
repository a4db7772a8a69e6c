//! Automated ground-plane calibration.
//!
//! Pedestrian detections collected during a calibration phase mark the
//! image regions people walk on. Depth points inside those regions are fed
//! to a seeded RANSAC plane fit, and the result is checked against priors on
//! the camera mounting height and the platform width.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{Matrix3, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::depth_lift::DepthMap;
use crate::geometry::{backproject, to_ground_frame, CameraIntrinsics, GroundPlane};
use crate::types::BBox2D;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PlaneError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("no consensus: best inlier fraction {fraction:.3} below {required:.3}")]
    NoConsensus { fraction: f64, required: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Per-pixel count of detection foot strips.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkableMask {
    width: u32,
    height: u32,
    counts: Vec<u32>,
    threshold: u32,
    frame_count: u32,
}

impl WalkableMask {
    pub const DEFAULT_THRESHOLD: u32 = 3;

    pub fn new(width: u32, height: u32, threshold: u32) -> Self {
        Self {
            width,
            height,
            counts: vec![0; width as usize * height as usize],
            threshold,
            frame_count: 0,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn frame_count(&self) -> u32 {
        self.frame_count
    }

    pub fn count(&self, u: u32, v: u32) -> u32 {
        if u >= self.width || v >= self.height {
            return 0;
        }
        self.counts[v as usize * self.width as usize + u as usize]
    }

    pub fn is_walkable(&self, u: u32, v: u32) -> bool {
        self.count(u, v) >= self.threshold && self.threshold > 0
    }

    pub fn walkable_count(&self) -> usize {
        self.counts.iter().filter(|c| **c >= self.threshold && self.threshold > 0).count()
    }

    /// Adds one frame of detections: the bottom tenth of every box
    /// (at least one row) is counted once.
    pub fn accumulate(&mut self, detections: &[BBox2D]) {
        self.frame_count += 1;
        for det in detections {
            let Some(win) = det.pixel_window(self.width, self.height) else {
                continue;
            };
            let strip = win.height.div_ceil(10).max(1);
            let v_start = win.v0 + win.height - strip;
            for v in v_start..win.v0 + win.height {
                let row = v as usize * self.width as usize;
                for u in win.u0..win.u0 + win.width {
                    self.counts[row + u as usize] += 1;
                }
            }
        }
    }
}

/// Functional form of [`WalkableMask::accumulate`].
pub fn accumulate_walkable(mut mask: WalkableMask, detections: &[BBox2D]) -> WalkableMask {
    mask.accumulate(detections);
    mask
}

/// Backprojects walkable pixels that are not covered by any of `occluders`.
/// `stride` subsamples the pixel grid.
pub fn walkable_points(
    mask: &WalkableMask,
    depth: &DepthMap,
    intr: &CameraIntrinsics,
    occluders: &[BBox2D],
    stride: u32,
) -> Vec<Point3<f64>> {
    let stride = stride.max(1);
    let windows: Vec<_> = occluders.iter().filter_map(|b| b.pixel_window(depth.width(), depth.height())).collect();
    let mut out = Vec::new();
    for v in (0..depth.height().min(mask.height)).step_by(stride as usize) {
        for u in (0..depth.width().min(mask.width)).step_by(stride as usize) {
            if !mask.is_walkable(u, v) {
                continue;
            }
            let covered = windows
                .iter()
                .any(|w| u >= w.u0 && u < w.u0 + w.width && v >= w.v0 && v < w.v0 + w.height);
            if covered {
                continue;
            }
            if let Some(d) = depth.get(u, v) {
                if let Ok(p) = backproject(intr, u as f64, v as f64, d) {
                    out.push(p);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlaneFitConfig {
    pub ransac_iterations: u32,
    /// Meters.
    pub inlier_threshold: f64,
    pub min_inlier_fraction: f64,
    /// Accepted camera heights above the plane, meters.
    pub prior_mount_height_range: (f64, f64),
    /// Maximum inlier span perpendicular to the train, meters.
    pub prior_max_platform_width: f64,
    /// Optional bound on the distance from the camera foot to the nearest
    /// inlier along the axis perpendicular to the train. Disabled by default.
    pub prior_max_train_gap: Option<f64>,
    pub rng_seed: u64,
}

impl Default for PlaneFitConfig {
    fn default() -> Self {
        Self {
            ransac_iterations: 1000,
            inlier_threshold: 0.02,
            min_inlier_fraction: 0.3,
            prior_mount_height_range: (2.0, 4.0),
            prior_max_platform_width: 8.0,
            prior_max_train_gap: None,
            rng_seed: 0,
        }
    }
}

impl PlaneFitConfig {
    pub fn validate(&self) -> Result<(), PlaneError> {
        if self.ransac_iterations < 1 {
            return Err(PlaneError::InvalidConfig("ransac_iterations must be at least 1"));
        }
        if !(self.inlier_threshold > 0.0) {
            return Err(PlaneError::InvalidConfig("inlier_threshold must be positive"));
        }
        if !(0.0..=1.0).contains(&self.min_inlier_fraction) {
            return Err(PlaneError::InvalidConfig("min_inlier_fraction must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFit {
    /// Least-squares plane over `inliers`, normal oriented towards the camera.
    pub plane: GroundPlane,
    /// Indices into the caller's point slice, ascending.
    pub inliers: Vec<usize>,
    /// Inlier count of the winning RANSAC hypothesis before refinement.
    pub consensus: usize,
    pub inlier_fraction: f64,
    /// RMS point-to-plane distance of the inliers.
    pub rms: f64,
}

/// Seeded RANSAC plane fit followed by least-squares refinement.
///
/// Points are sorted canonically before sampling, so the result does not
/// depend on input order. Iteration `i` draws its sample from a ChaCha
/// stream `i` of `rng_seed`.
pub fn ransac_plane_fit(points: &[Point3<f64>], cfg: &PlaneFitConfig) -> Result<PlaneFit, PlaneError> {
    cfg.validate()?;
    if points.len() < 3 {
        return Err(PlaneError::DegenerateInput("at least 3 points are required"));
    }
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
        return Err(PlaneError::DegenerateInput("non-finite point"));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (&points[a], &points[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z))
    });
    let sorted: Vec<Point3<f64>> = order.iter().map(|&i| points[i]).collect();

    if is_collinear(&sorted) {
        return Err(PlaneError::DegenerateInput("points are collinear"));
    }

    let n = sorted.len();
    let mut best: Option<(usize, Vector3<f64>, f64)> = None;
    for iter in 0..cfg.ransac_iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        rng.set_stream(iter as u64);
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let mut c = rng.random_range(0..n - 2);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if c >= lo {
            c += 1;
        }
        if c >= hi {
            c += 1;
        }
        let Some((normal, offset)) = plane_through(&sorted[a], &sorted[b], &sorted[c]) else {
            continue;
        };
        let count = sorted
            .iter()
            .filter(|p| (normal.dot(&p.coords) - offset).abs() <= cfg.inlier_threshold)
            .count();
        if best.is_none_or(|(bc, _, _)| count > bc) {
            best = Some((count, normal, offset));
        }
    }
    let Some((consensus, normal, offset)) = best else {
        return Err(PlaneError::DegenerateInput("no non-degenerate sample found"));
    };

    let mut inliers = inlier_indices(&sorted, &normal, offset, cfg.inlier_threshold);
    let (mut normal, mut offset) = least_squares_plane(&sorted, &inliers).unwrap_or((normal, offset));
    for _ in 0..5 {
        let grown = inlier_indices(&sorted, &normal, offset, cfg.inlier_threshold);
        if grown.len() <= inliers.len() {
            break;
        }
        let Some((n2, o2)) = least_squares_plane(&sorted, &grown) else {
            break;
        };
        inliers = grown;
        normal = n2;
        offset = o2;
    }

    let fraction = inliers.len() as f64 / n as f64;
    if fraction < cfg.min_inlier_fraction {
        return Err(PlaneError::NoConsensus { fraction, required: cfg.min_inlier_fraction });
    }
    let rms = (inliers
        .iter()
        .map(|&i| (normal.dot(&sorted[i].coords) - offset).powi(2))
        .sum::<f64>()
        / inliers.len() as f64)
        .sqrt();
    let plane = GroundPlane::from_normal_offset(normal, offset)
        .map_err(|_| PlaneError::DegenerateInput("refit produced a degenerate normal"))?
        .oriented_towards_camera();

    let mut original: Vec<usize> = inliers.iter().map(|&i| order[i]).collect();
    original.sort_unstable();
    Ok(PlaneFit { plane, inliers: original, consensus, inlier_fraction: fraction, rms })
}

fn inlier_indices(points: &[Point3<f64>], normal: &Vector3<f64>, offset: f64, threshold: f64) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| (normal.dot(&p.coords) - offset).abs() <= threshold)
        .map(|(i, _)| i)
        .collect()
}

fn plane_through(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> Option<(Vector3<f64>, f64)> {
    let ab = b - a;
    let ac = c - a;
    let cross = ab.cross(&ac);
    let scale = ab.norm() * ac.norm();
    let norm = cross.norm();
    if !(norm > 1e-9 * scale) || scale == 0.0 {
        return None;
    }
    let n = cross / norm;
    Some((n, n.dot(&a.coords)))
}

fn centroid_and_scatter(points: &[Point3<f64>], idx: impl Iterator<Item = usize> + Clone) -> (Vector3<f64>, Matrix3<f64>) {
    let mut count = 0usize;
    let mut sum = Vector3::zeros();
    for i in idx.clone() {
        sum += points[i].coords;
        count += 1;
    }
    let centroid = sum / count.max(1) as f64;
    let mut scatter = Matrix3::zeros();
    for i in idx {
        let d = points[i].coords - centroid;
        scatter += d * d.transpose();
    }
    (centroid, scatter)
}

/// Total least squares: normal is the smallest-eigenvalue eigenvector of the scatter.
fn least_squares_plane(points: &[Point3<f64>], idx: &[usize]) -> Option<(Vector3<f64>, f64)> {
    if idx.len() < 3 {
        return None;
    }
    let (centroid, scatter) = centroid_and_scatter(points, idx.iter().copied());
    let eig = scatter.symmetric_eigen();
    let (mut k, mut min) = (0, f64::INFINITY);
    for (i, &e) in eig.eigenvalues.iter().enumerate() {
        if e < min {
            min = e;
            k = i;
        }
    }
    let n = eig.eigenvectors.column(k).into_owned();
    let norm = n.norm();
    if !(norm > 0.0) {
        return None;
    }
    let n = n / norm;
    Some((n, n.dot(&centroid)))
}

fn is_collinear(points: &[Point3<f64>]) -> bool {
    let (_, scatter) = centroid_and_scatter(points, 0..points.len());
    let mut ev: Vec<f64> = scatter.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    let largest = ev[2];
    !(largest > 0.0) || ev[1] <= 1e-12 * largest
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MountHeight,
    PlatformWidth,
    TrainProximity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum PlaneValidation {
    Accept,
    Reject { reason: RejectReason, value: f64 },
}

impl PlaneValidation {
    pub fn is_accept(&self) -> bool {
        matches!(self, PlaneValidation::Accept)
    }
}

/// Checks a fitted plane against the calibration priors. The camera center
/// is the camera-frame origin; the axis perpendicular to the train is the
/// plane-frame `y` axis (horizontal viewing direction).
pub fn validate_plane(plane: &GroundPlane, inlier_points: &[Point3<f64>], cfg: &PlaneFitConfig) -> PlaneValidation {
    let h = plane.camera_height();
    let (lo, hi) = cfg.prior_mount_height_range;
    if !(h >= lo && h <= hi) {
        return PlaneValidation::Reject { reason: RejectReason::MountHeight, value: h };
    }
    if inlier_points.is_empty() {
        return PlaneValidation::Accept;
    }
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in inlier_points {
        let y = to_ground_frame(plane, p).y;
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let span = max_y - min_y;
    if span > cfg.prior_max_platform_width {
        return PlaneValidation::Reject { reason: RejectReason::PlatformWidth, value: span };
    }
    if let Some(gap) = cfg.prior_max_train_gap {
        if min_y > gap {
            return PlaneValidation::Reject { reason: RejectReason::TrainProximity, value: min_y };
        }
    }
    PlaneValidation::Accept
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_detections_leave_mask() {
        let mask = WalkableMask::new(10, 10, 3);
        let after = accumulate_walkable(mask.clone(), &[]);
        assert_eq!(after.count(3, 3), 0);
        assert_eq!(after.frame_count(), 1);
        assert_eq!(mask.walkable_count(), after.walkable_count());
    }

    #[test]
    fn foot_strip_rows() {
        let mut mask = WalkableMask::new(50, 120, 1);
        mask.accumulate(&[BBox2D::new(10.0, 0.0, 20.0, 100.0)]);
        for v in 0..120 {
            for u in 0..50 {
                let expect = (90..100).contains(&v) && (10..30).contains(&u);
                assert_eq!(mask.count(u, v) == 1, expect, "({u},{v})");
            }
        }
    }

    #[test]
    fn overlapping_boxes_add() {
        let mut mask = WalkableMask::new(50, 50, 3);
        let b = BBox2D::new(5.0, 5.0, 10.0, 20.0);
        mask.accumulate(&[b.clone(), b.clone(), b]);
        assert_eq!(mask.count(8, 24), 3);
        assert!(mask.is_walkable(8, 24));
        assert!(!mask.is_walkable(8, 10));
    }

    fn grid_on_plane() -> Vec<Point3<f64>> {
        // z-up plane at height 3.5 in a frame with z pointing up
        let mut pts = Vec::new();
        for i in 0..40 {
            for j in 0..25 {
                pts.push(Point3::new(i as f64 * 0.1, j as f64 * 0.13 - 1.0, 3.5));
            }
        }
        pts
    }

    #[test]
    fn exact_plane() {
        let fit = ransac_plane_fit(&grid_on_plane(), &PlaneFitConfig::default()).unwrap();
        let n = fit.plane.normal();
        assert!((n - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-6, "{n}");
        assert_relative_eq!(fit.plane.camera_height(), 3.5, epsilon = 1e-9);
        assert_eq!(fit.inliers.len(), 1000);
    }

    #[test]
    fn too_few_points() {
        let pts = [Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 1.0)];
        assert!(matches!(ransac_plane_fit(&pts, &PlaneFitConfig::default()), Err(PlaneError::DegenerateInput(_))));
    }

    #[test]
    fn collinear_points() {
        let pts: Vec<_> = (0..20).map(|i| Point3::new(i as f64, 2.0 * i as f64, 1.0)).collect();
        assert!(matches!(ransac_plane_fit(&pts, &PlaneFitConfig::default()), Err(PlaneError::DegenerateInput(_))));
    }

    #[test]
    fn no_consensus() {
        // points scattered through a cube: no plane holds 90% of them
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    pts.push(Point3::new(i as f64, j as f64, k as f64 + 1.0));
                }
            }
        }
        let cfg = PlaneFitConfig { min_inlier_fraction: 0.9, ransac_iterations: 50, ..Default::default() };
        assert!(matches!(ransac_plane_fit(&pts, &cfg), Err(PlaneError::NoConsensus { .. })));
    }

    fn horizontal_plane(height: f64) -> GroundPlane {
        GroundPlane::from_normal_offset(Vector3::new(0.0, -1.0, 0.0), -height).unwrap()
    }

    #[test]
    fn validation_priors() {
        let cfg = PlaneFitConfig { prior_mount_height_range: (2.0, 4.0), prior_max_platform_width: 8.0, ..Default::default() };
        assert!(validate_plane(&horizontal_plane(3.0), &[], &cfg).is_accept());
        assert!(matches!(
            validate_plane(&horizontal_plane(0.5), &[], &cfg),
            PlaneValidation::Reject { reason: RejectReason::MountHeight, .. }
        ));
        // inliers spanning 12 m away from the camera
        let pts = [Point3::new(0.0, 3.0, 1.0), Point3::new(0.0, 3.0, 13.0)];
        match validate_plane(&horizontal_plane(3.0), &pts, &cfg) {
            PlaneValidation::Reject { reason: RejectReason::PlatformWidth, value } => {
                assert_relative_eq!(value, 12.0, epsilon = 1e-9)
            }
            other => panic!("{other:?}"),
        }
        let gap_cfg = PlaneFitConfig { prior_max_train_gap: Some(0.5), ..cfg };
        let far = [Point3::new(0.0, 3.0, 4.0), Point3::new(0.0, 3.0, 6.0)];
        assert!(matches!(
            validate_plane(&horizontal_plane(3.0), &far, &gap_cfg),
            PlaneValidation::Reject { reason: RejectReason::TrainProximity, .. }
        ));
        assert!(validate_plane(&horizontal_plane(3.0), &far, &cfg).is_accept());
    }

    #[test]
    fn config_validation() {
        let cfg = PlaneFitConfig { ransac_iterations: 0, ..Default::default() };
        assert!(matches!(ransac_plane_fit(&grid_on_plane(), &cfg), Err(PlaneError::InvalidConfig(_))));
        let cfg = PlaneFitConfig { inlier_threshold: 0.0, ..Default::default() };
        assert!(ransac_plane_fit(&grid_on_plane(), &cfg).is_err());
    }
}
