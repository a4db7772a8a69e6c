//! Depth-based detection and tracking on the ground plane.
//!
//! Valid depth pixels are lifted into the plane frame and accumulated into
//! an occupancy grid. Connected evidence blobs become object candidates,
//! which a constant-velocity Kalman tracker follows with gated Hungarian
//! association.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{Matrix2, Matrix2x4, Matrix4, Point3, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::assignment::{associate_hungarian, CostMatrix};
use crate::depth_lift::DepthMap;
use crate::geometry::{backproject, to_ground_frame, CameraIntrinsics, GroundPlane};
use crate::types::{BBox3D, Extent3, SourceId};
#[allow(unused_imports)]
use num_traits::Float;

pub const OCCUPANCY_SOURCE: &str = "occupancy3d";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Cell edge length, meters.
    pub cell_size: f64,
    /// Plane-frame `(x, y)` of the grid's lower corner.
    pub origin: [f64; 2],
    pub cols: usize,
    pub rows: usize,
    pub min_height: f64,
    pub max_height: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { cell_size: 0.1, origin: [-10.0, 0.0], cols: 200, rows: 200, min_height: 0.1, max_height: 2.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    cell_size: f64,
    origin: [f64; 2],
    cols: usize,
    rows: usize,
    evidence: Vec<f64>,
    max_height: Vec<f64>,
}

impl OccupancyGrid {
    pub fn empty(cfg: &GridConfig) -> Self {
        let n = cfg.cols * cfg.rows;
        Self {
            cell_size: cfg.cell_size,
            origin: cfg.origin,
            cols: cfg.cols,
            rows: cfg.rows,
            evidence: vec![0.0; n],
            max_height: vec![0.0; n],
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn evidence(&self, col: usize, row: usize) -> f64 {
        self.evidence[row * self.cols + col]
    }

    pub fn total_evidence(&self) -> f64 {
        self.evidence.iter().sum()
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let c = ((x - self.origin[0]) / self.cell_size).floor();
        let r = ((y - self.origin[1]) / self.cell_size).floor();
        if c < 0.0 || r < 0.0 || c >= self.cols as f64 || r >= self.rows as f64 {
            return None;
        }
        Some((c as usize, r as usize))
    }

    pub fn cell_center(&self, col: usize, row: usize) -> [f64; 2] {
        [
            self.origin[0] + (col as f64 + 0.5) * self.cell_size,
            self.origin[1] + (row as f64 + 0.5) * self.cell_size,
        ]
    }

    /// Column and row of the strongest cell.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let (i, v) = self.evidence.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        (*v > 0.0).then_some((i % self.cols, i / self.cols))
    }

    fn add(&mut self, x: f64, y: f64, height: f64, weight: f64) {
        if let Some((c, r)) = self.cell_of(x, y) {
            let i = r * self.cols + c;
            self.evidence[i] += weight;
            self.max_height[i] = self.max_height[i].max(height);
        }
    }
}

/// Accumulates depth pixels whose height lies in the configured band.
///
/// Each pixel adds `d² / (fx·fy) / cell_area`, the surface area it covers on
/// a fronto-parallel patch at depth `d`, normalized by the cell area.
pub fn build_occupancy(depth: &DepthMap, intr: &CameraIntrinsics, plane: &GroundPlane, cfg: &GridConfig) -> OccupancyGrid {
    let mut grid = OccupancyGrid::empty(cfg);
    let cell_area = cfg.cell_size * cfg.cell_size;
    for (u, v, d) in depth.valid_pixels() {
        let Ok(p) = backproject(intr, u as f64, v as f64, d) else {
            continue;
        };
        let q = to_ground_frame(plane, &p);
        if q.z < cfg.min_height || q.z > cfg.max_height {
            continue;
        }
        let weight = d * d / (intr.fx * intr.fy) / cell_area;
        grid.add(q.x, q.y, q.z, weight);
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub centroid: [f64; 2],
    /// Footprint `(x extent, y extent)`, meters.
    pub footprint: [f64; 2],
    pub height: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    /// Minimum per-cell evidence for a cell to join a component.
    pub evidence_threshold: f64,
    /// Components lighter than this are discarded.
    pub min_mass: f64,
    /// Expected footprint diameter of one person, meters.
    pub person_extent: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { evidence_threshold: 1.0, min_mass: 10.0, person_extent: 0.6 }
    }
}

/// 8-connected components of cells above the evidence threshold. Components
/// wider than twice the person prior are split at the deepest saddle of
/// their evidence profile along the wider axis.
pub fn cluster_occupancy(grid: &OccupancyGrid, cfg: &ClusterConfig) -> Vec<Cluster> {
    let (cols, rows) = (grid.cols, grid.rows);
    let mut label = vec![usize::MAX; cols * rows];
    let mut clusters = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..cols * rows {
        if label[start] != usize::MAX || grid.evidence[start] < cfg.evidence_threshold || grid.evidence[start] <= 0.0 {
            continue;
        }
        let id = start;
        label[start] = id;
        queue.push_back(start);
        let mut cells = Vec::new();
        while let Some(i) = queue.pop_front() {
            cells.push(i);
            let (c, r) = ((i % cols) as isize, (i / cols) as isize);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nc, nr) = (c + dc, r + dr);
                    if nc < 0 || nr < 0 || nc >= cols as isize || nr >= rows as isize {
                        continue;
                    }
                    let j = nr as usize * cols + nc as usize;
                    if label[j] == usize::MAX && grid.evidence[j] >= cfg.evidence_threshold && grid.evidence[j] > 0.0 {
                        label[j] = id;
                        queue.push_back(j);
                    }
                }
            }
        }
        split_component(grid, cells, cfg, &mut clusters, 0);
    }
    clusters.retain(|c| c.mass >= cfg.min_mass);
    clusters.sort_by(|a, b| a.centroid[0].total_cmp(&b.centroid[0]).then(a.centroid[1].total_cmp(&b.centroid[1])));
    clusters
}

fn split_component(grid: &OccupancyGrid, cells: Vec<usize>, cfg: &ClusterConfig, out: &mut Vec<Cluster>, depth: u32) {
    let cols = grid.cols;
    let (mut c0, mut c1, mut r0, mut r1) = (usize::MAX, 0, usize::MAX, 0);
    for &i in &cells {
        let (c, r) = (i % cols, i / cols);
        c0 = c0.min(c);
        c1 = c1.max(c);
        r0 = r0.min(r);
        r1 = r1.max(r);
    }
    let w = (c1 - c0 + 1) as f64 * grid.cell_size;
    let d = (r1 - r0 + 1) as f64 * grid.cell_size;
    if depth < 8 && w.max(d) > 2.0 * cfg.person_extent {
        let along_cols = w >= d;
        let (lo, hi) = if along_cols { (c0, c1) } else { (r0, r1) };
        let mut profile = vec![0.0; hi - lo + 1];
        for &i in &cells {
            let k = if along_cols { i % cols } else { i / cols };
            profile[k - lo] += grid.evidence[i];
        }
        if let Some(cut) = saddle(&profile) {
            let (left, right): (Vec<usize>, Vec<usize>) = cells.into_iter().partition(|&i| {
                let k = if along_cols { i % cols } else { i / cols };
                k - lo < cut
            });
            split_component(grid, left, cfg, out, depth + 1);
            split_component(grid, right, cfg, out, depth + 1);
            return;
        }
    }
    out.push(summarize(grid, &cells, (c0, c1, r0, r1)));
}

/// Index of the lowest bin between the two strongest local maxima, if that
/// bin is clearly below both peaks. Bins before the returned index form the
/// first part.
fn saddle(profile: &[f64]) -> Option<usize> {
    if profile.len() < 3 {
        return None;
    }
    let smooth: Vec<f64> = (0..profile.len())
        .map(|i| {
            let a = if i > 0 { profile[i - 1] } else { profile[i] };
            let b = profile.get(i + 1).copied().unwrap_or(profile[i]);
            0.25 * a + 0.5 * profile[i] + 0.25 * b
        })
        .collect();
    let mut peaks: Vec<usize> = (0..smooth.len())
        .filter(|&i| {
            let left = if i > 0 { smooth[i - 1] } else { f64::NEG_INFINITY };
            let right = smooth.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            smooth[i] > left && smooth[i] >= right
        })
        .collect();
    if peaks.len() < 2 {
        return None;
    }
    peaks.sort_by(|&a, &b| smooth[b].total_cmp(&smooth[a]));
    let (p, q) = (peaks[0].min(peaks[1]), peaks[0].max(peaks[1]));
    let (k, low) = (p + 1..q).map(|k| (k, smooth[k])).min_by(|a, b| a.1.total_cmp(&b.1))?;
    let floor = smooth[p].min(smooth[q]);
    (low < 0.7 * floor).then_some(k)
}

fn summarize(grid: &OccupancyGrid, cells: &[usize], bounds: (usize, usize, usize, usize)) -> Cluster {
    let (c0, c1, r0, r1) = bounds;
    let cols = grid.cols;
    let mut mass = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut height = 0.0f64;
    let (mut mc0, mut mc1, mut mr0, mut mr1) = (c1, c0, r1, r0);
    for &i in cells {
        let (c, r) = (i % cols, i / cols);
        let e = grid.evidence[i];
        let center = grid.cell_center(c, r);
        mass += e;
        cx += e * center[0];
        cy += e * center[1];
        height = height.max(grid.max_height[i]);
        mc0 = mc0.min(c);
        mc1 = mc1.max(c);
        mr0 = mr0.min(r);
        mr1 = mr1.max(r);
    }
    Cluster {
        centroid: [cx / mass, cy / mass],
        footprint: [
            (mc1 - mc0 + 1) as f64 * grid.cell_size,
            (mr1 - mr0 + 1) as f64 * grid.cell_size,
        ],
        height: height.max(grid.cell_size),
        mass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

/// Constant-velocity state `(x, y, vx, vy)` in the plane frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub state: Vector4<f64>,
    pub covariance: Matrix4<f64>,
    pub track_id: u64,
    pub age_frames: u32,
    pub hits: u32,
    pub misses: u32,
    pub status: TrackStatus,
    /// Last associated footprint `(x, y)` and height, for emitted boxes.
    pub shape: [f64; 3],
}

impl TrackState {
    pub fn new(track_id: u64, position: [f64; 2], position_var: f64, velocity_var: f64) -> Self {
        Self {
            state: Vector4::new(position[0], position[1], 0.0, 0.0),
            covariance: Matrix4::from_diagonal(&Vector4::new(position_var, position_var, velocity_var, velocity_var)),
            track_id,
            age_frames: 1,
            hits: 1,
            misses: 0,
            status: TrackStatus::Tentative,
            shape: [0.5, 0.5, 1.7],
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.state[0], self.state[1]]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.state[2], self.state[3]]
    }
}

/// Noise model: white acceleration with spectral density `accel_density`,
/// isotropic position measurement noise with standard deviation `measurement_std`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KalmanNoise {
    pub accel_density: f64,
    pub measurement_std: f64,
    pub initial_velocity_std: f64,
}

impl Default for KalmanNoise {
    fn default() -> Self {
        Self { accel_density: 1.0, measurement_std: 0.15, initial_velocity_std: 1.5 }
    }
}

fn symmetrize(p: &Matrix4<f64>) -> Matrix4<f64> {
    (p + p.transpose()) * 0.5
}

/// Constant-velocity prediction over `dt` seconds.
pub fn kalman_predict(track: &TrackState, dt: f64, accel_density: f64) -> TrackState {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    let q = accel_density;
    let (d2, d3) = (dt * dt / 2.0, dt * dt * dt / 3.0);
    let mut qm = Matrix4::zeros();
    for (p, v) in [(0, 2), (1, 3)] {
        qm[(p, p)] = q * d3;
        qm[(p, v)] = q * d2;
        qm[(v, p)] = q * d2;
        qm[(v, v)] = q * dt;
    }
    let mut out = track.clone();
    out.state = f * track.state;
    out.covariance = symmetrize(&(f * track.covariance * f.transpose() + qm));
    out
}

/// Position-only measurement update (Joseph form).
pub fn kalman_update(track: &TrackState, measurement: [f64; 2], measurement_var: f64) -> TrackState {
    let h = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let r = Matrix2::identity() * measurement_var;
    let p = &track.covariance;
    let s = h * p * h.transpose() + r;
    let Some(s_inv) = s.try_inverse() else {
        return track.clone();
    };
    let k = p * h.transpose() * s_inv;
    let innovation = Vector2::new(measurement[0], measurement[1]) - h * track.state;
    let ikh = Matrix4::identity() - k * h;
    let mut out = track.clone();
    out.state = track.state + k * innovation;
    out.covariance = symmetrize(&(ikh * p * ikh.transpose() + k * r * k.transpose()));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifecycleConfig {
    /// Maximum association distance, meters.
    pub gate: f64,
    pub confirm_hits: u32,
    pub max_misses: u32,
    /// Used when frames carry no timestamps.
    pub frame_rate: f64,
    pub noise: KalmanNoise,
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        Self { gate: 1.0, confirm_hits: 3, max_misses: 5, frame_rate: 10.0, noise: KalmanNoise::default() }
    }
}

/// Frame-to-frame tracker over occupancy clusters.
#[derive(Debug, Clone)]
pub struct OccupancyTracker {
    cfg: LifecycleConfig,
    tracks: Vec<TrackState>,
    next_id: u64,
}

impl OccupancyTracker {
    pub fn new(cfg: LifecycleConfig) -> Self {
        Self { cfg, tracks: Vec::new(), next_id: 1 }
    }

    pub fn config(&self) -> &LifecycleConfig {
        &self.cfg
    }

    /// Live (tentative or confirmed) tracks.
    pub fn tracks(&self) -> &[TrackState] {
        &self.tracks
    }

    /// Predict, associate, update, manage lifecycles. Returns one box per
    /// confirmed track that was associated in this frame.
    pub fn step(&mut self, clusters: &[Cluster], dt: f64, frame_index: u32) -> Vec<BBox3D> {
        let noise = self.cfg.noise;
        let dt = if dt > 0.0 { dt } else { 1.0 / self.cfg.frame_rate };
        for t in &mut self.tracks {
            *t = kalman_predict(t, dt, noise.accel_density);
            t.age_frames += 1;
        }
        let costs = CostMatrix::from_fn(self.tracks.len(), clusters.len(), |r, c| {
            let p = self.tracks[r].position();
            let q = clusters[c].centroid;
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
        });
        let assignment = associate_hungarian(&costs, self.cfg.gate);
        let var = noise.measurement_std * noise.measurement_std;
        let mut matched = vec![false; self.tracks.len()];
        for &(r, c) in &assignment.pairs {
            let cl = &clusters[c];
            let t = &mut self.tracks[r];
            *t = kalman_update(t, cl.centroid, var);
            t.hits += 1;
            t.misses = 0;
            t.shape = [cl.footprint[0], cl.footprint[1], cl.height];
            if t.status == TrackStatus::Tentative && t.hits >= self.cfg.confirm_hits {
                t.status = TrackStatus::Confirmed;
            }
            matched[r] = true;
        }
        for (t, m) in self.tracks.iter_mut().zip(&matched) {
            if !m {
                t.misses += 1;
                if t.misses >= self.cfg.max_misses {
                    t.status = TrackStatus::Deleted;
                }
            }
        }
        let mut emitted = Vec::new();
        for (t, m) in self.tracks.iter().zip(&matched) {
            if *m && t.status == TrackStatus::Confirmed {
                let [w, d, h] = t.shape;
                let p = t.position();
                emitted.push(BBox3D {
                    center: Point3::new(p[0], p[1], h / 2.0),
                    extent: Extent3::new(w, h, d),
                    yaw: 0.0,
                    confidence: 1.0,
                    source_id: SourceId::new(OCCUPANCY_SOURCE),
                    track_id: Some(t.track_id),
                    frame_index,
                });
            }
        }
        self.tracks.retain(|t| t.status != TrackStatus::Deleted);
        for c in &assignment.unassigned_cols {
            let cl = &clusters[*c];
            let mut t = TrackState::new(self.next_id, cl.centroid, var, noise.initial_velocity_std.powi(2));
            t.shape = [cl.footprint[0], cl.footprint[1], cl.height];
            if self.cfg.confirm_hits <= 1 {
                t.status = TrackStatus::Confirmed;
            }
            self.next_id += 1;
            self.tracks.push(t);
        }
        emitted
    }
}
