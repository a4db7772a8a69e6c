//! Synthetic platform scenes and detector degradation.
//!
//! Agents are upright boxes walking on a flat ground plane in front of a
//! single pitched camera. Rendering is exact ray casting; ground truth is
//! available both as projected image boxes and as plane-frame boxes.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{Point3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::depth_lift::DepthMap;
use crate::metrics::{GtObject, Region};
use crate::geometry::{from_ground_frame, project, CameraIntrinsics, GroundPlane};
use crate::types::{AnnotationRecord, BBox2D, BBox3D, CameraView, ClassLabel, Extent3, Occlusion, SourceId};

/// Depths beyond this are reported invalid.
pub const MAX_RENDER_DEPTH: f64 = 60.0;

pub const GT_SOURCE: &str = "gt";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid camera: {0}")]
    Camera(#[from] crate::geometry::GeometryError),
    #[error("agent {id} leaves the camera frustum at frame {frame}")]
    OutOfFrustum { id: u64, frame: u32 },
    #[error("agent {id} has a non-positive extent or empty lifespan")]
    InvalidAgent { id: u64 },
    #[error("{name} = {value} is outside its valid range")]
    InvalidParameter { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthCamera {
    pub intrinsics: CameraIntrinsics,
    /// Height of the optical center above the ground, meters.
    pub height_m: f64,
    /// Downward tilt of the optical axis, degrees.
    pub pitch_deg: f64,
}

impl SynthCamera {
    /// Ground plane in the camera frame, normal pointing up.
    pub fn plane(&self) -> Result<GroundPlane, SynthError> {
        let t = self.pitch_deg.to_radians();
        let up = Vector3::new(0.0, -t.cos(), -t.sin());
        Ok(GroundPlane::from_normal_offset(up, -self.height_m)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthAgent {
    pub id: u64,
    #[serde(default)]
    pub class_label: ClassLabel,
    /// Plane-frame ground position at the spawn frame.
    pub start: [f64; 2],
    /// Meters per second in the plane frame.
    pub velocity: [f64; 2],
    pub extent: Extent3,
    pub spawn_frame: u32,
    /// First frame at which the agent is gone.
    pub despawn_frame: u32,
}

impl SynthAgent {
    pub fn alive(&self, frame: u32) -> bool {
        (self.spawn_frame..self.despawn_frame).contains(&frame)
    }

    pub fn position(&self, frame: u32, frame_rate: f64) -> [f64; 2] {
        let t = (frame as f64 - self.spawn_frame as f64) / frame_rate;
        [self.start[0] + self.velocity[0] * t, self.start[1] + self.velocity[1] * t]
    }

    pub fn box_at(&self, frame: u32, frame_rate: f64) -> BBox3D {
        let [x, y] = self.position(frame, frame_rate);
        BBox3D {
            center: Point3::new(x, y, self.extent.height / 2.0),
            extent: self.extent,
            yaw: 0.0,
            confidence: 1.0,
            source_id: SourceId::new(GT_SOURCE),
            track_id: Some(self.id),
            frame_index: frame,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthScenario {
    pub camera: SynthCamera,
    pub agents: Vec<SynthAgent>,
    /// Frames are numbered `1..=frame_count`.
    pub frame_count: u32,
    pub frame_rate: f64,
    pub seed: u64,
}

impl SynthScenario {
    pub fn plane(&self) -> Result<GroundPlane, SynthError> {
        self.camera.plane()
    }

    pub fn frames(&self) -> core::ops::RangeInclusive<u32> {
        1..=self.frame_count
    }

    /// Checks every living agent projects fully inside the image.
    pub fn validate(&self) -> Result<(), SynthError> {
        self.camera.intrinsics.validate()?;
        if !(self.frame_rate > 0.0) {
            return Err(SynthError::InvalidParameter { name: "frame_rate", value: self.frame_rate });
        }
        if !(self.camera.height_m > 0.0) {
            return Err(SynthError::InvalidParameter { name: "height_m", value: self.camera.height_m });
        }
        let plane = self.plane()?;
        let intr = &self.camera.intrinsics;
        for a in &self.agents {
            if !a.extent.is_valid() || a.spawn_frame >= a.despawn_frame {
                return Err(SynthError::InvalidAgent { id: a.id });
            }
            for f in self.frames().filter(|&f| a.alive(f)) {
                let inside = projected_rect(&a.box_at(f, self.frame_rate), &plane, intr).is_some_and(|r| {
                    r[0] >= 0.0 && r[1] >= 0.0 && r[0] + r[2] <= intr.width as f64 && r[1] + r[3] <= intr.height as f64
                });
                if !inside {
                    return Err(SynthError::OutOfFrustum { id: a.id, frame: f });
                }
            }
        }
        Ok(())
    }

    /// A random platform scene with well-separated walkers, all inside the frustum.
    pub fn random_platform(seed: u64, agent_count: usize, frame_count: u32) -> Self {
        let intr = CameraIntrinsics { fx: 250.0, fy: 250.0, cx: 160.0, cy: 120.0, width: 320, height: 240 };
        let camera = SynthCamera { intrinsics: intr, height_m: 3.0, pitch_deg: 20.0 };
        let mut scenario = Self { camera, agents: Vec::new(), frame_count, frame_rate: 10.0, seed };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut attempts = 0;
        while scenario.agents.len() < agent_count && attempts < 2000 {
            attempts += 1;
            let id = scenario.agents.len() as u64 + 1;
            let child = rng.random::<f64>() < 0.15;
            let (w, h) = if child { (0.4, 1.2) } else { (rng.random_range(0.5..0.7), rng.random_range(1.6..1.9)) };
            let spawn = if rng.random::<f64>() < 0.5 { 1 } else { rng.random_range(1..=frame_count.max(2) / 2) };
            let life = rng.random_range(frame_count.clamp(1, 20)..=frame_count.max(1));
            let speed = rng.random_range(0.2..1.2);
            let heading = rng.random_range(0.0..core::f64::consts::TAU);
            let agent = SynthAgent {
                id,
                class_label: if child { ClassLabel::Child } else { ClassLabel::Person },
                start: [rng.random_range(-2.0..2.0), rng.random_range(5.0..9.0)],
                velocity: [speed * heading.cos(), speed * heading.sin()],
                extent: Extent3::new(w, h, w),
                spawn_frame: spawn,
                despawn_frame: (spawn + life).min(frame_count + 1).max(spawn + 1),
            };
            let mut candidate = scenario.clone();
            candidate.agents.push(agent.clone());
            if candidate.validate().is_ok() && separated(&scenario, &agent, 1.5) {
                scenario = candidate;
            }
        }
        scenario
    }
}

fn separated(s: &SynthScenario, agent: &SynthAgent, min_gap: f64) -> bool {
    s.frames().filter(|&f| agent.alive(f)).all(|f| {
        let p = agent.position(f, s.frame_rate);
        s.agents.iter().filter(|o| o.alive(f)).all(|o| {
            let q = o.position(f, s.frame_rate);
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() >= min_gap
        })
    })
}

/// Image rectangle `[l, t, w, h]` enclosing the projected box corners.
pub fn projected_rect(b: &BBox3D, plane: &GroundPlane, intr: &CameraIntrinsics) -> Option<[f64; 4]> {
    let (lo, hi) = (b.min_corner(), b.max_corner());
    let (mut u0, mut v0, mut u1, mut v1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in 0..8 {
        let corner = Point3::new(
            if i & 1 == 0 { lo[0] } else { hi[0] },
            if i & 2 == 0 { lo[1] } else { hi[1] },
            if i & 4 == 0 { lo[2] } else { hi[2] },
        );
        let (u, v) = project(intr, &from_ground_frame(plane, &corner))?;
        u0 = u0.min(u);
        v0 = v0.min(v);
        u1 = u1.max(u);
        v1 = v1.max(v);
    }
    Some([u0, v0, u1 - u0, v1 - v0])
}

/// Fraction of `target` covered by the union of `occluders`, exact.
pub fn covered_fraction(target: [f64; 4], occluders: &[[f64; 4]]) -> f64 {
    let area = target[2] * target[3];
    if !(area > 0.0) {
        return 0.0;
    }
    let (tx0, ty0, tx1, ty1) = (target[0], target[1], target[0] + target[2], target[1] + target[3]);
    let clipped: Vec<[f64; 4]> = occluders
        .iter()
        .map(|o| [o[0].max(tx0), o[1].max(ty0), (o[0] + o[2]).min(tx1), (o[1] + o[3]).min(ty1)])
        .filter(|c| c[2] > c[0] && c[3] > c[1])
        .collect();
    let mut xs: Vec<f64> = clipped.iter().flat_map(|c| [c[0], c[2]]).collect();
    let mut ys: Vec<f64> = clipped.iter().flat_map(|c| [c[1], c[3]]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut covered = 0.0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let (mx, my) = ((xw[0] + xw[1]) / 2.0, (yw[0] + yw[1]) / 2.0);
            if clipped.iter().any(|c| c[0] <= mx && mx <= c[2] && c[1] <= my && my <= c[3]) {
                covered += (xw[1] - xw[0]) * (yw[1] - yw[0]);
            }
        }
    }
    covered / area
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// Sorted by `(frame, id)`.
    pub annotations: Vec<AnnotationRecord>,
    /// Plane-frame boxes, sorted by `(frame, id)`.
    pub tracks: Vec<BBox3D>,
}

impl GroundTruth {
    /// Evaluation objects located by their plane-frame ground position.
    pub fn plane_objects(&self) -> Vec<GtObject> {
        self.annotations
            .iter()
            .filter_map(|a| {
                Some(GtObject {
                    frame: a.frame,
                    gt_id: a.id,
                    region: Region::Plane(a.position?),
                    occlusion: a.occlusion,
                    class_label: a.class_label,
                })
            })
            .collect()
    }

    /// Evaluation objects located by their image box.
    pub fn image_objects(&self) -> Vec<GtObject> {
        self.annotations
            .iter()
            .map(|a| GtObject {
                frame: a.frame,
                gt_id: a.id,
                region: Region::Image(a.bbox),
                occlusion: a.occlusion,
                class_label: a.class_label,
            })
            .collect()
    }

    /// Image-space boxes keyed by frame, as seen by a perfect 2D tracker.
    pub fn boxes_2d(&self) -> Vec<(u32, BBox2D)> {
        self.annotations
            .iter()
            .map(|a| {
                let b = BBox2D::new(a.bbox[0], a.bbox[1], a.bbox[2], a.bbox[3])
                    .with_source(SourceId::new(GT_SOURCE), Some(a.id));
                (a.frame, BBox2D { class_label: a.class_label, ..b })
            })
            .collect()
    }
}

/// Ground truth for every frame, without rendering depth.
pub fn ground_truth(s: &SynthScenario) -> Result<GroundTruth, SynthError> {
    let plane = s.plane()?;
    let intr = &s.camera.intrinsics;
    let mut gt = GroundTruth::default();
    for f in s.frames() {
        let mut alive: Vec<&SynthAgent> = s.agents.iter().filter(|a| a.alive(f)).collect();
        alive.sort_by_key(|a| a.id);
        let boxes: Vec<BBox3D> = alive.iter().map(|a| a.box_at(f, s.frame_rate)).collect();
        let depth: Vec<f64> = boxes.iter().map(|b| from_ground_frame(&plane, &b.center).z).collect();
        let rects: Vec<Option<[f64; 4]>> = boxes.iter().map(|b| projected_rect(b, &plane, intr)).collect();
        for (i, a) in alive.iter().enumerate() {
            let Some(rect) = rects[i] else { continue };
            let nearer: Vec<[f64; 4]> = (0..alive.len())
                .filter(|&j| j != i && depth[j] < depth[i])
                .filter_map(|j| rects[j])
                .collect();
            gt.annotations.push(AnnotationRecord {
                frame: f,
                id: a.id,
                class_label: a.class_label,
                bbox: rect,
                occlusion: Occlusion::quantize(covered_fraction(rect, &nearer)),
                camera_view: CameraView::LeftRig,
                position: Some(boxes[i].ground_position()),
            });
            gt.tracks.push(boxes[i].clone());
        }
    }
    Ok(gt)
}

/// Depth of one frame and, per pixel, which agent (if any) was hit.
pub fn render_depth_labeled(s: &SynthScenario, frame: u32) -> Result<(DepthMap, Vec<Option<u64>>), SynthError> {
    let plane = s.plane()?;
    let intr = &s.camera.intrinsics;
    let rot = plane.to_plane().rotation;
    let origin = plane.to_plane() * Point3::origin();
    let boxes: Vec<(u64, [f64; 3], [f64; 3])> = s
        .agents
        .iter()
        .filter(|a| a.alive(frame))
        .map(|a| {
            let b = a.box_at(frame, s.frame_rate);
            (a.id, b.min_corner(), b.max_corner())
        })
        .collect();
    let mut labels = alloc::vec![None; (intr.width * intr.height) as usize];
    let mut map = DepthMap::invalid(intr.width, intr.height);
    for v in 0..intr.height {
        for u in 0..intr.width {
            // t along this direction is exactly the camera-frame depth
            let dir = rot * Vector3::new((u as f64 - intr.cx) / intr.fx, (v as f64 - intr.cy) / intr.fy, 1.0);
            let mut best = if dir.z < 0.0 { -origin.z / dir.z } else { f64::INFINITY };
            let mut hit = None;
            for (id, lo, hi) in &boxes {
                if let Some(t) = ray_box(&origin.coords, &dir, lo, hi) {
                    if t < best {
                        best = t;
                        hit = Some(*id);
                    }
                }
            }
            if best.is_finite() && best <= MAX_RENDER_DEPTH {
                map.set(u, v, Some(best));
                labels[(v * intr.width + u) as usize] = hit;
            }
        }
    }
    Ok((map, labels))
}

pub fn render_depth(s: &SynthScenario, frame: u32) -> Result<DepthMap, SynthError> {
    Ok(render_depth_labeled(s, frame)?.0)
}

fn ray_box(o: &Vector3<f64>, d: &Vector3<f64>, lo: &[f64; 3], hi: &[f64; 3]) -> Option<f64> {
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    for k in 0..3 {
        if d[k].abs() < 1e-15 {
            if o[k] < lo[k] || o[k] > hi[k] {
                return None;
            }
            continue;
        }
        let (a, b) = ((lo[k] - o[k]) / d[k], (hi[k] - o[k]) / d[k]);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
        if t0 > t1 {
            return None;
        }
    }
    (t0 > 0.0).then_some(t0)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RenderedScenario {
    /// One depth map per frame, frame `i + 1` at index `i`.
    pub depth: Vec<DepthMap>,
    pub ground_truth: GroundTruth,
}

pub fn render_scenario(s: &SynthScenario) -> Result<RenderedScenario, SynthError> {
    let depth = s.frames().map(|f| render_depth(s, f)).collect::<Result<Vec<_>, _>>()?;
    Ok(RenderedScenario { depth, ground_truth: ground_truth(s)? })
}

/// Periodic window of dropped frames: frame `f` is blacked out when
/// `(f + period - offset % period) % period < length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blackout {
    pub period: u32,
    pub offset: u32,
    pub length: u32,
}

impl Blackout {
    pub fn covers(&self, frame: u32) -> bool {
        self.period > 0 && (frame + self.period - self.offset % self.period) % self.period < self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DegraderConfig {
    pub source: String,
    pub miss_probability: f64,
    /// Poisson mean of false boxes per frame.
    pub fp_rate: f64,
    pub noise_px: f64,
    pub noise_m: f64,
    pub id_switch_probability: f64,
    pub seed: u64,
    pub blackout: Option<Blackout>,
}

impl Default for DegraderConfig {
    fn default() -> Self {
        Self {
            source: String::from("synthetic"),
            miss_probability: 0.0,
            fp_rate: 0.0,
            noise_px: 0.0,
            noise_m: 0.0,
            id_switch_probability: 0.0,
            seed: 0,
            blackout: None,
        }
    }
}

impl DegraderConfig {
    /// Source `index` of `count` misses its own disjoint share of every `period` frames.
    pub fn complementary(index: u32, count: u32, period: u32) -> Blackout {
        let length = (period / count.max(1)).max(1);
        Blackout { period, offset: index * length, length }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, p) in [("miss_probability", self.miss_probability), ("id_switch_probability", self.id_switch_probability)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidParameter { name, value: p });
            }
        }
        for (name, x) in [("fp_rate", self.fp_rate), ("noise_px", self.noise_px), ("noise_m", self.noise_m)] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(SynthError::InvalidParameter { name, value: x });
            }
        }
        Ok(())
    }
}

/// Where false positives may appear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FalsePositiveArea {
    /// Image size in pixels.
    Image { width: u32, height: u32 },
    /// Plane-frame rectangle `[x0, y0, x1, y1]` in meters.
    Plane([f64; 4]),
}

trait Degradable: Clone {
    fn frame(&self) -> u32;
    fn id(&self) -> u64;
    fn relabel(&mut self, id: u64, source: &SourceId);
    fn jitter(&mut self, rng: &mut ChaCha8Rng, cfg: &DegraderConfig);
}

impl Degradable for (u32, BBox2D) {
    fn frame(&self) -> u32 {
        self.0
    }
    fn id(&self) -> u64 {
        self.1.track_id.unwrap_or(0)
    }
    fn relabel(&mut self, id: u64, source: &SourceId) {
        self.1.track_id = Some(id);
        self.1.source_id = source.clone();
    }
    fn jitter(&mut self, rng: &mut ChaCha8Rng, cfg: &DegraderConfig) {
        if cfg.noise_px > 0.0 {
            let n = Normal::new(0.0, cfg.noise_px).expect("validated sigma");
            self.1.left += n.sample(rng);
            self.1.top += n.sample(rng);
        }
    }
}

impl Degradable for BBox3D {
    fn frame(&self) -> u32 {
        self.frame_index
    }
    fn id(&self) -> u64 {
        self.track_id.unwrap_or(0)
    }
    fn relabel(&mut self, id: u64, source: &SourceId) {
        self.track_id = Some(id);
        self.source_id = source.clone();
    }
    fn jitter(&mut self, rng: &mut ChaCha8Rng, cfg: &DegraderConfig) {
        if cfg.noise_m > 0.0 {
            let n = Normal::new(0.0, cfg.noise_m).expect("validated sigma");
            self.center.x += n.sample(rng);
            self.center.y += n.sample(rng);
        }
    }
}

fn degrade_generic<T: Degradable>(
    gt: &[T],
    cfg: &DegraderConfig,
    mut spawn_fp: impl FnMut(&mut ChaCha8Rng, u32, u64, &SourceId) -> T,
) -> Result<Vec<T>, SynthError> {
    cfg.validate()?;
    let source = SourceId::new(cfg.source.clone());
    let mut by_frame: BTreeMap<u32, Vec<&T>> = BTreeMap::new();
    for item in gt {
        by_frame.entry(item.frame()).or_default().push(item);
    }
    let mut next_id = gt.iter().map(|t| t.id()).max().unwrap_or(0) + 1;
    let mut id_map: BTreeMap<u64, u64> = BTreeMap::new();
    let mut out = Vec::new();
    let fp_dist = (cfg.fp_rate > 0.0).then(|| Poisson::new(cfg.fp_rate).expect("validated rate"));
    for (index, (&frame, items)) in by_frame.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(frame as u64);
        items.sort_by_key(|t| t.id());
        let dropped = cfg.blackout.is_some_and(|b| b.covers(frame));
        for item in items.iter() {
            let switch = index > 0 && cfg.id_switch_probability > 0.0 && rng.random::<f64>() < cfg.id_switch_probability;
            let out_id = if switch {
                next_id += 1;
                id_map.insert(item.id(), next_id - 1);
                next_id - 1
            } else {
                *id_map.entry(item.id()).or_insert(item.id())
            };
            let miss = cfg.miss_probability > 0.0 && rng.random::<f64>() < cfg.miss_probability;
            if dropped || miss {
                continue;
            }
            let mut d = (*item).clone();
            d.relabel(out_id, &source);
            d.jitter(&mut rng, cfg);
            out.push(d);
        }
        if let Some(dist) = &fp_dist {
            if !dropped {
                let n = dist.sample(&mut rng) as u64;
                for _ in 0..n {
                    out.push(spawn_fp(&mut rng, frame, next_id, &source));
                    next_id += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Degrades image-space ground truth into one tracker's output.
pub fn degrade_2d(gt: &[(u32, BBox2D)], cfg: &DegraderConfig, width: u32, height: u32) -> Result<Vec<(u32, BBox2D)>, SynthError> {
    degrade_generic(gt, cfg, |rng, frame, id, source| {
        let (w, h) = (rng.random_range(20.0..60.0), rng.random_range(50.0..150.0));
        let l = rng.random_range(0.0..(width as f64 - w).max(1.0));
        let t = rng.random_range(0.0..(height as f64 - h).max(1.0));
        let b = BBox2D::new(l, t, w, h).with_source(source.clone(), Some(id)).with_confidence(0.5);
        (frame, b)
    })
}

/// Degrades plane-frame ground truth into one 3D tracker's output. False
/// boxes are person-sized and uniform over `area = [x0, y0, x1, y1]`.
pub fn degrade_3d(gt: &[BBox3D], cfg: &DegraderConfig, area: [f64; 4]) -> Result<Vec<BBox3D>, SynthError> {
    degrade_generic(gt, cfg, |rng, frame, id, source| BBox3D {
        center: Point3::new(rng.random_range(area[0]..area[2]), rng.random_range(area[1]..area[3]), 0.85),
        extent: Extent3::new(0.6, 1.7, 0.6),
        yaw: 0.0,
        confidence: 0.5,
        source_id: source.clone(),
        track_id: Some(id),
        frame_index: frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::geometry::backproject;

    fn camera() -> SynthCamera {
        SynthCamera {
            intrinsics: CameraIntrinsics { fx: 200.0, fy: 200.0, cx: 80.0, cy: 60.0, width: 160, height: 120 },
            height_m: 3.0,
            pitch_deg: 20.0,
        }
    }

    fn agent(id: u64, x: f64, y: f64) -> SynthAgent {
        SynthAgent {
            id,
            class_label: ClassLabel::Person,
            start: [x, y],
            velocity: [0.0, 0.0],
            extent: Extent3::new(0.6, 1.8, 0.6),
            spawn_frame: 1,
            despawn_frame: 100,
        }
    }

    fn scenario(agents: Vec<SynthAgent>) -> SynthScenario {
        SynthScenario { camera: camera(), agents, frame_count: 3, frame_rate: 10.0, seed: 1 }
    }

    #[test]
    fn plane_has_camera_height() {
        let plane = camera().plane().unwrap();
        assert!((plane.camera_height() - 3.0).abs() < 1e-12);
        let foot = from_ground_frame(&plane, &Point3::origin());
        assert!(plane.signed_distance(&foot).abs() < 1e-12);
    }

    #[test]
    fn empty_scene_is_ground_only() {
        let s = scenario(vec![]);
        let r = render_scenario(&s).unwrap();
        assert!(r.ground_truth.annotations.is_empty() && r.ground_truth.tracks.is_empty());
        let plane = s.plane().unwrap();
        let intr = &s.camera.intrinsics;
        for (u, v, d) in r.depth[0].valid_pixels() {
            let p = backproject(intr, u as f64, v as f64, d).unwrap();
            assert!(plane.signed_distance(&p).abs() < 1e-9);
        }
        assert!(r.depth[0].valid_count() > 0);
    }

    #[test]
    fn projected_box_matches_pinhole() {
        let s = scenario(vec![agent(1, 0.0, 6.0)]);
        s.validate().unwrap();
        let gt = ground_truth(&s).unwrap();
        let plane = s.plane().unwrap();
        let intr = s.camera.intrinsics;
        // the bottom-front edge center projects to the box's bottom edge
        let foot = from_ground_frame(&plane, &Point3::new(0.0, 5.7, 0.0));
        let (u, v) = project(&intr, &foot).unwrap();
        let b = gt.annotations[0].bbox;
        assert!((b[0] + b[2] / 2.0 - u).abs() < 1.0);
        assert!((b[1] + b[3] - v).abs() < 1.0);
    }

    #[test]
    fn nearer_agent_occludes_farther() {
        let s = scenario(vec![agent(1, 0.0, 5.0), agent(2, 0.2, 8.0)]);
        let gt = ground_truth(&s).unwrap();
        let near = &gt.annotations[0];
        let far = &gt.annotations[1];
        assert_eq!(near.occlusion, Occlusion::None);
        let fraction = covered_fraction(far.bbox, &[near.bbox]);
        assert!(fraction > 0.3);
        assert_eq!(far.occlusion, Occlusion::quantize(fraction));
    }

    #[test]
    fn covered_fraction_union() {
        let t = [0.0, 0.0, 10.0, 10.0];
        assert_eq!(covered_fraction(t, &[]), 0.0);
        assert_eq!(covered_fraction(t, &[[5.0, 0.0, 10.0, 10.0]]), 0.5);
        // overlapping occluders are not double-counted
        assert_eq!(covered_fraction(t, &[[0.0, 0.0, 6.0, 10.0], [4.0, 0.0, 6.0, 10.0]]), 1.0);
    }

    #[test]
    fn agent_pixels_backproject_into_box() {
        let s = scenario(vec![agent(1, -0.5, 6.0), agent(2, 0.6, 7.5)]);
        let plane = s.plane().unwrap();
        let (map, labels) = render_depth_labeled(&s, 1).unwrap();
        let intr = &s.camera.intrinsics;
        let mut hits = 0;
        for (u, v, d) in map.valid_pixels() {
            if let Some(id) = labels[(v * intr.width + u) as usize] {
                let b = s.agents.iter().find(|a| a.id == id).unwrap().box_at(1, s.frame_rate);
                let p = plane.to_plane() * backproject(intr, u as f64, v as f64, d).unwrap();
                let (lo, hi) = (b.min_corner(), b.max_corner());
                for k in 0..3 {
                    assert!(p[k] >= lo[k] - 0.01 && p[k] <= hi[k] + 0.01);
                }
                hits += 1;
            }
        }
        assert!(hits > 100);
    }

    #[test]
    fn out_of_frustum_rejected() {
        let s = scenario(vec![agent(1, 30.0, 6.0)]);
        assert!(matches!(s.validate(), Err(SynthError::OutOfFrustum { id: 1, .. })));
    }

    #[test]
    fn random_platform_is_valid() {
        let s = SynthScenario::random_platform(3, 5, 40);
        assert_eq!(s.agents.len(), 5);
        s.validate().unwrap();
    }

    fn gt3d() -> Vec<BBox3D> {
        let s = SynthScenario::random_platform(5, 4, 30);
        ground_truth(&s).unwrap().tracks
    }

    #[test]
    fn zero_config_is_identity() {
        let gt = gt3d();
        let cfg = DegraderConfig { source: GT_SOURCE.into(), ..Default::default() };
        assert_eq!(degrade_3d(&gt, &cfg, [-3.0, 3.0, 3.0, 10.0]).unwrap(), gt);
    }

    #[test]
    fn full_miss_is_empty() {
        let cfg = DegraderConfig { miss_probability: 1.0, ..Default::default() };
        assert!(degrade_3d(&gt3d(), &cfg, [-3.0, 3.0, 3.0, 10.0]).unwrap().is_empty());
    }

    #[test]
    fn blackouts_are_disjoint() {
        let sets: Vec<Blackout> = (0..4).map(|i| DegraderConfig::complementary(i, 4, 8)).collect();
        for f in 1..100 {
            assert!(sets.iter().filter(|b| b.covers(f)).count() <= 1);
        }
        assert!((1..9).all(|f| sets.iter().any(|b| b.covers(f))));
    }

    #[test]
    fn id_switch_gives_fresh_ids() {
        let gt = gt3d();
        let cfg = DegraderConfig { id_switch_probability: 1.0, ..Default::default() };
        let out = degrade_3d(&gt, &cfg, [-3.0, 3.0, 3.0, 10.0]).unwrap();
        let max_gt = gt.iter().filter_map(|b| b.track_id).max().unwrap();
        assert!(out.iter().filter(|b| b.frame_index > 1).all(|b| b.track_id.unwrap() > max_gt));
    }

    #[test]
    fn invalid_probability_rejected() {
        let cfg = DegraderConfig { miss_probability: 1.5, ..Default::default() };
        assert!(degrade_3d(&[], &cfg, [0.0, 0.0, 1.0, 1.0]).is_err());
    }
}
