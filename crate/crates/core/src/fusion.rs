//! Tracklet fusion of multi-source 3D observations.
//!
//! Each source's `(tracker_id, track_id)` chain is treated as a tracklet.
//! An observation whose pair is already bound to a live fused track is
//! appended to it; otherwise it joins the fused track whose latest box it
//! overlaps most, provided the IoU or the IoE (intersection over the smaller
//! volume) clears its threshold. Failing both, it opens a new fused track.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::types::{BBox3D, Extent3, SourceId};
#[allow(unused_imports)]
use num_traits::Float;

pub const FUSED_SOURCE: &str = "fused";

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("box has non-zero yaw {0}; only plane-axis-aligned boxes are supported")]
    UnsupportedYaw(f64),
    #[error("observation frame {frame} precedes current frame {current}")]
    FrameOrder { frame: u32, current: u32 },
    #[error("thresholds must lie in (0, 1]")]
    InvalidThreshold,
}

const YAW_EPS: f64 = 1e-12;

fn check_yaw(b: &BBox3D) -> Result<(), FusionError> {
    if b.yaw.abs() > YAW_EPS {
        Err(FusionError::UnsupportedYaw(b.yaw))
    } else {
        Ok(())
    }
}

fn intersection_volume(a: &BBox3D, b: &BBox3D) -> f64 {
    let (amin, amax) = (a.min_corner(), a.max_corner());
    let (bmin, bmax) = (b.min_corner(), b.max_corner());
    let mut v = 1.0;
    for k in 0..3 {
        let overlap = amax[k].min(bmax[k]) - amin[k].max(bmin[k]);
        if overlap <= 0.0 {
            return 0.0;
        }
        v *= overlap;
    }
    v
}

/// Intersection over union of two axis-aligned boxes.
pub fn iou_3d(a: &BBox3D, b: &BBox3D) -> Result<f64, FusionError> {
    check_yaw(a)?;
    check_yaw(b)?;
    let inter = intersection_volume(a, b);
    let union = a.extent.volume() + b.extent.volume() - inter;
    Ok(if union > 0.0 { (inter / union).clamp(0.0, 1.0) } else { 0.0 })
}

/// Intersection over the smaller box volume; 1 when one box encloses the other.
pub fn ioe_3d(a: &BBox3D, b: &BBox3D) -> Result<f64, FusionError> {
    check_yaw(a)?;
    check_yaw(b)?;
    let inter = intersection_volume(a, b);
    let smaller = a.extent.volume().min(b.extent.volume());
    Ok(if smaller > 0.0 { (inter / smaller).clamp(0.0, 1.0) } else { 0.0 })
}

/// One source observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection3D {
    pub tracker_id: SourceId,
    pub track_id: u64,
    pub frame_index: u32,
    pub bbox: BBox3D,
}

impl Detection3D {
    pub fn new(tracker_id: SourceId, track_id: u64, frame_index: u32, bbox: BBox3D) -> Self {
        Self { tracker_id, track_id, frame_index, bbox }
    }

    /// Takes identity from the box; `None` without a track id.
    pub fn from_bbox(bbox: BBox3D) -> Option<Self> {
        let track_id = bbox.track_id?;
        Some(Self { tracker_id: bbox.source_id.clone(), track_id, frame_index: bbox.frame_index, bbox })
    }

    pub fn key(&self) -> (SourceId, u64) {
        (self.tracker_id.clone(), self.track_id)
    }
}

/// Identity of an ingested observation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObservationKey {
    pub tracker_id: SourceId,
    pub track_id: u64,
    pub frame_index: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub fused_id: u64,
    pub members: BTreeSet<(SourceId, u64)>,
    /// One fused box per frame, frames strictly increasing.
    pub history: Vec<BBox3D>,
    pub last_update: u32,
    pub observations: Vec<ObservationKey>,
    contributions: Vec<BBox3D>,
}

impl Tracklet {
    fn new(fused_id: u64, det: &Detection3D) -> Self {
        let mut t = Self {
            fused_id,
            members: BTreeSet::new(),
            history: Vec::new(),
            last_update: det.frame_index,
            observations: Vec::new(),
            contributions: Vec::new(),
        };
        t.add(det);
        t
    }

    /// Most recent fused box.
    pub fn latest(&self) -> Option<&BBox3D> {
        self.history.last()
    }

    /// Whether `tracker` already contributed to this tracklet in `frame`.
    pub fn observed_by(&self, tracker: &SourceId, frame: u32) -> bool {
        self.observations
            .iter()
            .rev()
            .take_while(|o| o.frame_index == frame)
            .any(|o| &o.tracker_id == tracker)
    }

    fn add(&mut self, det: &Detection3D) {
        self.members.insert(det.key());
        self.observations.push(ObservationKey {
            tracker_id: det.tracker_id.clone(),
            track_id: det.track_id,
            frame_index: det.frame_index,
        });
        if self.last_update != det.frame_index || self.history.is_empty() {
            self.contributions.clear();
        }
        self.last_update = det.frame_index;
        self.contributions.push(det.bbox.clone());
        let fused = confidence_weighted_mean(&self.contributions, self.fused_id, det.frame_index);
        match self.history.last_mut() {
            Some(last) if last.frame_index == det.frame_index => *last = fused,
            _ => self.history.push(fused),
        }
    }
}

/// Confidence-weighted mean of centers and extents; plain mean when all
/// confidences are zero. Output confidence is the strongest member's.
pub fn confidence_weighted_mean(boxes: &[BBox3D], fused_id: u64, frame_index: u32) -> BBox3D {
    let total: f64 = boxes.iter().map(|b| b.confidence.max(0.0)).sum();
    let weight = |b: &BBox3D| if total > 0.0 { b.confidence.max(0.0) / total } else { 1.0 / boxes.len() as f64 };
    let mut c = [0.0; 3];
    let mut e = [0.0; 3];
    let mut conf = 0.0f64;
    for b in boxes {
        let w = weight(b);
        c[0] += w * b.center.x;
        c[1] += w * b.center.y;
        c[2] += w * b.center.z;
        e[0] += w * b.extent.width;
        e[1] += w * b.extent.height;
        e[2] += w * b.extent.depth;
        conf = conf.max(b.confidence);
    }
    BBox3D {
        center: Point3::new(c[0], c[1], c[2]),
        extent: Extent3::new(e[0], e[1], e[2]),
        yaw: 0.0,
        confidence: conf,
        source_id: SourceId::new(FUSED_SOURCE),
        track_id: Some(fused_id),
        frame_index,
    }
}

/// Which path an observation took through the fusion step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuseBranch {
    /// Its `(tracker_id, track_id)` was already bound to a live tracklet.
    History,
    /// Joined the best-overlapping tracklet by the IoU criterion.
    Iou,
    /// Joined by the IoE (enclosure) criterion only.
    Ioe,
    NewTracklet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuseOutcome {
    pub fused_id: u64,
    pub branch: FuseBranch,
    pub iou: f64,
    pub ioe: f64,
    /// Another tracklet had exactly the same overlap score.
    pub tie: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    pub iou_threshold: f64,
    pub ioe_threshold: f64,
    /// Tracklets without an update for more than this many frames retire.
    pub staleness_limit: u32,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.3, ioe_threshold: 0.7, staleness_limit: 15 }
    }
}

#[derive(Debug, Clone)]
pub struct TrackletManager {
    cfg: FusionConfig,
    live: BTreeMap<u64, Tracklet>,
    retired: Vec<Tracklet>,
    bindings: BTreeMap<(SourceId, u64), u64>,
    next_id: u64,
    current_frame: Option<u32>,
}

impl TrackletManager {
    pub fn new(cfg: FusionConfig) -> Result<Self, FusionError> {
        let ok = |t: f64| t > 0.0 && t <= 1.0;
        if !ok(cfg.iou_threshold) || !ok(cfg.ioe_threshold) {
            return Err(FusionError::InvalidThreshold);
        }
        Ok(Self {
            cfg,
            live: BTreeMap::new(),
            retired: Vec::new(),
            bindings: BTreeMap::new(),
            next_id: 1,
            current_frame: None,
        })
    }

    pub fn config(&self) -> &FusionConfig {
        &self.cfg
    }

    pub fn live(&self) -> impl Iterator<Item = &Tracklet> {
        self.live.values()
    }

    pub fn retired(&self) -> &[Tracklet] {
        &self.retired
    }

    /// Live and retired tracklets, ordered by fused id.
    pub fn all_tracklets(&self) -> Vec<&Tracklet> {
        let mut all: Vec<&Tracklet> = self.live.values().chain(self.retired.iter()).collect();
        all.sort_by_key(|t| t.fused_id);
        all
    }

    /// Fused id of the live tracklet already holding this observation's
    /// `(tracker_id, track_id)` pair.
    pub fn already_in_history(&self, det: &Detection3D) -> Option<u64> {
        self.bindings.get(&(det.tracker_id.clone(), det.track_id)).copied()
    }

    /// Live tracklet whose latest box overlaps the detection most, scored by
    /// `max(IoU, IoE)`; ties go to the lower fused id. Tracklets the same
    /// tracker already fed this frame are skipped: one tracker's boxes in
    /// one frame are distinct objects.
    fn most_overlap(&self, det: &Detection3D) -> Result<Option<(u64, f64, f64, bool)>, FusionError> {
        let mut best: Option<(u64, f64, f64, f64)> = None;
        let mut tie = false;
        for t in self.live.values() {
            let Some(latest) = t.latest() else { continue };
            if t.observed_by(&det.tracker_id, det.frame_index) {
                continue;
            }
            let iou = iou_3d(&det.bbox, latest)?;
            let ioe = ioe_3d(&det.bbox, latest)?;
            let score = iou.max(ioe);
            match best {
                Some((_, _, _, s)) if score < s => {}
                Some((_, _, _, s)) if score == s => tie = score > 0.0,
                _ => {
                    best = Some((t.fused_id, iou, ioe, score));
                    tie = false;
                }
            }
        }
        Ok(best.map(|(id, iou, ioe, _)| (id, iou, ioe, tie)))
    }

    pub fn fuse_observation(&mut self, det: &Detection3D) -> Result<FuseOutcome, FusionError> {
        check_yaw(&det.bbox)?;
        if let Some(current) = self.current_frame {
            if det.frame_index < current {
                return Err(FusionError::FrameOrder { frame: det.frame_index, current });
            }
        }
        self.current_frame = Some(det.frame_index);

        if let Some(id) = self.already_in_history(det) {
            if let Some(t) = self.live.get_mut(&id) {
                t.add(det);
                return Ok(FuseOutcome { fused_id: id, branch: FuseBranch::History, iou: 1.0, ioe: 1.0, tie: false });
            }
        }
        if let Some((id, iou, ioe, tie)) = self.most_overlap(det)? {
            let branch = if iou >= self.cfg.iou_threshold {
                Some(FuseBranch::Iou)
            } else if ioe >= self.cfg.ioe_threshold {
                Some(FuseBranch::Ioe)
            } else {
                None
            };
            if let Some(branch) = branch {
                if let Some(t) = self.live.get_mut(&id) {
                    t.add(det);
                    self.bindings.insert(det.key(), id);
                    return Ok(FuseOutcome { fused_id: id, branch, iou, ioe, tie });
                }
            }
        }
        let id = self.next_id;
        self.next_id += 1;
        self.live.insert(id, Tracklet::new(id, det));
        self.bindings.insert(det.key(), id);
        Ok(FuseOutcome { fused_id: id, branch: FuseBranch::NewTracklet, iou: 0.0, ioe: 0.0, tie: false })
    }

    /// Fuses one frame of observations from all sources and returns one
    /// fused box per tracklet updated in this frame, ordered by fused id.
    pub fn fuse_frame(&mut self, detections: &[Detection3D], frame: u32) -> Result<FrameFusion, FusionError> {
        let mut ordered: Vec<&Detection3D> = detections.iter().collect();
        ordered.sort_by(|a, b| a.tracker_id.cmp(&b.tracker_id).then(a.track_id.cmp(&b.track_id)));
        let mut outcomes = Vec::with_capacity(ordered.len());
        for det in ordered {
            let mut det = det.clone();
            det.frame_index = frame;
            det.bbox.frame_index = frame;
            outcomes.push(self.fuse_observation(&det)?);
        }
        if self.current_frame.is_none_or(|c| c < frame) {
            self.current_frame = Some(frame);
        }
        let boxes = self
            .live
            .values()
            .filter(|t| t.last_update == frame)
            .filter_map(|t| t.latest().cloned())
            .collect();
        self.retire_stale(frame);
        Ok(FrameFusion { boxes, outcomes })
    }

    fn retire_stale(&mut self, frame: u32) {
        let limit = self.cfg.staleness_limit;
        let stale: Vec<u64> = self
            .live
            .values()
            .filter(|t| frame.saturating_sub(t.last_update) > limit)
            .map(|t| t.fused_id)
            .collect();
        for id in stale {
            if let Some(t) = self.live.remove(&id) {
                for m in &t.members {
                    if self.bindings.get(m) == Some(&id) {
                        self.bindings.remove(m);
                    }
                }
                self.retired.push(t);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFusion {
    pub boxes: Vec<BBox3D>,
    pub outcomes: Vec<FuseOutcome>,
}

/// Fuses per-frame observations of a whole sequence. Input boxes need a
/// track id; those without one are skipped.
pub fn fuse_sequence(boxes: &[BBox3D], cfg: FusionConfig) -> Result<(Vec<BBox3D>, TrackletManager), FusionError> {
    let mut by_frame: BTreeMap<u32, Vec<Detection3D>> = BTreeMap::new();
    for b in boxes {
        if let Some(d) = Detection3D::from_bbox(b.clone()) {
            by_frame.entry(b.frame_index).or_default().push(d);
        }
    }
    let mut mgr = TrackletManager::new(cfg)?;
    let mut out = Vec::new();
    for (frame, dets) in by_frame {
        out.extend(mgr.fuse_frame(&dets, frame)?.boxes);
    }
    Ok((out, mgr))
}

/// Directed polyline in the plane frame. The region to clear lies on its
/// left-hand side when walking from the first to the last vertex; the end
/// segments extend to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyLine {
    pub points: Vec<[f64; 2]>,
}

impl SafetyLine {
    pub fn new(points: Vec<[f64; 2]>) -> Option<Self> {
        (points.len() >= 2).then_some(Self { points })
    }

    /// Signed distance, positive inside the region to clear.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        let n = self.points.len();
        let mut best = f64::INFINITY;
        let mut sign = 1.0;
        for i in 0..n.saturating_sub(1) {
            let a = self.points[i];
            let b = self.points[i + 1];
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            if len2 == 0.0 {
                continue;
            }
            let mut t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2;
            if i > 0 {
                t = t.max(0.0);
            }
            if i + 2 < n {
                t = t.min(1.0);
            }
            let q = [a[0] + t * d[0], a[1] + t * d[1]];
            let dist = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            if dist < best {
                best = dist;
                let cross = d[0] * (p[1] - a[1]) - d[1] * (p[0] - a[0]);
                sign = if cross >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        sign * best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyViolation {
    pub fused_id: u64,
    pub start_frame: u32,
    pub end_frame: u32,
    /// Smallest distance of the footprint center to the line over the span.
    pub min_distance_m: f64,
}

/// Frame spans in which a track's footprint reaches into the region to clear.
/// Spans are maximal runs of consecutive frames within `frames` (inclusive).
pub fn safety_report(tracks: &[BBox3D], line: &SafetyLine, frames: (u32, u32)) -> Vec<SafetyViolation> {
    let mut by_track: BTreeMap<u64, Vec<&BBox3D>> = BTreeMap::new();
    for b in tracks {
        if b.frame_index < frames.0 || b.frame_index > frames.1 {
            continue;
        }
        if let Some(id) = b.track_id {
            by_track.entry(id).or_default().push(b);
        }
    }
    let mut out = Vec::new();
    for (id, mut boxes) in by_track {
        boxes.sort_by_key(|b| b.frame_index);
        let mut open: Option<SafetyViolation> = None;
        for b in boxes {
            let (hw, hd) = (b.extent.width / 2.0, b.extent.depth / 2.0);
            let [x, y] = b.ground_position();
            let corners = [[x - hw, y - hd], [x + hw, y - hd], [x + hw, y + hd], [x - hw, y + hd], [x, y]];
            let inside = corners.iter().any(|c| line.signed_distance(*c) > 0.0);
            let dist = line.signed_distance([x, y]).abs();
            match (&mut open, inside) {
                (Some(v), true) if b.frame_index == v.end_frame + 1 => {
                    v.end_frame = b.frame_index;
                    v.min_distance_m = v.min_distance_m.min(dist);
                }
                (Some(v), true) if b.frame_index == v.end_frame => {
                    v.min_distance_m = v.min_distance_m.min(dist);
                }
                (_, true) => {
                    if let Some(v) = open.take() {
                        out.push(v);
                    }
                    open = Some(SafetyViolation { fused_id: id, start_frame: b.frame_index, end_frame: b.frame_index, min_distance_m: dist });
                }
                (_, false) => {
                    if let Some(v) = open.take() {
                        out.push(v);
                    }
                }
            }
        }
        if let Some(v) = open {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cube(x: f64, y: f64, z: f64, s: f64) -> BBox3D {
        BBox3D::new(Point3::new(x, y, z), Extent3::new(s, s, s))
    }

    fn det(src: &str, id: u64, frame: u32, b: BBox3D) -> Detection3D {
        Detection3D::new(SourceId::new(src), id, frame, b)
    }

    #[test]
    fn iou_examples() {
        let a = cube(0.0, 0.0, 0.0, 1.0);
        assert_relative_eq!(iou_3d(&a, &a).unwrap(), 1.0);
        assert_eq!(iou_3d(&a, &cube(5.0, 0.0, 0.0, 1.0)).unwrap(), 0.0);
        assert_relative_eq!(iou_3d(&a, &cube(0.5, 0.0, 0.0, 1.0)).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ioe_examples() {
        let big = cube(0.0, 0.0, 0.0, 2.0);
        let small = cube(0.2, -0.1, 0.3, 0.5);
        assert_relative_eq!(ioe_3d(&small, &big).unwrap(), 1.0);
        assert_relative_eq!(ioe_3d(&big, &small).unwrap(), 1.0);
        assert_relative_eq!(ioe_3d(&big, &big).unwrap(), 1.0);
        assert_eq!(ioe_3d(&big, &cube(9.0, 0.0, 0.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn rotated_boxes_rejected() {
        let mut r = cube(0.0, 0.0, 0.0, 1.0);
        r.yaw = 0.3;
        assert!(matches!(iou_3d(&r, &cube(0.0, 0.0, 0.0, 1.0)), Err(FusionError::UnsupportedYaw(_))));
        assert!(ioe_3d(&cube(0.0, 0.0, 0.0, 1.0), &r).is_err());
    }

    #[test]
    fn history_lookup_uses_pair() {
        let mut mgr = TrackletManager::new(FusionConfig::default()).unwrap();
        let a7 = det("A", 7, 1, cube(0.0, 0.0, 0.0, 1.0));
        assert_eq!(mgr.already_in_history(&a7), None);
        let out = mgr.fuse_observation(&a7).unwrap();
        assert_eq!(out.branch, FuseBranch::NewTracklet);
        assert_eq!(mgr.already_in_history(&a7), Some(out.fused_id));
        let b7 = det("B", 7, 1, cube(10.0, 0.0, 0.0, 1.0));
        assert_eq!(mgr.already_in_history(&b7), None);
    }

    #[test]
    fn identical_box_fuses() {
        let mut mgr = TrackletManager::new(FusionConfig::default()).unwrap();
        let first = mgr.fuse_observation(&det("A", 1, 1, cube(0.0, 0.0, 0.0, 1.0))).unwrap();
        let second = mgr.fuse_observation(&det("B", 4, 1, cube(0.0, 0.0, 0.0, 1.0))).unwrap();
        assert_eq!(second.branch, FuseBranch::Iou);
        assert_eq!(second.fused_id, first.fused_id);
    }

    #[test]
    fn enclosure_fuses_via_ioe() {
        let mut mgr = TrackletManager::new(FusionConfig::default()).unwrap();
        let first = mgr.fuse_observation(&det("A", 1, 1, cube(0.0, 0.0, 0.0, 2.0))).unwrap();
        let inner = mgr.fuse_observation(&det("B", 2, 1, cube(0.1, 0.1, 0.1, 0.6))).unwrap();
        assert_eq!(inner.branch, FuseBranch::Ioe);
        assert_eq!(inner.fused_id, first.fused_id);
    }

    #[test]
    fn single_source_passthrough() {
        let mut mgr = TrackletManager::new(FusionConfig::default()).unwrap();
        let b = cube(1.0, 2.0, 0.9, 0.5);
        let out = mgr.fuse_frame(&[det("A", 3, 5, b.clone())], 5).unwrap();
        assert_eq!(out.boxes.len(), 1);
        assert_eq!(out.boxes[0].center, b.center);
        assert_eq!(out.boxes[0].extent, b.extent);
    }

    #[test]
    fn symmetric_mean_of_identical_boxes() {
        let mut mgr = TrackletManager::new(FusionConfig::default()).unwrap();
        let mut b = cube(1.0, 2.0, 0.9, 0.5);
        b.confidence = 0.5;
        let out = mgr.fuse_frame(&[det("A", 3, 1, b.clone()), det("B", 9, 1, b.clone())], 1).unwrap();
        assert_eq!(out.boxes.len(), 1);
        assert_relative_eq!(out.boxes[0].center, b.center, epsilon = 1e-12);
    }

    #[test]
    fn stale_tracklets_retire_and_release_pairs() {
        let cfg = FusionConfig { staleness_limit: 2, ..Default::default() };
        let mut mgr = TrackletManager::new(cfg).unwrap();
        let first = mgr.fuse_frame(&[det("A", 1, 1, cube(0.0, 0.0, 0.0, 1.0))], 1).unwrap();
        mgr.fuse_frame(&[], 4).unwrap();
        assert_eq!(mgr.live().count(), 0);
        assert_eq!(mgr.retired().len(), 1);
        let again = mgr.fuse_frame(&[det("A", 1, 5, cube(0.0, 0.0, 0.0, 1.0))], 5).unwrap();
        assert_ne!(again.outcomes[0].fused_id, first.outcomes[0].fused_id);
        assert_eq!(again.outcomes[0].branch, FuseBranch::NewTracklet);
    }

    #[test]
    fn out_of_order_frames_rejected() {
        let mut mgr = TrackletManager::new(FusionConfig::default()).unwrap();
        mgr.fuse_frame(&[], 5).unwrap();
        assert!(matches!(
            mgr.fuse_observation(&det("A", 1, 3, cube(0.0, 0.0, 0.0, 1.0))),
            Err(FusionError::FrameOrder { .. })
        ));
    }

    #[test]
    fn threshold_validation() {
        assert!(TrackletManager::new(FusionConfig { iou_threshold: 0.0, ..Default::default() }).is_err());
        assert!(TrackletManager::new(FusionConfig { ioe_threshold: 1.5, ..Default::default() }).is_err());
    }

    #[test]
    fn tie_goes_to_lower_id() {
        let mut mgr = TrackletManager::new(FusionConfig::default()).unwrap();
        mgr.fuse_observation(&det("A", 1, 1, cube(-0.5, 0.0, 0.0, 1.0))).unwrap();
        mgr.fuse_observation(&det("A", 2, 1, cube(0.5, 0.0, 0.0, 1.0))).unwrap();
        let mid = mgr.fuse_observation(&det("B", 1, 1, cube(0.0, 0.0, 0.0, 1.0))).unwrap();
        assert!(mid.tie);
        assert_eq!(mid.fused_id, 1);
    }

    #[test]
    fn safety_line_side() {
        // line along x at y = 2; left side (walking +x) is y > 2
        let line = SafetyLine::new(alloc::vec![[-10.0, 2.0], [10.0, 2.0]]).unwrap();
        assert_relative_eq!(line.signed_distance([0.0, 3.0]), 1.0);
        assert_relative_eq!(line.signed_distance([0.0, 0.5]), -1.5);
        assert_relative_eq!(line.signed_distance([20.0, 3.0]), 1.0);
        assert!(safety_report(&[], &line, (0, 100)).is_empty());
        let mut b = cube(0.0, 0.5, 0.9, 0.5);
        b.track_id = Some(3);
        assert!(safety_report(&[b], &line, (0, 100)).is_empty());
    }
}
