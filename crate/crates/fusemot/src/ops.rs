//! The registered node operations. Each one reads its declared inputs,
//! writes its artifacts into an output directory and nothing else, so the
//! same code backs both graph nodes and CLI subcommands.

use std::path::{Path, PathBuf};

use fusemot_core::depth_lift::{lift_detection, DepthMap};
use fusemot_core::fusion::{fuse_sequence, safety_report, FusionConfig};
use fusemot_core::geometry::{CameraIntrinsics, GroundPlane, StereoRig};
use fusemot_core::metrics::{evaluate_sequence, GtObject, Hypothesis, MatchMode, Region, TaskSetting};
use fusemot_core::occupancy::{build_occupancy, cluster_occupancy, ClusterConfig, GridConfig, LifecycleConfig, OccupancyTracker};
use fusemot_core::plane_calib::{ransac_plane_fit, validate_plane, walkable_points, PlaneFitConfig, PlaneValidation, WalkableMask};
use fusemot_core::sweep::{sweep_eval, SourceTracks, SweepConfig};
use fusemot_core::synth::{degrade_2d, degrade_3d, render_scenario, DegraderConfig, SynthScenario};
use fusemot_core::types::{BBox2D, BBox3D, SourceId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::formats::annotations::{read_annotations, read_safety_line, write_annotations, AnnotationFile};
use crate::formats::calibration::{read_calibration, read_plane, write_calibration, write_json, write_plane, CalibrationFile};
use crate::formats::mot::{by_frame, read_mot, write_mot, MotRecord};
use crate::formats::pgm::{frame_file_name, list_depth_frames, read_depth, write_depth};
use crate::formats::report::{gt_from_annotations, gt_from_mot, write_csv, write_report_json, ReportRow};
use crate::formats::track3d::{read_boxes, write_boxes};
use crate::formats::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum OpError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("input {0:?} not found in upstream outputs or on disk")]
    MissingInput(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("{0}")]
    Failed(String),
}

fn failed(e: impl std::fmt::Display) -> OpError {
    OpError::Failed(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Calibrate,
    Lift,
    Track3d,
    Ingest2d,
    Fuse,
    Eval,
    Synth,
}

impl NodeKind {
    pub const ALL: [NodeKind; 7] =
        [NodeKind::Calibrate, NodeKind::Lift, NodeKind::Track3d, NodeKind::Ingest2d, NodeKind::Fuse, NodeKind::Eval, NodeKind::Synth];

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Calibrate => "calibrate",
            NodeKind::Lift => "lift",
            NodeKind::Track3d => "track3d",
            NodeKind::Ingest2d => "ingest2d",
            NodeKind::Fuse => "fuse",
            NodeKind::Eval => "eval",
            NodeKind::Synth => "synth",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Parameters naming files or directories. Values are a path string or
    /// a list of them.
    pub fn file_params(self) -> &'static [&'static str] {
        match self {
            NodeKind::Calibrate => &["detections", "depth", "calibration"],
            NodeKind::Lift => &["detections", "depth", "calibration", "plane"],
            NodeKind::Track3d => &["depth", "calibration", "plane"],
            NodeKind::Ingest2d => &["file"],
            NodeKind::Fuse => &["tracks", "safety_line"],
            NodeKind::Eval => &["tracks", "gt"],
            NodeKind::Synth => &["scenario"],
        }
    }

    /// File parameters filled in when absent.
    pub fn default_files(self) -> &'static [(&'static str, &'static str)] {
        match self {
            NodeKind::Calibrate => &[("depth", "depth"), ("calibration", "calibration.json")],
            NodeKind::Lift => &[("depth", "depth"), ("calibration", "calibration.json"), ("plane", "plane.json")],
            NodeKind::Track3d => &[("depth", "depth"), ("calibration", "calibration.json"), ("plane", "plane.json")],
            _ => &[],
        }
    }

    pub fn execute(self, params: &Map<String, Value>, inputs: &Inputs, out: &Path) -> Result<(), OpError> {
        let mut params = params.clone();
        for (k, v) in self.default_files() {
            params.entry(k.to_string()).or_insert_with(|| Value::String(v.to_string()));
        }
        match self {
            NodeKind::Synth => synth(&decode(params)?, inputs, out),
            NodeKind::Ingest2d => ingest2d(&decode(params)?, inputs, out),
            NodeKind::Calibrate => calibrate(&decode(params)?, inputs, out),
            NodeKind::Lift => lift(&decode(params)?, inputs, out),
            NodeKind::Track3d => track3d(&decode(params)?, inputs, out),
            NodeKind::Fuse => fuse(&decode(params)?, inputs, out),
            NodeKind::Eval => eval(&decode(params)?, inputs, out),
        }
    }
}

fn decode<P: DeserializeOwned>(params: Map<String, Value>) -> Result<P, OpError> {
    serde_json::from_value(Value::Object(params)).map_err(|e| OpError::Params(e.to_string()))
}

/// Where a node looks up named input files: upstream output directories in
/// order, then paths relative to the base directory.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub base_dir: PathBuf,
    pub upstream: Vec<PathBuf>,
}

/// Where a file parameter resolved to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolved {
    Upstream { index: usize, path: PathBuf },
    External(PathBuf),
}

impl Resolved {
    pub fn path(&self) -> &Path {
        match self {
            Resolved::Upstream { path, .. } | Resolved::External(path) => path,
        }
    }
}

impl Inputs {
    pub fn standalone(base_dir: impl Into<PathBuf>) -> Self {
        Self { base_dir: base_dir.into(), upstream: Vec::new() }
    }

    pub fn locate(&self, name: &str) -> Result<Resolved, OpError> {
        let rel = Path::new(name);
        if rel.is_relative() {
            for (index, dir) in self.upstream.iter().enumerate() {
                let p = dir.join(rel);
                if p.exists() {
                    return Ok(Resolved::Upstream { index, path: p });
                }
            }
        }
        let p = self.base_dir.join(rel);
        if p.exists() {
            Ok(Resolved::External(p))
        } else {
            Err(OpError::MissingInput(name.to_string()))
        }
    }

    pub fn resolve(&self, name: &str) -> Result<PathBuf, OpError> {
        Ok(self.locate(name)?.path().to_path_buf())
    }
}

fn file_stem(name: &str) -> String {
    Path::new(name).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| name.to_string())
}

fn check_name(name: &str) -> Result<(), OpError> {
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && !name.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(OpError::Params(format!("{name:?} is not a valid source name")))
    }
}

fn load_intrinsics(inputs: &Inputs, name: &str) -> Result<CameraIntrinsics, OpError> {
    Ok(read_calibration(&inputs.resolve(name)?)?.intrinsics()?)
}

fn load_depth(dir: &Path, frame: u32) -> Result<Option<DepthMap>, OpError> {
    let p = dir.join(frame_file_name(frame));
    if p.exists() {
        Ok(Some(read_depth(&p)?))
    } else {
        Ok(None)
    }
}

// ---------------------------------------------------------------- synth

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    /// Scenario JSON; when absent a random platform scene is generated.
    pub scenario: Option<String>,
    pub seed: u64,
    pub agents: usize,
    pub frames: u32,
    pub baseline_m: f64,
    pub safety_line: Option<Vec<[f64; 2]>>,
    /// Plane-frame rectangle `[x0, y0, x1, y1]` for 3D false positives.
    pub fp_area: [f64; 4],
    pub degraders_3d: Vec<DegraderConfig>,
    pub degraders_2d: Vec<DegraderConfig>,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            scenario: None,
            seed: 0,
            agents: 5,
            frames: 60,
            baseline_m: 0.12,
            safety_line: None,
            fp_area: [-3.0, 4.0, 3.0, 10.0],
            degraders_3d: Vec::new(),
            degraders_2d: Vec::new(),
        }
    }
}

/// Writes `scenario.json`, `calibration.json`, `plane_truth.json`,
/// `annotations.json`, `gt.txt` (image boxes plus plane positions),
/// `gt3d.trk`, `depth/NNNNNN.pgm` and one track file per degrader.
pub fn synth(p: &SynthParams, inputs: &Inputs, out: &Path) -> Result<(), OpError> {
    let scenario: SynthScenario = match &p.scenario {
        Some(name) => {
            let text = std::fs::read_to_string(inputs.resolve(name)?)
                .map_err(|source| FormatError::Io { path: PathBuf::from(name), source })?;
            serde_json::from_str(&text).map_err(FormatError::from)?
        }
        None => SynthScenario::random_platform(p.seed, p.agents, p.frames),
    };
    scenario.validate().map_err(failed)?;
    let rendered = render_scenario(&scenario).map_err(failed)?;
    let plane = scenario.plane().map_err(failed)?;
    let intr = scenario.camera.intrinsics;
    let rig = StereoRig::new(intr, p.baseline_m).map_err(|e| OpError::Params(e.to_string()))?;

    write_json(&scenario, &out.join("scenario.json"))?;
    write_calibration(&CalibrationFile::from_rig(&rig), &out.join("calibration.json"))?;
    write_plane(&plane, &out.join("plane_truth.json"))?;
    let safety_line = match &p.safety_line {
        Some(points) => Some(
            fusemot_core::fusion::SafetyLine::new(points.clone())
                .ok_or_else(|| OpError::Params("safety_line needs at least two points".into()))?,
        ),
        None => None,
    };
    let gt = &rendered.ground_truth;
    write_annotations(&AnnotationFile { annotations: gt.annotations.clone(), safety_line }, &out.join("annotations.json"))?;
    let gt_mot: Vec<MotRecord> = gt
        .annotations
        .iter()
        .map(|a| {
            let [x, y] = a.position.unwrap_or([-1.0, -1.0]);
            MotRecord {
                frame: a.frame,
                id: a.id as i64,
                bb_left: a.bbox[0],
                bb_top: a.bbox[1],
                bb_width: a.bbox[2],
                bb_height: a.bbox[3],
                conf: 1.0,
                x,
                y,
                z: 0.0,
            }
        })
        .collect();
    write_mot(&gt_mot, &out.join("gt.txt"))?;
    write_boxes(&gt.tracks, &out.join("gt3d.trk"))?;
    for (i, d) in rendered.depth.iter().enumerate() {
        write_depth(d, &out.join("depth").join(frame_file_name(i as u32 + 1)))?;
    }

    let mut names = std::collections::BTreeSet::new();
    for cfg in p.degraders_3d.iter().chain(&p.degraders_2d) {
        check_name(&cfg.source)?;
        if !names.insert(cfg.source.as_str()) {
            return Err(OpError::Params(format!("duplicate degrader source {:?}", cfg.source)));
        }
    }
    for cfg in &p.degraders_3d {
        let boxes = degrade_3d(&gt.tracks, cfg, p.fp_area).map_err(failed)?;
        write_boxes(&boxes, &out.join(format!("{}.trk", cfg.source)))?;
    }
    let gt2d = gt.boxes_2d();
    for cfg in &p.degraders_2d {
        let boxes = degrade_2d(&gt2d, cfg, intr.width, intr.height).map_err(failed)?;
        let records: Vec<MotRecord> = boxes.iter().map(|(f, b)| MotRecord::from_bbox(*f, b)).collect();
        write_mot(&records, &out.join(format!("{}.txt", cfg.source)))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- ingest2d

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ingest2dParams {
    pub file: String,
    /// Output name; defaults to the input file stem.
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default)]
    pub min_confidence: Option<f64>,
}

/// Normalizes a 2D MOT file into `<source>.txt`.
pub fn ingest2d(p: &Ingest2dParams, inputs: &Inputs, out: &Path) -> Result<(), OpError> {
    let source = p.source.clone().unwrap_or_else(|| file_stem(&p.file));
    check_name(&source)?;
    let mut records = read_mot(&inputs.resolve(&p.file)?)?;
    if let Some(c) = p.min_confidence {
        records.retain(|r| r.conf >= c);
    }
    records.sort_by_key(|a| (a.frame, a.id));
    write_mot(&records, &out.join(format!("{source}.txt")))?;
    Ok(())
}

// ---------------------------------------------------------------- calibrate

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateParams {
    /// 2D detections accumulated into the walkable mask.
    pub detections: String,
    pub depth: String,
    pub calibration: String,
    #[serde(default = "default_mask_threshold")]
    pub mask_threshold: u32,
    #[serde(default = "default_stride")]
    pub stride: u32,
    /// Depth frames sampled for plane points; all frames when absent.
    #[serde(default)]
    pub frames: Option<Vec<u32>>,
    #[serde(default)]
    pub fit: PlaneFitConfig,
    /// Fail instead of writing a plane that violates the priors.
    #[serde(default = "default_true")]
    pub require_valid: bool,
}

fn default_mask_threshold() -> u32 {
    WalkableMask::DEFAULT_THRESHOLD
}

fn default_stride() -> u32 {
    4
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub validation: PlaneValidation,
    pub points: usize,
    pub inliers: usize,
    pub consensus: usize,
    pub inlier_fraction: f64,
    pub rms_m: f64,
    pub camera_height_m: f64,
    pub walkable_pixels: usize,
}

/// Fits the ground plane to backprojected walkable pixels. Writes
/// `plane.json` and `calibration_report.json`.
pub fn calibrate(p: &CalibrateParams, inputs: &Inputs, out: &Path) -> Result<(), OpError> {
    let intr = load_intrinsics(inputs, &p.calibration)?;
    let dets = by_frame(&read_mot(&inputs.resolve(&p.detections)?)?, &SourceId::new("detections"));
    let mut mask = WalkableMask::new(intr.width, intr.height, p.mask_threshold);
    for boxes in dets.values() {
        mask.accumulate(boxes);
    }
    let depth_dir = inputs.resolve(&p.depth)?;
    let frames = match &p.frames {
        Some(f) => f.clone(),
        None => list_depth_frames(&depth_dir)?,
    };
    let mut points = Vec::new();
    for f in frames {
        let Some(depth) = load_depth(&depth_dir, f)? else {
            return Err(OpError::MissingInput(format!("{}/{}", p.depth, frame_file_name(f))));
        };
        let occluders = dets.get(&f).map(Vec::as_slice).unwrap_or(&[]);
        points.extend(walkable_points(&mask, &depth, &intr, occluders, p.stride));
    }
    let fit = ransac_plane_fit(&points, &p.fit).map_err(failed)?;
    let inlier_points: Vec<_> = fit.inliers.iter().map(|&i| points[i]).collect();
    let validation = validate_plane(&fit.plane, &inlier_points, &p.fit);
    let report = CalibrationReport {
        validation,
        points: points.len(),
        inliers: fit.inliers.len(),
        consensus: fit.consensus,
        inlier_fraction: fit.inlier_fraction,
        rms_m: fit.rms,
        camera_height_m: fit.plane.camera_height(),
        walkable_pixels: mask.walkable_count(),
    };
    write_json(&report, &out.join("calibration_report.json"))?;
    if p.require_valid && !validation.is_accept() {
        return Err(OpError::Failed(format!("fitted plane rejected: {validation:?}")));
    }
    write_plane(&fit.plane, &out.join("plane.json"))?;
    Ok(())
}

// ---------------------------------------------------------------- lift

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftParams {
    pub detections: String,
    pub depth: String,
    pub calibration: String,
    pub plane: String,
    /// Tracker id of the lifted boxes; defaults to the detection file stem.
    #[serde(default)]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub lifted: usize,
    pub skipped_no_depth: usize,
    pub skipped_outside: usize,
}

/// Lifts every 2D detection with the depth map of its frame. Writes
/// `<source>.trk` and `<source>_lift.json` with the skip counts.
pub fn lift(p: &LiftParams, inputs: &Inputs, out: &Path) -> Result<(), OpError> {
    let source = p.source.clone().unwrap_or_else(|| file_stem(&p.detections));
    check_name(&source)?;
    let intr = load_intrinsics(inputs, &p.calibration)?;
    let plane = read_plane(&inputs.resolve(&p.plane)?)?;
    let depth_dir = inputs.resolve(&p.depth)?;
    let sid = SourceId::new(source.clone());
    let dets = by_frame(&read_mot(&inputs.resolve(&p.detections)?)?, &sid);
    let mut boxes = Vec::new();
    let mut report = LiftReport { lifted: 0, skipped_no_depth: 0, skipped_outside: 0 };
    for (&frame, frame_dets) in &dets {
        let Some(depth) = load_depth(&depth_dir, frame)? else {
            report.skipped_no_depth += frame_dets.len();
            continue;
        };
        for det in frame_dets {
            match lift_box(&depth, det, &intr, &plane, frame) {
                Ok(b) => {
                    boxes.push(b);
                    report.lifted += 1;
                }
                Err(fusemot_core::depth_lift::DepthError::OutsideImage) => report.skipped_outside += 1,
                Err(_) => report.skipped_no_depth += 1,
            }
        }
    }
    write_boxes(&boxes, &out.join(format!("{source}.trk")))?;
    write_json(&report, &out.join(format!("{source}_lift.json")))?;
    Ok(())
}

fn lift_box(
    depth: &DepthMap,
    det: &BBox2D,
    intr: &CameraIntrinsics,
    plane: &GroundPlane,
    frame: u32,
) -> Result<BBox3D, fusemot_core::depth_lift::DepthError> {
    let mut b = lift_detection(depth, det, intr, plane)?;
    b.frame_index = frame;
    Ok(b)
}

// ---------------------------------------------------------------- track3d

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Track3dParams {
    pub depth: String,
    pub calibration: String,
    pub plane: String,
    #[serde(default = "default_occupancy_source")]
    pub source: String,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub lifecycle: LifecycleConfig,
}

fn default_occupancy_source() -> String {
    fusemot_core::occupancy::OCCUPANCY_SOURCE.to_string()
}

/// Occupancy-map tracking over every depth frame. Writes `<source>.trk`.
pub fn track3d(p: &Track3dParams, inputs: &Inputs, out: &Path) -> Result<(), OpError> {
    check_name(&p.source)?;
    let intr = load_intrinsics(inputs, &p.calibration)?;
    let plane = read_plane(&inputs.resolve(&p.plane)?)?;
    let depth_dir = inputs.resolve(&p.depth)?;
    let mut tracker = OccupancyTracker::new(p.lifecycle);
    let sid = SourceId::new(p.source.clone());
    let mut boxes = Vec::new();
    let mut prev: Option<u32> = None;
    for f in list_depth_frames(&depth_dir)? {
        let depth = read_depth(&depth_dir.join(frame_file_name(f)))?;
        let grid = build_occupancy(&depth, &intr, &plane, &p.grid);
        let clusters = cluster_occupancy(&grid, &p.cluster);
        let dt = prev.map_or(1.0, |q| (f - q) as f64) / p.lifecycle.frame_rate;
        prev = Some(f);
        for mut b in tracker.step(&clusters, dt, f) {
            b.source_id = sid.clone();
            boxes.push(b);
        }
    }
    write_boxes(&boxes, &out.join(format!("{}.trk", p.source)))?;
    Ok(())
}

// ---------------------------------------------------------------- fuse

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuseParams {
    pub tracks: Vec<String>,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default = "default_fused_name")]
    pub output: String,
    /// Annotation file carrying the safety line; adds `safety.json`.
    #[serde(default)]
    pub safety_line: Option<String>,
}

fn default_fused_name() -> String {
    "fused".to_string()
}

fn load_sources(inputs: &Inputs, names: &[String]) -> Result<Vec<SourceTracks>, OpError> {
    let mut seen = std::collections::BTreeSet::new();
    names
        .iter()
        .map(|n| {
            let name = file_stem(n);
            if !seen.insert(name.clone()) {
                return Err(OpError::Params(format!("duplicate source {name:?}")));
            }
            let mut boxes = read_boxes(&inputs.resolve(n)?)?;
            // tracker identity comes from the file, so ids stay per-source
            let sid = SourceId::new(name.clone());
            for b in &mut boxes {
                b.source_id = sid.clone();
            }
            Ok(SourceTracks { name, boxes })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct SafetyDocument {
    frames: (u32, u32),
    violations: Vec<fusemot_core::fusion::SafetyViolation>,
}

/// Fuses the listed track files. Writes `<output>.trk`.
pub fn fuse(p: &FuseParams, inputs: &Inputs, out: &Path) -> Result<(), OpError> {
    check_name(&p.output)?;
    if p.tracks.is_empty() {
        return Err(OpError::Params("tracks must list at least one file".into()));
    }
    let line = match &p.safety_line {
        Some(name) => Some(read_safety_line(&inputs.resolve(name)?)?),
        None => None,
    };
    let sources = load_sources(inputs, &p.tracks)?;
    let all: Vec<BBox3D> = sources.into_iter().flat_map(|s| s.boxes).collect();
    let (fused, _) = fuse_sequence(&all, p.fusion).map_err(failed)?;
    write_boxes(&fused, &out.join(format!("{}.trk", p.output)))?;
    if let Some(line) = line {
        let lo = all.iter().map(|b| b.frame_index).min().unwrap_or(0);
        let hi = all.iter().map(|b| b.frame_index).max().unwrap_or(0);
        let violations = safety_report(&fused, &line, (lo, hi));
        write_json(&SafetyDocument { frames: (lo, hi), violations }, &out.join("safety.json"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- eval

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSpace {
    /// Plane-frame positions from `.trk` files.
    #[default]
    Plane,
    /// Image boxes from MOT files.
    Image,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalParams {
    pub tracks: Vec<String>,
    /// `annotations.json` or a MOT file with plane positions in x, y.
    pub gt: String,
    /// Evaluate every non-empty subset (fusing those larger than one).
    #[serde(default)]
    pub combinations: bool,
    #[serde(default)]
    pub space: EvalSpace,
    /// Plane distance gate (meters) or minimum IoU, by space.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default = "default_settings")]
    pub settings: Vec<TaskSetting>,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default = "default_scene")]
    pub scene: String,
    #[serde(default = "default_results_name")]
    pub output: String,
}

fn default_settings() -> Vec<TaskSetting> {
    vec![TaskSetting::All, TaskSetting::Peds]
}

fn default_scene() -> String {
    "scene".to_string()
}

fn default_results_name() -> String {
    "results".to_string()
}

fn load_gt(path: &Path, space: EvalSpace) -> Result<Vec<GtObject>, OpError> {
    let is_json = path.extension().is_some_and(|e| e == "json");
    Ok(match (is_json, space) {
        (true, EvalSpace::Plane) => gt_from_annotations(&read_annotations(path)?.annotations),
        (true, EvalSpace::Image) => read_annotations(path)?
            .annotations
            .iter()
            .map(|a| GtObject {
                frame: a.frame,
                gt_id: a.id,
                region: Region::Image(a.bbox),
                occlusion: a.occlusion,
                class_label: a.class_label,
            })
            .collect(),
        (false, EvalSpace::Plane) => gt_from_mot(&read_mot(path)?),
        (false, EvalSpace::Image) => read_mot(path)?
            .iter()
            .filter_map(|r| {
                Some(GtObject {
                    frame: r.frame,
                    gt_id: u64::try_from(r.id).ok()?,
                    region: Region::Image([r.bb_left, r.bb_top, r.bb_width, r.bb_height]),
                    occlusion: Default::default(),
                    class_label: Default::default(),
                })
            })
            .collect(),
    })
}

/// Evaluates track files against ground truth into `<output>.csv` and
/// `<output>.json`.
pub fn eval(p: &EvalParams, inputs: &Inputs, out: &Path) -> Result<(), OpError> {
    check_name(&p.output)?;
    if p.tracks.is_empty() {
        return Err(OpError::Params("tracks must list at least one file".into()));
    }
    let gt = load_gt(&inputs.resolve(&p.gt)?, p.space)?;
    let mode = match (p.space, p.threshold) {
        (EvalSpace::Plane, None) => MatchMode::PLANE_DEFAULT,
        (EvalSpace::Plane, Some(d)) => MatchMode::PlaneDistance { max_distance: d },
        (EvalSpace::Image, None) => MatchMode::IMAGE_DEFAULT,
        (EvalSpace::Image, Some(t)) => MatchMode::ImageIou { min_iou: t },
    };
    let rows: Vec<ReportRow> = match p.space {
        EvalSpace::Plane => {
            let sources = load_sources(inputs, &p.tracks)?;
            let cfg = SweepConfig { fusion: p.fusion, mode, settings: p.settings.clone() };
            if p.combinations {
                sweep_eval(&sources, &gt, &cfg).map_err(failed)?.iter().map(|r| ReportRow::from_sweep(&p.scene, r)).collect()
            } else {
                let mut rows = Vec::new();
                for &setting in &p.settings {
                    for s in &sources {
                        let hyps = fusemot_core::sweep::hypotheses(&s.boxes);
                        rows.push(score_row(&p.scene, setting, &s.name, &gt, &hyps, mode)?);
                    }
                }
                rows
            }
        }
        EvalSpace::Image => {
            if p.combinations && p.tracks.len() > 1 {
                return Err(OpError::Params("combinations need plane-frame tracks".into()));
            }
            let mut per_source = Vec::new();
            for n in &p.tracks {
                let hyps: Vec<Hypothesis> = read_mot(&inputs.resolve(n)?)?
                    .iter()
                    .map(|r| Hypothesis {
                        frame: r.frame,
                        hyp_id: r.id.max(0) as u64,
                        region: Region::Image([r.bb_left, r.bb_top, r.bb_width, r.bb_height]),
                    })
                    .collect();
                per_source.push((file_stem(n), hyps));
            }
            let mut rows = Vec::new();
            for &setting in &p.settings {
                for (name, hyps) in &per_source {
                    rows.push(score_row(&p.scene, setting, name, &gt, hyps, mode)?);
                }
            }
            rows
        }
    };
    write_csv(&rows, &out.join(format!("{}.csv", p.output)))?;
    write_report_json(&rows, &out.join(format!("{}.json", p.output)))?;
    Ok(())
}

fn score_row(
    scene: &str,
    setting: TaskSetting,
    name: &str,
    gt: &[GtObject],
    hyps: &[Hypothesis],
    mode: MatchMode,
) -> Result<ReportRow, OpError> {
    let metrics = evaluate_sequence(gt, hyps, mode, setting).ok();
    Ok(ReportRow { scene: scene.to_string(), setting: setting.name().to_string(), sources: name.to_string(), metrics })
}

/// Four 3D sources that miss disjoint frame windows; the last one also
/// produces many false positives.
pub fn complementary_degraders(seed: u64) -> Vec<DegraderConfig> {
    (0..4u32)
        .map(|k| DegraderConfig {
            source: format!("source{}", k + 1),
            miss_probability: 0.05,
            fp_rate: if k == 3 { 1.0 } else { 0.05 },
            noise_px: 0.0,
            noise_m: 0.05,
            id_switch_probability: 0.01,
            seed: seed.wrapping_mul(1000).wrapping_add(k as u64 + 1),
            blackout: Some(DegraderConfig::complementary(k, 4, 8)),
        })
        .collect()
}
