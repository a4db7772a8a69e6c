//! Enumeration and evaluation of every non-empty combination of sources.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::fusion::{fuse_sequence, FusionConfig, FusionError};
use crate::metrics::{evaluate_sequence, GtObject, Hypothesis, MatchMode, MetricsError, MetricsReport, Region, TaskSetting};
use crate::types::BBox3D;

pub const MAX_SOURCES: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("{0} sources exceed the limit of 16")]
    TooManySources(usize),
    #[error("missing source: {0}")]
    MissingSource(String),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// Counts of the algorithmic stages feeding the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub stereo: usize,
    pub ground_plane: usize,
    pub image_based: usize,
    pub depth_based: usize,
}

impl SourceCounts {
    /// Number of MOT results: `stereo · (image_based + ground_plane · depth_based)`.
    pub fn sources(&self) -> usize {
        self.stereo * (self.image_based + self.ground_plane * self.depth_based)
    }

    /// Number of non-empty combinations, `2^n − 1`.
    pub fn combinations(&self) -> Result<usize, SweepError> {
        Ok(enumerate_combinations(self.sources())?.len())
    }
}

/// All non-empty subsets of `0..n`, ordered by size then lexicographically.
pub fn enumerate_combinations(n: usize) -> Result<Vec<Vec<usize>>, SweepError> {
    if n > MAX_SOURCES {
        return Err(SweepError::TooManySources(n));
    }
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(subsets)
}

/// One tracker output in the plane frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTracks {
    pub name: String,
    pub boxes: Vec<BBox3D>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Names of the sources in the subset, in input order.
    pub sources: Vec<String>,
    pub setting: TaskSetting,
    /// Absent when the setting leaves no ground truth to score.
    pub report: Option<MetricsReport>,
}

impl SweepRow {
    /// Subset label such as `a+c`.
    pub fn label(&self) -> String {
        self.sources.join("+")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub fusion: FusionConfig,
    pub mode: MatchMode,
    pub settings: Vec<TaskSetting>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            fusion: FusionConfig::default(),
            mode: MatchMode::PLANE_DEFAULT,
            settings: alloc::vec![TaskSetting::All, TaskSetting::Peds],
        }
    }
}

/// Plane-frame ground positions of boxes as evaluation hypotheses.
pub fn hypotheses(boxes: &[BBox3D]) -> Vec<Hypothesis> {
    boxes
        .iter()
        .map(|b| Hypothesis { frame: b.frame_index, hyp_id: b.track_id.unwrap_or(0), region: Region::Plane(b.ground_position()) })
        .collect()
}

/// Output of a subset: single sources pass through, larger subsets are fused.
pub fn subset_tracks(sources: &[SourceTracks], subset: &[usize], fusion: FusionConfig) -> Result<Vec<BBox3D>, SweepError> {
    if let [only] = subset {
        let s = sources.get(*only).ok_or_else(|| SweepError::MissingSource(alloc::format!("#{only}")))?;
        return Ok(s.boxes.clone());
    }
    let mut all = Vec::new();
    for &i in subset {
        let s = sources.get(i).ok_or_else(|| SweepError::MissingSource(alloc::format!("#{i}")))?;
        all.extend(s.boxes.iter().cloned());
    }
    Ok(fuse_sequence(&all, fusion)?.0)
}

/// Evaluates every combination under every configured setting. Rows are
/// grouped by setting, combinations in canonical order within each group.
pub fn sweep_eval(sources: &[SourceTracks], gt: &[GtObject], cfg: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    let subsets = enumerate_combinations(sources.len())?;
    let mut per_subset = Vec::with_capacity(subsets.len());
    for subset in &subsets {
        per_subset.push(hypotheses(&subset_tracks(sources, subset, cfg.fusion)?));
    }
    let mut rows = Vec::new();
    for &setting in &cfg.settings {
        for (subset, hyps) in subsets.iter().zip(&per_subset) {
            let report = match evaluate_sequence(gt, hyps, cfg.mode, setting) {
                Ok(r) => Some(r),
                Err(MetricsError::EmptyGroundTruth) => None,
                Err(MetricsError::NoMatches) => None,
            };
            rows.push(SweepRow { sources: subset.iter().map(|&i| sources[i].name.clone()).collect(), setting, report });
        }
    }
    Ok(rows)
}
