//! CLEAR-MOT and identity metrics.
//!
//! Per frame, ground truth and hypotheses are matched under a distance
//! threshold: pairings from earlier frames are kept while still valid, the
//! rest is solved by minimum-cost assignment. A sequence-level bipartite
//! matching between whole trajectories yields IDF1/IDP/IDR.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::assignment::{associate_hungarian, solve, CostMatrix};
use crate::types::{rect_iou, ClassLabel, Occlusion};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("sequence has no ground-truth objects")]
    EmptyGroundTruth,
    #[error("no matched pairs; MOTP undefined")]
    NoMatches,
}

/// What a frame-level match compares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Image boxes; match when IoU ≥ `min_iou`, cost `1 − IoU`.
    ImageIou { min_iou: f64 },
    /// Ground positions; match when distance ≤ `max_distance` meters, cost = distance.
    PlaneDistance { max_distance: f64 },
}

impl MatchMode {
    pub const IMAGE_DEFAULT: MatchMode = MatchMode::ImageIou { min_iou: 0.5 };
    pub const PLANE_DEFAULT: MatchMode = MatchMode::PlaneDistance { max_distance: 1.0 };

    pub fn name(&self) -> &'static str {
        match self {
            MatchMode::ImageIou { .. } => "image_iou",
            MatchMode::PlaneDistance { .. } => "plane_distance",
        }
    }

    /// Match cost, `None` when the pair is outside the threshold.
    pub fn cost(&self, gt: &Region, hyp: &Region) -> Option<f64> {
        match (self, gt, hyp) {
            (MatchMode::ImageIou { min_iou }, Region::Image(a), Region::Image(b)) => {
                let iou = rect_iou(*a, *b);
                (iou >= *min_iou && iou > 0.0).then_some(1.0 - iou)
            }
            (MatchMode::PlaneDistance { max_distance }, Region::Plane(a), Region::Plane(b)) => {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                (d <= *max_distance).then_some(d)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// `[left, top, width, height]`, pixels.
    Image([f64; 4]),
    /// Plane-frame `(x, y)`, meters.
    Plane([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameObject {
    pub id: u64,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtObject {
    pub frame: u32,
    pub gt_id: u64,
    pub region: Region,
    pub occlusion: Occlusion,
    pub class_label: ClassLabel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypothesis {
    pub frame: u32,
    pub hyp_id: u64,
    pub region: Region,
}

/// Evaluation subset of the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TaskSetting {
    /// Every annotated object.
    All,
    /// Humans that are less than 75% occluded.
    Peds,
}

impl TaskSetting {
    pub fn keeps(&self, class: ClassLabel, occlusion: Occlusion) -> bool {
        match self {
            TaskSetting::All => true,
            TaskSetting::Peds => class.is_human() && occlusion < Occlusion::ThreeQuarters,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TaskSetting::All => "ALL",
            TaskSetting::Peds => "PEDS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatching {
    pub frame: u32,
    /// `(gt_id, hyp_id, cost)`.
    pub matches: Vec<(u64, u64, f64)>,
    pub false_positives: Vec<u64>,
    pub misses: Vec<u64>,
    /// gt ids whose matched hypothesis differs from the one in `prev_matching`.
    pub switches: Vec<u64>,
}

/// Matches one frame. `prev_matching` maps gt ids to their most recent hypothesis.
pub fn match_frame(
    frame: u32,
    gts: &[FrameObject],
    hyps: &[FrameObject],
    mode: &MatchMode,
    prev_matching: &BTreeMap<u64, u64>,
) -> FrameMatching {
    let mut gt_done = alloc::vec![false; gts.len()];
    let mut hyp_done = alloc::vec![false; hyps.len()];
    let mut out = FrameMatching { frame, ..Default::default() };

    for (gi, g) in gts.iter().enumerate() {
        let Some(&prev_h) = prev_matching.get(&g.id) else { continue };
        let Some(hi) = hyps.iter().enumerate().position(|(hi, h)| !hyp_done[hi] && h.id == prev_h) else {
            continue;
        };
        if let Some(c) = mode.cost(&g.region, &hyps[hi].region) {
            gt_done[gi] = true;
            hyp_done[hi] = true;
            out.matches.push((g.id, hyps[hi].id, c));
        }
    }

    let open_g: Vec<usize> = (0..gts.len()).filter(|&i| !gt_done[i]).collect();
    let open_h: Vec<usize> = (0..hyps.len()).filter(|&i| !hyp_done[i]).collect();
    let costs = CostMatrix::from_fn(open_g.len(), open_h.len(), |r, c| {
        mode.cost(&gts[open_g[r]].region, &hyps[open_h[c]].region).unwrap_or(f64::INFINITY)
    });
    let assignment = associate_hungarian(&costs, f64::MAX);
    for &(r, c) in &assignment.pairs {
        let (g, h) = (&gts[open_g[r]], &hyps[open_h[c]]);
        gt_done[open_g[r]] = true;
        hyp_done[open_h[c]] = true;
        out.matches.push((g.id, h.id, costs.get(r, c)));
        if prev_matching.get(&g.id).is_some_and(|&p| p != h.id) {
            out.switches.push(g.id);
        }
    }
    out.misses = gts.iter().zip(&gt_done).filter(|(_, d)| !**d).map(|(g, _)| g.id).collect();
    out.false_positives = hyps.iter().zip(&hyp_done).filter(|(_, d)| !**d).map(|(h, _)| h.id).collect();
    out.matches.sort_by_key(|m| m.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct GtCoverage {
    present: u32,
    tracked: u32,
    fragments: u32,
    ever_tracked: bool,
    last_tracked: bool,
}

/// Running per-sequence state.
#[derive(Debug, Clone)]
pub struct MetricsAccumulator {
    mode: MatchMode,
    events: Vec<FrameMatching>,
    last_match: BTreeMap<u64, u64>,
    coverage: BTreeMap<u64, GtCoverage>,
    hyp_counts: BTreeMap<u64, u32>,
    cooccurrence: BTreeMap<(u64, u64), u32>,
    num_gt_dets: u64,
    num_hyp_dets: u64,
    num_matches: u64,
    fp: u64,
    fn_: u64,
    ids: u64,
    cost_sum: f64,
}

impl MetricsAccumulator {
    pub fn new(mode: MatchMode) -> Self {
        Self {
            mode,
            events: Vec::new(),
            last_match: BTreeMap::new(),
            coverage: BTreeMap::new(),
            hyp_counts: BTreeMap::new(),
            cooccurrence: BTreeMap::new(),
            num_gt_dets: 0,
            num_hyp_dets: 0,
            num_matches: 0,
            fp: 0,
            fn_: 0,
            ids: 0,
            cost_sum: 0.0,
        }
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn events(&self) -> &[FrameMatching] {
        &self.events
    }

    pub fn update(&mut self, frame: u32, gts: &[FrameObject], hyps: &[FrameObject]) -> &FrameMatching {
        let m = match_frame(frame, gts, hyps, &self.mode, &self.last_match);
        self.num_gt_dets += gts.len() as u64;
        self.num_hyp_dets += hyps.len() as u64;
        self.num_matches += m.matches.len() as u64;
        self.fp += m.false_positives.len() as u64;
        self.fn_ += m.misses.len() as u64;
        self.ids += m.switches.len() as u64;
        let matched: BTreeSet<u64> = m.matches.iter().map(|x| x.0).collect();
        for &(g, h, c) in &m.matches {
            self.cost_sum += c;
            self.last_match.insert(g, h);
        }
        for g in gts {
            let cov = self.coverage.entry(g.id).or_default();
            cov.present += 1;
            let tracked = matched.contains(&g.id);
            if tracked {
                cov.tracked += 1;
                if cov.ever_tracked && !cov.last_tracked {
                    cov.fragments += 1;
                }
                cov.ever_tracked = true;
            }
            cov.last_tracked = tracked;
        }
        for h in hyps {
            *self.hyp_counts.entry(h.id).or_default() += 1;
        }
        for g in gts {
            for h in hyps {
                if self.mode.cost(&g.region, &h.region).is_some() {
                    *self.cooccurrence.entry((g.id, h.id)).or_default() += 1;
                }
            }
        }
        self.events.push(m);
        self.events.last().expect("just pushed")
    }

    pub fn num_gt_dets(&self) -> u64 {
        self.num_gt_dets
    }

    pub fn num_hyp_dets(&self) -> u64 {
        self.num_hyp_dets
    }

    pub fn num_matches(&self) -> u64 {
        self.num_matches
    }

    pub fn false_positives(&self) -> u64 {
        self.fp
    }

    pub fn misses(&self) -> u64 {
        self.fn_
    }

    pub fn switches(&self) -> u64 {
        self.ids
    }

    /// Frames each `(gt, hyp)` pair is within the match threshold.
    pub fn cooccurrence(&self) -> &BTreeMap<(u64, u64), u32> {
        &self.cooccurrence
    }
}

/// `1 − (FP + FN + IDs) / number of ground-truth detections`.
pub fn compute_mota(acc: &MetricsAccumulator) -> Result<f64, MetricsError> {
    if acc.num_gt_dets == 0 {
        return Err(MetricsError::EmptyGroundTruth);
    }
    Ok(1.0 - (acc.fp + acc.fn_ + acc.ids) as f64 / acc.num_gt_dets as f64)
}

/// Mean match cost over all matched pairs, in the accumulator's mode units.
pub fn compute_motp(acc: &MetricsAccumulator) -> Result<f64, MetricsError> {
    if acc.num_matches == 0 {
        return Err(MetricsError::NoMatches);
    }
    Ok(acc.cost_sum / acc.num_matches as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IdMetrics {
    pub idtp: u64,
    pub idfp: u64,
    pub idfn: u64,
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
}

impl IdMetrics {
    pub fn from_counts(idtp: u64, num_gt_dets: u64, num_hyp_dets: u64) -> Self {
        let idfn = num_gt_dets - idtp;
        let idfp = num_hyp_dets - idtp;
        let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        Self {
            idtp,
            idfp,
            idfn,
            idf1: ratio(2 * idtp, 2 * idtp + idfp + idfn),
            idp: ratio(idtp, idtp + idfp),
            idr: ratio(idtp, idtp + idfn),
        }
    }
}

/// Global one-to-one trajectory matching maximizing co-occurring frames,
/// which minimizes the number of unmatched detections.
pub fn compute_id_metrics(acc: &MetricsAccumulator) -> IdMetrics {
    let gts: Vec<u64> = acc.coverage.keys().copied().collect();
    let hyps: Vec<u64> = acc.hyp_counts.keys().copied().collect();
    let gi: BTreeMap<u64, usize> = gts.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let hi: BTreeMap<u64, usize> = hyps.iter().enumerate().map(|(i, h)| (*h, i)).collect();
    let mut co = alloc::vec![0u32; gts.len() * hyps.len()];
    for (&(g, h), &n) in &acc.cooccurrence {
        co[gi[&g] * hyps.len() + hi[&h]] = n;
    }
    let costs = CostMatrix::from_fn(gts.len(), hyps.len(), |r, c| -(co[r * hyps.len() + c] as f64));
    let idtp: u64 = solve(&costs)
        .into_iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| co[r * hyps.len() + c] as u64))
        .sum();
    IdMetrics::from_counts(idtp, acc.num_gt_dets, acc.num_hyp_dets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Coverage {
    pub gt: usize,
    pub mt: usize,
    pub pt: usize,
    pub ml: usize,
    pub fm: u64,
}

/// Mostly tracked ≥ 80% of lifespan, mostly lost < 20%, partially tracked otherwise.
pub fn compute_coverage(acc: &MetricsAccumulator) -> Coverage {
    let mut cov = Coverage { gt: acc.coverage.len(), ..Default::default() };
    for c in acc.coverage.values() {
        let ratio = c.tracked as f64 / c.present.max(1) as f64;
        if ratio >= 0.8 {
            cov.mt += 1;
        } else if ratio < 0.2 {
            cov.ml += 1;
        } else {
            cov.pt += 1;
        }
        cov.fm += c.fragments as u64;
    }
    cov
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "IDF1")]
    pub idf1: f64,
    #[serde(rename = "IDP")]
    pub idp: f64,
    #[serde(rename = "IDR")]
    pub idr: f64,
    #[serde(rename = "Rcll")]
    pub recall: f64,
    #[serde(rename = "Prcn")]
    pub precision: f64,
    #[serde(rename = "GT")]
    pub gt: usize,
    #[serde(rename = "MT")]
    pub mt: usize,
    #[serde(rename = "PT")]
    pub pt: usize,
    #[serde(rename = "ML")]
    pub ml: usize,
    #[serde(rename = "FP")]
    pub fp: u64,
    #[serde(rename = "FN")]
    pub fn_: u64,
    #[serde(rename = "IDs")]
    pub ids: u64,
    #[serde(rename = "FM")]
    pub fm: u64,
    #[serde(rename = "MOTA")]
    pub mota: f64,
    /// `None` when nothing matched.
    #[serde(rename = "MOTP")]
    pub motp: Option<f64>,
    pub motp_mode: MatchMode,
    pub num_matches: u64,
    pub num_gt_dets: u64,
    pub num_hyp_dets: u64,
}

impl MetricsReport {
    pub const COLUMNS: [&'static str; 15] = [
        "IDF1", "IDP", "IDR", "Rcll", "Prcn", "GT", "MT", "PT", "ML", "FP", "FN", "IDs", "FM", "MOTA", "MOTP",
    ];

    pub fn from_accumulator(acc: &MetricsAccumulator) -> Result<Self, MetricsError> {
        let mota = compute_mota(acc)?;
        let motp = compute_motp(acc).ok();
        let id = compute_id_metrics(acc);
        let cov = compute_coverage(acc);
        let tp = acc.num_matches;
        Ok(Self {
            idf1: id.idf1,
            idp: id.idp,
            idr: id.idr,
            recall: tp as f64 / acc.num_gt_dets as f64,
            precision: if tp + acc.fp == 0 { 0.0 } else { tp as f64 / (tp + acc.fp) as f64 },
            gt: cov.gt,
            mt: cov.mt,
            pt: cov.pt,
            ml: cov.ml,
            fp: acc.fp,
            fn_: acc.fn_,
            ids: acc.ids,
            fm: cov.fm,
            mota,
            motp,
            motp_mode: acc.mode,
            num_matches: tp,
            num_gt_dets: acc.num_gt_dets,
            num_hyp_dets: acc.num_hyp_dets,
        })
    }
}

/// Evaluates a whole sequence under a task setting.
///
/// Ground truth excluded by the setting is not scored; hypotheses that match
/// an excluded object are removed rather than counted as false positives.
pub fn evaluate_sequence(
    gts: &[GtObject],
    hyps: &[Hypothesis],
    mode: MatchMode,
    setting: TaskSetting,
) -> Result<MetricsReport, MetricsError> {
    // per frame: kept gt, ignored gt, hypotheses
    type FrameSets = (Vec<FrameObject>, Vec<FrameObject>, Vec<FrameObject>);
    let mut frames: BTreeMap<u32, FrameSets> = BTreeMap::new();
    for g in gts {
        let entry = frames.entry(g.frame).or_default();
        let obj = FrameObject { id: g.gt_id, region: g.region };
        if setting.keeps(g.class_label, g.occlusion) {
            entry.0.push(obj);
        } else {
            entry.1.push(obj);
        }
    }
    for h in hyps {
        frames.entry(h.frame).or_default().2.push(FrameObject { id: h.hyp_id, region: h.region });
    }
    let mut acc = MetricsAccumulator::new(mode);
    for (frame, (kept, ignored, hyps)) in frames {
        let hyps = if ignored.is_empty() { hyps } else { drop_ignored(&kept, &ignored, hyps, &mode) };
        acc.update(frame, &kept, &hyps);
    }
    MetricsReport::from_accumulator(&acc)
}

fn drop_ignored(kept: &[FrameObject], ignored: &[FrameObject], hyps: Vec<FrameObject>, mode: &MatchMode) -> Vec<FrameObject> {
    let all: Vec<&FrameObject> = kept.iter().chain(ignored).collect();
    let costs = CostMatrix::from_fn(all.len(), hyps.len(), |r, c| {
        mode.cost(&all[r].region, &hyps[c].region).unwrap_or(f64::INFINITY)
    });
    let assignment = associate_hungarian(&costs, f64::MAX);
    let drop: BTreeSet<usize> = assignment.pairs.iter().filter(|(r, _)| *r >= kept.len()).map(|(_, c)| *c).collect();
    hyps.into_iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, h)| h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn p(id: u64, x: f64) -> FrameObject {
        FrameObject { id, region: Region::Plane([x, 0.0]) }
    }

    #[test]
    fn perfect_frame() {
        let mut acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
        acc.update(1, &[p(1, 0.0)], &[p(10, 0.0)]);
        let m = acc.update(2, &[p(1, 0.0)], &[p(10, 0.0)]).clone();
        assert!(m.false_positives.is_empty() && m.misses.is_empty() && m.switches.is_empty());
        assert_eq!(compute_mota(&acc).unwrap(), 1.0);
        assert_eq!(compute_motp(&acc).unwrap(), 0.0);
    }

    #[test]
    fn missing_hypotheses_are_misses() {
        let mut acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
        let m = acc.update(1, &[p(1, 0.0), p(2, 5.0)], &[]);
        assert_eq!(m.misses, vec![1, 2]);
        assert_eq!(acc.misses(), 2);
        assert_eq!(compute_mota(&acc).unwrap(), 0.0);
        assert!(matches!(compute_motp(&acc), Err(MetricsError::NoMatches)));
    }

    #[test]
    fn switch_counted_once() {
        let mut acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
        acc.update(1, &[p(1, 0.0)], &[p(10, 0.0)]);
        acc.update(2, &[p(1, 0.0)], &[p(20, 0.0)]);
        acc.update(3, &[p(1, 0.0)], &[p(20, 0.0)]);
        assert_eq!(acc.switches(), 1);
    }

    #[test]
    fn continuity_keeps_previous_pair() {
        // hyp 20 is closer in frame 2, but 10 is still inside the threshold
        let mut acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
        acc.update(1, &[p(1, 0.0)], &[p(10, 0.0)]);
        let m = acc.update(2, &[p(1, 0.0)], &[p(10, 0.8), p(20, 0.1)]).clone();
        assert_eq!(m.matches[0].1, 10);
        assert_eq!(m.false_positives, vec![20]);
        assert_eq!(acc.switches(), 0);
    }

    #[test]
    fn empty_ground_truth() {
        let acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
        assert!(matches!(compute_mota(&acc), Err(MetricsError::EmptyGroundTruth)));
    }

    #[test]
    fn mota_formula() {
        let mut acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
        acc.num_gt_dets = 100;
        acc.fp = 5;
        acc.fn_ = 10;
        acc.ids = 2;
        assert_relative_eq!(compute_mota(&acc).unwrap(), 0.83, epsilon = 1e-12);
        acc.fp = 250;
        assert!(compute_mota(&acc).unwrap() < 0.0);
    }

    #[test]
    fn coverage_bins() {
        let mut acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
        // gt 1 tracked in frames 1,2,5,6 of 1..6
        for f in 1..=6 {
            let hyps = if [1, 2, 5, 6].contains(&f) { vec![p(10, 0.0)] } else { vec![] };
            acc.update(f, &[p(1, 0.0)], &hyps);
        }
        let cov = compute_coverage(&acc);
        assert_eq!(cov.fm, 1);
        assert_eq!(cov.pt, 1);
    }

    #[test]
    fn bin_edges() {
        for (tracked, total, expect) in [(17u32, 20u32, "MT"), (16, 20, "MT"), (4, 20, "PT"), (3, 20, "ML")] {
            let mut acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
            for f in 0..total {
                let hyps = if f < tracked { vec![p(10, 0.0)] } else { vec![] };
                acc.update(f, &[p(1, 0.0)], &hyps);
            }
            let c = compute_coverage(&acc);
            let got = if c.mt == 1 { "MT" } else if c.pt == 1 { "PT" } else { "ML" };
            assert_eq!(got, expect, "{tracked}/{total}");
            assert_eq!(c.mt + c.pt + c.ml, c.gt);
        }
    }

    #[test]
    fn idf1_partial_overlap() {
        // gt 10 frames; hyp 10 frames of which 8 are within the threshold
        let mut acc = MetricsAccumulator::new(MatchMode::PLANE_DEFAULT);
        for f in 0..10 {
            let x = if f < 8 { 0.0 } else { 5.0 };
            acc.update(f, &[p(1, 0.0)], &[p(10, x)]);
        }
        let id = compute_id_metrics(&acc);
        assert_eq!((id.idtp, id.idfp, id.idfn), (8, 2, 2));
        assert_relative_eq!(id.idf1, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn image_mode_threshold() {
        let mode = MatchMode::IMAGE_DEFAULT;
        let a = Region::Image([0.0, 0.0, 10.0, 10.0]);
        assert_eq!(mode.cost(&a, &a), Some(0.0));
        assert_eq!(mode.cost(&a, &Region::Image([5.0, 0.0, 10.0, 10.0])), None);
        assert_eq!(mode.cost(&a, &Region::Plane([0.0, 0.0])), None);
    }

    #[test]
    fn peds_setting_filters() {
        let g = |id, occ, class| GtObject { frame: 1, gt_id: id, region: Region::Plane([id as f64 * 3.0, 0.0]), occlusion: occ, class_label: class };
        let gts = [
            g(1, Occlusion::None, ClassLabel::Person),
            g(2, Occlusion::ThreeQuarters, ClassLabel::Person),
            g(3, Occlusion::None, ClassLabel::Buggy),
        ];
        let hyps: Vec<Hypothesis> = (1..=3).map(|i| Hypothesis { frame: 1, hyp_id: i, region: Region::Plane([i as f64 * 3.0, 0.0]) }).collect();
        let all = evaluate_sequence(&gts, &hyps, MatchMode::PLANE_DEFAULT, TaskSetting::All).unwrap();
        assert_eq!((all.gt, all.fp, all.fn_), (3, 0, 0));
        let peds = evaluate_sequence(&gts, &hyps, MatchMode::PLANE_DEFAULT, TaskSetting::Peds).unwrap();
        assert_eq!((peds.gt, peds.fp, peds.fn_), (1, 0, 0));
        assert_eq!(peds.mota, 1.0);
    }
}
