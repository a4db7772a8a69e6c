//! Metric report tables (CSV and JSON) and MOT-style ground-truth loading.

use std::path::Path;

use fusemot_core::metrics::{GtObject, MetricsReport, Region};
use fusemot_core::sweep::SweepRow;
use fusemot_core::types::{AnnotationRecord, ClassLabel, Occlusion};
use serde::Serialize;

use super::calibration::write_json;
use super::mot::MotRecord;
use super::{write_bytes, FormatError};

/// One table row: a scene, a task setting, the contributing sources and
/// their metrics (`None` when the ground truth was empty).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scene: String,
    pub setting: String,
    pub sources: String,
    pub metrics: Option<MetricsReport>,
}

impl ReportRow {
    pub fn from_sweep(scene: &str, row: &SweepRow) -> Self {
        Self { scene: scene.to_string(), setting: row.setting.name().to_string(), sources: row.label(), metrics: row.report.clone() }
    }
}

pub fn header() -> Vec<&'static str> {
    let mut h = vec!["scene", "setting", "sources"];
    h.extend(MetricsReport::COLUMNS);
    h
}

fn metric_cells(m: &MetricsReport) -> Vec<String> {
    vec![
        m.idf1.to_string(),
        m.idp.to_string(),
        m.idr.to_string(),
        m.recall.to_string(),
        m.precision.to_string(),
        m.gt.to_string(),
        m.mt.to_string(),
        m.pt.to_string(),
        m.ml.to_string(),
        m.fp.to_string(),
        m.fn_.to_string(),
        m.ids.to_string(),
        m.fm.to_string(),
        m.mota.to_string(),
        m.motp.map(|v| v.to_string()).unwrap_or_default(),
    ]
}

pub fn format_csv(rows: &[ReportRow]) -> Result<String, FormatError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header())?;
    for r in rows {
        let mut rec = vec![r.scene.clone(), r.setting.clone(), r.sources.clone()];
        match &r.metrics {
            Some(m) => rec.extend(metric_cells(m)),
            None => rec.extend(std::iter::repeat_n(String::new(), MetricsReport::COLUMNS.len())),
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| FormatError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv(rows: &[ReportRow], path: &Path) -> Result<(), FormatError> {
    write_bytes(path, format_csv(rows)?.as_bytes())
}

pub fn write_report_json(rows: &[ReportRow], path: &Path) -> Result<(), FormatError> {
    write_json(&rows, path)
}

/// Plane-frame ground truth from MOT records carrying world `(x, y)`.
/// Records without coordinates are skipped.
pub fn gt_from_mot(records: &[MotRecord]) -> Vec<GtObject> {
    records
        .iter()
        .filter_map(|r| {
            let xy = r.world_xy()?;
            Some(GtObject {
                frame: r.frame,
                gt_id: u64::try_from(r.id).ok()?,
                region: Region::Plane(xy),
                occlusion: Occlusion::None,
                class_label: ClassLabel::Person,
            })
        })
        .collect()
}

/// Plane-frame ground truth from annotations that carry a position.
pub fn gt_from_annotations(annotations: &[AnnotationRecord]) -> Vec<GtObject> {
    annotations
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_metrics_leave_blank_cells() {
        let rows = vec![ReportRow { scene: "s".into(), setting: "ALL".into(), sources: "a+b".into(), metrics: None }];
        let text = format_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 18);
        assert_eq!(lines.next().unwrap(), format!("s,ALL,a+b{}", ",".repeat(15)));
    }

    #[test]
    fn mot_gt_requires_coordinates() {
        let recs = super::super::mot::parse_mot("1,3,0,0,1,1,1,0.5,6,0\n1,4,0,0,1,1,1,-1,-1,-1\n").unwrap();
        let gt = gt_from_mot(&recs);
        assert_eq!(gt.len(), 1);
        assert_eq!(gt[0].region, Region::Plane([0.5, 6.0]));
    }
}
