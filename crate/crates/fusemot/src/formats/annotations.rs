//! Ground-truth annotation JSON.
//!
//! ```json
//! {
//!   "version": 1,
//!   "safety_line": [[-5.0, 1.0], [5.0, 1.0]],
//!   "annotations": [
//!     {"frame": 1, "id": 4, "class_label": "person", "box": [10, 20, 40, 110],
//!      "occlusion": 25, "camera_view": "left_rig", "position": [0.4, 6.1]}
//!   ]
//! }
//! ```
//!
//! `occlusion` is one of 0, 25, 50, 75, 100; `camera_view` is `left_rig` or
//! `right_rig`; `position` (plane-frame meters) is optional. Schema errors
//! carry a JSON pointer to the offending value.

use std::path::Path;

use fusemot_core::fusion::SafetyLine;
use fusemot_core::types::{AnnotationRecord, CameraView, ClassLabel, Occlusion};
use serde::Serialize;
use serde_json::{Map, Value};

use super::calibration::write_json;
use super::{read_text, FormatError};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationFile {
    pub annotations: Vec<AnnotationRecord>,
    pub safety_line: Option<SafetyLine>,
}

#[derive(Serialize)]
struct Document<'a> {
    version: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    safety_line: Option<&'a Vec<[f64; 2]>>,
    annotations: &'a [AnnotationRecord],
}

pub fn format_annotations(file: &AnnotationFile) -> Result<String, FormatError> {
    let doc = Document {
        version: SCHEMA_VERSION,
        safety_line: file.safety_line.as_ref().map(|l| &l.points),
        annotations: &file.annotations,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_annotations(text: &str) -> Result<AnnotationFile, FormatError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root.as_object().ok_or_else(|| FormatError::schema("", "document must be an object"))?;
    if let Some(v) = obj.get("version") {
        if v.as_u64() != Some(SCHEMA_VERSION) {
            return Err(FormatError::schema("/version", format!("unsupported version {v}")));
        }
    }
    let list = obj
        .get("annotations")
        .ok_or_else(|| FormatError::schema("/annotations", "missing required key annotations"))?
        .as_array()
        .ok_or_else(|| FormatError::schema("/annotations", "must be an array"))?;
    let annotations = list
        .iter()
        .enumerate()
        .map(|(i, v)| parse_record(v, &format!("/annotations/{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let safety_line = obj.get("safety_line").map(|v| parse_line(v, "/safety_line")).transpose()?;
    Ok(AnnotationFile { annotations, safety_line })
}

/// Safety line of an annotation document; its absence is a schema error.
pub fn parse_safety_line(text: &str) -> Result<SafetyLine, FormatError> {
    let root: Value = serde_json::from_str(text)?;
    let v = root
        .get("safety_line")
        .ok_or_else(|| FormatError::schema("/safety_line", "missing required key safety_line"))?;
    parse_line(v, "/safety_line")
}

pub fn read_annotations(path: &Path) -> Result<AnnotationFile, FormatError> {
    parse_annotations(&read_text(path)?)
}

pub fn read_safety_line(path: &Path) -> Result<SafetyLine, FormatError> {
    parse_safety_line(&read_text(path)?)
}

pub fn write_annotations(file: &AnnotationFile, path: &Path) -> Result<(), FormatError> {
    let doc = Document {
        version: SCHEMA_VERSION,
        safety_line: file.safety_line.as_ref().map(|l| &l.points),
        annotations: &file.annotations,
    };
    write_json(&doc, path)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value, FormatError> {
    obj.get(key).ok_or_else(|| FormatError::schema(format!("{ptr}/{key}"), format!("missing required key {key}")))
}

fn number(v: &Value, ptr: &str) -> Result<f64, FormatError> {
    v.as_f64().ok_or_else(|| FormatError::schema(ptr, "must be a number"))
}

fn parse_record(v: &Value, ptr: &str) -> Result<AnnotationRecord, FormatError> {
    let obj = v.as_object().ok_or_else(|| FormatError::schema(ptr, "must be an object"))?;
    let uint = |key: &str| -> Result<u64, FormatError> {
        field(obj, key, ptr)?
            .as_u64()
            .ok_or_else(|| FormatError::schema(format!("{ptr}/{key}"), "must be a non-negative integer"))
    };
    let frame = u32::try_from(uint("frame")?).map_err(|_| FormatError::schema(format!("{ptr}/frame"), "out of range"))?;
    let id = uint("id")?;

    let class_ptr = format!("{ptr}/class_label");
    let class_label = field(obj, "class_label", ptr)?
        .as_str()
        .and_then(ClassLabel::parse)
        .ok_or_else(|| FormatError::schema(&class_ptr, "unknown class label"))?;

    let box_ptr = format!("{ptr}/box");
    let raw = field(obj, "box", ptr)?
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or_else(|| FormatError::schema(&box_ptr, "must be [left, top, width, height]"))?;
    let mut bbox = [0.0; 4];
    for (k, x) in raw.iter().enumerate() {
        bbox[k] = number(x, &format!("{box_ptr}/{k}"))?;
    }
    if !(bbox[2] > 0.0 && bbox[3] > 0.0) {
        return Err(FormatError::schema(&box_ptr, "width and height must be positive"));
    }

    let occ_ptr = format!("{ptr}/occlusion");
    let occlusion = field(obj, "occlusion", ptr)?
        .as_u64()
        .and_then(|p| u32::try_from(p).ok())
        .and_then(Occlusion::from_percent)
        .ok_or_else(|| FormatError::schema(&occ_ptr, "must be one of 0, 25, 50, 75, 100"))?;

    let view_ptr = format!("{ptr}/camera_view");
    let camera_view = match field(obj, "camera_view", ptr)?.as_str() {
        Some("left_rig") => CameraView::LeftRig,
        Some("right_rig") => CameraView::RightRig,
        _ => return Err(FormatError::schema(view_ptr, "must be left_rig or right_rig")),
    };

    let position = match obj.get("position") {
        None | Some(Value::Null) => None,
        Some(p) => {
            let pos_ptr = format!("{ptr}/position");
            let a = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| FormatError::schema(&pos_ptr, "must be [x, y]"))?;
            Some([number(&a[0], &format!("{pos_ptr}/0"))?, number(&a[1], &format!("{pos_ptr}/1"))?])
        }
    };
    Ok(AnnotationRecord { frame, id, class_label, bbox, occlusion, camera_view, position })
}

fn parse_line(v: &Value, ptr: &str) -> Result<SafetyLine, FormatError> {
    let a = v.as_array().ok_or_else(|| FormatError::schema(ptr, "must be an array of [x, y] points"))?;
    let mut points = Vec::with_capacity(a.len());
    for (i, p) in a.iter().enumerate() {
        let pp = format!("{ptr}/{i}");
        let xy = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| FormatError::schema(&pp, "must be [x, y]"))?;
        points.push([number(&xy[0], &format!("{pp}/0"))?, number(&xy[1], &format!("{pp}/1"))?]);
    }
    SafetyLine::new(points).ok_or_else(|| FormatError::schema(ptr, "needs at least two points"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"annotations": [{"frame": 1, "id": 2, "class_label": "person", "box": [1, 2, 3, 4], "occlusion": 25, "camera_view": "left_rig"}]}"#;

    #[test]
    fn minimal_file() {
        let f = parse_annotations(MINIMAL).unwrap();
        assert_eq!(f.annotations.len(), 1);
        assert_eq!(f.annotations[0].occlusion, Occlusion::Quarter);
        assert!(f.safety_line.is_none());
    }

    #[test]
    fn bad_occlusion_points_at_field() {
        let text = MINIMAL.replace("\"occlusion\": 25", "\"occlusion\": 30");
        match parse_annotations(&text) {
            Err(FormatError::Schema { pointer, .. }) => assert_eq!(pointer, "/annotations/0/occlusion"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_safety_line_names_key() {
        match parse_safety_line(MINIMAL) {
            Err(FormatError::Schema { pointer, message }) => {
                assert_eq!(pointer, "/safety_line");
                assert!(message.contains("safety_line"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn canonical_round_trip() {
        let mut f = parse_annotations(MINIMAL).unwrap();
        f.safety_line = SafetyLine::new(vec![[0.0, 1.5], [4.0, 1.5]]);
        f.annotations[0].position = Some([0.25, 6.0]);
        let a = format_annotations(&f).unwrap();
        let back = parse_annotations(&a).unwrap();
        assert_eq!(back, f);
        assert_eq!(format_annotations(&back).unwrap(), a);
    }
}
