//! Plane-frame track text format:
//! `frame,id,x,y,z,w,h,d,yaw,conf,tracker_id` (meters, radians).

use std::fmt::Write as _;
use std::path::Path;

use fusemot_core::Point3;
use fusemot_core::types::{BBox3D, Extent3, SourceId};

use super::{data_lines, read_text, write_bytes, Fields, FormatError};

#[derive(Debug, Clone, PartialEq)]
pub struct Track3DRecord {
    pub frame: u32,
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    pub h: f64,
    pub d: f64,
    pub yaw: f64,
    pub conf: f64,
    pub tracker_id: String,
}

impl Track3DRecord {
    pub fn from_bbox(b: &BBox3D) -> Self {
        Self {
            frame: b.frame_index,
            id: b.track_id.unwrap_or(0),
            x: b.center.x,
            y: b.center.y,
            z: b.center.z,
            w: b.extent.width,
            h: b.extent.height,
            d: b.extent.depth,
            yaw: b.yaw,
            conf: b.confidence,
            tracker_id: b.source_id.as_str().to_string(),
        }
    }

    pub fn to_bbox(&self) -> BBox3D {
        BBox3D {
            center: Point3::new(self.x, self.y, self.z),
            extent: Extent3::new(self.w, self.h, self.d),
            yaw: self.yaw,
            confidence: self.conf,
            source_id: SourceId::new(self.tracker_id.clone()),
            track_id: Some(self.id),
            frame_index: self.frame,
        }
    }
}

pub fn parse_track3d(text: &str) -> Result<Vec<Track3DRecord>, FormatError> {
    data_lines(text)
        .map(|(n, line)| {
            let f = Fields::split(n, line, 11)?;
            let tracker_id = f.str(11);
            if tracker_id.is_empty() {
                return Err(f.err(11, "empty tracker id"));
            }
            Ok(Track3DRecord {
                frame: f.parse(1)?,
                id: f.parse(2)?,
                x: f.float(3)?,
                y: f.float(4)?,
                z: f.float(5)?,
                w: f.positive(6)?,
                h: f.positive(7)?,
                d: f.positive(8)?,
                yaw: f.float(9)?,
                conf: f.float(10)?,
                tracker_id: tracker_id.to_string(),
            })
        })
        .collect()
}

pub fn format_track3d(records: &[Track3DRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.frame, r.id, r.x, r.y, r.z, r.w, r.h, r.d, r.yaw, r.conf, r.tracker_id
        );
    }
    out
}

pub fn read_track3d(path: &Path) -> Result<Vec<Track3DRecord>, FormatError> {
    parse_track3d(&read_text(path)?)
}

pub fn write_track3d(records: &[Track3DRecord], path: &Path) -> Result<(), FormatError> {
    write_bytes(path, format_track3d(records).as_bytes())
}

pub fn read_boxes(path: &Path) -> Result<Vec<BBox3D>, FormatError> {
    Ok(read_track3d(path)?.iter().map(Track3DRecord::to_bbox).collect())
}

pub fn write_boxes(boxes: &[BBox3D], path: &Path) -> Result<(), FormatError> {
    let records: Vec<Track3DRecord> = boxes.iter().map(Track3DRecord::from_bbox).collect();
    write_track3d(&records, path)
}
