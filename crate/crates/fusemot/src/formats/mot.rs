//! MOTChallenge text format: `frame,id,left,top,width,height,conf,x,y,z`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use fusemot_core::types::{BBox2D, SourceId};

use super::{data_lines, read_text, write_bytes, Fields, FormatError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRecord {
    /// 1-based.
    pub frame: u32,
    /// `-1` for untracked detections.
    pub id: i64,
    pub bb_left: f64,
    pub bb_top: f64,
    pub bb_width: f64,
    pub bb_height: f64,
    pub conf: f64,
    /// World coordinates, `-1` when absent.
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl MotRecord {
    pub fn from_bbox(frame: u32, b: &BBox2D) -> Self {
        Self {
            frame,
            id: b.track_id.map_or(-1, |i| i as i64),
            bb_left: b.left,
            bb_top: b.top,
            bb_width: b.width,
            bb_height: b.height,
            conf: b.confidence,
            x: -1.0,
            y: -1.0,
            z: -1.0,
        }
    }

    pub fn to_bbox(&self, source: &SourceId) -> BBox2D {
        BBox2D::new(self.bb_left, self.bb_top, self.bb_width, self.bb_height)
            .with_source(source.clone(), u64::try_from(self.id).ok())
            .with_confidence(self.conf)
    }

    /// World `(x, y)` when present.
    pub fn world_xy(&self) -> Option<[f64; 2]> {
        (self.x != -1.0 || self.y != -1.0).then_some([self.x, self.y])
    }
}

pub fn parse_mot(text: &str) -> Result<Vec<MotRecord>, FormatError> {
    data_lines(text)
        .map(|(n, line)| {
            let f = Fields::split(n, line, 10)?;
            let frame: u32 = f.parse(1)?;
            if frame < 1 {
                return Err(f.err(1, "frame numbers start at 1"));
            }
            Ok(MotRecord {
                frame,
                id: f.parse(2)?,
                bb_left: f.float(3)?,
                bb_top: f.float(4)?,
                bb_width: f.positive(5)?,
                bb_height: f.positive(6)?,
                conf: f.float(7)?,
                x: f.float(8)?,
                y: f.float(9)?,
                z: f.float(10)?,
            })
        })
        .collect()
}

pub fn format_mot(records: &[MotRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.frame, r.id, r.bb_left, r.bb_top, r.bb_width, r.bb_height, r.conf, r.x, r.y, r.z
        );
    }
    out
}

pub fn read_mot(path: &Path) -> Result<Vec<MotRecord>, FormatError> {
    parse_mot(&read_text(path)?)
}

pub fn write_mot(records: &[MotRecord], path: &Path) -> Result<(), FormatError> {
    write_bytes(path, format_mot(records).as_bytes())
}

/// Groups boxes by frame, keeping file order within a frame.
pub fn by_frame(records: &[MotRecord], source: &SourceId) -> BTreeMap<u32, Vec<BBox2D>> {
    let mut out: BTreeMap<u32, Vec<BBox2D>> = BTreeMap::new();
    for r in records {
        out.entry(r.frame).or_default().push(r.to_bbox(source));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_mapping() {
        let r = parse_mot("1,2,10,20,50,100,0.9,-1,-1,-1\n").unwrap();
        assert_eq!(
            r,
            vec![MotRecord {
                frame: 1,
                id: 2,
                bb_left: 10.0,
                bb_top: 20.0,
                bb_width: 50.0,
                bb_height: 100.0,
                conf: 0.9,
                x: -1.0,
                y: -1.0,
                z: -1.0
            }]
        );
        assert_eq!(format_mot(&r), "1,2,10,20,50,100,0.9,-1,-1,-1\n");
    }

    #[test]
    fn empty_file() {
        assert!(parse_mot("").unwrap().is_empty());
        assert!(parse_mot("\n\n").unwrap().is_empty());
    }

    #[test]
    fn zero_width_rejected() {
        match parse_mot("1,2,10,20,0,100,0.9,-1,-1,-1") {
            Err(FormatError::Parse { line: 1, column: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn error_carries_line_number() {
        let text = "1,2,10,20,5,10,1,-1,-1,-1\n2,x,10,20,5,10,1,-1,-1,-1\n";
        match parse_mot(text) {
            Err(FormatError::Parse { line: 2, column: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_mot("0,1,1,1,1,1,1,1,1,1"), Err(FormatError::Parse { column: 1, .. })));
        assert!(matches!(parse_mot("1,1,1,1,1,1,1"), Err(FormatError::Parse { line: 1, .. })));
    }
}
