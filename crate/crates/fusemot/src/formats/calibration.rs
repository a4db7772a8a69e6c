//! Camera calibration and ground-plane JSON files.

use std::path::Path;

use fusemot_core::geometry::{CameraIntrinsics, GroundPlane, StereoRig};
use fusemot_core::Vector3;
use serde::{Deserialize, Serialize};

use super::{read_text, write_bytes, FormatError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub baseline_m: f64,
}

impl CalibrationFile {
    pub fn from_rig(rig: &StereoRig) -> Self {
        let i = rig.intrinsics;
        Self { fx: i.fx, fy: i.fy, cx: i.cx, cy: i.cy, width: i.width, height: i.height, baseline_m: rig.baseline }
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics, FormatError> {
        CameraIntrinsics::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height)
            .map_err(|e| FormatError::schema("", e.to_string()))
    }

    pub fn rig(&self) -> Result<StereoRig, FormatError> {
        StereoRig::new(self.intrinsics()?, self.baseline_m).map_err(|e| FormatError::schema("/baseline_m", e.to_string()))
    }
}

pub fn read_calibration(path: &Path) -> Result<CalibrationFile, FormatError> {
    let c: CalibrationFile = serde_json::from_str(&read_text(path)?)?;
    c.intrinsics()?;
    Ok(c)
}

pub fn write_calibration(c: &CalibrationFile, path: &Path) -> Result<(), FormatError> {
    write_json(c, path)
}

/// Plane `normal · X = offset_m` in the camera frame plus its 3×4
/// row-major camera-to-plane transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFile {
    pub normal: [f64; 3],
    pub offset_m: f64,
    pub to_plane: [f64; 12],
}

impl PlaneFile {
    pub fn from_plane(p: &GroundPlane) -> Self {
        let n = p.normal();
        Self { normal: [n.x, n.y, n.z], offset_m: p.offset(), to_plane: p.to_plane_matrix() }
    }

    pub fn plane(&self) -> Result<GroundPlane, FormatError> {
        let iso = GroundPlane::isometry_from_matrix(&self.to_plane).map_err(|e| FormatError::schema("/to_plane", e.to_string()))?;
        GroundPlane::from_parts(Vector3::from(self.normal), self.offset_m, iso)
            .map_err(|e| FormatError::schema("/normal", e.to_string()))
    }
}

pub fn read_plane(path: &Path) -> Result<GroundPlane, FormatError> {
    let p: PlaneFile = serde_json::from_str(&read_text(path)?)?;
    p.plane()
}

pub fn write_plane(plane: &GroundPlane, path: &Path) -> Result<(), FormatError> {
    write_json(&PlaneFile::from_plane(plane), path)
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}
