//! Pinhole camera model and ground-plane coordinate frames.
//!
//! Camera frame: right-handed, `z` forward, `y` down. Plane frame: `x` along
//! the camera's horizontal axis projected onto the plane, `y` pointing away
//! from the camera foot, `z` up (signed height above the plane). All
//! distances are meters.

use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion, Unit, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(&'static str),
    #[error("stereo baseline must be positive, got {0}")]
    InvalidBaseline(f64),
    #[error("disparity must be positive, got {0}")]
    NonPositiveDisparity(f64),
    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("plane normal is degenerate")]
    DegenerateNormal,
    #[error("to_plane transform is inconsistent with the plane equation")]
    InconsistentTransform,
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        let intr = Self { fx, fy, cx, cy, width, height };
        intr.validate()?;
        Ok(intr)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.fx > 0.0 && self.fx.is_finite()) || !(self.fy > 0.0 && self.fy.is_finite()) {
            return Err(GeometryError::InvalidIntrinsics("focal lengths must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidIntrinsics("image size must be non-zero"));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) || !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(GeometryError::InvalidIntrinsics("principal point outside the image"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StereoRig {
    pub intrinsics: CameraIntrinsics,
    pub baseline: f64,
}

impl StereoRig {
    pub fn new(intrinsics: CameraIntrinsics, baseline: f64) -> Result<Self, GeometryError> {
        intrinsics.validate()?;
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(GeometryError::InvalidBaseline(baseline));
        }
        Ok(Self { intrinsics, baseline })
    }
}

/// `depth = fx * baseline / disparity`.
pub fn disparity_to_depth(rig: &StereoRig, disparity: f64) -> Result<f64, GeometryError> {
    if !(disparity > 0.0) {
        return Err(GeometryError::NonPositiveDisparity(disparity));
    }
    Ok(rig.intrinsics.fx * rig.baseline / disparity)
}

/// Pixel `(u, v)` at depth `depth` (the camera-frame `z`) to a camera-frame point.
pub fn backproject(intr: &CameraIntrinsics, u: f64, v: f64, depth: f64) -> Result<Point3<f64>, GeometryError> {
    if !(depth > 0.0) {
        return Err(GeometryError::NonPositiveDepth(depth));
    }
    Ok(Point3::new((u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth))
}

/// Projects a camera-frame point to pixel coordinates. `None` behind the camera.
pub fn project(intr: &CameraIntrinsics, p: &Point3<f64>) -> Option<(f64, f64)> {
    if !(p.z > 0.0) {
        return None;
    }
    Some((intr.fx * p.x / p.z + intr.cx, intr.fy * p.y / p.z + intr.cy))
}

/// Plane `normal · X = offset` in the camera frame with its rigid plane frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPlane {
    normal: Unit<Vector3<f64>>,
    offset: f64,
    to_plane: Isometry3<f64>,
}

impl GroundPlane {
    /// Builds the canonical plane frame for `normal · X = offset`.
    ///
    /// The normal is kept as given (not re-oriented); the plane-frame origin
    /// is the foot of the camera center on the plane.
    pub fn from_normal_offset(normal: Vector3<f64>, offset: f64) -> Result<Self, GeometryError> {
        let norm = normal.norm();
        if !(norm > 1e-12) || !offset.is_finite() {
            return Err(GeometryError::DegenerateNormal);
        }
        let n = normal / norm;
        let offset = offset / norm;
        let mut x_axis = Vector3::x() - n * n.x;
        if x_axis.norm() < 1e-6 {
            x_axis = Vector3::z() - n * n.z;
        }
        let x_axis = x_axis.normalize();
        let y_axis = n.cross(&x_axis);
        // rows of the camera->plane rotation are the plane axes
        let rot = Matrix3::from_rows(&[x_axis.transpose(), y_axis.transpose(), n.transpose()]);
        let rotation = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(rot));
        let foot = n * offset;
        let translation = -(rotation * foot);
        let to_plane = Isometry3::from_parts(Translation3::from(translation), rotation);
        Ok(Self { normal: Unit::new_unchecked(n), offset, to_plane })
    }

    /// Accepts an externally supplied transform after checking it agrees with
    /// the plane equation.
    pub fn from_parts(normal: Vector3<f64>, offset: f64, to_plane: Isometry3<f64>) -> Result<Self, GeometryError> {
        let canonical = Self::from_normal_offset(normal, offset)?;
        let n = canonical.normal.into_inner();
        // plane-frame z must equal n·X - offset for every X
        let z_row = to_plane.rotation.to_rotation_matrix().matrix().row(2).transpose();
        if (z_row - n).norm() > 1e-6 {
            return Err(GeometryError::InconsistentTransform);
        }
        if (to_plane.translation.vector.z + canonical.offset).abs() > 1e-6 {
            return Err(GeometryError::InconsistentTransform);
        }
        Ok(Self { to_plane, ..canonical })
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.normal.into_inner()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn to_plane(&self) -> &Isometry3<f64> {
        &self.to_plane
    }

    /// Signed height of a camera-frame point above the plane.
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    /// Height of the camera center above the plane.
    pub fn camera_height(&self) -> f64 {
        -self.offset
    }

    /// Same plane with the normal flipped so the camera center has positive height.
    pub fn oriented_towards_camera(self) -> Self {
        if self.offset > 0.0 {
            Self::from_normal_offset(-self.normal.into_inner(), -self.offset).unwrap_or(self)
        } else {
            self
        }
    }

    /// 3×4 row-major `[R | t]` of the camera-to-plane transform.
    pub fn to_plane_matrix(&self) -> [f64; 12] {
        let m = self.to_plane.to_homogeneous();
        let mut out = [0.0; 12];
        for r in 0..3 {
            for c in 0..4 {
                out[r * 4 + c] = m[(r, c)];
            }
        }
        out
    }

    /// Parses a 3×4 row-major rigid transform. Rotation is re-orthonormalized.
    pub fn isometry_from_matrix(m: &[f64; 12]) -> Result<Isometry3<f64>, GeometryError> {
        let rot = Matrix3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        let ortho = rot * rot.transpose() - Matrix3::identity();
        if ortho.norm() > 1e-6 || (rot.determinant() - 1.0).abs() > 1e-6 {
            return Err(GeometryError::InconsistentTransform);
        }
        let rotation = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(rot));
        Ok(Isometry3::from_parts(Translation3::new(m[3], m[7], m[11]), rotation))
    }
}

/// Camera-frame point to plane frame.
pub fn to_ground_frame(plane: &GroundPlane, p: &Point3<f64>) -> Point3<f64> {
    plane.to_plane * p
}

/// Plane-frame point back to the camera frame.
pub fn from_ground_frame(plane: &GroundPlane, p: &Point3<f64>) -> Point3<f64> {
    plane.to_plane.inverse_transform_point(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::new(1000.0, 1000.0, 640.0, 360.0, 1280, 720).unwrap()
    }

    #[test]
    fn disparity_examples() {
        let rig = StereoRig::new(intr(), 0.4).unwrap();
        assert_relative_eq!(disparity_to_depth(&rig, 100.0).unwrap(), 4.0);
        assert!(matches!(disparity_to_depth(&rig, 0.0), Err(GeometryError::NonPositiveDisparity(_))));
        assert!(disparity_to_depth(&rig, -3.0).is_err());
        let rig = StereoRig::new(CameraIntrinsics { fx: 800.0, ..intr() }, 0.4).unwrap();
        assert_relative_eq!(disparity_to_depth(&rig, 64.0).unwrap(), 5.0);
    }

    #[test]
    fn backproject_examples() {
        let i = intr();
        let p = backproject(&i, i.cx, i.cy, 3.0).unwrap();
        assert_relative_eq!(p, Point3::new(0.0, 0.0, 3.0));
        let p = backproject(&i, i.cx + i.fx, i.cy, 2.0).unwrap();
        assert_relative_eq!(p, Point3::new(2.0, 0.0, 2.0));
        assert!(matches!(backproject(&i, 0.0, 0.0, 0.0), Err(GeometryError::NonPositiveDepth(_))));
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
        assert!(StereoRig::new(intr(), 0.0).is_err());
    }

    #[test]
    fn plane_frame_examples() {
        let n = Vector3::new(0.1, -0.9, -0.3);
        let plane = GroundPlane::from_normal_offset(n, -3.0).unwrap();
        let nn = plane.normal();
        assert_relative_eq!(nn.norm(), 1.0, epsilon = 1e-12);
        let on_plane = Point3::from(nn * plane.offset() + nn.cross(&Vector3::x()) * 2.5);
        assert!(to_ground_frame(&plane, &on_plane).z.abs() < 1e-9);
        let above = Point3::from(on_plane.coords + nn * 1.8);
        assert_relative_eq!(to_ground_frame(&plane, &above).z, 1.8, epsilon = 1e-9);
        let back = from_ground_frame(&plane, &to_ground_frame(&plane, &above));
        assert_relative_eq!(back, above, epsilon = 1e-9);
        assert_relative_eq!(plane.camera_height(), 3.0 / n.norm(), epsilon = 1e-12);
    }

    #[test]
    fn matrix_round_trip() {
        let plane = GroundPlane::from_normal_offset(Vector3::new(0.0, -0.8, -0.6), -2.0).unwrap();
        let m = plane.to_plane_matrix();
        let iso = GroundPlane::isometry_from_matrix(&m).unwrap();
        let again = GroundPlane::from_parts(plane.normal(), plane.offset(), iso).unwrap();
        assert_relative_eq!(again.to_plane_matrix()[..], m[..], epsilon = 1e-12);
        let bad = GroundPlane::from_normal_offset(Vector3::new(0.0, 1.0, 0.0), -2.0).unwrap();
        assert!(GroundPlane::from_parts(bad.normal(), bad.offset(), iso).is_err());
    }

    #[test]
    fn orientation_flip() {
        let p = GroundPlane::from_normal_offset(Vector3::new(0.0, 1.0, 0.0), 3.0).unwrap();
        let q = p.oriented_towards_camera();
        assert_relative_eq!(q.camera_height(), 3.0);
        assert_relative_eq!(q.normal(), Vector3::new(0.0, -1.0, 0.0));
    }
}
