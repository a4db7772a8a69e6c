//! Box and identity types shared across modules.

use alloc::string::{String, ToString};
use core::fmt;
use nalgebra::Point3;
use serde::{Deserialize, Serialize};
#[allow(unused_imports)]
use num_traits::Float;

/// Name of a tracking source (one detector/tracker output).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceId(pub String);

impl SourceId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SourceId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    #[default]
    Person,
    Child,
    Wheelchair,
    Buggy,
    Luggage,
    Other,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 6] = [
        ClassLabel::Person,
        ClassLabel::Child,
        ClassLabel::Wheelchair,
        ClassLabel::Buggy,
        ClassLabel::Luggage,
        ClassLabel::Other,
    ];

    pub fn is_human(self) -> bool {
        matches!(self, ClassLabel::Person | ClassLabel::Child)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Person => "person",
            ClassLabel::Child => "child",
            ClassLabel::Wheelchair => "wheelchair",
            ClassLabel::Buggy => "buggy",
            ClassLabel::Luggage => "luggage",
            ClassLabel::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// Annotated occlusion level; only the five quantized values exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Occlusion {
    #[default]
    None,
    Quarter,
    Half,
    ThreeQuarters,
    Full,
}

impl Occlusion {
    pub fn from_percent(p: u32) -> Option<Self> {
        match p {
            0 => Some(Self::None),
            25 => Some(Self::Quarter),
            50 => Some(Self::Half),
            75 => Some(Self::ThreeQuarters),
            100 => Some(Self::Full),
            _ => None,
        }
    }

    pub fn percent(self) -> u32 {
        match self {
            Self::None => 0,
            Self::Quarter => 25,
            Self::Half => 50,
            Self::ThreeQuarters => 75,
            Self::Full => 100,
        }
    }

    /// Nearest quantized level for an occluded area fraction in `[0, 1]`.
    pub fn quantize(fraction: f64) -> Self {
        let steps = (fraction.clamp(0.0, 1.0) * 4.0 + 0.5) as u32;
        Self::from_percent(steps.min(4) * 25).unwrap_or_default()
    }
}

impl Serialize for Occlusion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.percent())
    }
}

impl<'de> Deserialize<'de> for Occlusion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = u32::deserialize(d)?;
        Self::from_percent(p)
            .ok_or_else(|| serde::de::Error::custom(alloc::format!("occlusion {p} is not one of 0, 25, 50, 75, 100")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraView {
    #[default]
    LeftRig,
    RightRig,
}

/// One annotated object in one frame and view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub frame: u32,
    pub id: u64,
    pub class_label: ClassLabel,
    /// `[left, top, width, height]` in pixels.
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    pub occlusion: Occlusion,
    pub camera_view: CameraView,
    /// Plane-frame ground position in meters, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

/// Image-space detection. Geometry in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct BBox2D {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub confidence: f64,
    pub class_label: ClassLabel,
    pub source_id: SourceId,
    pub track_id: Option<u64>,
}

/// Integer pixel window of a box after clamping to the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelWindow {
    pub u0: u32,
    pub v0: u32,
    pub width: u32,
    pub height: u32,
}

impl BBox2D {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        Self {
            left,
            top,
            width,
            height,
            confidence: 1.0,
            class_label: ClassLabel::Person,
            source_id: SourceId::new(""),
            track_id: None,
        }
    }

    pub fn with_source(mut self, source: SourceId, track_id: Option<u64>) -> Self {
        self.source_id = source;
        self.track_id = track_id;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    /// Clamps to `image_width × image_height`, rounding edges to the pixel
    /// grid. Every window is at least 1×1; `None` when the box lies fully
    /// outside the image or is not finite.
    pub fn pixel_window(&self, image_width: u32, image_height: u32) -> Option<PixelWindow> {
        if image_width == 0 || image_height == 0 {
            return None;
        }
        let vals = [self.left, self.top, self.width, self.height];
        if vals.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let (w, h) = (image_width as f64, image_height as f64);
        let right = self.left + self.width;
        let bottom = self.top + self.height;
        if right <= 0.0 || bottom <= 0.0 || self.left >= w || self.top >= h {
            return None;
        }
        let u0 = round(self.left.max(0.0)).min(w - 1.0);
        let v0 = round(self.top.max(0.0)).min(h - 1.0);
        let u1 = round(right.min(w)).max(u0 + 1.0);
        let v1 = round(bottom.min(h)).max(v0 + 1.0);
        Some(PixelWindow {
            u0: u0 as u32,
            v0: v0 as u32,
            width: (u1.min(w) - u0) as u32,
            height: (v1.min(h) - v0) as u32,
        })
    }

    pub fn iou(&self, other: &BBox2D) -> f64 {
        rect_iou(
            [self.left, self.top, self.width, self.height],
            [other.left, other.top, other.width, other.height],
        )
    }
}

fn round(x: f64) -> f64 {
    Float::round(x)
}

/// IoU of two `[left, top, width, height]` rectangles.
pub fn rect_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let ix = (a[0] + a[2]).min(b[0] + b[2]) - a[0].max(b[0]);
    let iy = (a[1] + a[3]).min(b[1] + b[3]) - a[1].max(b[1]);
    if ix <= 0.0 || iy <= 0.0 {
        return 0.0;
    }
    let inter = ix * iy;
    let union = a[2] * a[3] + b[2] * b[3] - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Box dimensions: `width` along plane x, `depth` along plane y, `height` along plane z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent3 {
    pub width: f64,
    pub height: f64,
    pub depth: f64,
}

impl Extent3 {
    pub fn new(width: f64, height: f64, depth: f64) -> Self {
        Self { width, height, depth }
    }

    pub fn volume(&self) -> f64 {
        self.width * self.height * self.depth
    }

    pub fn is_valid(&self) -> bool {
        [self.width, self.height, self.depth].iter().all(|v| *v > 0.0 && v.is_finite())
    }
}

/// Ground-plane aligned 3D box in the plane frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BBox3D {
    pub center: Point3<f64>,
    pub extent: Extent3,
    /// Radians about the plane normal.
    pub yaw: f64,
    pub confidence: f64,
    pub source_id: SourceId,
    pub track_id: Option<u64>,
    pub frame_index: u32,
}

impl BBox3D {
    pub fn new(center: Point3<f64>, extent: Extent3) -> Self {
        Self {
            center,
            extent,
            yaw: 0.0,
            confidence: 1.0,
            source_id: SourceId::new(""),
            track_id: None,
            frame_index: 0,
        }
    }

    pub fn min_corner(&self) -> [f64; 3] {
        [
            self.center.x - self.extent.width / 2.0,
            self.center.y - self.extent.depth / 2.0,
            self.center.z - self.extent.height / 2.0,
        ]
    }

    pub fn max_corner(&self) -> [f64; 3] {
        [
            self.center.x + self.extent.width / 2.0,
            self.center.y + self.extent.depth / 2.0,
            self.center.z + self.extent.height / 2.0,
        ]
    }

    /// Ground position `(x, y)`.
    pub fn ground_position(&self) -> [f64; 2] {
        [self.center.x, self.center.y]
    }
}
