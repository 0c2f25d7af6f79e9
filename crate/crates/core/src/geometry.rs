//! Boxes, points and detections shared by every stage of the pipeline.
//!
//! Boxes use the MOTChallenge convention: top-left corner plus width and
//! height, in continuous pixel coordinates.

use crate::error::{Error, Result};

/// Axis-aligned box, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    /// Validating constructor: `w` and `h` must be positive and all fields finite.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let b = BBox { x, y, w, h };
        if b.is_valid() {
            Ok(b)
        } else {
            Err(Error::InvalidBox { x, y, w, h })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.w.is_finite()
            && self.h.is_finite()
            && self.w > 0.0
            && self.h > 0.0
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        BBox::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> Point {
        Point {
            x: self.x + self.w / 2.0,
            y: self.y + self.h / 2.0,
        }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn intersection(&self, other: &BBox) -> f64 {
        let iw = self.right().min(other.right()) - self.x.max(other.x);
        let ih = self.bottom().min(other.bottom()) - self.y.max(other.y);
        // shared edges give zero overlap
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        iou(self, other)
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    if a == b {
        return 1.0;
    }
    let inter = a.intersection(b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

pub fn center(b: &BBox) -> Point {
    b.center()
}

pub fn area(b: &BBox) -> f64 {
    b.area()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A scored candidate box produced by the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f64,
    /// 0 is pedestrian.
    pub class_id: u32,
}

impl Detection {
    pub fn new(bbox: BBox, score: f64) -> Result<Self> {
        Detection::with_class(bbox, score, 0)
    }

    pub fn with_class(bbox: BBox, score: f64, class_id: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidScore(score));
        }
        Ok(Detection {
            bbox,
            score,
            class_id,
        })
    }
}

/// All detections of one frame, in detector order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameDetections {
    pub frame: u32,
    pub detections: Vec<Detection>,
}

impl FrameDetections {
    pub fn new(frame: u32, detections: Vec<Detection>) -> Result<Self> {
        if frame == 0 {
            return Err(Error::InvalidFrame(frame));
        }
        Ok(FrameDetections { frame, detections })
    }

    pub fn empty(frame: u32) -> Result<Self> {
        FrameDetections::new(frame, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }
}
