use serde::{Deserialize, Serialize};

use super::DaodError;

/// Default objectness threshold for potential instance mining.
pub const DEFAULT_PIM_TAU: f64 = 0.7;

/// Axis-aligned box in pixel coordinates, `x1 < x2`, `y1 < y2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, DaodError> {
        // Negated comparisons also reject NaN.
        if !(x1 < x2 && y1 < y2) {
            return Err(DaodError::InvalidBox { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }
}

/// Intersection over union; 0 for disjoint or edge-touching boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0.0 {
        return 0.0;
    }
    inter / (a.area() + b.area() - inter)
}

/// Region proposal with its RPN objectness score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub bbox: BBox,
    pub objectness: f64,
}

impl Proposal {
    pub fn new(bbox: BBox, objectness: f64) -> Result<Self, DaodError> {
        if !(0.0..=1.0).contains(&objectness) {
            return Err(DaodError::InvalidObjectness(objectness));
        }
        Ok(Self { bbox, objectness })
    }
}

/// Potential instance mining: candidates scoring above `tau` that are not
/// already accepted and do not overlap any accepted proposal at all.
/// Input order is preserved.
pub fn pim_filter(candidates: &[Proposal], accepted: &[Proposal], tau: f64) -> Vec<Proposal> {
    candidates
        .iter()
        .filter(|c| c.objectness > tau)
        .filter(|c| !accepted.contains(c))
        .filter(|c| accepted.iter().all(|a| iou(&c.bbox, &a.bbox) == 0.0))
        .copied()
        .collect()
}
