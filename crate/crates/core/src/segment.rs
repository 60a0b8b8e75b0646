//! Breast-region masks: Otsu thresholding, binary morphology, connected
//! components and a bounding-box cropper.

use std::collections::VecDeque;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::daod::BBox;
use crate::image::{histogram, GrayImage};

pub const OTSU_BINS: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("image has fewer than two distinct {OTSU_BINS}-bin levels; no threshold exists")]
    ConstantImage,
    #[error("dimension mismatch: image is {image:?}, mask is {mask:?}")]
    DimensionMismatch {
        image: (usize, usize),
        mask: (usize, usize),
    },
    #[error("breast mask is empty after opening")]
    EmptyMask,
    #[error("structuring element radius must be positive")]
    ZeroRadius,
}

/// Boolean raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height, "mask size mismatch");
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `self ⊆ other`, for equal dimensions.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Half-open bounding box `(x0, y0, x1, y1)` of the set pixels.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bb: Option<(usize, usize, usize, usize)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    bb = Some(match bb {
                        None => (x, y, x + 1, y + 1),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x + 1), y1.max(y + 1)),
                    });
                }
            }
        }
        bb
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementShape {
    Square,
    Disk,
}

impl std::str::FromStr for ElementShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(ElementShape::Square),
            "disk" => Ok(ElementShape::Disk),
            other => Err(format!("unknown structuring element shape {other:?} (square|disk)")),
        }
    }
}

/// Structuring element centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructElem {
    pub shape: ElementShape,
    pub radius: usize,
}

impl Default for StructElem {
    fn default() -> Self {
        Self {
            shape: ElementShape::Square,
            radius: 2,
        }
    }
}

impl StructElem {
    pub fn square(radius: usize) -> Self {
        Self {
            shape: ElementShape::Square,
            radius,
        }
    }

    pub fn disk(radius: usize) -> Self {
        Self {
            shape: ElementShape::Disk,
            radius,
        }
    }

    pub fn validate(&self) -> Result<(), SegmentError> {
        if self.radius == 0 {
            Err(SegmentError::ZeroRadius)
        } else {
            Ok(())
        }
    }

    /// Offsets `(dx, dy)` covered by the element.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let inside = match self.shape {
                    ElementShape::Square => true,
                    ElementShape::Disk => dx * dx + dy * dy <= r * r,
                };
                if inside {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

/// Exact comparison of `a_num / a_den` against `b_num / b_den`.
fn ratio_greater(a_num: &BigUint, a_den: u128, b_num: &BigUint, b_den: u128) -> bool {
    a_num * BigUint::from(b_den) > b_num * BigUint::from(a_den)
}

/// Otsu threshold over a 256-bin histogram.
///
/// Candidate `t` (1..=255) splits the bins into `[0, t)` and `[t, 256)`; the
/// between-class variance is compared exactly in integer arithmetic and the
/// lowest maximizing `t` wins. Returns the boundary `t / 256`, so that
/// `pixel > threshold` selects the upper class.
pub fn otsu_threshold(img: &GrayImage) -> Result<f64, SegmentError> {
    let hist = histogram(img, OTSU_BINS);
    let counts = hist.counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(SegmentError::ConstantImage);
    }
    let total = hist.total() as u128;
    let sum: u128 = counts.iter().enumerate().map(|(b, &c)| b as u128 * c as u128).sum();

    // Variance is proportional to (S0 * N - S * n0)^2 / (n0 * n1).
    let mut best: Option<(usize, BigUint, u128)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for t in 1..OTSU_BINS {
        n0 += counts[t - 1] as u128;
        s0 += (t as u128 - 1) * counts[t - 1] as u128;
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (s0 * total).abs_diff(sum * n0);
        let num = BigUint::from(diff).pow(2);
        let den = n0 * n1;
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => ratio_greater(&num, den, bn, *bd),
        };
        if better {
            best = Some((t, num, den));
        }
    }
    let (t, _, _) = best.ok_or(SegmentError::ConstantImage)?;
    Ok(t as f64 / OTSU_BINS as f64)
}

/// `true` where the pixel is strictly above `t`.
pub fn binarize(img: &GrayImage, t: f64) -> BinaryMask {
    BinaryMask::new(
        img.width(),
        img.height(),
        img.data().iter().map(|&v| v > t).collect(),
    )
}

/// Erosion; pixels outside the image count as unset.
pub fn erode(m: &BinaryMask, se: &StructElem) -> BinaryMask {
    let offsets = se.offsets();
    let (w, h) = (m.width as isize, m.height as isize);
    let mut out = vec![false; m.bits.len()];
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if !m.bits[idx] {
                continue;
            }
            out[idx] = offsets.iter().all(|&(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                nx >= 0 && ny >= 0 && nx < w && ny < h && m.bits[(ny * w + nx) as usize]
            });
        }
    }
    BinaryMask::new(m.width, m.height, out)
}

/// Dilation by the reflected element, clipped to the image.
pub fn dilate(m: &BinaryMask, se: &StructElem) -> BinaryMask {
    let offsets = se.offsets();
    let (w, h) = (m.width as isize, m.height as isize);
    let mut out = vec![false; m.bits.len()];
    for y in 0..h {
        for x in 0..w {
            if !m.bits[(y * w + x) as usize] {
                continue;
            }
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x - dx, y - dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h {
                    out[(ny * w + nx) as usize] = true;
                }
            }
        }
    }
    BinaryMask::new(m.width, m.height, out)
}

/// Erosion followed by dilation.
pub fn opening(m: &BinaryMask, se: &StructElem) -> BinaryMask {
    dilate(&erode(m, se), se)
}

/// Largest 8-connected component; ties go to the component reached first
/// in raster order. An empty mask stays empty.
pub fn largest_component(m: &BinaryMask) -> BinaryMask {
    let (w, h) = (m.width, m.height);
    let mut label = vec![0u32; w * h];
    let mut best: Option<(u32, usize)> = None;
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !m.bits[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(p) = queue.pop_front() {
            size += 1;
            let (px, py) = ((p % w) as isize, (p / w) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (nx, ny) = (px + dx, py + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if m.bits[q] && label[q] == 0 {
                        label[q] = next;
                        queue.push_back(q);
                    }
                }
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((next, size));
        }
    }
    let keep = best.map_or(0, |(l, _)| l);
    BinaryMask::new(w, h, label.iter().map(|&l| keep != 0 && l == keep).collect())
}

/// Otsu binarization, opening, then the largest connected component.
pub fn breast_mask(img: &GrayImage, se: &StructElem) -> Result<BinaryMask, SegmentError> {
    se.validate()?;
    let t = otsu_threshold(img)?;
    Ok(largest_component(&opening(&binarize(img, t), se)))
}

/// Zeroes every pixel outside the mask.
pub fn apply_mask(img: &GrayImage, m: &BinaryMask) -> Result<GrayImage, SegmentError> {
    if img.dims() != m.dims() {
        return Err(SegmentError::DimensionMismatch {
            image: img.dims(),
            mask: m.dims(),
        });
    }
    let data = img
        .data()
        .iter()
        .zip(&m.bits)
        .map(|(&v, &b)| if b { v } else { 0.0 })
        .collect();
    Ok(GrayImage::with_bit_depth(img.width(), img.height(), data, img.source_bit_depth())
        .expect("same geometry"))
}

/// Crops to the breast mask's bounding box grown by `margin`, using the
/// default structuring element.
pub fn roi_crop(img: &GrayImage, margin: usize) -> Result<(GrayImage, BBox), SegmentError> {
    roi_crop_with(img, margin, &StructElem::default())
}

pub fn roi_crop_with(
    img: &GrayImage,
    margin: usize,
    se: &StructElem,
) -> Result<(GrayImage, BBox), SegmentError> {
    let mask = breast_mask(img, se)?;
    let (x0, y0, x1, y1) = mask.bounding_box().ok_or(SegmentError::EmptyMask)?;
    let x0 = x0.saturating_sub(margin);
    let y0 = y0.saturating_sub(margin);
    let x1 = (x1 + margin).min(img.width());
    let y1 = (y1 + margin).min(img.height());
    let crop = img.crop(x0, y0, x1, y1).expect("box lies inside the image");
    let bbox = BBox::new(x0 as f64, y0 as f64, x1 as f64, y1 as f64).expect("non-empty box");
    Ok((crop, bbox))
}
