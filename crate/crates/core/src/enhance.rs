//! Global and contrast-limited adaptive histogram equalization.
//!
//! Tile mappings send bin `b` to `lo + (hi - lo) * cdf(b) / n`, where
//! `[lo, hi]` is the range of the whole image (not of the tile) and `n`
//! the tile pixel count. A tile whose pixels all fall in one bin maps every
//! value to itself.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{bin_index, GrayImage};

#[derive(Debug, Error, PartialEq)]
pub enum EnhanceError {
    #[error("invalid CLAHE parameters: {0}")]
    InvalidParams(String),
    #[error("image {width}x{height} is smaller than the {tiles_x}x{tiles_y} tile grid")]
    ImageTooSmall {
        width: usize,
        height: usize,
        tiles_x: usize,
        tiles_y: usize,
    },
}

/// Histogram clip limit, as a multiple of the uniform bin height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClipLimit {
    Limited(f64),
    Unlimited(UnlimitedTag),
}

/// Serializes as the string `"unlimited"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnlimitedTag {
    Unlimited,
}

impl ClipLimit {
    pub const UNLIMITED: ClipLimit = ClipLimit::Unlimited(UnlimitedTag::Unlimited);

    pub fn is_unlimited(&self) -> bool {
        matches!(self, ClipLimit::Unlimited(_))
    }
}

impl std::str::FromStr for ClipLimit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unlimited") || s.eq_ignore_ascii_case("none") {
            return Ok(ClipLimit::UNLIMITED);
        }
        s.parse::<f64>()
            .map(ClipLimit::Limited)
            .map_err(|_| format!("clip limit must be a number >= 1 or \"unlimited\", got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClaheParams {
    pub clip_limit: ClipLimit,
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub bins: usize,
}

impl Default for ClaheParams {
    fn default() -> Self {
        Self {
            clip_limit: ClipLimit::Limited(2.0),
            tiles_x: 8,
            tiles_y: 8,
            bins: 256,
        }
    }
}

impl ClaheParams {
    pub fn validate(&self) -> Result<(), EnhanceError> {
        if self.tiles_x == 0 || self.tiles_y == 0 {
            return Err(EnhanceError::InvalidParams(format!(
                "tile grid must be at least 1x1, got {}x{}",
                self.tiles_x, self.tiles_y
            )));
        }
        if self.bins < 2 {
            return Err(EnhanceError::InvalidParams(format!(
                "bins must be >= 2, got {}",
                self.bins
            )));
        }
        if let ClipLimit::Limited(c) = self.clip_limit {
            if !(c >= 1.0 && c.is_finite()) {
                return Err(EnhanceError::InvalidParams(format!(
                    "clip limit must be >= 1 or unlimited, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Global histogram equalization over 256 bins.
pub fn equalize_hist(img: &GrayImage) -> GrayImage {
    equalize_hist_bins(img, 256)
}

pub fn equalize_hist_bins(img: &GrayImage, bins: usize) -> GrayImage {
    assert!(bins >= 2);
    let mut counts = vec![0u64; bins];
    for &v in img.data() {
        counts[bin_index(v, bins)] += 1;
    }
    if counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return img.clone();
    }
    let (lo, hi) = img.min_max();
    let n = img.len() as f64;
    let mut cdf = 0u64;
    let lut: Vec<f64> = counts
        .iter()
        .map(|&c| {
            cdf += c;
            lo + (hi - lo) * (cdf as f64 / n)
        })
        .collect();
    let data = img.data().iter().map(|&v| lut[bin_index(v, bins)]).collect();
    GrayImage::from_clamped(img.width(), img.height(), data, img.source_bit_depth())
        .expect("same geometry")
}

/// Clips `counts` at `limit` and redistributes the excess.
///
/// Each round clips every bin to `limit` and spreads `excess / bins` to all
/// bins. Once the per-bin share drops below one count, the remaining
/// `excess` counts go one each to the lowest-index bins. The total is
/// preserved exactly.
pub fn clip_histogram(counts: &mut [u64], limit: u64) {
    let bins = counts.len() as u64;
    let mut excess = 0u64;
    loop {
        for c in counts.iter_mut() {
            if *c > limit {
                excess += *c - limit;
                *c = limit;
            }
        }
        let share = excess / bins;
        if share == 0 {
            break;
        }
        let saturated = counts.iter().all(|&c| c >= limit);
        for c in counts.iter_mut() {
            *c += share;
        }
        excess -= share * bins;
        if saturated {
            // limit * bins is below the total; nothing more can be clipped usefully.
            break;
        }
    }
    for c in counts.iter_mut().take(excess as usize) {
        *c += 1;
    }
}

/// Integer clip level for a tile of `pixels` pixels.
pub fn clip_level(clip_limit: f64, pixels: u64, bins: usize) -> u64 {
    ((clip_limit * pixels as f64 / bins as f64).floor() as u64).max(1)
}

/// Per-tile remapping.
#[derive(Debug, Clone, PartialEq)]
pub enum TileMapping {
    Identity,
    Lut(Vec<f64>),
}

impl TileMapping {
    #[inline]
    fn apply(&self, v: f64, bin: usize) -> f64 {
        match self {
            TileMapping::Identity => v,
            TileMapping::Lut(lut) => lut[bin],
        }
    }

    /// Whether the mapping is non-decreasing in the pixel value.
    pub fn is_monotone(&self) -> bool {
        match self {
            TileMapping::Identity => true,
            TileMapping::Lut(lut) => lut.windows(2).all(|w| w[0] <= w[1]),
        }
    }
}

/// Tile histograms and mappings of one CLAHE run, exposed for inspection.
#[derive(Debug, Clone)]
pub struct ClaheTiles {
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Tile boundaries along x, `tiles_x + 1` entries.
    pub x_edges: Vec<usize>,
    pub y_edges: Vec<usize>,
    pub raw_histograms: Vec<Vec<u64>>,
    pub clipped_histograms: Vec<Vec<u64>>,
    pub mappings: Vec<TileMapping>,
}

fn edges(len: usize, tiles: usize) -> Vec<usize> {
    (0..=tiles).map(|k| k * len / tiles).collect()
}

/// Computes every tile's clipped histogram and mapping.
pub fn clahe_tiles(img: &GrayImage, params: &ClaheParams) -> Result<ClaheTiles, EnhanceError> {
    params.validate()?;
    let (w, h) = img.dims();
    if w < params.tiles_x || h < params.tiles_y {
        return Err(EnhanceError::ImageTooSmall {
            width: w,
            height: h,
            tiles_x: params.tiles_x,
            tiles_y: params.tiles_y,
        });
    }
    let bins = params.bins;
    let x_edges = edges(w, params.tiles_x);
    let y_edges = edges(h, params.tiles_y);
    let (lo, hi) = img.min_max();
    let data = img.data();

    let tile_count = params.tiles_x * params.tiles_y;
    let mut raw_histograms = Vec::with_capacity(tile_count);
    let mut clipped_histograms = Vec::with_capacity(tile_count);
    let mut mappings = Vec::with_capacity(tile_count);
    for ty in 0..params.tiles_y {
        for tx in 0..params.tiles_x {
            let mut counts = vec![0u64; bins];
            for y in y_edges[ty]..y_edges[ty + 1] {
                for &v in &data[y * w + x_edges[tx]..y * w + x_edges[tx + 1]] {
                    counts[bin_index(v, bins)] += 1;
                }
            }
            let pixels: u64 = counts.iter().sum();
            let occupied = counts.iter().filter(|&&c| c > 0).count();
            let mut clipped = counts.clone();
            if let ClipLimit::Limited(c) = params.clip_limit {
                clip_histogram(&mut clipped, clip_level(c, pixels, bins));
            }
            let mapping = if occupied <= 1 {
                TileMapping::Identity
            } else {
                let n = pixels as f64;
                let mut cdf = 0u64;
                TileMapping::Lut(
                    clipped
                        .iter()
                        .map(|&c| {
                            cdf += c;
                            lo + (hi - lo) * (cdf as f64 / n)
                        })
                        .collect(),
                )
            };
            raw_histograms.push(counts);
            clipped_histograms.push(clipped);
            mappings.push(mapping);
        }
    }
    Ok(ClaheTiles {
        tiles_x: params.tiles_x,
        tiles_y: params.tiles_y,
        x_edges,
        y_edges,
        raw_histograms,
        clipped_histograms,
        mappings,
    })
}

/// Neighbouring tiles and blend weight for every coordinate along one axis.
fn axis_weights(len: usize, edges: &[usize]) -> Vec<(usize, usize, f64)> {
    let tiles = edges.len() - 1;
    let centers: Vec<f64> = (0..tiles)
        .map(|k| (edges[k] + edges[k + 1]) as f64 / 2.0 - 0.5)
        .collect();
    (0..len)
        .map(|i| {
            let p = i as f64;
            if p <= centers[0] {
                (0, 0, 0.0)
            } else if p >= centers[tiles - 1] {
                (tiles - 1, tiles - 1, 0.0)
            } else {
                let k = centers.partition_point(|&c| c <= p) - 1;
                let t = (p - centers[k]) / (centers[k + 1] - centers[k]);
                (k, k + 1, t)
            }
        })
        .collect()
}

/// Contrast-limited adaptive histogram equalization.
pub fn clahe(img: &GrayImage, params: &ClaheParams) -> Result<GrayImage, EnhanceError> {
    let tiles = clahe_tiles(img, params)?;
    let (w, h) = img.dims();
    let bins = params.bins;
    let xw = axis_weights(w, &tiles.x_edges);
    let yw = axis_weights(h, &tiles.y_edges);
    let map = |tx: usize, ty: usize| &tiles.mappings[ty * tiles.tiles_x + tx];
    let data = img.data();
    let mut out = Vec::with_capacity(w * h);
    for (y, &(ty0, ty1, wy)) in yw.iter().enumerate() {
        for (x, &(tx0, tx1, wx)) in xw.iter().enumerate() {
            let v = data[y * w + x];
            let b = bin_index(v, bins);
            let row = |ty: usize| {
                let a = map(tx0, ty).apply(v, b);
                if tx0 == tx1 {
                    a
                } else {
                    a + (map(tx1, ty).apply(v, b) - a) * wx
                }
            };
            let top = row(ty0);
            out.push(if ty0 == ty1 { top } else { top + (row(ty1) - top) * wy });
        }
    }
    Ok(GrayImage::from_clamped(w, h, out, img.source_bit_depth()).expect("same geometry"))
}
