//! 2D Fourier analysis and low-frequency amplitude transfer.
//!
//! The forward transform is unnormalized,
//! `F(m, n) = sum_{h,w} x(h, w) exp(-i 2pi (h m / H + w n / W))`,
//! and the inverse divides by `H * W`. Row/column passes run through
//! `rustfft`, which handles arbitrary lengths.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

use crate::image::{BitDepth, GrayImage};

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("beta must lie in (0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("dimension mismatch: source is {src:?}, target is {tgt:?}")]
    DimensionMismatch {
        src: (usize, usize),
        tgt: (usize, usize),
    },
}

/// Complex coefficients of a 2D transform, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    coeffs: Vec<Complex64>,
    centered: bool,
}

impl Spectrum {
    /// Panics if `coeffs.len() != width * height`.
    pub fn from_parts(width: usize, height: usize, coeffs: Vec<Complex64>, centered: bool) -> Self {
        assert!(width > 0 && height > 0, "spectrum dimensions must be positive");
        assert_eq!(coeffs.len(), width * height, "coefficient count mismatch");
        Self {
            width,
            height,
            coeffs,
            centered,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::from_parts(width, height, vec![Complex64::new(0.0, 0.0); width * height], false)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.coeffs[row * self.width + col]
    }

    /// Row/column of the zero frequency in the current frame.
    pub fn dc_position(&self) -> (usize, usize) {
        if self.centered {
            (self.height / 2, self.width / 2)
        } else {
            (0, 0)
        }
    }
}

struct Plan2d {
    rows: Arc<dyn Fft<f64>>,
    cols: Arc<dyn Fft<f64>>,
}

impl Plan2d {
    fn new(width: usize, height: usize, direction: FftDirection) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows: planner.plan_fft(width, direction),
            cols: planner.plan_fft(height, direction),
        }
    }

    fn run(&self, width: usize, height: usize, data: &mut [Complex64]) {
        self.rows.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); height];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.cols.get_inplace_scratch_len()];
        for c in 0..width {
            for (r, slot) in column.iter_mut().enumerate() {
                *slot = data[r * width + c];
            }
            self.cols.process_with_scratch(&mut column, &mut scratch);
            for (r, v) in column.iter().enumerate() {
                data[r * width + c] = *v;
            }
        }
    }
}

/// Unnormalized forward transform of an image.
pub fn fft2(img: &GrayImage) -> Spectrum {
    let (w, h) = img.dims();
    let mut data: Vec<Complex64> = img.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Plan2d::new(w, h, FftDirection::Forward).run(w, h, &mut data);
    Spectrum::from_parts(w, h, data, false)
}

/// Real part of the inverse transform, without clamping. A centered
/// spectrum is unshifted first.
pub fn ifft2_real(spec: &Spectrum) -> Vec<f64> {
    let spec = if spec.centered {
        unshift_center(spec)
    } else {
        spec.clone()
    };
    let (w, h) = (spec.width, spec.height);
    let mut data = spec.coeffs;
    Plan2d::new(w, h, FftDirection::Inverse).run(w, h, &mut data);
    let norm = 1.0 / (w * h) as f64;
    data.iter().map(|c| c.re * norm).collect()
}

/// Inverse transform, real part clamped to `[0, 1]`.
pub fn ifft2(spec: &Spectrum) -> GrayImage {
    let data = ifft2_real(spec);
    GrayImage::from_clamped(spec.width, spec.height, data, BitDepth::Sixteen)
        .expect("spectrum dimensions are valid")
}

fn roll(spec: &Spectrum, dy: usize, dx: usize, centered: bool) -> Spectrum {
    let (w, h) = (spec.width, spec.height);
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    for r in 0..h {
        let nr = (r + dy) % h;
        for c in 0..w {
            out[nr * w + (c + dx) % w] = spec.coeffs[r * w + c];
        }
    }
    Spectrum::from_parts(w, h, out, centered)
}

/// Moves the zero frequency from `(0, 0)` to `(H/2, W/2)` (floor).
pub fn shift_center(spec: &Spectrum) -> Spectrum {
    roll(spec, spec.height / 2, spec.width / 2, true)
}

/// Inverse of [`shift_center`] for every size.
pub fn unshift_center(spec: &Spectrum) -> Spectrum {
    roll(
        spec,
        spec.height - spec.height / 2,
        spec.width - spec.width / 2,
        false,
    )
}

/// Modulus of every coefficient.
pub fn amplitude(spec: &Spectrum) -> Vec<f64> {
    spec.coeffs.iter().map(|c| c.norm()).collect()
}

/// Argument of every coefficient in `(-pi, pi]`; zero for a zero coefficient.
pub fn phase(spec: &Spectrum) -> Vec<f64> {
    spec.coeffs.iter().map(|&c| coeff_phase(c)).collect()
}

fn coeff_phase(c: Complex64) -> f64 {
    if c.re == 0.0 && c.im == 0.0 {
        return 0.0;
    }
    let p = c.im.atan2(c.re);
    if p <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        p
    }
}

/// Rebuilds coefficients from amplitude and phase.
pub fn from_polar(width: usize, height: usize, amplitude: &[f64], phase: &[f64], centered: bool) -> Spectrum {
    let coeffs = amplitude
        .iter()
        .zip(phase)
        .map(|(&a, &p)| Complex64::from_polar(a, p))
        .collect();
    Spectrum::from_parts(width, height, coeffs, centered)
}

/// Low-frequency selector in the centered frame.
///
/// With `hr = floor(beta * H / 2)` and `hc = floor(beta * W / 2)`, rows
/// `[H/2 - hr, H/2 + hr)` and columns `[W/2 - hc, W/2 + hc)` are selected.
/// A zero half-extent still selects the centre row/column, so the DC
/// coefficient is always included; `beta == 1` selects everything.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMask {
    beta: f64,
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BetaMask {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Half-open `[start, end)` range selected along one axis of length `len`.
fn mask_span(len: usize, beta: f64) -> (usize, usize) {
    if beta >= 1.0 {
        return (0, len);
    }
    let center = len / 2;
    let half = (beta * len as f64 / 2.0).floor() as usize;
    if half == 0 {
        (center, center + 1)
    } else {
        (center - half.min(center), (center + half).min(len))
    }
}

pub fn beta_mask(height: usize, width: usize, beta: f64) -> Result<BetaMask, SpectralError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(SpectralError::InvalidBeta(beta));
    }
    let (r0, r1) = mask_span(height, beta);
    let (c0, c1) = mask_span(width, beta);
    let mut bits = vec![false; width * height];
    for r in r0..r1 {
        bits[r * width + c0..r * width + c1].fill(true);
    }
    Ok(BetaMask {
        beta,
        width,
        height,
        bits,
    })
}

/// Centered spectrum whose amplitude is the target's inside the beta mask
/// and the source's outside, with the source phase everywhere.
pub fn fda_spectrum(src: &GrayImage, tgt: &GrayImage, beta: f64) -> Result<Spectrum, SpectralError> {
    if src.dims() != tgt.dims() {
        return Err(SpectralError::DimensionMismatch {
            src: src.dims(),
            tgt: tgt.dims(),
        });
    }
    let (w, h) = src.dims();
    let mask = beta_mask(h, w, beta)?;
    let s = shift_center(&fft2(src));
    let t = shift_center(&fft2(tgt));
    let coeffs = s
        .coeffs
        .iter()
        .zip(&t.coeffs)
        .zip(&mask.bits)
        .map(|((&sc, &tc), &inside)| {
            if inside {
                Complex64::from_polar(tc.norm(), coeff_phase(sc))
            } else {
                sc
            }
        })
        .collect();
    Ok(Spectrum::from_parts(w, h, coeffs, true))
}

/// Replaces the low-frequency amplitude of `src` with that of `tgt`.
pub fn fda_transfer(src: &GrayImage, tgt: &GrayImage, beta: f64) -> Result<GrayImage, SpectralError> {
    let spec = fda_spectrum(src, tgt, beta)?;
    Ok(ifft2(&spec).with_source_bit_depth(src.source_bit_depth()))
}
