//! Mammogram preprocessing and domain-adaptation toolkit.
//!
//! The crate is organised by stage:
//!
//! * [`image`]: normalized grayscale rasters, PNG/PGM I/O, resizing and histograms.
//! * [`spectral`]: 2D Fourier transforms, low-frequency masks and amplitude
//!   spectrum transfer between a source and a target image.
//! * [`enhance`]: global and contrast-limited adaptive histogram equalization.
//! * [`segment`]: Otsu thresholding, binary morphology, breast masks and ROI crops.
//! * [`falce`]: the end-to-end preprocessing pipeline and seeded batch runner.
//! * [`daod`]: loss kernels for domain-adaptive detection plus a small
//!   adversarial trainer on synthetic 2-D domains.
//! * [`evalkit`]: average precision / mAP and dataset manifest splitting.

pub mod daod;
pub mod enhance;
pub mod evalkit;
pub mod falce;
pub mod image;
pub mod segment;
pub mod spectral;

pub use crate::image::{BitDepth, GrayImage, Histogram, ImageError};
