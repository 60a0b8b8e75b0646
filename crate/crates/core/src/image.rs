//! Normalized grayscale rasters.
//!
//! Pixels are stored as `f64` in `[0, 1]`, row-major, regardless of the bit
//! depth of the file they came from. 8- and 16-bit PNG and binary PGM (P5)
//! are supported for reading and writing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: unsupported image: {reason}")]
    Unsupported { path: PathBuf, reason: String },
    #[error("{path}: malformed image: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("invalid image geometry: {0}")]
    Geometry(String),
    #[error("pixel {index} has value {value}, outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
}

impl ImageError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        ImageError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn unsupported(path: &Path, reason: impl Into<String>) -> Self {
        ImageError::Unsupported {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    fn malformed(path: &Path, reason: impl Into<String>) -> Self {
        ImageError::Malformed {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }
}

/// Bit depth of the file an image was read from (or will be written to).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BitDepth {
    Eight,
    #[default]
    Sixteen,
}

impl BitDepth {
    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    /// Largest representable code, `2^bits - 1`.
    pub fn max_value(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            8 => Some(BitDepth::Eight),
            16 => Some(BitDepth::Sixteen),
            _ => None,
        }
    }

    /// Round-half-up quantization of a unit-interval value.
    pub fn quantize(self, v: f64) -> u16 {
        let max = self.max_value() as f64;
        (v.clamp(0.0, 1.0) * max + 0.5).floor().min(max) as u16
    }
}

/// Single-channel image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
    source_bit_depth: BitDepth,
}

impl GrayImage {
    /// Builds an image from row-major data. Derived images default to a
    /// 16-bit source depth.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        Self::with_bit_depth(width, height, data, BitDepth::Sixteen)
    }

    pub fn with_bit_depth(
        width: usize,
        height: usize,
        data: Vec<f64>,
        source_bit_depth: BitDepth,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::Geometry(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(ImageError::Geometry(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ImageError::OutOfRange { index, value });
        }
        Ok(Self {
            width,
            height,
            data,
            source_bit_depth,
        })
    }

    /// Builds an image, clamping every value into `[0, 1]` (NaN becomes 0).
    pub fn from_clamped(
        width: usize,
        height: usize,
        mut data: Vec<f64>,
        source_bit_depth: BitDepth,
    ) -> Result<Self, ImageError> {
        for v in &mut data {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Self::with_bit_depth(width, height, data, source_bit_depth)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, ImageError> {
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn source_bit_depth(&self) -> BitDepth {
        self.source_bit_depth
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Same pixels, different recorded source depth.
    pub fn with_source_bit_depth(mut self, depth: BitDepth) -> Self {
        self.source_bit_depth = depth;
        self
    }

    /// Copies the half-open window `[x0, x1) x [y0, y1)`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<Self, ImageError> {
        if x0 >= x1 || y0 >= y1 || x1 > self.width || y1 > self.height {
            return Err(ImageError::Geometry(format!(
                "crop window ({x0},{y0})-({x1},{y1}) invalid for {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity((x1 - x0) * (y1 - y0));
        for y in y0..y1 {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x1]);
        }
        Self::with_bit_depth(x1 - x0, y1 - y0, data, self.source_bit_depth)
    }

    /// Places the image centred on a `width x height` canvas filled with `fill`.
    pub fn pad_center(&self, width: usize, height: usize, fill: f64) -> Result<Self, ImageError> {
        if width < self.width || height < self.height {
            return Err(ImageError::Geometry(format!(
                "cannot pad {}x{} into smaller {width}x{height}",
                self.width, self.height
            )));
        }
        let ox = (width - self.width) / 2;
        let oy = (height - self.height) / 2;
        let mut data = vec![fill; width * height];
        for y in 0..self.height {
            let dst = (y + oy) * width + ox;
            data[dst..dst + self.width]
                .copy_from_slice(&self.data[y * self.width..(y + 1) * self.width]);
        }
        Self::with_bit_depth(width, height, data, self.source_bit_depth)
    }
}

/// Bin counts of an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bin index of `v` for a histogram with `bins` bins.
#[inline]
pub fn bin_index(v: f64, bins: usize) -> usize {
    ((v * bins as f64).floor() as usize).min(bins - 1)
}

/// Histogram with `bins` equal-width bins over `[0, 1]`; `bins` must be at least 2.
pub fn histogram(img: &GrayImage, bins: usize) -> Histogram {
    assert!(bins >= 2, "histogram needs at least 2 bins, got {bins}");
    let mut counts = vec![0u64; bins];
    for &v in img.data() {
        counts[bin_index(v, bins)] += 1;
    }
    Histogram { counts }
}

/// Bilinear resize with centre-aligned sampling and edge clamping.
pub fn resize(img: &GrayImage, new_width: usize, new_height: usize) -> Result<GrayImage, ImageError> {
    if new_width == 0 || new_height == 0 {
        return Err(ImageError::Geometry(format!(
            "resize target must be positive, got {new_width}x{new_height}"
        )));
    }
    if (new_width, new_height) == img.dims() {
        return Ok(img.clone());
    }
    let xs = sample_positions(img.width, new_width);
    let ys = sample_positions(img.height, new_height);
    let w = img.width;
    let src = img.data();
    let mut out = Vec::with_capacity(new_width * new_height);
    for &(y0, y1, ty) in &ys {
        let row0 = &src[y0 * w..(y0 + 1) * w];
        let row1 = &src[y1 * w..(y1 + 1) * w];
        for &(x0, x1, tx) in &xs {
            let top = lerp(row0[x0], row0[x1], tx);
            let bottom = lerp(row1[x0], row1[x1], tx);
            out.push(lerp(top, bottom, ty));
        }
    }
    GrayImage::from_clamped(new_width, new_height, out, img.source_bit_depth)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn sample_positions(src_len: usize, dst_len: usize) -> Vec<(usize, usize, f64)> {
    let scale = src_len as f64 / dst_len as f64;
    let last = (src_len - 1) as f64;
    (0..dst_len)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src_len - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Resizes so the shorter side equals `shorter`, preserving aspect ratio.
pub fn resize_shorter_side(img: &GrayImage, shorter: usize) -> Result<GrayImage, ImageError> {
    let (w, h) = img.dims();
    let (nw, nh) = if w <= h {
        let nh = ((h as f64) * shorter as f64 / w as f64).round().max(1.0) as usize;
        (shorter, nh)
    } else {
        let nw = ((w as f64) * shorter as f64 / h as f64).round().max(1.0) as usize;
        (nw, shorter)
    };
    resize(img, nw, nh)
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Reads an 8- or 16-bit single-channel PNG or binary PGM.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| ImageError::io(path, e))?;
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(path, &bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(path, &bytes)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P6") || bytes.starts_with(b"P3") {
        Err(ImageError::unsupported(
            path,
            "only binary single-channel PGM (P5) is supported",
        ))
    } else {
        Err(ImageError::unsupported(path, "not a PNG or PGM file"))
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<GrayImage, ImageError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| ImageError::malformed(path, e.to_string()))?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    match info.color_type {
        png::ColorType::Grayscale => {}
        png::ColorType::GrayscaleAlpha => {
            return Err(ImageError::unsupported(
                path,
                "multi-channel input (grayscale + alpha); expected a single channel",
            ))
        }
        png::ColorType::Rgb | png::ColorType::Rgba => {
            return Err(ImageError::unsupported(
                path,
                "multi-channel input (color); expected a single channel",
            ))
        }
        png::ColorType::Indexed => {
            return Err(ImageError::unsupported(
                path,
                "palette image; expected a single grayscale channel",
            ))
        }
    }
    let depth = match info.bit_depth {
        png::BitDepth::Eight => BitDepth::Eight,
        png::BitDepth::Sixteen => BitDepth::Sixteen,
        other => {
            return Err(ImageError::unsupported(
                path,
                format!("bit depth {} (expected 8 or 16)", other as u8),
            ))
        }
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageError::malformed(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| ImageError::malformed(path, e.to_string()))?;
    let stride = frame.line_size;
    let max = depth.max_value() as f64;
    let mut data = Vec::with_capacity(width * height);
    for row in buf.chunks(stride).take(height) {
        match depth {
            BitDepth::Eight => data.extend(row[..width].iter().map(|&b| b as f64 / max)),
            BitDepth::Sixteen => data.extend(
                row[..2 * width]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / max),
            ),
        }
    }
    GrayImage::with_bit_depth(width, height, data, depth)
        .map_err(|e| ImageError::malformed(path, e.to_string()))
}

fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<GrayImage, ImageError> {
    // Header: "P5" <ws> width <ws> height <ws> maxval <single ws> raster
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(ImageError::malformed(path, "truncated PGM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::malformed(path, "bad number in PGM header"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(ImageError::malformed(path, "missing whitespace after maxval"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    let depth = match maxval {
        255 => BitDepth::Eight,
        65535 => BitDepth::Sixteen,
        other => {
            return Err(ImageError::unsupported(
                path,
                format!("PGM maxval {other} (expected 255 or 65535)"),
            ))
        }
    };
    let bytes_per = if depth == BitDepth::Eight { 1 } else { 2 };
    let need = width * height * bytes_per;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| ImageError::malformed(path, "PGM raster shorter than header claims"))?;
    let max = maxval as f64;
    let data: Vec<f64> = match depth {
        BitDepth::Eight => raster.iter().map(|&b| b as f64 / max).collect(),
        BitDepth::Sixteen => raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / max)
            .collect(),
    };
    GrayImage::with_bit_depth(width, height, data, depth)
        .map_err(|e| ImageError::malformed(path, e.to_string()))
}

/// Writes the image quantized (round half up) to `bit_depth`. The format
/// follows the extension: `.pgm` writes binary PGM, anything else PNG.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>, bit_depth: BitDepth) -> Result<(), ImageError> {
    let path = path.as_ref();
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let raster = quantize_raster(img, bit_depth);
    let file = File::create(path).map_err(|e| ImageError::io(path, e))?;
    let mut out = BufWriter::new(file);
    if is_pgm {
        write!(
            out,
            "P5\n{} {}\n{}\n",
            img.width(),
            img.height(),
            bit_depth.max_value()
        )
        .and_then(|_| out.write_all(&raster))
        .map_err(|e| ImageError::io(path, e))?;
    } else {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(match bit_depth {
            BitDepth::Eight => png::BitDepth::Eight,
            BitDepth::Sixteen => png::BitDepth::Sixteen,
        });
        let mut writer = enc
            .write_header()
            .map_err(|e| ImageError::io(path, std::io::Error::other(e)))?;
        writer
            .write_image_data(&raster)
            .and_then(|_| writer.finish())
            .map_err(|e| ImageError::io(path, std::io::Error::other(e)))?;
    }
    out.flush().map_err(|e| ImageError::io(path, e))
}

fn quantize_raster(img: &GrayImage, bit_depth: BitDepth) -> Vec<u8> {
    match bit_depth {
        BitDepth::Eight => img
            .data()
            .iter()
            .map(|&v| bit_depth.quantize(v) as u8)
            .collect(),
        BitDepth::Sixteen => img
            .data()
            .iter()
            .flat_map(|&v| bit_depth.quantize(v).to_be_bytes())
            .collect(),
    }
}
