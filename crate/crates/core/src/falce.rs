//! End-to-end preprocessing.
//!
//! Dense (source) images are adapted towards a fatty (target) image with
//! low-frequency amplitude transfer, enhanced with CLAHE and then masked by
//! the breast region of the original dense image. Fatty images only get
//! CLAHE. [`run_batch`] pairs every source with a seeded random target and
//! writes 16-bit PNGs plus a CSV manifest.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::enhance::{clahe, ClaheParams, ClipLimit, EnhanceError};
use crate::image::{load_image, resize, resize_shorter_side, save_image, BitDepth, GrayImage, ImageError};
use crate::segment::{apply_mask, breast_mask, ElementShape, SegmentError, StructElem};
use crate::spectral::{fda_transfer, SpectralError};

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_WORKING_SHORTER_SIDE: usize = 640;

#[derive(Debug, Error)]
pub enum FalceError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Enhance(#[from] EnhanceError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("{0} manifest is empty")]
    EmptyManifest(&'static str),
}

/// Geometry both images are brought to before spectral transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkingSize {
    /// Resize to exactly `(width, height)`.
    Exact(usize, usize),
    /// Resize each image so its shorter side has this length (keeping the
    /// aspect ratio), then centre-pad both with zeros to common dimensions.
    ShorterSide(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalceConfig {
    pub beta: f64,
    pub clahe: ClaheParams,
    /// CLAHE parameters for the fatty branch; `None` reuses `clahe`.
    pub target_clahe: Option<ClaheParams>,
    pub struct_elem: StructElem,
    /// `None` requires both inputs to already share dimensions.
    pub working_size: Option<WorkingSize>,
    pub seed: u64,
}

impl Default for FalceConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            clahe: ClaheParams::default(),
            target_clahe: None,
            struct_elem: StructElem::default(),
            working_size: Some(WorkingSize::ShorterSide(DEFAULT_WORKING_SHORTER_SIDE)),
            seed: 0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClahe {
    clip_limit: Option<ClipLimit>,
    tiles_x: Option<usize>,
    tiles_y: Option<usize>,
    bins: Option<usize>,
}

impl RawClahe {
    fn apply(self, mut p: ClaheParams) -> ClaheParams {
        p.clip_limit = self.clip_limit.unwrap_or(p.clip_limit);
        p.tiles_x = self.tiles_x.unwrap_or(p.tiles_x);
        p.tiles_y = self.tiles_y.unwrap_or(p.tiles_y);
        p.bins = self.bins.unwrap_or(p.bins);
        p
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructElem {
    shape: Option<ElementShape>,
    radius: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawWorkingSize {
    Side(usize),
    Exact([usize; 2]),
    Keyword(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    beta: Option<f64>,
    clahe: Option<RawClahe>,
    target_clahe: Option<RawClahe>,
    struct_elem: Option<RawStructElem>,
    working_size: Option<RawWorkingSize>,
    seed: Option<u64>,
}

impl FalceConfig {
    /// Parses a TOML config. Missing keys take their defaults;
    /// `working_size` is an integer (shorter side), `[width, height]` or
    /// `"none"`.
    pub fn from_toml_str(text: &str) -> Result<Self, FalceError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| FalceError::Config(e.to_string()))?;
        let mut cfg = FalceConfig::default();
        cfg.beta = raw.beta.unwrap_or(cfg.beta);
        if let Some(c) = raw.clahe {
            cfg.clahe = c.apply(cfg.clahe);
        }
        cfg.target_clahe = raw.target_clahe.map(|c| c.apply(cfg.clahe));
        if let Some(se) = raw.struct_elem {
            cfg.struct_elem.shape = se.shape.unwrap_or(cfg.struct_elem.shape);
            cfg.struct_elem.radius = se.radius.unwrap_or(cfg.struct_elem.radius);
        }
        if let Some(ws) = raw.working_size {
            cfg.working_size = match ws {
                RawWorkingSize::Side(n) => Some(WorkingSize::ShorterSide(n)),
                RawWorkingSize::Exact([w, h]) => Some(WorkingSize::Exact(w, h)),
                RawWorkingSize::Keyword(k) if k.eq_ignore_ascii_case("none") => None,
                RawWorkingSize::Keyword(k) => {
                    return Err(FalceError::Config(format!(
                        "working_size must be an integer, [width, height] or \"none\", got {k:?}"
                    )))
                }
            };
        }
        cfg.seed = raw.seed.unwrap_or(cfg.seed);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, FalceError> {
        let text = fs::read_to_string(path).map_err(|source| FalceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), FalceError> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(FalceError::Config(format!("beta must be in (0, 1], got {}", self.beta)));
        }
        self.clahe.validate()?;
        if let Some(t) = &self.target_clahe {
            t.validate()?;
        }
        self.struct_elem.validate()?;
        match self.working_size {
            Some(WorkingSize::Exact(w, h)) if w == 0 || h == 0 => {
                Err(FalceError::Config(format!("working_size {w}x{h} has a zero side")))
            }
            Some(WorkingSize::ShorterSide(0)) => Err(FalceError::Config("working_size must be positive".into())),
            _ => Ok(()),
        }
    }

    pub fn target_params(&self) -> &ClaheParams {
        self.target_clahe.as_ref().unwrap_or(&self.clahe)
    }
}

/// Pipeline stages in the order [`falce_source_traced`] reports them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// The dense and fatty images after working-size adjustment.
    Resize,
    /// Input to mask construction (the adjusted dense image).
    BreastMask,
    /// Output of spectral transfer.
    Fda,
    /// Output of CLAHE.
    Clahe,
    /// Final masked output.
    Overlay,
}

/// Brings both images to the configured working geometry.
pub fn to_working_size(
    dense: &GrayImage,
    fatty: &GrayImage,
    size: Option<WorkingSize>,
) -> Result<(GrayImage, GrayImage), ImageError> {
    match size {
        None => Ok((dense.clone(), fatty.clone())),
        Some(WorkingSize::Exact(w, h)) => Ok((resize(dense, w, h)?, resize(fatty, w, h)?)),
        Some(WorkingSize::ShorterSide(n)) => {
            let d = resize_shorter_side(dense, n)?;
            let f = resize_shorter_side(fatty, n)?;
            let w = d.width().max(f.width());
            let h = d.height().max(f.height());
            Ok((d.pad_center(w, h, 0.0)?, f.pad_center(w, h, 0.0)?))
        }
    }
}

/// Source branch: mask(CLAHE(FDA(dense, fatty))), mask from the dense image.
pub fn falce_source(dense: &GrayImage, fatty: &GrayImage, cfg: &FalceConfig) -> Result<GrayImage, FalceError> {
    falce_source_traced(dense, fatty, cfg, &mut |_, _| {})
}

/// [`falce_source`] calling `hook` with each stage's image as it is produced.
pub fn falce_source_traced(
    dense: &GrayImage,
    fatty: &GrayImage,
    cfg: &FalceConfig,
    hook: &mut dyn FnMut(Stage, &GrayImage),
) -> Result<GrayImage, FalceError> {
    cfg.validate()?;
    let (dense, fatty) = to_working_size(dense, fatty, cfg.working_size)?;
    hook(Stage::Resize, &dense);
    hook(Stage::Resize, &fatty);
    hook(Stage::BreastMask, &dense);
    let mask = breast_mask(&dense, &cfg.struct_elem)?;
    let adapted = fda_transfer(&dense, &fatty, cfg.beta)?;
    hook(Stage::Fda, &adapted);
    let enhanced = clahe(&adapted, &cfg.clahe)?;
    hook(Stage::Clahe, &enhanced);
    let out = apply_mask(&enhanced, &mask)?;
    hook(Stage::Overlay, &out);
    Ok(out)
}

/// Target branch: CLAHE only.
pub fn falce_target(fatty: &GrayImage, cfg: &FalceConfig) -> Result<GrayImage, FalceError> {
    Ok(clahe(fatty, cfg.target_params())?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
}

/// Reads `image_id` and `path` columns from a CSV; repeated ids keep their
/// first row. Relative paths are resolved against the manifest's directory.
pub fn read_image_manifest(path: &Path) -> Result<Vec<ManifestEntry>, FalceError> {
    let err = |reason: String| FalceError::Manifest {
        path: path.to_path_buf(),
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => FalceError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => err(format!("{other:?}")),
        })?;
    let header = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| err(format!("missing column {name:?}")))
    };
    let (id_col, path_col) = (col("image_id")?, col("path")?);
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let (Some(id), Some(p)) = (rec.get(id_col), rec.get(path_col)) else {
            return Err(err(format!("line {line}: missing image_id or path")));
        };
        if id.is_empty() || p.is_empty() {
            return Err(err(format!("line {line}: empty image_id or path")));
        }
        if seen.insert(id.to_string()) {
            out.push(ManifestEntry {
                id: id.to_string(),
                path: base.join(p),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    pub source_id: String,
    pub target_id: String,
    pub output_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BatchReport {
    pub processed: usize,
    /// `(source id, error description)`, sorted by source id.
    pub failures: Vec<(String, String)>,
    /// Successful pairings, sorted by source id.
    pub manifest: Vec<Pairing>,
}

impl BatchReport {
    pub fn write_manifest(&self, path: &Path) -> Result<(), FalceError> {
        let io = |source: std::io::Error| FalceError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
        w.write_record(["source_id", "target_id", "output_path"])
            .map_err(|e| io(e.into()))?;
        for p in &self.manifest {
            w.write_record([&p.source_id, &p.target_id, &p.output_path.to_string_lossy().into_owned()])
                .map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)
    }
}

/// Draws one target index per source, in source order.
pub fn sample_targets(sources: usize, targets: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sources).map(|_| rng.random_range(0..targets)).collect()
}

/// Output file name for an image id; characters outside `[A-Za-z0-9._-]`
/// become `_`.
pub fn output_name(id: &str) -> String {
    let stem: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect();
    format!("{stem}.png")
}

pub fn run_batch(
    sources: &[ManifestEntry],
    targets: &[ManifestEntry],
    cfg: &FalceConfig,
    out_dir: &Path,
) -> Result<BatchReport, FalceError> {
    run_batch_with_jobs(sources, targets, cfg, out_dir, 1)
}

/// Processes every source with `jobs` worker threads (0 = rayon's
/// default). Pairings are drawn before any work starts, so the result does
/// not depend on `jobs`. `manifest.csv` is written into `out_dir`.
pub fn run_batch_with_jobs(
    sources: &[ManifestEntry],
    targets: &[ManifestEntry],
    cfg: &FalceConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<BatchReport, FalceError> {
    if sources.is_empty() {
        return Err(FalceError::EmptyManifest("source"));
    }
    if targets.is_empty() {
        return Err(FalceError::EmptyManifest("target"));
    }
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|source| FalceError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let picks = sample_targets(sources.len(), targets.len(), cfg.seed);
    let mut names = HashSet::new();
    for s in sources {
        if !names.insert(output_name(&s.id)) {
            return Err(FalceError::Config(format!("source id {:?} maps to a duplicate output name", s.id)));
        }
    }

    let work = |(src, &t): (&ManifestEntry, &usize)| -> (String, Result<Pairing, String>) {
        let tgt = &targets[t];
        let output_path = out_dir.join(output_name(&src.id));
        let result = (|| -> Result<(), FalceError> {
            let dense = load_image(&src.path)?;
            let fatty = load_image(&tgt.path)?;
            let out = falce_source(&dense, &fatty, cfg)?;
            save_image(&out, &output_path, BitDepth::Sixteen)?;
            Ok(())
        })();
        log::debug!("{} <- {}: {:?}", src.id, tgt.id, result.as_ref().map(|_| ()));
        let pairing = result.map(|_| Pairing {
            source_id: src.id.clone(),
            target_id: tgt.id.clone(),
            output_path,
        });
        (src.id.clone(), pairing.map_err(|e| e.to_string()))
    };
    let results: Vec<(String, Result<Pairing, String>)> = if jobs == 1 {
        sources.iter().zip(&picks).map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| FalceError::Config(format!("thread pool: {e}")))?;
        pool.install(|| sources.par_iter().zip(&picks).map(work).collect())
    };

    let mut report = BatchReport::default();
    for (id, r) in results {
        match r {
            Ok(p) => report.manifest.push(p),
            Err(e) => report.failures.push((id, e)),
        }
    }
    report.processed = report.manifest.len();
    report.manifest.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    report.failures.sort();
    report.write_manifest(&out_dir.join("manifest.csv"))?;
    Ok(report)
}
