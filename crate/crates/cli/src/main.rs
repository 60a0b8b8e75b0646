//! `falce` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 input/IO
//! error, 3 numerical failure. Diagnostics go to stderr (level from the
//! `FALCE_LOG` environment variable); stdout carries only results.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use falce_core::daod::{toy_adapt, DaodError, ToyConfig, ToyDomains};
use falce_core::enhance::{clahe, ClaheParams, ClipLimit, EnhanceError};
use falce_core::evalkit::{self, EvalError};
use falce_core::falce::{self, FalceConfig, FalceError};
use falce_core::image::{load_image, resize, save_image, BitDepth, GrayImage, ImageError};
use falce_core::segment::{breast_mask, ElementShape, SegmentError, StructElem};
use falce_core::spectral::{fda_transfer, SpectralError};

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::Geometry(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::InvalidBeta(_) => CliError::Usage(e.to_string()),
            SpectralError::DimensionMismatch { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<EnhanceError> for CliError {
    fn from(e: EnhanceError) -> Self {
        match e {
            EnhanceError::InvalidParams(_) => CliError::Usage(e.to_string()),
            EnhanceError::ImageTooSmall { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SegmentError> for CliError {
    fn from(e: SegmentError) -> Self {
        match e {
            SegmentError::ZeroRadius => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<FalceError> for CliError {
    fn from(e: FalceError) -> Self {
        match e {
            FalceError::Config(_) => CliError::Usage(e.to_string()),
            FalceError::Image(e) => e.into(),
            FalceError::Spectral(e) => e.into(),
            FalceError::Enhance(e) => e.into(),
            FalceError::Segment(e) => e.into(),
            FalceError::Io { .. } | FalceError::Manifest { .. } | FalceError::EmptyManifest(_) => {
                CliError::Input(e.to_string())
            }
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::InvalidIouThr(_) | EvalError::InvalidFraction(_) | EvalError::NoClasses => {
                CliError::Usage(e.to_string())
            }
            EvalError::Io { .. } | EvalError::Parse { .. } | EvalError::NoGroundTruth => CliError::Input(e.to_string()),
        }
    }
}

impl From<DaodError> for CliError {
    fn from(e: DaodError) -> Self {
        match e {
            DaodError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(name = "falce", version, about = "Mammogram preprocessing and domain-adaptation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Low-frequency amplitude transfer from TARGET onto SOURCE.
    Fda(FdaArgs),
    /// Run the full pipeline over source and target manifests.
    Run(RunArgs),
    /// Per-class AP and mAP of detections against ground truth.
    EvalMap(EvalArgs),
    /// Adversarial alignment tools.
    Daod {
        #[command(subcommand)]
        command: DaodCommand,
    },
    /// Split a manifest into dense, fatty-train and fatty-test sets.
    Split(SplitArgs),
    /// Breast mask of an image (written as 0/255 8-bit PNG).
    Mask(MaskArgs),
    /// Contrast-limited adaptive histogram equalization.
    Clahe(ClaheArgs),
}

#[derive(Subcommand)]
enum DaodCommand {
    /// Train the toy min-max model and write its history as CSV.
    Demo(DemoArgs),
}

#[derive(Args)]
struct FdaArgs {
    /// Image whose phase is kept.
    source: PathBuf,
    /// Image whose low-frequency amplitude is transferred (resized to the source).
    target: PathBuf,
    /// Fraction of each dimension covered by the low-frequency window, in (0, 1].
    #[arg(long, default_value_t = falce::DEFAULT_BETA)]
    beta: f64,
    /// Output image (16-bit PNG, or PGM with a .pgm extension).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClaheFlags {
    /// Clip limit as a multiple of the mean bin height, or "unlimited".
    #[arg(long, value_parser = parse_clip)]
    clip_limit: Option<ClipLimit>,
    /// Tile grid as COLSxROWS (e.g. 8x8) or a single number for both.
    #[arg(long, value_parser = parse_tiles)]
    tiles: Option<(usize, usize)>,
}

impl ClaheFlags {
    fn apply(&self, p: &mut ClaheParams) {
        if let Some(c) = self.clip_limit {
            p.clip_limit = c;
        }
        if let Some((x, y)) = self.tiles {
            p.tiles_x = x;
            p.tiles_y = y;
        }
    }
}

#[derive(Args)]
struct SeFlags {
    /// Structuring element shape: square or disk.
    #[arg(long, value_parser = parse_shape)]
    se_shape: Option<ElementShape>,
    /// Structuring element radius in pixels (>= 1).
    #[arg(long)]
    se_radius: Option<usize>,
}

impl SeFlags {
    fn apply(&self, se: &mut StructElem) {
        if let Some(s) = self.se_shape {
            se.shape = s;
        }
        if let Some(r) = self.se_radius {
            se.radius = r;
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// CSV with image_id and path columns listing dense (source) images.
    sources: PathBuf,
    /// CSV with image_id and path columns listing fatty (target) images.
    targets: PathBuf,
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for images and manifest.csv.
    #[arg(long)]
    out: PathBuf,
    /// Low-frequency window fraction, in (0, 1].
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    clahe: ClaheFlags,
    #[command(flatten)]
    se: SeFlags,
    /// Seed for target sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground truth: a manifest CSV or image_id,class_id,x1,y1,x2,y2.
    ground_truth: PathBuf,
    /// Detections: image_id,class_id,score,x1,y1,x2,y2.
    detections: PathBuf,
    /// IoU needed for a detection to match a ground-truth box, in (0, 1).
    #[arg(long, default_value_t = evalkit::DEFAULT_IOU_THR)]
    iou_thr: f64,
    /// Number of classes evaluated (ids 0..N).
    #[arg(long, default_value_t = evalkit::NUM_CLASSES)]
    num_classes: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    /// Weight of the adversarial term.
    #[arg(long, default_value_t = 0.1)]
    lambda1: f64,
    /// Seed for the synthetic point clouds.
    #[arg(long)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    /// Manifest CSV: image_id,path,density,label,x1,y1,x2,y2.
    manifest: PathBuf,
    /// Fraction of each fatty stratum assigned to train.
    #[arg(long, default_value_t = 0.6)]
    fraction: f64,
    #[arg(long)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MaskArgs {
    image: PathBuf,
    #[command(flatten)]
    se: SeFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClaheArgs {
    image: PathBuf,
    #[command(flatten)]
    clahe: ClaheFlags,
    #[arg(long)]
    out: PathBuf,
}

fn parse_clip(s: &str) -> Result<ClipLimit, String> {
    s.parse()
}

fn parse_shape(s: &str) -> Result<ElementShape, String> {
    s.parse()
}

fn parse_tiles(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected COLSxROWS or N, got {s:?}");
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => num(s).map(|n| (n, n)),
    }
}

/// Opens `path` for writing, or stdout when absent.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<(), CliError> {
    w.flush().map_err(|e| io_err(path.unwrap_or(Path::new("<stdout>")), e))
}

fn cmd_fda(a: &FdaArgs) -> Result<(), CliError> {
    if !(a.beta > 0.0 && a.beta <= 1.0) {
        return Err(SpectralError::InvalidBeta(a.beta).into());
    }
    let src = load_image(&a.source)?;
    let tgt = load_image(&a.target)?;
    let tgt = resize(&tgt, src.width(), src.height())?;
    let out = fda_transfer(&src, &tgt, a.beta)?;
    save_image(&out, &a.out, BitDepth::Sixteen)?;
    Ok(())
}

fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let mut cfg = match &a.config {
        Some(p) => FalceConfig::load(p).map_err(|e| match e {
            FalceError::Io { .. } => CliError::Input(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        })?,
        None => FalceConfig::default(),
    };
    if let Some(b) = a.beta {
        cfg.beta = b;
    }
    a.clahe.apply(&mut cfg.clahe);
    a.se.apply(&mut cfg.struct_elem);
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let sources = falce::read_image_manifest(&a.sources)?;
    let targets = falce::read_image_manifest(&a.targets)?;
    let report = falce::run_batch_with_jobs(&sources, &targets, &cfg, &a.out, a.jobs)?;
    for (id, err) in &report.failures {
        log::error!("{id}: {err}");
    }
    let mut w = output(None)?;
    writeln!(w, "processed,failed,manifest").and_then(|_| {
        writeln!(
            w,
            "{},{},{}",
            report.processed,
            report.failures.len(),
            a.out.join("manifest.csv").display()
        )
    })
    .map_err(|e| io_err(Path::new("<stdout>"), e))?;
    finish(w, None)?;
    if report.processed == 0 {
        return Err(CliError::Input(format!("all {} images failed", report.failures.len())));
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let gts = evalkit::read_ground_truth(&a.ground_truth)?;
    let dets = evalkit::read_detections(&a.detections)?;
    let per_class = evalkit::per_class_ap(&dets, &gts, a.num_classes, a.iou_thr)?;
    if per_class.is_empty() {
        return Err(EvalError::NoGroundTruth.into());
    }
    let out = a.out.as_deref();
    let mut w = output(out)?;
    evalkit::write_report(&mut w, &per_class).map_err(|e| io_err(out.unwrap_or(Path::new("<stdout>")), e))?;
    finish(w, out)
}

fn cmd_demo(a: &DemoArgs) -> Result<(), CliError> {
    let domains = ToyDomains::shifted_gaussians(a.seed, 100, 0.5, [2.0, 2.0])?;
    let cfg = ToyConfig {
        steps: a.steps,
        lr: a.lr,
        lambda1: a.lambda1,
        ..ToyConfig::default()
    };
    let state = toy_adapt(&domains, &cfg)?;
    if let Some(last) = state.history.last() {
        log::info!("final disc_acc {:.4} class_acc {:.4}", last.disc_acc, last.class_acc);
    }
    let out = a.out.as_deref();
    let mut w = output(out)?;
    let write = |w: &mut Box<dyn Write>| -> io::Result<()> {
        writeln!(w, "step,l_det,l_dis,l_total,disc_acc,class_acc")?;
        for r in &state.history {
            writeln!(
                w,
                "{},{:.9},{:.9},{:.9},{:.6},{:.6}",
                r.step, r.l_det, r.l_dis, r.l_total, r.disc_acc, r.class_acc
            )?;
        }
        Ok(())
    };
    write(&mut w).map_err(|e| io_err(out.unwrap_or(Path::new("<stdout>")), e))?;
    finish(w, out)
}

fn cmd_split(a: &SplitArgs) -> Result<(), CliError> {
    let manifest = evalkit::read_manifest(&a.manifest)?;
    let (dense, fatty) = evalkit::split_by_density(&manifest);
    let (train, _) = evalkit::stratified_split(&fatty, a.fraction, a.seed)?;
    let dense_ids: std::collections::HashSet<&str> = dense.iter().map(|r| r.image_id.as_str()).collect();
    let train_ids: std::collections::HashSet<&str> = train.iter().map(|r| r.image_id.as_str()).collect();
    let out = a.out.as_deref();
    let mut w = output(out)?;
    let write = |w: &mut Box<dyn Write>| -> io::Result<()> {
        writeln!(w, "image_id,split")?;
        for r in &manifest {
            let id = r.image_id.as_str();
            let split = if dense_ids.contains(id) {
                "denb"
            } else if train_ids.contains(id) {
                "fatb_train"
            } else {
                "fatb_test"
            };
            writeln!(w, "{id},{split}")?;
        }
        Ok(())
    };
    write(&mut w).map_err(|e| io_err(out.unwrap_or(Path::new("<stdout>")), e))?;
    finish(w, out)
}

fn cmd_mask(a: &MaskArgs) -> Result<(), CliError> {
    let mut se = StructElem::default();
    a.se.apply(&mut se);
    let img = load_image(&a.image)?;
    let m = breast_mask(&img, &se)?;
    let data = m.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let out = GrayImage::new(m.width(), m.height(), data)?;
    save_image(&out, &a.out, BitDepth::Eight)?;
    Ok(())
}

fn cmd_clahe(a: &ClaheArgs) -> Result<(), CliError> {
    let mut p = ClaheParams::default();
    a.clahe.apply(&mut p);
    p.validate()?;
    let img = load_image(&a.image)?;
    save_image(&clahe(&img, &p)?, &a.out, BitDepth::Sixteen)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FALCE_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Fda(a) => cmd_fda(a),
        Command::Run(a) => cmd_run(a),
        Command::EvalMap(a) => cmd_eval(a),
        Command::Daod {
            command: DaodCommand::Demo(a),
        } => cmd_demo(a),
        Command::Split(a) => cmd_split(a),
        Command::Mask(a) => cmd_mask(a),
        Command::Clahe(a) => cmd_clahe(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
