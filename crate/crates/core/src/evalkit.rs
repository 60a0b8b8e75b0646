//! Detection evaluation and dataset manifests.
//!
//! Average precision uses greedy score-ordered matching at a fixed IoU
//! threshold and all-point interpolation of the precision envelope.
//! Manifests are CSV files with one row per finding; [`stratified_split`]
//! partitions records by the set of mapped classes they contain.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::daod::{iou, BBox};

pub const DEFAULT_IOU_THR: f64 = 0.5;
pub const NUM_CLASSES: usize = 4;
pub const CLASS_NAMES: [&str; NUM_CLASSES] = ["MS", "SC", "AS", "LN"];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {reason}")]
    Parse { path: PathBuf, line: u64, reason: String },
    #[error("iou threshold {0} outside (0, 1)")]
    InvalidIouThr(f64),
    #[error("train fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
    #[error("num_classes must be at least 1")]
    NoClasses,
    #[error("no class has ground truth")]
    NoGroundTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub class_id: usize,
    pub bbox: BBox,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub class_id: usize,
    pub bbox: BBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Density {
    A,
    B,
    C,
    D,
}

impl Density {
    pub fn is_dense(self) -> bool {
        matches!(self, Density::C | Density::D)
    }
}

impl FromStr for Density {
    type Err = String;

    /// Accepts a bare letter or the `DENSITY X` spelling, any case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        let letter = t.strip_prefix("DENSITY").map(str::trim).unwrap_or(&t);
        match letter {
            "A" => Ok(Density::A),
            "B" => Ok(Density::B),
            "C" => Ok(Density::C),
            "D" => Ok(Density::D),
            _ => Err(format!("unknown density {s:?}")),
        }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Density::A => "A",
            Density::B => "B",
            Density::C => "C",
            Density::D => "D",
        };
        f.write_str(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRecord {
    pub image_id: String,
    pub path: String,
    pub density: Density,
    pub raw_findings: Vec<(String, BBox)>,
}

impl ManifestRecord {
    /// Sorted, deduplicated mapped classes of the record's findings.
    pub fn label_set(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.raw_findings.iter().filter_map(|(l, _)| map_classes(l)).collect();
        set.into_iter().collect()
    }

    pub fn ground_truths(&self) -> Vec<GroundTruth> {
        self.raw_findings
            .iter()
            .filter_map(|(l, b)| {
                map_classes(l).map(|c| GroundTruth {
                    image_id: self.image_id.clone(),
                    class_id: c,
                    bbox: *b,
                })
            })
            .collect()
    }
}

/// Maps a raw finding label to one of the four evaluated classes.
pub fn map_classes(raw_label: &str) -> Option<usize> {
    let norm: String = raw_label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_ascii_lowercase();
    match norm.as_str() {
        "ms" | "mass" => Some(0),
        "sc" | "suspicious calcification" => Some(1),
        "as" | "asymmetry" | "focal asymmetry" | "global asymmetry" => Some(2),
        "ln" | "suspicious lymph node" | "suspicious lymph nodes" => Some(3),
        _ => None,
    }
}

fn check_iou_thr(thr: f64) -> Result<(), EvalError> {
    if thr > 0.0 && thr < 1.0 {
        Ok(())
    } else {
        Err(EvalError::InvalidIouThr(thr))
    }
}

/// True/false-positive flags for the class's detections in descending
/// score order, plus the number of ground truths.
fn match_detections(dets: &[Detection], gts: &[GroundTruth], class_id: usize, iou_thr: f64) -> (Vec<bool>, usize) {
    let mut by_image: HashMap<&str, Vec<(BBox, bool)>> = HashMap::new();
    let mut npos = 0;
    for g in gts.iter().filter(|g| g.class_id == class_id) {
        by_image.entry(&g.image_id).or_default().push((g.bbox, false));
        npos += 1;
    }
    let mut ranked: Vec<&Detection> = dets.iter().filter(|d| d.class_id == class_id).collect();
    // Stable: equal scores keep input order.
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
    let flags = ranked
        .into_iter()
        .map(|d| {
            let Some(cands) = by_image.get_mut(d.image_id.as_str()) else {
                return false;
            };
            let mut best: Option<(usize, f64)> = None;
            for (k, (b, used)) in cands.iter().enumerate() {
                if *used {
                    continue;
                }
                let o = iou(&d.bbox, b);
                if o >= iou_thr && best.is_none_or(|(_, bo)| o > bo) {
                    best = Some((k, o));
                }
            }
            match best {
                Some((k, _)) => {
                    cands[k].1 = true;
                    true
                }
                None => false,
            }
        })
        .collect();
    (flags, npos)
}

/// Area under the all-point interpolated precision/recall curve for one
/// class; 0 when the class has no ground truth.
pub fn average_precision(dets: &[Detection], gts: &[GroundTruth], class_id: usize, iou_thr: f64) -> Result<f64, EvalError> {
    check_iou_thr(iou_thr)?;
    let (flags, npos) = match_detections(dets, gts, class_id, iou_thr);
    if npos == 0 {
        return Ok(0.0);
    }
    let mut tp = 0usize;
    let mut points = Vec::with_capacity(flags.len());
    for (i, hit) in flags.iter().enumerate() {
        tp += usize::from(*hit);
        points.push((tp as f64 / npos as f64, tp as f64 / (i + 1) as f64));
    }
    let mut envelope: Vec<f64> = points.iter().map(|p| p.1).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for ((recall, _), prec) in points.iter().zip(&envelope) {
        ap += (recall - prev_recall) * prec;
        prev_recall = *recall;
    }
    Ok(ap)
}

/// Per-class AP for every class in `0..num_classes` that has ground truth.
pub fn per_class_ap(
    dets: &[Detection],
    gts: &[GroundTruth],
    num_classes: usize,
    iou_thr: f64,
) -> Result<Vec<(usize, f64)>, EvalError> {
    if num_classes == 0 {
        return Err(EvalError::NoClasses);
    }
    check_iou_thr(iou_thr)?;
    (0..num_classes)
        .filter(|c| gts.iter().any(|g| g.class_id == *c))
        .map(|c| average_precision(dets, gts, c, iou_thr).map(|ap| (c, ap)))
        .collect()
}

pub fn mean_ap(dets: &[Detection], gts: &[GroundTruth], num_classes: usize, iou_thr: f64) -> Result<f64, EvalError> {
    let aps = per_class_ap(dets, gts, num_classes, iou_thr)?;
    if aps.is_empty() {
        return Err(EvalError::NoGroundTruth);
    }
    Ok(aps.iter().map(|(_, ap)| ap).sum::<f64>() / aps.len() as f64)
}

/// Writes the `class_id,ap` report with a closing `mAP` row.
pub fn write_report<W: Write>(out: &mut W, per_class: &[(usize, f64)]) -> std::io::Result<()> {
    writeln!(out, "class_id,ap")?;
    for (c, ap) in per_class {
        writeln!(out, "{c},{ap:.6}")?;
    }
    let map = if per_class.is_empty() {
        0.0
    } else {
        per_class.iter().map(|(_, ap)| ap).sum::<f64>() / per_class.len() as f64
    };
    writeln!(out, "mAP,{map:.6}")
}

/// Splits into (dense, fatty) keeping input order.
pub fn split_by_density(manifest: &[ManifestRecord]) -> (Vec<ManifestRecord>, Vec<ManifestRecord>) {
    manifest.iter().cloned().partition(|r| r.density.is_dense())
}

/// Number of records of a stratum of size `n` that go to train.
pub fn train_count(n: usize, train_fraction: f64) -> usize {
    // The small slack keeps exact products like 0.7 * 10 from rounding up.
    ((train_fraction * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Seeded per-stratum split; both halves keep input order.
pub fn stratified_split(
    records: &[ManifestRecord],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<ManifestRecord>, Vec<ManifestRecord>), EvalError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(train_fraction));
    }
    let mut strata: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata.entry(r.label_set()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; records.len()];
    for members in strata.values_mut() {
        members.shuffle(&mut rng);
        for &i in &members[..train_count(members.len(), train_fraction)] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<_>, Vec<_>) = records.iter().zip(&in_train).partition(|(_, t)| **t);
    Ok((
        train.into_iter().map(|(r, _)| r.clone()).collect(),
        test.into_iter().map(|(r, _)| r.clone()).collect(),
    ))
}

// ---- CSV input ----

struct Table {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, EvalError> {
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|source| EvalError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Self::parse(path, &text)
    }

    fn parse(path: &Path, text: &str) -> Result<Self, EvalError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let err = |line: u64, reason: String| EvalError::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| err(1, e.to_string()))?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if rec.len() != header.len() {
                return Err(err(line, format!("expected {} fields, found {}", header.len(), rec.len())));
            }
            rows.push((line, rec));
        }
        Ok(Self {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize, EvalError> {
        self.header.iter().position(|h| h == name).ok_or_else(|| EvalError::Parse {
            path: self.path.clone(),
            line: 1,
            reason: format!("missing column {name:?}"),
        })
    }

    fn has(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    fn err(&self, line: u64, reason: impl Into<String>) -> EvalError {
        EvalError::Parse {
            path: self.path.clone(),
            line,
            reason: reason.into(),
        }
    }

    fn num<T: FromStr>(&self, line: u64, rec: &csv::StringRecord, col: usize, what: &str) -> Result<T, EvalError> {
        rec[col]
            .parse()
            .map_err(|_| self.err(line, format!("invalid {what} {:?}", &rec[col])))
    }

    fn bbox(&self, line: u64, rec: &csv::StringRecord, cols: [usize; 4]) -> Result<BBox, EvalError> {
        let v: Vec<f64> = cols
            .iter()
            .zip(["x1", "y1", "x2", "y2"])
            .map(|(&c, n)| self.num(line, rec, c, n))
            .collect::<Result<_, _>>()?;
        BBox::new(v[0], v[1], v[2], v[3]).map_err(|e| self.err(line, e.to_string()))
    }

    fn box_cols(&self) -> Result<[usize; 4], EvalError> {
        Ok([self.column("x1")?, self.column("y1")?, self.column("x2")?, self.column("y2")?])
    }
}

fn read_manifest_table(t: &Table) -> Result<Vec<ManifestRecord>, EvalError> {
    let (id, path, dens, label) = (t.column("image_id")?, t.column("path")?, t.column("density")?, t.column("label")?);
    let boxes = t.box_cols()?;
    let mut out: Vec<ManifestRecord> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line, rec) in &t.rows {
        let line = *line;
        let image_id = rec[id].to_string();
        if image_id.is_empty() {
            return Err(t.err(line, "empty image_id"));
        }
        let density: Density = rec[dens].parse().map_err(|e: String| t.err(line, e))?;
        let k = match index.get(&image_id) {
            Some(&k) => {
                if out[k].density != density || out[k].path != rec[path] {
                    return Err(t.err(line, format!("conflicting path or density for {image_id}")));
                }
                k
            }
            None => {
                index.insert(image_id.clone(), out.len());
                out.push(ManifestRecord {
                    image_id,
                    path: rec[path].to_string(),
                    density,
                    raw_findings: Vec::new(),
                });
                out.len() - 1
            }
        };
        let box_empty = boxes.iter().all(|&c| rec[c].is_empty());
        match (rec[label].is_empty(), box_empty) {
            (true, true) => {}
            (false, false) => {
                let b = t.bbox(line, rec, boxes)?;
                out[k].raw_findings.push((rec[label].to_string(), b));
            }
            _ => return Err(t.err(line, "label and box must be both present or both empty")),
        }
    }
    Ok(out)
}

/// Reads a manifest CSV (`image_id,path,density,label,x1,y1,x2,y2`),
/// grouping rows into one record per image in first-appearance order.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>, EvalError> {
    read_manifest_table(&Table::read(path)?)
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRecord>, EvalError> {
    read_manifest_table(&Table::parse(Path::new("<manifest>"), text)?)
}

fn read_detections_table(t: &Table) -> Result<Vec<Detection>, EvalError> {
    let (id, class, score) = (t.column("image_id")?, t.column("class_id")?, t.column("score")?);
    let boxes = t.box_cols()?;
    t.rows
        .iter()
        .map(|(line, rec)| {
            let score: f64 = t.num(*line, rec, score, "score")?;
            if !(0.0..=1.0).contains(&score) {
                return Err(t.err(*line, format!("score {score} outside [0, 1]")));
            }
            Ok(Detection {
                image_id: rec[id].to_string(),
                class_id: t.num(*line, rec, class, "class_id")?,
                bbox: t.bbox(*line, rec, boxes)?,
                score,
            })
        })
        .collect()
}

/// Reads a detections CSV (`image_id,class_id,score,x1,y1,x2,y2`).
pub fn read_detections(path: &Path) -> Result<Vec<Detection>, EvalError> {
    read_detections_table(&Table::read(path)?)
}

pub fn parse_detections(text: &str) -> Result<Vec<Detection>, EvalError> {
    read_detections_table(&Table::parse(Path::new("<detections>"), text)?)
}

fn read_ground_truth_table(t: &Table) -> Result<Vec<GroundTruth>, EvalError> {
    if t.has("density") {
        return Ok(read_manifest_table(t)?.iter().flat_map(ManifestRecord::ground_truths).collect());
    }
    let (id, class) = (t.column("image_id")?, t.column("class_id")?);
    let boxes = t.box_cols()?;
    t.rows
        .iter()
        .map(|(line, rec)| {
            Ok(GroundTruth {
                image_id: rec[id].to_string(),
                class_id: t.num(*line, rec, class, "class_id")?,
                bbox: t.bbox(*line, rec, boxes)?,
            })
        })
        .collect()
}

/// Reads ground truth either from a manifest (findings mapped through
/// [`map_classes`], unmapped labels dropped) or from an
/// `image_id,class_id,x1,y1,x2,y2` table.
pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruth>, EvalError> {
    read_ground_truth_table(&Table::read(path)?)
}

pub fn parse_ground_truth(text: &str) -> Result<Vec<GroundTruth>, EvalError> {
    read_ground_truth_table(&Table::parse(Path::new("<ground truth>"), text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
        BBox::new(x1, y1, x2, y2).unwrap()
    }

    fn det(img: &str, c: usize, s: f64, b: BBox) -> Detection {
        Detection {
            image_id: img.into(),
            class_id: c,
            bbox: b,
            score: s,
        }
    }

    fn gt(img: &str, c: usize, b: BBox) -> GroundTruth {
        GroundTruth {
            image_id: img.into(),
            class_id: c,
            bbox: b,
        }
    }

    fn rec(id: &str, d: Density, labels: &[&str]) -> ManifestRecord {
        ManifestRecord {
            image_id: id.into(),
            path: format!("{id}.png"),
            density: d,
            raw_findings: labels.iter().map(|l| (l.to_string(), bb(0.0, 0.0, 1.0, 1.0))).collect(),
        }
    }

    #[test]
    fn ap_basic_cases() {
        let b = bb(0.0, 0.0, 10.0, 10.0);
        let g = vec![gt("a", 0, b)];
        assert_eq!(average_precision(&[det("a", 0, 0.9, b)], &g, 0, 0.5).unwrap(), 1.0);
        assert_eq!(average_precision(&[], &g, 0, 0.5).unwrap(), 0.0);
        assert_eq!(average_precision(&[det("a", 0, 0.9, b)], &[], 0, 0.5).unwrap(), 0.0);
        // Wrong image never matches.
        assert_eq!(average_precision(&[det("b", 0, 0.9, b)], &g, 0, 0.5).unwrap(), 0.0);
        assert!(average_precision(&[], &g, 0, 1.0).is_err());
    }

    #[test]
    fn ap_envelope() {
        let b1 = bb(0.0, 0.0, 10.0, 10.0);
        let b2 = bb(20.0, 20.0, 30.0, 30.0);
        let far = bb(50.0, 50.0, 60.0, 60.0);
        let g = vec![gt("a", 0, b1), gt("a", 0, b2)];
        // TP, FP, TP: precision 1, 1/2, 2/3 -> envelope 1, 2/3, 2/3.
        let d = vec![det("a", 0, 0.9, b1), det("a", 0, 0.8, far), det("a", 0, 0.7, b2)];
        let ap = average_precision(&d, &g, 0, 0.5).unwrap();
        assert!((ap - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn duplicates_are_false_positives() {
        let b = bb(0.0, 0.0, 10.0, 10.0);
        let g = vec![gt("a", 0, b)];
        let (flags, n) = match_detections(&[det("a", 0, 0.9, b), det("a", 0, 0.8, b)], &g, 0, 0.5);
        assert_eq!((flags, n), (vec![true, false], 1));
    }

    #[test]
    fn mean_ap_skips_classes_without_gt() {
        let b = bb(0.0, 0.0, 10.0, 10.0);
        let g = vec![gt("a", 0, b), gt("a", 2, b)];
        let d = vec![det("a", 0, 0.9, b)];
        assert_eq!(mean_ap(&d, &g, 4, 0.5).unwrap(), 0.5);
        assert!(matches!(mean_ap(&d, &[], 4, 0.5), Err(EvalError::NoGroundTruth)));
        assert!(matches!(mean_ap(&d, &g, 0, 0.5), Err(EvalError::NoClasses)));
    }

    #[test]
    fn class_mapping() {
        assert_eq!(map_classes("Mass"), Some(0));
        assert_eq!(map_classes("Suspicious Calcification"), Some(1));
        assert_eq!(map_classes("Focal Asymmetry"), Some(2));
        assert_eq!(map_classes("global  asymmetry"), Some(2));
        assert_eq!(map_classes("Suspicious Lymph Node"), Some(3));
        assert_eq!(map_classes("Skin Thickening"), None);
        assert_eq!(map_classes("No Finding"), None);
    }

    #[test]
    fn density_parsing() {
        assert_eq!("c".parse::<Density>().unwrap(), Density::C);
        assert_eq!("DENSITY D".parse::<Density>().unwrap(), Density::D);
        assert!("E".parse::<Density>().is_err());
    }

    #[test]
    fn density_split() {
        let m: Vec<_> = [Density::A, Density::B, Density::C, Density::D]
            .iter()
            .enumerate()
            .map(|(i, d)| rec(&i.to_string(), *d, &[]))
            .collect();
        let (dense, fatty) = split_by_density(&m);
        assert_eq!(dense.iter().map(|r| r.density).collect::<Vec<_>>(), vec![Density::C, Density::D]);
        assert_eq!(fatty.iter().map(|r| r.density).collect::<Vec<_>>(), vec![Density::A, Density::B]);
        assert_eq!(split_by_density(&[]), (vec![], vec![]));
    }

    #[test]
    fn split_counts() {
        assert_eq!(train_count(10, 0.6), 6);
        assert_eq!(train_count(10, 0.7), 7);
        assert_eq!(train_count(1, 0.6), 1);
        assert_eq!(train_count(0, 0.6), 0);
        let m: Vec<_> = (0..10).map(|i| rec(&i.to_string(), Density::A, &["Mass"])).collect();
        let (tr, te) = stratified_split(&m, 0.6, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (6, 4));
        assert_eq!(stratified_split(&m, 0.6, 3).unwrap().0, tr);
        let (tr, te) = stratified_split(&m[..1], 0.6, 0).unwrap();
        assert_eq!((tr.len(), te.len()), (1, 0));
        assert!(stratified_split(&m, 1.0, 0).is_err());
    }

    #[test]
    fn manifest_parsing_groups_rows() {
        let text = "image_id,path,density,label,x1,y1,x2,y2\n\
                    a,a.png,DENSITY C,Mass,0,0,5,5\n\
                    b,b.png,A,,,,,\n\
                    a,a.png,C,Skin Thickening,1,1,2,2\n";
        let m = parse_manifest(text).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].raw_findings.len(), 2);
        assert_eq!(m[0].label_set(), vec![0]);
        assert!(m[1].raw_findings.is_empty());
        let g = parse_ground_truth(text).unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "image_id,class_id,score,x1,y1,x2,y2\na,0,0.5,0,0,1,1\na,0,oops,0,0,1,1\n";
        match parse_detections(text) {
            Err(EvalError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_box = "image_id,class_id,x1,y1,x2,y2\na,0,5,0,1,1\n";
        assert!(matches!(parse_ground_truth(bad_box), Err(EvalError::Parse { line: 2, .. })));
    }

    #[test]
    fn report_format() {
        let mut out = Vec::new();
        write_report(&mut out, &[(0, 1.0), (2, 0.25)]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "class_id,ap\n0,1.000000\n2,0.250000\nmAP,0.625000\n");
    }
}
