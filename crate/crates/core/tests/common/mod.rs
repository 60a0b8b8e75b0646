//! Independent reference implementations and input generators shared by the
//! integration tests. Everything here is written from definitions, without
//! calling into the code under test beyond constructors.

#![allow(dead_code)]

use falce_core::daod::{BBox, Proposal};
use falce_core::evalkit::{Detection, GroundTruth};
use falce_core::segment::{BinaryMask, ElementShape, StructElem};
use falce_core::GrayImage;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::new(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Image whose values are multiples of 1/255, drawn from a few random modes.
pub fn random_levels_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    let modes: Vec<u32> = (0..rng.random_range(2..6)).map(|_| rng.random_range(0..256)).collect();
    let data = (0..w * h)
        .map(|_| {
            let m = modes[rng.random_range(0..modes.len())] as i32;
            let v = (m + rng.random_range(-20..=20)).clamp(0, 255);
            v as f64 / 255.0
        })
        .collect();
    GrayImage::new(w, h, data).unwrap()
}

/// Direct evaluation of `X[k,l] = sum_{m,n} x[m,n] exp(-2 pi i (k m / H + l n / W))`,
/// row-major with rows indexed by `k`.
pub fn naive_dft(img: &GrayImage) -> Vec<Complex64> {
    let (w, h) = img.dims();
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    for k in 0..h {
        for l in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..h {
                for n in 0..w {
                    // Reduce the phase index exactly before converting to radians.
                    let num = ((k * m) % h) as f64 / h as f64 + ((l * n) % w) as f64 / w as f64;
                    let ang = -2.0 * std::f64::consts::PI * num;
                    acc += img.get(n, m) * Complex64::new(ang.cos(), ang.sin());
                }
            }
            out[k * w + l] = acc;
        }
    }
    out
}

/// Exhaustive Otsu: between-class variance `w0 w1 (mu0 - mu1)^2` in exact
/// rationals over bins `0..256`, lowest maximizing split `t` in `1..=255`.
/// Returns `t / 256`, or `None` if no split has both classes non-empty.
pub fn otsu_oracle(img: &GrayImage) -> Option<f64> {
    let mut counts = [0i64; 256];
    for &v in img.data() {
        let b = ((v * 256.0).floor() as i64).clamp(0, 255);
        counts[b as usize] += 1;
    }
    let total: i64 = counts.iter().sum();
    let r = |n: i64| BigRational::from_integer(n.into());
    let mut best: Option<(usize, BigRational)> = None;
    for t in 1..256 {
        let n0: i64 = counts[..t].iter().sum();
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s0: i64 = counts[..t].iter().enumerate().map(|(b, c)| b as i64 * c).sum();
        let s1: i64 = counts[t..].iter().enumerate().map(|(b, c)| (b + t) as i64 * c).sum();
        let w0 = r(n0) / r(total);
        let w1 = r(n1) / r(total);
        let d = r(s0) / r(n0) - r(s1) / r(n1);
        let var = w0 * w1 * d.clone() * d;
        if best.as_ref().is_none_or(|(_, b)| var > *b) {
            best = Some((t, var));
        }
    }
    best.map(|(t, _)| t as f64 / 256.0)
}

pub fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryMask {
    let p = rng.random_range(0.3..0.9);
    BinaryMask::new(w, h, (0..w * h).map(|_| rng.random_bool(p)).collect())
}

pub fn in_element(se: &StructElem, dx: i64, dy: i64) -> bool {
    let r = se.radius as i64;
    if dx.abs() > r || dy.abs() > r {
        return false;
    }
    match se.shape {
        ElementShape::Square => true,
        ElementShape::Disk => dx * dx + dy * dy <= r * r,
    }
}

/// Opening as the union of all element translates that fit entirely
/// inside the foreground (pixels outside the image count as background).
pub fn opening_oracle(m: &BinaryMask, se: &StructElem) -> BinaryMask {
    let (w, h) = (m.width() as i64, m.height() as i64);
    let r = se.radius as i64;
    let fg = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && m.get(x as usize, y as usize);
    let fits = |cx: i64, cy: i64| {
        (-r..=r).all(|dy| (-r..=r).all(|dx| !in_element(se, dx, dy) || fg(cx + dx, cy + dy)))
    };
    let mut out = BinaryMask::filled(m.width(), m.height(), false);
    for cy in 0..h {
        for cx in 0..w {
            if !fits(cx, cy) {
                continue;
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    if in_element(se, dx, dy) {
                        out.set((cx + dx) as usize, (cy + dy) as usize, true);
                    }
                }
            }
        }
    }
    out
}

pub fn box_iou(a: &BBox, b: &BBox) -> f64 {
    let ix = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let iy = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = ix * iy;
    if inter == 0.0 {
        return 0.0;
    }
    let area = |c: &BBox| (c.x2 - c.x1) * (c.y2 - c.y1);
    inter / (area(a) + area(b) - inter)
}

pub fn random_box(rng: &mut ChaCha8Rng, grid: i32) -> BBox {
    let x1 = rng.random_range(0..grid - 1);
    let y1 = rng.random_range(0..grid - 1);
    let x2 = rng.random_range(x1 + 1..=grid);
    let y2 = rng.random_range(y1 + 1..=grid);
    BBox::new(x1 as f64, y1 as f64, x2 as f64, y2 as f64).unwrap()
}

/// The three-clause set-builder, evaluated candidate by candidate.
pub fn pim_oracle(candidates: &[Proposal], accepted: &[Proposal], tau: f64) -> Vec<Proposal> {
    let mut out = Vec::new();
    for c in candidates {
        let confident = c.objectness > tau;
        let mut is_accepted = false;
        let mut overlaps = false;
        for a in accepted {
            if a == c {
                is_accepted = true;
            }
            if box_iou(&c.bbox, &a.bbox) > 0.0 {
                overlaps = true;
            }
        }
        if confident && !is_accepted && !overlaps {
            out.push(*c);
        }
    }
    out
}

/// Brute-force AP: explicit greedy assignment over every ground truth,
/// then rectangle summation of `max { precision_j : recall_j >= r }`
/// across the distinct recall levels `r`.
pub fn ap_oracle(dets: &[Detection], gts: &[GroundTruth], class_id: usize, thr: f64) -> f64 {
    let gt_idx: Vec<usize> = (0..gts.len()).filter(|&i| gts[i].class_id == class_id).collect();
    if gt_idx.is_empty() {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].class_id == class_id).collect();
    // Descending score, then insertion order.
    for i in 1..order.len() {
        let mut j = i;
        while j > 0 && dets[order[j]].score > dets[order[j - 1]].score {
            order.swap(j, j - 1);
            j -= 1;
        }
    }
    let mut used = vec![false; gts.len()];
    let mut tp = 0usize;
    let mut curve = Vec::new();
    for (rank, &d) in order.iter().enumerate() {
        let mut pick: Option<usize> = None;
        let mut pick_iou = 0.0;
        for &g in &gt_idx {
            if used[g] || gts[g].image_id != dets[d].image_id {
                continue;
            }
            let o = box_iou(&dets[d].bbox, &gts[g].bbox);
            if o >= thr && (pick.is_none() || o > pick_iou) {
                pick = Some(g);
                pick_iou = o;
            }
        }
        if let Some(g) = pick {
            used[g] = true;
            tp += 1;
        }
        curve.push((tp as f64 / gt_idx.len() as f64, tp as f64 / (rank + 1) as f64));
    }
    let mut levels: Vec<f64> = curve.iter().map(|c| c.0).filter(|&r| r > 0.0).collect();
    levels.dedup();
    let mut ap = 0.0;
    let mut prev = 0.0;
    for r in levels {
        let p = curve.iter().filter(|c| c.0 >= r).map(|c| c.1).fold(0.0, f64::max);
        ap += (r - prev) * p;
        prev = r;
    }
    ap
}

/// Synthetic mammogram: a bright half-ellipse against the left edge over a
/// dark background, with smooth texture. `density` scales the tissue
/// brightness.
pub fn synthetic_breast(w: usize, h: usize, density: f64, seed: u64) -> GrayImage {
    let mut rng = rng(seed);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..12)
        .map(|_| {
            (
                rng.random_range(0.0..0.6),
                rng.random_range(0.1..0.9),
                rng.random_range(0.03..0.12),
                rng.random_range(0.05..0.25),
            )
        })
        .collect();
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            let e = (u / 0.7).powi(2) + ((v - 0.5) / 0.45).powi(2);
            let val = if e <= 1.0 {
                let mut t = 0.35 + 0.35 * density * (1.0 - e).sqrt();
                for &(bx, by, r, a) in &blobs {
                    let d2 = (u - bx).powi(2) + (v - by).powi(2);
                    t += a * density * (-d2 / (r * r)).exp();
                }
                t + rng.random_range(-0.02..0.02)
            } else {
                0.02 + rng.random_range(0.0..0.02)
            };
            data.push(val.clamp(0.0, 1.0));
        }
    }
    GrayImage::new(w, h, data).unwrap()
}
