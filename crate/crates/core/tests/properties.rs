mod common;

use falce_core::daod::*;
use falce_core::enhance::{clahe, clahe_tiles, ClaheParams, ClipLimit};
use falce_core::evalkit::{average_precision, split_by_density, stratified_split, Density, Detection, GroundTruth, ManifestRecord};
use falce_core::image::{histogram, load_image, resize, save_image, BitDepth};
use falce_core::segment::{apply_mask, dilate, erode, opening, BinaryMask, StructElem};
use falce_core::spectral::{fda_spectrum, fda_transfer, fft2, ifft2_real, phase, shift_center};
use falce_core::GrayImage;
use proptest::prelude::*;

fn image(max: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0f64..=1.0, w * h).prop_map(move |d| GrayImage::new(w, h, d).unwrap())
    })
}

fn mask(max: usize) -> impl Strategy<Value = BinaryMask> {
    (1..=max, 1..=max)
        .prop_flat_map(|(w, h)| prop::collection::vec(any::<bool>(), w * h).prop_map(move |b| BinaryMask::new(w, h, b)))
}

fn elem() -> impl Strategy<Value = StructElem> {
    (any::<bool>(), 1usize..=3).prop_map(|(sq, r)| if sq { StructElem::square(r) } else { StructElem::disk(r) })
}

fn prob() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

fn domain_image() -> impl Strategy<Value = DomainImage> {
    (prop::collection::vec(prob(), 1..6), prop::collection::vec(prob(), 0..5), any::<bool>()).prop_map(|(a, p, t)| {
        DomainImage {
            activations: a,
            instance_probs: p,
            domain: if t { Domain::Target } else { Domain::Source },
        }
    })
}

fn batch() -> impl Strategy<Value = Vec<DomainImage>> {
    prop::collection::vec(domain_image(), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantization_round_trip(img in image(12), sixteen in any::<bool>(), pgm in any::<bool>()) {
        let depth = if sixteen { BitDepth::Sixteen } else { BitDepth::Eight };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(if pgm { "x.pgm" } else { "x.png" });
        save_image(&img, &path, depth).unwrap();
        let back = load_image(&path).unwrap();
        prop_assert_eq!(back.dims(), img.dims());
        prop_assert_eq!(back.source_bit_depth(), depth);
        let bound = 1.0 / (2.0 * depth.max_value() as f64) + 1e-12;
        for (a, b) in img.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= bound);
        }
    }
}

proptest! {
    #[test]
    fn resize_stays_in_range(img in image(16), w in 1usize..40, h in 1usize..40) {
        let (lo, hi) = img.min_max();
        let out = resize(&img, w, h).unwrap();
        prop_assert_eq!(out.dims(), (w, h));
        let (olo, ohi) = out.min_max();
        prop_assert!(olo >= lo - 1e-12 && ohi <= hi + 1e-12);
    }

    #[test]
    fn histogram_counts_every_pixel(img in image(20), bins in 2usize..300) {
        prop_assert_eq!(histogram(&img, bins).total(), img.len() as u64);
    }

    #[test]
    fn parseval(img in image(24)) {
        let (w, h) = img.dims();
        let spatial: f64 = img.data().iter().map(|v| v * v).sum();
        let freq: f64 = fft2(&img).coeffs().iter().map(|c| c.norm_sqr()).sum();
        let expect = (w * h) as f64 * spatial;
        prop_assert!((freq - expect).abs() <= 1e-9 * expect.max(1e-300));
    }

    #[test]
    fn fft_round_trip(img in image(32)) {
        let back = ifft2_real(&fft2(&img));
        for (a, b) in img.data().iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn fda_keeps_source_phase(pair in (1usize..=16, 1usize..=16).prop_flat_map(|(w, h)| {
        (prop::collection::vec(0.0f64..=1.0, w * h), prop::collection::vec(0.0f64..=1.0, w * h))
            .prop_map(move |(a, b)| (GrayImage::new(w, h, a).unwrap(), GrayImage::new(w, h, b).unwrap()))
    }), beta in 0.01f64..=1.0) {
        let (src, tgt) = pair;
        let mixed = fda_spectrum(&src, &tgt, beta).unwrap();
        let src_spec = shift_center(&fft2(&src));
        let (pm, ps) = (phase(&mixed), phase(&src_spec));
        for ((m, s), (c, t)) in pm.iter().zip(&ps).zip(mixed.coeffs().iter().zip(src_spec.coeffs())) {
            if c.norm() > 1e-12 && t.norm() > 1e-12 {
                let d = (m - s).rem_euclid(std::f64::consts::TAU);
                prop_assert!(d.min(std::f64::consts::TAU - d) < 1e-6);
            }
        }
    }

    #[test]
    fn clahe_conserves_and_is_monotone(img in image(40), clip in 1.0f64..6.0, tx in 1usize..5, ty in 1usize..5, unlimited in any::<bool>()) {
        prop_assume!(img.width() >= tx && img.height() >= ty);
        let params = ClaheParams {
            clip_limit: if unlimited { ClipLimit::UNLIMITED } else { ClipLimit::Limited(clip) },
            tiles_x: tx,
            tiles_y: ty,
            bins: 256,
        };
        let tiles = clahe_tiles(&img, &params).unwrap();
        for (raw, clipped) in tiles.raw_histograms.iter().zip(&tiles.clipped_histograms) {
            prop_assert_eq!(raw.iter().sum::<u64>(), clipped.iter().sum::<u64>());
        }
        prop_assert!(tiles.mappings.iter().all(|m| m.is_monotone()));
        let out = clahe(&img, &params).unwrap();
        prop_assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn opening_is_idempotent_and_anti_extensive(m in mask(24), se in elem()) {
        let o = opening(&m, &se);
        prop_assert_eq!(&opening(&o, &se), &o);
        prop_assert!(o.is_subset_of(&m));
    }

    #[test]
    fn erosion_and_dilation_bracket(m in mask(24), se in elem()) {
        prop_assert!(erode(&m, &se).is_subset_of(&m));
        prop_assert!(m.is_subset_of(&dilate(&m, &se)));
    }

    #[test]
    fn apply_mask_never_brightens(img in image(20), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let m = common::random_mask(&mut rng, img.width(), img.height());
        let out = apply_mask(&img, &m).unwrap();
        for (i, (a, b)) in img.data().iter().zip(out.data()).enumerate() {
            prop_assert!(b <= a);
            prop_assert!(m.bits()[i] || *b == 0.0);
        }
    }

    #[test]
    fn losses_are_finite_and_non_negative(imgs in batch()) {
        let b = DomainBatch::new(imgs).unwrap();
        for l in [image_domain_loss(&b), instance_domain_loss(&b), consistency_loss(&b)] {
            prop_assert!(l.is_finite() && l >= 0.0);
        }
    }

    #[test]
    fn domain_losses_minimized_at_labels(imgs in batch(), which in any::<prop::sample::Index>(), delta in 0.01f64..0.5) {
        // Put every probability on its label, then move one away.
        let exact: Vec<DomainImage> = imgs.iter().map(|i| {
            let d = i.domain.label();
            DomainImage { activations: vec![d; i.activations.len()], instance_probs: vec![d; i.instance_probs.len()], domain: i.domain }
        }).collect();
        let base = DomainBatch::new(exact.clone()).unwrap();
        let slots: Vec<(usize, bool, usize)> = exact.iter().enumerate().flat_map(|(i, img)| {
            (0..img.activations.len()).map(move |k| (i, true, k)).chain((0..img.instance_probs.len()).map(move |k| (i, false, k)))
        }).collect();
        let (i, act, k) = slots[which.index(slots.len())];
        let mut moved = exact.clone();
        let d = moved[i].domain.label();
        let v = if d == 0.0 { delta } else { 1.0 - delta };
        if act { moved[i].activations[k] = v } else { moved[i].instance_probs[k] = v }
        let moved = DomainBatch::new(moved).unwrap();
        if act {
            prop_assert!(image_domain_loss(&moved) > image_domain_loss(&base));
        } else {
            prop_assert!(instance_domain_loss(&moved) > instance_domain_loss(&base));
        }
    }

    #[test]
    fn consistency_zero_at_means(imgs in batch()) {
        let at_mean: Vec<DomainImage> = imgs.into_iter().map(|mut i| {
            let m = i.activations.iter().sum::<f64>() / i.activations.len() as f64;
            i.instance_probs.iter_mut().for_each(|p| *p = m);
            i
        }).collect();
        let b = DomainBatch::new(at_mean).unwrap();
        prop_assert!(consistency_loss(&b) < 1e-12);
    }

    #[test]
    fn relation_matrices_stay_stochastic(
        feats in prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 3), 0usize..4), 1..12),
        momentum in 0.0f64..0.999,
    ) {
        let l = build_relation_matrix(&feats, 4).unwrap();
        let g = update_grm(&RelationMatrix::uniform(4), &l, momentum).unwrap();
        for m in [&l, &g] {
            for r in 0..4 {
                prop_assert!((m.row(r).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }
        let present: Vec<usize> = feats.iter().map(|f| f.1).collect();
        prop_assert_eq!(mgrm_loss(&l, &l, &present).unwrap(), 0.0);
        prop_assert_eq!(mgrm_loss(&l, &g, &present).unwrap(), mgrm_loss(&g, &l, &present).unwrap());
    }
}

fn dets_and_gts() -> impl Strategy<Value = (Vec<Detection>, Vec<GroundTruth>)> {
    let bx = (0i32..8, 0i32..8, 1i32..5, 1i32..5)
        .prop_map(|(x, y, w, h)| BBox::new(x as f64, y as f64, (x + w) as f64, (y + h) as f64).unwrap());
    let gt = (0usize..2, bx.clone()).prop_map(|(img, b)| GroundTruth { image_id: format!("i{img}"), class_id: 0, bbox: b });
    let det = (0usize..2, bx, 0.0f64..1.0)
        .prop_map(|(img, b, s)| Detection { image_id: format!("i{img}"), class_id: 0, bbox: b, score: s });
    (prop::collection::vec(det, 0..10), prop::collection::vec(gt, 1..8))
}

proptest! {
    #[test]
    fn ap_depends_only_on_score_order((dets, gts) in dets_and_gts(), a in 0.1f64..5.0) {
        let squashed: Vec<Detection> = dets.iter().map(|d| Detection { score: (d.score * a).tanh() * 0.5, ..d.clone() }).collect();
        prop_assert_eq!(average_precision(&dets, &gts, 0, 0.5).unwrap(), average_precision(&squashed, &gts, 0, 0.5).unwrap());
    }

    #[test]
    fn top_false_positive_never_helps((dets, gts) in dets_and_gts()) {
        let before = average_precision(&dets, &gts, 0, 0.5).unwrap();
        let mut more = vec![Detection {
            image_id: "elsewhere".into(),
            class_id: 0,
            bbox: BBox::new(0.0, 0.0, 1.0, 1.0).unwrap(),
            score: 1.0,
        }];
        more.extend(dets.iter().cloned());
        prop_assert!(average_precision(&more, &gts, 0, 0.5).unwrap() <= before + 1e-12);
        prop_assert!((average_precision(&more, &gts, 0, 0.5).unwrap() - common::ap_oracle(&more, &gts, 0, 0.5)).abs() < 1e-9);
    }

    #[test]
    fn top_true_positive_never_hurts((dets, gts) in dets_and_gts()) {
        let before = average_precision(&dets, &gts, 0, 0.5).unwrap();
        // A perfect match on the first ground truth, scored above everything.
        let mut more = vec![Detection { image_id: gts[0].image_id.clone(), class_id: 0, bbox: gts[0].bbox, score: 1.0 }];
        more.extend(dets.iter().cloned());
        prop_assert!(average_precision(&more, &gts, 0, 0.5).unwrap() >= before - 1e-12);
    }

    #[test]
    fn splits_partition(densities in prop::collection::vec((0u8..4, 0u8..3), 0..40), seed in any::<u64>(), f in 0.05f64..0.95) {
        let labels = [vec![], vec!["Mass".to_string()], vec!["Asymmetry".to_string(), "Mass".to_string()]];
        let recs: Vec<ManifestRecord> = densities.iter().enumerate().map(|(i, (d, l))| ManifestRecord {
            image_id: format!("r{i}"),
            path: String::new(),
            density: [Density::A, Density::B, Density::C, Density::D][*d as usize],
            raw_findings: labels[*l as usize].iter().map(|s| (s.clone(), BBox::new(0.0, 0.0, 1.0, 1.0).unwrap())).collect(),
        }).collect();
        let (dense, fatty) = split_by_density(&recs);
        prop_assert_eq!(dense.len() + fatty.len(), recs.len());
        prop_assert!(dense.iter().all(|r| !fatty.contains(r)));
        let (train, test) = stratified_split(&recs, f, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), recs.len());
        let mut ids: Vec<&str> = train.iter().chain(&test).map(|r| r.image_id.as_str()).collect();
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), recs.len());
    }
}

#[test]
fn fda_influence_grows_with_beta() {
    let mut rng = common::rng(21);
    for _ in 0..20 {
        let src = common::synthetic_breast(48, 40, 0.8, rand::Rng::random(&mut rng));
        let tgt = common::synthetic_breast(48, 40, 0.3, rand::Rng::random(&mut rng));
        let mut last = 0.0;
        for beta in [0.01, 0.05, 0.1, 0.5, 1.0] {
            let out = fda_transfer(&src, &tgt, beta).unwrap();
            let d: f64 = out.data().iter().zip(src.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(d >= last - 1e-12, "beta {beta}: {d} < {last}");
            last = d;
        }
    }
}
