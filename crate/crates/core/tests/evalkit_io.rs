use std::fs;

use falce_core::evalkit::*;

#[test]
fn files_round_trip_through_map() {
    let tmp = tempfile::tempdir().unwrap();
    let m = tmp.path().join("manifest.csv");
    fs::write(
        &m,
        "image_id,path,density,label,x1,y1,x2,y2\n\
         a,a.png,C,Mass,0,0,10,10\n\
         a,a.png,C,Focal Asymmetry,20,20,30,30\n\
         b,b.png,A,,,,,\n\
         c,c.png,B,Nipple Retraction,0,0,5,5\n",
    )
    .unwrap();
    let recs = read_manifest(&m).unwrap();
    assert_eq!(recs.len(), 3);
    assert!(recs[1].raw_findings.is_empty());
    let gts = read_ground_truth(&m).unwrap();
    // The unmapped label is dropped.
    assert_eq!(gts.len(), 2);

    let d = tmp.path().join("dets.csv");
    let mut text = String::from("image_id,class_id,score,x1,y1,x2,y2\n");
    for g in &gts {
        text += &format!("{},{},0.9,{},{},{},{}\n", g.image_id, g.class_id, g.bbox.x1, g.bbox.y1, g.bbox.x2, g.bbox.y2);
    }
    fs::write(&d, text).unwrap();
    let dets = read_detections(&d).unwrap();
    let per = per_class_ap(&dets, &gts, NUM_CLASSES, DEFAULT_IOU_THR).unwrap();
    assert!(per.iter().all(|&(_, ap)| ap == 1.0));
    let mut out = Vec::new();
    write_report(&mut out, &per).unwrap();
    assert!(String::from_utf8(out).unwrap().ends_with("mAP,1.000000\n"));
}

#[test]
fn malformed_rows_report_their_line() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("dets.csv");
    fs::write(&d, "image_id,class_id,score,x1,y1,x2,y2\na,0,0.5,0,0,1,1\na,0,oops,0,0,1,1\n").unwrap();
    match read_detections(&d) {
        Err(EvalError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    fs::write(&d, "image_id,class_id,score,x1,y1,x2,y2\na,0,1.5,0,0,1,1\n").unwrap();
    assert!(matches!(read_detections(&d), Err(EvalError::Parse { line: 2, .. })));
    fs::write(&d, "image_id,class_id,score,x1,y1,x2,y2\na,0,0.5,5,0,1,1\n").unwrap();
    assert!(matches!(read_detections(&d), Err(EvalError::Parse { line: 2, .. })));
    assert!(matches!(read_detections(&tmp.path().join("missing.csv")), Err(EvalError::Io { .. })));
}

#[test]
fn split_from_file_is_stratified() {
    let tmp = tempfile::tempdir().unwrap();
    let m = tmp.path().join("manifest.csv");
    let mut text = String::from("image_id,path,density,label,x1,y1,x2,y2\n");
    for i in 0..10 {
        text += &format!("f{i},f{i}.png,B,Mass,0,0,4,4\n");
    }
    for i in 0..5 {
        text += &format!("g{i},g{i}.png,A,,,,,\n");
    }
    for i in 0..4 {
        text += &format!("d{i},d{i}.png,D,Mass,0,0,4,4\n");
    }
    fs::write(&m, text).unwrap();
    let recs = read_manifest(&m).unwrap();
    let (dense, fatty) = split_by_density(&recs);
    assert_eq!((dense.len(), fatty.len()), (4, 15));
    let (train, test) = stratified_split(&fatty, 0.6, 0).unwrap();
    assert_eq!((train.len(), test.len()), (9, 6));
    assert_eq!(train.iter().filter(|r| r.image_id.starts_with('f')).count(), 6);
    assert_eq!(stratified_split(&fatty, 0.6, 0).unwrap().0, train);
}
