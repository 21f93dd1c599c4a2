use spatial_beam::search::SearchConfig;
use spatial_beam_py::ops;

#[test]
fn expand_root_and_reversal() {
    let cfg = SearchConfig::default();
    let rows = ops::expand("", &cfg).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|(_, s)| s == "keep"));
    let rows = ops::expand("L9", &cfg).unwrap();
    let reversals: Vec<&str> = rows
        .iter()
        .filter(|(_, s)| s == "pruned:reversal")
        .map(|(t, _)| t.as_str())
        .collect();
    assert_eq!(reversals, ["L9|R9", "L9|R9|R9", "L9|R9|R9|R9"]);
    assert!(ops::expand("Q1", &cfg).is_err());
}

#[test]
fn poses_of_cancelling_turns() {
    let poses = ops::trajectory_poses("L9|L9|R9|R9").unwrap();
    assert_eq!(poses.len(), 4);
    let (r, t) = poses[3];
    assert_eq!(r, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    assert_eq!(t, [0.0; 3]);
    assert_eq!(ops::canonical_trajectory(" F0.25|L9 ").unwrap(), "F0.25|L9");
}

#[test]
fn plucker_shapes() {
    let identity = ([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3]);
    let (h, w, c, data) = ops::plucker(8, 4, 60.0, identity, None).unwrap();
    assert_eq!((h, w, c, data.len()), (4, 8, 6, 4 * 8 * 6));
    let (_, _, c, data) = ops::plucker(8, 4, 60.0, identity, Some(10.0)).unwrap();
    assert_eq!((c, data.len()), (7, 4 * 8 * 7));
    let skewed = ([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [0.0; 3]);
    assert!(ops::plucker(8, 4, 60.0, skewed, None).is_err());
}

#[test]
fn render_suite_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = ops::generate_suite(11, 2, dir.path()).unwrap();
    let scene = std::fs::read_to_string(dir.path().join("case_0000.scene.json")).unwrap();
    let frames = ops::render_trajectory(&scene, "L9|R9", 32, 24, 60.0, 0.0, &SearchConfig::default()).unwrap();
    assert_eq!(frames.len(), 3);
    assert_eq!(frames[0], frames[2]);
    assert_eq!(ops::psnr(&frames[0], &frames[2]).unwrap(), 100.0);
    assert!((ops::ssim(&frames[0], &frames[2]).unwrap() - 1.0).abs() < 1e-12);
    assert!(ops::psnr(&frames[0], &frames[1]).unwrap() < 100.0);

    let nine = vec!["F0.25"; 9].join("|");
    assert!(ops::render_trajectory(&scene, &nine, 32, 24, 60.0, 0.0, &SearchConfig::default()).is_err());

    let report = ops::run_benchmark(dataset.as_ref(), &SearchConfig::default(), true, 1).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["label"], "baseline");
    assert_eq!(v["total"], 2);
}
