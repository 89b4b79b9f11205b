//! End-to-end runs of the compiled binary: artifacts, determinism across
//! processes, exit codes, and the three-dimensional paths.

use std::path::{Path, PathBuf};
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_billiards")
}

fn scene(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

fn out_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("billiards-smoke-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(binary()).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn travel_writes_deterministic_artifacts() {
    let scene = scene("two_discs.scene");
    let scene = scene.to_str().unwrap();
    let dir_a = out_dir("travel-a");
    let dir_b = out_dir("travel-b");
    for dir in [&dir_a, &dir_b] {
        let (code, _, stderr) = run(&[
            "travel",
            "--scene",
            scene,
            "--samples",
            "200",
            "--seed",
            "7",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {stderr}");
    }
    let csv_a = read(&dir_a, "travel.csv");
    let csv_b = read(&dir_b, "travel.csv");
    assert_eq!(csv_a, csv_b, "reruns must be byte-identical");
    assert!(csv_a.starts_with("entry_p0,exit_p0,t,reflections,tangencies,itinerary\n"));
    assert!(csv_a.lines().count() > 150);
    let meta = read(&dir_a, "travel.meta");
    assert!(meta.contains("version = "));
    assert!(meta.contains("scene_hash = fnv1a64:"));
    assert!(meta.contains("seed = 7"));
    assert!(meta.contains("trapped = "));
}

#[test]
fn compare_exit_code_signals_distinguishable() {
    let a = scene("two_discs.scene");
    let b = scene("two_discs_shifted.scene");
    let dir = out_dir("compare");
    let (code, stdout, _) = run(&[
        "compare",
        "--scene",
        a.to_str().unwrap(),
        "--scene-b",
        b.to_str().unwrap(),
        "--sampler",
        "grid",
        "--samples",
        "400",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 4, "distinguishable scenes exit with 4; stdout: {stdout}");
    let meta = read(&dir, "compare.meta");
    assert!(meta.contains("verdict = distinguishable"));

    // identical scenes exit 0
    let dir2 = out_dir("compare-same");
    let (code, _, _) = run(&[
        "compare",
        "--scene",
        a.to_str().unwrap(),
        "--scene-b",
        a.to_str().unwrap(),
        "--samples",
        "100",
        "--out",
        dir2.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(read(&dir2, "compare.meta").contains("verdict = indistinguishable at tolerance"));
}

#[test]
fn scene_errors_exit_with_two() {
    let dir = out_dir("badscene");
    let bad = dir.join("bad.scene");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(&bad, "chart.kind = flat\nchart.dim = 2\nexterior.colour = blue\n").unwrap();
    let (code, _, stderr) = run(&["travel", "--scene", bad.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");

    let (code, _, _) = run(&["travel", "--scene", "/nonexistent.scene", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn fronts_emits_svg_and_series() {
    let dir = out_dir("fronts");
    let (code, _, stderr) = run(&[
        "fronts",
        "--scene",
        scene("two_discs.scene").to_str().unwrap(),
        "--front",
        "circle",
        "--circle-center",
        "0 0",
        "--circle-radius",
        "0.5",
        "--circle-arc",
        "-0.3 0.3",
        "--t-max",
        "3",
        "--max-reflections",
        "4",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let svg = read(&dir, "scene.svg");
    assert_eq!(svg.matches("<path").count(), 3); // two obstacles + the patch
    let mineig = read(&dir, "mineig.csv");
    assert!(mineig.lines().count() > 10);
    assert!(read(&dir, "fronts.meta").contains("separation.holds_interval = true"));
}

#[test]
fn three_dimensional_scene_runs_end_to_end() {
    let scene3 = scene("two_balls.scene");
    let dir = out_dir("balls");
    let (code, _, stderr) = run(&[
        "travel",
        "--scene",
        scene3.to_str().unwrap(),
        "--samples",
        "60",
        "--seed",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let csv = read(&dir, "travel.csv");
    assert!(csv.starts_with("entry_p0,entry_p1,exit_p0,exit_p1,t,reflections,tangencies,itinerary\n"));
    assert!(csv.lines().count() > 40);

    // a sphere front expands through the scene without SVG output
    let dir2 = out_dir("balls-front");
    let (code, _, stderr) = run(&[
        "fronts",
        "--scene",
        scene3.to_str().unwrap(),
        "--front",
        "circle",
        "--circle-center",
        "0 0 0",
        "--circle-radius",
        "0.4",
        "--front-samples",
        "7",
        "--t-max",
        "2",
        "--max-reflections",
        "3",
        "--out",
        dir2.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let dump = read(&dir2, "front_dump.csv");
    assert!(dump.starts_with("param0,param1,x0,x1,x2,n0,n1,n2,s00,s01,s10,s11,min_eig,t\n"));
    assert!(!dir2.join("scene.svg").exists());
}

#[test]
fn trace_prints_events_on_curved_charts() {
    let dir = out_dir("trace-hyp");
    let (code, _, stderr) = run(&[
        "trace",
        "--scene",
        scene("hyperbolic_two_discs.scene").to_str().unwrap(),
        "--entry",
        "0",
        "--angle",
        "0.05",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let txt = read(&dir, "trace.txt");
    assert!(txt.contains("exit") || txt.contains("reflection"), "{txt}");
    assert!(txt.contains("status"));
}
