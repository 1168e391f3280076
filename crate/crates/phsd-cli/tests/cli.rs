//! End-to-end tests of the `phsd` binary: artifact layout, report contents,
//! exit codes, and run-to-run determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn phsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phsd")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// 8-bit P5 with a deterministic smooth pattern.
fn write_toy_pgm(path: &Path, width: usize, height: usize) {
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    for t in 0..height {
        for y in 0..width {
            bytes.push(((t * 31 + y * 7 + (t * y) % 11) % 256) as u8);
        }
    }
    fs::write(path, bytes).unwrap();
}

#[test]
fn mask_prints_the_realized_count_and_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let out = phsd(&[
        "mask",
        "--size",
        "8",
        "--lines",
        "2",
        "--points",
        "8",
        "--hermitian",
        "false",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = fs::read_to_string(&path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header[..4], ["mask", "8", "8", "fourier"]);
    let m: usize = header[4].parse().unwrap();
    assert_eq!(text.lines().count(), m + 1);
    assert!(stdout(&out).contains(&format!("M={m}")));
}

#[test]
fn mask_honors_the_points_per_line_alias() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let run = |flag: &str, path: &Path| {
        let out = phsd(&[
            "mask",
            "--size",
            "16",
            "--lines",
            "3",
            flag,
            "10",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    };
    run("--points", &a);
    run("--points-per-line", &b);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    // Rejected by the library: zero lines.
    let out = phsd(&["mask", "--size", "8", "--lines", "0", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("invalid parameter"));
    // Rejected by the parser: unknown flag.
    let out = phsd(&["mask", "--size", "8", "--bogus", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    // Help is not an error.
    let out = phsd(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("reconstruct"));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.pgm");
    let out_dir = dir.path().join("out");
    let out = phsd(&[
        "reconstruct",
        "--input",
        missing.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));

    let garbage = dir.path().join("junk.pgm");
    fs::write(&garbage, b"not an image at all").unwrap();
    let out = phsd(&[
        "reconstruct",
        "--input",
        garbage.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("malformed input"));
}

#[test]
fn evaluate_prints_inf_for_identical_images_and_rejects_shape_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    let c = dir.path().join("c.pgm");
    write_toy_pgm(&a, 8, 8);
    write_toy_pgm(&b, 8, 8);
    write_toy_pgm(&c, 8, 4);

    let out =
        phsd(&["evaluate", "--reference", a.to_str().unwrap(), "--test", b.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("psnr_db = inf"));

    let out =
        phsd(&["evaluate", "--reference", a.to_str().unwrap(), "--test", c.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dimension mismatch"));
}

#[test]
fn measure_extracts_pixel_masks_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img.pgm");
    write_toy_pgm(&img, 4, 4);
    let mask = dir.path().join("mask.txt");
    fs::write(&mask, "mask 4 4 pixel 2\n1 2\n0 0\n").unwrap();
    let meas = dir.path().join("meas.txt");

    let out = phsd(&[
        "measure",
        "--input",
        img.to_str().unwrap(),
        "--mask",
        mask.to_str().unwrap(),
        "--output",
        meas.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    // Pixel-domain measurement is plain extraction: value at (t=1, y=2) of
    // the toy pattern is 1*31 + 2*7 + 2%11 = 47.
    let text = fs::read_to_string(&meas).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "meas 2");
    assert_eq!(lines[1], "1 2 4.7000000000000000e1 0.0000000000000000e0");
    assert_eq!(lines[2], "0 0 0.0000000000000000e0 0.0000000000000000e0");
}

fn read_csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn reconstruct_writes_per_combination_artifacts_and_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("toy.pgm");
    write_toy_pgm(&img, 16, 16);
    let out_dir = dir.path().join("out");

    let out = phsd(&[
        "reconstruct",
        "--input",
        img.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--basis",
        "both",
        "--solver",
        "both",
        "--lines",
        "5",
        "--levels",
        "2",
        "--iterations",
        "3",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    for name in
        ["toy_phsd-p2_bp.pgm", "toy_phsd-p2_lasso.pgm", "toy_daub2d-p2_bp.pgm", "toy_daub2d-p2_lasso.pgm"]
    {
        let bytes = fs::read(out_dir.join(name)).unwrap();
        assert!(bytes.starts_with(b"P5\n16 16\n255\n"), "{name} has a canonical header");
        assert_eq!(bytes.len(), 13 + 256, "{name} payload is 8-bit 16x16");
    }

    let mask_text = fs::read_to_string(out_dir.join("toy_mask.txt")).unwrap();
    let m: usize = mask_text.split_whitespace().nth(4).unwrap().parse().unwrap();

    let rows = read_csv_rows(&out_dir.join("report.csv"));
    assert_eq!(rows.len(), 5, "header plus four combination rows");
    assert_eq!(rows[0][0], "image_id");
    let col = |name: &str| rows[0].iter().position(|h| h == name).unwrap();
    for row in &rows[1..] {
        assert_eq!(row[col("image_id")], "toy");
        assert_eq!(row[col("measurements")], m.to_string());
        assert_eq!(row[col("n")], "256");
        assert_eq!(row[col("iterations")], "3");
        let psnr: f64 = row[col("psnr_db")].parse().unwrap();
        assert!(psnr.is_finite() && psnr > 0.0);
    }
    // BP rows leave the stationarity column empty, Lasso rows fill it.
    assert_eq!(rows[1][col("kkt_residual")], "");
    assert!(!rows[2][col("kkt_residual")].is_empty());
}

#[test]
fn repeated_runs_are_identical_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("toy.pgm");
    write_toy_pgm(&img, 16, 16);

    let run = |out_dir: &Path| {
        let out = phsd(&[
            "reconstruct",
            "--input",
            img.to_str().unwrap(),
            "--output-dir",
            out_dir.to_str().unwrap(),
            "--basis",
            "both",
            "--solver",
            "both",
            "--lines",
            "4",
            "--levels",
            "2",
            "--iterations",
            "4",
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    };
    let d1 = dir.path().join("r1");
    let d2 = dir.path().join("r2");
    run(&d1);
    run(&d2);

    for name in [
        "toy_mask.txt",
        "toy_phsd-p2_bp.pgm",
        "toy_phsd-p2_lasso.pgm",
        "toy_daub2d-p2_bp.pgm",
        "toy_daub2d-p2_lasso.pgm",
    ] {
        assert_eq!(fs::read(d1.join(name)).unwrap(), fs::read(d2.join(name)).unwrap(), "{name}");
    }

    let r1 = read_csv_rows(&d1.join("report.csv"));
    let r2 = read_csv_rows(&d2.join("report.csv"));
    let wall = r1[0].iter().position(|h| h == "wall_time_seconds").unwrap();
    assert_eq!(r1.len(), r2.len());
    for (a, b) in r1.iter().zip(&r2) {
        let strip = |row: &[String]| {
            row.iter().enumerate().filter(|&(i, _)| i != wall).map(|(_, v)| v.clone()).collect::<Vec<_>>()
        };
        assert_eq!(strip(a), strip(b));
    }
}

#[test]
fn reconstruct_accepts_a_mask_file_and_checks_its_shape() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("toy.pgm");
    write_toy_pgm(&img, 16, 16);
    let mask = dir.path().join("m.txt");
    let out = phsd(&["mask", "--size", "16", "--lines", "4", "--output", mask.to_str().unwrap()]);
    assert_eq!(code(&out), 0);

    let out_dir = dir.path().join("out");
    let out = phsd(&[
        "reconstruct",
        "--input",
        img.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--mask-file",
        mask.to_str().unwrap(),
        "--solver",
        "bp",
        "--levels",
        "2",
        "--iterations",
        "3",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let rows = read_csv_rows(&out_dir.join("report.csv"));
    // File-provided masks carry no nominal geometry.
    let col = |name: &str| rows[0].iter().position(|h| h == name).unwrap();
    assert_eq!(rows[1][col("lines")], "");
    assert_eq!(rows[1][col("points")], "");

    // Shape mismatch between the mask grid and the image is a data error.
    let small = dir.path().join("small.pgm");
    write_toy_pgm(&small, 8, 8);
    let out = phsd(&[
        "reconstruct",
        "--input",
        small.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--mask-file",
        mask.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dimension mismatch"));
}

#[test]
fn compare_appends_the_psnr_gap_column() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("toy.pgm");
    write_toy_pgm(&img, 16, 16);
    let out_dir = dir.path().join("out");

    let out = phsd(&[
        "compare",
        "--input",
        img.to_str().unwrap(),
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--solver",
        "both",
        "--lines",
        "5",
        "--levels",
        "2",
        "--iterations",
        "3",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let rows = read_csv_rows(&out_dir.join("comparison.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0].last().unwrap(), "psnr_delta_db");
    let tag = rows[0].iter().position(|h| h == "basis_tag").unwrap();
    for row in &rows[1..] {
        if row[tag].starts_with("phsd") {
            assert_eq!(row.last().unwrap(), "");
        } else {
            let delta: f64 = row.last().unwrap().parse().unwrap();
            assert!(delta.is_finite());
        }
    }
    assert!(stdout(&out).contains("psnr_delta_db"));
}

#[test]
fn transpose_flag_swaps_axes_before_measuring() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("rect.pgm");
    write_toy_pgm(&img, 4, 2); // 4 wide, 2 tall
    let mask = dir.path().join("mask.txt");
    // After transposing, the grid is 4 tall and 2 wide.
    fs::write(&mask, "mask 4 2 pixel 1\n3 1\n").unwrap();
    let meas = dir.path().join("meas.txt");

    let out = phsd(&[
        "measure",
        "--input",
        img.to_str().unwrap(),
        "--mask",
        mask.to_str().unwrap(),
        "--output",
        meas.to_str().unwrap(),
        "--transpose",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    // Transposed pixel (t=3, y=1) is original (t=1, y=3): 1*31 + 3*7 + 3%11 = 55.
    let text = fs::read_to_string(&meas).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "3 1 5.5000000000000000e1 0.0000000000000000e0");
}
