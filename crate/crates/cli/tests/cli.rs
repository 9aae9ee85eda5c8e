use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use wmc::video_io::{encode_y4m, read_pgm, save_frame};
use wmc::Plane;

fn wmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wmc"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn texture(w: usize, h: usize, phase: f64) -> Plane {
    Plane::from_fn(w, h, |x, y| {
        let (x, y) = (x as f64 + phase, y as f64);
        (128.0 + 50.0 * (0.3 * x).sin() + 40.0 * (0.21 * y + 0.1 * x).cos()).round()
    })
}

fn write_clip(dir: &Path, n: usize) -> std::path::PathBuf {
    let frames: Vec<Plane> = (0..n).map(|i| texture(32, 24, i as f64 * 0.5)).collect();
    let path = dir.join("clip.y4m");
    fs::write(&path, encode_y4m(&frames, "30:1", "mono").unwrap().0).unwrap();
    path
}

#[test]
fn encode_decode_psnr_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let clip = write_clip(dir.path(), 3);
    let stream = dir.path().join("out.wmc");
    let out = wmc(&[
        "encode",
        "--in",
        s(&clip),
        "--out",
        s(&stream),
        "--block",
        "8",
        "--precision",
        "2",
        "--range",
        "3",
        "--threshold",
        "0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(&fs::read(&stream).unwrap()[..4], b"WMC1");

    let dec = dir.path().join("dec");
    let out = wmc(&["decode", "--in", s(&stream), "--out", s(&dec)]);
    assert!(out.status.success());
    let first = read_pgm(&dec.join("frame_0000.pgm")).unwrap();
    assert_eq!(first, texture(32, 24, 0.0));
    assert!(dec.join("frame_0002.pgm").exists());

    let out = wmc(&["psnr", "--a", s(&clip), "--b", s(&dec)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mean: f64 = text
        .lines()
        .last()
        .unwrap()
        .trim_start_matches("mean: ")
        .trim_end_matches(" dB")
        .parse()
        .unwrap_or(f64::INFINITY);
    assert!(mean >= 50.0, "{text}");
}

#[test]
fn psnr_of_identical_images_is_inf() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.pgm");
    save_frame(&texture(8, 8, 0.0), &p).unwrap();
    let out = wmc(&["psnr", "--a", s(&p), "--b", s(&p)]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "inf");
}

#[test]
fn shift_demo_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let (src, dst) = (dir.path().join("in.pgm"), dir.path().join("out.pgm"));
    save_frame(&texture(32, 32, 0.0), &src).unwrap();
    let out = wmc(&[
        "shift",
        "--in",
        s(&src),
        "--dx",
        "1.25",
        "--dy",
        "-0.75",
        "--out",
        s(&dst),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let err: f64 = text.rsplit("= ").next().unwrap().trim().parse().unwrap();
    assert!(err <= 1e-8, "{text}");
    assert_eq!(read_pgm(&dst).unwrap().dims(), (32, 32));
}

#[test]
fn rd_sweep_writes_sorted_csv_with_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let clip = write_clip(dir.path(), 2);
    let csv = dir.path().join("rd.csv");
    let out = wmc(&[
        "rd-sweep",
        "--in",
        s(&clip),
        "--thresholds",
        "8,0,2",
        "--baseline",
        "band2band",
        "--csv",
        s(&csv),
        "--range",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 6);
    let ts: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(ts, ["0", "2", "8", "0", "2", "8"]);
    assert_eq!(rows[0].last(), Some(&"inband"));
    assert_eq!(rows[5].last(), Some(&"band2band"));
    let bpp: Vec<f64> = rows[..3].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(bpp.windows(2).all(|w| w[1] <= w[0]));

    let again = dir.path().join("rd2.csv");
    wmc(&[
        "rd-sweep",
        "--in",
        s(&clip),
        "--thresholds",
        "8,0,2",
        "--baseline",
        "band2band",
        "--csv",
        s(&again),
        "--range",
        "2",
    ]);
    assert_eq!(fs::read(&again).unwrap(), text.as_bytes());
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["encode", "--in", "x.y4m", "--out", "y", "--block", "12"][..],
        &["encode", "--in", "x.y4m", "--out", "y", "--precision", "4"],
        &["encode", "--in", "x.y4m", "--out", "y", "--threshold", "-1"],
        &["rd-sweep", "--in", "x.y4m", "--thresholds=", "--csv", "c"],
        &["bogus"],
        &[],
    ] {
        assert_eq!(wmc(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(wmc(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.wmc");
    fs::write(&junk, b"not a stream").unwrap();
    let missing = dir.path().join("missing.y4m");
    let odd = dir.path().join("odd.pgm");
    save_frame(&texture(7, 5, 0.0), &odd).unwrap();
    let out_dir = dir.path().join("o");
    for args in [
        vec!["decode", "--in", s(&junk), "--out", s(&out_dir)],
        vec!["encode", "--in", s(&missing), "--out", s(&junk)],
        vec![
            "shift",
            "--in",
            s(&odd),
            "--dx",
            "1",
            "--dy",
            "0",
            "--out",
            s(&junk),
        ],
        vec!["psnr", "--a", s(&odd), "--b", s(&missing)],
    ] {
        let out = wmc(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}
