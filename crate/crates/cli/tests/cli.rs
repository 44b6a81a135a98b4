use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ssd_core::io;

fn ssd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssd"))
        .current_dir(dir)
        .args(args)
        .env_remove("CS_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = ssd(dir, args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn plot_data(svg: &str) -> Vec<(String, f64, f64)> {
    let start = svg.find("<!-- plot-data").expect("data block");
    let block = &svg[start..];
    let end = block.find("-->").expect("block end");
    block[..end]
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].to_string(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect()
}

fn tmp() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn gen_matrix_is_deterministic() {
    let (_g, d) = tmp();
    let args = [
        "gen-matrix",
        "--kind",
        "gaussian",
        "--rows",
        "4",
        "--cols",
        "8",
        "--seed",
        "7",
    ];
    ok(&d, &[&args[..], &["--out", "a.csmat"]].concat());
    ok(&d, &[&args[..], &["--out", "b.csmat"]].concat());
    let a = fs::read(d.join("a.csmat")).unwrap();
    assert_eq!(a, fs::read(d.join("b.csmat")).unwrap());
    let (m, _) = io::read_matrix_file(&d.join("a.csmat")).unwrap();
    assert_eq!((m.rows(), m.cols()), (4, 8));
}

#[test]
fn correlated_matrix_reports_infinite_q() {
    let (_g, d) = tmp();
    let out = ok(
        &d,
        &[
            "gen-matrix",
            "--kind",
            "correlated",
            "--rows",
            "280",
            "--cols",
            "1000",
            "--rank",
            "200",
            "--seed",
            "1",
            "--out",
            "d.csmat",
            "--report-q",
        ],
    );
    assert!(out.lines().any(|l| l == "Q inf"), "{out}");
}

#[test]
fn usage_errors_exit_two() {
    let (_g, d) = tmp();
    let missing_rank = ssd(
        &d,
        &[
            "gen-matrix",
            "--kind",
            "correlated",
            "--rows",
            "4",
            "--cols",
            "8",
            "--seed",
            "1",
            "--out",
            "x",
        ],
    );
    assert_eq!(missing_rank.status.code(), Some(2));
    assert!(!d.join("x").exists());
    let unknown = ssd(
        &d,
        &[
            "gen-signal",
            "--n",
            "10",
            "--rho",
            "0.1",
            "--seed",
            "1",
            "--out",
            "h",
            "--bogus",
        ],
    );
    assert_eq!(unknown.status.code(), Some(2));
    let missing = ssd(
        &d,
        &["gen-signal", "--n", "10", "--seed", "1", "--out", "h"],
    );
    assert_eq!(missing.status.code(), Some(2));
    let no_rhs = ssd(&d, &["solve", "--matrix", "m", "--out", "h"]);
    assert_eq!(no_rhs.status.code(), Some(2));
    let bad_rho = ssd(
        &d,
        &[
            "gen-signal",
            "--n",
            "10",
            "--rho",
            "1.5",
            "--seed",
            "1",
            "--out",
            "h",
        ],
    );
    assert_eq!(bad_rho.status.code(), Some(2));
}

#[test]
fn missing_input_file_exits_one() {
    let (_g, d) = tmp();
    let o = ssd(
        &d,
        &[
            "solve",
            "--matrix",
            "absent.csmat",
            "--measurement",
            "z",
            "--out",
            "h",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn zero_measurement_gives_zero_solution() {
    let (_g, d) = tmp();
    ok(
        &d,
        &[
            "gen-matrix",
            "--kind",
            "gaussian",
            "--rows",
            "5",
            "--cols",
            "12",
            "--seed",
            "3",
            "--out",
            "d.csmat",
        ],
    );
    io::write_vector_file(&d.join("z.csvec"), &[0.0; 5], &[]).unwrap();
    let out = ok(
        &d,
        &[
            "solve",
            "--matrix",
            "d.csmat",
            "--measurement",
            "z.csvec",
            "--out",
            "h.csvec",
        ],
    );
    assert!(out.contains("K=0 converged=true"), "{out}");
    let (h, _) = io::read_vector_file(&d.join("h.csvec")).unwrap();
    assert_eq!(h, vec![0.0; 12]);
}

#[test]
fn easy_gaussian_instance_succeeds_end_to_end() {
    let (_g, d) = tmp();
    ok(
        &d,
        &[
            "gen-matrix",
            "--kind",
            "gaussian",
            "--rows",
            "200",
            "--cols",
            "1000",
            "--seed",
            "2",
            "--out",
            "d.csmat",
        ],
    );
    ok(
        &d,
        &[
            "gen-signal",
            "--n",
            "1000",
            "--rho",
            "0.04",
            "--seed",
            "3",
            "--out",
            "h0.csvec",
        ],
    );
    let out = ok(
        &d,
        &[
            "solve", "--matrix", "d.csmat", "--signal", "h0.csvec", "--solver", "ssd", "--out",
            "h.csvec", "--trace", "t.csv",
        ],
    );
    let delta_line = out
        .lines()
        .find(|l| l.starts_with("delta="))
        .expect("delta line");
    let delta: f64 = delta_line[6..].split(' ').next().unwrap().parse().unwrap();
    assert!(delta <= 1e-5 && delta_line.ends_with("success"), "{out}");

    // the same system through measure + --measurement gives the same h
    ok(
        &d,
        &[
            "measure", "--matrix", "d.csmat", "--signal", "h0.csvec", "--out", "z.csvec",
        ],
    );
    ok(
        &d,
        &[
            "solve",
            "--matrix",
            "d.csmat",
            "--measurement",
            "z.csvec",
            "--out",
            "h2.csvec",
        ],
    );
    assert_eq!(
        io::read_vector_file(&d.join("h.csvec")).unwrap().0,
        io::read_vector_file(&d.join("h2.csvec")).unwrap().0
    );

    // plotted trace ends below the stopping threshold
    ok(
        &d,
        &["plot", "--in", "t.csv", "--kind", "trace", "--out", "t.svg"],
    );
    let data = plot_data(&fs::read_to_string(d.join("t.svg")).unwrap());
    let last = data.last().expect("trace points");
    assert!(last.2 <= 1e-8, "{last:?}");
}

#[test]
fn correlated_instance_separates_ssd_from_omp() {
    let (_g, d) = tmp();
    ok(
        &d,
        &[
            "gen-matrix",
            "--kind",
            "correlated",
            "--rows",
            "280",
            "--cols",
            "1000",
            "--rank",
            "200",
            "--seed",
            "11",
            "--out",
            "d.csmat",
        ],
    );
    ok(
        &d,
        &[
            "gen-signal",
            "--n",
            "1000",
            "--rho",
            "0.05",
            "--kind",
            "uniform",
            "--seed",
            "12",
            "--out",
            "h0.csvec",
        ],
    );
    let ssd_out = ok(
        &d,
        &[
            "solve", "--matrix", "d.csmat", "--signal", "h0.csvec", "--solver", "ssd", "--out", "a",
        ],
    );
    assert!(ssd_out.contains(" success"), "{ssd_out}");
    let omp_out = ok(
        &d,
        &[
            "solve", "--matrix", "d.csmat", "--signal", "h0.csvec", "--solver", "omp", "--out", "b",
        ],
    );
    let line = omp_out.lines().find(|l| l.starts_with("delta=")).unwrap();
    let delta: f64 = line[6..].split(' ').next().unwrap().parse().unwrap();
    assert!(delta > 1e-2, "{omp_out}");
}

#[test]
fn sweep_smoke_and_determinism() {
    let (_g, d) = tmp();
    fs::write(
        d.join("c.cfg"),
        "n = 100\nrho = 0.05\ntrials = 1\nsolvers = ssd\nseed = 4\n",
    )
    .unwrap();
    let out = ok(&d, &["sweep", "--config", "c.cfg", "--out", "a.csv"]);
    assert_eq!(out.lines().count(), 1);
    let (rows, comments) =
        io::read_sweep_csv(fs::read(d.join("a.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(comments.iter().any(|c| c == "seed=4"));

    let o = Command::new(env!("CARGO_BIN_EXE_ssd"))
        .current_dir(&d)
        .args(["sweep", "--config", "c.cfg", "--out", "b.csv"])
        .env("CS_WORKERS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(
        fs::read(d.join("a.csv")).unwrap(),
        fs::read(d.join("b.csv")).unwrap()
    );
}

#[test]
fn sweep_config_errors_name_the_key() {
    let (_g, d) = tmp();
    fs::write(d.join("c.cfg"), "n = 100\nrho = 0.05\ntrails = 3\n").unwrap();
    let o = ssd(&d, &["sweep", "--config", "c.cfg", "--out", "a.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trails"));

    fs::write(d.join("c.cfg"), "n = 100\nrho = 0.05\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ssd"))
        .current_dir(&d)
        .args(["sweep", "--config", "c.cfg", "--out", "a.csv"])
        .env("CS_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cue_full_density_hits_every_rank() {
    let (_g, d) = tmp();
    ok(
        &d,
        &[
            "cue",
            "--n",
            "50",
            "--rho-list",
            "1.0",
            "--samples",
            "5",
            "--seed",
            "2",
            "--out",
            "c.csv",
        ],
    );
    let text = fs::read_to_string(d.join("c.csv")).unwrap();
    let (stats, _) = io::read_cue_csv(text.as_bytes()).unwrap();
    assert_eq!(stats.len(), 1);
    assert_eq!(stats[0].p1, 1.0);
    assert!(stats[0].rank_curve.iter().all(|f| *f == 1.0));
    let body: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(body.len(), 50);
    assert!(body
        .iter()
        .all(|l| l.split(',').nth(3) == Some("1.0000000000000000e0")));

    ok(
        &d,
        &["plot", "--in", "c.csv", "--kind", "cue", "--out", "c.svg"],
    );
    let svg = fs::read_to_string(d.join("c.svg")).unwrap();
    assert_eq!(svg.matches("legend-entry").count(), 1);
}

#[test]
fn plot_header_only_and_legends() {
    let (_g, d) = tmp();
    fs::write(d.join("empty.csv"), format!("{}\n", io::SWEEP_HEADER)).unwrap();
    ok(
        &d,
        &[
            "plot",
            "--in",
            "empty.csv",
            "--kind",
            "s-vs-rho",
            "--out",
            "e.svg",
        ],
    );
    let svg = fs::read_to_string(d.join("e.svg")).unwrap();
    assert!(svg.contains("<svg") && !svg.contains("legend-entry"));

    let two = format!(
        "{}\n0.05,ssd,1,1e-16,0,10,0,0\n0.05,omp,0.5,0.3,0.1,10,0,0\n",
        io::SWEEP_HEADER
    );
    fs::write(d.join("two.csv"), two).unwrap();
    for kind in ["s-vs-rho", "delta-vs-rho"] {
        ok(
            &d,
            &[
                "plot", "--in", "two.csv", "--kind", kind, "--out", "two.svg",
            ],
        );
        let svg = fs::read_to_string(d.join("two.svg")).unwrap();
        assert_eq!(svg.matches("legend-entry").count(), 2, "{kind}");
        assert_eq!(plot_data(&svg).len(), 2);
    }
}

#[test]
fn plot_schema_mismatch_exits_two() {
    let (_g, d) = tmp();
    fs::write(d.join("x.csv"), "a,b,c\n1,2,3\n").unwrap();
    let o = ssd(
        &d,
        &["plot", "--in", "x.csv", "--kind", "trace", "--out", "x.svg"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_matrix_exits_two() {
    let (_g, d) = tmp();
    fs::write(d.join("bad.csmat"), "CSMAT 1 2 2\n1 2\n3 4\n5 6\n").unwrap();
    io::write_vector_file(&d.join("z.csvec"), &[1.0, 2.0], &[]).unwrap();
    let o = ssd(
        &d,
        &[
            "solve",
            "--matrix",
            "bad.csmat",
            "--measurement",
            "z.csvec",
            "--out",
            "h",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}
