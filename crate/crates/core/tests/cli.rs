#![allow(clippy::excessive_precision)]

use std::path::Path;

use kdv_elliptic::cli::{main_with, Figure};
use kdv_elliptic::weierstrass::{Invariants, Weierstrass};
use kdv_elliptic::Branch;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kdv-elliptic").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> Option<f64> {
    (!s.is_empty()).then(|| s.parse().unwrap())
}

#[test]
fn figures_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for fig in ["fig1", "fig2", "fig3"] {
        for dir in [&a, &b] {
            let r = run(&["figure", fig, "--svg", "--out", dir.path().to_str().unwrap()]);
            assert_eq!(r.code, 0, "{}", r.stderr);
        }
        for ext in ["csv", "svg"] {
            let name = format!("{fig}.{ext}");
            assert_eq!(
                std::fs::read(a.path().join(&name)).unwrap(),
                std::fs::read(b.path().join(&name)).unwrap(),
                "{name}"
            );
        }
    }
}

#[test]
fn fig3_matches_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "figure",
        "fig3",
        "--param",
        "with_u=true",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let got = read_csv(&dir.path().join("fig3.csv"));
    let want = read_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fig3.csv"));
    assert_eq!(got.len(), 801);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g[3], w[3], "pole flag at x = {}", w[0]);
        assert_eq!(num(&g[0]), num(&w[0]));
        for c in 1..3 {
            match (num(&g[c]), num(&w[c])) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "x = {}: {a} vs {b}", w[0]),
                (a, b) => assert_eq!(a, b),
            }
        }
    }
}

#[test]
fn fig1_has_the_pole_and_fig2_cancels_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["figure", "fig1", "--out", out]).code, 0);
    assert_eq!(run(&["figure", "fig2", "--out", out]).code, 0);
    let row_at_zero = |rows: &[Vec<String>]| rows.iter().find(|r| num(&r[0]) == Some(0.0)).unwrap().clone();

    let fig1 = read_csv(&dir.path().join("fig1.csv"));
    assert_eq!(row_at_zero(&fig1)[2], "1");
    let sol = Figure::Fig1.branch().unwrap();
    for x in [-5e-4, 5e-4, 1e-4] {
        assert!(sol.value(x).unwrap().abs() > 1e3, "x = {x}");
    }

    let fig2 = read_csv(&dir.path().join("fig2.csv"));
    let zero = row_at_zero(&fig2);
    assert_eq!(zero[2], "0");
    let z = num(&zero[1]).unwrap();
    assert!((z + 150.00000048096000034).abs() < 1e-9 * 150.0, "{z}");
}

#[test]
fn default_verify_passes_and_writes_toml() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&["verify", "--param", "b=0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}\n{}", r.stdout, r.stderr);
    assert!(r.stdout.lines().any(|l| l.starts_with("PASS static_kdv")));
    assert!(r.stdout.lines().any(|l| l.starts_with("PASS kdv_time")));
    let text = std::fs::read_to_string(dir.path().join("report.toml")).unwrap();
    let doc: toml::Table = text.parse().unwrap();
    assert_eq!(doc["run"]["passed"].as_bool(), Some(true));
    let ids = doc["identity"].as_array().unwrap();
    assert!(ids.iter().all(|i| i["tolerance_source"].as_str() == Some("default")));
    assert!(ids.iter().any(|i| i["name"].as_str() == Some("commutativity")));
}

#[test]
fn zero_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&["verify", "--tol", "all=0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("FAIL"));
    let text = std::fs::read_to_string(dir.path().join("report.toml")).unwrap();
    assert!(text.contains("tolerance_source = \"override\""));
}

#[test]
fn configuration_errors_name_their_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = run(&["verify", "--param", "deltas=[0.03, -0.03]", "--out", out]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("deltas[0], deltas[1]"), "{}", r.stderr);

    let r = run(&["roots", "--param", "g2=\"x\""]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("g2"), "{}", r.stderr);

    let missing = dir.path().join("nope.toml");
    let r = run(&["build", "--config", missing.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("nope.toml"), "{}", r.stderr);

    let r = run(&["build", "--grid", "1,-1,10", "--out", out]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("grid"), "{}", r.stderr);
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "g2 = 4.0\ng3 = 0.0\ndeltas = [0.3]\n[grid]\nn_points = 21\n[output]\nseries = \"one.csv\"\n",
    )
    .unwrap();
    let r = run(&[
        "build",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(read_csv(&dir.path().join("one.csv")).len(), 21);
}

#[test]
fn eval_and_roots() {
    let r = run(&["eval", "wp", "1", "--param", "g2=4.0", "--param", "g3=0.0"]);
    assert_eq!(r.code, 0);
    let v: f64 = r.stdout.trim().parse().unwrap();
    assert!((v - 1.2137559863387746413).abs() < 1e-13);

    let r = run(&["eval", "zeta", "-0.8"]);
    let v: f64 = r.stdout.trim().parse().unwrap();
    assert!((v + 1.2457974489930803103).abs() < 1e-13);

    let r = run(&["eval", "sn", "0.7", "--param", "k2=0"]);
    let v: f64 = r.stdout.trim().parse().unwrap();
    assert!((v - 0.7f64.sin()).abs() < 1e-15);

    let r = run(&["eval", "wp", "0"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("x = 0"), "{}", r.stderr);

    // sn without k2 needs three real roots
    let r = run(&["eval", "sn", "0.5"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("k2"));

    let r = run(&["roots", "--param", "g2=4", "--param", "g3=0"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("e1 = 1.0000000000000000e0"), "{}", r.stdout);
    assert!(r.stdout.contains("e2 = 0.0000000000000000e0"), "{}", r.stdout);
    assert!(r.stdout.contains("k2 = 5.0000000000000000e-1"), "{}", r.stdout);
}

#[test]
fn build_series_match_the_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let k = Weierstrass::new(Invariants::new(0.3, 0.7).unwrap());

    assert_eq!(
        run(&[
            "build",
            "--param",
            "deltas=[0.1]",
            "--grid",
            "-1.5,1.5,61",
            "--out",
            out
        ])
        .code,
        0
    );
    for row in read_csv(&dir.path().join("build.csv")) {
        let x = num(&row[0]).unwrap();
        if let Some(u) = num(&row[2]) {
            let want = 2.0 * k.wp(x + 0.1).unwrap();
            assert!((u - want).abs() < 1e-10 * want.abs(), "x = {x}");
        }
    }

    assert_eq!(
        run(&["build", "--param", "deltas=[]", "--grid", "-1.5,1.5,60", "--out", out]).code,
        0
    );
    for row in read_csv(&dir.path().join("build.csv")) {
        let x = num(&row[0]).unwrap();
        let z = num(&row[1]).unwrap();
        assert!((z + 2.0 * k.zeta(x).unwrap()).abs() < 1e-12 * z.abs().max(1.0));
    }

    let r = run(&["build", "--param", "deltas=[-0.02, 0.03, 0.04, 0.05]", "--out", out]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = read_csv(&dir.path().join("build.csv"));
    let masked = rows.iter().filter(|r| r[3] == "1").count();
    assert!(masked < 20, "{masked}");
    for row in rows.iter().filter(|r| r[3] == "0") {
        assert!(num(&row[1]).unwrap().is_finite() && num(&row[2]).unwrap().is_finite());
    }
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["plot"]).code, 2);
}
