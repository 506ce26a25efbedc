use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
        .display()
        .to_string()
}

fn bops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bops"))
        .args(args)
        .output()
        .expect("spawn bops")
}

fn code(args: &[&str]) -> i32 {
    bops(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    let out = bops(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    serde_json::from_str(&stdout(&a)).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes_over_fixture_corpus() {
    let k = |n: &str| fixture(&format!("kernels/{n}"));
    let m = |n: &str| fixture(&format!("machines/{n}"));
    let r = |n: &str| fixture(&format!("measurements/{n}"));
    let c = |n: &str| fixture(&format!("counters/{n}"));

    for name in [
        "cluster_size.k",
        "matmul.k",
        "threshold.k",
        "sum_n.k",
        "div_zero.k",
    ] {
        assert_eq!(code(&["count", &k(name)]), 0, "{name}");
    }
    assert_eq!(code(&["count", &k("malformed.k")]), 2);
    assert_eq!(code(&["count", &k("missing.k")]), 2);
    assert_eq!(code(&["run", &k("malformed.k")]), 2);
    assert_eq!(code(&["run", &k("cluster_size.k")]), 0);
    assert_eq!(code(&["run", &k("div_zero.k"), "--input", "y=0"]), 1);
    assert_eq!(code(&["run", &k("div_zero.k"), "--input", "y=2"]), 0);
    assert_eq!(code(&["run", &k("div_zero.k"), "--input", "nope=2"]), 2);
    assert_eq!(
        code(&[
            "run",
            &k("sum_n.k"),
            "--input",
            "n=1000000",
            "--max-ops",
            "100"
        ]),
        1
    );

    for name in ["e5645.toml", "e5310.toml", "d510.toml"] {
        assert_eq!(code(&["peak", "--spec", &m(name)]), 0, "{name}");
    }
    assert_eq!(code(&["peak", "--spec", &m("bad_version.toml")]), 2);
    assert_eq!(code(&["peak", "--spec", &m("zero_cores.toml")]), 2);

    let e5645 = m("e5645.toml");
    for name in ["sort_e5645.kv", "no_bytes.kv", "sort_d510.kv"] {
        assert_eq!(code(&["report", "--spec", &e5645, &r(name)]), 0, "{name}");
    }
    for name in ["bad_version.kv", "negative_time.kv", "absent.kv"] {
        assert_eq!(code(&["report", "--spec", &e5645, &r(name)]), 2, "{name}");
    }
    assert_eq!(
        code(&[
            "report",
            "--spec",
            &e5645,
            "--require-attained",
            &r("no_bytes.kv")
        ]),
        2
    );
    assert_eq!(
        code(&[
            "roofline",
            "--spec",
            &e5645,
            "--points",
            &r("sort_e5645.kv")
        ]),
        0
    );
    assert_eq!(
        code(&["roofline", "--spec", &e5645, "--points", &r("no_bytes.kv")]),
        2
    );
    assert_eq!(
        code(&["roofline", "--spec", &e5645, "--ceilings", "ilp,bogus"]),
        2
    );
    assert_eq!(
        code(&["roofline", "--spec", &e5645, "--ceilings", "prefetch"]),
        2
    );

    let map = c("westmere.map");
    assert_eq!(
        code(&[
            "estimate",
            "--counters",
            &c("westmere.csv"),
            "--mapping",
            &map
        ]),
        0
    );
    assert_eq!(
        code(&[
            "estimate",
            "--counters",
            &c("westmere.csv"),
            "--mapping",
            &map,
            "--profile",
            &c("avx.toml")
        ]),
        0
    );
    assert_eq!(
        code(&[
            "estimate",
            "--counters",
            &c("partial.csv"),
            "--mapping",
            &map
        ]),
        2
    );
    assert_eq!(
        code(&[
            "estimate",
            "--counters",
            &c("negative.csv"),
            "--mapping",
            &map
        ]),
        2
    );
    assert_eq!(
        code(&[
            "estimate",
            "--counters",
            &c("westmere.csv"),
            "--mapping",
            &c("westmere.csv")
        ]),
        2
    );

    assert_eq!(code(&["measure", "sort", "--n", "1"]), 2);
    assert_eq!(
        code(&["measure", "sort", "--n", "100", "--threads", "0"]),
        2
    );
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn parse_errors_carry_position() {
    let out = bops(&["count", &fixture("kernels/malformed.k")]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("malformed.k:3:19:"), "{err}");
}

#[test]
fn count_and_run_agree_on_worked_example() {
    let k = fixture("kernels/cluster_size.k");
    let s = json(&["count", &k]);
    let d = json(&["run", &k]);
    for key in ["arithmetic", "comparing", "addressing", "total"] {
        assert_eq!(s[key], d[key], "{key}");
    }
    assert_eq!(s["total"], 400);
    assert_eq!(s["exact"], true);
}

#[test]
fn estimate_output() {
    let v = json(&[
        "estimate",
        "--counters",
        &fixture("counters/westmere.csv"),
        "--mapping",
        &fixture("counters/westmere.map"),
        "--source-level",
        "133",
    ]);
    assert_eq!(v["bops"], 133);
    assert_eq!(v["approximate"], true);
    assert_eq!(v["deviation"], 0.0);
}

#[test]
fn measured_records_feed_report_and_roofline() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture("machines/e5645.toml");
    let sort_json = dir.path().join("sort.json");
    let sort_kv = dir.path().join("sort.kv");
    let timed = dir.path().join("timed.kv");
    let stream = dir.path().join("stream.kv");
    stdout(&[
        "measure",
        "sort",
        "--n",
        "20000",
        "--threads",
        "2",
        "--format",
        "json",
        "--out",
        path(&sort_json),
    ]);
    stdout(&[
        "measure",
        "sort",
        "--n",
        "20000",
        "--threads",
        "2",
        "--out",
        path(&sort_kv),
    ]);
    stdout(&[
        "measure",
        "sort",
        "--n",
        "20000",
        "--mode",
        "timing",
        "--out",
        path(&timed),
    ]);
    stdout(&[
        "--quiet",
        "measure",
        "stream",
        "--n",
        "50000",
        "--iters",
        "2",
        "--out",
        path(&stream),
    ]);
    assert!(std::fs::read_to_string(&timed)
        .unwrap()
        .contains("tally_source=copied"));

    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sort_json).unwrap()).unwrap();
    let kv = std::fs::read_to_string(&sort_kv).unwrap();
    assert!(kv.contains(&format!("addressing={}", a["tally"]["addressing"])));

    let bundle = dir.path().join("bundle.json");
    let files = [&sort_json, &sort_kv, &timed, &stream].map(|p| path(p).to_string());
    let mut args = vec!["report", "--spec", &spec, "--out", path(&bundle)];
    args.extend(files.iter().map(String::as_str));
    let text = stdout(&args);
    assert_eq!(stdout(&["report", "--bundle", path(&bundle)]), text);
    let saved = std::fs::read_to_string(&bundle).unwrap();
    assert_eq!(
        stdout(&["--json", "report", "--bundle", path(&bundle)]),
        saved
    );

    let svg = dir.path().join("r.svg");
    let mut args = vec![
        "roofline",
        "--spec",
        &spec,
        "--ceilings",
        "ilp,simd",
        "--out",
        path(&svg),
        "--points",
    ];
    args.extend(files.iter().map(String::as_str));
    stdout(&args);
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(svg_text.matches("class=\"point\"").count(), 4);
}

#[test]
fn corrupted_bundle_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("b.json");
    stdout(&[
        "report",
        "--spec",
        &fixture("machines/e5645.toml"),
        "--out",
        path(&bundle),
        &fixture("measurements/sort_e5645.kv"),
    ]);
    let text = std::fs::read_to_string(&bundle).unwrap();
    let tampered = text.replacen("\"real_bops\": 2", "\"real_bops\": 3", 1);
    assert_ne!(tampered, text);
    std::fs::write(&bundle, tampered).unwrap();
    assert_eq!(code(&["report", "--bundle", path(&bundle)]), 2);
}

#[test]
fn roofline_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture("machines/e5645.toml");
    let point = fixture("measurements/sort_e5645.kv");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let svg = dir.path().join(format!("{run}.svg"));
        let csv = dir.path().join(format!("{run}.csv"));
        stdout(&[
            "roofline",
            "--spec",
            &spec,
            "--ceilings",
            "ilp,simd,prefetch=13.2e9",
            "--out",
            path(&svg),
            "--csv",
            path(&csv),
            "--points",
            &point,
        ]);
        outputs.push((std::fs::read(&svg).unwrap(), std::fs::read(&csv).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn quiet_suppresses_warnings() {
    let k = fixture("kernels/threshold.k");
    assert!(!bops(&["count", &k]).stderr.is_empty());
    assert!(bops(&["--quiet", "count", &k]).stderr.is_empty());
}
