use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bumpmoment::formats;
use bumpmoment::measures::Moments;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bumpmoment"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const TWO_ATOMS: &str =
    r#"{"atoms":[{"point":[0,0.5],"weight":0.5},{"point":[0.25,0],"weight":0.5}]}"#;
const LEFT_ATOM: &str = r#"{"atoms":[{"point":[-0.5,0],"weight":1}]}"#;

fn sequence_values(text: &str) -> Vec<(Vec<u64>, f64)> {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    v["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let exp = r["exp"]
                .as_array()
                .unwrap()
                .iter()
                .map(|e| e.as_u64().unwrap())
                .collect();
            (exp, r["val"].as_f64().unwrap())
        })
        .collect()
}

#[test]
fn moments_of_single_atom() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "mu.json",
        r#"{"atoms":[{"point":[1,2],"weight":3}]}"#,
    );
    let o = run(
        &["moments", "--measure", "mu.json", "--order", "2"],
        dir.path(),
    );
    assert!(o.status.success());
    let vals = sequence_values(&stdout(&o));
    let expected = [
        (vec![0, 0], 3.0),
        (vec![1, 0], 3.0),
        (vec![0, 1], 6.0),
        (vec![2, 0], 3.0),
        (vec![1, 1], 6.0),
        (vec![0, 2], 12.0),
    ];
    assert_eq!(vals, expected);
}

#[test]
fn moments_of_curve_segment() {
    let dir = TempDir::new().unwrap();
    // Lebesgue measure on {0} x [-1, 1]
    write(
        dir.path(),
        "mu.json",
        r#"{"curves":[{"param":[[],[{"exp":[1],"coef":1}]],"t0":-1,"t1":1,"density":[{"exp":[0],"coef":1}]}]}"#,
    );
    let o = run(
        &["moments", "--measure", "mu.json", "--order", "4"],
        dir.path(),
    );
    assert!(o.status.success());
    for (exp, v) in sequence_values(&stdout(&o)) {
        let want = if exp[0] > 0 || exp[1] % 2 == 1 {
            0.0
        } else {
            2.0 / (exp[1] as f64 + 1.0)
        };
        assert!((v - want).abs() < 1e-15, "{exp:?}: {v}");
    }
}

#[test]
fn moments_output_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"atoms":[{"point":[0.1,0.7],"weight":0.3},{"point":[0.333333333333,-0.2],"weight":1.7}],
        "curves":[{"param":[[{"exp":[1],"coef":1}],[{"exp":[2],"coef":1}]],"t0":0,"t1":0.3,"density":[{"exp":[0],"coef":1}]}]}"#;
    write(dir.path(), "mu.json", text);
    let o = run(
        &[
            "moments",
            "--measure",
            "mu.json",
            "--order",
            "6",
            "--out",
            "s.json",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let written =
        formats::sequence_from_json(&fs::read_to_string(dir.path().join("s.json")).unwrap())
            .unwrap();
    let in_memory = formats::measure_from_json(text)
        .unwrap()
        .moments(6)
        .unwrap();
    assert_eq!(written.order(), 6);
    for (a, b) in written.values().iter().zip(in_memory.values()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "good.json", TWO_ATOMS);
    write(dir.path(), "bad.json", LEFT_ATOM);
    assert!(run(
        &[
            "moments",
            "--measure",
            "good.json",
            "--order",
            "4",
            "--out",
            "g.json"
        ],
        dir.path()
    )
    .status
    .success());
    assert!(run(
        &[
            "moments",
            "--measure",
            "bad.json",
            "--order",
            "4",
            "--out",
            "b.json"
        ],
        dir.path()
    )
    .status
    .success());

    let ok = run(
        &["certify", "--sequence", "g.json", "--catalog", "half-disk"],
        dir.path(),
    );
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout(&ok);
    assert!(
        text.starts_with("certificate satisfied at order 4"),
        "{text}"
    );
    assert!(text.contains("curve hypotheses vetted"));

    let bad = run(
        &["certify", "--sequence", "b.json", "--catalog", "half-disk"],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(1));
    let text = stdout(&bad);
    let qr = text.lines().find(|l| l.starts_with("q*r1")).unwrap();
    assert!(qr.contains("-3.750000e-1") && qr.contains("FAIL"), "{qr}");
    assert!(text.contains("refuted by f"));

    // a single on-curve atom at order 1: q*r1 needs order 3
    write(
        dir.path(),
        "short.json",
        r#"{"dim":2,"order":1,"values":[{"exp":[0,0],"val":1},{"exp":[1,0],"val":0},{"exp":[0,1],"val":0.5}]}"#,
    );
    let short = run(
        &[
            "certify",
            "--sequence",
            "short.json",
            "--catalog",
            "half-disk",
        ],
        dir.path(),
    );
    assert_eq!(short.status.code(), Some(2), "{}", stdout(&short));
}

#[test]
fn scenario_file_is_user_asserted() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "good.json", TWO_ATOMS);
    run(
        &[
            "moments",
            "--measure",
            "good.json",
            "--order",
            "4",
            "--out",
            "g.json",
        ],
        dir.path(),
    );
    let show = run(&["catalog", "show", "half-disk"], dir.path());
    write(dir.path(), "scenario.json", &stdout(&show));
    let o = run(
        &[
            "certify",
            "--sequence",
            "g.json",
            "--scenario-file",
            "scenario.json",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("curve hypotheses asserted by user"));

    let both = run(
        &[
            "certify",
            "--sequence",
            "g.json",
            "--scenario-file",
            "scenario.json",
            "--catalog",
            "half-disk",
        ],
        dir.path(),
    );
    assert!(!both.status.success());
    let neither = run(&["certify", "--sequence", "g.json"], dir.path());
    assert!(!neither.status.success());
}

#[test]
fn malformed_inputs_fail_with_message() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "dup.json",
        r#"[{"exp":[1,0],"coef":1},{"exp":[1,0],"coef":1}]"#,
    );
    let o = run(
        &[
            "sos",
            "--poly",
            "dup.json",
            "--catalog",
            "half-disk",
            "--degree-bound",
            "2",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = run(
        &["moments", "--measure", "missing.json", "--order", "2"],
        dir.path(),
    );
    assert!(!o.status.success());
    let o = run(
        &["certify", "--sequence", "missing.json", "--catalog", "nope"],
        dir.path(),
    );
    assert!(!o.status.success());
}

#[test]
fn decompose_writes_parts() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "mu.json", TWO_ATOMS);
    let o = run(
        &[
            "decompose",
            "--measure",
            "mu.json",
            "--order",
            "4",
            "--catalog",
            "half-disk",
            "--out-dir",
            "out",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let nu: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/nu.json")).unwrap()).unwrap();
    let atoms = nu["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 1);
    assert_eq!(atoms[0]["weight"].as_f64().unwrap(), 0.125);
    let sigma: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/sigma.json")).unwrap())
            .unwrap();
    assert_eq!(sigma["atoms"][0]["point"][1].as_f64().unwrap(), 0.5);
    assert!(dir.path().join("out/lambda.json").exists());

    let bad = dir.path().join("bad.json");
    fs::write(&bad, LEFT_ATOM).unwrap();
    let o = run(
        &[
            "decompose",
            "--measure",
            "bad.json",
            "--catalog",
            "half-disk",
            "--out-dir",
            "out2",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("support audit"));
}

#[test]
fn decompose_raw_sequence() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "mu.json", TWO_ATOMS);
    run(
        &[
            "moments",
            "--measure",
            "mu.json",
            "--order",
            "4",
            "--out",
            "l.json",
        ],
        dir.path(),
    );
    write(
        dir.path(),
        "nu.json",
        r#"{"atoms":[{"point":[0.25,0],"weight":0.125}]}"#,
    );
    let o = run(
        &[
            "decompose",
            "--sequence",
            "l.json",
            "--nu",
            "nu.json",
            "--catalog",
            "half-disk",
            "--out-dir",
            "out",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("only the Lambda checks are meaningful"));
}

#[test]
fn sos_finds_and_writes_certificate() {
    let dir = TempDir::new().unwrap();
    // q*r1 = x1 - x1^3 - x1 x2^2
    write(
        dir.path(),
        "p.json",
        r#"[{"exp":[1,0],"coef":1},{"exp":[3,0],"coef":-1},{"exp":[1,2],"coef":-1}]"#,
    );
    let o = run(
        &[
            "sos",
            "--poly",
            "p.json",
            "--catalog",
            "half-disk",
            "--degree-bound",
            "3",
            "--out",
            "c.json",
            "--seed",
            "7",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let cert: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert!(cert["residual"].as_f64().unwrap() <= 1e-6);
    assert!(String::from_utf8_lossy(&o.stderr).contains("verified: true"));

    write(dir.path(), "neg.json", r#"[{"exp":[0,0],"coef":-1}]"#);
    let o = run(
        &[
            "sos",
            "--poly",
            "neg.json",
            "--catalog",
            "half-disk",
            "--degree-bound",
            "2",
            "--max-iters",
            "200",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn support_points_csv() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &[
            "support-points",
            "--catalog",
            "half-disk",
            "--grid-step",
            "0.25",
            "--bbox=-1.5,1.5",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,label"));
    let rows: Vec<(f64, f64, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].to_string(),
            )
        })
        .collect();
    assert_eq!(rows.len(), 169);
    assert!(rows.iter().filter(|r| r.0 == 0.0).all(|r| r.2 == "curve"));
    assert!(rows
        .iter()
        .any(|r| (r.0, r.1) == (0.25, 0.0) && r.2 == "bump"));
    assert!(rows
        .iter()
        .any(|r| (r.0, r.1) == (-0.5, 0.0) && r.2 == "outside"));

    let o = run(
        &[
            "support-points",
            "--catalog",
            "fig2",
            "--grid-step",
            "0.5",
            "--bbox=-1,1",
        ],
        dir.path(),
    );
    assert!(stdout(&o).lines().any(|l| l == "0,0,curve"));

    let o = run(
        &[
            "support-points",
            "--catalog",
            "half-disk",
            "--bbox=1,1",
            "--grid-step",
            "0.1",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
}

#[test]
fn catalog_list_names_all_entries() {
    let dir = TempDir::new().unwrap();
    let o = run(&["catalog", "list"], dir.path());
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(names, ["half-disk", "fig1", "fig2"]);
}
