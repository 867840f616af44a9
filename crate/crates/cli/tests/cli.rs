use std::process::{Command, Output};

use fermipair::{classify, CouplingPair};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermipair"))
        .args(args)
        .env_remove("FERMIPAIR_GRID_N")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn classify_origin() {
    let v = json(&run(&["classify", "--lambda", "0", "--mu", "0"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["result"]["region"], "C00");
    assert_eq!(v["result"]["expected"], "0|0");
}

#[test]
fn constants_json() {
    let v = json(&run(&["constants"]));
    let mu0p = v["result"]["mu0_plus"].as_f64().unwrap();
    assert!((mu0p + 2.0623).abs() < 5e-4);
    // C^- vanishes at (0, mu0+) through its coefficients
    let c = &v["result"]["c_minus"];
    let f = |k: &str| c[k].as_f64().unwrap();
    let val = f("c0") + f("c_mu") * mu0p + f("c_mu2") * mu0p * mu0p;
    assert!(val.abs() < 1e-12);
}

#[test]
fn spectrum_of_deep_attraction() {
    let v = json(&run(&[
        "spectrum", "--lambda", "-30", "--mu", "-20", "--grid-n", "64",
    ]));
    let r = &v["result"];
    assert_eq!(r["n_below"], 6);
    assert_eq!(r["n_above"], 0);
    let eigs = r["eigenvalues"].as_array().unwrap();
    assert_eq!(eigs.len(), 3);
    assert!(eigs
        .iter()
        .all(|e| e["multiplicity"] == 2 && e["side"] == "below"));
}

#[test]
fn spectrum_csv_has_header() {
    let out = run(&[
        "spectrum", "--lambda", "30", "--mu", "20", "--format", "csv", "--grid-n", "64",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z,side,multiplicity"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["classify", "--lambda", "x", "--mu", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["classify", "--mu", "0"]).status.code(), Some(2));
    assert_eq!(
        run(&["classify", "--lambda", "nan", "--mu", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["spectrum", "--lambda", "1", "--mu", "1", "--grid-n", "7"])
            .status
            .code(),
        Some(2)
    );
    let pi = std::f64::consts::PI.to_string();
    let degenerate = run(&[
        "spectrum", "--lambda", "1", "--mu", "1", "--k1", &pi, "--k2", &pi,
    ]);
    assert_eq!(degenerate.status.code(), Some(3));
    assert_eq!(run(&["verify", "--only", "4"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--only", "1,3"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--only", "11"]).status.code(), Some(2));
}

#[test]
fn grid_size_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_fermipair"))
        .args(["spectrum", "--lambda", "1", "--mu", "1"])
        .env("FERMIPAIR_GRID_N", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn curves_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("curves.csv");
    let svg_path = dir.path().join("curves.svg");
    let out = run(&[
        "curves",
        "--samples",
        "201",
        "--output",
        csv_path.to_str().unwrap(),
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["side", "branch", "mu", "lambda"]
    );
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let mu: f64 = rec[2].parse().unwrap();
        let lambda: f64 = rec[3].parse().unwrap();
        assert!(classify(CouplingPair { lambda, mu }).on_boundary);
        n += 1;
    }
    assert!(n > 300);
    let svg = std::fs::read_to_string(svg_path).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn sweep_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--lambda-steps",
        "9",
        "--mu-steps",
        "7",
        "--threads",
        "2",
        "--grid-n",
        "64",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["lambda", "mu", "region", "n_below", "n_above"]
    );
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let lambda: f64 = rec[0].parse().unwrap();
        let mu: f64 = rec[1].parse().unwrap();
        let label = classify(CouplingPair { lambda, mu });
        assert_eq!(label.name(), &rec[2]);
        if !label.on_boundary {
            assert_eq!(rec[3].parse::<u32>().unwrap(), label.expected_n_below);
            assert_eq!(rec[4].parse::<u32>().unwrap(), label.expected_n_above);
        }
        rows += 1;
    }
    assert_eq!(rows, 63);
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let args = |t: &'static str| {
        run(&[
            "sweep",
            "--lambda-steps",
            "5",
            "--mu-steps",
            "4",
            "--grid-n",
            "64",
            "--threads",
            t,
        ])
        .stdout
    };
    assert_eq!(args("1"), args("3"));
}
