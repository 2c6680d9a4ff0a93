use std::path::Path;
use std::process::{Command, Output};

fn nlphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlphase"))
        .args(args)
        .output()
        .expect("spawn nlphase")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header and data rows of a CSV document, metadata stripped.
fn records(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn meta(text: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix).map(String::from))
}

#[test]
fn fringe_default_grid_with_oracle() {
    let o = nlphase(&["fringe", "--n", "20", "--with-oracle"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (header, rows) = records(&text);
    assert_eq!(
        header,
        [
            "N",
            "phi",
            "raw_mean",
            "normalized_mean",
            "oracle_mean",
            "oracle_normalized_mean",
            "deviation"
        ]
    );
    assert_eq!(rows.len(), 2001);
    let phi = column(&header, &rows, "phi");
    let normalized = column(&header, &rows, "normalized_mean");
    assert_eq!(phi[1000], 0.0);
    assert_eq!(normalized[1000], -1.0);
    let deviation = column(&header, &rows, "deviation");
    assert!(deviation.iter().all(|&d| d < 1e-8));
    let max: f64 = meta(&text, "max_deviation").unwrap().parse().unwrap();
    assert!(max < 1e-8);
    assert_eq!(meta(&text, "n_max").unwrap(), "20=72");
}

#[test]
fn fringe_rows_per_intensity() {
    let o = nlphase(&[
        "fringe",
        "--n-range",
        "5:15:5",
        "--phi-range",
        "-pi/4:pi/4:11",
    ]);
    assert!(o.status.success());
    let (header, rows) = records(&stdout(&o));
    assert_eq!(header.len(), 4);
    assert_eq!(rows.len(), 33);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = nlphase(&[
            "sensitivity",
            "--n-range",
            "1:12:1",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sensitivity_reference_columns() {
    let (header, rows) = records(&stdout(&nlphase(&["sensitivity", "--n", "20"])));
    let delta = column(&header, &rows, "delta_phi")[0];
    let bound = column(&header, &rows, "qcrb")[0];
    assert!((delta - 0.011180).abs() < 1e-6);
    assert!((bound - 1.0 / 8600f64.sqrt()).abs() < 1e-12);
    assert!((column(&header, &rows, "heisenberg_limit")[0] - 0.05).abs() < 1e-15);
    assert!((column(&header, &rows, "theta_star")[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-4);
}

#[test]
fn sensitivity_oracle_columns() {
    let text = stdout(&nlphase(&[
        "sensitivity",
        "--n-range",
        "2:6:2",
        "--with-oracle",
    ]));
    let (header, rows) = records(&text);
    let d = column(&header, &rows, "deviation");
    assert_eq!(d.len(), 3);
    assert!(d.iter().all(|&x| x < 1e-6));
}

#[test]
fn lossy_sensitivity_after_phase() {
    let (header, rows) = records(&stdout(&nlphase(&[
        "sensitivity",
        "--n",
        "20",
        "--loss-T",
        "0.5",
        "--loss-placement",
        "after",
    ])));
    let delta = column(&header, &rows, "delta_phi")[0];
    assert!((delta - 1.0 / (0.5f64.sqrt() * 20f64.powf(1.5))).abs() < 1e-9);
}

#[test]
fn loss_bound_and_fisher_ratio_values() {
    let (header, rows) = records(&stdout(&nlphase(&["loss-bound", "--n", "20"])));
    assert!((column(&header, &rows, "allowable_max_loss")[0] - 0.6316).abs() < 1e-4);

    let (header, rows) = records(&stdout(&nlphase(&["fisher-ratio", "--n", "100"])));
    assert!((column(&header, &rows, "fisher_ratio")[0] - 0.98522).abs() < 1e-5);

    let (header, rows) = records(&stdout(&nlphase(&[
        "fisher-ratio",
        "--n",
        "10",
        "--with-oracle",
    ])));
    assert!(column(&header, &rows, "deviation")[0] < 1e-6);
}

#[test]
fn visibility_sweep() {
    let (header, rows) = records(&stdout(&nlphase(&["visibility", "--n-range", "5:20:5"])));
    let v = column(&header, &rows, "visibility");
    assert!(v.windows(2).all(|w| w[1] > w[0]));
    assert!((v[3] - 0.8934).abs() < 1e-4);
}

#[test]
fn json_output() {
    let o = nlphase(&["fisher-ratio", "--n-range", "1:3:1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["meta"]["command"], "fisher-ratio");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["N"], 1.0);
    assert!((rows[2]["fisher_ratio"].as_f64().unwrap() - 3.0 / 4.5).abs() < 1e-11);
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    write(
        &cfg,
        "n_range = \"4:8:4\"\nphi_range = \"0:pi/4:3\"\ntheta = \"pi/2\"\nformat = \"json\"\n",
    );

    let o = nlphase(&["fringe", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);

    let o = nlphase(&[
        "fringe",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--n",
        "9",
    ]);
    let (header, rows) = records(&stdout(&o));
    assert_eq!(rows.len(), 3);
    assert_eq!(column(&header, &rows, "N"), vec![9.0; 3]);
    assert!((column(&header, &rows, "raw_mean")[0] + 3.0).abs() < 1e-10);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    write(&cfg, "n = 3\nphi_rnage = \"0:1:3\"\n");
    let o = nlphase(&["fringe", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("phi_rnage") && err.contains("line 2"), "{err}");

    for args in [
        vec!["fringe", "--n", "0"],
        vec!["fringe", "--phi-range", "1:0:5"],
        vec!["fringe", "--n", "3", "--n-range", "1:2:1"],
        vec!["sensitivity", "--loss-T", "0.5"],
        vec![
            "sensitivity",
            "--loss-T",
            "1.5",
            "--loss-placement",
            "before",
        ],
        vec!["fringe", "--format", "xml"],
        vec!["loss-bound", "--n", "0.5"],
    ] {
        assert_eq!(nlphase(&args).status.code(), Some(2), "{args:?}");
    }
}
