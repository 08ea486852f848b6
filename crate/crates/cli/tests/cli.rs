use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use randbeam_cli::{figure_catalog, FigureId};

const METHODS: [&str; 4] = ["closed_form", "quadrature", "approximation", "monte_carlo"];

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randbeam"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("RANDBEAM_CACHE_DIR", dir.join("cache"))
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let o = run(dir, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn fig2_layout_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(a.path(), &["figure", "fig2"]);
    ok(b.path(), &["figure", "fig2"]);
    let body_a = fs::read(a.path().join("fig2.csv")).unwrap();
    assert_eq!(body_a, fs::read(b.path().join("fig2.csv")).unwrap());

    let (h, rows) = read_csv(&a.path().join("fig2.csv"));
    assert_eq!(&h[..5], ["K", "M", "rho_dB", "exact_rate", "approx_rate"]);
    assert_eq!(rows.len(), 50 * 2 * 3);
    let ks: Vec<u32> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(*ks.iter().min().unwrap(), 1);
    assert_eq!(*ks.iter().max().unwrap(), 50);
    for r in &rows {
        assert!(METHODS.contains(&r[column(&h, "exact_method")].as_str()));
        assert_eq!(r[column(&h, "approx_method")], "approximation");
    }

    let meta: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("fig2.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 1);
    assert_eq!(meta["version"], "v0.1.0");
    assert!(meta["tolerances"]["quadrature_rel_tol"].is_number());
    assert_eq!(meta["rows"], 300);
}

#[test]
fn fig6_columns() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["figure", "fig6"]);
    let (h, rows) = read_csv(&d.path().join("fig6.csv"));
    assert_eq!(&h[..4], ["x", "cdf_w", "cdf_tail_equivalent", "L"]);
    let mut depths: Vec<String> = rows.iter().map(|r| r[3].clone()).collect();
    depths.dedup();
    assert_eq!(depths, ["1", "2", "4", "10"]);
    for r in &rows {
        let w: f64 = r[1].parse().unwrap();
        assert!((0.0..=1.0).contains(&w));
    }
}

#[test]
fn fig1_seeded_monte_carlo() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    ok(a.path(), &["figure", "fig1", "--drops", "20000", "--seed", "5"]);
    ok(b.path(), &["figure", "fig1", "--drops", "20000", "--seed", "5"]);
    ok(c.path(), &["figure", "fig1", "--drops", "20000", "--seed", "6"]);
    let body = |d: &Path| fs::read(d.join("fig1.csv")).unwrap();
    assert_eq!(body(a.path()), body(b.path()));
    assert_ne!(body(a.path()), body(c.path()));
    let (h, rows) = read_csv(&a.path().join("fig1.csv"));
    let (emp, exact) = (column(&h, "empirical_cdf_y"), column(&h, "exact_cdf_y"));
    let worst = rows
        .iter()
        .map(|r| (r[emp].parse::<f64>().unwrap() - r[exact].parse::<f64>().unwrap()).abs())
        .fold(0.0, f64::max);
    // Two-sided 99.9% KS band for 20000 draws is about 0.0138.
    assert!(worst < 0.0138, "empirical vs exact {worst}");
}

#[test]
fn fig4_and_fig5_populate_the_cache() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["figure", "fig4"]);
    ok(d.path(), &["figure", "fig5"]);
    assert!(d.path().join("cache/xi-table.json").exists());
    let (h, rows) = read_csv(&d.path().join("fig5.csv"));
    assert_eq!(rows.len(), 4 * 21);
    assert!(rows.iter().all(|r| r[column(&h, "K")] == "20"));
    let (_, rows4) = read_csv(&d.path().join("fig4.csv"));
    assert_eq!(rows4.len(), 4 * 30);
}

#[test]
fn rate_table_from_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("grid.toml");
    fs::write(
        &cfg,
        r#"
name = "small"
[grid]
k = [1, 5]
m = [2]
rho_db = [10.0]
n = 4
l = [1, 4]
schemes = ["full", "spatial", "best-l"]
"#,
    )
    .unwrap();
    ok(d.path(), &["rate-table", "--config", cfg.to_str().unwrap()]);
    let (h, rows) = read_csv(&d.path().join("rate_table.csv"));
    assert_eq!(
        h,
        ["metric", "scheme", "method", "K", "M", "N", "L", "rho_dB", "user_id", "value", "stderr"]
    );
    // full: 2, spatial: 2 x 2, best-L: 2 depths x 2 K x 2
    assert_eq!(rows.len(), 2 + 4 + 8);
    assert!(rows.iter().all(|r| METHODS.contains(&r[2].as_str())));
    // L = N reproduces the spatial rate.
    let value = |scheme: &str, l: &str, k: &str| -> f64 {
        rows.iter()
            .find(|r| r[1] == scheme && r[6] == l && r[3] == k && r[2] != "approximation")
            .unwrap()[9]
            .parse()
            .unwrap()
    };
    let (bl, sp) = (value("best_l", "4", "5"), value("spatial", "1", "5"));
    assert!((bl - sp).abs() <= 1e-9 * sp, "{bl} vs {sp}");
}

#[test]
fn simulate_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--drops", "2000", "--seed", "11"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    let body = |d: &Path| fs::read(d.join("simulate.csv")).unwrap();
    assert_eq!(body(a.path()), body(b.path()));
    let (_, rows) = read_csv(&a.path().join("simulate.csv"));
    assert!(rows.iter().any(|r| r[0] == "sum_rate" && r[2] == "monte_carlo"));
    assert!(rows.iter().any(|r| r[0] == "individual_sum_rate" && r[2] == "quadrature"));
    assert!(rows.iter().all(|r| METHODS.contains(&r[2].as_str())));
}

#[test]
fn heterogeneous_simulation() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("sys.toml");
    fs::write(
        &cfg,
        r#"
[system]
m = 2
k = 3
rho_db = [0.0, 10.0, 20.0]
scheme = "full"
scheduler = "greedy"
drops = 1000
"#,
    )
    .unwrap();
    ok(d.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    let (_, rows) = read_csv(&d.path().join("simulate.csv"));
    let freq: Vec<f64> = rows
        .iter()
        .filter(|r| r[0] == "selection_frequency")
        .map(|r| r[9].parse().unwrap())
        .collect();
    // Greedy favours the strong user.
    assert!(freq[2] > freq[0]);
    // No analytic rows for mixed SNRs.
    assert!(rows.iter().all(|r| r[2] == "monte_carlo"));
}

#[test]
fn configuration_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.toml");
    fs::write(&bad, "[grid]\nk = []\nm = [2]\nrho_db = [0.0]\nschemes = [\"full\"]\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["rate-table", "--config", bad.to_str().unwrap()],
        vec!["figure", "fig3"],
        vec!["validate", "--tol", "1e-6"],
        vec!["rate-table", "--tol", "-1"],
        vec!["simulate", "--config", "/nonexistent/file.toml"],
    ];
    for args in cases {
        let o = run(d.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn scaling_small_grid() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("scale.toml");
    fs::write(
        &cfg,
        r#"
[grid]
k = [20, 200]
m = [2]
rho_db = [10.0]
schemes = ["spatial"]
drops = 200
"#,
    )
    .unwrap();
    ok(d.path(), &["scaling", "--config", cfg.to_str().unwrap()]);
    let (_, rows) = read_csv(&d.path().join("scaling.csv"));
    let ks: Vec<&Vec<String>> = rows.iter().filter(|r| r[0].starts_with("gumbel_ks_")).collect();
    assert_eq!(ks.len(), 2 * 3);
    assert!(ks.iter().all(|r| r[2] == "monte_carlo"));
    let ratios = rows.iter().filter(|r| r[0] == "scaling_ratio").count();
    assert_eq!(ratios, 2 * 2);
}

#[test]
fn catalog_is_complete() {
    let ids: Vec<FigureId> = figure_catalog().iter().map(|s| s.id).collect();
    assert_eq!(ids, FigureId::ALL);
}
