use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn motive(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motive"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("motive runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const FAST: &str = r#"
[cavity]
plate1 = { model = "constant", eps_re = -6.0, eps_im = 0.8 }
plate2 = { model = "constant", eps_re = -3.0, eps_im = 0.5 }
t1 = 300.0
t2 = 270.0
d = 1e-7

[scan]
d_min = 1e-7
d_max = 1e-6
points_per_decade = 1

[spectrum]
omega_min_ev = 0.01
omega_max_ev = 0.2
points = 8

[quadrature]
rel_tol = 1e-3
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
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

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn manifest(out: &Path) -> serde_json::Value {
    let mut p = out.as_os_str().to_os_string();
    p.push(".manifest.json");
    let text = std::fs::read_to_string(PathBuf::from(p)).expect("manifest written next to output");
    serde_json::from_str(&text).unwrap()
}

#[test]
fn selftest_passes_with_stable_hash() {
    let dir = tempfile::tempdir().unwrap();
    let a = motive(dir.path(), &["selftest"]);
    let b = motive(dir.path(), &["selftest"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("report sha256"));
}

#[test]
fn selftest_reports_corrupted_constants() {
    let dir = tempfile::tempdir().unwrap();
    let o = motive(dir.path(), &["selftest", "--corrupt-constants"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL Fresnel oracle"));
}

#[test]
fn engine_preset_summary_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("engine.csv");
    let o = motive(dir.path(), &["engine", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    let s = &m["summary"];
    let ratio = s["eta_mp_over_eta_c"].as_f64().unwrap();
    assert!((ratio - 1.0 / 14.0).abs() < 1e-12, "{ratio}");
    let v_mp = s["v_mp"].as_f64().unwrap();

    let (h, rows) = read_csv(&out);
    let v = column(&h, &rows, "v_m_s");
    let p = column(&h, &rows, "power_per_area_w_m2");
    let eta = column(&h, &rows, "efficiency_over_carnot");
    let imax = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    assert!(((v[imax] - v_mp) / v_mp).abs() < 1e-12);
    for i in 0..p.len() {
        if p[i] > 0.0 {
            assert!(eta[i] <= 1.0);
        }
    }
}

#[test]
fn engine_without_nonreciprocity_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.toml",
        "[engine]\nalpha = 0.0\nr_n = 1e-3\nomega_bar_ev = 0.1\nim_r1 = 1e-3\nt1 = 300.0\ndt = 30.0\nd = 1e-8\n",
    );
    let o = motive(dir.path(), &["engine", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha = 0"));
}

#[test]
fn scan_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fast.toml", FAST);
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = motive(
            dir.path(),
            &["scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a.csv", "1"), run("b.csv", "2"));
    let (ba, bb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ba, bb);

    let m = manifest(&a);
    assert_eq!(m["rows"], 2);
    assert_eq!(m["failed_rows"], 0);
    assert!(m["constants"]["c_m_s"].as_f64().unwrap() > 2.9e8);
    assert!(m["conventions"]["time_dependence"].is_string());
    let sha = m["output_sha256"].as_str().unwrap();
    assert_eq!(sha.len(), 64);

    // Identical plates of a reciprocal material carry no lateral force.
    let (h, rows) = read_csv(&a);
    assert!(column(&h, &rows, "force_per_area_n_m2").iter().all(|&f| f == 0.0));
    assert!(column(&h, &rows, "force_asymptote").iter().all(|&f| f == 0.0));
    let heat = column(&h, &rows, "heat_per_area_w_m2");
    assert!(heat[0] > heat[1] && heat[1] > 0.0);
    let d = column(&h, &rows, "d_m");
    assert_eq!(d, vec![1e-7, 1e-6]);
}

#[test]
fn spectrum_at_equal_temperatures_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "eq.toml", &FAST.replace("t2 = 270.0", "t2 = 300.0"));
    let out = dir.path().join("spec.csv");
    let o = motive(
        dir.path(),
        &["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    assert_eq!(rows.len(), 8);
    assert!(column(&h, &rows, "f_n_s_m2").iter().all(|&x| x == 0.0));
    assert!(column(&h, &rows, "h_j_m2").iter().all(|&x| x == 0.0));
    manifest(&out);
}

#[test]
fn spectrum_columns_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fast.toml", FAST);
    let out = dir.path().join("spec.csv");
    let o = motive(
        dir.path(),
        &["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--rel-tol", "1e-5"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&out);
    let e = column(&h, &rows, "omega_ev");
    assert_eq!(e[0], 0.01);
    assert_eq!(*e.last().unwrap(), 0.2);
    assert!(column(&h, &rows, "h_j_m2").iter().all(|&x| x > 0.0));
    assert!(column(&h, &rows, "bound_lhs_normalized").iter().all(|&x| x == 0.0));
    let m = manifest(&out);
    assert_eq!(m["config"]["quadrature"]["rel_tol"].as_f64(), Some(1e-5));
}

#[test]
fn unconverged_points_give_numerical_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &format!("{FAST}max_subdivisions = 1\n"));
    let out = dir.path().join("bad.csv");
    let o = motive(
        dir.path(),
        &["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["failed_rows"], 8);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fast.toml", FAST);
    let broken = write_config(dir.path(), "broken.toml", "[cavity\n");
    let c = cfg.to_str().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["scan", "--config", c, "--preset", "fig3"],
        vec!["scan", "--config", "missing.toml"],
        vec!["scan", "--config", broken.to_str().unwrap()],
        vec!["scan", "--preset", "nope"],
        vec!["scan", "--config", c, "--workers", "0"],
        vec!["scan", "--config", c, "--rel-tol", "-1"],
        vec!["engine", "--config", c],
    ] {
        let o = motive(dir.path(), &args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&motive(dir.path(), &["--help"])), 0);
}
