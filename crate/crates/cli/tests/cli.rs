use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ccforms")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    Command::new(bin())
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"kappa\": 0,\n  \"grid\": {\"n_eps\": 2,,}\n}");
    let out = run("surface", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn unknown_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kappa": 0, "surfce": {}}"#);
    let out = run("verify", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surfce"));
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", &dir.path().join("absent.json"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn two_by_two_grid_gives_four_vertices_and_two_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kappa": 0, "surface": {"kind": "helicoid", "lambda": 0.0, "sigma": {"kind": "linear", "slope": 1.0}},
            "grid": {"eps_range": [-1, 1], "s_range": [-1, 1], "n_eps": 2, "n_s": 2}}"#,
    );
    let out = run("surface", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (models, _) = tobj::load_obj(dir.path().join("surface.obj"), &tobj::LoadOptions::default()).unwrap();
    let mesh = &models[0].mesh;
    assert_eq!(mesh.positions.len(), 4 * 3);
    assert_eq!(mesh.indices.len(), 2 * 3);
    assert!(mesh.indices.iter().all(|&i| i < 4));
}

#[test]
fn meshes_load_in_a_reference_reader() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["sphere", "strip_heisenberg", "pole_plane_hyperbolic", "bernstein"] {
        let out_dir = dir.path().join(name);
        let out = run("surface", &configs().join(format!("{name}.json")), &out_dir);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let opts = tobj::LoadOptions { triangulate: false, ..Default::default() };
        let (models, _) = tobj::load_obj(out_dir.join("surface.obj"), &opts).unwrap();
        let mesh = &models[0].mesh;
        let n = mesh.positions.len() / 3;
        assert!(mesh.indices.iter().all(|&i| (i as usize) < n), "{name}");
        assert!(mesh.positions.iter().all(|x| x.is_finite()));
        let (_, rows) = read_csv(&out_dir.join("surface.csv"));
        assert_eq!(rows.len(), n);
    }
}

#[test]
fn csv_header_is_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("surface", &configs().join("helicoid_strictly_stable.json"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.path().join("surface.csv"));
    assert_eq!(header, ["eps", "s", "c1", "c2", "c3", "c4", "nh", "nt", "h_numeric", "q", "l_nh", "singular", "vertical"]);
    assert!(rows.iter().all(|r| r[5].is_empty()));
    let text = std::fs::read_to_string(dir.path().join("surface.csv")).unwrap();
    assert!(!text.contains('\r'));
}

#[test]
fn heisenberg_helicoid_vertices_satisfy_implicit_equation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kappa": 0, "surface": {"kind": "helicoid", "lambda": 0.0, "sigma": {"kind": "linear", "offset": 0.3, "slope": 0.7}},
            "grid": {"eps_range": [-1.5, 1.5], "s_range": [-3, 3], "n_eps": 11, "n_s": 13}}"#,
    );
    assert_eq!(run("surface", &cfg, dir.path()).status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("surface.csv"));
    for r in rows {
        let (x, y, t) = (num(&r[2]), num(&r[3]), num(&r[4]));
        let sigma = 0.3 + 0.7 * t;
        assert!((x * sigma.sin() - y * sigma.cos()).abs() < 1e-8);
    }
}

#[test]
fn sphere_has_poles_at_both_ends() {
    let dir = tempfile::tempdir().unwrap();
    let end = 2.0 * std::f64::consts::PI / 8f64.sqrt();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"kappa": 1, "surface": {{"kind": "sphere", "lambda": 1.0}}, "projection": false,
                "grid": {{"eps_range": [0, 6], "s_range": [0, {end}], "n_eps": 5, "n_s": 9}}}}"#
        ),
    );
    let out = run("surface", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&dir.path().join("surface.csv"));
    for r in &rows {
        let s = num(&r[1]);
        let at_pole = s == 0.0 || (s - end).abs() < 1e-12;
        assert_eq!(r[11] == "true", at_pole, "s = {s}");
        let n2: f64 = (2..6).map(|i| num(&r[i]).powi(2)).sum();
        assert!((n2 - 1.0).abs() < 1e-10);
        if at_pole {
            assert!(r[9].is_empty() && r[10].is_empty());
        }
    }
    let text = std::fs::read_to_string(dir.path().join("surface.obj")).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("v ")).all(|l| l.split_whitespace().count() == 5));
}

#[test]
fn sphere_geodesic_stays_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kappa": 1, "geodesic": {"base": [0.5, 0.5, 0.5, 0.5], "lambda": 1.3, "phi0": 0.4, "s_range": [-10, 10], "samples": 101},
            "outputs": {"csv": "g.csv"}}"#,
    );
    assert_eq!(run("geodesic", &cfg, dir.path()).status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("g.csv"));
    assert_eq!(rows.len(), 101);
    for r in rows {
        let n2: f64 = (1..5).map(|i| num(&r[i]).powi(2)).sum();
        assert!((n2.sqrt() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn tanh_geodesic_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("geodesic", &configs().join("geodesic_tanh.json"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("geodesic.csv"));
    for r in rows {
        let s = num(&r[0]);
        assert!((num(&r[1]) - s.tanh()).abs() < 1e-7);
        assert!(num(&r[2]).abs() < 1e-7 && num(&r[3]).abs() < 1e-7);
    }
}

#[test]
fn non_immersed_helicoid_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kappa": 0, "surface": {"kind": "helicoid", "lambda": 0.5, "sigma": {"kind": "linear", "slope": -0.25}},
            "grid": {"eps_range": [-1, 1], "s_range": [-1, 1], "n_eps": 3, "n_s": 3}}"#,
    );
    let out = run("surface", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("refused") && err.contains("θ′"), "{err}");
    assert!(!dir.path().join("surface.obj").exists());
}

#[test]
fn failed_expectation_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kappa": -1, "surface": {"kind": "helicoid", "lambda": 0.0, "sigma": {"kind": "linear", "angle": "theta", "slope": 1.5}},
            "grid": {"eps_range": [-1, 1], "s_range": [-1, 1], "n_eps": 5, "n_s": 5},
            "expect": {"classification": "strictly stable"}}"#,
    );
    let out = run("stability", &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("criterion-inconclusive"));
}

#[test]
fn escaping_geodesic_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"kappa": -1, "geodesic": {"base": [0.5, 0.0, 0.0], "lambda": 0.0, "s_range": [0, 50], "samples": 11}}"#,
    );
    assert_eq!(run("geodesic", &cfg, dir.path()).status.code(), Some(3));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("strip_heisenberg.json");
    let mut texts = Vec::new();
    for threads in ["1", "4"] {
        let out_dir = dir.path().join(threads);
        let out = Command::new(bin())
            .env("CCFORMS_THREADS", threads)
            .args(["verify", "--config"])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        texts.push(std::fs::read(out_dir.join("verify.json")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}
