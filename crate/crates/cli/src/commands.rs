//! The `geodesic`, `surface` and `stability` commands; `verify` lives in
//! its own module.

use std::path::{Path, PathBuf};

use ccforms_core::geodesic::closed_form_geodesic;
use ccforms_core::geometry::{local_geometry, numeric_curve_data};
use ccforms_core::stability::{classify, jacobi_operator, Psi, StabilityReport, Window};
use ccforms_core::surfaces::{area_density, immersion_status, Surface, SurfacePoint};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GridConfig, RunConfig};
use crate::export::{csv_table, export_coords, fmt_f64, fmt_opt, json_text, obj_mesh, obj_polyline, write_file};
use crate::{CliError, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Geodesic,
    Surface,
    Stability,
    Verify,
}

pub fn run(cmd: Command, cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    match cmd {
        Command::Geodesic => cmd_geodesic(cfg, out_dir),
        Command::Surface => cmd_surface(cfg, out_dir),
        Command::Stability => cmd_stability(cfg, out_dir),
        Command::Verify => crate::verify::cmd_verify(cfg, out_dir),
    }
}

pub(crate) fn output_path(out_dir: &Path, configured: &Option<String>, default: &str) -> PathBuf {
    out_dir.join(configured.as_deref().unwrap_or(default))
}

pub(crate) fn linspace(r: [f64; 2], n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { r[1] } else { r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64 }).collect()
}

/// Geodesic speed and horizontality tolerance.
pub const GEODESIC_TOL: f64 = 1e-8;

#[derive(Serialize)]
struct GeodesicReport {
    command: &'static str,
    kappa: i32,
    lambda: f64,
    phi0: f64,
    base: Vec<f64>,
    s_range: [f64; 2],
    samples: usize,
    max_speed_defect: f64,
    max_vertical_component: f64,
    max_sphere_defect: Option<f64>,
    closed_form_max_distance: Option<f64>,
    accepted_steps: usize,
    rejected_steps: usize,
    renormalizations: usize,
    max_position_drift: f64,
    tolerance: f64,
    passed: bool,
}

fn cmd_geodesic(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let sf = cfg.space();
    let (spec, g) = cfg.geodesic_spec()?;
    let s = linspace(g.s_range, g.samples);
    let (states, stats) = cfg.integrator().sample_with_stats(&sf, &spec, &s)?;
    let mut speed: f64 = 0.0;
    let mut vertical: f64 = 0.0;
    let mut sphere: f64 = 0.0;
    let mut closed: Option<f64> = None;
    for st in &states {
        speed = speed.max((st.velocity.norm() - 1.0).abs());
        vertical = vertical.max(st.velocity.c.abs());
        if sf.kappa() == 1 {
            let n2: f64 = st.position.coords().iter().map(|x| x * x).sum();
            sphere = sphere.max((n2.sqrt() - 1.0).abs());
        }
        if let Some(exact) = closed_form_geodesic(&sf, &spec, st.s) {
            let d = exact.position.distance(&st.position);
            closed = Some(closed.unwrap_or(0.0).max(d));
        }
    }
    let tol = cfg.check_tolerances.get("geodesic-unit-speed").copied().unwrap_or(GEODESIC_TOL);
    let passed = speed <= tol && vertical <= tol;
    let verts: Vec<Vec<f64>> = states.iter().map(|st| export_coords(&sf, &st.position, cfg.projection)).collect();
    let mesh = output_path(out_dir, &cfg.outputs.mesh, "geodesic.obj");
    let comment = format!("ccforms geodesic in M({}), lambda = {}, {} samples", sf.kappa(), spec.lambda, s.len());
    write_file(&mesh, &obj_polyline(&comment, &verts))?;
    let mut files = vec![mesh];
    if cfg.outputs.csv.is_some() {
        let rows: Vec<Vec<String>> = states
            .iter()
            .map(|st| {
                let c = st.position.padded();
                let mut r = vec![fmt_f64(st.s)];
                r.extend((0..4).map(|i| if i < sf.dim() { fmt_f64(c[i]) } else { String::new() }));
                r.extend(st.velocity.to_array().iter().map(|x| fmt_f64(*x)));
                r
            })
            .collect();
        let path = output_path(out_dir, &cfg.outputs.csv, "geodesic.csv");
        write_file(&path, &csv_table(&["s", "c1", "c2", "c3", "c4", "a", "b", "c"], &rows)?)?;
        files.push(path);
    }
    let report = GeodesicReport {
        command: "geodesic",
        kappa: cfg.kappa,
        lambda: spec.lambda,
        phi0: spec.phi0,
        base: spec.base.coords().to_vec(),
        s_range: g.s_range,
        samples: g.samples,
        max_speed_defect: speed,
        max_vertical_component: vertical,
        max_sphere_defect: (sf.kappa() == 1).then_some(sphere),
        closed_form_max_distance: closed,
        accepted_steps: stats.accepted,
        rejected_steps: stats.rejected,
        renormalizations: stats.renormalizations,
        max_position_drift: stats.max_position_drift,
        tolerance: tol,
        passed,
    };
    let rp = output_path(out_dir, &cfg.outputs.report, "geodesic_report.json");
    write_file(&rp, &json_text(&report)?)?;
    files.push(rp);
    let mut lines = vec![
        format!("max ||v| - 1|      {speed:.3e}"),
        format!("max |<v,T>|        {vertical:.3e}"),
    ];
    if let Some(d) = closed {
        lines.push(format!("closed-form error  {d:.3e}"));
    }
    Ok(Outcome { passed, lines, files })
}

/// Threshold below which v or v′ is reported as zero.
pub const FLAG_TOL: f64 = 1e-9;

/// One CSV row of the surface table.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexRecord {
    pub eps: f64,
    pub s: f64,
    pub coords: Vec<f64>,
    pub nh: Option<f64>,
    pub nt: Option<f64>,
    pub h_numeric: Option<f64>,
    pub q: Option<f64>,
    pub l_nh: Option<f64>,
    pub singular: bool,
    pub vertical: bool,
}

pub const CSV_HEADER: [&str; 13] = ["eps", "s", "c1", "c2", "c3", "c4", "nh", "nt", "h_numeric", "q", "l_nh", "singular", "vertical"];

impl VertexRecord {
    pub fn to_row(&self) -> Vec<String> {
        let mut r = vec![fmt_f64(self.eps), fmt_f64(self.s)];
        for i in 0..4 {
            r.push(self.coords.get(i).map(|x| fmt_f64(*x)).unwrap_or_default());
        }
        for x in [self.nh, self.nt, self.h_numeric, self.q, self.l_nh] {
            r.push(fmt_opt(x));
        }
        r.push(self.singular.to_string());
        r.push(self.vertical.to_string());
        r
    }
}

/// Refuses surfaces that are not immersed on the ε-window.
pub(crate) fn require_immersed(surf: &Surface, grid: &GridConfig) -> Result<(), CliError> {
    let st = immersion_status(surf, (grid.eps_range[0], grid.eps_range[1]), grid.n_eps.max(1001))?;
    if !st.immersed {
        return Err(CliError::Refused(st.violated.unwrap_or_else(|| "surface is not immersed".into())));
    }
    for e in [grid.eps_range[0], grid.eps_range[1]] {
        for s in [grid.s_range[0], grid.s_range[1]] {
            surf.check_params(e, s)?;
        }
    }
    Ok(())
}

fn record(surf: &Surface, pt: &SurfacePoint, h: Option<f64>, cfg: &RunConfig) -> Result<VertexRecord, CliError> {
    let sf = surf.sf();
    let j = pt.jet;
    let den = area_density(&j);
    let (nh, nt) = if den > 0.0 {
        (Some(j.v.abs() / den), Some(surf.orientation() * 0.5 * j.vp / den))
    } else {
        (None, None)
    };
    let singular = j.v.abs() <= FLAG_TOL;
    let (q, l_nh) = if singular {
        (None, None)
    } else {
        let lg = local_geometry(surf, j)?;
        (Some(lg.q), Some(jacobi_operator(surf, &Psi::HorizontalNormal, pt.eps, pt.s)?))
    };
    Ok(VertexRecord {
        eps: pt.eps,
        s: pt.s,
        coords: export_coords(&sf, &pt.position, cfg.projection),
        nh,
        nt,
        h_numeric: h,
        q,
        l_nh,
        singular,
        vertical: j.vp.abs() <= FLAG_TOL,
    })
}

/// Vertex records over the configured grid, row by row in ε.
pub fn surface_records(surf: &Surface, cfg: &RunConfig) -> Result<Vec<VertexRecord>, CliError> {
    let grid = cfg.grid()?;
    let it = cfg.integrator();
    let eps = linspace(grid.eps_range, grid.n_eps);
    let s = linspace(grid.s_range, grid.n_s);
    let rows: Vec<Vec<VertexRecord>> = eps
        .par_iter()
        .map(|&e| -> Result<Vec<VertexRecord>, CliError> {
            let pts = surf.curve(e, &s, &it)?;
            let regular: Vec<f64> = pts.iter().filter(|p| p.jet.v.abs() > FLAG_TOL).map(|p| p.s).collect();
            let hs = numeric_curve_data(surf, e, &regular, &it)?;
            let mut next = hs.iter().peekable();
            pts.iter()
                .map(|p| {
                    let h = match next.peek() {
                        Some(d) if d.s == p.s && p.jet.v.abs() > FLAG_TOL => next.next().map(|d| d.h),
                        _ => None,
                    };
                    record(surf, p, h, cfg)
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Serialize)]
struct SurfaceReport {
    command: &'static str,
    family: &'static str,
    kappa: i32,
    lambda: f64,
    n_eps: usize,
    n_s: usize,
    vertices: usize,
    triangles: usize,
    singular_vertices: usize,
    vertical_vertices: usize,
    projection: bool,
}

fn cmd_surface(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let surf = cfg.build_surface()?;
    let grid = cfg.grid()?;
    require_immersed(&surf, &grid)?;
    let recs = surface_records(&surf, cfg)?;
    let verts: Vec<Vec<f64>> = recs.iter().map(|r| r.coords.clone()).collect();
    let comment = format!(
        "ccforms {} in M({}), lambda = {}, grid {} x {} (eps, s)",
        surf.family().name(),
        cfg.kappa,
        surf.lambda(),
        grid.n_eps,
        grid.n_s
    );
    let mesh = output_path(out_dir, &cfg.outputs.mesh, "surface.obj");
    write_file(&mesh, &obj_mesh(&comment, &verts, grid.n_eps, grid.n_s))?;
    let csv_path = output_path(out_dir, &cfg.outputs.csv, "surface.csv");
    let rows: Vec<Vec<String>> = recs.iter().map(VertexRecord::to_row).collect();
    write_file(&csv_path, &csv_table(&CSV_HEADER, &rows)?)?;
    let mut files = vec![mesh, csv_path];
    let singular = recs.iter().filter(|r| r.singular).count();
    let vertical = recs.iter().filter(|r| r.vertical).count();
    if cfg.outputs.report.is_some() {
        let rep = SurfaceReport {
            command: "surface",
            family: surf.family().name(),
            kappa: cfg.kappa,
            lambda: surf.lambda(),
            n_eps: grid.n_eps,
            n_s: grid.n_s,
            vertices: recs.len(),
            triangles: 2 * (grid.n_eps - 1) * (grid.n_s - 1),
            singular_vertices: singular,
            vertical_vertices: vertical,
            projection: cfg.projection,
        };
        let rp = output_path(out_dir, &cfg.outputs.report, "surface_report.json");
        write_file(&rp, &json_text(&rep)?)?;
        files.push(rp);
    }
    let lines = vec![
        format!("{} vertices, {} triangles", recs.len(), 2 * (grid.n_eps - 1) * (grid.n_s - 1)),
        format!("{singular} singular and {vertical} vertical vertices"),
    ];
    Ok(Outcome { passed: true, lines, files })
}

pub(crate) fn window_of(grid: &GridConfig) -> Window {
    Window::new((grid.eps_range[0], grid.eps_range[1]), (grid.s_range[0], grid.s_range[1]), grid.n_eps, grid.n_s)
}

#[derive(Serialize)]
pub(crate) struct StabilityJson {
    pub classification: &'static str,
    pub criterion: &'static str,
    pub q_range: [f64; 2],
    pub l_nh_range: [f64; 2],
    pub nt_range: [f64; 2],
    pub reeb_jacobi_residual: f64,
    pub witnesses: WitnessJson,
    pub points_used: usize,
    pub points_skipped: usize,
}

#[derive(Serialize)]
pub(crate) struct WitnessJson {
    pub q_min: [f64; 2],
    pub q_max: [f64; 2],
    pub l_nh_min: [f64; 2],
    pub l_nh_max: [f64; 2],
}

impl From<&StabilityReport> for StabilityJson {
    fn from(r: &StabilityReport) -> Self {
        let w = r.witnesses;
        StabilityJson {
            classification: r.classification.as_str(),
            criterion: r.criterion.as_str(),
            q_range: [r.q_range.0, r.q_range.1],
            l_nh_range: [r.l_nh_range.0, r.l_nh_range.1],
            nt_range: [r.nt_range.0, r.nt_range.1],
            reeb_jacobi_residual: r.reeb_jacobi_residual,
            witnesses: WitnessJson {
                q_min: [w.q_min.0, w.q_min.1],
                q_max: [w.q_max.0, w.q_max.1],
                l_nh_min: [w.l_nh_min.0, w.l_nh_min.1],
                l_nh_max: [w.l_nh_max.0, w.l_nh_max.1],
            },
            points_used: r.points_used,
            points_skipped: r.points_skipped,
        }
    }
}

#[derive(Serialize)]
struct StabilityCommandReport {
    command: &'static str,
    family: &'static str,
    kappa: i32,
    lambda: f64,
    eps_range: [f64; 2],
    s_range: [f64; 2],
    n_eps: usize,
    n_s: usize,
    stability: StabilityJson,
}

fn cmd_stability(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let surf = cfg.build_surface()?;
    let grid = cfg.grid()?;
    require_immersed(&surf, &grid)?;
    let rep = classify(&surf, &window_of(&grid))?;
    let json = StabilityCommandReport {
        command: "stability",
        family: surf.family().name(),
        kappa: cfg.kappa,
        lambda: surf.lambda(),
        eps_range: grid.eps_range,
        s_range: grid.s_range,
        n_eps: grid.n_eps,
        n_s: grid.n_s,
        stability: StabilityJson::from(&rep),
    };
    let rp = output_path(out_dir, &cfg.outputs.report, "stability.json");
    write_file(&rp, &json_text(&json)?)?;
    let expected = cfg.expect.as_ref().and_then(|e| e.classification.as_deref());
    let passed = expected.is_none_or(|c| c == rep.classification.as_str());
    let lines = vec![
        format!("classification: {}", rep.classification),
        format!("criterion:      {}", rep.criterion.as_str()),
        format!("L(|N_h|) range: [{:.6e}, {:.6e}]", rep.l_nh_range.0, rep.l_nh_range.1),
    ];
    Ok(Outcome { passed, lines, files: vec![rp] })
}
