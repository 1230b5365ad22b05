//! The `verify` command: every identity check that applies to the
//! configured surface, each with its residual and tolerance.

use std::path::Path;

use ccforms_core::geodesic::{closed_form_geodesic, curvature_estimate, GeodesicState, Integrator};
use ccforms_core::geometry::{derivative_identities, local_geometry, numeric_curve_data, surface_frame};
use ccforms_core::jacobi::{moving_to_frame, numeric_jacobi};
use ccforms_core::model_space::FrameVector;
use ccforms_core::quadrature::Rect;
use ccforms_core::stability::{
    check_collar, classify, index_form, index_form_sorpasso, jacobi_operator, plane_identity_suite, Classification,
    Psi, TestFunction, DEFAULT_COLLAR,
};
use ccforms_core::surfaces::{eval_surface, immersion_status, locate_singular_vertical, Family, Surface};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{linspace, output_path, require_immersed, window_of, StabilityJson, GEODESIC_TOL};
use crate::config::{GridConfig, RunConfig};
use crate::export::{json_text, write_file};
use crate::{CliError, Outcome};

/// Integrator tolerance used by every check, whatever `tolerances.ode` says.
pub const CHECK_ODE_TOL: f64 = 1e-13;
/// Number of bump functions fed to the index-form checks.
pub const BUMP_COUNT: usize = 20;
/// Finite-difference step in ε for the Jacobi-field oracle.
const JACOBI_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub anchor: &'static str,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Skipped {
    pub id: String,
    pub reason: String,
}

#[derive(Serialize)]
struct SurfaceInfo {
    family: &'static str,
    kappa: i32,
    lambda: f64,
    tau: f64,
    orientation: f64,
    singular_set_empty: Option<bool>,
    vertical_surface: bool,
}

#[derive(Serialize)]
struct WindowInfo {
    eps_range: [f64; 2],
    s_range: [f64; 2],
    n_eps: usize,
    n_s: usize,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    surface: Option<SurfaceInfo>,
    window: Option<WindowInfo>,
    orientation_convention: &'static str,
    classification: Option<&'static str>,
    criterion: Option<&'static str>,
    stability: Option<StabilityJson>,
    checks: Vec<Check>,
    skipped: Vec<Skipped>,
    passed: bool,
}

const ORIENTATION: &str =
    "N = sigma (-v J(gamma') + (v'/2) T)/|.|, sigma = -1 on strips and +1 otherwise; Z = delta gamma' with delta = sign(sigma v), so H = delta lambda";

struct Suite<'a> {
    cfg: &'a RunConfig,
    checks: Vec<Check>,
    skipped: Vec<Skipped>,
}

impl Suite<'_> {
    fn tol(&self, id: &str, default: f64) -> f64 {
        self.cfg.check_tolerances.get(id).copied().unwrap_or(default)
    }

    /// Records residual ≤ tolerance; a NaN residual fails.
    fn bound(&mut self, id: &str, anchor: &'static str, residual: f64, default_tol: f64) {
        let tol = self.tol(id, default_tol);
        self.checks.push(Check {
            id: id.into(),
            anchor,
            residual: Some(residual),
            tolerance: Some(tol),
            passed: residual <= tol,
        });
    }

    fn flag(&mut self, id: &str, anchor: &'static str, residual: Option<f64>, passed: bool) {
        self.checks.push(Check { id: id.into(), anchor, residual, tolerance: None, passed });
    }

    fn skip(&mut self, id: &str, reason: impl Into<String>) {
        self.skipped.push(Skipped { id: id.into(), reason: reason.into() });
    }
}

/// NaN-propagating maximum.
fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

/// 7 × 7 points strictly inside the window.
fn interior(grid: &GridConfig) -> Vec<(f64, f64)> {
    let e = linspace(grid.eps_range, 9);
    let s = linspace(grid.s_range, 9);
    e[1..8].iter().flat_map(|&a| s[1..8].iter().map(move |&b| (a, b))).collect()
}

/// The i-th point of the Halton sequence in the given prime base.
fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic bump functions on the rectangle.
pub fn bumps(rect: Rect, n: usize) -> Result<Vec<TestFunction>, CliError> {
    const BASES: [usize; 6] = [2, 3, 5, 7, 11, 13];
    (1..=n)
        .map(|i| Ok(TestFunction::random_in(rect, BASES.map(|b| halton(i, b)))?))
        .collect()
}

pub(crate) fn cmd_verify(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let it = Integrator::new(cfg.tolerances.ode.min(CHECK_ODE_TOL));
    let mut suite = Suite { cfg, checks: Vec::new(), skipped: Vec::new() };
    if cfg.geodesic.is_some() {
        geodesic_checks(&mut suite, &it)?;
    }
    let mut surface_info = None;
    let mut window_info = None;
    let mut stability = None;
    if cfg.surface.is_some() {
        let surf = cfg.build_surface()?;
        let grid = cfg.grid()?;
        require_immersed(&surf, &grid)?;
        let status = immersion_status(&surf, (grid.eps_range[0], grid.eps_range[1]), grid.n_eps.max(1001))?;
        let rep = classify(&surf, &window_of(&grid))?;
        surface_info = Some(SurfaceInfo {
            family: surf.family().name(),
            kappa: cfg.kappa,
            lambda: surf.lambda(),
            tau: surf.tau(),
            orientation: surf.orientation(),
            singular_set_empty: (surf.family() == Family::Helicoid).then_some(status.singular_set_empty),
            vertical_surface: status.vertical_surface,
        });
        window_info =
            Some(WindowInfo { eps_range: grid.eps_range, s_range: grid.s_range, n_eps: grid.n_eps, n_s: grid.n_s });
        surface_checks(&mut suite, &surf, &grid, &it, status.vertical_surface)?;
        index_form_checks(&mut suite, &surf, &grid, rep.classification)?;
        if let Some(want) = cfg.expect.as_ref().and_then(|e| e.classification.as_deref()) {
            suite.flag("expected-classification", "classification matches the configured expectation", None, want == rep.classification.as_str());
        }
        stability = Some(rep);
    }
    if suite.checks.is_empty() {
        return Err(CliError::Config("nothing to verify: configure a surface or a geodesic".into()));
    }
    let passed = suite.checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        command: "verify",
        surface: surface_info,
        window: window_info,
        orientation_convention: ORIENTATION,
        classification: stability.as_ref().map(|r| r.classification.as_str()),
        criterion: stability.as_ref().map(|r| r.criterion.as_str()),
        stability: stability.as_ref().map(StabilityJson::from),
        checks: suite.checks,
        skipped: suite.skipped,
        passed,
    };
    let rp = output_path(out_dir, &cfg.outputs.report, "verify.json");
    write_file(&rp, &json_text(&report)?)?;
    let mut lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            match (c.residual, c.tolerance) {
                (Some(r), Some(t)) => format!("{verdict} {:<32} {r:.3e} <= {t:.1e}", c.id),
                (Some(r), None) => format!("{verdict} {:<32} {r:.6e}", c.id),
                _ => format!("{verdict} {}", c.id),
            }
        })
        .collect();
    for s in &report.skipped {
        lines.push(format!("SKIP {:<32} {}", s.id, s.reason));
    }
    if let Some(c) = report.classification {
        lines.push(format!("classification: {c}"));
    }
    Ok(Outcome { passed, lines, files: vec![rp] })
}

fn geodesic_checks(suite: &mut Suite, it: &Integrator) -> Result<(), CliError> {
    let cfg = suite.cfg;
    let sf = cfg.space();
    let (spec, g) = cfg.geodesic_spec()?;
    let s = linspace(g.s_range, g.samples);
    let states = it.sample(&sf, &spec, &s)?;
    suite.bound(
        "geodesic-unit-speed",
        "CC-geodesics have unit speed",
        max_of(states.iter().map(|st| (st.velocity.norm() - 1.0).abs())),
        GEODESIC_TOL,
    );
    suite.bound(
        "geodesic-horizontal",
        "CC-geodesics are horizontal",
        max_of(states.iter().map(|st| st.velocity.c.abs())),
        GEODESIC_TOL,
    );
    if sf.kappa() == 1 {
        let d = max_of(states.iter().map(|st| {
            let n2: f64 = st.position.coords().iter().map(|x| x * x).sum();
            (n2.sqrt() - 1.0).abs()
        }));
        suite.bound("geodesic-on-sphere", "geodesics of M(1) stay on the unit 3-sphere", d, 1e-10);
    }
    let closed: Vec<f64> = states
        .iter()
        .filter_map(|st| closed_form_geodesic(&sf, &spec, st.s).map(|c| c.position.distance(&st.position)))
        .collect();
    if closed.len() == states.len() {
        suite.bound("geodesic-closed-form", "straight lines and the tanh geodesic through the origin", max_of(closed), 1e-7);
    } else {
        suite.skip("geodesic-closed-form", "no closed form for this geodesic");
    }
    Ok(())
}

fn surface_checks(
    suite: &mut Suite,
    surf: &Surface,
    grid: &GridConfig,
    it: &Integrator,
    vertical_surface: bool,
) -> Result<(), CliError> {
    let sf = surf.sf();
    let eps = linspace(grid.eps_range, grid.n_eps);
    let s = linspace(grid.s_range, grid.n_s);
    let regular = |e: f64, s: f64| -> Result<bool, CliError> { Ok(surf.jet(e, s)?.v.abs() >= DEFAULT_COLLAR) };

    // Characteristic curves are CC-geodesics of curvature λ.
    let rows: Vec<Vec<GeodesicState>> = linspace(grid.eps_range, 7)
        .par_iter()
        .map(|&e| -> Result<Vec<GeodesicState>, CliError> {
            let spec = surf.initial_specs(&[e], it)?[0];
            Ok(it.sample(&sf, &spec, &s)?)
        })
        .collect::<Result<_, _>>()?;
    let states: Vec<&GeodesicState> = rows.iter().flatten().collect();
    suite.bound(
        "geodesic-unit-speed",
        "characteristic curves have unit speed",
        max_of(states.iter().map(|st| (st.velocity.norm() - 1.0).abs())),
        GEODESIC_TOL,
    );
    suite.bound(
        "geodesic-horizontal",
        "characteristic curves are horizontal",
        max_of(states.iter().map(|st| st.velocity.c.abs())),
        GEODESIC_TOL,
    );

    let inner = interior(grid);
    let oracle: Vec<f64> = inner
        .par_iter()
        .map(|&(e, s)| -> Result<f64, CliError> {
            let num = numeric_jacobi(&sf, |x| surf.flow_state(x, s, it), e, JACOBI_STEP)?;
            let exact = surf.jacobi_field(e)?.jacobi_vector(s);
            Ok((num - exact).max_abs())
        })
        .collect::<Result<_, _>>()?;
    suite.bound("jacobi-oracle", "finite differences in eps match the closed-form Jacobi field", max_of(oracle), 1e-6);

    // Frame, relations and derivative identities at regular interior points.
    let mut regular_pts = Vec::new();
    for &(e, s) in &inner {
        if regular(e, s)? {
            regular_pts.push((e, s));
        }
    }
    let frame: Vec<[f64; 3]> = regular_pts
        .par_iter()
        .map(|&(e, s)| -> Result<[f64; 3], CliError> {
            let pt = eval_surface(surf, e, s, it)?;
            let f = surface_frame(surf, &pt)?;
            let basis = [f.z, f.s, f.n];
            let mut ortho: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    ortho = ortho.max((basis[i].dot(basis[j]) - want).abs());
                }
            }
            let tangential = |w: FrameVector| w - w.dot(f.n) * f.n;
            let ambient_v = moving_to_frame(pt.zdir, pt.vdir);
            let rel = max_of([
                (f.z - f.nu_h.j()).max_abs(),
                (f.s.dot(FrameVector::T) + f.nh).abs(),
                (f.nh * f.nh + f.nt * f.nt - 1.0).abs(),
                (tangential(f.nu_h) - f.nt * f.s).max_abs(),
                (tangential(FrameVector::T) + f.nh * f.s).max_abs(),
                ambient_v.dot(f.n).abs() / pt.vdir.norm().max(1.0),
            ]);
            let d = derivative_identities(surf, &pt)?;
            Ok([ortho, rel, d.z_nh.abs().max(d.z_nt.abs())])
        })
        .collect::<Result<_, _>>()?;
    suite.bound("frame-orthonormal", "Z, S, N is an orthonormal frame", max_of(frame.iter().map(|r| r[0])), 1e-10);
    suite.bound("frame-relations", "relations between nu_h, T and the tangent frame", max_of(frame.iter().map(|r| r[1])), 1e-9);
    suite.bound(
        "derivative-identities",
        "Z|N_h| = <N,T>(1 - <B(Z),S>) and Z<N,T> = |N_h|(<B(Z),S> - 1)",
        max_of(frame.iter().map(|r| r[2])),
        1e-7,
    );

    // Mean curvature by differencing each curve over the full grid.
    let h_rows: Vec<Vec<(f64, f64)>> = eps
        .par_iter()
        .map(|&e| -> Result<Vec<(f64, f64)>, CliError> {
            let mut keep = Vec::new();
            for &x in &s {
                if regular(e, x)? {
                    keep.push(x);
                }
            }
            numeric_curve_data(surf, e, &keep, it)?
                .into_iter()
                .map(|d| Ok((d.h, local_geometry(surf, surf.jet(e, d.s)?)?.h)))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let diffs: Vec<f64> = h_rows.iter().flatten().map(|(num, exact)| num - exact).collect();
    if diffs.is_empty() {
        suite.skip("mean-curvature", "no regular grid point");
    } else {
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
        suite.bound("mean-curvature-mean", "numeric H equals lambda on average over the grid", mean.abs(), 1e-6);
        suite.bound("mean-curvature-sd", "numeric H is constant over the grid", sd, 1e-6);
        suite.bound("mean-curvature-max", "numeric H equals lambda at every grid point", max_of(diffs.iter().map(|d| d.abs())), 1e-5);
    }

    // q from the numerically differenced normal.
    let k = sf.k();
    let q_rows: Vec<f64> = linspace(grid.eps_range, 9)[1..8]
        .par_iter()
        .map(|&e| -> Result<f64, CliError> {
            let mut keep = Vec::new();
            for &x in &linspace(grid.s_range, 9)[1..8] {
                if regular(e, x)? {
                    keep.push(x);
                }
            }
            let mut worst: f64 = 0.0;
            for d in numeric_curve_data(surf, e, &keep, it)? {
                let pt = eval_surface(surf, e, d.s, it)?;
                let f = surface_frame(surf, &pt)?;
                let lg = local_geometry(surf, pt.jet)?;
                let lhs = (d.bz + f.s).dot(d.bz + f.s) + 4.0 * (k - 1.0) * f.nh * f.nh;
                worst = max_of([worst, (lhs - lg.q).abs(), d.bz.dot(f.n).abs()]);
            }
            Ok(worst)
        })
        .collect::<Result<_, _>>()?;
    suite.bound("q-decomposition", "|B(Z) + S|^2 + 4(kappa - 1)|N_h|^2 = q", max_of(q_rows), 1e-8);

    // Operator identities on the full grid.
    let mut reeb: f64 = 0.0;
    let mut master: f64 = 0.0;
    let mut invariant: f64 = 0.0;
    for &e in &eps {
        let v = surf.vertical(e)?;
        let c0 = v.invariant_at_origin();
        let want = match surf {
            Surface::Helicoid(h) => 4.0 * (h.sigma.sigma_prime(&sf, e) - k + surf.lambda().powi(2)),
            Surface::Strip(_) => -4.0,
            Surface::PolePlane(_) | Surface::Sphere(_) => 0.0,
        };
        for &x in &s {
            let scale = c0.abs().max(v.value(x).powi(2) * v.tau.abs()).max(1.0);
            invariant = invariant.max((v.invariant(x) - c0).abs() / scale);
            if !regular(e, x)? {
                continue;
            }
            reeb = max_of([reeb, jacobi_operator(surf, &Psi::ReebNormal, e, x)?.abs()]);
            let l = jacobi_operator(surf, &Psi::HorizontalNormal, e, x)?;
            let vv = v.value(x).powi(2);
            master = max_of([master, (vv * l - want).abs()]);
        }
    }
    suite.bound("reeb-jacobi", "<N,T> is a Jacobi function", reeb, 1e-5);
    suite.bound("invariant-constancy", "2vv'' - v'^2 + tau v^2 is constant along each curve", invariant, 1e-10);
    let identity_tol = suite.cfg.tolerances.identity;
    let anchor = match surf.family() {
        _ if vertical_surface => "L(|N_h|) = 4(H^2 + kappa) on vertical surfaces",
        Family::Helicoid => "v^2 L(|N_h|) = 4(sigma' - kappa + lambda^2) on helicoids",
        Family::Strip => "v^2 L(|N_h|) = -4 along strips",
        Family::PolePlane | Family::Sphere => "v^2 L(|N_h|) = 0 on pole surfaces",
    };
    suite.bound("master-identity", anchor, master, identity_tol);

    match surf.family() {
        Family::PolePlane => plane_checks(suite, surf, grid)?,
        Family::Sphere => sphere_checks(suite, surf, grid)?,
        Family::Helicoid => helicoid_vertical_points(suite, surf, grid)?,
        Family::Strip => strip_checks(suite, surf, grid, it)?,
    }
    Ok(())
}

fn plane_checks(suite: &mut Suite, surf: &Surface, grid: &GridConfig) -> Result<(), CliError> {
    let rep = plane_identity_suite(surf, &window_of(grid), 1.0, &suite.cfg.quadrature())?;
    suite.flag("plane-reeb-positive", "<N,T> > 0 off the pole", Some(rep.min_nt), rep.min_nt > 0.0);
    suite.bound("plane-bzs", "<B(Z),S> = (1 + mu^2)|N_h|^2", rep.bzs, 1e-7);
    suite.bound("plane-q", "q = (1 - (1 + mu^2)|N_h|^2)^2", rep.q, 1e-7);
    suite.bound("plane-bss", "<B(S),S> = lambda |N_h| (1 - (1 + mu^2)|N_h|^2)", rep.bss, 1e-7);
    suite.bound("plane-disc-integral", "integral of 1/|N_h| over the unit disc around the pole", rep.disc_relative_error(), 1e-8);
    Ok(())
}

fn sphere_checks(suite: &mut Suite, surf: &Surface, grid: &GridConfig) -> Result<(), CliError> {
    let want = 2.0 * std::f64::consts::PI / surf.tau().sqrt();
    let e = 0.5 * (grid.eps_range[0] + grid.eps_range[1]);
    let cp = locate_singular_vertical(surf, e, (0.5 * want, 1.5 * want))?;
    let r = cp.singular.iter().map(|x| (x - want).abs()).fold(f64::INFINITY, f64::min);
    suite.bound("sphere-second-pole", "v vanishes again at s = 2 pi / sqrt(tau)", r, 1e-10);
    Ok(())
}

fn helicoid_vertical_points(suite: &mut Suite, surf: &Surface, grid: &GridConfig) -> Result<(), CliError> {
    let tau = surf.tau();
    if tau <= 0.0 {
        suite.skip("helicoid-vertical-points", "tau <= 0: no periodic vertical points");
        return Ok(());
    }
    let period = std::f64::consts::PI / tau.sqrt();
    let (lo, hi) = (grid.s_range[0], grid.s_range[1]);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for e in linspace(grid.eps_range, 5) {
        if surf.vertical(e)?.is_constant() {
            continue;
        }
        let cp = locate_singular_vertical(surf, e, (lo, hi))?;
        let found: Vec<f64> = cp.vertical.iter().chain(&cp.singular).copied().collect();
        let m0 = (lo / period).ceil() as i64;
        let m1 = (hi / period).floor() as i64;
        for m in m0..=m1 {
            let x = m as f64 * period;
            if x - lo < 1e-6 || hi - x < 1e-6 {
                continue;
            }
            let d = found.iter().map(|f| (f - x).abs()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
            checked += 1;
        }
        for f in &cp.vertical {
            let m = (f / period).round();
            worst = worst.max((f - m * period).abs());
        }
    }
    if checked == 0 {
        suite.skip("helicoid-vertical-points", "no vertical point m pi / sqrt(tau) inside the s-range");
    } else {
        suite.bound("helicoid-vertical-points", "v' vanishes exactly at s = m pi / sqrt(tau)", worst, 1e-10);
    }
    Ok(())
}

fn strip_checks(suite: &mut Suite, surf: &Surface, grid: &GridConfig, it: &Integrator) -> Result<(), CliError> {
    let Surface::Strip(st) = surf else { unreachable!() };
    let Some(s0) = st.s0 else {
        suite.skip("strip-orthogonality", "v has no positive zero: no singular curve");
        suite.skip("strip-singular-curvature", "v has no positive zero: no singular curve");
        return Ok(());
    };
    let sf = surf.sf();
    let mid = 0.5 * (grid.eps_range[0] + grid.eps_range[1]);
    let eps: Vec<f64> = (0..11).map(|i| mid - 0.25 + 0.05 * i as f64).collect();
    let rows: Vec<(GeodesicState, f64)> = eps
        .par_iter()
        .map(|&e| -> Result<(GeodesicState, f64), CliError> {
            let centre = surf.flow_state(e, s0, it)?;
            let m = numeric_jacobi(&sf, |x| surf.flow_state(x, s0, it), e, JACOBI_STEP)?;
            let tangent = moving_to_frame(centre.velocity, m);
            let g = centre.velocity;
            let r = tangent.dot(g).abs().max((tangent - g.j()).max_abs());
            Ok((GeodesicState { s: e, position: centre.position, velocity: tangent }, r))
        })
        .collect::<Result<_, _>>()?;
    suite.bound(
        "strip-orthogonality",
        "the singular curve meets the characteristic curves orthogonally with tangent J(gamma')",
        max_of(rows.iter().map(|r| r.1)),
        1e-6,
    );
    let states: Vec<GeodesicState> = rows.into_iter().map(|r| r.0).collect();
    let k = curvature_estimate(&sf, &states)?;
    suite.bound("strip-singular-curvature", "the singular curve is a CC-geodesic of curvature mu", (k - st.mu).abs(), 1e-5);
    Ok(())
}

fn index_form_checks(
    suite: &mut Suite,
    surf: &Surface,
    grid: &GridConfig,
    class: Classification,
) -> Result<(), CliError> {
    let rect = Rect::new(grid.eps_range[0], grid.eps_range[1], grid.s_range[0], grid.s_range[1]);
    if let Err(e) = check_collar(surf, rect, DEFAULT_COLLAR) {
        suite.skip("index-form-consistency", format!("window meets the singular set: {e}"));
        return Ok(());
    }
    let spec = suite.cfg.quadrature();
    let ws = bumps(rect, BUMP_COUNT)?;
    let values: Vec<(f64, f64)> = ws
        .iter()
        .map(|w| -> Result<(f64, f64), CliError> {
            let a = index_form(surf, w, w, &spec, DEFAULT_COLLAR)?;
            let b = index_form_sorpasso(surf, w, &Psi::HorizontalNormal, &spec, DEFAULT_COLLAR)?;
            Ok((a, b))
        })
        .collect::<Result<_, _>>()?;
    let rel = max_of(values.iter().map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)));
    suite.bound("index-form-consistency", "Q(w,w) agrees between its two integral forms", rel, 1e-5);
    if class == Classification::StrictlyStable || surf.family() == Family::PolePlane {
        let min = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        suite.flag("index-form-positivity", "Q(w,w) > 0 for every sampled bump", Some(min), min > 0.0);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_terms() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(2, 3) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bumps_are_deterministic_and_nonzero() {
        let r = Rect::new(-1.0, 1.0, 0.0, 2.0);
        let a = bumps(r, 5).unwrap();
        assert_eq!(a, bumps(r, 5).unwrap());
        assert!(a.iter().all(|w| !w.is_zero()));
    }

    #[test]
    fn nan_poisons_the_maximum() {
        assert!(max_of([1.0, f64::NAN, 2.0]).is_nan());
        assert_eq!(max_of([1.0, 3.0]), 3.0);
    }
}
