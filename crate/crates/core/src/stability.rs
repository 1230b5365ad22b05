//! Second-variation quantities: q, the Jacobi operator L, the index form Q
//! and the stability classifier.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{local_geometry, shape_entries_at, LocalGeometry, ShapeEntries, SurfaceFrame};
use crate::model_space::SpaceForm;
use crate::quadrature::{integrate_adaptive, QuadratureSpec, Rect};
use crate::roots::scan_roots;
use crate::surfaces::Surface;

/// Default lower bound for |v| on quadrature supports.
pub const DEFAULT_COLLAR: f64 = 1e-3;
/// Step of the s-stencils used for user-supplied ψ.
pub const PSI_STEP: f64 = 1e-4;

/// q = |B(Z)+S|² + 4(K−1)|N_h|².
pub fn q_value(frame: &SurfaceFrame, entries: &ShapeEntries, sf: &SpaceForm) -> f64 {
    let nh = frame.nh;
    (2.0 * entries.h * nh).powi(2) + (1.0 + entries.bzs).powi(2) + 4.0 * (sf.k() - 1.0) * nh * nh
}

/// Function ψ(ε, s) fed to the Jacobi operator.
pub enum Psi<'a> {
    /// |N_h|
    HorizontalNormal,
    /// ⟨N,T⟩
    ReebNormal,
    Zero,
    Custom(&'a (dyn Fn(f64, f64) -> f64 + Sync + 'a)),
}

/// ψ, ∂_sψ and ∂²_sψ.
fn psi_jet(surf: &Surface, psi: &Psi, lg: &LocalGeometry, eps: f64, s: f64) -> [f64; 3] {
    match psi {
        Psi::HorizontalNormal => [lg.nh.v, lg.nh.d1, lg.nh.d2],
        Psi::ReebNormal => [lg.nt.v, lg.nt.d1, lg.nt.d2],
        Psi::Zero => [0.0; 3],
        Psi::Custom(f) => {
            let h = PSI_STEP;
            let (lo, hi) = surf.s_domain();
            // Shift the stencil inward near the ends of the s-domain.
            let c = s.clamp(lo + 2.0 * h, hi - 2.0 * h);
            let shift = s - c;
            let g: Vec<f64> = (-2..=2).map(|k| f(eps, c + k as f64 * h)).collect();
            let d1c = (g[0] - 8.0 * g[1] + 8.0 * g[3] - g[4]) / (12.0 * h);
            let d2c = (-g[0] + 16.0 * g[1] - 30.0 * g[2] + 16.0 * g[3] - g[4]) / (12.0 * h * h);
            if shift == 0.0 {
                [g[2], d1c, d2c]
            } else {
                [f(eps, s), d1c + shift * d2c, d2c]
            }
        }
    }
}

fn apply_operator(lg: &LocalGeometry, p: [f64; 3]) -> f64 {
    let (nh, nt) = (lg.nh.v, lg.nt.v);
    (p[2] + 2.0 * (nt / nh) * lg.bzs * lg.delta * p[1] + lg.q * p[0]) / nh
}

/// L(ψ) = |N_h|⁻¹{Z(Z(ψ)) + 2|N_h|⁻¹⟨N,T⟩⟨B(Z),S⟩ Z(ψ) + qψ}.
pub fn jacobi_operator(surf: &Surface, psi: &Psi, eps: f64, s: f64) -> Result<f64> {
    let lg = local_geometry(surf, surf.jet(eps, s)?)?;
    Ok(apply_operator(&lg, psi_jet(surf, psi, &lg, eps, s)))
}

/// L(|N_h|) = (2vv″ − v′² + τv²)/v², the numerator being constant along
/// each characteristic curve.
pub fn l_nh_closed_form(surf: &Surface, eps: f64, s: f64) -> Result<f64> {
    let vc = surf.vertical(eps)?;
    let j = vc.eval(s);
    if j.v == 0.0 {
        return Err(Error::Singular(format!("v = 0 at (ε, s) = ({eps}, {s})")));
    }
    Ok(vc.invariant_at_origin() / (j.v * j.v))
}

/// A·(1 + c_e x + c_s y)·b(x)·b(y) with b(x) = (1 − x²)⁴ and (x, y) the
/// affine coordinates of `support` mapped to [−1, 1]².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction {
    pub support: Rect,
    pub amplitude: f64,
    pub c_eps: f64,
    pub c_s: f64,
}

fn bump(x: f64) -> [f64; 2] {
    if x.abs() >= 1.0 {
        return [0.0, 0.0];
    }
    let r = 1.0 - x * x;
    [r.powi(4), -8.0 * x * r.powi(3)]
}

impl TestFunction {
    pub fn new(support: Rect, amplitude: f64, c_eps: f64, c_s: f64) -> Result<Self> {
        if !(support.x1 > support.x0 && support.y1 > support.y0) {
            return Err(Error::InvalidInput(format!("empty test-function support {support:?}")));
        }
        if !(amplitude.is_finite() && c_eps.abs() < 1.0 && c_s.abs() < 1.0) {
            return Err(Error::InvalidInput("test-function coefficients out of range".into()));
        }
        Ok(TestFunction { support, amplitude, c_eps, c_s })
    }

    pub fn zero(support: Rect) -> Self {
        TestFunction { support, amplitude: 0.0, c_eps: 0.0, c_s: 0.0 }
    }

    /// Bump inside `rect` built from six numbers in [0, 1): the support
    /// is shrunk by up to a quarter per side, then amplitude and tilt.
    pub fn random_in(rect: Rect, u: [f64; 6]) -> Result<Self> {
        let (we, ws) = (rect.x1 - rect.x0, rect.y1 - rect.y0);
        let support = Rect::new(
            rect.x0 + 0.25 * we * u[0],
            rect.x1 - 0.25 * we * u[1],
            rect.y0 + 0.25 * ws * u[2],
            rect.y1 - 0.25 * ws * u[3],
        );
        TestFunction::new(support, 0.5 + u[4], 0.9 * (2.0 * u[5] - 1.0), 0.9 * (1.0 - 2.0 * u[4]))
    }

    fn local(&self, eps: f64, s: f64) -> (f64, f64, f64) {
        let r = self.support;
        let x = (2.0 * eps - r.x0 - r.x1) / (r.x1 - r.x0);
        let y = (2.0 * s - r.y0 - r.y1) / (r.y1 - r.y0);
        (x, y, 2.0 / (r.y1 - r.y0))
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn value(&self, eps: f64, s: f64) -> f64 {
        let (x, y, _) = self.local(eps, s);
        self.amplitude * (1.0 + self.c_eps * x + self.c_s * y) * bump(x)[0] * bump(y)[0]
    }

    /// Exact ∂_s.
    pub fn ds(&self, eps: f64, s: f64) -> f64 {
        let (x, y, dy) = self.local(eps, s);
        let (bx, by) = (bump(x), bump(y));
        let lin = 1.0 + self.c_eps * x + self.c_s * y;
        self.amplitude * bx[0] * (self.c_s * by[0] + lin * by[1]) * dy
    }

    /// Largest |w| over `n` samples per edge of the support.
    pub fn boundary_max(&self, n: usize) -> f64 {
        let r = self.support;
        let mut m: f64 = 0.0;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let (e, s) = (r.x0 + t * (r.x1 - r.x0), r.y0 + t * (r.y1 - r.y0));
            for (a, b) in [(e, r.y0), (e, r.y1), (r.x0, s), (r.x1, s)] {
                m = m.max(self.value(a, b).abs());
            }
        }
        m
    }
}

/// Fails unless v has no zero on `rect` and |v| ≥ collar there.
pub fn check_collar(surf: &Surface, rect: Rect, collar: f64) -> Result<()> {
    const N_EPS: usize = 33;
    const N_S: usize = 65;
    let step = (rect.y1 - rect.y0) / (N_S - 1) as f64;
    for i in 0..N_EPS {
        let e = rect.x0 + (rect.x1 - rect.x0) * i as f64 / (N_EPS - 1) as f64;
        surf.check_params(e, rect.y0)?;
        surf.check_params(e, rect.y1)?;
        let vc = surf.vertical(e)?;
        let roots = scan_roots(|s| vc.value(s), rect.y0, rect.y1, step, 1e-12)?;
        if let Some(r) = roots.first() {
            return Err(Error::InvalidInput(format!("support meets the singular set at (ε, s) = ({e}, {r})")));
        }
        for k in 0..N_S {
            let s = rect.y0 + k as f64 * step;
            let v = vc.value(s).abs();
            if v < collar {
                return Err(Error::InvalidInput(format!(
                    "support enters the collar |v| < {collar} at (ε, s) = ({e}, {s})"
                )));
            }
        }
    }
    Ok(())
}

fn overlap(a: Rect, b: Rect) -> Option<Rect> {
    let r = Rect::new(a.x0.max(b.x0), a.x1.min(b.x1), a.y0.max(b.y0), a.y1.min(b.y1));
    (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
}

/// |N_h|⁻¹ da/(dε ds) = (4v² + v′²)/(4|v|).
fn inverse_nh_density(v: f64, vp: f64) -> f64 {
    (4.0 * v * v + vp * vp) / (4.0 * v.abs())
}

/// Q(u,v) = ∫|N_h|⁻¹{Z(u)Z(v) − q uv} da over the common support.
pub fn index_form(surf: &Surface, u: &TestFunction, w: &TestFunction, spec: &QuadratureSpec, collar: f64) -> Result<f64> {
    if u.is_zero() || w.is_zero() {
        return Ok(0.0);
    }
    let Some(rect) = overlap(u.support, w.support) else { return Ok(0.0) };
    check_collar(surf, rect, collar)?;
    let f = |e: f64, s: f64| -> f64 {
        let Ok(lg) = surf.jet(e, s).and_then(|j| local_geometry(surf, j)) else { return f64::NAN };
        let dens = inverse_nh_density(lg.jet.v, lg.jet.vp);
        dens * (u.ds(e, s) * w.ds(e, s) - lg.q * u.value(e, s) * w.value(e, s))
    };
    Ok(integrate_adaptive(&f, rect, spec)?.value)
}

/// Q(w,w) rewritten with f = w/ψ as ∫|N_h|⁻¹{ψ²Z(f)² − |N_h|ψL(ψ)f²} da.
pub fn index_form_sorpasso(surf: &Surface, w: &TestFunction, psi: &Psi, spec: &QuadratureSpec, collar: f64) -> Result<f64> {
    if w.is_zero() {
        return Ok(0.0);
    }
    let rect = w.support;
    check_collar(surf, rect, collar)?;
    check_psi_nonzero(surf, psi, rect)?;
    let f = |e: f64, s: f64| -> f64 {
        let Ok(lg) = surf.jet(e, s).and_then(|j| local_geometry(surf, j)) else { return f64::NAN };
        let p = psi_jet(surf, psi, &lg, e, s);
        let lpsi = apply_operator(&lg, p);
        let (wv, ws) = (w.value(e, s), w.ds(e, s));
        let f = wv / p[0];
        let fs = (ws * p[0] - wv * p[1]) / (p[0] * p[0]);
        let dens = inverse_nh_density(lg.jet.v, lg.jet.vp);
        dens * (p[0] * p[0] * fs * fs - lg.nh.v * p[0] * lpsi * f * f)
    };
    Ok(integrate_adaptive(&f, rect, spec)?.value)
}

fn check_psi_nonzero(surf: &Surface, psi: &Psi, rect: Rect) -> Result<()> {
    const N: usize = 33;
    let mut sign = 0.0;
    for i in 0..N {
        for k in 0..N {
            let e = rect.x0 + (rect.x1 - rect.x0) * i as f64 / (N - 1) as f64;
            let s = rect.y0 + (rect.y1 - rect.y0) * k as f64 / (N - 1) as f64;
            let lg = local_geometry(surf, surf.jet(e, s)?)?;
            let p = psi_jet(surf, psi, &lg, e, s)[0];
            if p == 0.0 || (sign != 0.0 && p.signum() != sign) {
                return Err(Error::InvalidInput(format!("ψ vanishes on the support near (ε, s) = ({e}, {s})")));
            }
            sign = p.signum();
        }
    }
    Ok(())
}

/// Parameter window and thresholds for the classifier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub eps_range: (f64, f64),
    pub s_range: (f64, f64),
    pub n_eps: usize,
    pub n_s: usize,
    /// Grid points with |v| below this are skipped.
    pub collar: f64,
    /// Values within tol of zero count as zero.
    pub tol: f64,
}

impl Window {
    pub fn new(eps_range: (f64, f64), s_range: (f64, f64), n_eps: usize, n_s: usize) -> Self {
        Window { eps_range, s_range, n_eps, n_s, collar: DEFAULT_COLLAR, tol: 1e-8 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.eps_range.0, self.eps_range.1, self.s_range.0, self.s_range.1].iter().all(|x| x.is_finite());
        if !finite || self.eps_range.1 < self.eps_range.0 || self.s_range.1 < self.s_range.0 {
            return Err(Error::InvalidInput("window ranges must be finite and ordered".into()));
        }
        if self.n_eps < 2 || self.n_s < 2 {
            return Err(Error::InvalidInput("window grids need at least 2 points per axis".into()));
        }
        if !(self.tol > 0.0 && self.collar >= 0.0) {
            return Err(Error::InvalidInput("window tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let lerp = |(a, b): (f64, f64), i: usize, n: usize| a + (b - a) * i as f64 / (n - 1) as f64;
        let mut out = Vec::with_capacity(self.n_eps * self.n_s);
        for i in 0..self.n_eps {
            for k in 0..self.n_s {
                out.push((lerp(self.eps_range, i, self.n_eps), lerp(self.s_range, k, self.n_s)));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    StrictlyStable,
    StronglyStable,
    Inconclusive,
    UnstableByCitation,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::StrictlyStable => "strictly stable",
            Classification::StronglyStable => "strongly stable",
            Classification::Inconclusive => "criterion-inconclusive",
            Classification::UnstableByCitation => "unstable-by-paper-citation",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The rule that decided a classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// ⟨N,T⟩ has one sign on the window.
    ReebSignDefinite,
    /// L(|N_h|) ≤ 0 on the window.
    LnhNonPositive,
    /// L(|N_h|) < 0 on the window.
    LnhNegative,
    /// Vertical surface with H² + κ > 0.
    VerticalPositiveCurvature,
    None,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::ReebSignDefinite => "reeb-normal-sign-definite",
            Criterion::LnhNonPositive => "jacobi-of-horizontal-normal-nonpositive",
            Criterion::LnhNegative => "jacobi-of-horizontal-normal-negative",
            Criterion::VerticalPositiveCurvature => "vertical-with-positive-h2-plus-kappa",
            Criterion::None => "none",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witnesses {
    pub q_min: (f64, f64),
    pub q_max: (f64, f64),
    pub l_nh_min: (f64, f64),
    pub l_nh_max: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    pub q_range: (f64, f64),
    pub l_nh_range: (f64, f64),
    pub nt_range: (f64, f64),
    /// max |L(⟨N,T⟩)| over the grid.
    pub reeb_jacobi_residual: f64,
    pub classification: Classification,
    pub criterion: Criterion,
    pub witnesses: Witnesses,
    pub points_used: usize,
    pub points_skipped: usize,
}

struct Sample {
    at: (f64, f64),
    q: f64,
    l_nh: f64,
    nt: f64,
    l_nt: f64,
}

/// Evaluates q, L(|N_h|) and ⟨N,T⟩ on the window grid and applies, in
/// order: ⟨N,T⟩ sign-definite; L(|N_h|) < 0 or ≤ 0; vertical with
/// H² + κ > 0. Points within the collar of the singular set are skipped.
pub fn classify(surf: &Surface, window: &Window) -> Result<StabilityReport> {
    window.validate()?;
    let pts = window.points();
    let samples: Vec<Option<Sample>> = pts
        .par_iter()
        .map(|&(e, s)| -> Result<Option<Sample>> {
            let jet = surf.jet(e, s)?;
            if jet.v.abs() < window.collar.max(f64::MIN_POSITIVE) {
                return Ok(None);
            }
            let lg = local_geometry(surf, jet)?;
            let l_nh = apply_operator(&lg, [lg.nh.v, lg.nh.d1, lg.nh.d2]);
            let l_nt = apply_operator(&lg, [lg.nt.v, lg.nt.d1, lg.nt.d2]);
            Ok(Some(Sample { at: (e, s), q: lg.q, l_nh, nt: lg.nt.v, l_nt }))
        })
        .collect::<Result<_>>()?;
    let used: Vec<&Sample> = samples.iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::InvalidInput("window contains no regular grid point".into()));
    }
    let mut q_min = (f64::INFINITY, (0.0, 0.0));
    let mut q_max = (f64::NEG_INFINITY, (0.0, 0.0));
    let mut l_min = (f64::INFINITY, (0.0, 0.0));
    let mut l_max = (f64::NEG_INFINITY, (0.0, 0.0));
    let mut nt_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut reeb: f64 = 0.0;
    for p in &used {
        if p.q < q_min.0 {
            q_min = (p.q, p.at);
        }
        if p.q > q_max.0 {
            q_max = (p.q, p.at);
        }
        if p.l_nh < l_min.0 {
            l_min = (p.l_nh, p.at);
        }
        if p.l_nh > l_max.0 {
            l_max = (p.l_nh, p.at);
        }
        nt_range = (nt_range.0.min(p.nt), nt_range.1.max(p.nt));
        reeb = reeb.max(p.l_nt.abs());
    }
    let tol = window.tol;
    let lambda = surf.lambda();
    let (classification, criterion) = if nt_range.0 > tol || nt_range.1 < -tol {
        (Classification::StronglyStable, Criterion::ReebSignDefinite)
    } else if l_max.0 < -tol {
        (Classification::StrictlyStable, Criterion::LnhNegative)
    } else if l_max.0 <= tol {
        (Classification::StronglyStable, Criterion::LnhNonPositive)
    } else if nt_range.0 >= -tol && nt_range.1 <= tol && lambda * lambda + surf.sf().k() > 0.0 {
        (Classification::UnstableByCitation, Criterion::VerticalPositiveCurvature)
    } else {
        (Classification::Inconclusive, Criterion::None)
    };
    Ok(StabilityReport {
        q_range: (q_min.0, q_max.0),
        l_nh_range: (l_min.0, l_max.0),
        nt_range,
        reeb_jacobi_residual: reeb,
        classification,
        criterion,
        witnesses: Witnesses { q_min: q_min.1, q_max: q_max.1, l_nh_min: l_min.1, l_nh_max: l_max.1 },
        points_used: used.len(),
        points_skipped: pts.len() - used.len(),
    })
}

/// Maximum residuals of the pole-plane identities on a grid, and the
/// integral of |N_h|⁻¹ da over a disc around the pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneIdentityReport {
    /// Smallest ⟨N,T⟩ on the grid (positive off the pole).
    pub min_nt: f64,
    /// max |⟨B(Z),S⟩ − (1+μ²)|N_h|²|
    pub bzs: f64,
    /// max |q − (1 − (1+μ²)|N_h|²)²|
    pub q: f64,
    /// max |⟨B(S),S⟩ − λ|N_h|(1 − (1+μ²)|N_h|²)|
    pub bss: f64,
    pub disc_radius: f64,
    pub disc_integral: f64,
    pub disc_expected: f64,
}

impl PlaneIdentityReport {
    pub fn disc_relative_error(&self) -> f64 {
        ((self.disc_integral - self.disc_expected) / self.disc_expected).abs()
    }
}

/// 2π∫₀^R of (s² + 1) for μ = 0, or sinh²(μs)/μ² + cosh²(μs).
pub fn disc_closed_form(mu: f64, r: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    if mu == 0.0 {
        return tau * (r * r * r / 3.0 + r);
    }
    let q = (2.0 * mu * r).sinh() / (4.0 * mu);
    tau * ((q - 0.5 * r) / (mu * mu) + q + 0.5 * r)
}

pub fn plane_identity_suite(surf: &Surface, grid: &Window, disc_radius: f64, spec: &QuadratureSpec) -> Result<PlaneIdentityReport> {
    let Surface::PolePlane(plane) = surf else {
        return Err(Error::Unsupported(format!("plane identities need a pole plane, got a {}", surf.family().name())));
    };
    grid.validate()?;
    let m = 1.0 + plane.mu * plane.mu;
    let rows: Vec<[f64; 4]> = grid
        .points()
        .par_iter()
        .map(|&(e, s)| -> Result<[f64; 4]> {
            let jet = surf.jet(e, s)?;
            if jet.v.abs() < grid.collar.max(f64::MIN_POSITIVE) {
                return Ok([f64::INFINITY, 0.0, 0.0, 0.0]);
            }
            let lg = local_geometry(surf, jet)?;
            let nh = lg.nh.v;
            let base = 1.0 - m * nh * nh;
            let se = shape_entries_at(surf, e, s)?;
            Ok([
                lg.nt.v,
                (lg.bzs - m * nh * nh).abs(),
                (lg.q - base * base).abs(),
                (se.bss - plane.lambda * nh * base).abs(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut rep = [f64::INFINITY, 0.0, 0.0, 0.0];
    for r in &rows {
        rep[0] = rep[0].min(r[0]);
        for k in 1..4 {
            rep[k] = rep[k].max(r[k]);
        }
    }
    let f = |_e: f64, s: f64| -> f64 {
        let j = surf.jet(0.0, s).map(|j| inverse_nh_density(j.v, j.vp));
        j.unwrap_or(f64::NAN)
    };
    let rect = Rect::new(0.0, std::f64::consts::TAU, 0.0, disc_radius);
    let disc = integrate_adaptive(&f, rect, spec)?.value;
    Ok(PlaneIdentityReport {
        min_nt: rep[0],
        bzs: rep[1],
        q: rep[2],
        bss: rep[3],
        disc_radius,
        disc_integral: disc,
        disc_expected: disc_closed_form(plane.mu, disc_radius),
    })
}
