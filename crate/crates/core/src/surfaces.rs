//! Surfaces swept by CC-geodesics of curvature λ: helicoids Σ_{λ,σ} from
//! the vertical axis, pole planes P_λ(p), spheres S_λ(p) and strips Σ_λ(Γ)
//! over a CC-geodesic Γ of curvature μ.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::angle::AngleFunction;
use crate::error::{Error, Result};
use crate::geodesic::{curvature_estimate, GeodesicSpec, GeodesicState, Integrator};
use crate::jacobi::{solve_vertical, JacobiField, VerticalComponent, VerticalJet};
use crate::model_space::{AmbientPoint, FrameVector, SpaceForm};
use crate::quadrature::{integrate_adaptive, QuadratureSpec, Rect};
use crate::roots::scan_roots;

/// Root polishing tolerance for singular and vertical points.
pub const ROOT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Helicoid,
    PolePlane,
    Sphere,
    Strip,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Helicoid => "helicoid",
            Family::PolePlane => "plane",
            Family::Sphere => "sphere",
            Family::Strip => "strip",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Helicoid {
    pub sf: SpaceForm,
    pub lambda: f64,
    pub sigma: AngleFunction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolePlane {
    pub sf: SpaceForm,
    pub lambda: f64,
    pub pole: AmbientPoint,
    /// √(−(λ² + κ)).
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sphere {
    pub sf: SpaceForm,
    pub lambda: f64,
    pub pole: AmbientPoint,
    /// 2π/√τ, where the geodesics from the pole meet again.
    pub s_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Strip {
    pub sf: SpaceForm,
    pub lambda: f64,
    /// Γ, a CC-geodesic of curvature `mu`.
    pub generator: GeodesicSpec,
    pub mu: f64,
    /// First positive zero of v; `None` when v < 0 on (0, ∞).
    pub s0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    Helicoid(Helicoid),
    PolePlane(PolePlane),
    Sphere(Sphere),
    Strip(Strip),
}

/// A point F(ε, s) with the data needed downstream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub eps: f64,
    pub s: f64,
    pub position: AmbientPoint,
    /// γ̇_ε(s) in frame components.
    pub zdir: FrameVector,
    /// ∂F/∂ε along (γ̇, J(γ̇), T).
    pub vdir: FrameVector,
    pub jet: VerticalJet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImmersionStatus {
    pub immersed: bool,
    pub singular_set_empty: bool,
    pub vertical_surface: bool,
    /// The failed condition, when not immersed.
    pub violated: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CriticalPoints {
    /// s with v = 0.
    pub singular: Vec<f64>,
    /// s with v′ = 0 and v ≠ 0.
    pub vertical: Vec<f64>,
    /// v′ ≡ 0: the whole curve is vertical.
    pub all_vertical: bool,
}

pub fn build_helicoid(sf: SpaceForm, lambda: f64, sigma: AngleFunction) -> Result<Surface> {
    if !lambda.is_finite() {
        return Err(Error::InvalidInput("λ must be finite".into()));
    }
    if sigma.smoothness() < 1 {
        return Err(Error::InvalidInput("angle function must be at least C¹".into()));
    }
    Ok(Surface::Helicoid(Helicoid { sf, lambda, sigma }))
}

pub fn build_pole_surface(sf: SpaceForm, lambda: f64, pole: AmbientPoint) -> Result<Surface> {
    sf.validate(&pole)?;
    let m = lambda * lambda + sf.k();
    if !(lambda >= 0.0 && m <= 0.0) {
        return Err(Error::InvalidInput(format!(
            "a pole plane needs λ ≥ 0 and λ² + κ ≤ 0, got λ = {lambda}, κ = {}",
            sf.kappa()
        )));
    }
    Ok(Surface::PolePlane(PolePlane { sf, lambda, pole, mu: (-m).sqrt() }))
}

pub fn build_sphere(sf: SpaceForm, lambda: f64, pole: AmbientPoint) -> Result<Surface> {
    sf.validate(&pole)?;
    let m = lambda * lambda + sf.k();
    if !(lambda >= 0.0 && m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "a sphere needs λ ≥ 0 and λ² + κ > 0, got λ = {lambda}, κ = {}",
            sf.kappa()
        )));
    }
    let tau = 4.0 * m;
    Ok(Surface::Sphere(Sphere { sf, lambda, pole, s_max: 2.0 * PI / tau.sqrt() }))
}

/// Strip over Γ = `generator`, whose curvature μ is `generator.lambda`.
pub fn build_strip(sf: SpaceForm, lambda: f64, generator: GeodesicSpec, it: &Integrator) -> Result<Surface> {
    sf.validate(&generator.base)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("a strip needs λ ≥ 0, got {lambda}")));
    }
    let mu = generator.lambda;
    let s: Vec<f64> = (0..9).map(|i| -0.02 + 0.005 * i as f64).collect();
    let states = it.sample(&sf, &generator, &s)?;
    let est = curvature_estimate(&sf, &states)?;
    if (est - mu).abs() > 1e-5 * (1.0 + mu.abs()) {
        return Err(Error::InvalidInput(format!("generator curvature estimate {est} differs from μ = {mu}")));
    }
    let tau = 4.0 * (lambda * lambda + sf.k());
    let v = solve_vertical(tau, 0.0, -2.0, -4.0 * mu);
    let s0 = strip_first_zero(&v, mu)?;
    Ok(Surface::Strip(Strip { sf, lambda, generator, mu, s0 }))
}

/// First positive zero of v = −2s − 2μs² + O(τ). Whether it exists is
/// decided from the closed form; its location by a scan and Brent.
fn strip_first_zero(v: &VerticalComponent, mu: f64) -> Result<Option<f64>> {
    let tau = v.tau;
    let upper = if tau > 0.0 {
        2.0 * PI / tau.sqrt() * 1.01
    } else if mu >= 0.0 {
        return Ok(None);
    } else if tau == 0.0 {
        2.0 / mu.abs()
    } else {
        let k = (-tau).sqrt();
        let r = k / (2.0 * mu.abs());
        if r >= 1.0 {
            return Ok(None);
        }
        4.0 / k * r.atanh() + 1.0
    };
    let step = scan_step(tau).min(upper / 64.0);
    let start = upper * 1e-9;
    let roots = scan_roots(|s| v.value(s), start, upper, step, ROOT_TOL)?;
    roots
        .first()
        .copied()
        .map(Some)
        .ok_or_else(|| Error::InvalidInput("no zero of v found for the strip".into()))
}

fn scan_step(tau: f64) -> f64 {
    if tau == 0.0 {
        0.1
    } else {
        PI / (8.0 * tau.abs().sqrt())
    }
}

impl Surface {
    pub fn family(&self) -> Family {
        match self {
            Surface::Helicoid(_) => Family::Helicoid,
            Surface::PolePlane(_) => Family::PolePlane,
            Surface::Sphere(_) => Family::Sphere,
            Surface::Strip(_) => Family::Strip,
        }
    }

    pub fn sf(&self) -> SpaceForm {
        match self {
            Surface::Helicoid(h) => h.sf,
            Surface::PolePlane(p) => p.sf,
            Surface::Sphere(p) => p.sf,
            Surface::Strip(p) => p.sf,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Surface::Helicoid(h) => h.lambda,
            Surface::PolePlane(p) => p.lambda,
            Surface::Sphere(p) => p.lambda,
            Surface::Strip(p) => p.lambda,
        }
    }

    /// τ = 4(λ² + κ).
    pub fn tau(&self) -> f64 {
        4.0 * (self.lambda().powi(2) + self.sf().k())
    }

    /// Sign in N = ±(−v J(γ̇) + (v′/2) T)/|…| making H = λ where v > 0
    /// (v < 0 for strips).
    pub fn orientation(&self) -> f64 {
        match self {
            Surface::Strip(_) => -1.0,
            _ => 1.0,
        }
    }

    pub fn vertical(&self, eps: f64) -> Result<VerticalComponent> {
        let tau = self.tau();
        Ok(match self {
            Surface::Helicoid(h) => {
                h.sigma.check_domain(eps)?;
                let sp = h.sigma.sigma_prime(&h.sf, eps);
                solve_vertical(tau, 1.0, 0.0, 2.0 * sp - 4.0 * h.sf.k())
            }
            Surface::PolePlane(_) | Surface::Sphere(_) => solve_vertical(tau, 0.0, 0.0, 2.0),
            Surface::Strip(st) => solve_vertical(tau, 0.0, -2.0, -4.0 * st.mu),
        })
    }

    pub fn jacobi_field(&self, eps: f64) -> Result<JacobiField> {
        let alpha_t = if self.family() == Family::Helicoid { 1.0 } else { 0.0 };
        Ok(JacobiField { lambda: self.lambda(), alpha_t, alpha_u: 0.0, v: self.vertical(eps)? })
    }

    /// Closed-form (v, v′, v″, v‴) at (ε, s).
    pub fn jet(&self, eps: f64, s: f64) -> Result<VerticalJet> {
        Ok(self.vertical(eps)?.eval(s))
    }

    /// Parameter range of s.
    pub fn s_domain(&self) -> (f64, f64) {
        match self {
            Surface::Helicoid(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Surface::PolePlane(_) => (0.0, f64::INFINITY),
            Surface::Sphere(p) => (0.0, p.s_max),
            Surface::Strip(p) => (0.0, p.s0.unwrap_or(f64::INFINITY)),
        }
    }

    pub fn eps_domain(&self) -> Option<(f64, f64)> {
        match self {
            Surface::Helicoid(h) => h.sigma.domain(),
            _ => None,
        }
    }

    pub fn check_params(&self, eps: f64, s: f64) -> Result<()> {
        if !(eps.is_finite() && s.is_finite()) {
            return Err(Error::InvalidInput("surface parameters must be finite".into()));
        }
        let (lo, hi) = self.s_domain();
        let slack = 1e-12 * hi.abs().min(1e12).max(1.0);
        if s < lo - slack || s > hi + slack {
            return Err(Error::InvalidInput(format!(
                "s = {s} outside the {} domain [{lo}, {hi}]",
                self.family().name()
            )));
        }
        if let Some((a, b)) = self.eps_domain() {
            if eps < a || eps > b {
                return Err(Error::InvalidInput(format!("ε = {eps} outside [{a}, {b}]")));
            }
        }
        Ok(())
    }

    /// Initial data (γ_ε(0), γ̇_ε(0)) for each ε.
    pub fn initial_specs(&self, eps: &[f64], it: &Integrator) -> Result<Vec<GeodesicSpec>> {
        let lambda = self.lambda();
        match self {
            Surface::Helicoid(h) => eps
                .iter()
                .map(|&e| {
                    h.sigma.check_domain(e)?;
                    Ok(GeodesicSpec::new(h.sf.axis_point(e), h.sigma.sigma(&h.sf, e), lambda))
                })
                .collect(),
            Surface::PolePlane(PolePlane { pole, .. }) | Surface::Sphere(Sphere { pole, .. }) => {
                Ok(eps.iter().map(|&th| GeodesicSpec::new(*pole, th, lambda)).collect())
            }
            Surface::Strip(st) => {
                let gammas = it.sample(&st.sf, &st.generator, eps)?;
                Ok(gammas
                    .into_iter()
                    .map(|g| GeodesicSpec::new(g.position, g.velocity.angle() + FRAC_PI_2, lambda))
                    .collect())
            }
        }
    }

    /// Points along one characteristic curve.
    pub fn curve(&self, eps: f64, s: &[f64], it: &Integrator) -> Result<Vec<SurfacePoint>> {
        for &si in s {
            self.check_params(eps, si)?;
        }
        let spec = self.initial_specs(&[eps], it)?[0];
        let states = it.sample(&self.sf(), &spec, s)?;
        let jf = self.jacobi_field(eps)?;
        Ok(states.into_iter().map(|st| point_from_state(eps, &st, &jf)).collect())
    }

    /// The state γ_ε(s); used as the flow F for finite differences in ε.
    pub fn flow_state(&self, eps: f64, s: f64, it: &Integrator) -> Result<GeodesicState> {
        let spec = self.initial_specs(&[eps], it)?[0];
        Ok(it.sample(&self.sf(), &spec, &[s])?[0])
    }
}

fn point_from_state(eps: f64, st: &GeodesicState, jf: &JacobiField) -> SurfacePoint {
    SurfacePoint {
        eps,
        s: st.s,
        position: st.position,
        zdir: st.velocity,
        vdir: jf.jacobi_vector(st.s),
        jet: jf.v.eval(st.s),
    }
}

pub fn eval_surface(surf: &Surface, eps: f64, s: f64, it: &Integrator) -> Result<SurfacePoint> {
    Ok(surf.curve(eps, &[s], it)?[0])
}

/// Immersion and singular-set status of a helicoid on the ε-window, from
/// θ′ sampled at `samples` points. Other families have fixed answers.
pub fn immersion_status(surf: &Surface, window: (f64, f64), samples: usize) -> Result<ImmersionStatus> {
    let h = match surf {
        Surface::Helicoid(h) => h,
        Surface::PolePlane(_) | Surface::Sphere(_) | Surface::Strip(_) => {
            return Ok(ImmersionStatus {
                immersed: true,
                singular_set_empty: false,
                vertical_surface: false,
                violated: None,
            })
        }
    };
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && a <= b) || samples < 2 {
        return Err(Error::InvalidInput(format!("bad ε-window [{a}, {b}] with {samples} samples")));
    }
    let sf = h.sf;
    let mut thetas = Vec::with_capacity(samples);
    for i in 0..samples {
        let e = a + (b - a) * i as f64 / (samples - 1) as f64;
        h.sigma.check_domain(e)?;
        let tp = h.sigma.theta_prime(&sf, e);
        if !tp.is_finite() {
            return Err(Error::InvalidInput(format!("θ′ is not finite at ε = {e}")));
        }
        thetas.push((e, tp));
    }
    let tol = 1e-12;
    let vertical_value = if sf.kappa() == 1 { 1.0 } else { 0.0 };
    let vertical_surface = thetas.iter().all(|&(_, t)| (t - vertical_value).abs() <= tol);
    let tau = surf.tau();
    if tau <= 0.0 {
        let bad = thetas.iter().find(|&&(_, t)| t < -tol);
        return Ok(ImmersionStatus {
            immersed: true,
            singular_set_empty: bad.is_none(),
            vertical_surface,
            violated: None,
        });
    }
    let lambda = h.lambda;
    let (critical, label) = if sf.kappa() == 1 {
        (-lambda * lambda, "−λ²")
    } else {
        (-(lambda * lambda + sf.k()), "−(λ² + κ)")
    };
    let above = thetas.iter().all(|&(_, t)| t > critical + tol);
    let below = thetas.iter().all(|&(_, t)| t < critical - tol);
    if above || below {
        return Ok(ImmersionStatus { immersed: true, singular_set_empty: above, vertical_surface, violated: None });
    }
    let at = thetas
        .iter()
        .min_by(|x, y| (x.1 - critical).abs().total_cmp(&(y.1 - critical).abs()))
        .map(|x| x.0)
        .unwrap_or(a);
    Ok(ImmersionStatus {
        immersed: false,
        singular_set_empty: false,
        vertical_surface,
        violated: Some(format!(
            "immersion needs θ′ ≠ {label} = {critical} on the window; it is attained near ε = {at}"
        )),
    })
}

/// Zeros of v and of v′ on [s_lo, s_hi] along the curve at ε.
pub fn locate_singular_vertical(surf: &Surface, eps: f64, s_range: (f64, f64)) -> Result<CriticalPoints> {
    let v = surf.vertical(eps)?;
    let (lo, hi) = s_range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidInput(format!("bad s-range [{lo}, {hi}]")));
    }
    let step = scan_step(v.tau);
    if v.is_constant() {
        let singular = if v.v0 == 0.0 { vec![lo, hi] } else { Vec::new() };
        return Ok(CriticalPoints { singular, vertical: Vec::new(), all_vertical: v.v0 != 0.0 });
    }
    let mut singular = scan_roots(|s| v.value(s), lo, hi, step, ROOT_TOL)?;
    let dv = scan_roots(|s| v.eval(s).vp, lo, hi, step, ROOT_TOL)?;
    let scale = (0..=64)
        .map(|i| v.value(lo + (hi - lo) * i as f64 / 64.0).abs())
        .fold(1.0f64, f64::max);
    let mut vertical = Vec::new();
    for r in dv {
        if v.value(r).abs() <= 1e-9 * scale {
            // Double zero of v: the scan on v cannot see a sign change.
            if !singular.iter().any(|x| (x - r).abs() < 1e-9) {
                singular.push(r);
            }
        } else {
            vertical.push(r);
        }
    }
    // Zeros of even order at the range ends are invisible to both scans.
    for end in [lo, hi] {
        if v.value(end).abs() <= 1e-9 * scale && !singular.iter().any(|x| (x - end).abs() < 1e-9) {
            singular.push(end);
        }
    }
    singular.sort_by(f64::total_cmp);
    Ok(CriticalPoints { singular, vertical, all_vertical: false })
}

/// (v² + v′²/4)^{1/2}: the area density da/(dε ds).
pub fn area_density(jet: &VerticalJet) -> f64 {
    (jet.v * jet.v + 0.25 * jet.vp * jet.vp).sqrt()
}

pub fn area_element(_surf: &Surface, pt: &SurfacePoint) -> f64 {
    area_density(&pt.jet)
}

/// Unit normal oriented so that H = λ where v has the family's sign.
pub fn unit_normal(surf: &Surface, pt: &SurfacePoint) -> Result<FrameVector> {
    let j = pt.jet;
    let den = area_density(&j);
    if !(den > 0.0) {
        return Err(Error::Singular(format!("v = v′ = 0 at (ε, s) = ({}, {})", pt.eps, pt.s)));
    }
    let n = -j.v * pt.zdir.j() + 0.5 * j.vp * FrameVector::T;
    Ok((surf.orientation() / den) * n)
}

/// Sub-Riemannian area ∫|N_h| da = ∫|v| dε ds over a parameter rectangle.
pub fn patch_area(surf: &Surface, rect: Rect, spec: &QuadratureSpec) -> Result<f64> {
    if rect.area() == 0.0 {
        return Ok(0.0);
    }
    for (e, s) in [(rect.x0, rect.y0), (rect.x1, rect.y1)] {
        surf.check_params(e, s)?;
    }
    let f = |e: f64, s: f64| surf.vertical(e).map(|v| v.value(s).abs()).unwrap_or(f64::NAN);
    Ok(integrate_adaptive(&f, rect, spec)?.value)
}
