//! Horizontal geometry of the constructed surfaces: the frame {Z, S, N},
//! |N_h|, ⟨N,T⟩, shape-operator entries and mean curvature.
//!
//! On every family the characteristic curves are the s-lines, so Z = δγ̇
//! with δ = sign(orientation · v), and Z-derivatives are exact
//! s-derivatives of the closed-form v.

use crate::error::{Error, Result};
use crate::geodesic::Integrator;
use crate::jacobi::VerticalJet;
use crate::jet::Jet;
use crate::model_space::{Connection, FrameVector};
use crate::surfaces::{unit_normal, Surface, SurfacePoint};

/// Step for central differences in ε.
pub const EPS_STEP: f64 = 1e-5;
/// Step for stencils along s on integrated curves.
pub const S_STEP: f64 = 1e-3;

/// Closed-form normal data at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalGeometry {
    pub jet: VerticalJet,
    /// sign(orientation · v): Z = δγ̇, ν_h = −δ J(γ̇).
    pub delta: f64,
    /// |N_h| with its s-derivatives.
    pub nh: Jet,
    /// ⟨N,T⟩ with its s-derivatives.
    pub nt: Jet,
    /// ⟨B(Z),S⟩.
    pub bzs: f64,
    /// H, equal to δλ.
    pub h: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceFrame {
    pub n: FrameVector,
    pub nu_h: FrameVector,
    pub z: FrameVector,
    pub s: FrameVector,
    pub nh: f64,
    pub nt: f64,
    pub at: SurfacePoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeEntries {
    pub bzz: f64,
    pub bzs: f64,
    pub bss: f64,
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanCurvatureMode {
    Exact,
    Numeric,
}

/// Residuals of Z(|N_h|) = ⟨N,T⟩(1 − bzs) and Z(⟨N,T⟩) = |N_h|(bzs − 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeResiduals {
    pub z_nh: f64,
    pub z_nt: f64,
}

/// Values obtained by differencing along an integrated curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericCurveData {
    pub s: f64,
    /// ½⟨D_Z Z, ν_h⟩.
    pub h: f64,
    /// B(Z) = −D_Z N in frame components.
    pub bz: FrameVector,
    pub bzz: f64,
    pub bzs: f64,
}

/// Closed-form data from the Jacobi profile. Fails on the singular set.
pub fn local_geometry(surf: &Surface, jet: VerticalJet) -> Result<LocalGeometry> {
    if jet.v == 0.0 || !jet.v.is_finite() {
        return Err(Error::Singular(format!("v = {} (singular set)", jet.v)));
    }
    let so = surf.orientation();
    let sign_v = jet.v.signum();
    let delta = so * sign_v;
    let jv = Jet::new(jet.v, jet.vp, jet.vpp);
    let jvp = Jet::new(jet.vp, jet.vpp, jet.vppp);
    let w = (jv * jv).scale(4.0) + jvp * jvp;
    let w = w.sqrt();
    let nt = (jvp / w).scale(so);
    let nh = (jv / w).scale(2.0 * sign_v);
    let w2 = 4.0 * jet.v * jet.v + jet.vp * jet.vp;
    let bzs = (2.0 * jet.v * jet.vpp + 4.0 * jet.v * jet.v - jet.vp * jet.vp) / w2;
    let h = delta * surf.lambda();
    let k = surf.sf().k();
    let bzz = 2.0 * h * nh.v;
    let q = bzz * bzz + (1.0 + bzs).powi(2) + 4.0 * (k - 1.0) * nh.v * nh.v;
    Ok(LocalGeometry { jet, delta, nh, nt, bzs, h, q })
}

pub fn local_geometry_at(surf: &Surface, eps: f64, s: f64) -> Result<LocalGeometry> {
    local_geometry(surf, surf.jet(eps, s)?)
}

pub fn surface_frame(surf: &Surface, pt: &SurfacePoint) -> Result<SurfaceFrame> {
    let lg = local_geometry(surf, pt.jet)?;
    let n = unit_normal(surf, pt)?;
    let gdot = pt.zdir;
    let nu_h = -lg.delta * gdot.j();
    let z = lg.delta * gdot;
    let s = lg.nt.v * nu_h - lg.nh.v * FrameVector::T;
    Ok(SurfaceFrame { n, nu_h, z, s, nh: lg.nh.v, nt: lg.nt.v, at: *pt })
}

/// S(⟨N,T⟩)/|N_h|, with S written as αV + βγ̇ and ∂_ε⟨N,T⟩ by Richardson
/// central differences of the closed form.
fn bss_value(surf: &Surface, eps: f64, s: f64, lg: &LocalGeometry, vdir_a: f64) -> Result<f64> {
    let alpha = -lg.nh.v / lg.jet.v;
    let beta = -alpha * vdir_a;
    let nt_at = |e: f64| -> Result<f64> { Ok(local_geometry_at(surf, e, s)?.nt.v) };
    let d_eps = if surf.family() == crate::surfaces::Family::Helicoid {
        let d = |h: f64| -> Result<f64> { Ok((nt_at(eps + h)? - nt_at(eps - h)?) / (2.0 * h)) };
        let (d1, d2) = (d(EPS_STEP)?, d(0.5 * EPS_STEP)?);
        (4.0 * d2 - d1) / 3.0
    } else {
        0.0
    };
    let s_nt = alpha * d_eps + beta * lg.nt.d1;
    Ok(s_nt / lg.nh.v)
}

pub fn shape_entries(surf: &Surface, pt: &SurfacePoint) -> Result<ShapeEntries> {
    let lg = local_geometry(surf, pt.jet)?;
    let bss = bss_value(surf, pt.eps, pt.s, &lg, pt.vdir.a)?;
    Ok(ShapeEntries { bzz: 2.0 * lg.h * lg.nh.v, bzs: lg.bzs, bss, h: lg.h })
}

/// Same as [`shape_entries`] from the parameters alone.
pub fn shape_entries_at(surf: &Surface, eps: f64, s: f64) -> Result<ShapeEntries> {
    let jf = surf.jacobi_field(eps)?;
    let lg = local_geometry(surf, jf.v.eval(s))?;
    let bss = bss_value(surf, eps, s, &lg, jf.jacobi_vector(s).a)?;
    Ok(ShapeEntries { bzz: 2.0 * lg.h * lg.nh.v, bzs: lg.bzs, bss, h: lg.h })
}

pub fn derivative_identities(surf: &Surface, pt: &SurfacePoint) -> Result<DerivativeResiduals> {
    let lg = local_geometry(surf, pt.jet)?;
    let z_nh = lg.delta * lg.nh.d1;
    let z_nt = lg.delta * lg.nt.d1;
    Ok(DerivativeResiduals {
        z_nh: z_nh - lg.nt.v * (1.0 - lg.bzs),
        z_nt: z_nt - lg.nh.v * (lg.bzs - 1.0),
    })
}

/// H at a point. The exact mode uses that the s-lines are CC-geodesics of
/// curvature λ; the numeric mode differences γ̇ along s.
pub fn mean_curvature(surf: &Surface, pt: &SurfacePoint, mode: MeanCurvatureMode, it: &Integrator) -> Result<f64> {
    let lg = local_geometry(surf, pt.jet)?;
    match mode {
        MeanCurvatureMode::Exact => Ok(lg.h),
        MeanCurvatureMode::Numeric => Ok(numeric_curve_data(surf, pt.eps, &[pt.s], it)?[0].h),
    }
}

/// Five-point stencil offsets and derivative weights (times 1/h) that stay
/// inside the s-domain.
fn stencil(domain: (f64, f64), s: f64, h: f64) -> ([f64; 5], [f64; 5]) {
    const CENTRAL: ([f64; 5], [f64; 5]) =
        ([-2.0, -1.0, 0.0, 1.0, 2.0], [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0]);
    const FORWARD: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];
    if s - 2.0 * h >= domain.0 && s + 2.0 * h <= domain.1 {
        CENTRAL
    } else if s - 2.0 * h < domain.0 {
        ([0.0, 1.0, 2.0, 3.0, 4.0], FORWARD)
    } else {
        ([0.0, -1.0, -2.0, -3.0, -4.0], FORWARD.map(|w| -w))
    }
}

/// H and B(Z) by differencing integrated velocities and normals along the
/// curve at ε.
pub fn numeric_curve_data(surf: &Surface, eps: f64, s: &[f64], it: &Integrator) -> Result<Vec<NumericCurveData>> {
    let sf = surf.sf();
    let con = Connection::koszul(&sf);
    let domain = surf.s_domain();
    let h = S_STEP;
    let stencils: Vec<([f64; 5], [f64; 5])> = s.iter().map(|&si| stencil(domain, si, h)).collect();
    let mut all_s = Vec::with_capacity(5 * s.len());
    for (&si, (off, _)) in s.iter().zip(&stencils) {
        all_s.extend(off.iter().map(|o| si + o * h));
    }
    let pts = surf.curve(eps, &all_s, it)?;
    let mut out = Vec::with_capacity(s.len());
    for (i, (&si, (off, wts))) in s.iter().zip(&stencils).enumerate() {
        let group = &pts[5 * i..5 * i + 5];
        let centre = group[off.iter().position(|&o| o == 0.0).unwrap_or(0)];
        let lg = local_geometry(surf, centre.jet)?;
        let gdot = centre.zdir;
        let mut dv = FrameVector::default();
        let mut dn = FrameVector::default();
        for (p, w) in group.iter().zip(wts) {
            dv += (w / h) * p.zdir;
            dn += (w / h) * unit_normal(surf, p)?;
        }
        let acc = con.covariant(gdot, gdot, dv);
        let nu_h = -lg.delta * gdot.j();
        let n0 = unit_normal(surf, &centre)?;
        let dzn = lg.delta * con.covariant(gdot, n0, dn);
        let bz = -dzn;
        let z = lg.delta * gdot;
        let sv = lg.nt.v * nu_h - lg.nh.v * FrameVector::T;
        out.push(NumericCurveData { s: si, h: 0.5 * acc.dot(nu_h), bz, bzz: bz.dot(z), bzs: bz.dot(sv) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::{AngleFunction, AngleKind};
    use crate::model_space::SpaceForm;
    use crate::surfaces::{build_helicoid, build_pole_surface, eval_surface};

    #[test]
    fn helicoid_axis_is_vertical_point() {
        let surf = build_helicoid(SpaceForm::hyperbolic(), 0.3, AngleFunction::linear(AngleKind::Theta, 0.0, 0.4))
            .unwrap();
        let it = Integrator::new(1e-12);
        let p = eval_surface(&surf, 0.2, 0.0, &it).unwrap();
        let f = surface_frame(&surf, &p).unwrap();
        assert_eq!(f.nt, 0.0);
        assert_eq!(f.nh, 1.0);
        assert!((f.n + p.zdir.j()).max_abs() < 1e-15);
        assert_eq!(f.z, p.zdir);
    }

    #[test]
    fn plane_normal_data() {
        let h = SpaceForm::heisenberg();
        let surf = build_pole_surface(h, 0.0, h.origin()).unwrap();
        let it = Integrator::new(1e-12);
        let p = eval_surface(&surf, 1.0, 0.8, &it).unwrap();
        let f = surface_frame(&surf, &p).unwrap();
        let (v, vp) = (p.jet.v, p.jet.vp);
        let w = (4.0 * v * v + vp * vp).sqrt();
        assert!((f.nh - 2.0 * v / w).abs() < 1e-15);
        assert!((f.nt - vp / w).abs() < 1e-15);
        assert!((f.z - f.nu_h.j()).max_abs() < 1e-15);
    }

    #[test]
    fn vertical_surface_has_bzs_one() {
        let s = SpaceForm::sphere();
        let surf = build_helicoid(s, 0.7, AngleFunction::linear(AngleKind::Sigma, 0.0, 2.0)).unwrap();
        let lg = local_geometry_at(&surf, 0.4, 1.3).unwrap();
        assert_eq!(lg.nt.v, 0.0);
        assert!((lg.bzs - 1.0).abs() < 1e-15);
        assert!((lg.q - 4.0 * (0.49 + 1.0)).abs() < 1e-13);
    }

    #[test]
    fn plane_znt_two_ways() {
        let h = SpaceForm::hyperbolic();
        let surf = build_pole_surface(h, 0.5, h.origin()).unwrap();
        let lg = local_geometry_at(&surf, 0.0, 0.9).unwrap();
        let d = 1e-5;
        let nt = |s: f64| {
            let j = surf.jet(0.0, s).unwrap();
            j.vp / (4.0 * j.v * j.v + j.vp * j.vp).sqrt()
        };
        let fd = (nt(0.9 + d) - nt(0.9 - d)) / (2.0 * d);
        assert!((fd - lg.nh.v * (lg.bzs - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn singular_point_is_rejected() {
        let h = SpaceForm::heisenberg();
        let surf = build_pole_surface(h, 0.0, h.origin()).unwrap();
        assert!(matches!(local_geometry_at(&surf, 0.0, 0.0), Err(Error::Singular(_))));
    }

    #[test]
    fn numeric_mean_curvature_on_plane() {
        let h = SpaceForm::hyperbolic();
        let surf = build_pole_surface(h, 0.6, h.origin()).unwrap();
        let it = Integrator::new(1e-13);
        let data = numeric_curve_data(&surf, 0.3, &[0.001, 0.5, 1.5], &it).unwrap();
        for d in data {
            assert!((d.h - 0.6).abs() < 1e-7, "s={} H={}", d.s, d.h);
        }
    }
}
