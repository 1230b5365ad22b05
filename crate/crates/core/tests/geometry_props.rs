use ccforms_core::angle::{AngleFunction, AngleKind};
use ccforms_core::geodesic::{GeodesicSpec, Integrator};
use ccforms_core::geometry::{
    derivative_identities, local_geometry_at, mean_curvature, numeric_curve_data, shape_entries, surface_frame,
    MeanCurvatureMode,
};
use ccforms_core::model_space::{AmbientPoint, FrameVector, SpaceForm};
use ccforms_core::surfaces::{build_helicoid, build_pole_surface, build_sphere, build_strip, eval_surface, Surface};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn it() -> Integrator {
    Integrator::new(1e-12)
}

/// Regular members of each family with a regular (ε, s) box.
fn families() -> Vec<(Surface, (f64, f64), (f64, f64))> {
    let h = SpaceForm::hyperbolic();
    let z = SpaceForm::heisenberg();
    let s = SpaceForm::sphere();
    let sphere = build_sphere(s, 0.5, AmbientPoint::sphere(0.5, -0.5, 0.5, 0.5)).unwrap();
    let s_max = match &sphere {
        Surface::Sphere(p) => p.s_max,
        _ => unreachable!(),
    };
    let strip = build_strip(z, 0.5, GeodesicSpec::new(AmbientPoint::flat(0.2, 0.1, 0.0), 0.7, -1.0), &it()).unwrap();
    let s0 = match &strip {
        Surface::Strip(p) => p.s0.unwrap(),
        _ => unreachable!(),
    };
    vec![
        (build_helicoid(h, 0.5, AngleFunction::linear(AngleKind::Theta, 0.0, 0.3)).unwrap(), (-1.5, 1.5), (-2.0, 2.0)),
        (build_helicoid(h, 0.0, AngleFunction::linear(AngleKind::Theta, 0.0, 1.0)).unwrap(), (-1.0, 1.0), (-2.0, 2.0)),
        (build_helicoid(z, 0.3, AngleFunction::arctan(AngleKind::Sigma, 0.0, 1.0)).unwrap(), (-1.0, 1.0), (-1.5, 1.5)),
        (build_pole_surface(h, 0.5, AmbientPoint::flat(0.1, -0.2, 0.3)).unwrap(), (-3.0, 3.0), (0.05, 2.0)),
        (build_pole_surface(z, 0.0, AmbientPoint::flat(0.0, 0.0, 0.0)).unwrap(), (-3.0, 3.0), (0.05, 2.0)),
        (sphere, (-3.0, 3.0), (0.05, s_max - 0.05)),
        (strip, (-1.0, 1.0), (0.02, s0 - 0.02)),
    ]
}

fn tangential(w: FrameVector, n: FrameVector) -> FrameVector {
    w - w.dot(n) * n
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn adapted_frame_is_orthonormal(idx in 0usize..7, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (surf, (e0, e1), (s0, s1)) = families().swap_remove(idx);
        let (e, s) = (e0 + (e1 - e0) * a, s0 + (s1 - s0) * b);
        let pt = eval_surface(&surf, e, s, &it()).unwrap();
        let f = surface_frame(&surf, &pt).unwrap();
        let basis = [f.z, f.s, f.n];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((basis[i].dot(basis[j]) - want).abs() <= 1e-10);
            }
        }
        prop_assert!((f.z - f.nu_h.j()).max_abs() <= 1e-12);
        prop_assert!(f.z.dot(f.nu_h).abs() <= 1e-12);
        prop_assert!((f.s.dot(FrameVector::T) + f.nh).abs() <= 1e-12);
        // Relations between |N_h|, ⟨N,T⟩ and the tangential projections.
        prop_assert!((f.nh * f.nh + f.nt * f.nt - 1.0).abs() <= 1e-10);
        prop_assert!((tangential(f.nu_h, f.n) - f.nt * f.s).max_abs() <= 1e-9);
        prop_assert!((tangential(FrameVector::T, f.n) + f.nh * f.s).max_abs() <= 1e-9);
        // The frame normal is the unit normal from the Jacobi field.
        let v = pt.vdir;
        let ambient_v = ccforms_core::jacobi::moving_to_frame(pt.zdir, v);
        prop_assert!(ambient_v.dot(f.n).abs() <= 1e-10 * v.norm().max(1.0));
    }
}

#[test]
fn derivative_identities_hold() {
    for (surf, (e0, e1), (s0, s1)) in families() {
        for i in 0..=10 {
            for k in 0..=10 {
                let e = e0 + (e1 - e0) * i as f64 / 10.0;
                let s = s0 + (s1 - s0) * k as f64 / 10.0;
                let pt = eval_surface(&surf, e, s, &it()).unwrap();
                let r = derivative_identities(&surf, &pt).unwrap();
                assert!(r.z_nh.abs() <= 1e-7 && r.z_nt.abs() <= 1e-7, "{} {:?}", surf.family().name(), r);
                let se = shape_entries(&surf, &pt).unwrap();
                let f = surface_frame(&surf, &pt).unwrap();
                assert!((se.bzz - 2.0 * se.h * f.nh).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn exact_mean_curvature_is_lambda() {
    for (surf, (e0, _), (s0, s1)) in families() {
        let pt = eval_surface(&surf, e0, 0.5 * (s0 + s1), &it()).unwrap();
        let h = mean_curvature(&surf, &pt, MeanCurvatureMode::Exact, &it()).unwrap();
        assert_eq!(h, surf.lambda());
    }
}

#[test]
fn numeric_mean_curvature_is_constant_on_grids() {
    let it = Integrator::new(1e-13);
    for (surf, (e0, e1), (s0, s1)) in families() {
        let n = 50;
        let s: Vec<f64> = (0..n).map(|k| s0 + (s1 - s0) * k as f64 / (n - 1) as f64).collect();
        let mut hs = Vec::with_capacity(n * n);
        for i in 0..n {
            let e = e0 + (e1 - e0) * i as f64 / (n - 1) as f64;
            hs.extend(numeric_curve_data(&surf, e, &s, &it).unwrap().iter().map(|d| d.h));
        }
        let mean = hs.iter().sum::<f64>() / hs.len() as f64;
        let sd = (hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / hs.len() as f64).sqrt();
        assert!((mean - surf.lambda()).abs() < 1e-6, "{} mean {mean}", surf.family().name());
        assert!(sd < 1e-6, "{} sd {sd}", surf.family().name());
    }
}

#[test]
fn numeric_shape_operator_decomposes_q() {
    let it = Integrator::new(1e-13);
    for (surf, (e0, e1), (s0, s1)) in families() {
        let k = surf.sf().k();
        for i in 0..=6 {
            let e = e0 + (e1 - e0) * i as f64 / 6.0;
            let s: Vec<f64> = (0..=8).map(|j| s0 + (s1 - s0) * j as f64 / 8.0).collect();
            for d in numeric_curve_data(&surf, e, &s, &it).unwrap() {
                let pt = eval_surface(&surf, e, d.s, &it).unwrap();
                let f = surface_frame(&surf, &pt).unwrap();
                let lg = local_geometry_at(&surf, e, d.s).unwrap();
                let lhs = (d.bz + f.s).dot(d.bz + f.s) + 4.0 * (k - 1.0) * f.nh * f.nh;
                let rhs = 4.0 * (lg.h * lg.h + k - 1.0) * f.nh * f.nh + (1.0 + lg.bzs).powi(2);
                assert!((lhs - rhs).abs() <= 1e-8, "{} at ({e}, {}): {lhs} vs {rhs}", surf.family().name(), d.s);
                assert!((lhs - lg.q).abs() <= 1e-8);
                assert!(d.bz.dot(f.n).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn plane_shape_entries() {
    let h = SpaceForm::hyperbolic();
    for lambda in [0.0, 0.5, 1.0] {
        let surf = build_pole_surface(h, lambda, h.origin()).unwrap();
        let mu2 = 1.0 - lambda * lambda;
        for (e, s) in [(0.3, 0.2), (-2.0, 1.1), (1.0, 2.5)] {
            let pt = eval_surface(&surf, e, s, &it()).unwrap();
            let se = shape_entries(&surf, &pt).unwrap();
            let nh = surface_frame(&surf, &pt).unwrap().nh;
            assert!((se.bzs - (1.0 + mu2) * nh * nh).abs() < 1e-12);
            assert!((se.bss - lambda * nh * (1.0 - (1.0 + mu2) * nh * nh)).abs() < 1e-9);
        }
    }
}

#[test]
fn vertical_surface_q() {
    for (k, lambda) in [(1, 0.0), (1, 0.6), (0, 0.4), (-1, 0.3)] {
        let sf = SpaceForm::new(k).unwrap();
        let slope = 2.0 * k as f64;
        let surf = build_helicoid(sf, lambda, AngleFunction::linear(AngleKind::Sigma, 0.1, slope)).unwrap();
        let lg = local_geometry_at(&surf, 0.3, 1.7).unwrap();
        assert!((lg.q - 4.0 * (lambda * lambda + sf.k())).abs() < 1e-12);
    }
}
