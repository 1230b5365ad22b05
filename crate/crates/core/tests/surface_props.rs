use ccforms_core::angle::{AngleFunction, AngleKind};
use ccforms_core::geodesic::{curvature_estimate, GeodesicSpec, GeodesicState, Integrator};
use ccforms_core::jacobi::{moving_to_frame, numeric_jacobi};
use ccforms_core::model_space::{AmbientPoint, FrameVector, SpaceForm};
use ccforms_core::surfaces::{build_helicoid, build_pole_surface, build_sphere, build_strip, eval_surface, Surface};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn it() -> Integrator {
    Integrator::new(1e-12)
}

/// One member of each family with its (ε, s) sampling box.
fn families() -> Vec<(Surface, (f64, f64), (f64, f64))> {
    let h = SpaceForm::hyperbolic();
    let z = SpaceForm::heisenberg();
    let s = SpaceForm::sphere();
    let helicoid = build_helicoid(h, 0.5, AngleFunction::linear(AngleKind::Theta, 0.2, 0.3)).unwrap();
    let plane = build_pole_surface(h, 0.5, AmbientPoint::flat(0.1, -0.2, 0.3)).unwrap();
    let sphere = build_sphere(s, 0.5, AmbientPoint::sphere(0.5, -0.5, 0.5, 0.5)).unwrap();
    let strip = build_strip(z, 0.5, GeodesicSpec::new(AmbientPoint::flat(0.2, 0.1, 0.0), 0.7, -1.0), &it()).unwrap();
    let s_sphere = match &sphere {
        Surface::Sphere(p) => p.s_max,
        _ => unreachable!(),
    };
    let s_strip = match &strip {
        Surface::Strip(p) => p.s0.unwrap(),
        _ => unreachable!(),
    };
    vec![
        (helicoid, (-1.5, 1.5), (-2.0, 2.0)),
        (plane, (-3.0, 3.0), (0.05, 2.0)),
        (sphere, (-3.0, 3.0), (0.05, s_sphere - 0.05)),
        (strip, (-1.0, 1.0), (0.0, s_strip)),
    ]
}

proptest! {
    #![proptest_config(config(1))]

    #[test]
    fn jacobi_oracle_on_every_family(u in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 50)) {
        for (surf, (e0, e1), (s0, s1)) in families() {
            for &(a, b) in &u {
                let (e, s) = (e0 + (e1 - e0) * a, s0 + (s1 - s0) * b);
                let flow = |x: f64| surf.flow_state(x, s, &it());
                let num = numeric_jacobi(&surf.sf(), flow, e, 1e-3).unwrap();
                let exact = surf.jacobi_field(e).unwrap().jacobi_vector(s);
                prop_assert!((num - exact).max_abs() <= 1e-6,
                    "{} at ({}, {}): {:?} vs {:?}", surf.family().name(), e, s, num, exact);
            }
        }
    }
}

#[test]
fn helicoid_initial_data() {
    for k in [-1, 0, 1] {
        let sf = SpaceForm::new(k).unwrap();
        let sigma = AngleFunction::arctan(AngleKind::Sigma, 0.1, 0.8);
        let surf = build_helicoid(sf, 0.3, sigma.clone()).unwrap();
        for e in [-1.0, 0.0, 0.6] {
            let j = surf.jet(e, 0.0).unwrap();
            assert_eq!((j.v, j.vp), (1.0, 0.0));
            assert!((j.vpp - (2.0 * sigma.sigma_prime(&sf, e) - 4.0 * sf.k())).abs() < 1e-15);
        }
    }
}

fn singular_curve(surf: &Surface, eps: &[f64]) -> Vec<GeodesicState> {
    let s0 = match surf {
        Surface::Strip(p) => p.s0.unwrap(),
        _ => unreachable!(),
    };
    eps.iter()
        .map(|&e| {
            let centre = surf.flow_state(e, s0, &it()).unwrap();
            let m = numeric_jacobi(&surf.sf(), |x| surf.flow_state(x, s0, &it()), e, 1e-3).unwrap();
            GeodesicState { s: e, position: centre.position, velocity: moving_to_frame(centre.velocity, m) }
        })
        .collect()
}

#[test]
fn strip_singular_curve_meets_orthogonally_and_has_curvature_mu() {
    let cases = [
        (SpaceForm::heisenberg(), 0.0, AmbientPoint::flat(0.0, 0.0, 0.0), -1.0),
        (SpaceForm::heisenberg(), 0.5, AmbientPoint::flat(0.3, -0.4, 1.0), -1.5),
        (SpaceForm::hyperbolic(), 0.5, AmbientPoint::flat(0.1, 0.1, 0.0), -2.0),
        (SpaceForm::sphere(), 0.3, AmbientPoint::sphere(0.5, 0.5, 0.5, 0.5), 0.8),
    ];
    for (sf, lambda, base, mu) in cases {
        let surf = build_strip(sf, lambda, GeodesicSpec::new(base, 0.4, mu), &it()).unwrap();
        let eps: Vec<f64> = (0..11).map(|i| -0.25 + 0.05 * i as f64).collect();
        let states = singular_curve(&surf, &eps);
        for (st, &e) in states.iter().zip(&eps) {
            let s0 = match &surf {
                Surface::Strip(p) => p.s0.unwrap(),
                _ => unreachable!(),
            };
            let g = surf.flow_state(e, s0, &it()).unwrap().velocity;
            assert!(st.velocity.dot(g).abs() < 1e-6, "κ={} orthogonality", sf.kappa());
            assert!((st.velocity - g.j()).max_abs() < 1e-6, "κ={} Γ̇₀ = Jγ̇", sf.kappa());
        }
        let k = curvature_estimate(&sf, &states).unwrap();
        assert!((k - mu).abs() < 1e-5, "κ={} curvature {} vs μ={}", sf.kappa(), k, mu);
    }
}

#[test]
fn helicoids_satisfy_their_implicit_equations() {
    let it = it();
    for (k, f) in [
        (0, AngleFunction::linear(AngleKind::Sigma, 0.3, 0.7)),
        (0, AngleFunction::arctan(AngleKind::Sigma, 0.0, 1.0)),
        (-1, AngleFunction::linear(AngleKind::Theta, 0.3, 0.5)),
        (-1, AngleFunction::arctan(AngleKind::Theta, 0.0, 1.0)),
    ] {
        let sf = SpaceForm::new(k).unwrap();
        let surf = build_helicoid(sf, 0.0, f.clone()).unwrap();
        for e in [-1.2, -0.3, 0.0, 0.8] {
            for s in [-3.0, -0.7, 0.4, 2.5] {
                let p = eval_surface(&surf, e, s, &it).unwrap().position.padded();
                let (x, y, t) = (p[0], p[1], p[2]);
                let a = if k == 0 { f.sigma(&sf, t) } else { f.theta(&sf, t) };
                let r = x * a.sin() - y * a.cos();
                assert!(r.abs() < 1e-8, "κ={k} residual {r} at ({e}, {s})");
            }
        }
    }
}

#[test]
fn characteristic_direction_on_axis_is_sigma() {
    let surf = build_helicoid(SpaceForm::hyperbolic(), 0.0, AngleFunction::constant_sigma(0.0)).unwrap();
    let p = eval_surface(&surf, 0.0, 0.0, &it()).unwrap();
    assert_eq!(p.zdir, FrameVector::X);
}
