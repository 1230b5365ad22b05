//! Jacobi fields along CC-geodesics. The vertical component v = ⟨V, T⟩
//! solves v‴ + τv′ = 0 with τ = 4(λ² + κ); the full field is
//! V = (λ(⟨α̇,T⟩ − v) + ⟨α̇,U⟩) γ̇ + (v′/2) J(γ̇) + v T.

use crate::error::{Error, Result};
use crate::geodesic::GeodesicState;
use crate::model_space::{FrameVector, SpaceForm};

/// Below this |τ| the solution is evaluated from power series.
pub const SERIES_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerticalCase {
    /// τ < 0: sinh/cosh.
    Hyperbolic,
    /// τ = 0: quadratic polynomial.
    Polynomial,
    /// τ > 0: sin/cos.
    Trigonometric,
}

/// Solution of v‴ + τv′ = 0. The coefficients a, b, c are those of the
/// case formulas:
/// τ < 0: v = (a sinh(√−τ s) + b cosh(√−τ s))/√−τ + c,
/// τ = 0: v = a s² + b s + c,
/// τ > 0: v = (a sin(√τ s) − b cos(√τ s))/√τ + c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerticalComponent {
    pub tau: f64,
    pub case: VerticalCase,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub v0: f64,
    pub v0p: f64,
    pub v0pp: f64,
}

/// v and its first three derivatives at one s.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct VerticalJet {
    pub v: f64,
    pub vp: f64,
    pub vpp: f64,
    pub vppp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiField {
    pub lambda: f64,
    /// ⟨α̇, T⟩ at s = 0.
    pub alpha_t: f64,
    /// ⟨α̇, U⟩ at s = 0.
    pub alpha_u: f64,
    pub v: VerticalComponent,
}

pub fn solve_vertical(tau: f64, v0: f64, v0p: f64, v0pp: f64) -> VerticalComponent {
    let (case, a, b, c) = if tau < 0.0 {
        let k = (-tau).sqrt();
        (VerticalCase::Hyperbolic, v0p, v0pp / k, v0 + v0pp / tau)
    } else if tau == 0.0 {
        (VerticalCase::Polynomial, 0.5 * v0pp, v0p, v0)
    } else {
        let k = tau.sqrt();
        (VerticalCase::Trigonometric, v0p, v0pp / k, v0 + v0pp / tau)
    };
    VerticalComponent { tau, case, a, b, c, v0, v0p, v0pp }
}

impl VerticalComponent {
    /// (S1, C2, C) with S1 = sin(ks)/k, C2 = (1 − cos(ks))/k², C = cos(ks)
    /// for τ = k² > 0 and the hyperbolic analogues for τ < 0.
    fn basis(&self, s: f64) -> (f64, f64, f64) {
        let tau = self.tau;
        if tau.abs() < SERIES_THRESHOLD {
            // Σ (−τ)ⁿ s^{2n+1}/(2n+1)!, Σ (−τ)ⁿ s^{2n+2}/(2n+2)!, Σ (−τ)ⁿ s^{2n}/(2n)!
            let x = -tau * s * s;
            let (mut c, mut s1, mut c2) = (1.0, s, 0.5 * s * s);
            let (mut tc, mut ts, mut t2) = (1.0, s, 0.5 * s * s);
            for n in 1..60 {
                let m = 2.0 * n as f64;
                tc *= x / ((m - 1.0) * m);
                ts *= x / (m * (m + 1.0));
                t2 *= x / ((m + 1.0) * (m + 2.0));
                c += tc;
                s1 += ts;
                c2 += t2;
                if tc.abs() <= 1e-18 * c.abs() && ts.abs() <= 1e-18 * s1.abs().max(1e-300) {
                    break;
                }
            }
            return (s1, c2, c);
        }
        if tau > 0.0 {
            let k = tau.sqrt();
            let (sn, cs) = (k * s).sin_cos();
            let h = (0.5 * k * s).sin();
            (sn / k, 2.0 * h * h / tau, cs)
        } else {
            let k = (-tau).sqrt();
            let h = (0.5 * k * s).sinh();
            ((k * s).sinh() / k, 2.0 * h * h / (-tau), (k * s).cosh())
        }
    }

    pub fn eval(&self, s: f64) -> VerticalJet {
        let (s1, c2, c) = self.basis(s);
        let vp = self.v0p * c + self.v0pp * s1;
        VerticalJet {
            v: self.v0 + self.v0p * s1 + self.v0pp * c2,
            vp,
            vpp: self.v0pp * c - self.tau * self.v0p * s1,
            vppp: -self.tau * (self.v0p * c + self.v0pp * s1),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).v
    }

    /// Direct evaluation of the case formula with the stored a, b, c.
    /// Loses accuracy as τ → 0; `eval` is the stable route.
    pub fn case_formula(&self, s: f64) -> f64 {
        match self.case {
            VerticalCase::Hyperbolic => {
                let k = (-self.tau).sqrt();
                (self.a * (k * s).sinh() + self.b * (k * s).cosh()) / k + self.c
            }
            VerticalCase::Polynomial => self.a * s * s + self.b * s + self.c,
            VerticalCase::Trigonometric => {
                let k = self.tau.sqrt();
                (self.a * (k * s).sin() - self.b * (k * s).cos()) / k + self.c
            }
        }
    }

    /// 2vv″ − v′² + τv², constant along s.
    pub fn invariant(&self, s: f64) -> f64 {
        let j = self.eval(s);
        2.0 * j.v * j.vpp - j.vp * j.vp + self.tau * j.v * j.v
    }

    /// The invariant from the initial data.
    pub fn invariant_at_origin(&self) -> f64 {
        2.0 * self.v0 * self.v0pp - self.v0p * self.v0p + self.tau * self.v0 * self.v0
    }

    pub fn is_constant(&self) -> bool {
        self.v0p == 0.0 && self.v0pp == 0.0
    }
}

impl JacobiField {
    /// Components along (γ̇, J(γ̇), T).
    pub fn jacobi_vector(&self, s: f64) -> FrameVector {
        let j = self.v.eval(s);
        FrameVector::new(self.lambda * (self.alpha_t - j.v) + self.alpha_u, 0.5 * j.vp, j.v)
    }
}

pub fn jacobi_vector(jf: &JacobiField, s: f64) -> FrameVector {
    jf.jacobi_vector(s)
}

/// Frame components of m₁γ̇ + m₂J(γ̇) + m₃T.
pub fn moving_to_frame(gdot: FrameVector, m: FrameVector) -> FrameVector {
    m.a * gdot + m.b * gdot.j() + m.c * FrameVector::T
}

/// Components of w along (γ̇, J(γ̇), T) for horizontal unit γ̇.
pub fn frame_to_moving(gdot: FrameVector, w: FrameVector) -> FrameVector {
    FrameVector::new(w.dot(gdot), w.dot(gdot.j()), w.c)
}

/// Central-difference ∂F/∂ε at fixed s, Richardson-extrapolated from steps
/// h and h/2, expressed in the moving basis at F(ε, s). `flow(ε′)` returns
/// the state γ_ε′(s).
pub fn numeric_jacobi<F>(sf: &SpaceForm, flow: F, eps: f64, h: f64) -> Result<FrameVector>
where
    F: Fn(f64) -> Result<GeodesicState>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let centre = flow(eps)?;
    let diff = |step: f64| -> Result<Vec<f64>> {
        let p = flow(eps + step)?.position.padded();
        let m = flow(eps - step)?.position.padded();
        Ok((0..sf.dim()).map(|i| (p[i] - m[i]) / (2.0 * step)).collect())
    };
    let d1 = diff(h)?;
    let d2 = diff(0.5 * h)?;
    let w: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let fv = sf.to_frame(&centre.position, &w)?;
    Ok(frame_to_moving(centre.velocity, fv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_helicoid_profile() {
        let th = 0.7;
        let v = solve_vertical(0.0, 1.0, 0.0, 2.0 * th);
        assert_eq!(v.case, VerticalCase::Polynomial);
        for s in [-2.0, 0.3, 1.5] {
            assert!((v.value(s) - (th * s * s + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn hyperbolic_helicoid_profile() {
        let th = 0.3;
        let tau = -4.0;
        let v = solve_vertical(tau, 1.0, 0.0, 2.0 * th);
        for s in [-1.0f64, 0.5, 2.0] {
            let want = (2.0 * th / tau) * (1.0 - (2.0 * s).cosh()) + 1.0;
            assert!((v.value(s) - want).abs() < 1e-12 * want.abs().max(1.0));
            assert!((v.case_formula(s) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn plane_profile_sinh_squared() {
        let mu: f64 = 0.8;
        let v = solve_vertical(4.0 * mu * mu, 0.0, 0.0, 2.0);
        let v_neg = solve_vertical(-4.0 * mu * mu, 0.0, 0.0, 2.0);
        for s in [0.1, 1.0, 2.5] {
            let sh = (mu * s).sinh();
            assert!((v_neg.value(s) - sh * sh / (mu * mu)).abs() < 1e-12 * (sh * sh / (mu * mu)));
            let sn = (mu * s).sin();
            assert!((v.value(s) - sn * sn / (mu * mu)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_data_is_zero() {
        for tau in [-3.0, 0.0, 2.0] {
            let v = solve_vertical(tau, 0.0, 0.0, 0.0);
            assert_eq!(v.eval(1.7), VerticalJet::default());
        }
    }

    #[test]
    fn case_coefficients_follow_initial_data() {
        let v = solve_vertical(-2.0, 0.5, 0.25, 3.0);
        assert_eq!(v.a, 0.25);
        assert!((v.b - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((v.c - (0.5 - 1.5)).abs() < 1e-15);
        let p = solve_vertical(0.0, 0.5, 0.25, 3.0);
        assert_eq!((p.a, p.b, p.c), (1.5, 0.25, 0.5));
    }

    #[test]
    fn helicoid_jacobi_vector_at_axis_is_t() {
        let jf = JacobiField { lambda: 0.4, alpha_t: 1.0, alpha_u: 0.0, v: solve_vertical(-3.0, 1.0, 0.0, 1.2) };
        assert_eq!(jf.jacobi_vector(0.0), FrameVector::T);
        let s = 0.9;
        let j = jf.v.eval(s);
        let m = jf.jacobi_vector(s);
        assert_eq!(m, FrameVector::new(0.4 * (1.0 - j.v), 0.5 * j.vp, j.v));
    }

    #[test]
    fn plane_jacobi_vector() {
        let jf = JacobiField { lambda: 0.5, alpha_t: 0.0, alpha_u: 0.0, v: solve_vertical(-3.0, 0.0, 0.0, 2.0) };
        let j = jf.v.eval(1.3);
        assert_eq!(jf.jacobi_vector(1.3), FrameVector::new(-0.5 * j.v, 0.5 * j.vp, j.v));
    }

    #[test]
    fn moving_basis_round_trip() {
        let g = FrameVector::horizontal(0.8);
        let m = FrameVector::new(0.3, -1.1, 2.0);
        let back = frame_to_moving(g, moving_to_frame(g, m));
        assert!((back - m).max_abs() < 1e-15);
    }

    #[test]
    fn invariant_is_constant() {
        let v = solve_vertical(2.3, 1.0, -0.4, 0.7);
        let c0 = v.invariant_at_origin();
        for s in [-3.0, -0.5, 1.0, 4.0] {
            assert!((v.invariant(s) - c0).abs() < 1e-12 * c0.abs().max(1.0));
        }
    }
}
