//! CC-geodesics of curvature λ: solutions of D_γ̇ γ̇ + 2λ J(γ̇) = 0.
//!
//! The state is integrated in a mixed chart: ambient position plus the
//! frame components of the velocity. Stepping uses the Dormand–Prince
//! 5(4) pair with cubic Hermite dense output.

use crate::error::{Error, Result};
use crate::model_space::{AmbientPoint, Connection, FrameVector, SpaceForm};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicSpec {
    pub base: AmbientPoint,
    /// Initial velocity cos φ₀ X + sin φ₀ Y.
    pub phi0: f64,
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicState {
    pub s: f64,
    pub position: AmbientPoint,
    pub velocity: FrameVector,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Number of times the velocity was rescaled to unit length.
    pub renormalizations: usize,
    /// Largest |‖p‖ − 1| removed in one step (κ = 1 only).
    pub max_position_drift: f64,
    /// Sum of removed |‖p‖ − 1| over the run (κ = 1 only).
    pub total_position_drift: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Integrator {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

/// A geodesic sampled at every accepted step, with Hermite interpolation
/// in between.
#[derive(Clone, Debug)]
pub struct Trajectory {
    sf: SpaceForm,
    knots: Vec<Knot>,
    pub stats: IntegrationStats,
}

#[derive(Clone, Copy, Debug)]
struct Knot {
    s: f64,
    y: State,
    f: State,
}

type State = [f64; 7];

const VELOCITY_DEFECT: f64 = 1e-12;

// Dormand–Prince coefficients. The system is autonomous, so the nodes c_i are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl GeodesicSpec {
    pub fn new(base: AmbientPoint, phi0: f64, lambda: f64) -> Self {
        GeodesicSpec { base, phi0, lambda }
    }

    pub fn initial_velocity(&self) -> FrameVector {
        FrameVector::horizontal(self.phi0)
    }

    pub fn initial_state(&self) -> GeodesicState {
        GeodesicState { s: 0.0, position: self.base, velocity: self.initial_velocity() }
    }
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::new(1e-10)
    }
}

struct Rhs {
    sf: SpaceForm,
    con: Connection,
    lambda: f64,
}

impl Rhs {
    fn eval(&self, y: &State) -> Option<State> {
        let p = [y[0], y[1], y[2], y[3]];
        if self.sf.kappa() == -1 && p[0] * p[0] + p[1] * p[1] >= 1.0 {
            return None;
        }
        let vel = FrameVector::new(y[4], y[5], y[6]);
        let frame = self.sf.frame_unchecked(&p);
        let dp = frame.apply(vel);
        let acc = -2.0 * self.lambda * vel.j() - self.con.apply(vel, vel);
        let out = [dp[0], dp[1], dp[2], dp[3], acc.a, acc.b, acc.c];
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}

impl Integrator {
    pub fn new(tol: f64) -> Self {
        Integrator { rtol: tol, atol: tol, h_init: 1e-2, h_max: 0.5, max_steps: 2_000_000 }
    }

    /// Integrates from s = 0 and returns the states at each requested s, in
    /// the order given. Negative values integrate backwards.
    pub fn sample(&self, sf: &SpaceForm, spec: &GeodesicSpec, s_values: &[f64]) -> Result<Vec<GeodesicState>> {
        self.sample_with_stats(sf, spec, s_values).map(|(v, _)| v)
    }

    pub fn sample_with_stats(
        &self,
        sf: &SpaceForm,
        spec: &GeodesicSpec,
        s_values: &[f64],
    ) -> Result<(Vec<GeodesicState>, IntegrationStats)> {
        check_spec(sf, spec, self)?;
        for (i, s) in s_values.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite arc length s[{i}]")));
            }
        }
        let mut out = vec![spec.initial_state(); s_values.len()];
        let mut stats = IntegrationStats::default();
        for dir in [1.0, -1.0] {
            let mut idx: Vec<usize> = (0..s_values.len()).filter(|&i| s_values[i] * dir > 0.0).collect();
            if idx.is_empty() {
                continue;
            }
            idx.sort_by(|&i, &j| (s_values[i] * dir).total_cmp(&(s_values[j] * dir)));
            let targets: Vec<f64> = idx.iter().map(|&i| s_values[i]).collect();
            let states = self.march(sf, spec, &targets, dir, None, &mut stats)?;
            for (i, st) in idx.into_iter().zip(states) {
                out[i] = st;
            }
        }
        Ok((out, stats))
    }

    /// Integrates over [s_start, s_end] (s_start ≤ 0 ≤ s_end) keeping every
    /// accepted step for dense evaluation.
    pub fn trajectory(&self, sf: &SpaceForm, spec: &GeodesicSpec, s_start: f64, s_end: f64) -> Result<Trajectory> {
        check_spec(sf, spec, self)?;
        if !(s_start <= 0.0 && s_end >= 0.0 && s_start.is_finite() && s_end.is_finite()) {
            return Err(Error::InvalidInput(format!("trajectory range [{s_start}, {s_end}] must contain 0")));
        }
        let mut stats = IntegrationStats::default();
        let mut back = Vec::new();
        let mut fwd = Vec::new();
        if s_start < 0.0 {
            self.march(sf, spec, &[s_start], -1.0, Some(&mut back), &mut stats)?;
        }
        if s_end > 0.0 {
            self.march(sf, spec, &[s_end], 1.0, Some(&mut fwd), &mut stats)?;
        }
        if back.is_empty() && fwd.is_empty() {
            let rhs = Rhs { sf: *sf, con: Connection::koszul(sf), lambda: spec.lambda };
            let y = initial_y(spec);
            let f = rhs.eval(&y).ok_or_else(|| Error::Domain("base point on the boundary".into()))?;
            fwd.push(Knot { s: 0.0, y, f });
        }
        back.reverse();
        if !back.is_empty() && !fwd.is_empty() {
            back.pop();
        }
        back.extend(fwd);
        Ok(Trajectory { sf: *sf, knots: back, stats })
    }

    fn march(
        &self,
        sf: &SpaceForm,
        spec: &GeodesicSpec,
        targets: &[f64],
        dir: f64,
        mut knots: Option<&mut Vec<Knot>>,
        stats: &mut IntegrationStats,
    ) -> Result<Vec<GeodesicState>> {
        let rhs = Rhs { sf: *sf, con: Connection::koszul(sf), lambda: spec.lambda };
        let mut y = initial_y(spec);
        let mut s = 0.0;
        let mut f = rhs
            .eval(&y)
            .ok_or_else(|| Error::Domain("base point outside the model space".into()))?;
        if let Some(k) = knots.as_deref_mut() {
            k.push(Knot { s, y, f });
        }
        let mut out = Vec::with_capacity(targets.len());
        let mut h = self.h_init.min(self.h_max);
        let mut next = 0;
        while next < targets.len() && targets[next] == 0.0 {
            out.push(to_state(sf, s, &y));
            next += 1;
        }
        let mut steps = 0usize;
        while next < targets.len() {
            steps += 1;
            if steps > self.max_steps {
                return Err(fail(sf, s, &y, "step budget exhausted"));
            }
            let target = targets[next];
            let remaining = (target - s) * dir;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            if step < 1e-14 * s.abs().max(1.0) && !landing {
                return Err(fail(sf, s, &y, "step size underflow"));
            }
            let trial = dp_step(&rhs, &y, &f, dir * step);
            let (y_new, err) = match trial {
                Some(t) => t,
                None => {
                    stats.rejected += 1;
                    h = step * 0.25;
                    continue;
                }
            };
            let en = error_norm(&y, &y_new, &err, self.rtol, self.atol);
            if !(en <= 1.0) {
                stats.rejected += 1;
                let fac = if en.is_finite() { (0.9 * en.powf(-0.2)).max(0.2) } else { 0.2 };
                h = step * fac;
                continue;
            }
            stats.accepted += 1;
            let mut y_new = y_new;
            self.renormalize(sf, &mut y_new, stats);
            if sf.kappa() == -1 {
                let r2 = y_new[0] * y_new[0] + y_new[1] * y_new[1];
                if r2 > 1.0 - sf.disc_margin() {
                    return Err(Error::Domain(format!(
                        "geodesic reached x² + y² = {r2} at s = {} (last good s = {s})",
                        s + dir * step
                    )));
                }
            }
            s = if landing { target } else { s + dir * step };
            y = y_new;
            f = rhs.eval(&y).ok_or_else(|| fail(sf, s, &y, "non-finite derivative"))?;
            if let Some(k) = knots.as_deref_mut() {
                k.push(Knot { s, y, f });
            }
            let grow = if en > 0.0 { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
            if !landing || step >= h {
                h = (step * grow).min(self.h_max);
            }
            if landing {
                while next < targets.len() && (targets[next] - s) * dir <= 0.0 {
                    out.push(to_state(sf, targets[next], &y));
                    next += 1;
                }
            }
        }
        Ok(out)
    }

    fn renormalize(&self, sf: &SpaceForm, y: &mut State, stats: &mut IntegrationStats) {
        if sf.kappa() == 1 {
            let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]).sqrt();
            let drift = (n - 1.0).abs();
            stats.max_position_drift = stats.max_position_drift.max(drift);
            stats.total_position_drift += drift;
            for v in y.iter_mut().take(4) {
                *v /= n;
            }
        }
        let n = (y[4] * y[4] + y[5] * y[5] + y[6] * y[6]).sqrt();
        if (n - 1.0).abs() > VELOCITY_DEFECT {
            stats.renormalizations += 1;
            for v in y.iter_mut().skip(4) {
                *v /= n;
            }
        }
    }
}

fn check_spec(sf: &SpaceForm, spec: &GeodesicSpec, it: &Integrator) -> Result<()> {
    sf.validate(&spec.base)?;
    if !(spec.phi0.is_finite() && spec.lambda.is_finite()) {
        return Err(Error::InvalidInput("geodesic angle and curvature must be finite".into()));
    }
    if !(it.rtol > 0.0 && it.atol > 0.0) {
        return Err(Error::InvalidInput("integrator tolerance must be positive".into()));
    }
    Ok(())
}

fn initial_y(spec: &GeodesicSpec) -> State {
    let p = spec.base.padded();
    let v = spec.initial_velocity();
    [p[0], p[1], p[2], p[3], v.a, v.b, v.c]
}

fn to_state(sf: &SpaceForm, s: f64, y: &State) -> GeodesicState {
    GeodesicState {
        s,
        position: sf.point_from([y[0], y[1], y[2], y[3]]),
        velocity: FrameVector::new(y[4], y[5], y[6]),
    }
}

fn fail(sf: &SpaceForm, s: f64, y: &State, reason: &str) -> Error {
    Error::Integration { s, reason: reason.to_string(), last: Box::new(to_state(sf, s, y)) }
}

fn dp_step(rhs: &Rhs, y: &State, f0: &State, h: f64) -> Option<(State, State)> {
    let mut k = [[0.0; 7]; 7];
    k[0] = *f0;
    for stage in 1..7 {
        let mut yt = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..7 {
                    yt[i] += h * a * kj[i];
                }
            }
        }
        k[stage] = rhs.eval(&yt)?;
    }
    let mut y_new = *y;
    let mut err = [0.0; 7];
    for i in 0..7 {
        for j in 0..6 {
            y_new[i] += h * A[6][j] * k[j][i];
        }
        for j in 0..7 {
            err[i] += h * E[j] * k[j][i];
        }
    }
    Some((y_new, err))
}

fn error_norm(y: &State, y_new: &State, err: &State, rtol: f64, atol: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..7 {
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        sum += (err[i] / sc).powi(2);
    }
    (sum / 7.0).sqrt()
}

impl Trajectory {
    pub fn s_range(&self) -> (f64, f64) {
        (self.knots[0].s, self.knots[self.knots.len() - 1].s)
    }

    pub fn knot_count(&self) -> usize {
        self.knots.len()
    }

    /// Hermite interpolation between accepted steps.
    pub fn eval(&self, s: f64) -> Result<GeodesicState> {
        let (lo, hi) = self.s_range();
        if !(s >= lo && s <= hi) {
            return Err(Error::InvalidInput(format!("s = {s} outside trajectory range [{lo}, {hi}]")));
        }
        let i = match self.knots.binary_search_by(|k| k.s.total_cmp(&s)) {
            Ok(i) => return Ok(to_state(&self.sf, s, &self.knots[i].y)),
            Err(i) => i.clamp(1, self.knots.len() - 1),
        };
        let (k0, k1) = (&self.knots[i - 1], &self.knots[i]);
        let h = k1.s - k0.s;
        let u = (s - k0.s) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let mut y = [0.0; 7];
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = h00 * k0.y[j] + h10 * h * k0.f[j] + h01 * k1.y[j] + h11 * h * k1.f[j];
        }
        let mut st = to_state(&self.sf, s, &y);
        st.position = self.sf.normalize(st.position);
        let n = st.velocity.norm();
        st.velocity = (1.0 / n) * st.velocity;
        Ok(st)
    }
}

/// Integrates with a fresh integrator at tolerance `tol`.
pub fn integrate_geodesic(sf: &SpaceForm, spec: &GeodesicSpec, s: f64, tol: f64) -> Result<GeodesicState> {
    if !s.is_finite() {
        return Err(Error::InvalidInput("arc length must be finite".into()));
    }
    Ok(Integrator::new(tol).sample(sf, spec, &[s])?[0])
}

/// Closed forms: the straight line for κ = 0, λ = 0 and p + tanh(s)v for
/// κ = −1, λ = 0 with base on the vertical axis. `None` elsewhere.
pub fn closed_form_geodesic(sf: &SpaceForm, spec: &GeodesicSpec, s: f64) -> Option<GeodesicState> {
    if spec.lambda != 0.0 {
        return None;
    }
    let velocity = spec.initial_velocity();
    match (sf.kappa(), spec.base) {
        (0, AmbientPoint::Flat([x, y, t])) => {
            let (sn, cs) = spec.phi0.sin_cos();
            let dt = y * cs - x * sn;
            Some(GeodesicState { s, position: AmbientPoint::flat(x + s * cs, y + s * sn, t + s * dt), velocity })
        }
        (-1, AmbientPoint::Flat([x, y, t])) if x == 0.0 && y == 0.0 => {
            let psi = spec.phi0 - 2.0 * sf.k() * t;
            let r = s.tanh();
            Some(GeodesicState { s, position: AmbientPoint::flat(r * psi.cos(), r * psi.sin(), t), velocity })
        }
        _ => None,
    }
}

/// Curvature of a sampled horizontal curve: the horizontal part of the
/// connection vanishes on horizontal vectors, so D γ̇/ds = −2λJγ̇ reduces to
/// the turning rate of the frame angle, λ = −(dφ/ds)/2. Averaged over
/// consecutive pairs.
pub fn curvature_estimate(_sf: &SpaceForm, states: &[GeodesicState]) -> Result<f64> {
    if states.len() < 2 {
        return Err(Error::Arity { needed: 2, got: states.len() });
    }
    let mut sum = 0.0;
    for w in states.windows(2) {
        let h = w[1].s - w[0].s;
        if h == 0.0 {
            return Err(Error::InvalidInput("repeated arc-length values".into()));
        }
        let (u, v) = (w[0].velocity, w[1].velocity);
        let turn = (u.a * v.b - u.b * v.a).atan2(u.a * v.a + u.b * v.b);
        sum += -turn / (2.0 * h);
    }
    Ok(sum / (states.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_axis_geodesic_is_tanh() {
        let sf = SpaceForm::hyperbolic();
        let spec = GeodesicSpec::new(sf.origin(), 0.0, 0.0);
        let st = integrate_geodesic(&sf, &spec, 1.0, 1e-12).unwrap();
        let x = 1f64.tanh();
        assert!((x - 0.761594).abs() < 1e-6);
        assert!(st.position.distance(&AmbientPoint::flat(x, 0.0, 0.0)) < 1e-10);
    }

    #[test]
    fn heisenberg_line_from_axis() {
        let sf = SpaceForm::heisenberg();
        let (eps, sigma, s) = (0.7, 1.1, 2.5);
        let spec = GeodesicSpec::new(AmbientPoint::flat(0.0, 0.0, eps), sigma, 0.0);
        let st = integrate_geodesic(&sf, &spec, s, 1e-12).unwrap();
        let want = AmbientPoint::flat(s * sigma.cos(), s * sigma.sin(), eps);
        assert!(st.position.distance(&want) < 1e-10);
    }

    #[test]
    fn zero_length_returns_initial_state() {
        let sf = SpaceForm::sphere();
        let spec = GeodesicSpec::new(sf.origin(), 0.4, 1.3);
        let st = integrate_geodesic(&sf, &spec, 0.0, 1e-10).unwrap();
        assert_eq!(st, spec.initial_state());
    }

    #[test]
    fn closed_form_availability() {
        let sph = SpaceForm::sphere();
        assert!(closed_form_geodesic(&sph, &GeodesicSpec::new(sph.origin(), 0.0, 0.0), 1.0).is_none());
        let hyp = SpaceForm::hyperbolic();
        let off = GeodesicSpec::new(AmbientPoint::flat(0.1, 0.0, 0.0), 0.0, 0.0);
        assert!(closed_form_geodesic(&hyp, &off, 1.0).is_none());
        let curved = GeodesicSpec::new(hyp.origin(), 0.0, 0.5);
        assert!(closed_form_geodesic(&hyp, &curved, 1.0).is_none());
    }

    #[test]
    fn tanh_stays_in_disc() {
        let sf = SpaceForm::hyperbolic();
        let spec = GeodesicSpec::new(AmbientPoint::flat(0.0, 0.0, 0.3), 0.2, 0.0);
        let far = closed_form_geodesic(&sf, &spec, 18.0).unwrap();
        let [x, y, _] = match far.position {
            AmbientPoint::Flat(c) => c,
            _ => unreachable!(),
        };
        assert!(x * x + y * y < 1.0);
        // tanh(20) rounds to 1 in double precision; the point never leaves the closed disc.
        let limit = closed_form_geodesic(&sf, &spec, 20.0).unwrap();
        assert!(limit.position.coords()[0].abs() <= 1.0);
    }

    #[test]
    fn curvature_estimate_needs_two_states() {
        let sf = SpaceForm::heisenberg();
        let st = GeodesicSpec::new(sf.origin(), 0.0, 0.0).initial_state();
        assert!(matches!(curvature_estimate(&sf, &[st]), Err(Error::Arity { .. })));
    }

    #[test]
    fn curvature_estimate_recovers_lambda() {
        for (k, lambda, tol) in [(0, 0.5, 1e-6), (-1, 0.0, 1e-8), (1, 1.0, 1e-6), (-1, -1.3, 1e-6)] {
            let sf = SpaceForm::new(k).unwrap();
            let spec = GeodesicSpec::new(sf.origin(), 0.3, lambda);
            let s: Vec<f64> = (0..41).map(|i| -1.0 + 0.05 * i as f64).collect();
            let states = Integrator::new(1e-12).sample(&sf, &spec, &s).unwrap();
            let est = curvature_estimate(&sf, &states).unwrap();
            assert!((est - lambda).abs() < tol, "κ={k} λ={lambda} est={est}");
        }
    }

    #[test]
    fn great_circles_close_up() {
        let sf = SpaceForm::sphere();
        let spec = GeodesicSpec::new(AmbientPoint::sphere(0.5, -0.5, 0.5, 0.5), 1.0, 0.0);
        let st = integrate_geodesic(&sf, &spec, 2.0 * std::f64::consts::PI, 1e-12).unwrap();
        assert!(st.position.distance(&spec.base) < 1e-9);
    }

    #[test]
    fn dense_output_matches_sampling() {
        let sf = SpaceForm::heisenberg();
        let spec = GeodesicSpec::new(AmbientPoint::flat(0.2, -0.1, 0.4), 0.9, 0.8);
        let it = Integrator::new(1e-12);
        let traj = it.trajectory(&sf, &spec, -2.0, 3.0).unwrap();
        for s in [-1.7, -0.3, 0.0, 0.77, 2.9] {
            let a = traj.eval(s).unwrap();
            let b = it.sample(&sf, &spec, &[s]).unwrap()[0];
            assert!(a.position.distance(&b.position) < 1e-7, "s={s}");
        }
        assert!(traj.eval(3.5).is_err());
    }

    #[test]
    fn samples_keep_requested_order() {
        let sf = SpaceForm::heisenberg();
        let spec = GeodesicSpec::new(sf.origin(), 0.0, 0.0);
        let s = [2.0, -1.0, 0.0, 0.5, -3.0];
        let states = Integrator::new(1e-12).sample(&sf, &spec, &s).unwrap();
        for (st, want) in states.iter().zip(s) {
            assert_eq!(st.s, want);
            assert!((st.position.coords()[0] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn escaping_hyperbolic_geodesic_reports_domain_error() {
        let sf = SpaceForm::hyperbolic();
        let spec = GeodesicSpec::new(sf.origin(), 0.0, 0.0);
        let err = integrate_geodesic(&sf, &spec, 40.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
