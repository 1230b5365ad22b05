//! Angle functions ε ↦ σ(ε) of the horizontal direction U(ε) along the
//! vertical axis, and the associated θ(ε) = σ(ε) − 2κε (κ ≤ 0) or
//! σ(ε) − ε (κ = 1).

use crate::error::{Error, Result};
use crate::model_space::SpaceForm;

/// Which angle a profile describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleKind {
    Sigma,
    Theta,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AngleProfile {
    /// offset + slope·ε
    Linear { offset: f64, slope: f64 },
    /// offset + scale·arctan ε
    Arctan { offset: f64, scale: f64 },
    Spline(CubicSpline),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleFunction {
    pub profile: AngleProfile,
    pub kind: AngleKind,
}

/// Natural cubic spline through (x_i, y_i).
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InvalidInput(format!(
                "spline needs at least 3 matching samples, got {} abscissae and {} values",
                n,
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("spline samples must be finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("spline abscissae must be strictly increasing".into()));
        }
        // Tridiagonal system for the second derivatives, natural ends.
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0;
            let b = 2.0 * (h0 + h1);
            let c = h1;
            let d = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let denom = b - a * c_prime[i - 1];
            c_prime[i] = c / denom;
            d_prime[i] = (d - a * d_prime[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(CubicSpline { x, y, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value and first three derivatives; the end cubic pieces extend
    /// outside the sample range.
    pub fn derivatives(&self, t: f64) -> [f64; 4] {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - t) / h, (t - x0) / h);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        let d3 = (m1 - m0) / h;
        [v, d1, d2, d3]
    }
}

impl AngleFunction {
    pub fn linear(kind: AngleKind, offset: f64, slope: f64) -> Self {
        AngleFunction { profile: AngleProfile::Linear { offset, slope }, kind }
    }

    pub fn arctan(kind: AngleKind, offset: f64, scale: f64) -> Self {
        AngleFunction { profile: AngleProfile::Arctan { offset, scale }, kind }
    }

    pub fn spline(kind: AngleKind, eps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(AngleFunction { profile: AngleProfile::Spline(CubicSpline::new(eps, values)?), kind })
    }

    /// Constant σ.
    pub fn constant_sigma(sigma: f64) -> Self {
        AngleFunction::linear(AngleKind::Sigma, sigma, 0.0)
    }

    /// Number of continuous derivatives (u32::MAX for analytic profiles).
    pub fn smoothness(&self) -> u32 {
        match self.profile {
            AngleProfile::Spline(_) => 2,
            _ => u32::MAX,
        }
    }

    /// Range on which the profile is defined; `None` means all of ℝ.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match &self.profile {
            AngleProfile::Spline(sp) => Some(sp.domain()),
            _ => None,
        }
    }

    pub fn check_domain(&self, eps: f64) -> Result<()> {
        if !eps.is_finite() {
            return Err(Error::InvalidInput("ε must be finite".into()));
        }
        match self.domain() {
            Some((lo, hi)) if eps < lo || eps > hi => Err(Error::InvalidInput(format!(
                "ε = {eps} outside the spline sample range [{lo}, {hi}]"
            ))),
            _ => Ok(()),
        }
    }

    fn profile_derivatives(&self, eps: f64) -> [f64; 4] {
        match &self.profile {
            AngleProfile::Linear { offset, slope } => [offset + slope * eps, *slope, 0.0, 0.0],
            AngleProfile::Arctan { offset, scale } => {
                let q = 1.0 + eps * eps;
                [
                    offset + scale * eps.atan(),
                    scale / q,
                    -2.0 * scale * eps / (q * q),
                    scale * (6.0 * eps * eps - 2.0) / (q * q * q),
                ]
            }
            AngleProfile::Spline(sp) => sp.derivatives(eps),
        }
    }

    /// σ and its first three derivatives.
    pub fn sigma_derivatives(&self, sf: &SpaceForm, eps: f64) -> [f64; 4] {
        let mut d = self.profile_derivatives(eps);
        if self.kind == AngleKind::Theta {
            let r = sf.angle_shift_rate();
            d[0] += r * eps;
            d[1] += r;
        }
        d
    }

    /// θ and its first three derivatives.
    pub fn theta_derivatives(&self, sf: &SpaceForm, eps: f64) -> [f64; 4] {
        let mut d = self.profile_derivatives(eps);
        if self.kind == AngleKind::Sigma {
            let r = sf.angle_shift_rate();
            d[0] -= r * eps;
            d[1] -= r;
        }
        d
    }

    pub fn sigma(&self, sf: &SpaceForm, eps: f64) -> f64 {
        self.sigma_derivatives(sf, eps)[0]
    }

    pub fn sigma_prime(&self, sf: &SpaceForm, eps: f64) -> f64 {
        self.sigma_derivatives(sf, eps)[1]
    }

    pub fn theta(&self, sf: &SpaceForm, eps: f64) -> f64 {
        self.theta_derivatives(sf, eps)[0]
    }

    pub fn theta_prime(&self, sf: &SpaceForm, eps: f64) -> f64 {
        self.theta_derivatives(sf, eps)[1]
    }
}
