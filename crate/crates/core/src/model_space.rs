//! The model spaces M(κ): coordinates, the orthonormal frame {X, Y, T},
//! the contact form, J, the Levi-Civita connection and vertical isometries.
//!
//! For κ ∈ {−1, 0} points are (x, y, t) with ρ = (1 + κ(x² + y²))⁻¹; for
//! κ = 1 points are unit quaternions x₁ + y₁i + x₂j + y₂k in ℝ⁴.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default distance kept from the boundary of the Poincaré disc.
pub const DISC_MARGIN: f64 = 1e-9;
/// Allowed deviation of a κ = 1 point from the unit sphere.
pub const SPHERE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceForm {
    kappa: i8,
    disc_margin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AmbientPoint {
    /// (x, y, t) for κ ∈ {−1, 0}.
    Flat([f64; 3]),
    /// (x₁, y₁, x₂, y₂) on the unit sphere for κ = 1.
    Sphere([f64; 4]),
}

/// Components (a, b, c) of a tangent vector along X, Y, T.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct FrameVector {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Ambient coordinate columns of X, Y, T at a point. For κ ≤ 0 the fourth
/// entry of each column is zero and unused.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameMatrix {
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub t: [f64; 4],
    pub dim: usize,
}

/// ⟨D_{e_i} e_j, e_k⟩ for e = (X, Y, T).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Connection {
    gamma: [[[f64; 3]; 3]; 3],
}

impl AmbientPoint {
    pub fn flat(x: f64, y: f64, t: f64) -> Self {
        AmbientPoint::Flat([x, y, t])
    }

    pub fn sphere(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        AmbientPoint::Sphere([x1, y1, x2, y2])
    }

    pub fn coords(&self) -> &[f64] {
        match self {
            AmbientPoint::Flat(c) => c,
            AmbientPoint::Sphere(c) => c,
        }
    }

    /// Coordinates padded with zeros to length 4.
    pub fn padded(&self) -> [f64; 4] {
        match *self {
            AmbientPoint::Flat([x, y, t]) => [x, y, t, 0.0],
            AmbientPoint::Sphere(c) => c,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords().len()
    }

    pub fn distance(&self, other: &AmbientPoint) -> f64 {
        let (a, b) = (self.padded(), other.padded());
        a.iter().zip(b.iter()).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }
}

impl FrameVector {
    pub const X: FrameVector = FrameVector { a: 1.0, b: 0.0, c: 0.0 };
    pub const Y: FrameVector = FrameVector { a: 0.0, b: 1.0, c: 0.0 };
    pub const T: FrameVector = FrameVector { a: 0.0, b: 0.0, c: 1.0 };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        FrameVector { a, b, c }
    }

    /// Unit horizontal vector cos φ X + sin φ Y.
    pub fn horizontal(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        FrameVector { a: c, b: s, c: 0.0 }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        FrameVector { a: v[0], b: v[1], c: v[2] }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn dot(self, o: FrameVector) -> f64 {
        self.a * o.a + self.b * o.b + self.c * o.c
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// J(aX + bY + cT) = −bX + aY.
    pub fn j(self) -> Self {
        FrameVector { a: -self.b, b: self.a, c: 0.0 }
    }

    pub fn horizontal_part(self) -> Self {
        FrameVector { c: 0.0, ..self }
    }

    pub fn is_horizontal(self, tol: f64) -> bool {
        self.c.abs() <= tol
    }

    pub fn is_vertical(self, tol: f64) -> bool {
        self.a.abs() <= tol && self.b.abs() <= tol
    }

    pub fn max_abs(self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    /// Angle of the horizontal part, atan2(b, a).
    pub fn angle(self) -> f64 {
        self.b.atan2(self.a)
    }
}

pub fn j_rotate(v: FrameVector) -> FrameVector {
    v.j()
}

impl Add for FrameVector {
    type Output = FrameVector;
    fn add(self, o: FrameVector) -> FrameVector {
        FrameVector::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl AddAssign for FrameVector {
    fn add_assign(&mut self, o: FrameVector) {
        *self = *self + o;
    }
}

impl Sub for FrameVector {
    type Output = FrameVector;
    fn sub(self, o: FrameVector) -> FrameVector {
        FrameVector::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

impl Neg for FrameVector {
    type Output = FrameVector;
    fn neg(self) -> FrameVector {
        FrameVector::new(-self.a, -self.b, -self.c)
    }
}

impl Mul<FrameVector> for f64 {
    type Output = FrameVector;
    fn mul(self, v: FrameVector) -> FrameVector {
        FrameVector::new(self * v.a, self * v.b, self * v.c)
    }
}

impl FrameMatrix {
    /// Ambient coordinates of aX + bY + cT.
    pub fn apply(&self, v: FrameVector) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = v.a * self.x[i] + v.b * self.y[i] + v.c * self.t[i];
        }
        out
    }

    pub fn columns(&self) -> [[f64; 4]; 3] {
        [self.x, self.y, self.t]
    }
}

impl SpaceForm {
    pub fn new(kappa: i32) -> Result<Self> {
        match kappa {
            -1..=1 => Ok(SpaceForm { kappa: kappa as i8, disc_margin: DISC_MARGIN }),
            _ => Err(Error::InvalidInput(format!("kappa must be -1, 0 or 1, got {kappa}"))),
        }
    }

    pub fn heisenberg() -> Self {
        SpaceForm { kappa: 0, disc_margin: DISC_MARGIN }
    }

    pub fn hyperbolic() -> Self {
        SpaceForm { kappa: -1, disc_margin: DISC_MARGIN }
    }

    pub fn sphere() -> Self {
        SpaceForm { kappa: 1, disc_margin: DISC_MARGIN }
    }

    pub fn with_disc_margin(mut self, margin: f64) -> Self {
        self.disc_margin = margin;
        self
    }

    pub fn kappa(&self) -> i8 {
        self.kappa
    }

    /// κ as a float.
    pub fn k(&self) -> f64 {
        self.kappa as f64
    }

    pub fn webster_curvature(&self) -> f64 {
        self.k()
    }

    pub fn disc_margin(&self) -> f64 {
        self.disc_margin
    }

    /// Number of ambient coordinates.
    pub fn dim(&self) -> usize {
        if self.kappa == 1 {
            4
        } else {
            3
        }
    }

    /// Rate of σ(ε) − θ(ε): 2κ for κ ≤ 0 and 1 for κ = 1.
    pub fn angle_shift_rate(&self) -> f64 {
        if self.kappa == 1 {
            1.0
        } else {
            2.0 * self.k()
        }
    }

    /// c[i][j][k] with [e_i, e_j] = Σ_k c[i][j][k] e_k.
    pub fn structure_constants(&self) -> [[[f64; 3]; 3]; 3] {
        let k = self.k();
        let mut c = [[[0.0; 3]; 3]; 3];
        // [X,Y] = −2T
        c[0][1][2] = -2.0;
        c[1][0][2] = 2.0;
        // [X,T] = 2κY
        c[0][2][1] = 2.0 * k;
        c[2][0][1] = -2.0 * k;
        // [Y,T] = −2κX
        c[1][2][0] = -2.0 * k;
        c[2][1][0] = 2.0 * k;
        c
    }

    /// ρ(x, y) = (1 + κ(x² + y²))⁻¹.
    pub fn rho(&self, x: f64, y: f64) -> f64 {
        1.0 / (1.0 + self.k() * (x * x + y * y))
    }

    pub fn origin(&self) -> AmbientPoint {
        if self.kappa == 1 {
            AmbientPoint::sphere(1.0, 0.0, 0.0, 0.0)
        } else {
            AmbientPoint::flat(0.0, 0.0, 0.0)
        }
    }

    /// Point ε on the vertical line through the origin.
    pub fn axis_point(&self, eps: f64) -> AmbientPoint {
        if self.kappa == 1 {
            let (s, c) = eps.sin_cos();
            AmbientPoint::sphere(c, s, 0.0, 0.0)
        } else {
            AmbientPoint::flat(0.0, 0.0, eps)
        }
    }

    pub fn validate(&self, p: &AmbientPoint) -> Result<()> {
        if !p.is_finite() {
            return Err(Error::Domain(format!("non-finite coordinates {:?}", p.coords())));
        }
        match (self.kappa, p) {
            (1, AmbientPoint::Sphere(c)) => {
                let n2: f64 = c.iter().map(|v| v * v).sum();
                if (n2 - 1.0).abs() > 1e3 * SPHERE_TOL {
                    return Err(Error::Domain(format!("|p|² = {n2} is not 1")));
                }
                Ok(())
            }
            (-1, AmbientPoint::Flat([x, y, _])) => {
                let r2 = x * x + y * y;
                if r2 > 1.0 - self.disc_margin {
                    return Err(Error::Domain(format!(
                        "x² + y² = {r2} exceeds the disc bound 1 − {}",
                        self.disc_margin
                    )));
                }
                Ok(())
            }
            (0, AmbientPoint::Flat(_)) => Ok(()),
            _ => Err(Error::Domain(format!(
                "{}-coordinate point used in M({})",
                p.dim(),
                self.kappa
            ))),
        }
    }

    /// Projects a κ = 1 point back to the unit sphere; identity otherwise.
    pub fn normalize(&self, p: AmbientPoint) -> AmbientPoint {
        match p {
            AmbientPoint::Sphere(c) => {
                let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                AmbientPoint::Sphere([c[0] / n, c[1] / n, c[2] / n, c[3] / n])
            }
            flat => flat,
        }
    }

    /// Builds a point of this space from padded coordinates.
    pub fn point_from(&self, c: [f64; 4]) -> AmbientPoint {
        if self.kappa == 1 {
            AmbientPoint::Sphere(c)
        } else {
            AmbientPoint::Flat([c[0], c[1], c[2]])
        }
    }

    pub fn frame_at(&self, p: &AmbientPoint) -> Result<FrameMatrix> {
        self.validate(p)?;
        Ok(self.frame_unchecked(&p.padded()))
    }

    /// Frame columns from padded coordinates without domain checks.
    pub(crate) fn frame_unchecked(&self, c: &[f64; 4]) -> FrameMatrix {
        if self.kappa == 1 {
            let [x1, y1, x2, y2] = *c;
            FrameMatrix {
                x: [-x2, y2, x1, -y1],
                y: [-y2, -x2, y1, x1],
                t: [-y1, x1, -y2, x2],
                dim: 4,
            }
        } else {
            let [x, y, t, _] = *c;
            let k = self.k();
            let inv_rho = 1.0 + k * (x * x + y * y);
            let (sn, cs) = (2.0 * k * t).sin_cos();
            FrameMatrix {
                x: [inv_rho * cs, -inv_rho * sn, y * cs + x * sn, 0.0],
                y: [inv_rho * sn, inv_rho * cs, y * sn - x * cs, 0.0],
                t: [0.0, 0.0, 1.0, 0.0],
                dim: 3,
            }
        }
    }

    /// η(w) for an ambient tangent vector w at p.
    pub fn contact_form(&self, p: &AmbientPoint, w: &[f64]) -> Result<f64> {
        self.validate(p)?;
        Ok(self.to_frame_unchecked(&p.padded(), w).c)
    }

    /// Frame components of the ambient tangent vector w at p.
    pub fn to_frame(&self, p: &AmbientPoint, w: &[f64]) -> Result<FrameVector> {
        self.validate(p)?;
        if w.len() != p.dim() {
            return Err(Error::InvalidInput(format!(
                "tangent vector has {} coordinates, point has {}",
                w.len(),
                p.dim()
            )));
        }
        Ok(self.to_frame_unchecked(&p.padded(), w))
    }

    pub(crate) fn to_frame_unchecked(&self, c: &[f64; 4], w: &[f64]) -> FrameVector {
        if self.kappa == 1 {
            let f = self.frame_unchecked(c);
            let dot = |col: &[f64; 4]| (0..4).map(|i| col[i] * w[i]).sum::<f64>();
            FrameVector::new(dot(&f.x), dot(&f.y), dot(&f.t))
        } else {
            let [x, y, t, _] = *c;
            let k = self.k();
            let rho = 1.0 / (1.0 + k * (x * x + y * y));
            let (sn, cs) = (2.0 * k * t).sin_cos();
            FrameVector::new(
                rho * (cs * w[0] - sn * w[1]),
                rho * (sn * w[0] + cs * w[1]),
                rho * (x * w[1] - y * w[0]) + w[2],
            )
        }
    }

    /// Ambient coordinates of a frame vector at p.
    pub fn to_ambient(&self, p: &AmbientPoint, v: FrameVector) -> Result<Vec<f64>> {
        let f = self.frame_at(p)?;
        Ok(f.apply(v)[..f.dim].to_vec())
    }

    /// Matrix of the Riemannian metric in ambient coordinates at p. For
    /// κ ≤ 0 this is ρ²(dx² + dy²) + η²; for κ = 1 the Euclidean metric.
    pub fn ambient_metric(&self, p: &AmbientPoint) -> Result<Vec<Vec<f64>>> {
        self.validate(p)?;
        if self.kappa == 1 {
            let mut g = vec![vec![0.0; 4]; 4];
            for (i, row) in g.iter_mut().enumerate() {
                row[i] = 1.0;
            }
            return Ok(g);
        }
        let [x, y, _, _] = p.padded();
        let rho = self.rho(x, y);
        let eta = [-rho * y, rho * x, 1.0];
        let mut g = vec![vec![0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = eta[i] * eta[j];
            }
        }
        g[0][0] += rho * rho;
        g[1][1] += rho * rho;
        Ok(g)
    }

    /// Flow of T for time s: p + sT for κ ≤ 0, e^{is}·p for κ = 1.
    pub fn vertical_translation(&self, s: f64, p: &AmbientPoint) -> Result<AmbientPoint> {
        self.validate(p)?;
        Ok(match *p {
            AmbientPoint::Flat([x, y, t]) => AmbientPoint::flat(x, y, t + s),
            AmbientPoint::Sphere([x1, y1, x2, y2]) => {
                let (sn, cs) = s.sin_cos();
                self.normalize(AmbientPoint::sphere(
                    cs * x1 - sn * y1,
                    cs * y1 + sn * x1,
                    cs * x2 - sn * y2,
                    cs * y2 + sn * x2,
                ))
            }
        })
    }

    /// Rotation by `angle` about the vertical axis through the origin.
    pub fn vertical_rotation(&self, angle: f64, p: &AmbientPoint) -> Result<AmbientPoint> {
        self.validate(p)?;
        let (sn, cs) = angle.sin_cos();
        Ok(match *p {
            AmbientPoint::Flat([x, y, t]) => AmbientPoint::flat(cs * x - sn * y, sn * x + cs * y, t),
            AmbientPoint::Sphere([x1, y1, x2, y2]) => {
                self.normalize(AmbientPoint::sphere(x1, y1, cs * x2 - sn * y2, sn * x2 + cs * y2))
            }
        })
    }
}

impl Connection {
    /// Koszul formula ½(c_ij^k − c_jk^i + c_ki^j) from the structure constants.
    pub fn koszul(sf: &SpaceForm) -> Self {
        let c = sf.structure_constants();
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for (i, gi) in gamma.iter_mut().enumerate() {
            for (j, gij) in gi.iter_mut().enumerate() {
                for (k, g) in gij.iter_mut().enumerate() {
                    *g = 0.5 * (c[i][j][k] - c[j][k][i] + c[k][i][j]);
                }
            }
        }
        Connection { gamma }
    }

    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[i][j][k]
    }

    pub fn table(&self) -> [[[f64; 3]; 3]; 3] {
        self.gamma
    }

    /// D_{e_i} e_j as a frame vector.
    pub fn derivative_of_frame(&self, i: usize, j: usize) -> FrameVector {
        FrameVector::from_array(self.gamma[i][j])
    }

    /// Σ u_i w_j D_{e_i} e_j: the covariant derivative of the field with
    /// constant components w in direction u.
    pub fn apply(&self, u: FrameVector, w: FrameVector) -> FrameVector {
        let (u, w) = (u.to_array(), w.to_array());
        let mut out = [0.0; 3];
        for i in 0..3 {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..3 {
                let uw = u[i] * w[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += uw * self.gamma[i][j][k];
                }
            }
        }
        FrameVector::from_array(out)
    }

    /// D_u W for a field W with components w and component derivative
    /// w_dot in direction u.
    pub fn covariant(&self, u: FrameVector, w: FrameVector, w_dot: FrameVector) -> FrameVector {
        w_dot + self.apply(u, w)
    }
}

pub fn connection_coefficients(sf: &SpaceForm) -> Connection {
    Connection::koszul(sf)
}
