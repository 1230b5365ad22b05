//! Composite tensor-product Gauss–Legendre quadrature on rectangles with
//! refinement by halving, evaluated in parallel with a fixed reduction order.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureSpec {
    /// Points per panel and axis.
    pub order: usize,
    /// Panels per axis at the first level.
    pub initial_panels: usize,
    /// Stop when the relative change between levels drops below this.
    pub rel_tol: f64,
    pub max_levels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { order: 8, initial_panels: 2, rel_tol: 1e-6, max_levels: 7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub panels: usize,
    pub last_change: f64,
}

/// Fixed composite rule with `panels` × `panels` cells.
pub fn integrate_fixed<F>(f: &F, rect: Rect, panels: usize, order: usize) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let (xs, ws) = gauss_legendre(order);
    let hx = (rect.x1 - rect.x0) / panels as f64;
    let hy = (rect.y1 - rect.y0) / panels as f64;
    let cells: Vec<f64> = (0..panels * panels)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / panels, c % panels);
            let cx = rect.x0 + (i as f64 + 0.5) * hx;
            let cy = rect.y0 + (j as f64 + 0.5) * hy;
            let mut acc = Vec::with_capacity(order);
            for (xi, wi) in xs.iter().zip(&ws) {
                let x = cx + 0.5 * hx * xi;
                let row: Vec<f64> = xs.iter().zip(&ws).map(|(yj, wj)| wj * f(x, cy + 0.5 * hy * yj)).collect();
                acc.push(wi * pairwise_sum(&row));
            }
            pairwise_sum(&acc) * 0.25 * hx * hy
        })
        .collect();
    pairwise_sum(&cells)
}

/// Doubles the panel count per axis until consecutive levels agree.
pub fn integrate_adaptive<F>(f: &F, rect: Rect, spec: &QuadratureSpec) -> Result<QuadratureResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if rect.area() == 0.0 {
        return Ok(QuadratureResult { value: 0.0, panels: 0, last_change: 0.0 });
    }
    if !(rect.area().is_finite() && rect.x1 > rect.x0 && rect.y1 > rect.y0) {
        return Err(Error::InvalidInput(format!("degenerate integration rectangle {rect:?}")));
    }
    let mut panels = spec.initial_panels.max(1);
    let mut prev = integrate_fixed(f, rect, panels, spec.order);
    let mut change = f64::INFINITY;
    for _ in 0..spec.max_levels {
        panels *= 2;
        let cur = integrate_fixed(f, rect, panels, spec.order);
        if !cur.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand sum with {panels}² panels")));
        }
        change = (cur - prev).abs();
        if change <= spec.rel_tol * cur.abs() {
            return Ok(QuadratureResult { value: cur, panels, last_change: change });
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "relative change {:.3e} after {panels}² panels (last value {prev:.6e})",
        change / prev.abs()
    )))
}
