//! Scalar root finding: sign-change scans polished by Brent's method.

use crate::error::{Error, Result};

/// Brent's method on a bracket with f(a)·f(b) ≤ 0.
pub fn brent(f: impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::InvalidInput(format!("[{a}, {b}] does not bracket a root")));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::InvalidInput("Brent iteration did not converge".into()))
}

/// All sign changes and exact zeros of f on [a, b] found on a grid of the
/// given step, each polished to `xtol`. Roots closer than 1e−9 are merged.
pub fn scan_roots(f: impl Fn(f64) -> f64, a: f64, b: f64, step: f64, xtol: f64) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && step > 0.0) {
        return Err(Error::InvalidInput("root scan needs a finite range and positive step".into()));
    }
    if b < a {
        return Ok(Vec::new());
    }
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    let mut roots: Vec<f64> = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    if f0 == 0.0 {
        roots.push(a);
    }
    for i in 1..=n {
        let x1 = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
        let f1 = f(x1);
        if f1 == 0.0 {
            roots.push(x1);
        } else if f0 != 0.0 && f0.signum() != f1.signum() {
            roots.push(brent(&f, x0, x1, xtol)?);
        }
        x0 = x1;
        f0 = f1;
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cosine_root() {
        let r = brent(f64::cos, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn brent_rejects_non_bracket() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn scan_finds_all_sine_roots() {
        let roots = scan_roots(f64::sin, 0.5, 10.0, 0.3, 1e-13).unwrap();
        assert_eq!(roots.len(), 3);
        for (m, r) in roots.iter().enumerate() {
            assert!((r - (m + 1) as f64 * std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_keeps_exact_grid_zeros() {
        let roots = scan_roots(|x| x * (x - 1.0), 0.0, 2.0, 0.5, 1e-13).unwrap();
        assert_eq!(roots, vec![0.0, 1.0]);
    }
}
