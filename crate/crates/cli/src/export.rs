//! OBJ, CSV and JSON writers. Floats are written with 17 significant
//! digits and LF line endings so repeated runs are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use ccforms_core::{AmbientPoint, SpaceForm};
use serde::Serialize;

use crate::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty for undefined values.
pub fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => fmt_f64(v),
        _ => String::new(),
    }
}

/// Stereographic projection of S³ from (−1, 0, 0, 0) to ℝ³.
pub fn stereographic(p: [f64; 4]) -> [f64; 3] {
    let d = 1.0 + p[0];
    [p[1] / d, p[2] / d, p[3] / d]
}

/// Export coordinates: 3D points as they are; κ = 1 points projected or
/// kept in 4D.
pub fn export_coords(sf: &SpaceForm, p: &AmbientPoint, projection: bool) -> Vec<f64> {
    match p {
        AmbientPoint::Sphere(c) if projection && sf.kappa() == 1 => stereographic(*c).to_vec(),
        _ => p.coords().to_vec(),
    }
}

fn vertex_line(out: &mut String, v: &[f64]) {
    out.push('v');
    for x in v {
        let _ = write!(out, " {}", fmt_f64(*x));
    }
    out.push('\n');
}

/// Grid mesh with vertex (i, k) at index i·n_s + k + 1 and two triangles
/// per cell.
pub fn obj_mesh(comment: &str, vertices: &[Vec<f64>], n_eps: usize, n_s: usize) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "# {line}");
    }
    for v in vertices {
        vertex_line(&mut out, v);
    }
    for i in 0..n_eps.saturating_sub(1) {
        for k in 0..n_s.saturating_sub(1) {
            let a = i * n_s + k + 1;
            let (b, c, d) = (a + 1, a + n_s, a + n_s + 1);
            let _ = writeln!(out, "f {a} {c} {d}");
            let _ = writeln!(out, "f {a} {d} {b}");
        }
    }
    out
}

pub fn obj_polyline(comment: &str, vertices: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "# {line}");
    }
    for v in vertices {
        vertex_line(&mut out, v);
    }
    if vertices.len() >= 2 {
        out.push('l');
        for i in 1..=vertices.len() {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("ASCII table"))
}

pub fn json_text<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}
