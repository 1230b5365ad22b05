//! JSON run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use ccforms_core::angle::{AngleFunction, AngleKind};
use ccforms_core::geodesic::{GeodesicSpec, Integrator};
use ccforms_core::quadrature::QuadratureSpec;
use ccforms_core::surfaces::{build_helicoid, build_pole_surface, build_sphere, build_strip, Surface};
use ccforms_core::{AmbientPoint, SpaceForm};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kappa: i32,
    #[serde(default)]
    pub surface: Option<SurfaceConfig>,
    #[serde(default)]
    pub geodesic: Option<GeodesicConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Outputs,
    /// κ = 1 meshes: stereographic projection from (−1, 0, 0, 0) when true,
    /// raw 4D vertices otherwise.
    #[serde(default = "default_true")]
    pub projection: bool,
    /// Per-check tolerance overrides for `verify`, keyed by check id.
    #[serde(default)]
    pub check_tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub expect: Option<Expectations>,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceConfig {
    Helicoid {
        lambda: f64,
        sigma: AngleConfig,
    },
    Plane {
        lambda: f64,
        #[serde(default)]
        pole: Option<Vec<f64>>,
    },
    Sphere {
        lambda: f64,
        #[serde(default)]
        pole: Option<Vec<f64>>,
    },
    Strip {
        lambda: f64,
        generator: GeneratorConfig,
    },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum AngleName {
    #[default]
    Sigma,
    Theta,
}

impl From<AngleName> for AngleKind {
    fn from(a: AngleName) -> Self {
        match a {
            AngleName::Sigma => AngleKind::Sigma,
            AngleName::Theta => AngleKind::Theta,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AngleConfig {
    Linear {
        #[serde(default)]
        angle: AngleName,
        #[serde(default)]
        offset: f64,
        slope: f64,
    },
    Arctan {
        #[serde(default)]
        angle: AngleName,
        #[serde(default)]
        offset: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Spline {
        #[serde(default)]
        angle: AngleName,
        eps: Vec<f64>,
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default)]
    pub base: Option<Vec<f64>>,
    #[serde(default)]
    pub phi0: f64,
    pub mu: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    #[serde(default)]
    pub base: Option<Vec<f64>>,
    #[serde(default)]
    pub phi0: f64,
    pub lambda: f64,
    pub s_range: [f64; 2],
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub eps_range: [f64; 2],
    pub s_range: [f64; 2],
    pub n_eps: usize,
    pub n_s: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Integrator relative and absolute tolerance.
    pub ode: f64,
    /// Relative change that stops quadrature refinement.
    pub quadrature: f64,
    /// Tolerance of the closed-form L(|N_h|) identities.
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { ode: 1e-10, quadrature: 1e-6, identity: 1e-6 }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub mesh: Option<String>,
    pub csv: Option<String>,
    pub report: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    pub classification: Option<String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        let path = e.path().to_string();
        let at = if path == "." { String::new() } else { format!(" at field `{path}`") };
        config_err(format!("line {} column {}{at}: {inner}", inner.line(), inner.column()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn check_range(name: &str, r: [f64; 2]) -> Result<(), CliError> {
    if !(r[0].is_finite() && r[1].is_finite()) {
        return Err(config_err(format!("{name} must be finite, got {r:?}")));
    }
    if r[1] < r[0] {
        return Err(config_err(format!("{name} must be ordered, got {r:?}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        SpaceForm::new(self.kappa).map_err(|e| config_err(format!("kappa: {e}")))?;
        let t = self.tolerances;
        for (name, v) in [("ode", t.ode), ("quadrature", t.quadrature), ("identity", t.identity)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        if let Some(g) = &self.grid {
            check_range("grid.eps_range", g.eps_range)?;
            check_range("grid.s_range", g.s_range)?;
            if g.n_eps < 2 || g.n_s < 2 {
                return Err(config_err(format!("grid counts must be at least 2, got n_eps = {}, n_s = {}", g.n_eps, g.n_s)));
            }
        }
        if let Some(g) = &self.geodesic {
            check_range("geodesic.s_range", g.s_range)?;
            if g.samples < 2 {
                return Err(config_err("geodesic.samples must be at least 2"));
            }
        }
        for (k, v) in &self.check_tolerances {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(config_err(format!("check_tolerances.{k} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn space(&self) -> SpaceForm {
        SpaceForm::new(self.kappa).expect("validated")
    }

    pub fn integrator(&self) -> Integrator {
        Integrator::new(self.tolerances.ode)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec { rel_tol: self.tolerances.quadrature, ..QuadratureSpec::default() }
    }

    pub fn grid(&self) -> Result<GridConfig, CliError> {
        self.grid.ok_or_else(|| config_err("missing `grid` section"))
    }

    pub fn point(&self, coords: &Option<Vec<f64>>, field: &str) -> Result<AmbientPoint, CliError> {
        let sf = self.space();
        let Some(c) = coords else { return Ok(sf.origin()) };
        let p = match (sf.kappa(), c.len()) {
            (1, 4) => AmbientPoint::sphere(c[0], c[1], c[2], c[3]),
            (k, 3) if k <= 0 => AmbientPoint::flat(c[0], c[1], c[2]),
            (k, n) => {
                return Err(config_err(format!(
                    "{field}: M({k}) points need {} coordinates, got {n}",
                    if k == 1 { 4 } else { 3 }
                )))
            }
        };
        sf.validate(&p).map_err(|e| config_err(format!("{field}: {e}")))?;
        Ok(p)
    }

    pub fn geodesic_spec(&self) -> Result<(GeodesicSpec, GeodesicConfig), CliError> {
        let g = self.geodesic.clone().ok_or_else(|| config_err("missing `geodesic` section"))?;
        let base = self.point(&g.base, "geodesic.base")?;
        Ok((GeodesicSpec::new(base, g.phi0, g.lambda), g))
    }

    pub fn build_surface(&self) -> Result<Surface, CliError> {
        let sf = self.space();
        let s = self.surface.as_ref().ok_or_else(|| config_err("missing `surface` section"))?;
        let built = match s {
            SurfaceConfig::Helicoid { lambda, sigma } => build_helicoid(sf, *lambda, angle_function(sigma)?),
            SurfaceConfig::Plane { lambda, pole } => build_pole_surface(sf, *lambda, self.point(pole, "surface.pole")?),
            SurfaceConfig::Sphere { lambda, pole } => build_sphere(sf, *lambda, self.point(pole, "surface.pole")?),
            SurfaceConfig::Strip { lambda, generator } => {
                let base = self.point(&generator.base, "surface.generator.base")?;
                let spec = GeodesicSpec::new(base, generator.phi0, generator.mu);
                build_strip(sf, *lambda, spec, &self.integrator())
            }
        };
        built.map_err(|e| if e.is_numeric() { CliError::Numeric(e.to_string()) } else { config_err(format!("surface: {e}")) })
    }
}

fn angle_function(a: &AngleConfig) -> Result<AngleFunction, CliError> {
    Ok(match a {
        AngleConfig::Linear { angle, offset, slope } => AngleFunction::linear((*angle).into(), *offset, *slope),
        AngleConfig::Arctan { angle, offset, scale } => AngleFunction::arctan((*angle).into(), *offset, *scale),
        AngleConfig::Spline { angle, eps, values } => AngleFunction::spline((*angle).into(), eps.clone(), values.clone())
            .map_err(|e| config_err(format!("surface.sigma: {e}")))?,
    })
}
