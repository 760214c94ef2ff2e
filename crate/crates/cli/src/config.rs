//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use elastocauchy::geometry::{Annulus, CurveSpec, MaterialParams, ParametricCurve, TrigPolynomial};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Samples of each curve used for the nesting check.
pub const WINDING_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Dirichlet data of a point source on both curves, interior values compared.
    DirectDirichletExact,
    /// Traction data of a point source on both curves, interior values compared.
    DirectNeumannExact,
    /// Cauchy data of a point source on the outer curve, inner-curve data reconstructed.
    CauchyStationary,
    /// Cauchy problem followed by synthesis in time.
    CauchyTransient,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub lambda: f64,
    pub mu: f64,
    #[serde(default = "one")]
    pub rho: f64,
    pub kappa: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrigConfig {
    #[serde(default)]
    pub constant: f64,
    /// Coefficients of cos(s), cos(2s), ...
    #[serde(default)]
    pub cos: Vec<f64>,
    /// Coefficients of sin(s), sin(2s), ...
    #[serde(default)]
    pub sin: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveConfig {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Kite,
    /// `r(s) (cos s, sin s)` with `r = numerator / denominator`.
    Radial {
        numerator: TrigConfig,
        denominator: TrigConfig,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Curves {
    pub inner: CurveConfig,
    pub outer: CurveConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransientData {
    /// Outer-curve data of a point source; interior values compared with the truncated source field.
    PointSource,
    /// Outer-curve data from a direct Dirichlet solve on a finer grid driven by the test signal.
    DirichletDirect,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TransientConfig {
    pub data: TransientData,
    /// Grid of the data-generating direct solve; a multiple of M.
    #[serde(rename = "data_M", default)]
    pub data_m: Option<usize>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Terms of the reference expansion of the test signal.
    #[serde(default = "default_reference_terms")]
    pub reference_terms: usize,
}

fn default_t_end() -> f64 {
    3.0
}

fn default_dt() -> f64 {
    0.2
}

fn default_reference_terms() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub id: String,
    pub material: Material,
    pub curves: Curves,
    #[serde(rename = "M")]
    pub m: usize,
    /// Highest order for stationary experiments, number of Laguerre terms for transient ones.
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub source_point: Option<[f64; 2]>,
    /// Interior points where fields are reported.
    #[serde(default)]
    pub eval_points: Vec<[f64; 2]>,
    /// Inner-curve parameters where boundary data are reported.
    #[serde(default)]
    pub boundary_params: Vec<f64>,
    /// Reported vector components, 1-based.
    #[serde(default = "both_components")]
    pub components: Vec<usize>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub transient: Option<TransientConfig>,
}

fn both_components() -> Vec<usize> {
    vec![1, 2]
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn core_invalid(field: &str, e: elastocauchy::Error) -> CliError {
    invalid(field, e.to_string())
}

impl TrigConfig {
    fn polynomial(&self) -> TrigPolynomial {
        TrigPolynomial {
            constant: self.constant,
            cos: self.cos.clone(),
            sin: self.sin.clone(),
        }
    }
}

impl CurveConfig {
    pub fn curve(&self, field: &str) -> Result<ParametricCurve, CliError> {
        let spec = match self {
            CurveConfig::Circle { center, radius } => CurveSpec::Circle {
                center: *center,
                radius: *radius,
            },
            CurveConfig::Kite => CurveSpec::Kite,
            CurveConfig::Radial {
                numerator,
                denominator,
            } => CurveSpec::Radial {
                numerator: numerator.polynomial(),
                denominator: denominator.polynomial(),
            },
        };
        ParametricCurve::new(spec).map_err(|e| core_invalid(field, e))
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn params(&self) -> Result<MaterialParams, CliError> {
        let m = &self.material;
        MaterialParams::new(m.lambda, m.mu, m.rho, m.kappa).map_err(|e| core_invalid("material", e))
    }

    pub fn annulus(&self) -> Result<Annulus, CliError> {
        let inner = self.curves.inner.curve("curves.inner")?;
        let outer = self.curves.outer.curve("curves.outer")?;
        Annulus::new(inner, outer, WINDING_SAMPLES).map_err(|e| core_invalid("curves", e))
    }

    pub fn source(&self) -> Result<Vector2<f64>, CliError> {
        self.source_point
            .map(|p| Vector2::new(p[0], p[1]))
            .ok_or_else(|| invalid("source_point", "required by this experiment"))
    }

    pub fn eval_points(&self) -> Vec<Vector2<f64>> {
        self.eval_points
            .iter()
            .map(|p| Vector2::new(p[0], p[1]))
            .collect()
    }

    pub fn transient(&self) -> Result<&TransientConfig, CliError> {
        self.transient
            .as_ref()
            .ok_or_else(|| invalid("transient", "required by cauchy-transient"))
    }

    /// Highest Laguerre order the experiment needs.
    pub fn max_order(&self) -> usize {
        match self.experiment {
            ExperimentKind::CauchyTransient => self.n.saturating_sub(1),
            _ => self.n,
        }
    }

    /// Checks everything that does not need a solve.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.id.trim().is_empty() {
            return Err(invalid("id", "must not be empty"));
        }
        if self.m < 4 {
            return Err(invalid("M", format!("must be at least 4, got {}", self.m)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid(
                "alpha",
                format!("must be finite and nonnegative, got {}", self.alpha),
            ));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(invalid(
                "delta",
                format!("must be finite and nonnegative, got {}", self.delta),
            ));
        }
        if self.components.is_empty() || self.components.iter().any(|&c| c != 1 && c != 2) {
            return Err(invalid("components", "entries must be 1 or 2"));
        }
        if self.boundary_params.iter().any(|s| !s.is_finite()) {
            return Err(invalid("boundary_params", "must be finite"));
        }
        if self.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(invalid("times", "must be finite and nonnegative"));
        }
        self.params()?;
        let annulus = self.annulus()?;
        for (i, p) in self.eval_points().iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) || !annulus.contains(p) {
                return Err(invalid(
                    &format!("eval_points[{i}]"),
                    format!("({}, {}) is not inside the domain", p.x, p.y),
                ));
            }
        }
        let is_direct = matches!(
            self.experiment,
            ExperimentKind::DirectDirichletExact | ExperimentKind::DirectNeumannExact
        );
        if is_direct && (self.delta != 0.0 || self.alpha != 0.0) {
            return Err(invalid(
                "delta",
                "noise and regularization apply to Cauchy experiments only",
            ));
        }
        let needs_source = match self.experiment {
            ExperimentKind::CauchyTransient => self.transient()?.data == TransientData::PointSource,
            _ => true,
        };
        if needs_source {
            let z = self.source()?;
            if !z.iter().all(|v| v.is_finite()) || annulus.contains(&z) {
                return Err(invalid("source_point", "must lie outside the domain"));
            }
        }
        match self.experiment {
            ExperimentKind::DirectDirichletExact | ExperimentKind::DirectNeumannExact => {
                if self.eval_points.is_empty() {
                    return Err(invalid(
                        "eval_points",
                        "at least one interior point is required",
                    ));
                }
            }
            ExperimentKind::CauchyStationary => {}
            ExperimentKind::CauchyTransient => {
                if self.n == 0 {
                    return Err(invalid(
                        "N",
                        "a transient experiment needs at least one Laguerre term",
                    ));
                }
                let tr = self.transient()?;
                if !(tr.dt > 0.0 && tr.t_end > 0.0) {
                    return Err(invalid("transient", "t_end and dt must be positive"));
                }
                elastocauchy::cauchy_solver::time_samples(tr.t_end, tr.dt)
                    .map_err(|e| core_invalid("transient", e))?;
                match tr.data {
                    TransientData::PointSource => {
                        if self.eval_points.is_empty() {
                            return Err(invalid(
                                "eval_points",
                                "at least one interior point is required",
                            ));
                        }
                    }
                    TransientData::DirichletDirect => {
                        let data_m = tr.data_m.unwrap_or(self.m);
                        if data_m % self.m != 0 {
                            return Err(invalid(
                                "transient.data_M",
                                format!("{data_m} is not a multiple of M = {}", self.m),
                            ));
                        }
                        if tr.reference_terms == 0 {
                            return Err(invalid("transient.reference_terms", "must be positive"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
experiment = "direct-neumann-exact"
id = "t"
M = 8
N = 1
source_point = [0.0, 0.0]
eval_points = [[1.0, 1.2]]
[material]
lambda = 3.0
mu = 2.0
kappa = 1.0
[curves.inner]
type = "kite"
[curves.outer]
type = "circle"
center = [0.0, 0.0]
radius = 2.0
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        assert_eq!(cfg.material.rho, 1.0);
        assert_eq!(cfg.components, vec![1, 2]);
        cfg.validate().unwrap();
    }

    #[test]
    fn reports_field_names() {
        let cfg = ExperimentConfig::from_toml(&BASE.replace("M = 8", "M = 3")).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config { field, .. }) if field == "M"));
        let cfg =
            ExperimentConfig::from_toml(&BASE.replace("radius = 2.0", "radius = 0.5")).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config { field, .. }) if field == "curves"));
        let cfg =
            ExperimentConfig::from_toml(&BASE.replace("[[1.0, 1.2]]", "[[0.0, 0.1]]")).unwrap();
        assert!(
            matches!(cfg.validate(), Err(CliError::Config { field, .. }) if field == "eval_points[0]")
        );
        assert!(matches!(
            ExperimentConfig::from_toml(&BASE.replace("N = 1", "N = 1\nbogus = 2")),
            Err(CliError::Parse(_))
        ));
    }
}
