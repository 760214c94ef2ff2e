//! Boundary curves, material parameters, and the pointwise matrices of the
//! traction formulas.
//!
//! ```text
//! J(d)     = d d^T / |d|^2
//! U_1(x,y) = lambda nu d^T + mu d nu^T + mu (nu.d) I
//! U_2(x,y) = (lambda + 2 mu) nu d^T + mu d nu^T + mu (nu.d) (I - 4 J(d)),   d = x - y
//! ```

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

/// Lamé constants, density and the Laguerre scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    lambda: f64,
    mu: f64,
    rho: f64,
    kappa: f64,
}

impl MaterialParams {
    pub fn new(lambda: f64, mu: f64, rho: f64, kappa: f64) -> Result<Self> {
        let finite = [lambda, mu, rho, kappa].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(
                "material parameters must be finite".into(),
            ));
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(lambda + mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda + mu must be positive, got {}",
                lambda + mu
            )));
        }
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rho must be positive, got {rho}"
            )));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        Ok(Self {
            lambda,
            mu,
            rho,
            kappa,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Shear wave speed.
    pub fn c_s(&self) -> f64 {
        (self.mu / self.rho).sqrt()
    }

    /// Pressure wave speed.
    pub fn c_p(&self) -> f64 {
        ((self.lambda + 2.0 * self.mu) / self.rho).sqrt()
    }

    /// kappa^2 (n + 1), the coupling weight of the order recursion.
    pub fn beta(&self, n: usize) -> f64 {
        self.kappa * self.kappa * (n as f64 + 1.0)
    }

    pub fn gamma_s(&self) -> f64 {
        self.kappa / self.c_s()
    }

    pub fn gamma_p(&self) -> f64 {
        self.kappa / self.c_p()
    }
}

/// `constant + sum_k cos[k-1] cos(k s) + sin[k-1] sin(k s)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPolynomial {
    pub constant: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPolynomial {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    /// Value and first two derivatives.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let mut out = [self.constant, 0.0, 0.0];
        for (j, a) in self.cos.iter().enumerate() {
            let k = (j + 1) as f64;
            let (sn, cs) = (k * s).sin_cos();
            out[0] += a * cs;
            out[1] -= a * k * sn;
            out[2] -= a * k * k * cs;
        }
        for (j, b) in self.sin.iter().enumerate() {
            let k = (j + 1) as f64;
            let (sn, cs) = (k * s).sin_cos();
            out[0] += b * sn;
            out[1] += b * k * cs;
            out[2] -= b * k * k * sn;
        }
        out
    }
}

/// Curve catalogue.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    /// `(cos s + 0.4 cos 2s, sin s)`
    Kite,
    /// `r(s) (cos s, sin s)` with `r = numerator / denominator`.
    Radial {
        numerator: TrigPolynomial,
        denominator: TrigPolynomial,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Circle,
    Kite,
    Radial,
}

/// A closed, counterclockwise, 2π-periodic curve with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricCurve {
    spec: CurveSpec,
}

/// Point and first two derivatives at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: Vector2<f64>,
    pub d1: Vector2<f64>,
    pub d2: Vector2<f64>,
}

const VALIDATION_SAMPLES: usize = 256;

impl ParametricCurve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        match &spec {
            CurveSpec::Circle { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "circle radius must be positive, got {radius}"
                    )));
                }
                if !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "circle center must be finite".into(),
                    ));
                }
            }
            CurveSpec::Kite => {}
            CurveSpec::Radial {
                numerator,
                denominator,
            } => {
                for j in 0..VALIDATION_SAMPLES {
                    let s = TAU * j as f64 / VALIDATION_SAMPLES as f64;
                    let p = numerator.eval(s)[0];
                    let q = denominator.eval(s)[0];
                    if !(q.abs() > 1e-12 && p / q > 0.0 && (p / q).is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "radial function must be positive and finite, fails at s = {s}"
                        )));
                    }
                }
            }
        }
        Ok(Self { spec })
    }

    pub fn circle(center: [f64; 2], radius: f64) -> Result<Self> {
        Self::new(CurveSpec::Circle { center, radius })
    }

    pub fn kite() -> Self {
        Self {
            spec: CurveSpec::Kite,
        }
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn kind(&self) -> CurveKind {
        match self.spec {
            CurveSpec::Circle { .. } => CurveKind::Circle,
            CurveSpec::Kite => CurveKind::Kite,
            CurveSpec::Radial { .. } => CurveKind::Radial,
        }
    }

    pub fn eval(&self, s: f64) -> CurvePoint {
        let (sn, cs) = s.sin_cos();
        match &self.spec {
            CurveSpec::Circle { center, radius } => CurvePoint {
                x: Vector2::new(center[0] + radius * cs, center[1] + radius * sn),
                d1: Vector2::new(-radius * sn, radius * cs),
                d2: Vector2::new(-radius * cs, -radius * sn),
            },
            CurveSpec::Kite => {
                let (sn2, cs2) = (2.0 * s).sin_cos();
                CurvePoint {
                    x: Vector2::new(cs + 0.4 * cs2, sn),
                    d1: Vector2::new(-sn - 0.8 * sn2, cs),
                    d2: Vector2::new(-cs - 1.6 * cs2, -sn),
                }
            }
            CurveSpec::Radial {
                numerator,
                denominator,
            } => {
                let [p, p1, p2] = numerator.eval(s);
                let [q, q1, q2] = denominator.eval(s);
                let r = p / q;
                let cross = p1 * q - p * q1;
                let r1 = cross / (q * q);
                let r2 = (p2 * q - p * q2) / (q * q) - 2.0 * q1 * cross / (q * q * q);
                let radial = Vector2::new(cs, sn);
                let tangential = Vector2::new(-sn, cs);
                CurvePoint {
                    x: radial * r,
                    d1: radial * r1 + tangential * r,
                    d2: radial * (r2 - r) + tangential * (2.0 * r1),
                }
            }
        }
    }

    pub fn point(&self, s: f64) -> Vector2<f64> {
        self.eval(s).x
    }

    pub fn first_derivative(&self, s: f64) -> Vector2<f64> {
        self.eval(s).d1
    }

    pub fn second_derivative(&self, s: f64) -> Vector2<f64> {
        self.eval(s).d2
    }

    /// `(x'_2, -x'_1)/|x'|`, pointing away from the region the curve encloses.
    pub fn outward_normal(&self, s: f64) -> Result<Vector2<f64>> {
        let d1 = self.first_derivative(s);
        let speed = d1.norm();
        if !(speed > 0.0) {
            return Err(Error::DegenerateCurve { s });
        }
        Ok(Vector2::new(d1.y, -d1.x) / speed)
    }

    /// Winding number of the curve around `p`, from `samples` polygon vertices.
    pub fn winding_number(&self, p: &Vector2<f64>, samples: usize) -> i64 {
        let angle = |s: f64| {
            let d = self.point(s) - p;
            d.y.atan2(d.x)
        };
        let mut total = 0.0;
        let mut prev = angle(0.0);
        for j in 1..=samples {
            let a = angle(TAU * j as f64 / samples as f64);
            let mut da = a - prev;
            if da > std::f64::consts::PI {
                da -= TAU;
            } else if da < -std::f64::consts::PI {
                da += TAU;
            }
            total += da;
            prev = a;
        }
        (total / TAU).round() as i64
    }
}

/// `d d^T / |d|^2`.
pub fn matrix_j(d: &Vector2<f64>) -> Result<Matrix2<f64>> {
    let n2 = d.norm_squared();
    if !(n2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(d * d.transpose() / n2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UKind {
    One,
    Two,
}

/// The matrices U_1, U_2 of the traction of `f(|x-y|) I` and `J(x-y)`.
pub fn matrix_u(
    kind: UKind,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
    nu: &Vector2<f64>,
    params: &MaterialParams,
) -> Result<Matrix2<f64>> {
    let d = x - y;
    if d.norm_squared() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(u_matrix(kind, &d, nu, params))
}

/// U_k for a separation vector `d`; `d` must be nonzero for kind Two.
pub(crate) fn u_matrix(
    kind: UKind,
    d: &Vector2<f64>,
    nu: &Vector2<f64>,
    params: &MaterialParams,
) -> Matrix2<f64> {
    let (lam, mu) = (params.lambda, params.mu);
    let nd = nu.dot(d);
    match kind {
        UKind::One => {
            nu * d.transpose() * lam + d * nu.transpose() * mu + Matrix2::identity() * (mu * nd)
        }
        UKind::Two => {
            let j = d * d.transpose() / d.norm_squared();
            nu * d.transpose() * (lam + 2.0 * mu)
                + d * nu.transpose() * mu
                + (Matrix2::identity() - j * 4.0) * (mu * nd)
        }
    }
}

/// The on-diagonal expansion matrices at one curve parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMatrices {
    pub j_tilde: Matrix2<f64>,
    pub u1_tilde: Matrix2<f64>,
    pub u2_tilde: Matrix2<f64>,
    pub u1_hat: Matrix2<f64>,
    pub u2_hat: Matrix2<f64>,
}

pub fn curve_local_matrices(
    curve: &ParametricCurve,
    s: f64,
    params: &MaterialParams,
) -> Result<LocalMatrices> {
    let p = curve.eval(s);
    let nu = curve.outward_normal(s)?;
    Ok(local_matrices(&p, &nu, params))
}

pub(crate) fn local_matrices(
    p: &CurvePoint,
    nu: &Vector2<f64>,
    params: &MaterialParams,
) -> LocalMatrices {
    let (lam, mu) = (params.lambda, params.mu);
    let d1 = p.d1;
    let d2 = p.d2;
    let j_tilde = d1 * d1.transpose() / d1.norm_squared();
    let nd2 = nu.dot(&d2);
    let identity = Matrix2::identity();
    LocalMatrices {
        j_tilde,
        u1_tilde: nu * d1.transpose() * lam + d1 * nu.transpose() * mu,
        u2_tilde: nu * d1.transpose() * (lam + 2.0 * mu) + d1 * nu.transpose() * mu,
        u1_hat: nu * d2.transpose() * lam + d2 * nu.transpose() * mu + identity * (mu * nd2),
        u2_hat: nu * d2.transpose() * (lam + 2.0 * mu)
            + d2 * nu.transpose() * mu
            + (identity - j_tilde * 4.0) * (mu * nd2),
    }
}

/// Which boundary component a curve plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveId {
    /// Γ1, where the Cauchy data are sought.
    Inner,
    /// Γ2, where the Cauchy data are measured.
    Outer,
}

impl CurveId {
    pub const BOTH: [CurveId; 2] = [CurveId::Inner, CurveId::Outer];

    /// Block index in the unknown layout.
    pub fn index(self) -> usize {
        match self {
            CurveId::Inner => 0,
            CurveId::Outer => 1,
        }
    }
}

/// Doubly connected domain bounded by an inner and an outer curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Annulus {
    inner: ParametricCurve,
    outer: ParametricCurve,
}

impl Annulus {
    /// Validates nesting by winding numbers at `samples` points of each curve.
    pub fn new(inner: ParametricCurve, outer: ParametricCurve, samples: usize) -> Result<Self> {
        let polygon = 16 * samples.max(64);
        for j in 0..samples {
            let s = TAU * j as f64 / samples as f64;
            if outer.winding_number(&inner.point(s), polygon) != 1 {
                return Err(Error::InvalidParameter(format!(
                    "inner curve leaves the outer curve near s = {s:.4}"
                )));
            }
            if inner.winding_number(&outer.point(s), polygon) != 0 {
                return Err(Error::InvalidParameter(format!(
                    "outer curve enters the inner curve near s = {s:.4}"
                )));
            }
        }
        Ok(Self { inner, outer })
    }

    pub fn inner(&self) -> &ParametricCurve {
        &self.inner
    }

    pub fn outer(&self) -> &ParametricCurve {
        &self.outer
    }

    pub fn curve(&self, id: CurveId) -> &ParametricCurve {
        match id {
            CurveId::Inner => &self.inner,
            CurveId::Outer => &self.outer,
        }
    }

    /// True when `p` lies between the two curves.
    pub fn contains(&self, p: &Vector2<f64>) -> bool {
        self.outer.winding_number(p, 2048) == 1 && self.inner.winding_number(p, 2048) == 0
    }
}
