//! Laguerre polynomials and the Fourier–Laguerre expansion in time.
//!
//! ```text
//! u(t) = kappa * sum_n u_n L_n(kappa t)
//! u_n  = int_0^inf exp(-kappa t) L_n(kappa t) u(t) dt
//! ```

use std::ops::{AddAssign, Mul};

use gauss_quad::GaussLegendre;
use nalgebra::{DVector, Vector2};

use crate::error::{Error, Result};

/// L_n(x) by the three-term recurrence.
pub fn laguerre_eval(n: usize, x: f64) -> f64 {
    laguerre_all(n, x)[n]
}

/// L_0(x), ..., L_n(x).
pub fn laguerre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 - x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Values that can serve as expansion coefficients.
pub trait Coefficient: Clone + AddAssign + Mul<f64, Output = Self> {
    fn zero_like(&self) -> Self;
    fn all_finite(&self) -> bool;
}

impl Coefficient for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl Coefficient for Vector2<f64> {
    fn zero_like(&self) -> Self {
        Vector2::zeros()
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl Coefficient for DVector<f64> {
    fn zero_like(&self) -> Self {
        DVector::zeros(self.len())
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// A truncated Laguerre expansion `kappa * sum coeffs[n] L_n(kappa t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreSeries<T> {
    kappa: f64,
    coeffs: Vec<T>,
}

impl<T: Coefficient> LaguerreSeries<T> {
    pub fn new(kappa: f64, coeffs: Vec<T>) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "a Laguerre series needs at least one coefficient".into(),
            ));
        }
        if let Some(n) = coeffs.iter().position(|c| !c.all_finite()) {
            return Err(Error::NonFinite {
                order: n,
                what: "Laguerre coefficient".into(),
            });
        }
        Ok(Self { kappa, coeffs })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Value of the expansion at time `t`.
    pub fn synthesize(&self, t: f64) -> T {
        let polys = laguerre_all(self.coeffs.len() - 1, self.kappa * t);
        let mut acc = self.coeffs[0].zero_like();
        for (c, l) in self.coeffs.iter().zip(polys) {
            acc += c.clone() * l;
        }
        acc * self.kappa
    }
}

const PANEL_COUNT: usize = 400;
const PANEL_DEGREE: usize = 16;

/// Numerical Laguerre coefficient `int_0^inf exp(-kappa t) L_n(kappa t) f(t) dt`.
///
/// The integral is cut at `T` with `exp(-kappa T) < 1e-12` and integrated with
/// composite Gauss–Legendre panels.
pub fn transform_numeric<F: Fn(f64) -> f64>(f: F, n: usize, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    // a little beyond the 1e-12 cut so polynomial growth of L_n f does not leak in
    let t_cut = 40.0 / kappa + n as f64 / kappa;
    let rule = GaussLegendre::new(PANEL_DEGREE).expect("valid degree");
    let width = t_cut / PANEL_COUNT as f64;
    let mut bad = None;
    let mut total = 0.0;
    for p in 0..PANEL_COUNT {
        let a = p as f64 * width;
        total += rule.integrate(a, a + width, |t| {
            let v = f(t);
            if !v.is_finite() {
                bad = Some(t);
            }
            (-kappa * t).exp() * laguerre_eval(n, kappa * t) * v
        });
    }
    match bad {
        Some(t) => Err(Error::Numerical(format!(
            "time signal is not finite at t = {t}"
        ))),
        None => Ok(total),
    }
}

/// The test signal `f(t) = t^2/4 * exp(1 - t)`.
pub fn test_signal(t: f64) -> f64 {
    0.25 * t * t * (1.0 - t).exp()
}

/// Fourier–Laguerre coefficients of [`test_signal`] for orders `0..count`.
///
/// ```text
/// u_n = (e/4) (2 + kappa n (kappa (n-1) - 4)) / (kappa + 1)^(n+3)
/// ```
pub fn test_signal_coeffs(count: usize, kappa: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "at least one coefficient is required".into(),
        ));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    let e = std::f64::consts::E;
    Ok((0..count)
        .map(|n| {
            let nf = n as f64;
            0.25 * e * (2.0 + kappa * nf * (kappa * (nf - 1.0) - 4.0))
                / (kappa + 1.0).powi(n as i32 + 3)
        })
        .collect())
}
