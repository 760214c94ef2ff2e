//! Modified Bessel functions of order 0 and 1 from their power series.
//!
//! ```text
//! K_0(z) = -(ln(z/2) + C) I_0(z) + S_0(z)
//! K_1(z) = 1/z + (ln(z/2) + C) I_1(z) + S_1(z)
//! S_0(z) = sum psi(n)/(n!)^2 (z/2)^(2n)
//! S_1(z) = -1/2 sum (psi(n+1) + psi(n))/(n!(n+1)!) (z/2)^(2n+1)
//! ```
//!
//! The series are summed in double-double arithmetic: for z around 10 the
//! combination for K loses eight digits to cancellation, which plain `f64`
//! cannot afford. Above z = 12 the loss exceeds what double-double can absorb
//! and the sums switch to 192-bit binary floats. Results are rounded to `f64`
//! on return.

use crate::dd::{Dd, EULER};
use crate::error::{Error, Result};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9_f64;

/// Largest argument accepted by the series evaluators.
pub const MAX_ARGUMENT: f64 = 30.0;

/// Arguments above this are summed in wide precision.
const DOUBLE_DOUBLE_LIMIT: f64 = 12.0;

/// Truncation control for the power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub max_terms: usize,
    pub rel_tol: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            max_terms: 120,
            rel_tol: 1e-33,
        }
    }
}

impl SeriesConfig {
    pub fn new(max_terms: usize, rel_tol: f64) -> Result<Self> {
        let cfg = Self { max_terms, rel_tol };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 10 {
            return Err(Error::InvalidParameter(format!(
                "max_terms must be at least 10, got {}",
                self.max_terms
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-8) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1e-8), got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

/// ψ(n) = 1 + 1/2 + ... + 1/n with ψ(0) = 0.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).fold(0.0, |acc, m| acc + 1.0 / m as f64)
}

/// All series ingredients at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacdonaldParts {
    pub i0: f64,
    pub i1: f64,
    pub s0: f64,
    pub s1: f64,
    /// `None` at z = 0, where K is singular.
    pub k0: Option<f64>,
    pub k1: Option<f64>,
}

struct Sums {
    i0: Dd,
    i1: Dd,
    s0: Dd,
    s1: Dd,
}

fn check_argument(function: &'static str, z: f64) -> Result<()> {
    if !(0.0..=MAX_ARGUMENT).contains(&z) {
        return Err(Error::Domain {
            function,
            value: z,
            range: "[0, 30]",
        });
    }
    Ok(())
}

fn sums(z: f64, cfg: &SeriesConfig) -> Result<Sums> {
    let half = Dd::from_f64(z * 0.5);
    let q = half * half;
    let mut even = Dd::from_f64(1.0); // (z/2)^(2n) / (n!)^2
    let mut odd = half; // (z/2)^(2n+1) / (n!(n+1)!)
    let mut psi_next = Dd::from_f64(1.0);
    let mut out = Sums {
        i0: even,
        i1: odd,
        s0: Dd::default(),
        s1: odd.mul_f64(-0.5),
    };
    if z == 0.0 {
        return Ok(out);
    }
    for n in 1..cfg.max_terms {
        let nf = n as f64;
        even = (even * q).div_f64(nf * nf);
        odd = (odd * q).div_f64(nf * (nf + 1.0));
        let psi = psi_next;
        psi_next = psi_next + Dd::from_f64(1.0) / Dd::from_f64(nf + 1.0);
        let s0_term = even * psi;
        let s1_term = (odd * (psi + psi_next)).mul_f64(-0.5);
        out.i0 = out.i0 + even;
        out.i1 = out.i1 + odd;
        out.s0 = out.s0 + s0_term;
        out.s1 = out.s1 + s1_term;
        let tol = cfg.rel_tol;
        if even.abs_hi() < tol * out.i0.abs_hi()
            && odd.abs_hi() < tol * out.i1.abs_hi()
            && s0_term.abs_hi() < tol * out.s0.abs_hi()
            && s1_term.abs_hi() < tol * out.s1.abs_hi()
        {
            return Ok(out);
        }
    }
    Err(Error::Numerical(format!(
        "Bessel series at z = {z} did not converge within {} terms",
        cfg.max_terms
    )))
}

/// Evaluates I_0, I_1, S_0, S_1 and (for z > 0) K_0, K_1 at `z`.
pub fn macdonald_parts(z: f64, cfg: &SeriesConfig) -> Result<MacdonaldParts> {
    check_argument("macdonald_parts", z)?;
    cfg.validate()?;
    if z > DOUBLE_DOUBLE_LIMIT {
        return wide::parts(z, cfg.max_terms);
    }
    let s = sums(z, cfg)?;
    let (k0, k1) = if z > 0.0 {
        let log_term = Dd::ln(z * 0.5) + EULER;
        let k0 = s.s0 - log_term * s.i0;
        let k1 = Dd::from_f64(1.0) / Dd::from_f64(z) + log_term * s.i1 + s.s1;
        (Some(k0.to_f64()), Some(k1.to_f64()))
    } else {
        (None, None)
    };
    Ok(MacdonaldParts {
        i0: s.i0.to_f64(),
        i1: s.i1.to_f64(),
        s0: s.s0.to_f64(),
        s1: s.s1.to_f64(),
        k0,
        k1,
    })
}

/// Modified Bessel function of the first kind.
pub fn bessel_i(order: BesselOrder, z: f64) -> Result<f64> {
    check_argument("bessel_i", z)?;
    let p = macdonald_parts(z, &SeriesConfig::default())?;
    Ok(match order {
        BesselOrder::Zero => p.i0,
        BesselOrder::One => p.i1,
    })
}

/// The auxiliary series S_0 or S_1.
pub fn series_s(order: BesselOrder, z: f64) -> Result<f64> {
    check_argument("series_s", z)?;
    let p = macdonald_parts(z, &SeriesConfig::default())?;
    Ok(match order {
        BesselOrder::Zero => p.s0,
        BesselOrder::One => p.s1,
    })
}

/// Macdonald function K_0 or K_1.
pub fn bessel_k(order: BesselOrder, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain {
            function: "bessel_k",
            value: z,
            range: "(0, 30]",
        });
    }
    let (k0, k1) = bessel_k01(z)?;
    Ok(match order {
        BesselOrder::Zero => k0,
        BesselOrder::One => k1,
    })
}

/// Both Macdonald functions at once.
pub fn bessel_k01(z: f64) -> Result<(f64, f64)> {
    if !(z > 0.0) {
        return Err(Error::Domain {
            function: "bessel_k01",
            value: z,
            range: "(0, 30]",
        });
    }
    let p = macdonald_parts(z, &SeriesConfig::default())?;
    Ok((p.k0.unwrap_or(f64::NAN), p.k1.unwrap_or(f64::NAN)))
}

mod wide {
    use super::MacdonaldParts;
    use crate::error::{Error, Result};
    use dashu_float::round::mode::HalfEven;
    use dashu_float::FBig;
    use dashu_int::IBig;

    type Float = FBig<HalfEven, 2>;

    const PRECISION: usize = 192;
    /// floor(C * 2^200)
    const EULER_SCALED: &str = "927549811672521911724738044671514915956439037055195146098956";

    fn float(x: f64) -> Float {
        Float::try_from(x)
            .expect("finite argument")
            .with_precision(PRECISION)
            .value()
    }

    fn to_f64(x: &Float) -> f64 {
        x.to_f64().value()
    }

    pub(super) fn parts(z: f64, max_terms: usize) -> Result<MacdonaldParts> {
        let euler = Float::from_parts(
            IBig::from_str_radix(EULER_SCALED, 10).expect("valid digits"),
            -200,
        )
        .with_precision(PRECISION)
        .value();
        let one = float(1.0);
        let half = float(z * 0.5);
        let q = &half * &half;
        let mut even = one.clone();
        let mut odd = half.clone();
        let mut psi_next = one.clone();
        let mut i0 = even.clone();
        let mut i1 = odd.clone();
        let mut s0 = float(0.0);
        let mut s1 = -(&odd / float(2.0));
        let mut converged = false;
        for n in 1..max_terms {
            let nf = n as f64;
            even = &even * &q / float(nf * nf);
            odd = &odd * &q / float(nf * (nf + 1.0));
            let psi = psi_next.clone();
            psi_next = &psi_next + &one / float(nf + 1.0);
            let s0_term = &even * &psi;
            let s1_term = -(&odd * (&psi + &psi_next) / float(2.0));
            i0 = &i0 + &even;
            i1 = &i1 + &odd;
            s0 = &s0 + &s0_term;
            s1 = &s1 + &s1_term;
            let tol = 1e-50;
            if to_f64(&even).abs() < tol * to_f64(&i0).abs()
                && to_f64(&s1_term).abs() < tol * to_f64(&s1).abs()
            {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Bessel series at z = {z} did not converge within {max_terms} terms"
            )));
        }
        let log_term = float(z * 0.5).ln() + euler;
        let k0 = &s0 - &log_term * &i0;
        let k1 = &one / float(z) + &log_term * &i1 + &s1;
        Ok(MacdonaldParts {
            i0: to_f64(&i0),
            i1: to_f64(&i1),
            s0: to_f64(&s0),
            s1: to_f64(&s1),
            k0: Some(to_f64(&k0)),
            k1: Some(to_f64(&k1)),
        })
    }
}
