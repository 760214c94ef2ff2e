//! The fundamental sequence of the Laguerre-transformed Lamé system and its
//! traction, together with the logarithmic splittings needed for quadrature.
//!
//! ```text
//! E_n(x,y)   = Phi_1n(r) I + Phi_2n(r) J(x-y),                r = |x-y|
//! Phi_n(g,r) = K_0(g r) v_n(g,r) + K_1(g r) w_n(g,r)
//! Phi_ln(r)  = (-l)^(l-1)/(kappa^2 r^2) sum_k chi_kn [Phi_{n+k}(g_s,r) - Phi_{n+k}(g_p,r)]
//!              + (-1)^(l-1)/c_p^2 Phi_n(g_p,r) + (l-1)/c_s^2 Phi_n(g_s,r)
//! T_x E_n    = U_1/r^2 [Phi~_1n I + Phi~_2n J] + Phi_2n U_2/r^2
//! ```
//!
//! Every layer function splits as `eta(r) ln r + xi(r)` with `eta`, `xi`
//! even power series in `r`. Those series are built once per material and
//! evaluated by Horner's rule; they give the split channels everywhere and the
//! full values near the origin, where the `1/r^2` prefactor makes the direct
//! Bessel formula cancel catastrophically. Away from the origin full values use
//! the direct formula.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use log::{debug, warn};
use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{u_matrix, MaterialParams, UKind};
use crate::special_functions::{bessel_k01, harmonic, EULER_GAMMA, MAX_ARGUMENT};

/// The recurrence coefficients a_{n,m}(gamma), 0 <= m <= n <= n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    gamma: f64,
    rows: Vec<Vec<f64>>,
}

impl CoefficientTable {
    /// Builds the table up to order `order + 2`.
    pub fn build(order: usize, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let n_max = order + 2;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let mut row = vec![0.0; n + 1];
            row[0] = 1.0;
            if n >= 1 {
                row[n] = -(gamma / n as f64) * rows[n - 1][n - 1];
            }
            for m in (1..n).rev() {
                let half = m.div_ceil(2) as f64;
                let history: f64 = (m - 1..n)
                    .map(|k| (n - k + 1) as f64 * rows[k][m - 1])
                    .sum();
                row[m] = (4.0 * half * half * row[m + 1] - gamma * gamma * history)
                    / (2.0 * gamma * m as f64);
            }
            rows.push(row);
        }
        Ok(Self { gamma, rows })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// a_{n,m}, zero for m > n.
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.rows
            .get(n)
            .and_then(|row| row.get(m))
            .copied()
            .unwrap_or(0.0)
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::OrderOutOfRange {
                n,
                max: self.n_max(),
            });
        }
        Ok(())
    }
}

type TableCache = RwLock<HashMap<(usize, u64), Arc<CoefficientTable>>>;

fn table_cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared coefficient table for `(order, gamma)`, built at most once per process.
pub fn build_coefficient_table(order: usize, gamma: f64) -> Result<Arc<CoefficientTable>> {
    let key = (order, gamma.to_bits());
    if let Some(t) = table_cache()
        .read()
        .expect("coefficient cache poisoned")
        .get(&key)
    {
        return Ok(Arc::clone(t));
    }
    let mut cache = table_cache().write().expect("coefficient cache poisoned");
    if let Some(t) = cache.get(&key) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(CoefficientTable::build(order, gamma)?);
    cache.insert(key, Arc::clone(&table));
    Ok(table)
}

/// The polynomials v_n, w_n and their counterparts for r d/dr.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polys {
    pub v: f64,
    pub w: f64,
    pub v_tilde: f64,
    pub w_tilde: f64,
}

/// Coefficients of v (in r^{2m}), w (in r^{2m+1}) and of the tilde pair.
fn poly_coeffs(table: &CoefficientTable, n: usize) -> [Vec<f64>; 4] {
    let g = table.gamma;
    let a = |m: usize| table.get(n, m);
    let half = n / 2 + 1;
    let v: Vec<f64> = (0..half).map(|m| a(2 * m)).collect();
    let w: Vec<f64> = (0..half).map(|m| a(2 * m + 1)).collect();
    let v_tilde: Vec<f64> = (0..=half)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                2.0 * m as f64 * a(2 * m) - g * a(2 * m - 1)
            }
        })
        .collect();
    let w_tilde: Vec<f64> = (0..=half)
        .map(|m| 2.0 * m as f64 * a(2 * m + 1) - g * a(2 * m))
        .collect();
    [v, w, v_tilde, w_tilde]
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub fn eval_polys(table: &CoefficientTable, n: usize, r: f64) -> Result<Polys> {
    table.check_order(n)?;
    let [v, w, vt, wt] = poly_coeffs(table, n);
    let r2 = r * r;
    Ok(Polys {
        v: horner(&v, r2),
        w: r * horner(&w, r2),
        v_tilde: horner(&vt, r2),
        w_tilde: r * horner(&wt, r2),
    })
}

/// A scalar split as `log_factor * ln r + smooth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitScalar {
    pub full: f64,
    pub log_factor: f64,
    pub smooth: f64,
}

impl SplitScalar {
    /// Relative mismatch between `full` and the recombined split at `r`.
    pub fn split_defect(&self, r: f64) -> f64 {
        let recombined = self.log_factor * r.ln() + self.smooth;
        (recombined - self.full).abs() / self.full.abs().max(f64::MIN_POSITIVE)
    }
}

fn series_parts(gamma: f64, r: f64) -> Result<[f64; 4]> {
    let z = gamma * r;
    let p = crate::special_functions::macdonald_parts(z, &Default::default())?;
    Ok([p.i0, p.i1, p.s0, p.s1])
}

fn split_phi(table: &CoefficientTable, n: usize, r: f64, tilde: bool) -> Result<SplitScalar> {
    if !(r > 0.0) {
        return Err(Error::Domain {
            function: "phi",
            value: r,
            range: "(0, inf)",
        });
    }
    let g = table.gamma;
    let p = eval_polys(table, n, r)?;
    let (v, w) = if tilde {
        (p.v_tilde, p.w_tilde)
    } else {
        (p.v, p.w)
    };
    let [i0, i1, s0, s1] = series_parts(g, r)?;
    let (k0, k1) = bessel_k01(g * r)?;
    let log_const = EULER_GAMMA + (g / 2.0).ln();
    Ok(SplitScalar {
        full: k0 * v + k1 * w,
        log_factor: -i0 * v + i1 * w,
        smooth: (-log_const * i0 + s0) * v + (1.0 / (g * r) + log_const * i1 + s1) * w,
    })
}

/// Phi_n(gamma, r) with its logarithmic split.
pub fn phi(table: &CoefficientTable, n: usize, r: f64) -> Result<SplitScalar> {
    split_phi(table, n, r, false)
}

/// r d/dr Phi_n(gamma, r) with its logarithmic split.
pub fn phi_tilde(table: &CoefficientTable, n: usize, r: f64) -> Result<SplitScalar> {
    split_phi(table, n, r, true)
}

fn chi(k: i32, n: usize) -> f64 {
    let n = n as f64;
    match k {
        -2 => n * (n - 1.0),
        -1 => -4.0 * n * n,
        0 => 2.0 * (3.0 * n * n + 3.0 * n + 1.0),
        1 => -4.0 * (n + 1.0) * (n + 1.0),
        2 => (n + 1.0) * (n + 2.0),
        _ => unreachable!("chi is defined for k in -2..=2"),
    }
}

/// Number of r^2 coefficients kept in the layer series.
const SERIES_LEN: usize = 96;

/// Above this value of `gamma_s * r` full values come from the Bessel formula.
const SERIES_SWITCH: f64 = 1.5;

/// Orders up to `LOW_ORDER_MAX` keep the series up to this larger switch, where
/// the series is both accurate and much smoother than the Bessel formula.
const LOW_ORDER_SWITCH: f64 = 2.6;
const LOW_ORDER_MAX: usize = 5;

fn series_switch(n: usize) -> f64 {
    if n <= LOW_ORDER_MAX {
        LOW_ORDER_SWITCH
    } else {
        SERIES_SWITCH
    }
}

/// Largest `gamma_s * r` at which the truncated series are trusted.
const SERIES_LIMIT: f64 = 12.0;

/// Power series in r^2 of the log factor and the smooth part of Phi_j or Phi~_j.
#[derive(Debug, Clone)]
struct PhiSeries {
    log: Vec<f64>,
    smooth: Vec<f64>,
}

/// Series of I_0, I_1 and the smooth multipliers of v and w, all in r^2.
struct BaseSeries {
    i0: Vec<f64>,
    i1: Vec<f64>,
    even: Vec<f64>,
    odd: Vec<f64>,
}

fn base_series(gamma: f64) -> BaseSeries {
    let log_const = EULER_GAMMA + (gamma / 2.0).ln();
    let q = gamma * gamma / 4.0;
    let mut i0 = Vec::with_capacity(SERIES_LEN);
    let mut i1 = Vec::with_capacity(SERIES_LEN);
    let mut t0 = 1.0;
    let mut t1 = gamma / 2.0;
    for p in 0..SERIES_LEN {
        if p > 0 {
            let pf = p as f64;
            t0 *= q / (pf * pf);
            t1 *= q / (pf * (pf + 1.0));
        }
        i0.push(t0);
        i1.push(t1);
    }
    let even = (0..SERIES_LEN)
        .map(|p| -log_const * i0[p] + harmonic(p) * i0[p])
        .collect();
    let odd = (0..SERIES_LEN)
        .map(|p| log_const * i1[p] - 0.5 * (harmonic(p + 1) + harmonic(p)) * i1[p])
        .collect();
    BaseSeries { i0, i1, even, odd }
}

fn phi_series(table: &CoefficientTable, base: &BaseSeries, n: usize, tilde: bool) -> PhiSeries {
    let [v, w, vt, wt] = poly_coeffs(table, n);
    let (v, w) = if tilde { (vt, wt) } else { (v, w) };
    let mut log = vec![0.0; SERIES_LEN];
    let mut smooth = vec![0.0; SERIES_LEN];
    for (m, &c) in v.iter().enumerate() {
        for p in 0..SERIES_LEN - m {
            log[p + m] -= base.i0[p] * c;
            smooth[p + m] += base.even[p] * c;
        }
    }
    for (m, &c) in w.iter().enumerate() {
        // r^{2m+1} times r^{2p+1} lands on r^{2(p+m+1)}
        for p in 0..SERIES_LEN.saturating_sub(m + 1) {
            log[p + m + 1] += base.i1[p] * c;
            smooth[p + m + 1] += base.odd[p] * c;
        }
        smooth[m] += c / table.gamma;
    }
    PhiSeries { log, smooth }
}

/// r^2 series of eta and xi for one layer function.
#[derive(Debug, Clone)]
struct LayerSeries {
    eta: Vec<f64>,
    xi: Vec<f64>,
}

/// Layer-function values of every order at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerOrder {
    /// Phi_{l,n} for l = 1, 2.
    pub phi: [f64; 2],
    pub eta: [f64; 2],
    pub xi: [f64; 2],
    /// Phi~_{l,n} for l = 1, 2.
    pub phi_tilde: [f64; 2],
    pub eta_tilde: [f64; 2],
    pub xi_tilde: [f64; 2],
}

/// Which layer channels to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channels {
    /// Only the unsplit values.
    Full,
    /// Only the eta/xi splittings.
    Split,
    /// Everything.
    Both,
}

/// Values of eta, xi and xi~ at r = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroLimits {
    pub eta: f64,
    pub xi: f64,
    pub xi_tilde: f64,
}

/// A 2×2 kernel value with its singular decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitMatrix {
    pub full: Matrix2<f64>,
    pub log_part: Matrix2<f64>,
    /// Coefficient of cot((sigma - s)/2), only for parametrized traction kernels.
    pub cot_coeff: Option<Matrix2<f64>>,
    pub smooth: Matrix2<f64>,
}

/// Precomputed fundamental sequence for one material and order bound.
#[derive(Debug, Clone)]
pub struct FundamentalSequence {
    params: MaterialParams,
    order: usize,
    tables: [Arc<CoefficientTable>; 2],
    /// indexed [l-1][n]
    plain: [Vec<LayerSeries>; 2],
    tilde: [Vec<LayerSeries>; 2],
    limits: [Vec<ZeroLimits>; 2],
}

const SHEAR: usize = 0;
const PRESSURE: usize = 1;

impl FundamentalSequence {
    /// Prepares orders `0..=order`.
    pub fn new(params: MaterialParams, order: usize) -> Result<Self> {
        let gammas = [params.gamma_s(), params.gamma_p()];
        let tables = [
            build_coefficient_table(order, gammas[SHEAR])?,
            build_coefficient_table(order, gammas[PRESSURE])?,
        ];
        let bases = [base_series(gammas[SHEAR]), base_series(gammas[PRESSURE])];
        let phis: Vec<Vec<[PhiSeries; 2]>> = (0..2)
            .map(|w| {
                (0..=order + 2)
                    .map(|j| {
                        [
                            phi_series(&tables[w], &bases[w], j, false),
                            phi_series(&tables[w], &bases[w], j, true),
                        ]
                    })
                    .collect()
            })
            .collect();
        let kappa2 = params.kappa() * params.kappa();
        let (cs2, cp2) = (params.c_s().powi(2), params.c_p().powi(2));
        let mut plain: [Vec<LayerSeries>; 2] = [Vec::new(), Vec::new()];
        let mut tilde: [Vec<LayerSeries>; 2] = [Vec::new(), Vec::new()];
        for l in 1..=2usize {
            let prefactor = if l == 1 { 1.0 } else { -2.0 } / kappa2;
            let sign = if l == 1 { 1.0 } else { -1.0 };
            let shear_weight = (l - 1) as f64 / cs2;
            for n in 0..=order {
                let mut channels = [
                    [vec![0.0; SERIES_LEN], vec![0.0; SERIES_LEN]],
                    [vec![0.0; SERIES_LEN], vec![0.0; SERIES_LEN]],
                ];
                for (t, out) in channels.iter_mut().enumerate() {
                    let is_tilde = t == 1;
                    for (ch, dest) in out.iter_mut().enumerate() {
                        let pick = |w: usize, j: usize, tl: bool| -> &Vec<f64> {
                            let s = &phis[w][j][tl as usize];
                            if ch == 0 {
                                &s.log
                            } else {
                                &s.smooth
                            }
                        };
                        let mut combo = vec![0.0; SERIES_LEN];
                        for k in -2i32..=2 {
                            let j = n as i64 + k as i64;
                            if j < 0 {
                                continue;
                            }
                            let j = j as usize;
                            let c = chi(k, n);
                            #[allow(clippy::needless_range_loop)]
                            for p in 0..SERIES_LEN {
                                let bracket = if is_tilde {
                                    pick(SHEAR, j, true)[p] - 2.0 * pick(SHEAR, j, false)[p]
                                        + 2.0 * pick(PRESSURE, j, false)[p]
                                        - pick(PRESSURE, j, true)[p]
                                } else {
                                    pick(SHEAR, j, false)[p] - pick(PRESSURE, j, false)[p]
                                };
                                combo[p] += c * bracket;
                            }
                        }
                        let scale = combo.iter().map(|c| c.abs()).fold(0.0, f64::max);
                        if combo[0].abs() > 1e-10 * scale.max(1.0) {
                            debug!(
                                "order {n}: constant term {:e} of the chi combination does not cancel",
                                combo[0]
                            );
                        }
                        for p in 0..SERIES_LEN - 1 {
                            dest[p] = prefactor * combo[p + 1]
                                + sign / cp2 * pick(PRESSURE, n, is_tilde)[p]
                                + shear_weight * pick(SHEAR, n, is_tilde)[p];
                        }
                    }
                }
                let [[eta, xi], [eta_t, xi_t]] = channels;
                plain[l - 1].push(LayerSeries { eta, xi });
                tilde[l - 1].push(LayerSeries {
                    eta: eta_t,
                    xi: xi_t,
                });
            }
        }
        let mut seq = Self {
            params,
            order,
            tables,
            plain,
            tilde,
            limits: [Vec::new(), Vec::new()],
        };
        for l in 1..=2 {
            for n in 0..=order {
                let from_series = ZeroLimits {
                    eta: seq.plain[l - 1][n].eta[0],
                    xi: seq.plain[l - 1][n].xi[0],
                    xi_tilde: seq.tilde[l - 1][n].xi[0],
                };
                let printed = seq.limits_from_epsilon(l, n);
                let worst = [
                    (printed.eta - from_series.eta).abs(),
                    (printed.xi - from_series.xi).abs(),
                    (printed.xi_tilde - from_series.xi_tilde).abs(),
                ]
                .into_iter()
                .fold(0.0, f64::max);
                if worst > 1e-6 {
                    warn!(
                        "closed-form limits at r = 0 disagree with the series for l = {l}, n = {n} \
                         (by {worst:e}); using the series values"
                    );
                }
                seq.limits[l - 1].push(from_series);
            }
        }
        Ok(seq)
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    /// Highest order available.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn table(&self, pressure: bool) -> &CoefficientTable {
        &self.tables[if pressure { PRESSURE } else { SHEAR }]
    }

    fn check(&self, l: usize, n: usize) -> Result<()> {
        if !(l == 1 || l == 2) {
            return Err(Error::InvalidParameter(format!(
                "layer index must be 1 or 2, got {l}"
            )));
        }
        if n > self.order {
            return Err(Error::OrderOutOfRange { n, max: self.order });
        }
        Ok(())
    }

    /// eta, xi, xi~ at r = 0 from the closed-form epsilon coefficients.
    pub fn limits_from_epsilon(&self, l: usize, n: usize) -> ZeroLimits {
        let params = &self.params;
        let kappa2 = params.kappa().powi(2);
        let (cs2, cp2) = (params.c_s().powi(2), params.c_p().powi(2));
        let prefactor = if l == 1 { 1.0 } else { -2.0 } / kappa2;
        let sign = if l == 1 { 1.0 } else { -1.0 };
        let shear_weight = (l - 1) as f64 / cs2;
        let eps = |w: usize, j: usize| -> [f64; 5] {
            let t = &self.tables[w];
            let g = t.gamma;
            let a = |m| t.get(j, m);
            let lc = EULER_GAMMA + (g / 2.0).ln();
            let log2 = -g * g / 4.0 * a(0) + g / 2.0 * a(1) - a(2);
            [
                -a(0),
                log2,
                -lc * a(0) + a(1) / g,
                lc * log2 + g * g / 4.0 * a(0) - g / 4.0 * a(1) + a(3) / g,
                lc * (g * a(1) - 2.0 * a(2) - g * g / 2.0 * a(0)) + g * g / 4.0 * a(0) - a(2)
                    + 2.0 * a(3) / g,
            ]
        };
        let (mut eta, mut xi, mut xi_t) = (0.0, 0.0, 0.0);
        for k in -2i32..=2 {
            let j = n as i64 + k as i64;
            if j < 0 {
                continue;
            }
            let (es, ep) = (eps(SHEAR, j as usize), eps(PRESSURE, j as usize));
            let c = chi(k, n);
            eta += c * (es[1] - ep[1]);
            xi += c * (es[3] - ep[3]);
            // the bracket of the tilde functions carries -2 Phi(g_s) + 2 Phi(g_p)
            xi_t += c * (es[4] - ep[4] - 2.0 * (es[3] - ep[3]));
        }
        let (es, ep) = (eps(SHEAR, n), eps(PRESSURE, n));
        ZeroLimits {
            eta: prefactor * eta + sign / cp2 * ep[0] + shear_weight * es[0],
            xi: prefactor * xi + sign / cp2 * ep[2] + shear_weight * es[2],
            // the constant term of phi~ is -a_{n,0}, the same as that of phi
            xi_tilde: prefactor * xi_t + sign / cp2 * ep[0] + shear_weight * es[0],
        }
    }

    /// eta_{l,n}(0), xi_{l,n}(0), xi~_{l,n}(0).
    pub fn limits_at_zero(&self, l: usize, n: usize) -> Result<ZeroLimits> {
        self.check(l, n)?;
        Ok(self.limits[l - 1][n])
    }

    fn series_terms(&self, r: f64) -> usize {
        // terms behave like (x/2)^{2p}/(p!)^2 times polynomial growth in p
        let x = self.params.gamma_s() * r;
        let q = x * x / 4.0;
        let mut term: f64 = 1.0;
        for p in 1..SERIES_LEN - 1 {
            term *= q / (p * p) as f64;
            // the margin covers the polynomial growth for orders up to ~40 and keeps
            // the truncation independent of the order bound of the sequence
            if term < 1e-40 && p > 4 {
                return (p + 28).min(SERIES_LEN - 1);
            }
        }
        SERIES_LEN - 1
    }

    /// Layer functions of every order at distance `r > 0`.
    pub fn layer_values(&self, r: f64, channels: Channels) -> Result<Vec<LayerOrder>> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::CoincidentPoints);
        }
        let x = self.params.gamma_s() * r;
        let want_split = channels != Channels::Full;
        let series_full = |n: usize| x <= series_switch(n);
        let any_series_full = series_full(0);
        let all_series_full = series_full(self.order);
        if (want_split || any_series_full) && x > SERIES_LIMIT {
            return Err(Error::Domain {
                function: "layer_values",
                value: r,
                range: "gamma_s r <= 12 for the split channels",
            });
        }
        let mut out = vec![LayerOrder::default(); self.order + 1];
        if channels != Channels::Split && !all_series_full {
            self.direct_values(r, &mut out)?;
        }
        if want_split || any_series_full {
            let terms = self.series_terms(r);
            let r2 = r * r;
            let ln_r = r.ln();
            for (n, o) in out.iter_mut().enumerate() {
                if !want_split && !series_full(n) {
                    continue;
                }
                for l in 0..2 {
                    let p = &self.plain[l][n];
                    let t = &self.tilde[l][n];
                    o.eta[l] = horner(&p.eta[..terms], r2);
                    o.xi[l] = horner(&p.xi[..terms], r2);
                    o.eta_tilde[l] = horner(&t.eta[..terms], r2);
                    o.xi_tilde[l] = horner(&t.xi[..terms], r2);
                    if series_full(n) {
                        o.phi[l] = o.eta[l] * ln_r + o.xi[l];
                        o.phi_tilde[l] = o.eta_tilde[l] * ln_r + o.xi_tilde[l];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Full layer values from the Bessel formula.
    fn direct_values(&self, r: f64, out: &mut [LayerOrder]) -> Result<()> {
        if self.params.gamma_s() * r > MAX_ARGUMENT {
            return Err(Error::Domain {
                function: "layer_values",
                value: r,
                range: "gamma_s r <= 30",
            });
        }
        let top = self.order + 2;
        let mut values = [vec![0.0; top + 1], vec![0.0; top + 1]];
        let mut values_t = [vec![0.0; top + 1], vec![0.0; top + 1]];
        for w in [SHEAR, PRESSURE] {
            let t = &self.tables[w];
            let (k0, k1) = bessel_k01(t.gamma * r)?;
            for j in 0..=top {
                let p = eval_polys(t, j, r)?;
                values[w][j] = k0 * p.v + k1 * p.w;
                values_t[w][j] = k0 * p.v_tilde + k1 * p.w_tilde;
            }
        }
        let params = &self.params;
        let kappa2r2 = params.kappa().powi(2) * r * r;
        let (cs2, cp2) = (params.c_s().powi(2), params.c_p().powi(2));
        for (n, o) in out.iter_mut().enumerate() {
            let (mut plain, mut tilde) = (0.0, 0.0);
            for k in -2i32..=2 {
                let j = n as i64 + k as i64;
                if j < 0 {
                    continue;
                }
                let j = j as usize;
                let c = chi(k, n);
                plain += c * (values[SHEAR][j] - values[PRESSURE][j]);
                tilde += c
                    * (values_t[SHEAR][j] - 2.0 * values[SHEAR][j] + 2.0 * values[PRESSURE][j]
                        - values_t[PRESSURE][j]);
            }
            for l in 1..=2usize {
                let prefactor = if l == 1 { 1.0 } else { -2.0 } / kappa2r2;
                let sign = if l == 1 { 1.0 } else { -1.0 };
                let shear_weight = (l - 1) as f64 / cs2;
                o.phi[l - 1] = prefactor * plain
                    + sign / cp2 * values[PRESSURE][n]
                    + shear_weight * values[SHEAR][n];
                o.phi_tilde[l - 1] = prefactor * tilde
                    + sign / cp2 * values_t[PRESSURE][n]
                    + shear_weight * values_t[SHEAR][n];
            }
        }
        Ok(())
    }

    fn layer_split(&self, l: usize, n: usize, r: f64, tilde: bool) -> Result<SplitScalar> {
        self.check(l, n)?;
        let v = self.layer_values(r, Channels::Both)?[n];
        let i = l - 1;
        Ok(if tilde {
            SplitScalar {
                full: v.phi_tilde[i],
                log_factor: v.eta_tilde[i],
                smooth: v.xi_tilde[i],
            }
        } else {
            SplitScalar {
                full: v.phi[i],
                log_factor: v.eta[i],
                smooth: v.xi[i],
            }
        })
    }

    /// Phi_{l,n}(r) = eta ln r + xi.
    pub fn layer_coeffs(&self, l: usize, n: usize, r: f64) -> Result<SplitScalar> {
        self.layer_split(l, n, r, false)
    }

    /// Phi~_{l,n}(r) = eta~ ln r + xi~.
    pub fn layer_coeffs_tilde(&self, l: usize, n: usize, r: f64) -> Result<SplitScalar> {
        self.layer_split(l, n, r, true)
    }

    /// E_n(x, y) with its logarithmic split.
    pub fn fundamental_matrix(
        &self,
        n: usize,
        x: &Vector2<f64>,
        y: &Vector2<f64>,
    ) -> Result<SplitMatrix> {
        self.check(1, n)?;
        let d = x - y;
        let r = d.norm();
        let v = self.layer_values(r, Channels::Both)?;
        Ok(fundamental_from_layers(&v[n], &d))
    }

    /// T_x E_n(x, y) with normal `nu` at `x`, split as `ln r W1 + W2`.
    pub fn traction_matrix(
        &self,
        n: usize,
        x: &Vector2<f64>,
        y: &Vector2<f64>,
        nu: &Vector2<f64>,
    ) -> Result<SplitMatrix> {
        self.check(1, n)?;
        let d = x - y;
        let r = d.norm();
        let v = self.layer_values(r, Channels::Both)?;
        Ok(traction_from_layers(&v[n], &d, nu, &self.params))
    }

    /// Unsplit E_0..E_N at (x, y).
    pub fn fundamental_full(
        &self,
        x: &Vector2<f64>,
        y: &Vector2<f64>,
    ) -> Result<Vec<Matrix2<f64>>> {
        let d = x - y;
        let v = self.layer_values(d.norm(), Channels::Full)?;
        let j = d * d.transpose() / d.norm_squared();
        Ok(v.iter()
            .map(|o| Matrix2::identity() * o.phi[0] + j * o.phi[1])
            .collect())
    }

    /// Unsplit T_x E_0..E_N at (x, y).
    pub fn traction_full(
        &self,
        x: &Vector2<f64>,
        y: &Vector2<f64>,
        nu: &Vector2<f64>,
    ) -> Result<Vec<Matrix2<f64>>> {
        let d = x - y;
        let v = self.layer_values(d.norm(), Channels::Full)?;
        let u1 = u_matrix(UKind::One, &d, nu, &self.params);
        let u2 = u_matrix(UKind::Two, &d, nu, &self.params);
        let r2 = d.norm_squared();
        let j = d * d.transpose() / r2;
        Ok(v.iter()
            .map(|o| {
                (u1 * (Matrix2::identity() * o.phi_tilde[0] + j * o.phi_tilde[1]) + u2 * o.phi[1])
                    / r2
            })
            .collect())
    }
}

pub(crate) fn fundamental_from_layers(v: &LayerOrder, d: &Vector2<f64>) -> SplitMatrix {
    let id = Matrix2::identity();
    let j = d * d.transpose() / d.norm_squared();
    SplitMatrix {
        full: id * v.phi[0] + j * v.phi[1],
        log_part: id * v.eta[0] + j * v.eta[1],
        cot_coeff: None,
        smooth: id * v.xi[0] + j * v.xi[1],
    }
}

pub(crate) fn traction_from_layers(
    v: &LayerOrder,
    d: &Vector2<f64>,
    nu: &Vector2<f64>,
    params: &MaterialParams,
) -> SplitMatrix {
    let id = Matrix2::identity();
    let r2 = d.norm_squared();
    let j = d * d.transpose() / r2;
    let u1 = u_matrix(UKind::One, d, nu, params) / r2;
    let u2 = u_matrix(UKind::Two, d, nu, params) / r2;
    SplitMatrix {
        full: u1 * (id * v.phi_tilde[0] + j * v.phi_tilde[1]) + u2 * v.phi[1],
        log_part: u1 * (id * v.eta_tilde[0] + j * v.eta_tilde[1]) + u2 * v.eta[1],
        cot_coeff: None,
        smooth: u1 * (id * v.xi_tilde[0] + j * v.xi_tilde[1]) + u2 * v.xi[1],
    }
}
