//! Regularized solves, the order-recursive driver, field reconstruction, noise and
//! error functionals.

use nalgebra::{DMatrix, DVector, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fundamental::FundamentalSequence;
use crate::geometry::{Annulus, CurveId};
use crate::laguerre::laguerre_all;
use crate::nystrom::{DensitySet, DiscreteSystem, Equation, KernelContext, OperatorSequence};

/// Name of the noise generator, recorded with every noisy run.
pub const NOISE_GENERATOR: &str =
    "ChaCha8Rng (rand_chacha 0.3) with rand_distr::StandardNormal, one draw per scalar component";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TikhonovConfig {
    alpha: f64,
    rank_tol: f64,
}

impl TikhonovConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_rank_tol(alpha, 1e-14)
    }

    /// `rank_tol` is relative to the largest singular value and only used when `alpha = 0`.
    pub fn with_rank_tol(alpha: f64, rank_tol: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and nonnegative, got {alpha}"
            )));
        }
        if !(0.0..1.0).contains(&rank_tol) {
            return Err(Error::InvalidParameter(format!(
                "rank_tol must lie in [0, 1), got {rank_tol}"
            )));
        }
        Ok(Self { alpha, rank_tol })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovSolution {
    pub x: DVector<f64>,
    /// `‖A x - b‖₂`.
    pub residual_norm: f64,
    /// Set when `alpha = 0` and singular values were dropped.
    pub rank_deficient: bool,
}

/// SVD of a matrix, reusable for any right-hand side and regularization parameter.
#[derive(Debug, Clone)]
pub struct TikhonovSolver {
    u: DMatrix<f64>,
    singular: DVector<f64>,
    v_t: DMatrix<f64>,
}

impl TikhonovSolver {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() < a.ncols() {
            return Err(Error::Dimension(format!(
                "matrix must be square or tall, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let svd = a.clone().svd(true, true);
        let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
            return Err(Error::Numerical(
                "SVD did not return singular vectors".into(),
            ));
        };
        Ok(Self {
            u,
            singular: svd.singular_values,
            v_t,
        })
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular
    }

    /// `σ_max / σ_min`.
    pub fn condition_number(&self) -> f64 {
        self.singular.max() / self.singular.min()
    }

    /// `argmin ‖A x - b‖² + α ‖x‖²`.
    pub fn solve(&self, b: &DVector<f64>, cfg: &TikhonovConfig) -> Result<TikhonovSolution> {
        if b.len() != self.u.nrows() {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.u.nrows()
            )));
        }
        let alpha = cfg.alpha();
        let cutoff = cfg.rank_tol() * self.singular.max();
        let utb = self.u.tr_mul(b);
        let mut rank_deficient = false;
        let mut coeffs = DVector::zeros(utb.len());
        let mut fitted = DVector::zeros(utb.len());
        for (i, (&sigma, &c)) in self.singular.iter().zip(utb.iter()).enumerate() {
            if alpha == 0.0 {
                if sigma <= cutoff {
                    rank_deficient = true;
                    continue;
                }
                coeffs[i] = c / sigma;
                fitted[i] = c;
            } else {
                coeffs[i] = sigma * c / (sigma * sigma + alpha);
                fitted[i] = sigma * coeffs[i];
            }
        }
        let x = self.v_t.tr_mul(&coeffs);
        let residual_norm = (b - &self.u * fitted).norm();
        if rank_deficient {
            log::warn!("numerically rank-deficient system without regularization, residual {residual_norm:.3e}");
        }
        Ok(TikhonovSolution {
            x,
            residual_norm,
            rank_deficient,
        })
    }
}

pub fn tikhonov_solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    cfg: &TikhonovConfig,
) -> Result<TikhonovSolution> {
    TikhonovSolver::new(a)?.solve(b, cfg)
}

/// Solves the system for orders `0..data.len()`, feeding each solution into later right-hand sides.
pub fn solve_sequence<F>(
    system: &DiscreteSystem,
    data: &[DVector<f64>],
    mut solve: F,
) -> Result<DensitySet>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut densities = DensitySet::new(system.grid());
    for (n, d) in data.iter().enumerate() {
        let rhs = system.rhs(n, d, &densities)?;
        let psi = solve(&rhs).map_err(|e| match e {
            Error::Numerical(msg) => Error::NonFinite {
                order: n,
                what: msg,
            },
            other => other,
        })?;
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                order: n,
                what: "density".into(),
            });
        }
        densities.push(psi)?;
    }
    Ok(densities)
}

/// `solve_sequence` with Tikhonov regularization on a precomputed SVD.
pub fn solve_sequence_tikhonov(
    system: &DiscreteSystem,
    solver: &TikhonovSolver,
    data: &[DVector<f64>],
    cfg: &TikhonovConfig,
) -> Result<DensitySet> {
    solve_sequence(system, data, |b| solver.solve(b, cfg).map(|s| s.x))
}

/// `solve_sequence` with an LU factorization, for the well-posed direct problems.
pub fn solve_sequence_direct(system: &DiscreteSystem, data: &[DVector<f64>]) -> Result<DensitySet> {
    let lu = system.matrix().clone().lu();
    solve_sequence(system, data, |b| {
        lu.solve(b)
            .ok_or_else(|| Error::Numerical("singular collocation matrix".into()))
    })
}

/// Packs nodal vector fields, block after block, into the row layout.
pub fn stack_blocks(blocks: &[&[Vector2<f64>]]) -> DVector<f64> {
    DVector::from_iterator(
        blocks.iter().map(|b| 2 * b.len()).sum(),
        blocks
            .iter()
            .flat_map(|b| b.iter().flat_map(|v| [v.x, v.y])),
    )
}

fn unstack(v: &DVector<f64>) -> Vec<Vector2<f64>> {
    v.as_slice()
        .chunks_exact(2)
        .map(|c| Vector2::new(c[0], c[1]))
        .collect()
}

/// `Σ_{p=0}^{n} A_p ψ_{n-p}` for every stored order, as vectors per row pair.
pub fn apply_sequence(
    op: &OperatorSequence,
    densities: &DensitySet,
) -> Result<Vec<Vec<Vector2<f64>>>> {
    (0..densities.orders())
        .map(|n| op.apply(n, densities).map(|v| unstack(&v)))
        .collect()
}

/// u_n at interior points, indexed `[n][point]`.
pub fn interior_eval(
    ctx: &KernelContext<'_>,
    densities: &DensitySet,
    points: &[Vector2<f64>],
) -> Result<Vec<Vec<Vector2<f64>>>> {
    apply_sequence(&ctx.interior_operator(points)?, densities)
}

/// Trace and traction operators on the inner curve at fixed parameters, reusable across solves.
#[derive(Debug, Clone)]
pub struct Gamma1Evaluator {
    trace: OperatorSequence,
    traction: OperatorSequence,
}

impl Gamma1Evaluator {
    pub fn new(ctx: &KernelContext<'_>, params: &[f64]) -> Result<Self> {
        Ok(Self {
            trace: ctx.boundary_operator(Equation::Single { on: CurveId::Inner }, params)?,
            traction: ctx.boundary_operator(
                Equation::Traction {
                    on: CurveId::Inner,
                    jump: -1.0,
                },
                params,
            )?,
        })
    }

    /// f_{1,n}, indexed `[n][parameter]`.
    pub fn trace(&self, densities: &DensitySet) -> Result<Vec<Vec<Vector2<f64>>>> {
        apply_sequence(&self.trace, densities)
    }

    /// g_{1,n} with respect to the outward normal of the domain (pointing into the hole).
    pub fn traction(&self, densities: &DensitySet) -> Result<Vec<Vec<Vector2<f64>>>> {
        Ok(apply_sequence(&self.traction, densities)?
            .into_iter()
            .map(|row| row.into_iter().map(|v| -v).collect())
            .collect())
    }
}

/// f_{1,n} at parameters of the inner curve, indexed `[n][parameter]`.
pub fn gamma1_trace(
    ctx: &KernelContext<'_>,
    densities: &DensitySet,
    params: &[f64],
) -> Result<Vec<Vec<Vector2<f64>>>> {
    let op = ctx.boundary_operator(Equation::Single { on: CurveId::Inner }, params)?;
    apply_sequence(&op, densities)
}

/// g_{1,n} at parameters of the inner curve, with respect to the outward normal of the
/// domain (pointing into the hole).
pub fn gamma1_traction(
    ctx: &KernelContext<'_>,
    densities: &DensitySet,
    params: &[f64],
) -> Result<Vec<Vec<Vector2<f64>>>> {
    let op = ctx.boundary_operator(
        Equation::Traction {
            on: CurveId::Inner,
            jump: -1.0,
        },
        params,
    )?;
    Ok(apply_sequence(&op, densities)?
        .into_iter()
        .map(|row| row.into_iter().map(|v| -v).collect())
        .collect())
}

/// Traction on the outer curve from the domain side, outward normal.
pub fn gamma2_traction(
    ctx: &KernelContext<'_>,
    densities: &DensitySet,
    params: &[f64],
) -> Result<Vec<Vec<Vector2<f64>>>> {
    let op = ctx.boundary_operator(
        Equation::Traction {
            on: CurveId::Outer,
            jump: 1.0,
        },
        params,
    )?;
    apply_sequence(&op, densities)
}

/// Values `[E_n(x, z)]_1` at each point, indexed `[n][point]`.
pub fn point_source_values(
    seq: &FundamentalSequence,
    points: &[Vector2<f64>],
    source: &Vector2<f64>,
) -> Result<Vec<Vec<Vector2<f64>>>> {
    let per_point = points
        .iter()
        .map(|x| seq.fundamental_full(x, source))
        .collect::<Result<Vec<_>>>()?;
    Ok(by_order(seq.order(), &per_point))
}

/// Tractions `[T_x E_n(x, z)]_1` with the given normals, indexed `[n][point]`.
pub fn point_source_tractions(
    seq: &FundamentalSequence,
    points: &[Vector2<f64>],
    normals: &[Vector2<f64>],
    source: &Vector2<f64>,
) -> Result<Vec<Vec<Vector2<f64>>>> {
    if points.len() != normals.len() {
        return Err(Error::Dimension("one normal per point is required".into()));
    }
    let per_point = points
        .iter()
        .zip(normals)
        .map(|(x, nu)| seq.traction_full(x, source, nu))
        .collect::<Result<Vec<_>>>()?;
    Ok(by_order(seq.order(), &per_point))
}

fn by_order(order: usize, per_point: &[Vec<nalgebra::Matrix2<f64>>]) -> Vec<Vec<Vector2<f64>>> {
    (0..=order)
        .map(|n| {
            per_point
                .iter()
                .map(|m| m[n].column(0).into_owned())
                .collect()
        })
        .collect()
}

/// Points and unit normals sampled along a curve.
pub type CurveSamples = (Vec<Vector2<f64>>, Vec<Vector2<f64>>);

/// Nodes, outward normals and points of one curve of the annulus.
pub fn curve_samples(annulus: &Annulus, curve: CurveId, params: &[f64]) -> Result<CurveSamples> {
    let c = annulus.curve(curve);
    let points = params.iter().map(|&s| c.point(s)).collect();
    let normals = params
        .iter()
        .map(|&s| c.outward_normal(s))
        .collect::<Result<_>>()?;
    Ok((points, normals))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    delta: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(delta: f64, seed: u64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise level must be finite and nonnegative, got {delta}"
            )));
        }
        Ok(Self { delta, seed })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Seeded stream of relative perturbations `g + δ (‖g‖/‖v‖) v`.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    delta: f64,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(spec: NoiseSpec) -> Self {
        Self {
            delta: spec.delta,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
        }
    }

    pub fn perturb(&mut self, values: &[f64]) -> Result<Vec<f64>> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("noise input must be finite".into()));
        }
        if self.delta == 0.0 || values.is_empty() {
            return Ok(values.to_vec());
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (v, v_norm) = loop {
            let v: Vec<f64> = (0..values.len())
                .map(|_| StandardNormal.sample(&mut self.rng))
                .collect();
            let v_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if v_norm > 0.0 {
                break (v, v_norm);
            }
        };
        let scale = self.delta * norm / v_norm;
        Ok(values.iter().zip(v).map(|(g, e)| g + scale * e).collect())
    }

    /// Perturbs a nodal vector field as one flat vector of components.
    pub fn perturb_field(&mut self, values: &[Vector2<f64>]) -> Result<Vec<Vector2<f64>>> {
        let flat: Vec<f64> = values.iter().flat_map(|v| [v.x, v.y]).collect();
        Ok(self
            .perturb(&flat)?
            .chunks_exact(2)
            .map(|c| Vector2::new(c[0], c[1]))
            .collect())
    }
}

pub fn add_noise(values: &[f64], spec: NoiseSpec) -> Result<Vec<f64>> {
    NoiseSource::new(spec).perturb(values)
}

/// Relative discrete L² error of nodal vector fields on an equispaced periodic grid.
pub fn relative_l2_error(computed: &[Vector2<f64>], exact: &[Vector2<f64>]) -> Result<f64> {
    if computed.len() != exact.len() {
        return Err(Error::Dimension(
            "computed and exact fields differ in length".into(),
        ));
    }
    let num: f64 = computed
        .iter()
        .zip(exact)
        .map(|(c, e)| (c - e).norm_squared())
        .sum();
    let den: f64 = exact.iter().map(|e| e.norm_squared()).sum();
    if den == 0.0 {
        return Err(Error::Numerical(
            "exact field vanishes, relative error undefined".into(),
        ));
    }
    Ok((num / den).sqrt())
}

/// `(e_f, e_g)` for one order.
pub fn errors_stationary(
    f_computed: &[Vector2<f64>],
    f_exact: &[Vector2<f64>],
    g_computed: &[Vector2<f64>],
    g_exact: &[Vector2<f64>],
) -> Result<(f64, f64)> {
    Ok((
        relative_l2_error(f_computed, f_exact)?,
        relative_l2_error(g_computed, g_exact)?,
    ))
}

/// Times `0, dt, ..., t_end`.
pub fn time_samples(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bad time grid: t_end = {t_end}, dt = {dt}"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    if ((steps as f64) * dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} is not a multiple of dt = {dt}"
        )));
    }
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

/// `κ Σ_n c_n L_n(κ t)` for nodal coefficient fields `coeffs[n][node]`.
pub fn synthesize_field(coeffs: &[Vec<Vector2<f64>>], kappa: f64, t: f64) -> Vec<Vector2<f64>> {
    let Some(first) = coeffs.first() else {
        return Vec::new();
    };
    let l = laguerre_all(coeffs.len() - 1, kappa * t);
    let mut out = vec![Vector2::zeros(); first.len()];
    for (c, ln) in coeffs.iter().zip(&l) {
        for (o, v) in out.iter_mut().zip(c) {
            *o += v * (kappa * ln);
        }
    }
    out
}

/// Relative space-time L² error with the trapezoid rule in time, fields indexed `[time][node]`.
pub fn transient_error(computed: &[Vec<Vector2<f64>>], exact: &[Vec<Vector2<f64>>]) -> Result<f64> {
    if computed.len() != exact.len() || computed.len() < 2 {
        return Err(Error::Dimension(
            "need matching time series with at least two samples".into(),
        ));
    }
    let last = computed.len() - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (c, e)) in computed.iter().zip(exact).enumerate() {
        if c.len() != e.len() {
            return Err(Error::Dimension(format!(
                "node count differs at time sample {i}"
            )));
        }
        let w = if i == 0 || i == last { 0.5 } else { 1.0 };
        num += w * c
            .iter()
            .zip(e)
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>();
        den += w * e.iter().map(|b| b.norm_squared()).sum::<f64>();
    }
    if den == 0.0 {
        return Err(Error::Numerical(
            "exact field vanishes, relative error undefined".into(),
        ));
    }
    Ok((num / den).sqrt())
}
