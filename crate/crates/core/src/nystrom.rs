//! Nyström discretization of the parametrized single-layer and traction operators.
//!
//! On a single curve the kernels are split as
//!
//! ```text
//! H(s,σ) = L(s,σ) H1(s,σ) + H2(s,σ)
//! Q(s,σ) = L(s,σ) Q1(s,σ) + cot((σ-s)/2) Q2(s) + Q3(s,σ),   L = ln(4/e sin²((s-σ)/2))
//! ```
//!
//! and each piece is integrated with its own trigonometric rule. Kernels between the
//! two curves are smooth and use the trapezoid rule.
//!
//! Unknowns are laid out curve-major (inner, outer), then node, then component.

use std::f64::consts::{E, PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fundamental::{
    fundamental_from_layers, traction_from_layers, Channels, FundamentalSequence, SplitMatrix,
    ZeroLimits,
};
use crate::geometry::{local_matrices, Annulus, CurveId, CurvePoint, LocalMatrices};

/// Equispaced nodes `s_k = k π / M`, `k = 0..2M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NystromGrid {
    m: usize,
}

impl NystromGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "M must be at least 2, got {m}"
            )));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn node_count(&self) -> usize {
        2 * self.m
    }

    /// Number of scalar unknowns over both curves.
    pub fn unknowns(&self) -> usize {
        8 * self.m
    }

    pub fn h(&self) -> f64 {
        PI / self.m as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.node_count()).map(|k| self.node(k))
    }

    /// Index of the node that coincides with `s` modulo 2π.
    pub fn node_index(&self, s: f64) -> Option<usize> {
        let q = s.rem_euclid(TAU) / self.h();
        let k = q.round();
        ((q - k).abs() < 1e-10).then(|| k as usize % self.node_count())
    }

    /// Position of (curve, node, component) in the unknown vector.
    pub fn unknown_index(&self, curve: CurveId, k: usize, component: usize) -> usize {
        curve.index() * 4 * self.m + 2 * k + component
    }
}

/// Weight of node `k` for `(1/2π) ∫ f(σ) ln(4/e sin²((s-σ)/2)) dσ`.
pub fn weight_r(k: usize, s: f64, m: usize) -> f64 {
    let mf = m as f64;
    let t = s - k as f64 * PI / mf;
    let sum: f64 = (1..m).map(|j| (j as f64 * t).cos() / j as f64).sum();
    -(1.0 + 2.0 * sum + (mf * t).cos() / mf) / (2.0 * mf)
}

/// Weight of node `k` for `(1/2π) ∫ f(σ) cot((σ-s)/2) dσ`; zero at `s = s_k`.
pub fn weight_s(k: usize, s: f64, m: usize) -> f64 {
    let mf = m as f64;
    let half = (k as f64 * PI / mf - s) / 2.0;
    let sin = half.sin();
    if sin == 0.0 {
        return 0.0;
    }
    let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    (1.0 - parity * (mf * s).cos()) / (2.0 * mf) * half.cos() / sin
}

/// Lagrange basis of trigonometric interpolation on the 2M nodes.
pub fn interpolation_weight(k: usize, s: f64, m: usize) -> f64 {
    let mf = m as f64;
    let t = s - k as f64 * PI / mf;
    let sum: f64 = (1..m).map(|j| (j as f64 * t).cos()).sum();
    (1.0 + 2.0 * sum + (mf * t).cos()) / (2.0 * mf)
}

/// `ln(4/e sin²((s-σ)/2))`.
fn log_weight(s: f64, sigma: f64) -> f64 {
    (4.0 * ((s - sigma) / 2.0).sin().powi(2)).ln() - 1.0
}

fn same_parameter(s: f64, sigma: f64) -> bool {
    s.rem_euclid(TAU) == sigma.rem_euclid(TAU)
}

/// Operator applied to the densities in one block of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation {
    /// Single-layer values on a curve.
    Single { on: CurveId },
    /// Traction with the curve-outward normal plus `jump * ψ / (2|x'|)`.
    Traction { on: CurveId, jump: f64 },
}

impl Equation {
    pub fn curve(&self) -> CurveId {
        match *self {
            Equation::Single { on } | Equation::Traction { on, .. } => on,
        }
    }
}

/// The three boundary integral systems built from the same kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Values and tractions on the outer curve.
    Cauchy,
    /// Tractions on both curves.
    Neumann,
    /// Values on both curves.
    Dirichlet,
}

impl Problem {
    pub fn equations(self) -> [Equation; 2] {
        match self {
            Problem::Cauchy => [
                Equation::Single { on: CurveId::Outer },
                Equation::Traction {
                    on: CurveId::Outer,
                    jump: 1.0,
                },
            ],
            Problem::Neumann => [
                Equation::Traction {
                    on: CurveId::Inner,
                    jump: -1.0,
                },
                Equation::Traction {
                    on: CurveId::Outer,
                    jump: 1.0,
                },
            ],
            Problem::Dirichlet => [
                Equation::Single { on: CurveId::Inner },
                Equation::Single { on: CurveId::Outer },
            ],
        }
    }
}

/// Nodal densities ψ_n for n = 0, 1, ... in the unknown layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySet {
    grid: NystromGrid,
    psi: Vec<DVector<f64>>,
}

impl DensitySet {
    pub fn new(grid: NystromGrid) -> Self {
        Self {
            grid,
            psi: Vec::new(),
        }
    }

    pub fn grid(&self) -> NystromGrid {
        self.grid
    }

    pub fn push(&mut self, psi: DVector<f64>) -> Result<()> {
        if psi.len() != self.grid.unknowns() {
            return Err(Error::Dimension(format!(
                "density of length {} for {} unknowns",
                psi.len(),
                self.grid.unknowns()
            )));
        }
        self.psi.push(psi);
        Ok(())
    }

    /// Number of stored orders.
    pub fn orders(&self) -> usize {
        self.psi.len()
    }

    pub fn order(&self, n: usize) -> Option<&DVector<f64>> {
        self.psi.get(n)
    }

    /// ψ_n at node `k` of `curve`.
    pub fn psi(&self, n: usize, curve: CurveId, k: usize) -> Vector2<f64> {
        let i = self.grid.unknown_index(curve, k, 0);
        Vector2::new(self.psi[n][i], self.psi[n][i + 1])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            psi: self.psi.iter().map(|v| v * c).collect(),
        }
    }
}

/// Collocated operators A_p for every kernel order p; row blocks follow the equations.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSequence {
    orders: Vec<DMatrix<f64>>,
}

impl OperatorSequence {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn order(&self, p: usize) -> &DMatrix<f64> {
        &self.orders[p]
    }

    pub fn rows(&self) -> usize {
        self.orders[0].nrows()
    }

    fn check(&self, n: usize, densities: &DensitySet, needed: usize) -> Result<()> {
        if n > self.max_order() {
            return Err(Error::OrderOutOfRange {
                n,
                max: self.max_order(),
            });
        }
        if densities.orders() < needed {
            return Err(Error::Dimension(format!(
                "order {n} needs {needed} density orders, {} available",
                densities.orders()
            )));
        }
        if densities.grid().unknowns() != self.orders[0].ncols() {
            return Err(Error::Dimension(
                "density grid does not match the operator".into(),
            ));
        }
        Ok(())
    }

    /// `Σ_{p=1}^{n} A_p ψ_{n-p}`.
    pub fn history(&self, n: usize, densities: &DensitySet) -> Result<DVector<f64>> {
        self.check(n, densities, n)?;
        let mut out = DVector::zeros(self.rows());
        for p in 1..=n {
            out.gemv(1.0, &self.orders[p], &densities.psi[n - p], 1.0);
        }
        Ok(out)
    }

    /// `Σ_{p=0}^{n} A_p ψ_{n-p}`.
    pub fn apply(&self, n: usize, densities: &DensitySet) -> Result<DVector<f64>> {
        self.check(n, densities, n + 1)?;
        let mut out = self.history(n, densities)?;
        out.gemv(1.0, &self.orders[0], &densities.psi[n], 1.0);
        Ok(out)
    }
}

/// Square collocation system of one problem; its matrix is the order-0 operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    problem: Problem,
    grid: NystromGrid,
    operators: OperatorSequence,
}

impl DiscreteSystem {
    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn grid(&self) -> NystromGrid {
        self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.operators.order(0)
    }

    pub fn operators(&self) -> &OperatorSequence {
        &self.operators
    }

    /// Right-hand side of order `n`: data minus the history of orders below `n`.
    pub fn rhs(
        &self,
        n: usize,
        data: &DVector<f64>,
        densities: &DensitySet,
    ) -> Result<DVector<f64>> {
        if data.len() != self.operators.rows() {
            return Err(Error::Dimension(format!(
                "data of length {} for {} rows",
                data.len(),
                self.operators.rows()
            )));
        }
        Ok(data - self.operators.history(n, densities)?)
    }
}

/// Quantities of the field curve needed at one collocation parameter.
struct FieldPoint {
    curve: CurveId,
    s: f64,
    node: Option<usize>,
    point: CurvePoint,
    normal: Vector2<f64>,
    local: LocalMatrices,
}

/// Split of a same-curve kernel pair for one order.
#[derive(Debug, Clone, Copy)]
struct SelfSplit {
    h_log: Matrix2<f64>,
    h_smooth: Matrix2<f64>,
    h_full: Matrix2<f64>,
    q_log: Matrix2<f64>,
    q_smooth: Matrix2<f64>,
    q_full: Matrix2<f64>,
}

/// Kernel evaluation on a fixed annulus and grid.
pub struct KernelContext<'a> {
    seq: &'a FundamentalSequence,
    annulus: &'a Annulus,
    grid: NystromGrid,
    /// per order, l = 1, 2
    limits: Vec<[ZeroLimits; 2]>,
    sources: [Vec<CurvePoint>; 2],
}

impl<'a> KernelContext<'a> {
    pub fn new(
        seq: &'a FundamentalSequence,
        annulus: &'a Annulus,
        grid: NystromGrid,
    ) -> Result<Self> {
        let limits = (0..=seq.order())
            .map(|n| Ok([seq.limits_at_zero(1, n)?, seq.limits_at_zero(2, n)?]))
            .collect::<Result<Vec<_>>>()?;
        let sources = CurveId::BOTH.map(|c| {
            let curve = annulus.curve(c);
            grid.nodes().map(|s| curve.eval(s)).collect::<Vec<_>>()
        });
        for c in CurveId::BOTH {
            for s in grid.nodes() {
                annulus.curve(c).outward_normal(s)?;
            }
        }
        Ok(Self {
            seq,
            annulus,
            grid,
            limits,
            sources,
        })
    }

    pub fn grid(&self) -> NystromGrid {
        self.grid
    }

    fn orders(&self) -> usize {
        self.seq.order() + 1
    }

    fn field_point(&self, curve: CurveId, s: f64) -> Result<FieldPoint> {
        let c = self.annulus.curve(curve);
        let node = self.grid.node_index(s);
        // snap to the exact node value so that diagonal entries are recognized
        let s = node.map_or(s, |k| self.grid.node(k));
        let point = c.eval(s);
        let normal = c.outward_normal(s)?;
        let local = local_matrices(&point, &normal, self.seq.params());
        Ok(FieldPoint {
            curve,
            s,
            node,
            point,
            normal,
            local,
        })
    }

    /// Q2(s) for every order.
    fn cot_coefficients(&self, fp: &FieldPoint) -> Vec<Matrix2<f64>> {
        let speed2 = fp.point.d1.norm_squared();
        self.limits
            .iter()
            .map(|lim| {
                -(fp.local.u1_tilde * lim[0].xi_tilde + fp.local.u2_tilde * lim[1].xi)
                    / (2.0 * speed2)
            })
            .collect()
    }

    fn diagonal_split(&self, fp: &FieldPoint) -> Vec<SelfSplit> {
        let d1 = fp.point.d1;
        let speed2 = d1.norm_squared();
        let curvature = 2.0 * d1.dot(&fp.point.d2) / speed2;
        let id = Matrix2::identity();
        let l = &fp.local;
        let nan = Matrix2::from_element(f64::NAN);
        self.limits
            .iter()
            .map(|lim| {
                let eta1 = lim[0].eta;
                SelfSplit {
                    h_log: id * (0.5 * eta1),
                    h_smooth: id * (0.5 * (speed2 * E).ln() * eta1 + lim[0].xi)
                        + l.j_tilde * lim[1].xi,
                    h_full: nan,
                    q_log: Matrix2::zeros(),
                    q_smooth: -((l.u1_hat - l.u1_tilde * curvature) * lim[0].xi_tilde
                        + (l.u2_hat - l.u2_tilde * curvature) * lim[1].xi)
                        / (2.0 * speed2),
                    q_full: nan,
                }
            })
            .collect()
    }

    fn off_diagonal_split(
        &self,
        fp: &FieldPoint,
        sigma: f64,
        y: &Vector2<f64>,
        q_cot: &[Matrix2<f64>],
    ) -> Result<Vec<SelfSplit>> {
        let d = fp.point.x - y;
        let r = d.norm();
        let layers = self.seq.layer_values(r, Channels::Both)?;
        let log_excess = r.ln() - 0.5 * log_weight(fp.s, sigma);
        let cot = ((sigma - fp.s) / 2.0).cos() / ((sigma - fp.s) / 2.0).sin();
        let params = self.seq.params();
        Ok(layers
            .iter()
            .zip(q_cot)
            .map(|(v, q2)| {
                let h = fundamental_from_layers(v, &d);
                let t = traction_from_layers(v, &d, &fp.normal, params);
                SelfSplit {
                    h_log: h.log_part * 0.5,
                    h_smooth: h.log_part * log_excess + h.smooth,
                    h_full: h.full,
                    q_log: t.log_part * 0.5,
                    q_smooth: t.log_part * log_excess + t.smooth - q2 * cot,
                    q_full: t.full,
                }
            })
            .collect())
    }

    fn self_split(
        &self,
        fp: &FieldPoint,
        sigma: f64,
        y: &CurvePoint,
        q_cot: &[Matrix2<f64>],
    ) -> Result<Vec<SelfSplit>> {
        if same_parameter(fp.s, sigma) {
            Ok(self.diagonal_split(fp))
        } else {
            self.off_diagonal_split(fp, sigma, &y.x, q_cot)
        }
    }

    /// Parametrized single-layer kernel of order `n` from `source(σ)` to `field(s)`.
    ///
    /// On one curve the split is returned; `full` is NaN on the diagonal.
    pub fn kernel_h(
        &self,
        source: CurveId,
        field: CurveId,
        n: usize,
        s: f64,
        sigma: f64,
    ) -> Result<SplitMatrix> {
        self.check_order(n)?;
        let fp = self.field_point(field, s)?;
        let y = self.annulus.curve(source).eval(sigma);
        if source != field {
            let full = self.cross_full(&fp, &y.x, false)?[n];
            return Ok(smooth_only(full));
        }
        let split = self.self_split(&fp, sigma, &y, &self.cot_coefficients(&fp))?[n];
        Ok(SplitMatrix {
            full: split.h_full,
            log_part: split.h_log,
            cot_coeff: None,
            smooth: split.h_smooth,
        })
    }

    /// Parametrized traction kernel of order `n`, normal at the field point.
    pub fn kernel_q(
        &self,
        source: CurveId,
        field: CurveId,
        n: usize,
        s: f64,
        sigma: f64,
    ) -> Result<SplitMatrix> {
        self.check_order(n)?;
        let fp = self.field_point(field, s)?;
        let y = self.annulus.curve(source).eval(sigma);
        if source != field {
            let full = self.cross_full(&fp, &y.x, true)?[n];
            return Ok(smooth_only(full));
        }
        let q_cot = self.cot_coefficients(&fp);
        let split = self.self_split(&fp, sigma, &y, &q_cot)?[n];
        Ok(SplitMatrix {
            full: split.q_full,
            log_part: split.q_log,
            cot_coeff: Some(q_cot[n]),
            smooth: split.q_smooth,
        })
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n > self.seq.order() {
            return Err(Error::OrderOutOfRange {
                n,
                max: self.seq.order(),
            });
        }
        Ok(())
    }

    fn cross_full(
        &self,
        fp: &FieldPoint,
        y: &Vector2<f64>,
        traction: bool,
    ) -> Result<Vec<Matrix2<f64>>> {
        let d = fp.point.x - y;
        let layers = self.seq.layer_values(d.norm(), Channels::Full)?;
        let params = self.seq.params();
        Ok(layers
            .iter()
            .map(|v| {
                if traction {
                    traction_from_layers(v, &d, &fp.normal, params).full
                } else {
                    fundamental_from_layers(v, &d).full
                }
            })
            .collect())
    }

    /// Rows of every equation in `equations` (all on the curve of `fp`), for each order.
    fn field_rows(
        &self,
        fp: &FieldPoint,
        equations: &[Equation],
    ) -> Result<Vec<Vec<DMatrix<f64>>>> {
        let orders = self.orders();
        let m = self.grid.m();
        let n_nodes = self.grid.node_count();
        let trap = 1.0 / (2.0 * m as f64);
        let cols = self.grid.unknowns();
        let mut out = vec![vec![DMatrix::zeros(2, cols); orders]; equations.len()];
        let q_cot = self.cot_coefficients(fp);
        for src in CurveId::BOTH {
            let same = src == fp.curve;
            for (j, y) in self.sources[src.index()].iter().enumerate() {
                let col = self.grid.unknown_index(src, j, 0);
                let sigma = self.grid.node(j);
                if same {
                    let split = if fp.node == Some(j) {
                        self.diagonal_split(fp)
                    } else {
                        self.off_diagonal_split(fp, sigma, &y.x, &q_cot)?
                    };
                    let rw = weight_r(j, fp.s, m);
                    let sw = weight_s(j, fp.s, m);
                    for (e, rows) in equations.iter().zip(out.iter_mut()) {
                        for p in 0..orders {
                            let block = match e {
                                Equation::Single { .. } => {
                                    split[p].h_log * rw + split[p].h_smooth * trap
                                }
                                Equation::Traction { .. } => {
                                    split[p].q_log * rw + q_cot[p] * sw + split[p].q_smooth * trap
                                }
                            };
                            let mut view = rows[p].fixed_view_mut::<2, 2>(0, col);
                            view += block;
                        }
                    }
                } else {
                    let d = fp.point.x - y.x;
                    let layers = self.seq.layer_values(d.norm(), Channels::Full)?;
                    for (e, rows) in equations.iter().zip(out.iter_mut()) {
                        for (p, v) in layers.iter().enumerate() {
                            let block = match e {
                                Equation::Single { .. } => fundamental_from_layers(v, &d).full,
                                Equation::Traction { .. } => {
                                    traction_from_layers(v, &d, &fp.normal, self.seq.params()).full
                                }
                            } * trap;
                            let mut view = rows[p].fixed_view_mut::<2, 2>(0, col);
                            view += block;
                        }
                    }
                }
            }
        }
        for (e, rows) in equations.iter().zip(out.iter_mut()) {
            let Equation::Traction { jump, .. } = *e else {
                continue;
            };
            if jump == 0.0 {
                continue;
            }
            let factor = jump / (2.0 * fp.point.d1.norm());
            let weights: Vec<(usize, f64)> = match fp.node {
                Some(k) => vec![(k, 1.0)],
                None => (0..n_nodes)
                    .map(|k| (k, interpolation_weight(k, fp.s, m)))
                    .collect(),
            };
            for (k, w) in weights {
                let col = self.grid.unknown_index(fp.curve, k, 0);
                for block in rows.iter_mut() {
                    block[(0, col)] += factor * w;
                    block[(1, col + 1)] += factor * w;
                }
            }
        }
        Ok(out)
    }

    /// Operators of `equation` collocated at the parameters `params` of its curve.
    pub fn boundary_operator(
        &self,
        equation: Equation,
        params: &[f64],
    ) -> Result<OperatorSequence> {
        let blocks = params
            .par_iter()
            .map(|&s| {
                let fp = self.field_point(equation.curve(), s)?;
                self.field_rows(&fp, &[equation]).map(|mut v| v.remove(0))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(stack_rows(&[blocks], self.orders(), self.grid.unknowns()))
    }

    /// The collocated system of `problem` at the grid nodes.
    pub fn assemble(&self, problem: Problem) -> Result<DiscreteSystem> {
        let equations = problem.equations();
        let nodes: Vec<f64> = self.grid.nodes().collect();
        let operators = if equations[0].curve() == equations[1].curve() {
            // both row blocks share the field points and hence the layer values
            let rows = nodes
                .par_iter()
                .map(|&s| {
                    let fp = self.field_point(equations[0].curve(), s)?;
                    self.field_rows(&fp, &equations)
                })
                .collect::<Result<Vec<_>>>()?;
            let (first, second): (Vec<_>, Vec<_>) = rows
                .into_iter()
                .map(|mut r| {
                    let b = r.pop().expect("two equations");
                    let a = r.pop().expect("two equations");
                    (a, b)
                })
                .unzip();
            stack_rows(&[first, second], self.orders(), self.grid.unknowns())
        } else {
            let blocks = equations
                .iter()
                .map(|e| {
                    nodes
                        .par_iter()
                        .map(|&s| {
                            let fp = self.field_point(e.curve(), s)?;
                            self.field_rows(&fp, &[*e]).map(|mut v| v.remove(0))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            stack_rows(&blocks, self.orders(), self.grid.unknowns())
        };
        check_finite(&operators)?;
        Ok(DiscreteSystem {
            problem,
            grid: self.grid,
            operators,
        })
    }

    /// Trapezoid-rule single-layer operators at points off the boundary.
    pub fn interior_operator(&self, points: &[Vector2<f64>]) -> Result<OperatorSequence> {
        let m = self.grid.m();
        let trap = 1.0 / (2.0 * m as f64);
        let cols = self.grid.unknowns();
        let orders = self.orders();
        let blocks = points
            .par_iter()
            .map(|x| {
                let mut rows = vec![DMatrix::zeros(2, cols); orders];
                for src in CurveId::BOTH {
                    for (j, y) in self.sources[src.index()].iter().enumerate() {
                        let d = x - y.x;
                        let guard = self.grid.h() * y.d1.norm();
                        if d.norm() < guard {
                            log::warn!(
                                "evaluation point ({}, {}) is within {guard:.3e} of a boundary node; \
                                 the trapezoid rule is near-singular there",
                                x.x,
                                x.y
                            );
                        }
                        let layers = self.seq.layer_values(d.norm(), Channels::Full)?;
                        let col = self.grid.unknown_index(src, j, 0);
                        for (p, v) in layers.iter().enumerate() {
                            let block = fundamental_from_layers(v, &d).full * trap;
                            let mut view = rows[p].fixed_view_mut::<2, 2>(0, col);
                            view += block;
                        }
                    }
                }
                Ok(rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(stack_rows(&[blocks], orders, cols))
    }
}

fn smooth_only(full: Matrix2<f64>) -> SplitMatrix {
    SplitMatrix {
        full,
        log_part: Matrix2::zeros(),
        cot_coeff: None,
        smooth: full,
    }
}

/// Stacks per-point row pairs, block after block, into one matrix per order.
fn stack_rows(blocks: &[Vec<Vec<DMatrix<f64>>>], orders: usize, cols: usize) -> OperatorSequence {
    let rows: usize = blocks.iter().map(|b| 2 * b.len()).sum();
    let mut mats = vec![DMatrix::zeros(rows, cols); orders];
    let mut r = 0;
    for block in blocks {
        for point in block {
            for (p, m) in mats.iter_mut().enumerate() {
                m.rows_mut(r, 2).copy_from(&point[p]);
            }
            r += 2;
        }
    }
    OperatorSequence { orders: mats }
}

fn check_finite(ops: &OperatorSequence) -> Result<()> {
    for (p, m) in ops.orders.iter().enumerate() {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                order: p,
                what: "collocation matrix".into(),
            });
        }
    }
    Ok(())
}

/// Collocated Cauchy system: values and tractions on the outer curve.
pub fn assemble_cauchy(ctx: &KernelContext<'_>) -> Result<DiscreteSystem> {
    ctx.assemble(Problem::Cauchy)
}

/// Collocated traction system on both curves.
pub fn assemble_direct_neumann(ctx: &KernelContext<'_>) -> Result<DiscreteSystem> {
    ctx.assemble(Problem::Neumann)
}

/// Collocated value system on both curves.
pub fn assemble_direct_dirichlet(ctx: &KernelContext<'_>) -> Result<DiscreteSystem> {
    ctx.assemble(Problem::Dirichlet)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_rule_is_exact_on_trigonometric_polynomials() {
        let m = 8;
        for i in 0..2 * m {
            let s = i as f64 * PI / m as f64;
            let total: f64 = (0..2 * m).map(|k| weight_r(k, s, m)).sum();
            assert!((total + 1.0).abs() < 1e-12);
            for deg in 1..=m {
                let got: f64 = (0..2 * m)
                    .map(|k| weight_r(k, s, m) * (deg as f64 * k as f64 * PI / m as f64).cos())
                    .sum();
                let want = -(deg as f64 * s).cos() / deg as f64;
                assert!(
                    (got - want).abs() < 1e-12,
                    "deg {deg} node {i}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn cot_rule_maps_to_conjugate_functions() {
        let m = 8;
        for i in 0..2 * m {
            let s = i as f64 * PI / m as f64;
            let total: f64 = (0..2 * m).map(|k| weight_s(k, s, m)).sum();
            assert!(total.abs() < 1e-12);
            for deg in 1..m {
                let d = deg as f64;
                let node = |k: usize| k as f64 * PI / m as f64;
                let cos: f64 = (0..2 * m)
                    .map(|k| weight_s(k, s, m) * (d * node(k)).cos())
                    .sum();
                let sin: f64 = (0..2 * m)
                    .map(|k| weight_s(k, s, m) * (d * node(k)).sin())
                    .sum();
                assert!(
                    (cos + (d * s).sin()).abs() < 1e-12,
                    "cos deg {deg} node {i}"
                );
                assert!(
                    (sin - (d * s).cos()).abs() < 1e-12,
                    "sin deg {deg} node {i}"
                );
            }
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_low_modes() {
        let m = 6;
        for k in 0..2 * m {
            let s = k as f64 * PI / m as f64;
            for j in 0..2 * m {
                let w = interpolation_weight(j, s, m);
                assert!((w - if j == k { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        let s = 0.37;
        let got: f64 = (0..2 * m)
            .map(|k| interpolation_weight(k, s, m) * (3.0 * k as f64 * PI / m as f64).sin())
            .sum();
        assert!((got - (3.0 * s).sin()).abs() < 1e-13);
    }

    #[test]
    fn grid_recognizes_nodes() {
        let g = NystromGrid::new(16).unwrap();
        assert_eq!(g.node_index(g.node(5)), Some(5));
        assert_eq!(g.node_index(TAU + g.node(3)), Some(3));
        assert_eq!(g.node_index(0.1), None);
        assert_eq!(g.unknown_index(CurveId::Outer, 2, 1), 64 + 5);
        assert!(NystromGrid::new(1).is_err());
    }
}
