//! Experiment pipelines behind `run` and `sweep`.

use elastocauchy::cauchy_solver::{
    apply_sequence, curve_samples, gamma1_traction, gamma2_traction, point_source_tractions,
    point_source_values, relative_l2_error, solve_sequence_direct, solve_sequence_tikhonov,
    stack_blocks, synthesize_field, time_samples, transient_error, CurveSamples, Gamma1Evaluator,
    NoiseSource, NoiseSpec, TikhonovConfig, TikhonovSolver,
};
use elastocauchy::fundamental::FundamentalSequence;
use elastocauchy::geometry::{Annulus, CurveId};
use elastocauchy::laguerre::test_signal_coeffs;
use elastocauchy::nystrom::{
    assemble_cauchy, assemble_direct_dirichlet, assemble_direct_neumann, DensitySet,
    DiscreteSystem, KernelContext, NystromGrid, OperatorSequence,
};
use nalgebra::Vector2;

use crate::config::{ExperimentConfig, ExperimentKind, TransientData};
use crate::error::CliError;

type Field = Vec<Vec<Vector2<f64>>>;

/// One CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub n_or_t: f64,
    pub m: usize,
    pub kappa: f64,
    pub alpha: f64,
    pub delta: f64,
    pub seed: u64,
    pub component: String,
    pub computed: f64,
    pub exact: Option<f64>,
    pub error: Option<f64>,
}

/// An error measure for convergence data.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    pub label: String,
    pub n_or_t: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<ErrorSample>,
}

impl Report {
    pub fn row(&self, component: &str, n_or_t: f64) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.component == component && r.n_or_t == n_or_t)
    }

    pub fn error(&self, label: &str, n_or_t: f64) -> Option<f64> {
        self.errors
            .iter()
            .find(|e| e.label == label && e.n_or_t == n_or_t)
            .map(|e| e.error)
    }
}

struct RowWriter<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    report: Report,
}

impl<'a> RowWriter<'a> {
    fn new(cfg: &'a ExperimentConfig, seed: u64) -> Self {
        Self {
            cfg,
            seed,
            report: Report::default(),
        }
    }

    fn scalar(
        &mut self,
        n_or_t: f64,
        component: String,
        computed: f64,
        exact: Option<f64>,
    ) -> Result<(), CliError> {
        if !computed.is_finite() {
            return Err(CliError::Numerical(elastocauchy::Error::Numerical(
                format!("non-finite {component} at {n_or_t}"),
            )));
        }
        self.report.rows.push(ResultRow {
            experiment: self.cfg.id.clone(),
            n_or_t,
            m: self.cfg.m,
            kappa: self.cfg.material.kappa,
            alpha: self.cfg.alpha,
            delta: self.cfg.delta,
            seed: self.seed,
            component,
            computed,
            exact,
            error: exact.map(|e| (computed - e).abs()),
        });
        Ok(())
    }

    /// Rows for the configured components of a field sampled at several locations.
    fn vectors(
        &mut self,
        n_or_t: f64,
        field: &str,
        computed: &[Vector2<f64>],
        exact: Option<&[Vector2<f64>]>,
    ) -> Result<(), CliError> {
        let components = self.cfg.components.clone();
        for (i, value) in computed.iter().enumerate() {
            for &c in &components {
                let name = if computed.len() == 1 {
                    format!("{field}.{c}")
                } else {
                    format!("{field}[{i}].{c}")
                };
                let exact = exact.map(|e| e[i][c - 1]);
                self.scalar(n_or_t, name, value[c - 1], exact)?;
            }
        }
        Ok(())
    }

    fn error(&mut self, label: &str, n_or_t: f64, error: f64) -> Result<(), CliError> {
        self.scalar(n_or_t, label.to_string(), error, None)?;
        self.report.errors.push(ErrorSample {
            label: label.to_string(),
            n_or_t,
            error,
        });
        Ok(())
    }

    fn finish(self) -> Report {
        self.report
    }
}

/// Euclidean norm of the pointwise differences.
fn l2_difference(a: &[Vector2<f64>], b: &[Vector2<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_squared())
        .sum::<f64>()
        .sqrt()
}

fn inner_normals_into_hole(annulus: &Annulus, params: &[f64]) -> Result<CurveSamples, CliError> {
    let (points, normals) = curve_samples(annulus, CurveId::Inner, params)?;
    Ok((points, normals.into_iter().map(|v| -v).collect()))
}

/// Assembled and factorized Cauchy system with outer-curve data, reusable across seeds.
struct CauchyCore {
    system: DiscreteSystem,
    solver: TikhonovSolver,
    f2: Field,
    g2: Field,
    /// Inner-curve parameters: the grid nodes followed by the reported parameters.
    gamma1: Gamma1Evaluator,
    interior: OperatorSequence,
}

impl CauchyCore {
    fn new(
        ctx: &KernelContext<'_>,
        f2: Field,
        g2: Field,
        boundary_params: &[f64],
        eval_points: &[Vector2<f64>],
    ) -> Result<Self, CliError> {
        let system = assemble_cauchy(ctx)?;
        let solver = TikhonovSolver::new(system.matrix())?;
        log::info!(
            "Cauchy system {}x{}, condition number {:.3e}",
            system.matrix().nrows(),
            system.matrix().ncols(),
            solver.condition_number()
        );
        let params = with_nodes(ctx.grid(), boundary_params);
        Ok(Self {
            gamma1: Gamma1Evaluator::new(ctx, &params)?,
            interior: ctx.interior_operator(eval_points)?,
            system,
            solver,
            f2,
            g2,
        })
    }

    /// Noise is added to the traction data, order by order, from one seeded stream.
    fn densities(&self, alpha: f64, delta: f64, seed: u64) -> Result<DensitySet, CliError> {
        let mut noise = NoiseSource::new(NoiseSpec::new(delta, seed)?);
        let data = self
            .f2
            .iter()
            .zip(&self.g2)
            .map(|(f, g)| Ok(stack_blocks(&[f, &noise.perturb_field(g)?])))
            .collect::<Result<Vec<_>, elastocauchy::Error>>()?;
        Ok(solve_sequence_tikhonov(
            &self.system,
            &self.solver,
            &data,
            &TikhonovConfig::new(alpha)?,
        )?)
    }
}

fn with_nodes(grid: NystromGrid, extra: &[f64]) -> Vec<f64> {
    grid.nodes().chain(extra.iter().copied()).collect()
}

/// Splits `[n][nodes ++ extra]` into the node part and the extra part.
fn split_nodes(field: Field, nodes: usize) -> (Field, Field) {
    field
        .into_iter()
        .map(|mut row| {
            let extra = row.split_off(nodes);
            (row, extra)
        })
        .unzip()
}

struct DirectRun {
    computed: Field,
    exact: Field,
}

struct PointSourceCauchy {
    core: CauchyCore,
    nodes: usize,
    f1_exact: Field,
    g1_exact: Field,
    u_exact: Field,
    kappa: f64,
    time_grid: Option<Vec<f64>>,
}

struct DirichletTransient {
    core: CauchyCore,
    nodes: usize,
    coeffs: Vec<f64>,
    reference: Vec<f64>,
    g1_exact: Field,
    kappa: f64,
    time_grid: Vec<f64>,
}

enum Pipeline {
    Direct(DirectRun),
    PointSource(PointSourceCauchy),
    Dirichlet(DirichletTransient),
}

/// An experiment with all seed-independent work done.
pub struct Prepared {
    cfg: ExperimentConfig,
    pipeline: Pipeline,
}

/// Validates the config and runs everything that does not depend on the noise seed.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, CliError> {
    cfg.validate()?;
    let params = cfg.params()?;
    let annulus = cfg.annulus()?;
    let seq = FundamentalSequence::new(params, cfg.max_order())?;
    let grid = NystromGrid::new(cfg.m)?;
    let pipeline = match cfg.experiment {
        ExperimentKind::DirectDirichletExact | ExperimentKind::DirectNeumannExact => {
            Pipeline::Direct(prepare_direct(cfg, &seq, &annulus, grid)?)
        }
        ExperimentKind::CauchyStationary => {
            Pipeline::PointSource(prepare_point_source(cfg, &seq, &annulus, grid, None)?)
        }
        ExperimentKind::CauchyTransient => {
            let tr = cfg.transient()?;
            let time_grid = time_samples(tr.t_end, tr.dt)?;
            match tr.data {
                TransientData::PointSource => Pipeline::PointSource(prepare_point_source(
                    cfg,
                    &seq,
                    &annulus,
                    grid,
                    Some(time_grid),
                )?),
                TransientData::DirichletDirect => {
                    Pipeline::Dirichlet(prepare_dirichlet(cfg, &seq, &annulus, grid, time_grid)?)
                }
            }
        }
    };
    Ok(Prepared {
        cfg: cfg.clone(),
        pipeline,
    })
}

/// Runs a config with its own seed.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    prepare(cfg)?.execute(cfg.seed)
}

fn prepare_direct(
    cfg: &ExperimentConfig,
    seq: &FundamentalSequence,
    annulus: &Annulus,
    grid: NystromGrid,
) -> Result<DirectRun, CliError> {
    let z = cfg.source()?;
    let ctx = KernelContext::new(seq, annulus, grid)?;
    let nodes: Vec<f64> = grid.nodes().collect();
    let (inner_pts, inner_nu) = curve_samples(annulus, CurveId::Inner, &nodes)?;
    let (outer_pts, outer_nu) = curve_samples(annulus, CurveId::Outer, &nodes)?;
    let (system, inner, outer) = if cfg.experiment == ExperimentKind::DirectNeumannExact {
        (
            assemble_direct_neumann(&ctx)?,
            point_source_tractions(seq, &inner_pts, &inner_nu, &z)?,
            point_source_tractions(seq, &outer_pts, &outer_nu, &z)?,
        )
    } else {
        (
            assemble_direct_dirichlet(&ctx)?,
            point_source_values(seq, &inner_pts, &z)?,
            point_source_values(seq, &outer_pts, &z)?,
        )
    };
    let data: Vec<_> = inner
        .iter()
        .zip(&outer)
        .map(|(a, b)| stack_blocks(&[a, b]))
        .collect();
    let densities = solve_sequence_direct(&system, &data)?;
    let points = cfg.eval_points();
    Ok(DirectRun {
        computed: apply_sequence(&ctx.interior_operator(&points)?, &densities)?,
        exact: point_source_values(seq, &points, &z)?,
    })
}

fn prepare_point_source(
    cfg: &ExperimentConfig,
    seq: &FundamentalSequence,
    annulus: &Annulus,
    grid: NystromGrid,
    time_grid: Option<Vec<f64>>,
) -> Result<PointSourceCauchy, CliError> {
    let z = cfg.source()?;
    let ctx = KernelContext::new(seq, annulus, grid)?;
    let nodes: Vec<f64> = grid.nodes().collect();
    let (outer_pts, outer_nu) = curve_samples(annulus, CurveId::Outer, &nodes)?;
    let f2 = point_source_values(seq, &outer_pts, &z)?;
    let g2 = point_source_tractions(seq, &outer_pts, &outer_nu, &z)?;
    let points = cfg.eval_points();
    let core = CauchyCore::new(&ctx, f2, g2, &cfg.boundary_params, &points)?;
    let params = with_nodes(grid, &cfg.boundary_params);
    let (inner_pts, into_hole) = inner_normals_into_hole(annulus, &params)?;
    Ok(PointSourceCauchy {
        core,
        nodes: nodes.len(),
        f1_exact: point_source_values(seq, &inner_pts, &z)?,
        g1_exact: point_source_tractions(seq, &inner_pts, &into_hole, &z)?,
        u_exact: point_source_values(seq, &points, &z)?,
        kappa: cfg.material.kappa,
        time_grid,
    })
}

fn prepare_dirichlet(
    cfg: &ExperimentConfig,
    seq: &FundamentalSequence,
    annulus: &Annulus,
    grid: NystromGrid,
    time_grid: Vec<f64>,
) -> Result<DirichletTransient, CliError> {
    let tr = cfg.transient()?;
    let kappa = cfg.material.kappa;
    let coeffs = test_signal_coeffs(cfg.n, kappa)?;

    let data_grid = NystromGrid::new(tr.data_m.unwrap_or(cfg.m))?;
    let data_ctx = KernelContext::new(seq, annulus, data_grid)?;
    let data_system = assemble_direct_dirichlet(&data_ctx)?;
    let count = data_grid.node_count();
    let data: Vec<_> = coeffs
        .iter()
        .map(|&c| {
            let inner = vec![Vector2::new(c, c); count];
            let outer = vec![Vector2::zeros(); count];
            stack_blocks(&[&inner, &outer])
        })
        .collect();
    let direct = solve_sequence_direct(&data_system, &data)?;

    let nodes: Vec<f64> = grid.nodes().collect();
    let g2 = gamma2_traction(&data_ctx, &direct, &nodes)?;
    let f2 = vec![vec![Vector2::zeros(); nodes.len()]; coeffs.len()];
    let params = with_nodes(grid, &cfg.boundary_params);
    let g1_exact = gamma1_traction(&data_ctx, &direct, &params)?;

    let ctx = KernelContext::new(seq, annulus, grid)?;
    let core = CauchyCore::new(&ctx, f2, g2, &cfg.boundary_params, &cfg.eval_points())?;
    Ok(DirichletTransient {
        core,
        nodes: nodes.len(),
        coeffs,
        reference: test_signal_coeffs(tr.reference_terms, kappa)?,
        g1_exact,
        kappa,
        time_grid,
    })
}

impl Prepared {
    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    /// Solves with the given noise seed and collects rows and error measures.
    pub fn execute(&self, seed: u64) -> Result<Report, CliError> {
        let mut out = RowWriter::new(&self.cfg, seed);
        match &self.pipeline {
            Pipeline::Direct(run) => direct_rows(&mut out, run)?,
            Pipeline::PointSource(run) => self.point_source_rows(&mut out, run, seed)?,
            Pipeline::Dirichlet(run) => self.dirichlet_rows(&mut out, run, seed)?,
        }
        Ok(out.finish())
    }

    fn point_source_rows(
        &self,
        out: &mut RowWriter<'_>,
        run: &PointSourceCauchy,
        seed: u64,
    ) -> Result<(), CliError> {
        let cfg = &self.cfg;
        let dens = run.core.densities(cfg.alpha, cfg.delta, seed)?;
        let (f1, f1_params) = split_nodes(run.core.gamma1.trace(&dens)?, run.nodes);
        let (g1, g1_params) = split_nodes(run.core.gamma1.traction(&dens)?, run.nodes);
        let (f1_exact, f1_exact_params) = split_nodes(run.f1_exact.clone(), run.nodes);
        let (g1_exact, g1_exact_params) = split_nodes(run.g1_exact.clone(), run.nodes);
        let u = apply_sequence(&run.core.interior, &dens)?;
        for n in 0..dens.orders() {
            let t = n as f64;
            out.vectors(t, "u", &u[n], Some(&run.u_exact[n]))?;
            out.vectors(t, "f1", &f1_params[n], Some(&f1_exact_params[n]))?;
            out.vectors(t, "g1", &g1_params[n], Some(&g1_exact_params[n]))?;
            out.error("e_f", t, relative_l2_error(&f1[n], &f1_exact[n])?)?;
            out.error("e_g", t, relative_l2_error(&g1[n], &g1_exact[n])?)?;
            if !u[n].is_empty() {
                out.error("u", t, l2_difference(&u[n], &run.u_exact[n]))?;
            }
        }
        if let Some(time_grid) = &run.time_grid {
            for &t in &cfg.times {
                let computed = synthesize_field(&u, run.kappa, t);
                let exact = synthesize_field(&run.u_exact, run.kappa, t);
                out.vectors(t, "u(t)", &computed, Some(&exact))?;
                out.error("u(t)", t, l2_difference(&computed, &exact))?;
            }
            if !u[0].is_empty() {
                let (computed, exact): (Field, Field) = time_grid
                    .iter()
                    .map(|&t| {
                        (
                            synthesize_field(&u, run.kappa, t),
                            synthesize_field(&run.u_exact, run.kappa, t),
                        )
                    })
                    .unzip();
                let t_end = *time_grid.last().unwrap_or(&0.0);
                out.error("e", t_end, transient_error(&computed, &exact)?)?;
            }
        }
        Ok(())
    }

    fn dirichlet_rows(
        &self,
        out: &mut RowWriter<'_>,
        run: &DirichletTransient,
        seed: u64,
    ) -> Result<(), CliError> {
        let cfg = &self.cfg;
        let dens = run.core.densities(cfg.alpha, cfg.delta, seed)?;
        let (f1, f1_params) = split_nodes(run.core.gamma1.trace(&dens)?, run.nodes);
        let (g1, g1_params) = split_nodes(run.core.gamma1.traction(&dens)?, run.nodes);
        let (g1_exact, g1_exact_params) = split_nodes(run.g1_exact.clone(), run.nodes);
        let constant = |c: f64, len: usize| vec![Vector2::new(c, c); len];
        for (n, &c) in run.coeffs.iter().enumerate() {
            let t = n as f64;
            out.vectors(
                t,
                "f1",
                &f1_params[n],
                Some(&constant(c, f1_params[n].len())),
            )?;
            out.vectors(t, "g1", &g1_params[n], Some(&g1_exact_params[n]))?;
            out.error(
                "e_f",
                t,
                relative_l2_error(&f1[n], &constant(c, run.nodes))?,
            )?;
            out.error("e_g", t, relative_l2_error(&g1[n], &g1_exact[n])?)?;
        }
        let reference =
            |len: usize| -> Field { run.reference.iter().map(|&c| constant(c, len)).collect() };
        let ref_params = reference(cfg.boundary_params.len());
        for &t in &cfg.times {
            let computed = synthesize_field(&f1_params, run.kappa, t);
            let exact = synthesize_field(&ref_params, run.kappa, t);
            out.vectors(t, "f1(t)", &computed, Some(&exact))?;
        }
        let ref_nodes = reference(run.nodes);
        let (computed, exact): (Field, Field) = run
            .time_grid
            .iter()
            .map(|&t| {
                (
                    synthesize_field(&f1, run.kappa, t),
                    synthesize_field(&ref_nodes, run.kappa, t),
                )
            })
            .unzip();
        let t_end = *run.time_grid.last().unwrap_or(&0.0);
        out.error("e", t_end, transient_error(&computed, &exact)?)?;
        Ok(())
    }
}

fn direct_rows(out: &mut RowWriter<'_>, run: &DirectRun) -> Result<(), CliError> {
    for (n, (u, e)) in run.computed.iter().zip(&run.exact).enumerate() {
        let t = n as f64;
        out.vectors(t, "u", u, Some(e))?;
        out.error("u", t, l2_difference(u, e))?;
    }
    Ok(())
}

/// Runs the experiment once per grid size, all else fixed.
pub fn sweep(cfg: &ExperimentConfig, m_list: &[usize]) -> Result<Vec<Report>, CliError> {
    if m_list.is_empty() {
        return Err(CliError::Config {
            field: "M".into(),
            message: "sweep needs at least one grid size".into(),
        });
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config {
            field: "M".into(),
            message: "sweep grid sizes must be strictly ascending".into(),
        });
    }
    let configs: Vec<_> = m_list
        .iter()
        .map(|&m| {
            let mut c = cfg.clone();
            c.m = m;
            c.validate().map(|_| c)
        })
        .collect::<Result<_, _>>()?;
    configs.iter().map(run).collect()
}
