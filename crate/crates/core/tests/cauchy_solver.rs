use elastocauchy::cauchy_solver::{
    add_noise, curve_samples, errors_stationary, gamma1_trace, interior_eval,
    point_source_tractions, point_source_values, relative_l2_error, solve_sequence_direct,
    stack_blocks, synthesize_field, tikhonov_solve, time_samples, transient_error, NoiseSource,
    NoiseSpec, TikhonovConfig, TikhonovSolver,
};
use elastocauchy::fundamental::FundamentalSequence;
use elastocauchy::geometry::{
    Annulus, CurveId, CurveSpec, MaterialParams, ParametricCurve, TrigPolynomial,
};
use elastocauchy::laguerre::LaguerreSeries;
use elastocauchy::nystrom::{
    assemble_direct_dirichlet, assemble_direct_neumann, DensitySet, KernelContext, NystromGrid,
};
use nalgebra::{DMatrix, DVector, Vector2};
use proptest::prelude::*;

/// Deterministic, well-spread test matrix.
fn matrix(rows: usize, cols: usize, shift: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| {
        ((i * 7 + j * 13) as f64 * 0.37 + shift).sin() + if i == j { 2.0 } else { 0.0 }
    })
}

fn kite_annulus() -> Annulus {
    Annulus::new(
        ParametricCurve::kite(),
        ParametricCurve::circle([0.0, 0.0], 2.0).unwrap(),
        64,
    )
    .unwrap()
}

fn point_source_data(
    seq: &FundamentalSequence,
    annulus: &Annulus,
    grid: NystromGrid,
    source: &Vector2<f64>,
    traction: bool,
) -> Vec<DVector<f64>> {
    let nodes: Vec<f64> = grid.nodes().collect();
    let per_curve: Vec<_> = CurveId::BOTH
        .iter()
        .map(|&c| {
            let (pts, nu) = curve_samples(annulus, c, &nodes).unwrap();
            if traction {
                point_source_tractions(seq, &pts, &nu, source).unwrap()
            } else {
                point_source_values(seq, &pts, source).unwrap()
            }
        })
        .collect();
    (0..=seq.order())
        .map(|n| stack_blocks(&[&per_curve[0][n], &per_curve[1][n]]))
        .collect()
}

#[test]
fn tikhonov_without_regularization_matches_lu() {
    let a = matrix(6, 6, 0.2);
    let b = DVector::from_fn(6, |i, _| (i as f64).cos());
    let x = tikhonov_solve(&a, &b, &TikhonovConfig::new(0.0).unwrap()).unwrap();
    let lu = a.clone().lu().solve(&b).unwrap();
    assert!((x.x - lu).norm() < 1e-10);
    assert!(x.residual_norm < 1e-12);
    assert!(!x.rank_deficient);
}

#[test]
fn tikhonov_solves_the_regularized_normal_equations() {
    let a = matrix(10, 8, 1.3);
    let b = DVector::from_fn(10, |i, _| 1.0 / (i as f64 + 1.0));
    let alpha = 1e-3;
    let x = tikhonov_solve(&a, &b, &TikhonovConfig::new(alpha).unwrap())
        .unwrap()
        .x;
    let lhs = a.transpose() * &a + DMatrix::identity(8, 8) * alpha;
    let expected = lhs.lu().solve(&(a.transpose() * &b)).unwrap();
    assert!((x - expected).norm() < 1e-10);
}

#[test]
fn tikhonov_norm_decreases_with_alpha() {
    let a = matrix(12, 12, -0.4);
    let solver = TikhonovSolver::new(&a).unwrap();
    let b = DVector::from_fn(12, |i, _| (0.3 * i as f64).sin());
    let norms: Vec<f64> = [1e-8, 1e-6, 1e-4, 1e-2, 1.0]
        .iter()
        .map(|&alpha| {
            solver
                .solve(&b, &TikhonovConfig::new(alpha).unwrap())
                .unwrap()
                .x
                .norm()
        })
        .collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
}

#[test]
fn tikhonov_rejects_bad_input() {
    assert!(TikhonovConfig::new(-1.0).is_err());
    assert!(TikhonovSolver::new(&matrix(3, 5, 0.0)).is_err());
    let solver = TikhonovSolver::new(&matrix(4, 4, 0.0)).unwrap();
    assert!(solver
        .solve(&DVector::zeros(3), &TikhonovConfig::new(0.0).unwrap())
        .is_err());
}

#[test]
fn rank_deficiency_is_reported() {
    let mut a = matrix(5, 5, 0.9);
    let first = a.column(0).into_owned();
    a.set_column(4, &first);
    let b = DVector::from_element(5, 1.0);
    assert!(
        tikhonov_solve(&a, &b, &TikhonovConfig::new(0.0).unwrap())
            .unwrap()
            .rank_deficient
    );
}

#[test]
fn noise_has_the_prescribed_relative_size() {
    let g: Vec<f64> = (0..64).map(|i| (0.1 * i as f64).sin() + 0.2).collect();
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    for seed in 0..5 {
        let noisy = add_noise(&g, NoiseSpec::new(0.03, seed).unwrap()).unwrap();
        let diff = g
            .iter()
            .zip(&noisy)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((diff - 0.03 * norm).abs() < 1e-14 * norm, "seed {seed}");
    }
    assert_eq!(add_noise(&g, NoiseSpec::new(0.0, 3).unwrap()).unwrap(), g);
    assert!(NoiseSpec::new(-0.1, 0).is_err());
}

#[test]
fn noise_is_reproducible_per_seed() {
    let g = vec![1.0, -2.0, 0.5, 3.0];
    let spec = NoiseSpec::new(0.1, 42).unwrap();
    assert_eq!(add_noise(&g, spec).unwrap(), add_noise(&g, spec).unwrap());
    assert_ne!(
        add_noise(&g, spec).unwrap(),
        add_noise(&g, NoiseSpec::new(0.1, 43).unwrap()).unwrap()
    );
    // one stream continues across calls
    let mut source = NoiseSource::new(spec);
    let first = source.perturb(&g).unwrap();
    let second = source.perturb(&g).unwrap();
    assert_ne!(first, second);
    assert_eq!(first, add_noise(&g, spec).unwrap());
}

#[test]
fn history_is_linear_in_the_densities() {
    let annulus = kite_annulus();
    let seq =
        FundamentalSequence::new(MaterialParams::new(2.0, 1.0, 1.0, 1.0).unwrap(), 3).unwrap();
    let grid = NystromGrid::new(8).unwrap();
    let ctx = KernelContext::new(&seq, &annulus, grid).unwrap();
    let sys = assemble_direct_dirichlet(&ctx).unwrap();
    let mut dens = DensitySet::new(grid);
    for n in 0..4 {
        dens.push(DVector::from_fn(grid.unknowns(), |i, _| {
            ((i + 3 * n) as f64 * 0.21).cos()
        }))
        .unwrap();
    }
    let scaled = dens.scaled(3.0);
    for n in 1..4 {
        let a = sys.operators().history(n, &dens).unwrap();
        let b = sys.operators().history(n, &scaled).unwrap();
        assert!((b - a * 3.0).norm() < 1e-12 * (1.0 + sys.operators().order(1).norm()));
    }
    let zero = DensitySet::new(grid);
    assert!(dens.push(DVector::zeros(3)).is_err());
    let points = [Vector2::new(1.2, 1.1)];
    let mut zeros = zero.clone();
    zeros.push(DVector::zeros(grid.unknowns())).unwrap();
    let u = interior_eval(&ctx, &zeros, &points).unwrap();
    assert_eq!(u[0][0], Vector2::zeros());
}

#[test]
fn dirichlet_densities_reproduce_the_data_at_the_nodes() {
    let annulus = kite_annulus();
    let seq =
        FundamentalSequence::new(MaterialParams::new(2.0, 1.0, 1.0, 1.0).unwrap(), 2).unwrap();
    let grid = NystromGrid::new(16).unwrap();
    let ctx = KernelContext::new(&seq, &annulus, grid).unwrap();
    let source = Vector2::new(0.1, 0.05);
    let data = point_source_data(&seq, &annulus, grid, &source, false);
    let dens = solve_sequence_direct(&assemble_direct_dirichlet(&ctx).unwrap(), &data).unwrap();
    let nodes: Vec<f64> = grid.nodes().collect();
    let trace = gamma1_trace(&ctx, &dens, &nodes).unwrap();
    for n in 0..=2 {
        let expected = &data[n].as_slice()[..2 * nodes.len()];
        let got: Vec<f64> = trace[n].iter().flat_map(|v| [v.x, v.y]).collect();
        let err = got
            .iter()
            .zip(expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-11, "n={n}: {err}");
    }
}

#[test]
fn neumann_solution_matches_the_point_source() {
    // rational radial inner curve inside the unit circle
    let inner = ParametricCurve::new(CurveSpec::Radial {
        numerator: TrigPolynomial {
            constant: 0.9,
            cos: vec![0.6],
            sin: vec![0.0, -0.2],
        },
        denominator: TrigPolynomial {
            constant: 2.0,
            cos: vec![1.4],
            sin: vec![],
        },
    })
    .unwrap();
    let annulus =
        Annulus::new(inner, ParametricCurve::circle([0.0, 0.0], 1.0).unwrap(), 64).unwrap();
    let seq =
        FundamentalSequence::new(MaterialParams::new(2.0, 1.0, 1.0, 1.0).unwrap(), 2).unwrap();
    let grid = NystromGrid::new(64).unwrap();
    let ctx = KernelContext::new(&seq, &annulus, grid).unwrap();
    let source = Vector2::new(1.5, 1.5);
    let data = point_source_data(&seq, &annulus, grid, &source, true);
    let dens = solve_sequence_direct(&assemble_direct_neumann(&ctx).unwrap(), &data).unwrap();
    let z = [Vector2::new(0.5, 0.6)];
    let u = interior_eval(&ctx, &dens, &z).unwrap();
    let exact = point_source_values(&seq, &z, &source).unwrap();
    assert!((u[0][0].y - 0.109244013821).abs() < 2e-9, "{}", u[0][0].y);
    for n in 0..=2 {
        assert!((u[n][0] - exact[n][0]).norm() < 1e-9, "n={n}");
    }
}

#[test]
fn error_functionals() {
    let f: Vec<Vector2<f64>> = (0..8).map(|i| Vector2::new(i as f64, 1.0)).collect();
    assert_eq!(relative_l2_error(&f, &f).unwrap(), 0.0);
    let (ef, eg) = errors_stationary(&f, &f, &f, &f).unwrap();
    assert_eq!((ef, eg), (0.0, 0.0));
    let g: Vec<_> = f.iter().map(|v| v * 1.1).collect();
    assert!((relative_l2_error(&g, &f).unwrap() - 0.1).abs() < 1e-14);
    let zeros = vec![Vector2::zeros(); 8];
    assert!(relative_l2_error(&f, &zeros).is_err());
    assert!(relative_l2_error(&f[..3], &f).is_err());
    let series = vec![f.clone(), f.clone()];
    assert_eq!(transient_error(&series, &series).unwrap(), 0.0);
}

#[test]
fn time_grid() {
    let t = time_samples(3.0, 0.2).unwrap();
    assert_eq!(t.len(), 16);
    assert!((t[15] - 3.0).abs() < 1e-12);
    assert!(time_samples(3.0, 0.7).is_err());
    assert!(time_samples(3.0, 0.0).is_err());
}

proptest! {
    #[test]
    fn relative_error_is_scale_invariant(c in 0.1f64..10.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let exact: Vec<_> = (0..6).map(|i| Vector2::new(1.0 + i as f64, a)).collect();
        let computed: Vec<_> = exact.iter().map(|v| v + Vector2::new(b, 0.5)).collect();
        let scaled_c: Vec<_> = computed.iter().map(|v| v * c).collect();
        let scaled_e: Vec<_> = exact.iter().map(|v| v * c).collect();
        let e1 = relative_l2_error(&computed, &exact).unwrap();
        let e2 = relative_l2_error(&scaled_c, &scaled_e).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(1.0));
    }

    #[test]
    fn field_synthesis_matches_scalar_series(t in 0.0f64..5.0, kappa in 0.3f64..2.0) {
        let coeffs: Vec<Vec<Vector2<f64>>> = (0..6)
            .map(|n| vec![Vector2::new(1.0 / (n as f64 + 1.0), (n as f64).sin())])
            .collect();
        let field = synthesize_field(&coeffs, kappa, t);
        let first = LaguerreSeries::new(kappa, coeffs.iter().map(|c| c[0].x).collect()).unwrap();
        let second = LaguerreSeries::new(kappa, coeffs.iter().map(|c| c[0].y).collect()).unwrap();
        prop_assert!((field[0].x - first.synthesize(t)).abs() < 1e-12);
        prop_assert!((field[0].y - second.synthesize(t)).abs() < 1e-12);
    }
}
