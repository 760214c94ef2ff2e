use elastocauchy::fundamental::{
    build_coefficient_table, eval_polys, phi, phi_tilde, Channels, CoefficientTable,
    FundamentalSequence,
};
use elastocauchy::geometry::MaterialParams;
use elastocauchy::special_functions::{bessel_k, bessel_k01, BesselOrder};
use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;

fn params(lambda: f64, mu: f64, kappa: f64) -> MaterialParams {
    MaterialParams::new(lambda, mu, 1.0, kappa).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn coefficient_table_examples() {
    let t = CoefficientTable::build(0, 2.0).unwrap();
    assert_eq!(t.n_max(), 2);
    assert_eq!(t.get(1, 1), -2.0);
    assert!((t.get(2, 2) - 2.0).abs() < 1e-15);
    assert!((t.get(2, 1) + 3.0).abs() < 1e-15);
    for n in 0..=2 {
        assert_eq!(t.get(n, 0), 1.0);
    }
    assert!(CoefficientTable::build(3, 0.0).is_err());
}

#[test]
fn coefficient_recurrence_resubstitution() {
    for gamma in [0.5, 1.0, 2.0] {
        let t = CoefficientTable::build(20, gamma).unwrap();
        assert_eq!(t.n_max(), 22);
        for n in 1..=22 {
            assert_eq!(t.get(n, n), -(gamma / n as f64) * t.get(n - 1, n - 1));
            for m in 1..n {
                let half = m.div_ceil(2) as f64;
                let lead = 4.0 * half * half * t.get(n, m + 1);
                let terms: Vec<f64> = (m - 1..n)
                    .map(|k| gamma * gamma * (n - k + 1) as f64 * t.get(k, m - 1))
                    .collect();
                let rhs = (lead - terms.iter().sum::<f64>()) / (2.0 * gamma * m as f64);
                let scale = terms.iter().map(|x| x.abs()).fold(lead.abs(), f64::max)
                    / (2.0 * gamma * m as f64);
                assert!(
                    (t.get(n, m) - rhs).abs() <= 1e-13 * scale.max(t.get(n, m).abs()),
                    "gamma={gamma} n={n} m={m}"
                );
            }
        }
    }
}

#[test]
fn coefficient_cache_shares_tables() {
    let a = build_coefficient_table(7, 0.731).unwrap();
    let b = build_coefficient_table(7, 0.731).unwrap();
    assert!(std::sync::Arc::ptr_eq(&a, &b));
    let handles: Vec<_> = (0..8)
        .map(|_| std::thread::spawn(|| build_coefficient_table(9, 0.377).unwrap()))
        .collect();
    let tables: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(tables
        .windows(2)
        .all(|w| std::sync::Arc::ptr_eq(&w[0], &w[1])));
}

#[test]
fn polynomial_examples() {
    let t = CoefficientTable::build(2, 2.0).unwrap();
    let p = eval_polys(&t, 0, 0.7).unwrap();
    assert_eq!((p.v, p.w, p.v_tilde), (1.0, 0.0, 0.0));
    assert!((p.w_tilde + 2.0 * 0.7).abs() < 1e-15);
    let p = eval_polys(&t, 2, 0.5).unwrap();
    assert!((p.v - 1.5).abs() < 1e-15);
    assert!(eval_polys(&t, 5, 0.5).is_err());
}

#[test]
fn phi_examples() {
    let t = CoefficientTable::build(4, 1.0).unwrap();
    let p0 = phi(&t, 0, 1.0).unwrap();
    assert!((p0.full - 0.4210244382).abs() < 1e-10);
    let tiny = phi(&t, 0, 1e-9).unwrap();
    assert!((tiny.log_factor + 1.0).abs() < 1e-15);
    let s = phi(&t, 0, 0.3).unwrap();
    assert!(s.split_defect(0.3) < 1e-12);
    let pt = phi_tilde(&t, 0, 0.4).unwrap();
    assert!(rel(pt.full, -0.4 * bessel_k(BesselOrder::One, 0.4).unwrap()) < 1e-14);
    let tiny = phi_tilde(&t, 0, 1e-9).unwrap();
    assert!((tiny.smooth + 1.0).abs() < 1e-12);
    // r d/dr Phi_0 = Phi~_0
    let (h, r) = (1e-5, 0.4);
    let fd = r * (phi(&t, 0, r + h).unwrap().full - phi(&t, 0, r - h).unwrap().full) / (2.0 * h);
    assert!((fd - pt.full).abs() < 1e-8);
    assert!(phi(&t, 0, -1.0).is_err());
}

#[test]
fn phi_tilde_is_radial_derivative_for_all_orders() {
    let t = CoefficientTable::build(8, 0.8).unwrap();
    let (h, r) = (1e-5, 0.9);
    for n in 0..=8 {
        let fd =
            r * (phi(&t, n, r + h).unwrap().full - phi(&t, n, r - h).unwrap().full) / (2.0 * h);
        let got = phi_tilde(&t, n, r).unwrap().full;
        assert!((fd - got).abs() < 1e-8, "n={n}: {fd} vs {got}");
    }
}

#[test]
fn layer_functions_match_high_precision_oracle() {
    // 50-digit evaluation of the unsplit formula, (lambda, mu, rho, kappa) = (2, 1, 1, 1)
    let cases = [
        (1, 3, 0.2, -0.022452621953483244, -0.4065789614369421),
        (2, 3, 0.2, 0.29634109942688487, -0.1128993868549034),
        (1, 0, 1.0, 0.19471110843629246, -0.3392002410221947),
        (2, 5, 2.5, 0.025_465_298_635_093_99, 0.2316449402422878),
        (
            1,
            15,
            0.8,
            0.056_177_321_467_095_02,
            -0.377_775_905_531_631_4,
        ),
        (2, 15, 2.5, -0.057536784441018373, 0.05991932377152276),
        (1, 10, 3.5, 0.021_570_162_709_518_03, 0.013867206461290995),
    ];
    let seq = FundamentalSequence::new(params(2.0, 1.0, 1.0), 16).unwrap();
    for (l, n, r, value, tilde) in cases {
        let got = seq.layer_coeffs(l, n, r).unwrap();
        let got_t = seq.layer_coeffs_tilde(l, n, r).unwrap();
        assert!(
            rel(got.full, value) < 1e-9,
            "Phi_{l},{n}({r}) = {} vs {value}",
            got.full
        );
        assert!(
            rel(got_t.full, tilde) < 1e-9,
            "Phi~_{l},{n}({r}) = {} vs {tilde}",
            got_t.full
        );
    }
}

#[test]
fn fundamental_matrix_reproduces_verification_values() {
    // first component of E_n((1, 1.2), (0, 0)) for (lambda, mu) = (3, 2), kappa = 1
    let seq = FundamentalSequence::new(params(3.0, 2.0, 1.0), 2).unwrap();
    let expected = [
        0.13666952310796892,
        -0.053_093_813_488_000_87,
        -0.080_639_619_431_916_11,
    ];
    let x = Vector2::new(1.0, 1.2);
    let y = Vector2::zeros();
    for (n, e) in expected.iter().enumerate() {
        let m = seq.fundamental_matrix(n, &x, &y).unwrap();
        assert!(
            (m.full[(0, 0)] - e).abs() < 1e-13,
            "n={n}: {}",
            m.full[(0, 0)]
        );
    }
    let table1 = [0.136669523108, -0.053093813488, -0.080639619432];
    let full = seq.fundamental_full(&x, &y).unwrap();
    for (n, e) in table1.iter().enumerate() {
        assert!((full[n][(0, 0)] - e).abs() < 1e-12);
    }
}

#[test]
fn fundamental_matrix_structure() {
    let seq = FundamentalSequence::new(params(2.0, 1.0, 1.0), 4).unwrap();
    let r = 0.9;
    let m = seq
        .fundamental_matrix(3, &Vector2::new(r, 0.0), &Vector2::zeros())
        .unwrap();
    let l1 = seq.layer_coeffs(1, 3, r).unwrap().full;
    let l2 = seq.layer_coeffs(2, 3, r).unwrap().full;
    assert!((m.full - Matrix2::new(l1 + l2, 0.0, 0.0, l1)).norm() < 1e-14);
    let (x, y) = (Vector2::new(0.3, -0.4), Vector2::new(1.2, 0.5));
    for n in 0..=4 {
        let a = seq.fundamental_matrix(n, &x, &y).unwrap().full;
        let b = seq.fundamental_matrix(n, &y, &x).unwrap().full;
        assert!((a - b).norm() < 1e-15);
        assert!((a - a.transpose()).norm() < 1e-15);
    }
    let e2 = seq
        .fundamental_matrix(2, &Vector2::new(1.1, 0.7), &Vector2::zeros())
        .unwrap()
        .full;
    let oracle = Matrix2::new(
        -0.15072268468792952,
        -0.022924181768283014,
        -0.022924181768283014,
        -0.129_287_086_151_353_2,
    );
    assert!((e2 - oracle).norm() < 1e-13);
}

#[test]
fn limits_match_closed_forms() {
    for (lambda, mu, kappa) in [
        (2.0, 1.0, 1.0),
        (3.0, 2.0, 1.0),
        (2.0, 1.0, 0.5),
        (1.0, 3.0, 2.0),
    ] {
        let p = params(lambda, mu, kappa);
        let (cs2, cp2) = (p.c_s().powi(2), p.c_p().powi(2));
        let seq = FundamentalSequence::new(p, 10).unwrap();
        for n in 0..=10 {
            let l1 = seq.limits_at_zero(1, n).unwrap();
            let l2 = seq.limits_at_zero(2, n).unwrap();
            let tol = 1e-10;
            assert!(
                (l1.eta - (-0.5 / cp2 - 0.5 / cs2)).abs() < tol,
                "eta1 n={n}"
            );
            assert!(l2.eta.abs() < tol, "eta2 n={n}");
            assert!((l2.xi - (-0.5 / cp2 + 0.5 / cs2)).abs() < tol, "xi2 n={n}");
            assert!(
                (l1.xi_tilde - (-0.5 / cp2 - 0.5 / cs2)).abs() < tol,
                "xi~1 n={n}"
            );
            assert!(l2.xi_tilde.abs() < tol, "xi~2 n={n}");
            for l in 1..=2 {
                let printed = seq.limits_from_epsilon(l, n);
                let series = seq.limits_at_zero(l, n).unwrap();
                assert!((printed.eta - series.eta).abs() < 1e-10);
                assert!((printed.xi - series.xi).abs() < 1e-10);
                assert!((printed.xi_tilde - series.xi_tilde).abs() < 1e-10);
            }
        }
    }
    let seq = FundamentalSequence::new(params(2.0, 1.0, 1.0), 3).unwrap();
    assert!((seq.limits_at_zero(1, 2).unwrap().eta + 0.625).abs() < 1e-12);
    assert!((seq.limits_at_zero(2, 2).unwrap().xi - 0.375).abs() < 1e-12);
    let seq = FundamentalSequence::new(params(3.0, 2.0, 1.0), 3).unwrap();
    assert!((seq.limits_at_zero(1, 0).unwrap().eta + 0.3214285714).abs() < 1e-10);
}

#[test]
fn small_r_behaviour() {
    let seq = FundamentalSequence::new(params(2.0, 1.0, 1.0), 6).unwrap();
    for l in 1..=2 {
        for n in 0..=6 {
            let lim = seq.limits_at_zero(l, n).unwrap();
            let v = seq.layer_coeffs(l, n, 1e-5).unwrap();
            let vt = seq.layer_coeffs_tilde(l, n, 1e-5).unwrap();
            assert!((v.log_factor - lim.eta).abs() < 1e-8);
            assert!((v.smooth - lim.xi).abs() < 1e-8);
            assert!((vt.smooth - lim.xi_tilde).abs() < 1e-8);
        }
    }
    let d =
        seq.layer_coeffs(1, 2, 1e-4).unwrap().log_factor - seq.limits_at_zero(1, 2).unwrap().eta;
    assert!(d.abs() < 1e-7 && d.abs() > 1e-10, "{d}");
    let d2 =
        seq.layer_coeffs(1, 2, 5e-5).unwrap().log_factor - seq.limits_at_zero(1, 2).unwrap().eta;
    assert!((d / d2 - 4.0).abs() < 1e-3);
    assert!(seq.layer_coeffs_tilde(1, 1, 1e-3).unwrap().log_factor.abs() < 1e-5);
    assert!(seq.layer_coeffs(2, 4, 1e-3).unwrap().log_factor.abs() < 1e-5);
}

fn column(m: &Matrix2<f64>, c: usize) -> Vector2<f64> {
    m.column(c).into_owned()
}

#[test]
fn pde_residual_by_finite_differences() {
    let p = params(2.0, 1.0, 1.0);
    let seq = FundamentalSequence::new(p, 4).unwrap();
    let (cs2, cp2) = (p.c_s().powi(2), p.c_p().powi(2));
    let y = Vector2::zeros();
    let h = 1e-4;
    let points = [
        Vector2::new(1.1, 0.7),
        Vector2::new(-0.4, 0.6),
        Vector2::new(0.2, -1.7),
    ];
    for x in points {
        let e = |dx: f64, dy: f64| {
            seq.fundamental_full(&(x + Vector2::new(dx, dy)), &y)
                .unwrap()
        };
        let c = e(0.0, 0.0);
        let (xp, xm, yp, ym) = (e(h, 0.0), e(-h, 0.0), e(0.0, h), e(0.0, -h));
        let (pp, pm, mp, mm) = (e(h, h), e(h, -h), e(-h, h), e(-h, -h));
        for n in 0..=4 {
            for col in 0..2 {
                let u = |m: &Vec<Matrix2<f64>>| column(&m[n], col);
                let lap = (u(&xp) + u(&xm) + u(&yp) + u(&ym) - u(&c) * 4.0) / (h * h);
                let d11 = (u(&xp) - u(&c) * 2.0 + u(&xm)) / (h * h);
                let d22 = (u(&yp) - u(&c) * 2.0 + u(&ym)) / (h * h);
                let d12 = (u(&pp) - u(&pm) - u(&mp) + u(&mm)) / (4.0 * h * h);
                let grad_div = Vector2::new(d11[0] + d12[1], d12[0] + d22[1]);
                let mut residual = lap * cs2 + grad_div * (cp2 - cs2) - u(&c) * p.kappa().powi(2);
                for (m, cm) in c[..n].iter().enumerate() {
                    residual -= column(cm, col) * p.beta(n - m);
                }
                assert!(
                    residual.norm() < 1e-5,
                    "n={n} col={col} x={x:?}: {}",
                    residual.norm()
                );
            }
        }
    }
}

fn traction_of_field(
    field: impl Fn(&Vector2<f64>) -> Vector2<f64>,
    x: &Vector2<f64>,
    nu: &Vector2<f64>,
    p: &MaterialParams,
) -> Vector2<f64> {
    let h = 1e-5;
    let dx = (field(&(x + Vector2::new(h, 0.0))) - field(&(x - Vector2::new(h, 0.0)))) / (2.0 * h);
    let dy = (field(&(x + Vector2::new(0.0, h))) - field(&(x - Vector2::new(0.0, h)))) / (2.0 * h);
    let div = dx[0] + dy[1];
    let directional = dx * nu[0] + dy * nu[1];
    // div(Q v) with Q v = (v_2, -v_1), and Q nu = (nu_2, -nu_1)
    let curl = dx[1] - dy[0];
    nu * (p.lambda() * div)
        + directional * (2.0 * p.mu())
        + Vector2::new(nu[1], -nu[0]) * (p.mu() * curl)
}

#[test]
fn traction_matches_finite_differences() {
    let p = params(2.0, 1.0, 1.0);
    let seq = FundamentalSequence::new(p, 4).unwrap();
    let y = Vector2::new(0.1, -0.2);
    let samples = [
        (Vector2::new(1.0, 0.2), Vector2::new(1.0, 0.0)),
        (Vector2::new(-0.5, 0.9), Vector2::new(0.6, 0.8)),
        (Vector2::new(0.7, -1.1), Vector2::new(-0.28, 0.96)),
    ];
    for (x, nu) in samples {
        let t = seq.traction_full(&x, &y, &nu).unwrap();
        for (n, tn) in t.iter().enumerate() {
            for col in 0..2 {
                let fd = traction_of_field(
                    |z| column(&seq.fundamental_full(z, &y).unwrap()[n], col),
                    &x,
                    &nu,
                    &p,
                );
                let got = column(tn, col);
                assert!(
                    (fd - got).norm() < 1e-5,
                    "n={n} col={col}: {fd:?} vs {got:?}"
                );
            }
        }
    }
}

#[test]
fn traction_matches_high_precision_oracle() {
    let seq = FundamentalSequence::new(params(2.0, 1.0, 1.0), 1).unwrap();
    let m = seq
        .traction_matrix(
            1,
            &Vector2::new(1.0, 0.2),
            &Vector2::zeros(),
            &Vector2::new(1.0, 0.0),
        )
        .unwrap();
    let oracle = Matrix2::new(
        -0.774_043_982_099_885_2,
        -0.18834936826767572,
        -0.16415323137668583,
        0.047666726159139646,
    );
    assert!((m.full - oracle).norm() < 1e-12);
    let recombined = m.log_part * (1.04f64).sqrt().ln() + m.smooth;
    assert!((recombined - m.full).norm() < 1e-10 * m.full.norm());
}

#[test]
fn traction_log_part_vanishes_on_approach() {
    let seq = FundamentalSequence::new(params(2.0, 1.0, 1.0), 3).unwrap();
    let x = Vector2::new(0.3, 0.4);
    let d = Vector2::new(0.6, -0.8);
    let nu = Vector2::new(0.8, 0.6);
    for n in 0..=3 {
        let w = |eps: f64| {
            seq.traction_matrix(n, &x, &(x + d * eps), &nu)
                .unwrap()
                .log_part
                .norm()
        };
        let (a, b, c) = (w(1e-2), w(5e-3), w(2.5e-3));
        assert!(a > b && b > c, "n={n}: {a} {b} {c}");
        assert!(
            (a / b - 2.0).abs() < 0.1 && (b / c - 2.0).abs() < 0.1,
            "n={n}: {a} {b} {c}"
        );
    }
}

#[test]
fn bessel_based_and_series_routes_agree_at_the_switch() {
    // full values change route at gamma_s r = 1.5, or 2.6 for orders up to 5
    let p = params(2.0, 1.0, 1.0);
    let seq = FundamentalSequence::new(p, 10).unwrap();
    for (switch, orders) in [(1.5, 0..=10), (2.6, 0..=5)] {
        let below = seq.layer_values(switch - 1e-12, Channels::Full).unwrap();
        let above = seq.layer_values(switch + 1e-12, Channels::Full).unwrap();
        for n in orders {
            for l in 0..2 {
                assert!(
                    rel(below[n].phi[l], above[n].phi[l]) < 1e-9,
                    "r={switch} n={n} l={l}"
                );
                assert!(
                    rel(below[n].phi_tilde[l], above[n].phi_tilde[l]) < 1e-9,
                    "r={switch} n={n} l={l}"
                );
            }
        }
    }
    assert!(bessel_k01(1.5).is_ok());
}

fn split_scale(full: f64, log_factor: f64, r: f64) -> f64 {
    full.abs().max((log_factor * r.ln()).abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn split_identities(n in 0usize..=10, r in 1e-2f64..3.0, l in 1usize..=2) {
        let p = params(2.0, 1.0, 1.0);
        let seq = FundamentalSequence::new(p, 10).unwrap();
        let t = seq.table(false);
        for s in [phi(t, n, r).unwrap(), phi_tilde(t, n, r).unwrap()] {
            let defect = (s.log_factor * r.ln() + s.smooth - s.full).abs();
            prop_assert!(defect <= 1e-9 * split_scale(s.full, s.log_factor, r));
        }
        for s in [seq.layer_coeffs(l, n, r).unwrap(), seq.layer_coeffs_tilde(l, n, r).unwrap()] {
            let defect = (s.log_factor * r.ln() + s.smooth - s.full).abs();
            prop_assert!(defect <= 1e-9 * split_scale(s.full, s.log_factor, r), "{s:?}");
        }
        let x = Vector2::new(0.2, 0.1);
        let y = x + Vector2::new(r * 0.6, -r * 0.8);
        let nu = Vector2::new(0.6, 0.8);
        for m in [seq.fundamental_matrix(n, &x, &y).unwrap(), seq.traction_matrix(n, &x, &y, &nu).unwrap()] {
            let recombined = m.log_part * r.ln() + m.smooth;
            let scale = m.full.norm().max((m.log_part * r.ln()).norm());
            prop_assert!((recombined - m.full).norm() <= 1e-9 * scale);
        }
    }
}
