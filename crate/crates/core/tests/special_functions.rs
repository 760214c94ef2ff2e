#![allow(clippy::excessive_precision)]

use elastocauchy::special_functions::{
    bessel_i, bessel_k, bessel_k01, harmonic, macdonald_parts, series_s, BesselOrder, SeriesConfig,
    EULER_GAMMA,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

// 50-digit values of (z, K_0(z), K_1(z))
const K_REFERENCE: [(f64, f64, f64); 7] = [
    (0.1, 2.4270690247020166125, 9.8538447808706061348),
    (0.5, 0.92441907122766586178, 1.6564411200033008937),
    (1.0, 0.42102443824070833334, 0.60190723019723457474),
    (2.5, 0.062347553200366186029, 0.073890816347747063649),
    (5.0, 0.0036910983340425942747, 0.0040446134454521642084),
    (7.5, 0.00024917761635611438901, 0.00026529739012528952599),
    (10.0, 0.000017780062316167651811, 0.000018648773453825584597),
];

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn harmonic_small_values() {
    assert_eq!(harmonic(0), 0.0);
    assert_eq!(harmonic(1), 1.0);
    assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
}

#[test]
fn harmonic_increments() {
    for n in 1..=50 {
        let h = harmonic(n);
        let prev = harmonic(n - 1);
        assert_eq!(h, prev + 1.0 / n as f64);
        let half_ulp = f64::EPSILON * h / 2.0;
        assert!(((h - prev) - 1.0 / n as f64).abs() <= half_ulp);
    }
}

#[test]
fn i0_at_one_matches_exact_rational_sum() {
    // 30 terms of sum (1/2)^(2n)/(n!)^2 in exact arithmetic
    let mut sum = BigRational::from_integer(BigInt::from(0));
    let mut term = BigRational::from_integer(BigInt::from(1));
    for n in 0..30u32 {
        if n > 0 {
            term /= BigRational::from_integer(BigInt::from(4 * n * n));
        }
        sum += term.clone();
    }
    let exact = sum.to_f64().unwrap();
    let got = bessel_i(BesselOrder::Zero, 1.0).unwrap();
    assert!(rel(got, exact) < 1e-15, "{got} vs {exact}");
    assert!((got - 1.2660658778).abs() < 1e-10);
}

#[test]
fn series_at_zero() {
    assert_eq!(bessel_i(BesselOrder::Zero, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_i(BesselOrder::One, 0.0).unwrap(), 0.0);
    assert_eq!(series_s(BesselOrder::Zero, 0.0).unwrap(), 0.0);
    assert_eq!(series_s(BesselOrder::One, 0.0).unwrap(), 0.0);
}

#[test]
fn auxiliary_series_match_high_precision_sums() {
    let s0 = series_s(BesselOrder::Zero, 2.0).unwrap();
    assert!(rel(s0, 1.4297062187372083132) < 1e-15, "{s0}");
    let s1 = series_s(BesselOrder::One, 2.0).unwrap();
    assert!(rel(s1, -1.278274627849846341) < 1e-15, "{s1}");
    let s1 = series_s(BesselOrder::One, 3.5).unwrap();
    assert!(rel(s1, -7.3184632235256545823) < 1e-15, "{s1}");
}

#[test]
fn macdonald_matches_reference() {
    for (z, k0, k1) in K_REFERENCE {
        let (a, b) = bessel_k01(z).unwrap();
        assert!(rel(a, k0) < 1e-12, "K0({z}) = {a}, expected {k0}");
        assert!(rel(b, k1) < 1e-12, "K1({z}) = {b}, expected {k1}");
    }
    assert!((bessel_k(BesselOrder::Zero, 1.0).unwrap() - 0.4210244382).abs() < 1e-10);
}

#[test]
fn macdonald_large_arguments() {
    let cases = [
        (20.0, 5.7412378153365243e-10, 5.8830579695570382e-10),
        (25.0, 3.4641615622131144e-12, 3.5327780731999338e-12),
    ];
    for (z, k0, k1) in cases {
        let (a, b) = bessel_k01(z).unwrap();
        assert!(rel(a, k0) < 1e-12 && rel(b, k1) < 1e-12, "z = {z}: {a} {b}");
    }
    assert!(bessel_k01(30.0).unwrap().0 > 0.0);
}

#[test]
fn macdonald_reconstructs_from_its_series() {
    // at moderate z the f64 parts suffice to reassemble K without visible cancellation
    for z in [0.1, 0.3, 0.8, 1.5] {
        let p = macdonald_parts(z, &SeriesConfig::default()).unwrap();
        let log_term = (z / 2.0).ln() + EULER_GAMMA;
        let k0 = -log_term * p.i0 + p.s0;
        let k1 = 1.0 / z + log_term * p.i1 + p.s1;
        assert!(rel(k0, p.k0.unwrap()) < 1e-13);
        assert!(rel(k1, p.k1.unwrap()) < 1e-13);
    }
}

#[test]
fn macdonald_against_integral_representation() {
    // K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt, trapezoid is spectrally accurate here
    for z in [0.5f64, 1.0, 3.0] {
        let h = 0.01;
        let (mut k0, mut k1) = (0.5 * (-z).exp(), 0.5 * (-z).exp());
        for j in 1..2000 {
            let t = j as f64 * h;
            let e = (-z * t.cosh()).exp();
            k0 += e;
            k1 += e * t.cosh();
        }
        let (a, b) = bessel_k01(z).unwrap();
        assert!(rel(a, k0 * h) < 1e-12);
        assert!(rel(b, k1 * h) < 1e-12);
    }
}

#[test]
fn leading_singularity_of_k1() {
    let z = 1e-8;
    assert!((z * bessel_k(BesselOrder::One, z).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn wronskian_on_grid() {
    let z0 = 0.05;
    let z1 = 25.0;
    let mut worst: f64 = 0.0;
    for j in 0..100 {
        let z = z0 + (z1 - z0) * j as f64 / 99.0;
        let p = macdonald_parts(z, &SeriesConfig::default()).unwrap();
        let w = z * (p.i0 * p.k1.unwrap() + p.i1 * p.k0.unwrap());
        worst = worst.max((w - 1.0).abs());
    }
    assert!(worst < 1e-10, "worst Wronskian defect {worst}");
    let p = macdonald_parts(0.7, &SeriesConfig::default()).unwrap();
    let w = 0.7 * (p.i0 * p.k1.unwrap() + p.i1 * p.k0.unwrap());
    assert!((w - 1.0).abs() < 1e-12);
}

#[test]
fn k_positive_and_decreasing() {
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for j in 0..100 {
        let z = 0.05 + 24.95 * j as f64 / 99.0;
        let (k0, k1) = bessel_k01(z).unwrap();
        assert!(k0 > 0.0 && k1 > 0.0);
        assert!(k0 < prev.0 && k1 < prev.1, "not decreasing at z = {z}");
        prev = (k0, k1);
    }
}

#[test]
fn domain_errors() {
    assert!(bessel_i(BesselOrder::Zero, 30.5).is_err());
    assert!(bessel_i(BesselOrder::Zero, -1.0).is_err());
    assert!(series_s(BesselOrder::One, 31.0).is_err());
    assert!(bessel_k(BesselOrder::Zero, 0.0).is_err());
    assert!(bessel_k(BesselOrder::One, -0.5).is_err());
    assert!(bessel_k(BesselOrder::One, f64::NAN).is_err());
    assert!(SeriesConfig::new(5, 1e-20).is_err());
    assert!(SeriesConfig::new(60, 1e-3).is_err());
    assert!(SeriesConfig::new(60, 1e-16).is_ok());
}

proptest! {
    #[test]
    fn wronskian_holds_anywhere_in_range(z in 0.05f64..25.0) {
        let p = macdonald_parts(z, &SeriesConfig::default()).unwrap();
        let w = z * (p.i0 * p.k1.unwrap() + p.i1 * p.k0.unwrap());
        prop_assert!((w - 1.0).abs() < 1e-10);
    }
}
