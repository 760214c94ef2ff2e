//! Minimal double-double arithmetic (about 32 significant digits).
//!
//! Only what the Bessel series need: add, multiply, divide and a natural
//! logarithm of an `f64` argument.

use std::ops::{Add, Div, Mul, Neg, Sub};

const LN2: Dd = Dd::new(std::f64::consts::LN_2, 2.3190468138462996e-17);
pub(crate) const EULER: Dd = Dd::new(0.5772156649015329, -4.942915152430645e-18);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn renorm(a: f64, b: f64) -> Self {
        let (hi, lo) = quick_two_sum(a, b);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs_hi(self) -> f64 {
        self.hi.abs()
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::renorm(p, e + self.lo * b)
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Dd::from_f64(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Dd::from_f64(b).mul_f64(q2);
        let q3 = r.hi / b;
        Self::renorm(q1, q2) + Dd::from_f64(q3)
    }

    /// Natural logarithm of a positive `f64`, correct to double-double precision.
    pub fn ln(x: f64) -> Self {
        debug_assert!(x > 0.0 && x.is_finite());
        let mut k = x.log2().floor() as i32;
        let mut m = x * 2f64.powi(-k);
        // keep the reduced argument in [1/sqrt 2, sqrt 2) so the atanh series converges fast
        if m > std::f64::consts::SQRT_2 {
            m *= 0.5;
            k += 1;
        } else if m < std::f64::consts::FRAC_1_SQRT_2 {
            m *= 2.0;
            k -= 1;
        }
        let t = (Dd::from_f64(m) - Dd::from_f64(1.0)) / (Dd::from_f64(m) + Dd::from_f64(1.0));
        let t2 = t * t;
        let mut power = t;
        let mut sum = t;
        for j in 1..60 {
            power = power * t2;
            let term = power.div_f64((2 * j + 1) as f64);
            sum = sum + term;
            if term.abs_hi() <= 1e-34 * sum.abs_hi() {
                break;
            }
        }
        sum.mul_f64(2.0) + LN2.mul_f64(k as f64)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd::new(-self.hi, -self.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o.mul_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o.mul_f64(q2);
        let q3 = r.hi / o.hi;
        Dd::renorm(q1, q2) + Dd::from_f64(q3)
    }
}
