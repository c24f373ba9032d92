//! Exact arithmetic: rationals, real quadratic extensions ℚ(√d), and
//! second-order jets for closed-form parameter derivatives.
//!
//! The quadratic layer is what exact overlap detection runs on: elements
//! `a + b√d` with rational `a, b` and a fixed non-square `d > 0` have unique
//! representations, so equality of map compositions is decidable exactly.
//! Higher-degree algebraic parameters are out of scope.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Shorthand rational constructor.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn is_square(d: i64) -> bool {
    if d < 0 {
        return false;
    }
    let r = (d as f64).sqrt().round() as i64;
    (r - 1..=r + 1).any(|x| x >= 0 && x * x == d)
}

/// An element `a + b√d` of the real quadratic field ℚ(√d).
///
/// `d` must be a positive non-square, which makes the representation unique;
/// equality and hashing are therefore exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadExt {
    pub a: BigRational,
    pub b: BigRational,
    pub d: i64,
}

impl QuadExt {
    pub fn new(a: BigRational, b: BigRational, d: i64) -> Result<QuadExt> {
        if d <= 0 || is_square(d) {
            return Err(Error::ExactArithmeticRequired(format!(
                "field discriminant must be a positive non-square, got {d}"
            )));
        }
        Ok(QuadExt { a, b, d })
    }

    /// Embed a rational in ℚ(√d).
    pub fn rational(a: BigRational, d: i64) -> QuadExt {
        QuadExt::new(a, BigRational::zero(), d).expect("caller supplies a valid discriminant")
    }

    pub fn from_ints(a: i64, b: i64, d: i64) -> QuadExt {
        QuadExt::new(rat(a, 1), rat(b, 1), d).expect("caller supplies a valid discriminant")
    }

    pub fn zero(d: i64) -> QuadExt {
        QuadExt::rational(BigRational::zero(), d)
    }

    pub fn one(d: i64) -> QuadExt {
        QuadExt::rational(BigRational::one(), d)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Field inverse; `None` for zero.
    pub fn inverse(&self) -> Option<QuadExt> {
        if self.is_zero() {
            return None;
        }
        // (a + b√d)(a - b√d) = a² - d·b², nonzero since √d is irrational
        let norm = &self.a * &self.a - BigRational::from(BigInt::from(self.d)) * &self.b * &self.b;
        Some(QuadExt {
            a: &self.a / &norm,
            b: -&self.b / &norm,
            d: self.d,
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
            + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    pub fn abs_to_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    fn check_field(&self, other: &QuadExt) {
        assert_eq!(self.d, other.d, "mixed quadratic fields");
    }
}

impl Add for QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: QuadExt) -> QuadExt {
        self.check_field(&rhs);
        QuadExt {
            a: self.a + rhs.a,
            b: self.b + rhs.b,
            d: self.d,
        }
    }
}

impl Sub for QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: QuadExt) -> QuadExt {
        self.check_field(&rhs);
        QuadExt {
            a: self.a - rhs.a,
            b: self.b - rhs.b,
            d: self.d,
        }
    }
}

impl Mul for QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: QuadExt) -> QuadExt {
        self.check_field(&rhs);
        let d = BigRational::from(BigInt::from(self.d));
        QuadExt {
            a: &self.a * &rhs.a + &d * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            d: self.d,
        }
    }
}

impl Div for QuadExt {
    type Output = QuadExt;
    // division in the field is multiplication by the conjugate inverse
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: QuadExt) -> QuadExt {
        let inv = rhs.inverse().expect("division by zero in ℚ(√d)");
        self * inv
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

/// Scalar abstraction for jet arithmetic: a field with clonable values.
pub trait JetScalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn near_zero(&self) -> bool;
}

impl JetScalar for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn near_zero(&self) -> bool {
        self.abs() < 1e-300
    }
}

impl JetScalar for QuadExt {
    fn zero_like(&self) -> Self {
        QuadExt::zero(self.d)
    }
    fn one_like(&self) -> Self {
        QuadExt::one(self.d)
    }
    fn near_zero(&self) -> bool {
        self.is_zero()
    }
}

/// Value together with first and second derivatives in one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
}

impl<T: JetScalar> Jet2<T> {
    pub fn constant(v: T) -> Jet2<T> {
        let z = v.zero_like();
        Jet2 {
            v,
            d1: z.clone(),
            d2: z,
        }
    }

    /// The identity function of the parameter: value `t`, slope 1.
    pub fn variable(t: T) -> Jet2<T> {
        let one = t.one_like();
        let zero = t.zero_like();
        Jet2 {
            v: t,
            d1: one,
            d2: zero,
        }
    }

    pub fn add(&self, o: &Jet2<T>) -> Jet2<T> {
        Jet2 {
            v: self.v.clone() + o.v.clone(),
            d1: self.d1.clone() + o.d1.clone(),
            d2: self.d2.clone() + o.d2.clone(),
        }
    }

    pub fn sub(&self, o: &Jet2<T>) -> Jet2<T> {
        Jet2 {
            v: self.v.clone() - o.v.clone(),
            d1: self.d1.clone() - o.d1.clone(),
            d2: self.d2.clone() - o.d2.clone(),
        }
    }

    pub fn mul(&self, o: &Jet2<T>) -> Jet2<T> {
        let two = self.v.one_like() + self.v.one_like();
        Jet2 {
            v: self.v.clone() * o.v.clone(),
            d1: self.d1.clone() * o.v.clone() + self.v.clone() * o.d1.clone(),
            d2: self.d2.clone() * o.v.clone()
                + two * self.d1.clone() * o.d1.clone()
                + self.v.clone() * o.d2.clone(),
        }
    }

    /// Quotient rule; panics on division by zero.
    pub fn div(&self, o: &Jet2<T>) -> Jet2<T> {
        assert!(!o.v.near_zero(), "jet division by zero");
        let w = self.v.clone() / o.v.clone();
        let d1 = (self.d1.clone() - w.clone() * o.d1.clone()) / o.v.clone();
        let two = self.v.one_like() + self.v.one_like();
        let d2 = (self.d2.clone() - two * d1.clone() * o.d1.clone() - w.clone() * o.d2.clone())
            / o.v.clone();
        Jet2 { v: w, d1, d2 }
    }
}

/// Dense polynomial `c_0 + c_1 t + …` used for parametric map coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Poly {
        Poly(vec![c])
    }

    /// The polynomial `t`.
    pub fn identity() -> Poly {
        Poly(vec![0.0, 1.0])
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Evaluate value and first two derivatives exactly (Horner on jets).
    pub fn eval_jet(&self, t: f64) -> Jet2<f64> {
        let x = Jet2::variable(t);
        let mut acc = Jet2::constant(0.0);
        for &c in self.0.iter().rev() {
            acc = acc.mul(&x).add(&Jet2::constant(c));
        }
        acc
    }

    /// Evaluate on a quadratic-field jet with rational coefficients obtained
    /// by exact conversion of the stored f64 coefficients. Errors if any
    /// coefficient is not exactly representable as a rational (it always is
    /// for finite f64, so this only rejects NaN/∞).
    pub fn eval_jet_exact(&self, t: &Jet2<QuadExt>) -> Result<Jet2<QuadExt>> {
        let d = t.v.d;
        let mut acc = Jet2::constant(QuadExt::zero(d));
        for &c in self.0.iter().rev() {
            let r = BigRational::from_float(c).ok_or_else(|| {
                Error::ExactArithmeticRequired(format!("non-finite coefficient {c}"))
            })?;
            acc = acc.mul(t).add(&Jet2::constant(QuadExt::rational(r, d)));
        }
        Ok(acc)
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().skip(1).all(|&c| c == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> QuadExt {
        // λ = (√5 - 1)/2, the root of λ² + λ - 1 in (0,1)
        QuadExt::new(rat(-1, 2), rat(1, 2), 5).unwrap()
    }

    #[test]
    fn rejects_square_discriminant() {
        assert!(QuadExt::new(rat(1, 1), rat(1, 1), 4).is_err());
        assert!(QuadExt::new(rat(1, 1), rat(1, 1), 9).is_err());
        assert!(QuadExt::new(rat(1, 1), rat(1, 1), 5).is_ok());
    }

    #[test]
    fn golden_ratio_satisfies_its_equation() {
        let l = golden();
        let lhs = l.clone() * l.clone() + l.clone();
        assert_eq!(lhs, QuadExt::one(5));
        assert!((l.to_f64() - 0.618_033_988_749_894_9).abs() < 1e-15);
    }

    #[test]
    fn inverse_multiplies_to_one() {
        let x = QuadExt::from_ints(3, -2, 5);
        let inv = x.inverse().unwrap();
        assert_eq!(x * inv, QuadExt::one(5));
        assert!(QuadExt::zero(5).inverse().is_none());
    }

    #[test]
    fn jet_mul_matches_product_rule() {
        // (t²)(3t + 1) at t = 2: value 4*7=28, d1 = 2t(3t+1)+3t² = 28+12=40, d2 = 2(3t+1)+6t+6t = 14+24=38
        let t2 = Poly(vec![0.0, 0.0, 1.0]).eval_jet(2.0);
        let lin = Poly(vec![1.0, 3.0]).eval_jet(2.0);
        let p = t2.mul(&lin);
        assert_eq!((p.v, p.d1, p.d2), (28.0, 40.0, 38.0));
    }

    #[test]
    fn jet_div_matches_quotient_rule() {
        // 1/(1-t) at t=0.25: v = 4/3, d1 = 1/(1-t)² = 16/9, d2 = 2/(1-t)³ = 128/27
        let one = Jet2::constant(1.0);
        let denom = Poly(vec![1.0, -1.0]).eval_jet(0.25);
        let q = one.div(&denom);
        assert!((q.v - 4.0 / 3.0).abs() < 1e-14);
        assert!((q.d1 - 16.0 / 9.0).abs() < 1e-14);
        assert!((q.d2 - 128.0 / 27.0).abs() < 1e-13);
    }

    #[test]
    fn exact_jet_evaluation() {
        // p(t) = t² + t - 1 at the golden point is exactly 0, slope 2λ + 1 = √5
        let p = Poly(vec![-1.0, 1.0, 1.0]);
        let t = Jet2::variable(golden());
        let j = p.eval_jet_exact(&t).unwrap();
        assert!(j.v.is_zero());
        assert_eq!(j.d1, QuadExt::from_ints(0, 1, 5));
    }
}
