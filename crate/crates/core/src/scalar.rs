//! Scalars for wave amplitudes.
//!
//! Every closed-form quantity on `T_q` lives in the quadratic field `ℚ(√q)`:
//! propagator weights are powers of `q^{1/2}` and everything else is
//! rational. [`QSurd`] stores `a + b·√q` exactly with arbitrary-precision
//! rationals so conservation laws can be checked as equalities. `f64`
//! implements the same [`Scalar`] surface for fast approximate runs.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Which arithmetic backend a computation runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarMode {
    Exact,
    Float64,
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarMode::Exact => f.write_str("exact"),
            ScalarMode::Float64 => f.write_str("float"),
        }
    }
}

impl FromStr for ScalarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ScalarMode::Exact),
            "float" | "float64" => Ok(ScalarMode::Float64),
            other => Err(Error::usage(
                "mode",
                format!("expected `exact` or `float`, got `{other}`"),
            )),
        }
    }
}

/// Operations shared by the exact and floating-point backends.
///
/// Constructors take the branching parameter `q` because exact values carry
/// it; the `f64` backend ignores it except where `√q` is involved. Mixing
/// backends inside one expression is ruled out by the type system.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + Sub<Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + Mul<Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + Neg<Output = Self>
{
    const MODE: ScalarMode;

    /// The rational `num / den`. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64, q: u32) -> Self;

    fn from_bigint(n: &BigInt, q: u32) -> Self;

    /// `q^{exp/2}` for any integer `exp`.
    fn q_pow_half(exp: i64, q: u32) -> Self;

    fn is_zero(&self) -> bool;

    fn checked_div(&self, rhs: &Self) -> Result<Self>;

    fn to_f64(&self) -> f64;

    /// Sign of the value, exact in exact mode.
    fn cmp_zero(&self) -> Ordering;

    /// JSON form: `{"a": "p/r", "b": "s/t"}` for exact values, a number otherwise.
    fn to_json(&self) -> Value;

    fn from_json(value: &Value, q: u32) -> Result<Self>;

    /// `(a, b)` fraction strings for exact values; `None` in float mode.
    fn exact_parts(&self) -> Option<(String, String)>;

    fn zero(q: u32) -> Self {
        Self::from_ratio(0, 1, q)
    }

    fn one(q: u32) -> Self {
        Self::from_ratio(1, 1, q)
    }

    fn from_i64(n: i64, q: u32) -> Self {
        Self::from_ratio(n, 1, q)
    }

    fn sqrt_q(q: u32) -> Self {
        Self::q_pow_half(1, q)
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    fn square(&self) -> Self {
        self.clone() * self
    }
}

/// An element `a + b·√q` of `ℚ(√q)`.
///
/// When `q` is a perfect square the irrational part is folded into `a`, so
/// the representation is unique and equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSurd {
    a: Rational,
    b: Rational,
    q: u32,
}

fn perfect_root(q: u32) -> Option<u32> {
    let r = q.sqrt();
    (r * r == q).then_some(r)
}

fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

impl QSurd {
    /// Builds `a + b·√q` in normal form. Fails for `q < 2`.
    pub fn new(a: Rational, b: Rational, q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::Parameter(format!(
                "branching parameter must be at least 2, got {q}"
            )));
        }
        Ok(Self::normalized(a, b, q))
    }

    fn normalized(mut a: Rational, mut b: Rational, q: u32) -> Self {
        if !b.is_zero() {
            if let Some(r) = perfect_root(q) {
                a += b * Rational::from_integer(BigInt::from(r));
                b = Rational::zero();
            }
        }
        QSurd { a, b, q }
    }

    pub fn rational(r: Rational, q: u32) -> Self {
        QSurd {
            a: r,
            b: Rational::zero(),
            q,
        }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Galois conjugate `a − b·√q`.
    pub fn conjugate(&self) -> Self {
        QSurd {
            a: self.a.clone(),
            b: -self.b.clone(),
            q: self.q,
        }
    }

    /// Field norm `a² − q·b²`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(BigInt::from(self.q))
    }

    fn same_q(&self, rhs: &Self) -> Result<()> {
        if self.q == rhs.q {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "mismatched branching parameters {} and {}",
                self.q, rhs.q
            )))
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.same_q(rhs)?;
        Ok(self.add_unchecked(rhs))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.same_q(rhs)?;
        Ok(self.sub_unchecked(rhs))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        self.same_q(rhs)?;
        Ok(self.mul_unchecked(rhs))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        self.same_q(rhs)?;
        let n = rhs.norm();
        if n.is_zero() {
            return Err(Error::Arithmetic("division by zero".into()));
        }
        let num = self.mul_unchecked(&rhs.conjugate());
        Ok(QSurd {
            a: num.a / &n,
            b: num.b / &n,
            q: self.q,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        QSurd::rational(Rational::one(), self.q).checked_div(self)
    }

    fn add_unchecked(&self, rhs: &Self) -> Self {
        QSurd {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
            q: self.q,
        }
    }

    fn sub_unchecked(&self, rhs: &Self) -> Self {
        QSurd {
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
            q: self.q,
        }
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let q = Rational::from_integer(BigInt::from(self.q));
        let a = &self.a * &rhs.a + &self.b * &rhs.b * q;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        QSurd { a, b, q: self.q }
    }

    /// Nearest `f64`, rounding ties to even.
    ///
    /// For irrational values the approximation is refined until the rounding
    /// of both ends of an integer bracket agree; rounding is monotone, so the
    /// common result is the correctly rounded value.
    pub fn to_float(&self) -> f64 {
        if self.b.is_zero() {
            return self.a.to_f64().unwrap_or(f64::NAN);
        }
        let q = Rational::from_integer(BigInt::from(self.q));
        let mut bits: usize = 128;
        loop {
            let scale = BigInt::one() << bits;
            let scale_r = Rational::from_integer(scale.clone());
            let t1 = (&self.a * &scale_r).floor().to_integer();
            let radicand = (&self.b * &self.b * &q * &scale_r * &scale_r)
                .floor()
                .to_integer();
            let s = radicand.sqrt();
            let lo = if self.b.is_positive() {
                t1 + s
            } else {
                t1 - s - BigInt::one()
            };
            let hi = &lo + BigInt::from(2);
            let flo = Rational::new(lo, scale.clone()).to_f64();
            let fhi = Rational::new(hi, scale).to_f64();
            if let (Some(x), Some(y)) = (flo, fhi) {
                if x == y {
                    return x;
                }
            }
            bits *= 2;
        }
    }

    fn sign(&self) -> Ordering {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        match (sa, sb) {
            (_, Ordering::Equal) => sa,
            (Ordering::Equal, _) => sb,
            _ if sa == sb => sa,
            _ => {
                let a2 = &self.a * &self.a;
                let qb2 = &self.b * &self.b * Rational::from_integer(BigInt::from(self.q));
                if a2 > qb2 {
                    sa
                } else {
                    sb
                }
            }
        }
    }
}

fn sign_of(r: &Rational) -> Ordering {
    match r.numer().sign() {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

impl fmt::Display for QSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}·√{}", self.b, self.q)
        } else {
            write!(f, "{} + {}·√{}", self.a, self.b, self.q)
        }
    }
}

macro_rules! surd_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&QSurd> for &QSurd {
            type Output = QSurd;
            fn $method(self, rhs: &QSurd) -> QSurd {
                assert_eq!(self.q, rhs.q, "mismatched branching parameters");
                self.$inner(rhs)
            }
        }
        impl $trait<&QSurd> for QSurd {
            type Output = QSurd;
            fn $method(self, rhs: &QSurd) -> QSurd {
                (&self).$method(rhs)
            }
        }
        impl $trait<QSurd> for QSurd {
            type Output = QSurd;
            fn $method(self, rhs: QSurd) -> QSurd {
                (&self).$method(&rhs)
            }
        }
        impl $trait<QSurd> for &QSurd {
            type Output = QSurd;
            fn $method(self, rhs: QSurd) -> QSurd {
                self.$method(&rhs)
            }
        }
    };
}

surd_binop!(Add, add, add_unchecked);
surd_binop!(Sub, sub, sub_unchecked);
surd_binop!(Mul, mul, mul_unchecked);

impl Neg for QSurd {
    type Output = QSurd;
    fn neg(self) -> QSurd {
        QSurd {
            a: -self.a,
            b: -self.b,
            q: self.q,
        }
    }
}

impl Neg for &QSurd {
    type Output = QSurd;
    fn neg(self) -> QSurd {
        -self.clone()
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let r: Rational = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a fraction: `{s}`")))?;
    Ok(r)
}

impl Scalar for QSurd {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn from_ratio(num: i64, den: i64, q: u32) -> Self {
        QSurd::rational(rational(num, den), q)
    }

    fn from_bigint(n: &BigInt, q: u32) -> Self {
        QSurd::rational(Rational::from_integer(n.clone()), q)
    }

    fn q_pow_half(exp: i64, q: u32) -> Self {
        let qb = Rational::from_integer(BigInt::from(q));
        let pow = |e: i64| -> Rational {
            let p = num_traits::pow(qb.clone(), e.unsigned_abs() as usize);
            if e < 0 {
                p.recip()
            } else {
                p
            }
        };
        if exp.rem_euclid(2) == 0 {
            QSurd::rational(pow(exp / 2), q)
        } else {
            QSurd::normalized(Rational::zero(), pow((exp - 1) / 2), q)
        }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        QSurd::checked_div(self, rhs)
    }

    fn to_f64(&self) -> f64 {
        self.to_float()
    }

    fn cmp_zero(&self) -> Ordering {
        self.sign()
    }

    fn to_json(&self) -> Value {
        json!({ "a": self.a.to_string(), "b": self.b.to_string() })
    }

    fn from_json(value: &Value, q: u32) -> Result<Self> {
        let part = |key: &str| -> Result<Rational> {
            match value.get(key) {
                Some(Value::String(s)) => parse_rational(s),
                Some(Value::Number(n)) if n.is_i64() => {
                    Ok(Rational::from_integer(BigInt::from(n.as_i64().unwrap())))
                }
                None if key == "b" => Ok(Rational::zero()),
                _ => Err(Error::Parse(format!(
                    "exact value needs string field `{key}`: {value}"
                ))),
            }
        };
        QSurd::new(part("a")?, part("b")?, q)
    }

    fn exact_parts(&self) -> Option<(String, String)> {
        Some((self.a.to_string(), self.b.to_string()))
    }
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float64;

    fn from_ratio(num: i64, den: i64, _q: u32) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_bigint(n: &BigInt, _q: u32) -> Self {
        n.to_f64().unwrap_or(f64::INFINITY)
    }

    fn q_pow_half(exp: i64, q: u32) -> Self {
        let q = q as f64;
        if exp % 2 == 0 {
            q.powi((exp / 2) as i32)
        } else {
            q.powi(((exp - 1).div_euclid(2)) as i32) * q.sqrt()
        }
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            Err(Error::Arithmetic("division by zero".into()))
        } else {
            Ok(self / rhs)
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn cmp_zero(&self) -> Ordering {
        self.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }

    fn to_json(&self) -> Value {
        json!(self)
    }

    fn from_json(value: &Value, q: u32) -> Result<Self> {
        match value {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("not a float: {n}"))),
            Value::Object(_) => Ok(QSurd::from_json(value, q)?.to_float()),
            other => Err(Error::Parse(format!("not a scalar: {other}"))),
        }
    }

    fn exact_parts(&self) -> Option<(String, String)> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(a: (i64, i64), b: (i64, i64), q: u32) -> QSurd {
        QSurd::new(rational(a.0, a.1), rational(b.0, b.1), q).unwrap()
    }

    #[test]
    fn root_squared_is_q() {
        let r = QSurd::sqrt_q(2);
        assert_eq!(&r * &r, s((2, 1), (0, 1), 2));
    }

    #[test]
    fn norm_form_product() {
        let x = s((1, 1), (1, 1), 2);
        assert_eq!(&x * &x.conjugate(), s((-1, 1), (0, 1), 2));
    }

    #[test]
    fn gamma_for_q2() {
        let q = 2;
        let denom = QSurd::q_pow_half(1, q) + QSurd::q_pow_half(-1, q);
        let gamma = QSurd::from_i64(2, q).checked_div(&denom).unwrap();
        assert_eq!(gamma, s((0, 1), (2, 3), 2));
        assert!((gamma.to_float() - 0.942809).abs() < 1e-6);
    }

    #[test]
    fn perfect_square_folds() {
        let x = s((1, 1), (1, 2), 4);
        assert_eq!(x.b(), &Rational::zero());
        assert_eq!(x.a(), &rational(2, 1));
        assert_eq!(QSurd::q_pow_half(-1, 9), QSurd::from_ratio(1, 3, 9));
    }

    #[test]
    fn division_by_zero_and_mismatch() {
        let x = s((1, 1), (0, 1), 2);
        assert!(matches!(
            x.checked_div(&QSurd::zero(2)),
            Err(Error::Arithmetic(_))
        ));
        assert!(matches!(
            x.checked_add(&QSurd::one(3)),
            Err(Error::Parameter(_))
        ));
        assert!(QSurd::new(rational(1, 1), rational(0, 1), 1).is_err());
    }

    #[test]
    fn half_powers() {
        for q in [2u32, 3, 5] {
            for e in -7i64..=7 {
                let x = QSurd::q_pow_half(e, q);
                let y = QSurd::q_pow_half(-e, q);
                assert_eq!(&x * &y, QSurd::one(q));
                let rel = (x.to_float() - (q as f64).powf(e as f64 / 2.0)).abs()
                    / (q as f64).powf(e as f64 / 2.0);
                assert!(rel < 1e-15);
                let f = f64::q_pow_half(e, q);
                assert!((f - x.to_float()).abs() <= 4.0 * f64::EPSILON * f.abs());
            }
        }
    }

    #[test]
    fn exact_sign() {
        assert_eq!(s((3, 2), (-1, 1), 2).cmp_zero(), Ordering::Greater);
        assert_eq!(s((7, 5), (-1, 1), 2).cmp_zero(), Ordering::Less);
        assert_eq!(s((-3, 2), (1, 1), 2).cmp_zero(), Ordering::Less);
        assert_eq!(QSurd::zero(3).cmp_zero(), Ordering::Equal);
    }

    #[test]
    fn to_float_is_correctly_rounded_on_known_values() {
        assert_eq!(QSurd::sqrt_q(2).to_float(), std::f64::consts::SQRT_2);
        assert_eq!(QSurd::sqrt_q(3).to_float(), 3f64.sqrt());
        assert_eq!(
            QSurd::q_pow_half(-1, 2).to_float(),
            std::f64::consts::FRAC_1_SQRT_2
        );
        assert_eq!(QSurd::from_ratio(1, 3, 2).to_float(), 1.0 / 3.0);
        // √2 − 1 = 0.41421356237309504880...; the float subtraction is off by one ulp.
        assert_eq!(s((-1, 1), (1, 1), 2).to_float(), 0.414_213_562_373_095_03);
        assert_ne!(std::f64::consts::SQRT_2 - 1.0, 0.414_213_562_373_095_03);
    }

    #[test]
    fn json_round_trip() {
        let x = s((1, 2), (-3, 7), 3);
        let v = x.to_json();
        assert_eq!(v, json!({"a": "1/2", "b": "-3/7"}));
        assert_eq!(QSurd::from_json(&v, 3).unwrap(), x);
        let zero = QSurd::from_json(&json!({"a": "0", "b": "0"}), 2).unwrap();
        assert!(zero.is_zero());
        assert!(QSurd::from_json(&json!({"a": "x"}), 2).is_err());
    }

    fn small() -> impl Strategy<Value = (i64, i64)> {
        (-20i64..=20, 1i64..=9)
    }

    fn surd(q: u32) -> impl Strategy<Value = QSurd> {
        (small(), small()).prop_map(move |(a, b)| s(a, b, q))
    }

    fn triple() -> impl Strategy<Value = (QSurd, QSurd, QSurd)> {
        prop::sample::select(vec![2u32, 3, 4, 5]).prop_flat_map(|q| (surd(q), surd(q), surd(q)))
    }

    proptest! {
        #[test]
        fn field_axioms((x, y, z) in triple()) {
            let q = x.q();
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            if !x.is_zero() {
                prop_assert_eq!(&x * &x.inverse().unwrap(), QSurd::one(q));
            }
        }

        #[test]
        fn float_agrees_within_4_ulp(x in surd(2), y in surd(2)) {
            let (xf, yf) = (x.to_float(), y.to_float());
            let sum_tol = 4.0 * f64::EPSILON * xf.abs().max(yf.abs());
            prop_assert!(((&x + &y).to_float() - (xf + yf)).abs() <= sum_tol);
            let prod_tol = 4.0 * f64::EPSILON * (xf * yf).abs();
            prop_assert!(((&x * &y).to_float() - xf * yf).abs() <= prod_tol);
        }
    }
}
