//! Number types the construction is generic over.
//!
//! Every algorithm in this crate runs over a [`Scalar`]: either [`Exact`]
//! (arbitrary-precision rationals, used for certification) or `f64`
//! (used for throughput). Comparisons that certify an inequality go through
//! [`Scalar::le_tol`], which is exact for rationals and carries a relative
//! slack of [`FLOAT_REL_SLACK`] for floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Relative slack applied to every certified inequality in float mode.
pub const FLOAT_REL_SLACK: f64 = 1e-9;

/// Arithmetic mode of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arith {
    Rational,
    Float,
}

impl fmt::Display for Arith {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arith::Rational => "rational",
            Arith::Float => "float",
        })
    }
}

impl FromStr for Arith {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" | "exact" => Ok(Arith::Rational),
            "float" | "f64" => Ok(Arith::Float),
            other => Err(ParseScalarError(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse number: {0}")]
pub struct ParseScalarError(pub String);

/// Ordered field used by all metric computations.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    const ARITH: Arith;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// `num / den` for big integers; `den` must be nonzero.
    fn from_big_ratio(num: BigInt, den: BigInt) -> Self;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    fn total_cmp(&self, other: &Self) -> Ordering;
    /// Accepts integers, decimals, and `p/q`.
    fn parse_text(s: &str) -> Result<Self, ParseScalarError>;
    /// Lossless text form: `p/q` for rationals, shortest round-trip decimal for floats.
    fn to_text(&self) -> String;

    /// `self <= other`, exact or within the float slack.
    fn le_tol(&self, other: &Self) -> bool;

    fn ge_tol(&self, other: &Self) -> bool {
        other.le_tol(self)
    }

    fn eq_tol(&self, other: &Self) -> bool {
        self.le_tol(other) && other.le_tol(self)
    }

    /// `2^k` for any integer `k`.
    fn pow2(k: i32) -> Self {
        let two = Self::from_i64(2);
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc * &two;
        }
        if k < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    /// Row-major square `matrix` times `values`.
    fn mat_vec(matrix: &[Self], values: &[Self]) -> Vec<Self> {
        generic_mat_vec(matrix, values)
    }

    /// `max_i |a_i - b_i|`.
    fn sup_dist_slices(a: &[Self], b: &[Self]) -> Self {
        generic_sup_dist(a, b)
    }

    fn max_of(self, other: Self) -> Self {
        if other.total_cmp(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other.total_cmp(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// Largest `k` with `2^k <= self`. `self` must be positive.
    fn floor_log2(&self) -> i32 {
        debug_assert!(self.total_cmp(&Self::zero()) == Ordering::Greater);
        let mut k = self.to_f64().log2().floor() as i32;
        while Self::pow2(k).total_cmp(self) == Ordering::Greater {
            k -= 1;
        }
        while Self::pow2(k + 1).total_cmp(self) != Ordering::Greater {
            k += 1;
        }
        k
    }
}

impl Scalar for f64 {
    const ARITH: Arith = Arith::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_big_ratio(num: BigInt, den: BigInt) -> Self {
        BigRational::new(num, den).to_f64().unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
    fn parse_text(s: &str) -> Result<Self, ParseScalarError> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().map_err(|_| ParseScalarError(s.to_string()))?;
            let q: f64 = q.trim().parse().map_err(|_| ParseScalarError(s.to_string()))?;
            if q == 0.0 {
                return Err(ParseScalarError(format!("{s}: zero denominator")));
            }
            return Ok(p / q);
        }
        let v: f64 = s.parse().map_err(|_| ParseScalarError(s.to_string()))?;
        if !v.is_finite() {
            return Err(ParseScalarError(format!("{s}: not finite")));
        }
        Ok(v)
    }
    fn to_text(&self) -> String {
        format!("{self}")
    }
    fn le_tol(&self, other: &Self) -> bool {
        let scale = f64::abs(*self).max(f64::abs(*other));
        *self <= *other + FLOAT_REL_SLACK * scale
    }
    fn pow2(k: i32) -> Self {
        2f64.powi(k)
    }
}

fn generic_mat_vec<S: Scalar>(matrix: &[S], values: &[S]) -> Vec<S> {
    matrix
        .chunks(values.len().max(1))
        .map(|row| {
            row.iter()
                .zip(values)
                .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                .fold(S::zero(), |acc, (a, b)| acc + &(a.clone() * b))
        })
        .collect()
}

fn generic_sup_dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(x, y)| (x.clone() - y).abs()).reduce(S::max_of).unwrap_or_else(S::zero)
}

/// Exact `max_i |a_i - b_i|` that only forms exact differences for entries
/// whose float estimate can reach the maximum. The estimate of each
/// difference is within `1e-15 (|a_i| + |b_i|)` of the true value.
fn filtered_sup_dist(a: &[Exact], b: &[Exact]) -> Exact {
    let mut bounds = Vec::with_capacity(a.len());
    let mut floor = f64::NEG_INFINITY;
    for (x, y) in a.iter().zip(b) {
        let (Repr::Small(p), Repr::Small(q)) = (&x.0, &y.0) else {
            return generic_sup_dist(a, b);
        };
        let xf = *p.numer() as f64 / *p.denom() as f64;
        let yf = *q.numer() as f64 / *q.denom() as f64;
        let estimate = (xf - yf).abs();
        let slack = 1e-15 * (xf.abs() + yf.abs());
        floor = floor.max(estimate - slack);
        bounds.push(estimate + slack);
    }
    a.iter()
        .zip(b)
        .zip(&bounds)
        .filter(|(_, &upper)| upper >= floor)
        .map(|((x, y), _)| (x.clone() - y).abs())
        .reduce(Exact::max_of)
        .unwrap_or_else(Exact::zero)
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Integer matrix times small rationals, accumulated in `i128` over a
/// common denominator. `None` when an entry is not a small integer or a
/// product overflows.
fn integer_mat_vec(matrix: &[Exact], values: &[Exact]) -> Option<Vec<Exact>> {
    let mut common: i128 = 1;
    for v in values {
        let Repr::Small(r) = &v.0 else { return None };
        let d = *r.denom() as i128;
        common = (common / gcd_i128(common, d)).checked_mul(d)?;
        if common > i64::MAX as i128 {
            return None;
        }
    }
    let scaled: Vec<i128> = values
        .iter()
        .map(|v| match &v.0 {
            Repr::Small(r) => *r.numer() as i128 * (common / *r.denom() as i128),
            Repr::Big(_) => unreachable!(),
        })
        .collect();
    let mut out = Vec::with_capacity(values.len());
    for row in matrix.chunks(values.len().max(1)) {
        let mut acc: i128 = 0;
        for (m, &x) in row.iter().zip(&scaled) {
            let Repr::Small(r) = &m.0 else { return None };
            if *r.denom() != 1 {
                return None;
            }
            let k = *r.numer() as i128;
            if k != 0 && x != 0 {
                acc = acc.checked_add(k.checked_mul(x)?)?;
            }
        }
        out.push(Exact::from_i128_ratio(acc, common));
    }
    Some(out)
}

/// Exact rational number.
///
/// Values that fit a reduced `i64` fraction stay on a machine-word fast
/// path; anything larger is promoted to a big rational and demoted again
/// when a result fits.
#[derive(Clone)]
pub struct Exact(Repr);

#[derive(Clone)]
enum Repr {
    Small(Ratio<i64>),
    Big(BigRational),
}

impl Exact {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        if num == i64::MIN || den == i64::MIN {
            return Exact::from_big(BigRational::new(num.into(), den.into()));
        }
        Exact(Repr::Small(Ratio::new(num, den)))
    }

    fn from_i128_ratio(num: i128, den: i128) -> Self {
        let g = gcd_i128(num, den).max(1);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            (n, d) = (-n, -d);
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) if n != i64::MIN => Exact(Repr::Small(Ratio::new_raw(n, d))),
            _ => Exact::from_big(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }

    pub fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Exact(Repr::Small(Ratio::new_raw(n, d))),
            _ => Exact(Repr::Big(r)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer_denom(&self) -> (BigInt, BigInt) {
        let b = self.to_big();
        (b.numer().clone(), b.denom().clone())
    }

    fn binop(
        &self,
        rhs: &Self,
        small: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
        big: impl Fn(BigRational, BigRational) -> BigRational,
    ) -> Self {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = small(a, b) {
                if *r.numer() != i64::MIN {
                    return Exact(Repr::Small(r));
                }
            }
        }
        Exact::from_big(big(self.to_big(), rhs.to_big()))
    }
}

impl Default for Exact {
    fn default() -> Self {
        Exact::zero()
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl PartialEq for Exact {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Exact {}

impl PartialOrd for Exact {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exact {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl From<i64> for Exact {
    fn from(v: i64) -> Self {
        Exact::new(v, 1)
    }
}

macro_rules! exact_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<'a> $trait<&'a Exact> for &'a Exact {
            type Output = Exact;
            fn $method(self, rhs: &'a Exact) -> Exact {
                self.binop(rhs, |a, b| a.$checked(b), |a, b| a.$method(b))
            }
        }
        impl<'a> $trait<&'a Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: &'a Exact) -> Exact {
                (&self).$method(rhs)
            }
        }
        impl $trait<Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                (&self).$method(&rhs)
            }
        }
    };
}

exact_binop!(Add, add, checked_add);
exact_binop!(Sub, sub, checked_sub);
exact_binop!(Mul, mul, checked_mul);

impl<'a> Div<&'a Exact> for &'a Exact {
    type Output = Exact;
    fn div(self, rhs: &'a Exact) -> Exact {
        assert!(!rhs.is_zero(), "division by zero");
        self.binop(rhs, |a, b| a.checked_div(b), |a, b| a / b)
    }
}
impl<'a> Div<&'a Exact> for Exact {
    type Output = Exact;
    fn div(self, rhs: &'a Exact) -> Exact {
        (&self).div(rhs)
    }
}
impl Div<Exact> for Exact {
    type Output = Exact;
    fn div(self, rhs: Exact) -> Exact {
        (&self).div(&rhs)
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        match self.0 {
            Repr::Small(r) => Exact(Repr::Small(-r)),
            Repr::Big(r) => Exact::from_big(-r),
        }
    }
}

impl Scalar for Exact {
    const ARITH: Arith = Arith::Rational;

    fn mat_vec(matrix: &[Self], values: &[Self]) -> Vec<Self> {
        integer_mat_vec(matrix, values).unwrap_or_else(|| generic_mat_vec(matrix, values))
    }

    fn sup_dist_slices(a: &[Self], b: &[Self]) -> Self {
        filtered_sup_dist(a, b)
    }

    fn zero() -> Self {
        Exact(Repr::Small(Ratio::zero()))
    }
    fn one() -> Self {
        Exact(Repr::Small(Ratio::one()))
    }
    fn from_i64(v: i64) -> Self {
        Exact::from(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Exact::new(num, den)
    }
    fn from_big_ratio(num: BigInt, den: BigInt) -> Self {
        Exact::from_big(BigRational::new(num, den))
    }
    fn abs(&self) -> Self {
        match &self.0 {
            Repr::Small(r) => Exact(Repr::Small(r.abs())),
            Repr::Big(r) => Exact::from_big(r.abs()),
        }
    }
    fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(r) => r.is_zero(),
        }
    }
    fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn parse_text(s: &str) -> Result<Self, ParseScalarError> {
        let s = s.trim();
        let err = || ParseScalarError(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(ParseScalarError(format!("{s}: zero denominator")));
            }
            return Ok(Exact::from_big(BigRational::new(p, q)));
        }
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| err())? };
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        Ok(Exact::from_big(BigRational::new(numer * sign, denom)))
    }
    fn to_text(&self) -> String {
        match &self.0 {
            Repr::Small(r) if *r.denom() == 1 => r.numer().to_string(),
            Repr::Small(r) => format!("{}/{}", r.numer(), r.denom()),
            Repr::Big(r) if r.denom().is_one() => r.numer().to_string(),
            Repr::Big(r) => format!("{}/{}", r.numer(), r.denom()),
        }
    }
    fn le_tol(&self, other: &Self) -> bool {
        self <= other
    }
    fn pow2(k: i32) -> Self {
        if k.unsigned_abs() < 62 {
            let p = 1i64 << k.unsigned_abs();
            return if k < 0 { Exact::new(1, p) } else { Exact::new(p, 1) };
        }
        let p = BigInt::one() << k.unsigned_abs();
        if k < 0 {
            Exact::from_big(BigRational::new(BigInt::one(), p))
        } else {
            Exact::from_big(BigRational::from_integer(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(Exact::parse_text("3/6").unwrap(), Exact::new(1, 2));
        assert_eq!(Exact::parse_text("-1.25").unwrap(), Exact::new(-5, 4));
        assert_eq!(Exact::parse_text(".5").unwrap(), Exact::new(1, 2));
        assert_eq!(Exact::parse_text("7").unwrap(), Exact::from(7));
        assert!(Exact::parse_text("1/0").is_err());
        assert!(Exact::parse_text("abc").is_err());
        assert!(Exact::parse_text("").is_err());
        assert_eq!(f64::parse_text("1/4").unwrap(), 0.25);
        assert!(f64::parse_text("nan").is_err());
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "-3", "22/7", "-1/1024"] {
            assert_eq!(Exact::parse_text(s).unwrap().to_text(), s);
        }
        let x = 0.1 + 0.2;
        assert_eq!(f64::parse_text(&x.to_text()).unwrap(), x);
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Exact::from(i64::MAX);
        let sum = big.clone() + &big;
        assert_eq!(sum.to_text(), "18446744073709551614");
        let back = sum / &Exact::from(2);
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small(_)));
        let min = Exact::from(i64::MIN + 1) - &Exact::one();
        assert_eq!(min.to_text(), i64::MIN.to_string());
        assert_eq!((-min).to_text(), "9223372036854775808");
    }

    #[test]
    fn integer_mat_vec_matches_generic() {
        let m: Vec<Exact> = [3, -1, 0, 7, 2, 5, -4, 0, 1].iter().map(|&x| Exact::from(x)).collect();
        let v = vec![Exact::new(1, 2), Exact::new(-2, 3), Exact::new(5, 7)];
        assert_eq!(Exact::mat_vec(&m, &v), generic_mat_vec(&m, &v));
        let mut r = m.clone();
        r[1] = Exact::new(1, 3);
        assert_eq!(Exact::mat_vec(&r, &v), generic_mat_vec(&r, &v));
        let huge = vec![Exact::new(i64::MAX, 1), Exact::new(i64::MAX, 1), Exact::new(1, 1)];
        assert_eq!(Exact::mat_vec(&m, &huge), generic_mat_vec(&m, &huge));
    }

    #[test]
    fn filtered_sup_dist_is_exact() {
        let a = vec![Exact::new(1, 3), Exact::new(i64::MAX - 1, i64::MAX), Exact::new(-5, 7)];
        let b = vec![Exact::new(1, 3) - &Exact::new(1, 1 << 60), Exact::new(i64::MAX - 2, i64::MAX), Exact::new(-5, 7)];
        assert_eq!(filtered_sup_dist(&a, &b), generic_sup_dist(&a, &b));
        assert_eq!(filtered_sup_dist(&a, &b), Exact::new(1, 1 << 60));
        assert_eq!(filtered_sup_dist(&[], &[]), Exact::zero());
    }

    #[test]
    fn pow2_and_floor_log2() {
        assert_eq!(Exact::pow2(-3), Exact::new(1, 8));
        assert_eq!(Exact::pow2(70).to_text(), "1180591620717411303424");
        assert_eq!(Exact::from(4).floor_log2(), 2);
        assert_eq!(Exact::new(7, 2).floor_log2(), 1);
        assert_eq!(Exact::new(1, 3).floor_log2(), -2);
        assert_eq!(8.0f64.floor_log2(), 3);
        assert_eq!(7.999f64.floor_log2(), 2);
    }

    #[test]
    fn float_slack_is_relative() {
        assert!(1.0f64.le_tol(&(1.0 - 1e-12)));
        assert!(!1.0f64.le_tol(&(1.0 - 1e-6)));
        assert!(1e6f64.le_tol(&(1e6 - 1e-4)));
        assert!(!Exact::new(1_000_001, 1_000_000).le_tol(&Exact::one()));
    }
}
