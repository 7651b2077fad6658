//! Exact and approximate scalars, and the first-order dual numbers `a + b·ε`
//! used for social weights and costs.
//!
//! `ε` stands for an arbitrarily small positive quantity. Values are compared
//! lexicographically: first by the standard part, then by the `ε` coefficient.
//! This is exactly the order of `a + b·ε` for every sufficiently small `ε > 0`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Comparison tolerance used whenever one side of a comparison is a float.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Convenience constructor for an exact rational.
pub fn rat(numer: i64, denom: i64) -> Rational64 {
    Rational64::new(numer, denom)
}

/// A scalar that is either an exact rational or a binary float.
///
/// Arithmetic between two exact values stays exact; anything touching a float
/// becomes a float. Float comparisons treat values within
/// [`FLOAT_TOLERANCE`] as equal.
#[derive(Clone, Copy, Debug)]
pub enum Scalar {
    Exact(Rational64),
    Float(f64),
}

impl Scalar {
    pub const ZERO: Scalar = Scalar::Exact(Rational64::new_raw(0, 1));
    pub const ONE: Scalar = Scalar::Exact(Rational64::new_raw(1, 1));

    pub fn int(v: i64) -> Self {
        Scalar::Exact(Rational64::from_integer(v))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(f) => f,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(self) -> Option<Rational64> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self.cmp(&Scalar::ZERO) == Ordering::Equal
    }

    pub fn signum(self) -> Ordering {
        self.cmp(&Scalar::ZERO)
    }

    pub fn abs(self) -> Self {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        }
    }

    /// Division; `None` when the divisor is zero.
    pub fn checked_div(self, rhs: Scalar) -> Option<Scalar> {
        if rhs.is_zero() {
            return None;
        }
        Some(match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a / b),
            (a, b) => Scalar::Float(a.to_f64() / b.to_f64()),
        })
    }
}

impl From<Rational64> for Scalar {
    fn from(r: Rational64) -> Self {
        Scalar::Exact(r)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (a, b) => {
                let (x, y) = (a.to_f64(), b.to_f64());
                if (x - y).abs() <= FLOAT_TOLERANCE {
                    Ordering::Equal
                } else {
                    x.partial_cmp(&y).unwrap_or(Ordering::Equal)
                }
            }
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (a, b) => Scalar::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Parses `p/q`, an integer, or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational64, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() && int_digits.is_empty() {
            return Err(bad());
        }
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || frac.len() > 15
        {
            return Err(bad());
        }
        let denom = 10i64.pow(frac.len() as u32);
        let whole: i64 = if int_digits.is_empty() { 0 } else { int_digits.parse().map_err(|_| bad())? };
        let part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let numer = whole.checked_mul(denom).and_then(|w| w.checked_add(part)).ok_or_else(bad)?;
        let r = Rational64::new(numer, denom);
        return Ok(if negative { -r } else { r });
    }
    s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad())
}

/// A first-order dual number `standard + eps_coeff·ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dual {
    pub standard: Scalar,
    pub eps_coeff: Scalar,
}

/// Weight `f_ij` of a social range matrix.
pub type SocialWeight = Dual;
/// Actual, perceived, or social cost.
pub type Cost = Dual;

impl Dual {
    pub const ZERO: Dual = Dual { standard: Scalar::ZERO, eps_coeff: Scalar::ZERO };
    pub const ONE: Dual = Dual { standard: Scalar::ONE, eps_coeff: Scalar::ZERO };
    /// The bare infinitesimal `ε`.
    pub const EPS: Dual = Dual { standard: Scalar::ZERO, eps_coeff: Scalar::ONE };

    pub fn new(standard: impl Into<Scalar>, eps_coeff: impl Into<Scalar>) -> Self {
        Dual { standard: standard.into(), eps_coeff: eps_coeff.into() }
    }

    pub fn real(standard: impl Into<Scalar>) -> Self {
        Dual { standard: standard.into(), eps_coeff: Scalar::ZERO }
    }

    pub fn int(v: i64) -> Self {
        Dual::real(Scalar::int(v))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Dual::real(rat(numer, denom))
    }

    /// `coeff·ε`.
    pub fn eps(coeff: impl Into<Scalar>) -> Self {
        Dual { standard: Scalar::ZERO, eps_coeff: coeff.into() }
    }

    pub fn has_eps(self) -> bool {
        !self.eps_coeff.is_zero()
    }

    pub fn is_zero(self) -> bool {
        self.standard.is_zero() && self.eps_coeff.is_zero()
    }

    pub fn is_exact(self) -> bool {
        self.standard.is_exact() && self.eps_coeff.is_exact()
    }

    /// Strictly positive under the lexicographic order.
    pub fn is_positive(self) -> bool {
        self > Dual::ZERO
    }

    pub fn is_negative(self) -> bool {
        self < Dual::ZERO
    }

    pub fn scale(self, k: impl Into<Scalar>) -> Self {
        let k = k.into();
        Dual { standard: self.standard * k, eps_coeff: self.eps_coeff * k }
    }

    /// Product of two duals. Rejected when both carry an `ε` part, since the
    /// `ε²` term is outside the first-order model.
    pub fn checked_mul(self, rhs: Dual) -> Result<Dual, Error> {
        if self.has_eps() && rhs.has_eps() {
            return Err(Error::EpsilonSquared);
        }
        Ok(Dual {
            standard: self.standard * rhs.standard,
            eps_coeff: self.standard * rhs.eps_coeff + self.eps_coeff * rhs.standard,
        })
    }

    /// Evaluates the dual at a concrete numeric `ε`.
    pub fn evaluate(self, eps: f64) -> f64 {
        self.standard.to_f64() + self.eps_coeff.to_f64() * eps
    }

    /// Parses a weight token: `a`, `eps`, `b*eps`, `a+b*eps`, `a-eps`, ...
    /// Rationals are written `p/q` or as decimals. Exactly one standard term
    /// and one `ε` term are allowed.
    pub fn parse(token: &str) -> Result<Dual, Error> {
        parse_dual(token, |s| parse_rational(s).map(Scalar::Exact))
    }

    /// Parses the same grammar with float-valued coefficients.
    pub fn parse_approx(token: &str) -> Result<Dual, Error> {
        parse_dual(token, |s| {
            s.trim().parse::<f64>().map(Scalar::Float).map_err(|_| Error::Parse(format!("invalid number `{s}`")))
        })
    }
}

fn parse_dual(token: &str, number: impl Fn(&str) -> Result<Scalar, Error>) -> Result<Dual, Error> {
    let compact: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    let compact = compact.replace('ε', "eps");
    let bad = || Error::Parse(format!("invalid weight token `{token}`"));
    if compact.is_empty() {
        return Err(bad());
    }
    // Split into signed terms at '+'/'-' that are not part of an exponent.
    let bytes = compact.as_bytes();
    let mut terms = Vec::new();
    let mut start = 0;
    for idx in 1..bytes.len() {
        let c = bytes[idx];
        let prev = bytes[idx - 1];
        if (c == b'+' || c == b'-') && prev != b'e' && prev != b'E' && prev != b'*' && prev != b'/' {
            terms.push(&compact[start..idx]);
            start = idx;
        }
    }
    terms.push(&compact[start..]);

    let mut standard: Option<Scalar> = None;
    let mut eps: Option<Scalar> = None;
    for term in terms {
        let (negative, body) = match term.as_bytes().first() {
            Some(b'+') => (false, &term[1..]),
            Some(b'-') => (true, &term[1..]),
            _ => (false, term),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let sign = |v: Scalar| if negative { -v } else { v };
        if let Some(coeff) = body.strip_suffix("eps") {
            if eps.is_some() {
                return Err(bad());
            }
            let coeff = match coeff.strip_suffix('*') {
                Some(c) if !c.is_empty() => number(c)?,
                Some(_) => return Err(bad()),
                None if coeff.is_empty() => Scalar::ONE,
                None => return Err(bad()),
            };
            eps = Some(sign(coeff));
        } else {
            if standard.is_some() || body.contains("eps") {
                return Err(bad());
            }
            standard = Some(sign(number(body)?));
        }
    }
    Ok(Dual { standard: standard.unwrap_or(Scalar::ZERO), eps_coeff: eps.unwrap_or(Scalar::ZERO) })
}

impl FromStr for Dual {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Dual::parse(s)
    }
}

impl Ord for Dual {
    fn cmp(&self, other: &Self) -> Ordering {
        self.standard.cmp(&other.standard).then_with(|| self.eps_coeff.cmp(&other.eps_coeff))
    }
}

impl PartialOrd for Dual {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual { standard: self.standard + rhs.standard, eps_coeff: self.eps_coeff + rhs.eps_coeff }
    }
}

impl AddAssign for Dual {
    fn add_assign(&mut self, rhs: Dual) {
        *self = *self + rhs;
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        self + (-rhs)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { standard: -self.standard, eps_coeff: -self.eps_coeff }
    }
}

impl Mul<Scalar> for Dual {
    type Output = Dual;
    fn mul(self, rhs: Scalar) -> Dual {
        self.scale(rhs)
    }
}

impl std::iter::Sum for Dual {
    fn sum<I: Iterator<Item = Dual>>(iter: I) -> Dual {
        iter.fold(Dual::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Dual {
    /// Canonical form, re-parseable by [`Dual::parse`]: `3/2`, `eps`,
    /// `-1/2*eps`, `1+2*eps`, `1-eps`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eps = self.eps_coeff;
        if eps.is_zero() {
            return write!(f, "{}", self.standard);
        }
        let coeff = |v: Scalar| if v == Scalar::ONE { String::new() } else { format!("{v}*") };
        if self.standard.is_zero() {
            if eps == -Scalar::ONE {
                return write!(f, "-eps");
            }
            return write!(f, "{}eps", coeff(eps));
        }
        if eps.signum() == Ordering::Less {
            write!(f, "{}-{}eps", self.standard, coeff(-eps))
        } else {
            write!(f, "{}+{}eps", self.standard, coeff(eps))
        }
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Dual::ZERO
    }
    fn is_zero(&self) -> bool {
        Dual::is_zero(*self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_tokens() {
        assert_eq!(Dual::parse("3/2").unwrap(), Dual::ratio(3, 2));
        assert_eq!(Dual::parse("eps").unwrap(), Dual::EPS);
        assert_eq!(Dual::parse("-eps").unwrap(), Dual::eps(-1));
        assert_eq!(Dual::parse("1/2+3*eps").unwrap(), Dual::new(rat(1, 2), 3));
        assert_eq!(Dual::parse("0.25 - 1/3*eps").unwrap(), Dual::new(rat(1, 4), rat(-1, 3)));
        assert_eq!(Dual::parse("2*eps+1").unwrap(), Dual::new(1, 2));
        assert_eq!(Dual::parse("-1.5").unwrap(), Dual::ratio(-3, 2));
        assert_eq!(Dual::parse("ε").unwrap(), Dual::EPS);
    }

    #[test]
    fn rejects_malformed_tokens() {
        for bad in ["", "1+eps+eps", "1+2", "eps*2", "*eps", "1/0", "abc", "1+", "--1", "1.2.3"] {
            assert!(Dual::parse(bad).is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(Dual::ratio(6, 4).to_string(), "3/2");
        assert_eq!(Dual::int(0).to_string(), "0");
        assert_eq!(Dual::EPS.to_string(), "eps");
        assert_eq!(Dual::eps(-1).to_string(), "-eps");
        assert_eq!(Dual::new(1, rat(-1, 2)).to_string(), "1-1/2*eps");
        assert_eq!(Dual::new(-2, 1).to_string(), "-2+eps");
    }

    #[test]
    fn lexicographic_order() {
        assert!(Dual::EPS > Dual::ZERO);
        assert!(Dual::new(0, 100) < Dual::ratio(1, 1000));
        assert!(Dual::new(1, -5) < Dual::int(1));
        assert!(Dual::new(-1, 5) < Dual::ZERO);
    }

    #[test]
    fn epsilon_squared_is_rejected() {
        assert!(matches!(Dual::EPS.checked_mul(Dual::new(1, 1)), Err(Error::EpsilonSquared)));
        assert_eq!(Dual::EPS.checked_mul(Dual::int(-3)).unwrap(), Dual::eps(-3));
        assert_eq!(Dual::new(2, 1).checked_mul(Dual::ratio(1, 2)).unwrap(), Dual::new(1, rat(1, 2)));
    }

    #[test]
    fn float_comparisons_use_tolerance() {
        assert_eq!(Scalar::Float(0.5 + 1e-12), Scalar::Exact(rat(1, 2)));
        assert!(Scalar::Float(0.5 + 1e-6) > Scalar::Exact(rat(1, 2)));
    }

    fn small_rational() -> impl Strategy<Value = Rational64> {
        (-50i64..=50, 1i64..=12).prop_map(|(p, q)| rat(p, q))
    }

    fn dual() -> impl Strategy<Value = Dual> {
        (small_rational(), small_rational()).prop_map(|(a, b)| Dual::new(a, b))
    }

    proptest! {
        #[test]
        fn order_matches_small_numeric_epsilon(a in dual(), b in dual()) {
            let gap = (a.standard - b.standard).abs().to_f64();
            prop_assume!(gap == 0.0 || gap >= 1e-6);
            let (x, y) = (a.evaluate(1e-9), b.evaluate(1e-9));
            match a.cmp(&b) {
                Ordering::Less => prop_assert!(x < y),
                Ordering::Greater => prop_assert!(x > y),
                Ordering::Equal => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn display_parse_round_trip(a in dual()) {
            prop_assert_eq!(Dual::parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn addition_is_componentwise(a in dual(), b in dual()) {
            let s = a + b;
            prop_assert_eq!(s.standard, a.standard + b.standard);
            prop_assert_eq!(s.eps_coeff, a.eps_coeff + b.eps_coeff);
            prop_assert_eq!(s - b, a);
        }
    }
}
