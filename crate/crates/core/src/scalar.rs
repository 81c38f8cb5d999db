//! Exact numbers of the form `a + b·√2` with rational `a`, `b`.
//!
//! Every endpoint, offset and measure in the crate is a [`Scalar`]. Ordering is
//! decided exactly: the sign of `a + b√2` follows from the signs of `a` and `b`
//! and, when they disagree, from comparing `a²` with `2b²`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    a: BigRational,
    b: BigRational,
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

impl Scalar {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Scalar { a, b }
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn int(n: i64) -> Self {
        Scalar { a: BigRational::from_integer(BigInt::from(n)), b: BigRational::zero() }
    }

    /// The rational `p/q`. Panics if `q == 0`.
    pub fn frac(p: i64, q: i64) -> Self {
        Scalar { a: ratio(p, q), b: BigRational::zero() }
    }

    /// `p/q + (r/s)·√2`.
    pub fn quad(p: i64, q: i64, r: i64, s: i64) -> Self {
        Scalar { a: ratio(p, q), b: ratio(r, s) }
    }

    pub fn sqrt2() -> Self {
        Scalar { a: BigRational::zero(), b: BigRational::one() }
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar { a: BigRational::from_integer(n), b: BigRational::zero() }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        sign_int(&(self.a.numer() * self.b.denom()), &(self.b.numer() * self.a.denom()))
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn half(&self) -> Scalar {
        let two = BigRational::from_integer(BigInt::from(2));
        Scalar { a: &self.a / &two, b: &self.b / &two }
    }

    pub fn min_of(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max_of(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn recip(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        // 1/(a + b√2) = (a − b√2)/(a² − 2b²); the norm is nonzero since √2 is irrational
        let two = BigRational::from_integer(BigInt::from(2));
        let norm = &self.a * &self.a - &self.b * &self.b * two;
        Some(Scalar { a: &self.a / &norm, b: -&self.b / &norm })
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Option<Scalar> {
        rhs.recip().map(|r| self * &r)
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    /// Largest integer `n` with `n <= self`.
    pub fn floor(&self) -> BigInt {
        let approx = self.to_f64();
        let mut n = if approx.is_finite() {
            BigInt::from(approx.floor() as i64)
        } else {
            // fall back to the integer parts; only hit for astronomically large values
            self.a.floor().to_integer() + (self.b.clone() * BigRational::from_integer(BigInt::from(3)) / BigRational::from_integer(BigInt::from(2))).floor().to_integer()
        };
        while Scalar::from_bigint(n.clone()) > *self {
            n -= 1;
        }
        while Scalar::from_bigint(&n + 1) <= *self {
            n += 1;
        }
        n
    }

    /// Smallest integer `n` with `n >= self`.
    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// `2^-k` for `k >= 0`.
    pub fn pow2_neg(k: u32) -> Scalar {
        let den = BigInt::one() << k;
        Scalar { a: BigRational::new(BigInt::one(), den), b: BigRational::zero() }
    }

    /// Largest power of two `2^-k` (k >= 0) strictly below `bound`; `bound` must be positive.
    pub fn pow2_below(bound: &Scalar) -> Scalar {
        let mut k = 0u32;
        // coarse start from the float value keeps the loop short
        let approx = bound.to_f64();
        if approx.is_finite() && approx > 0.0 && approx < 1.0 {
            k = (-approx.log2()).floor().max(0.0) as u32;
        }
        loop {
            let p = Scalar::pow2_neg(k);
            if &p < bound {
                return p;
            }
            k += 1;
        }
    }

    /// Approximate decimal rendering with 12 significant digits.
    pub fn approx_string(&self) -> String {
        format!("{:.11e}", self.to_f64())
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_ratio(&self.a));
        }
        let mut out = String::new();
        if !self.a.is_zero() {
            out.push_str(&fmt_ratio(&self.a));
            out.push(if self.b.is_negative() { '-' } else { '+' });
        } else if self.b.is_negative() {
            out.push('-');
        }
        let mag = self.b.abs();
        if !mag.is_one() {
            out.push_str(&fmt_ratio(&mag));
            out.push('*');
        }
        out.push_str("rt2");
        f.write_str(&out)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn parse_unsigned_ratio(s: &str, full: &str) -> Result<BigRational, Error> {
    let bad = || Error::ScalarParse(full.to_string());
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|c| c.is_ascii_digit());
    match s.split_once('/') {
        Some((p, q)) => {
            if !digits(p) || !digits(q) {
                return Err(bad());
            }
            let p: BigInt = p.parse().map_err(|_| bad())?;
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            if !digits(s) {
                return Err(bad());
            }
            Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts `p`, `p/q`, `p/q+r/s*rt2`, `-p/q-r/s*rt2`, `rt2`, `r/s*rt2` and
    /// `p/q+rt2`, with surrounding whitespace ignored.
    fn from_str(input: &str) -> Result<Self, Error> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::ScalarParse(input.to_string()));
        }
        // split into signed terms
        let mut terms: Vec<(bool, &str)> = Vec::new();
        let bytes = s.as_bytes();
        let mut start = 0;
        let mut neg = false;
        let mut i = 0;
        if bytes[0] == b'+' || bytes[0] == b'-' {
            neg = bytes[0] == b'-';
            start = 1;
            i = 1;
        }
        while i < bytes.len() {
            if bytes[i] == b'+' || bytes[i] == b'-' {
                terms.push((neg, &s[start..i]));
                neg = bytes[i] == b'-';
                start = i + 1;
            }
            i += 1;
        }
        terms.push((neg, &s[start..]));
        if terms.len() > 2 {
            return Err(Error::ScalarParse(input.to_string()));
        }
        let mut a: Option<BigRational> = None;
        let mut b: Option<BigRational> = None;
        for (neg, t) in terms {
            let (is_root, coef) = if t == "rt2" {
                (true, BigRational::one())
            } else if let Some(c) = t.strip_suffix("*rt2") {
                (true, parse_unsigned_ratio(c, input)?)
            } else {
                (false, parse_unsigned_ratio(t, input)?)
            };
            let coef = if neg { -coef } else { coef };
            let slot = if is_root { &mut b } else { &mut a };
            if slot.is_some() {
                return Err(Error::ScalarParse(input.to_string()));
            }
            *slot = Some(coef);
        }
        Ok(Scalar { a: a.unwrap_or_else(BigRational::zero), b: b.unwrap_or_else(BigRational::zero) })
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sign of `p + r√2` for integers `p`, `r`.
fn sign_int(p: &BigInt, r: &BigInt) -> Ordering {
    let sp = p.sign().cmp(&num_bigint::Sign::NoSign);
    let sr = r.sign().cmp(&num_bigint::Sign::NoSign);
    match (sp, sr) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (x, y) if x == y => x,
        (sp, _) => {
            let lhs = p * p;
            let rhs = (r * r) << 1;
            match lhs.cmp(&rhs) {
                Ordering::Greater => sp,
                Ordering::Less => sp.reverse(),
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

/// `x − y` over the common denominator `den(x)·den(y)`, unreduced.
fn diff_num(x: &BigRational, y: &BigRational) -> (BigInt, BigInt) {
    (x.numer() * y.denom() - y.numer() * x.denom(), x.denom() * y.denom())
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.b == other.b {
            return self.a.cmp(&other.a);
        }
        if self.a == other.a {
            return self.b.cmp(&other.b);
        }
        // sign of (pa/qa) + (pb/qb)·√2 with positive qa, qb equals sign of pa·qb + pb·qa·√2
        let (pa, qa) = diff_num(&self.a, &other.a);
        let (pb, qb) = diff_num(&self.b, &other.b);
        sign_int(&(pa * &qb), &(pb * qa))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                let f: fn(&Scalar, &Scalar) -> Scalar = $body;
                f(self, rhs)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |x, y| Scalar { a: &x.a + &y.a, b: &x.b + &y.b });
forward_binop!(Sub, sub, |x, y| Scalar { a: &x.a - &y.a, b: &x.b - &y.b });
forward_binop!(Mul, mul, |x, y| {
    if x.b.is_zero() && y.b.is_zero() {
        return Scalar { a: &x.a * &y.a, b: BigRational::zero() };
    }
    let two = BigRational::from_integer(BigInt::from(2));
    Scalar { a: &x.a * &y.a + &x.b * &y.b * two, b: &x.a * &y.b + &x.b * &y.a }
});
forward_binop!(Div, div, |x, y| x.checked_div(y).expect("division by zero Scalar"));

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -self.a, b: -self.b }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -&self.a, b: -&self.b }
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.a += &rhs.a;
        self.b += &rhs.b;
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        self.a += rhs.a;
        self.b += rhs.b;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.a -= &rhs.a;
        self.b -= &rhs.b;
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        let mut acc = Scalar::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Lowest common multiple of the rational denominators; handy for bounding growth in tests.
pub fn denominator_lcm(xs: &[Scalar]) -> BigInt {
    xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.a.denom()).lcm(x.b.denom()))
}
