//! Dual-backend scalars: exact rationals, high-precision reals, and a
//! positive-infinity marker.
//!
//! Rational arithmetic is exact. Any operation that mixes a rational with a
//! real produces a real whose `promoted` flag is set, so callers can tell that
//! exactness was lost somewhere upstream. Comparisons that involve a real use
//! the absolute tolerance from [`NumericConfig`].

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const RM: RoundingMode = RoundingMode::ToEven;

/// Precision and comparison tolerance for real-mode scalars.
///
/// Fixed once per process (see [`configure`]); every real operation reads it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericConfig {
    /// Significant decimal digits carried by real scalars.
    pub precision_digits: u32,
    /// Absolute tolerance: `|a - b| <= tolerance` compares equal in real mode.
    pub tolerance: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            precision_digits: 50,
            tolerance: 1e-12,
        }
    }
}

impl NumericConfig {
    fn precision_bits(&self) -> usize {
        (self.precision_digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64
    }
}

static CONFIG: OnceLock<NumericConfig> = OnceLock::new();

/// Installs the process-wide numeric configuration.
///
/// Succeeds if nothing was installed yet or if the same configuration is
/// installed again; otherwise returns the configuration already in force.
pub fn configure(config: NumericConfig) -> Result<(), NumericConfig> {
    let installed = *CONFIG.get_or_init(|| config);
    if installed == config {
        Ok(())
    } else {
        Err(installed)
    }
}

/// The numeric configuration in force (the default if none was installed).
pub fn numeric_config() -> &'static NumericConfig {
    CONFIG.get_or_init(NumericConfig::default)
}

fn prec() -> usize {
    numeric_config().precision_bits()
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

fn bigint_to_float(n: &BigInt, p: usize) -> BigFloat {
    if let Some(small) = n.to_i64() {
        return BigFloat::from_i64(small, p);
    }
    with_consts(|cc| BigFloat::parse(&n.to_string(), Radix::Dec, p, RM, cc))
}

fn rational_to_float(r: &BigRational, p: usize) -> BigFloat {
    let num = bigint_to_float(r.numer(), p);
    let den = bigint_to_float(r.denom(), p);
    num.div(&den, p, RM)
}

fn tolerance_float() -> BigFloat {
    BigFloat::from_f64(numeric_config().tolerance, prec())
}

/// A high-precision real number.
#[derive(Clone, Debug)]
pub struct Real {
    value: BigFloat,
    promoted: bool,
}

impl Real {
    fn new(value: BigFloat, promoted: bool) -> Self {
        Real { value, promoted }
    }

    pub fn value(&self) -> &BigFloat {
        &self.value
    }

    /// True if some rational operand was coerced to produce this value.
    pub fn promoted(&self) -> bool {
        self.promoted
    }
}

/// Exact rational, high-precision real, or `+∞`.
#[derive(Clone, Debug)]
pub enum Scalar {
    Rational(BigRational),
    Real(Real),
    Infinity,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("empty scalar literal")]
    Empty,
    #[error("malformed scalar literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("square root of a negative number in `{0}`")]
    NegativeSqrt(String),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den` as an exact rational. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Rational(r)
    }

    /// A real scalar holding exactly the binary value of `x`.
    pub fn real_from_f64(x: f64) -> Self {
        Scalar::Real(Real::new(BigFloat::from_f64(x, prec()), false))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rational(_))
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Scalar::Real(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Scalar::Infinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    /// True if this real came out of mixed rational/real arithmetic.
    pub fn was_promoted(&self) -> bool {
        matches!(self, Scalar::Real(r) if r.promoted)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Explicit conversion to the real backend. Not a promotion.
    pub fn to_real(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Real(Real::new(rational_to_float(r, prec()), false)),
            other => other.clone(),
        }
    }

    fn float(&self) -> BigFloat {
        match self {
            Scalar::Rational(r) => rational_to_float(r, prec()),
            Scalar::Real(r) => r.value.clone(),
            Scalar::Infinity => BigFloat::from_f64(f64::INFINITY, prec()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Real(r) => r.value.to_string().parse().unwrap_or(f64::NAN),
            Scalar::Infinity => f64::INFINITY,
        }
    }

    /// Integer value if this is an exact rational with unit denominator.
    pub fn to_integer(&self) -> Option<BigInt> {
        match self {
            Scalar::Rational(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    /// Total order with tolerance: reals within `ε` compare equal.
    pub fn tol_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Infinity, Scalar::Infinity) => Ordering::Equal,
            (Scalar::Infinity, _) => Ordering::Greater,
            (_, Scalar::Infinity) => Ordering::Less,
            (Scalar::Rational(a), Scalar::Rational(b)) => a.cmp(b),
            _ => {
                let p = prec();
                let diff = self.float().sub(&other.float(), p, RM);
                let abs = diff.abs();
                if abs.cmp(&tolerance_float()).is_some_and(|c| c <= 0) {
                    Ordering::Equal
                } else if diff.is_negative() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.tol_cmp(&Scalar::zero()) == Ordering::Equal
    }

    pub fn is_positive(&self) -> bool {
        self.tol_cmp(&Scalar::zero()) == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.tol_cmp(&Scalar::zero()) == Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn recip(&self) -> Scalar {
        &Scalar::one() / self
    }

    pub fn powi(&self, exp: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    pub fn square(&self) -> Scalar {
        self * self
    }

    /// Square root: exact for rational perfect squares, real otherwise
    /// (the result is then flagged as promoted).
    ///
    /// Panics on negative input.
    pub fn sqrt(&self) -> Scalar {
        assert!(!self.is_negative(), "square root of a negative scalar");
        match self {
            Scalar::Rational(r) => {
                let (n, d) = (r.numer(), r.denom());
                let (sn, sd) = (n.sqrt(), d.sqrt());
                if &(&sn * &sn) == n && &(&sd * &sd) == d {
                    Scalar::Rational(BigRational::new(sn, sd))
                } else {
                    let p = prec();
                    Scalar::Real(Real::new(rational_to_float(r, p).sqrt(p, RM), true))
                }
            }
            Scalar::Real(r) => {
                let p = prec();
                Scalar::Real(Real::new(r.value.abs().sqrt(p, RM), r.promoted))
            }
            Scalar::Infinity => Scalar::Infinity,
        }
    }

    /// `2·cos(π/m)`, exact where that is rational (m ≤ 3), real otherwise.
    pub fn two_cos_pi_over(m: u32) -> Scalar {
        match m {
            0 => panic!("2cos(pi/m) needs m >= 1"),
            1 => Scalar::int(-2),
            2 => Scalar::zero(),
            3 => Scalar::one(),
            _ => {
                let p = prec();
                let value = with_consts(|cc| {
                    let pi = cc.pi(p, RM);
                    let angle = pi.div(&BigFloat::from_u32(m, p), p, RM);
                    angle.cos(p, RM, cc).mul(&BigFloat::from_u32(2, p), p, RM)
                });
                Scalar::Real(Real::new(value, false))
            }
        }
    }

    /// Parses `p/q`, integers, decimals (exactly, as rationals), `inf`,
    /// `sqrt(<literal>)` and `2cos(pi/<m>)`.
    pub fn parse(text: &str) -> Result<Scalar, ScalarParseError> {
        let s = text.trim();
        if s.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        if matches!(s, "inf" | "+inf" | "infinity" | "∞") {
            return Ok(Scalar::Infinity);
        }
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let radicand = Scalar::parse(inner)?;
            if radicand.is_negative() {
                return Err(ScalarParseError::NegativeSqrt(s.to_string()));
            }
            return Ok(radicand.sqrt());
        }
        if let Some(inner) = s.strip_prefix("2cos(pi/").and_then(|r| r.strip_suffix(')')) {
            let m: u32 = inner
                .trim()
                .parse()
                .map_err(|_| ScalarParseError::Malformed(s.to_string()))?;
            if m == 0 {
                return Err(ScalarParseError::ZeroDenominator(s.to_string()));
            }
            return Ok(Scalar::two_cos_pi_over(m));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num = parse_decimal(num.trim()).ok_or_else(|| ScalarParseError::Malformed(s.to_string()))?;
            let den = parse_decimal(den.trim()).ok_or_else(|| ScalarParseError::Malformed(s.to_string()))?;
            if den.is_zero() {
                return Err(ScalarParseError::ZeroDenominator(s.to_string()));
            }
            return Ok(Scalar::Rational(num / den));
        }
        parse_decimal(s)
            .map(Scalar::Rational)
            .ok_or_else(|| ScalarParseError::Malformed(s.to_string()))
    }

    /// Decimal rendering with `digits` significant digits (reals), or the
    /// exact fraction string (rationals).
    pub fn to_decimal_string(&self, digits: usize) -> String {
        match self {
            Scalar::Rational(r) => rational_decimal(r, digits),
            Scalar::Real(r) => float_decimal(&r.value, digits),
            Scalar::Infinity => "inf".to_string(),
        }
    }
}

/// Exact decimal literal (optional sign, fraction, exponent) to a rational.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

fn rational_decimal(r: &BigRational, digits: usize) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    float_decimal(&rational_to_float(r, prec()), digits)
}

/// Renders a float in positional notation rounded to `digits` significant
/// digits, falling back to scientific notation for extreme exponents.
fn float_decimal(x: &BigFloat, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    // astro-float prints `[-]d.ddd...e[+-]x`
    let raw = x.to_string();
    let (negative, body) = match raw.strip_prefix('-') {
        Some(b) => (true, b.to_string()),
        None => (false, raw.clone()),
    };
    let Some((mant, exp)) = body.split_once('e') else {
        return raw;
    };
    let Ok(exp) = exp.parse::<i64>() else {
        return raw;
    };
    let mut mant_digits: Vec<u8> = mant.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    let mut exp = exp;
    let digits = digits.max(1);
    if mant_digits.len() > digits {
        let round_up = mant_digits[digits] >= 5;
        mant_digits.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    mant_digits.insert(0, 1);
                    mant_digits.truncate(digits);
                    exp += 1;
                    break;
                }
                i -= 1;
                if mant_digits[i] == 9 {
                    mant_digits[i] = 0;
                } else {
                    mant_digits[i] += 1;
                    break;
                }
            }
        }
    }
    while mant_digits.len() > 1 && *mant_digits.last().unwrap() == 0 {
        mant_digits.pop();
    }
    let sign = if negative { "-" } else { "" };
    let text: String = mant_digits.iter().map(|d| char::from(b'0' + d)).collect();
    if !(-20..=40).contains(&exp) {
        let (head, tail) = text.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{text}")
    } else {
        let int_len = exp as usize + 1;
        if text.len() <= int_len {
            format!("{sign}{text}{}", "0".repeat(int_len - text.len()))
        } else {
            format!("{sign}{}.{}", &text[..int_len], &text[int_len..])
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Real(r) => {
                let digits = numeric_config().precision_digits as usize;
                f.write_str(&float_decimal(&r.value, digits))
            }
            Scalar::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scalar::parse(s)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.tol_cmp(other) == Ordering::Equal
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.tol_cmp(other))
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Rational(r)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        let value = Scalar::parse(&text).map_err(serde::de::Error::custom)?;
        // a decimal string that came from a real value stays real
        if text.contains('.') && !text.contains('/') {
            return Ok(value.to_real());
        }
        Ok(value)
    }
}

fn binary_op(
    lhs: &Scalar,
    rhs: &Scalar,
    exact: impl Fn(&BigRational, &BigRational) -> BigRational,
    float: impl Fn(&BigFloat, &BigFloat, usize) -> BigFloat,
    infinite: impl Fn(&Scalar, &Scalar) -> Scalar,
) -> Scalar {
    match (lhs, rhs) {
        (Scalar::Infinity, _) | (_, Scalar::Infinity) => infinite(lhs, rhs),
        (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(exact(a, b)),
        (Scalar::Real(a), Scalar::Real(b)) => {
            Scalar::Real(Real::new(float(&a.value, &b.value, prec()), a.promoted || b.promoted))
        }
        (Scalar::Real(a), Scalar::Rational(b)) => {
            let p = prec();
            Scalar::Real(Real::new(float(&a.value, &rational_to_float(b, p), p), true))
        }
        (Scalar::Rational(a), Scalar::Real(b)) => {
            let p = prec();
            Scalar::Real(Real::new(float(&rational_to_float(a, p), &b.value, p), true))
        }
    }
}

fn add_scalars(a: &Scalar, b: &Scalar) -> Scalar {
    binary_op(
        a,
        b,
        |x, y| x + y,
        |x, y, p| x.add(y, p, RM),
        |_, _| Scalar::Infinity,
    )
}

fn sub_scalars(a: &Scalar, b: &Scalar) -> Scalar {
    binary_op(
        a,
        b,
        |x, y| x - y,
        |x, y, p| x.sub(y, p, RM),
        |x, y| match (x, y) {
            (Scalar::Infinity, y) if y.is_finite() => Scalar::Infinity,
            _ => panic!("undefined subtraction involving infinity"),
        },
    )
}

fn mul_scalars(a: &Scalar, b: &Scalar) -> Scalar {
    binary_op(
        a,
        b,
        |x, y| x * y,
        |x, y, p| x.mul(y, p, RM),
        |x, y| {
            let finite = if x.is_infinite() { y } else { x };
            if finite.is_infinite() || finite.is_positive() {
                Scalar::Infinity
            } else {
                panic!("infinity times a non-positive scalar")
            }
        },
    )
}

fn div_scalars(a: &Scalar, b: &Scalar) -> Scalar {
    assert!(!b.is_zero() || b.is_infinite(), "division by zero scalar");
    binary_op(
        a,
        b,
        |x, y| x / y,
        |x, y, p| x.div(y, p, RM),
        |x, y| match (x, y) {
            (Scalar::Infinity, y) if y.is_finite() && y.is_positive() => Scalar::Infinity,
            (x, Scalar::Infinity) if x.is_finite() => Scalar::zero(),
            _ => panic!("undefined division involving infinity"),
        },
    )
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $func:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                $func(self, rhs)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                $func(&self, &rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                $func(&self, rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                $func(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_scalars);
forward_binop!(Sub, sub, sub_scalars);
forward_binop!(Mul, mul, mul_scalars);
forward_binop!(Div, div, div_scalars);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r.clone()),
            Scalar::Real(r) => Scalar::Real(Real::new(r.value.clone().neg(), r.promoted)),
            Scalar::Infinity => panic!("negative infinity is not representable"),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}
