//! Scalar abstraction shared by scoring, strategies and the solver.
//!
//! Everything numeric in the crate is written once against [`Scalar`] and
//! instantiated either with exact big rationals ([`Exact`]) or with `f64`.
//! Exact mode is what the identity checks run on; `f64` is the opt-in fast
//! path for large Monte Carlo runs and larger solver instances.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

pub type Exact = BigRational;

/// Comparison tolerance applied by certificate checks in float mode.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

pub trait Scalar:
    Clone + Debug + PartialOrd + Signed + Send + Sync + for<'a> std::iter::Sum<&'a Self> + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &BigRational) -> Self;

    /// Finite floats only. The conversion is exact for [`Exact`].
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Exact value; floats convert to their binary fraction.
    fn to_exact(&self) -> BigRational;

    /// `ceil(self * n)`, computed without rounding error.
    fn ceil_scaled(&self, n: u64) -> i64;

    fn sqrt_f64(&self) -> f64 {
        self.to_f64().sqrt()
    }

    /// Zero for exact scalars, [`FLOAT_TOLERANCE`] otherwise.
    fn tolerance() -> Self;

    /// `"num/den"` form when the value is exact.
    fn rational_string(&self) -> Option<String>;

    /// Probability-style text: `"num/den"` when exact, shortest decimal
    /// otherwise.
    fn to_plain_string(&self) -> String {
        self.rational_string().unwrap_or_else(|| format!("{}", self.to_f64()))
    }

    fn to_json(&self) -> serde_json::Value {
        match self.rational_string() {
            Some(r) => json!({ "rational": r, "decimal": round_sig(self.to_f64(), 12) }),
            None => json!({ "decimal": round_sig(self.to_f64(), 12) }),
        }
    }

    fn approx_le(&self, other: &Self) -> bool {
        *self <= other.clone() + Self::tolerance()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> BigRational {
        self.clone()
    }

    fn ceil_scaled(&self, n: u64) -> i64 {
        let scaled = self * BigRational::from_integer(BigInt::from(n));
        scaled
            .ceil()
            .to_integer()
            .to_i64()
            .expect("scaled value fits in i64")
    }

    fn sqrt_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN).sqrt()
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn rational_string(&self) -> Option<String> {
        Some(format_rational(self))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_exact(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite float")
    }

    fn ceil_scaled(&self, n: u64) -> i64 {
        // The rounded product can only land on the wrong side of an integer
        // when it is itself that integer; the fma residual settles it.
        let m = n as f64;
        let prod = self * m;
        let err = self.mul_add(m, -prod);
        let c = prod.ceil();
        if c == prod && err > 0.0 {
            c as i64 + 1
        } else {
            c as i64
        }
    }

    fn tolerance() -> Self {
        FLOAT_TOLERANCE
    }

    fn rational_string(&self) -> Option<String> {
        None
    }
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"num/den"`, an integer, or a plain decimal such as `0.375` or
/// `-1.5e-2` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).ok()?;
        let den = BigInt::from_str(den.trim()).ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
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
    let mut numer = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut denom = BigInt::one();
    if scale >= 0 {
        numer *= num_traits::pow(ten, scale as usize);
    } else {
        denom = num_traits::pow(ten, (-scale) as usize);
    }
    if neg {
        numer = -numer;
    }
    let r = BigRational::new(numer, denom);
    Some(r)
}

/// Decimal rendering with `sig` significant digits and trailing zeros trimmed.
/// `x` rounded to `sig` significant digits.
pub fn round_sig(x: f64, sig: usize) -> f64 {
    format_sig(x, sig).parse().unwrap_or(x)
}

/// Rounds every non-integer number in `v` to `sig` significant digits.
pub fn round_json(v: &mut serde_json::Value, sig: usize) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_sig(x, sig)) {
                *n = r;
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(|x| round_json(x, sig)),
        serde_json::Value::Object(map) => map.values_mut().for_each(|x| round_json(x, sig)),
        _ => {}
    }
}

pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Lowest-terms rational for `num/den`, used by callers that prefer
/// integers over `BigInt`.
pub fn ratio(num: i64, den: i64) -> Exact {
    let g = num.gcd(&den).max(1);
    BigRational::new(BigInt::from(num / g), BigInt::from(den / g))
}
