//! Exact dyadic rationals `m * 2^e`.
//!
//! A [`Dyadic`] is kept in canonical form: the mantissa is odd, or the value is
//! zero and both mantissa and exponent are zero. Equality of values is
//! therefore structural equality. The set is closed under `+`, `-` and `*`;
//! quotients and square roots are only available as directed roundings to a
//! requested number of fractional bits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::cost;

/// Largest admissible magnitude of a canonical exponent.
pub const MAX_EXPONENT: i64 = 1 << 31;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseDyadicError {
    #[error("empty input")]
    Empty,
    #[error("malformed dyadic literal `{0}`")]
    Malformed(String),
    #[error("`{literal}` is not a dyadic rational; nearest multiple of 2^-{bits} is {nearest}")]
    NotDyadic {
        literal: String,
        bits: u32,
        nearest: String,
    },
    #[error("exponent out of range in `{0}`")]
    ExponentRange(String),
}

fn bits_of(m: &BigInt) -> u64 {
    m.bits().max(1)
}

impl Dyadic {
    /// Builds `mantissa * 2^exponent` and canonicalizes it.
    ///
    /// Panics when the canonical exponent leaves `[-MAX_EXPONENT, MAX_EXPONENT]`.
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        let (mantissa, exponent) = if tz > 0 {
            (mantissa >> tz, exponent + tz as i64)
        } else {
            (mantissa, exponent)
        };
        assert!(
            exponent.abs() <= MAX_EXPONENT,
            "dyadic exponent {exponent} out of range"
        );
        Dyadic { mantissa, exponent }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Self::new(v, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Self::new(BigInt::one(), e)
    }

    /// `m * 2^e` for a machine-sized mantissa.
    pub fn from_parts(m: i64, e: i64) -> Self {
        Self::new(BigInt::from(m), e)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `2^k` (exact).
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self::new(self.mantissa.clone(), self.exponent + k)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Dyadic::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `floor(log2 |x|)`, or `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mantissa.bits() as i64 - 1 + self.exponent)
        }
    }

    /// Smallest `k` with `|x| <= 2^k`, or `None` for zero.
    pub fn ceil_log2(&self) -> Option<i64> {
        let fl = self.floor_log2()?;
        if self.mantissa.abs().is_one() {
            Some(fl)
        } else {
            Some(fl + 1)
        }
    }

    /// Number of mantissa bits; a crude size measure used by the cost model.
    pub fn size_bits(&self) -> u64 {
        bits_of(&self.mantissa)
    }

    /// Integer `N` with `x = N * 2^-shift`; requires `shift >= -exponent`.
    fn scaled_to(&self, shift: i64) -> BigInt {
        let s = self.exponent + shift;
        debug_assert!(s >= 0);
        &self.mantissa << (s as u64)
    }

    fn shift_right_floor(m: &BigInt, s: u64) -> BigInt {
        // floor division by 2^s, correct for negative values.
        if m.is_negative() {
            let d = BigInt::one() << s;
            m.div_floor(&d)
        } else {
            m >> s
        }
    }

    /// Largest multiple of `2^-n` not exceeding `x`.
    pub fn floor_to(&self, n: i64) -> Self {
        if self.exponent >= -n {
            return self.clone();
        }
        let s = (-n - self.exponent) as u64;
        cost::charge(self.size_bits());
        Self::new(Self::shift_right_floor(&self.mantissa, s), -n)
    }

    /// Smallest multiple of `2^-n` not below `x`.
    pub fn ceil_to(&self, n: i64) -> Self {
        -(-self).floor_to(n)
    }

    /// Nearest multiple of `2^-n`, ties away from zero.
    ///
    /// The result satisfies `|round_to(x, n) - x| <= 2^-(n+1)` and has
    /// exponent at least `-n`.
    pub fn round_to(&self, n: i64) -> Self {
        if self.exponent >= -n {
            return self.clone();
        }
        let s = (-n - self.exponent) as u64;
        cost::charge(self.size_bits());
        let half = BigInt::one() << (s - 1);
        let mag = (self.mantissa.abs() + half) >> s;
        let m = if self.is_negative() { -mag } else { mag };
        Self::new(m, -n)
    }

    /// `floor(x)` as an integer.
    pub fn floor_int(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << (self.exponent as u64)
        } else {
            Self::shift_right_floor(&self.mantissa, (-self.exponent) as u64)
        }
    }

    /// `floor(a / b)` rounded down to a multiple of `2^-p`. Panics if `b = 0`.
    pub fn quotient_floor(&self, b: &Dyadic, p: i64) -> Self {
        assert!(!b.is_zero(), "division by zero dyadic");
        let s = self.exponent - b.exponent + p;
        let (num, den) = if s >= 0 {
            (&self.mantissa << (s as u64), b.mantissa.clone())
        } else {
            (self.mantissa.clone(), &b.mantissa << ((-s) as u64))
        };
        cost::charge(bits_of(&num) * bits_of(&den));
        Self::new(num.div_floor(&den), -p)
    }

    /// `a / b` rounded to the nearest multiple of `2^-p` (ties upward); error
    /// at most `2^-(p+1)`. Panics if `b = 0`.
    pub fn quotient_round(&self, b: &Dyadic, p: i64) -> Self {
        (self + &b.mul_pow2(-p - 1)).quotient_floor(b, p)
    }

    /// `floor(sqrt(x))` at `p` fractional bits. Panics on negative input.
    pub fn sqrt_floor(&self, p: i64) -> Self {
        self.sqrt_pair(p).0
    }

    /// `ceil(sqrt(x))` at `p` fractional bits. Panics on negative input.
    pub fn sqrt_ceil(&self, p: i64) -> Self {
        self.sqrt_pair(p).1
    }

    /// Lower and upper `2^-p`-grid bounds on `sqrt(x)`.
    pub fn sqrt_pair(&self, p: i64) -> (Self, Self) {
        assert!(!self.is_negative(), "square root of negative dyadic");
        if self.is_zero() {
            return (Self::zero(), Self::zero());
        }
        // y = x * 4^p, s = floor(sqrt(y))
        let e = self.exponent + 2 * p;
        let (y, exact) = if e >= 0 {
            (&self.mantissa << (e as u64), true)
        } else {
            // mantissa is odd, so a right shift always drops a set bit
            (&self.mantissa >> ((-e) as u64), false)
        };
        cost::charge(bits_of(&y) * bits_of(&y));
        let s = y.sqrt();
        let hi = if exact && &s * &s == y {
            s.clone()
        } else {
            &s + 1
        };
        (Self::new(s, -p), Self::new(hi, -p))
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Exact decimal expansion (dyadics always have one).
    pub fn to_decimal_string(&self) -> String {
        if self.exponent >= 0 {
            return (&self.mantissa << (self.exponent as u64)).to_string();
        }
        let k = (-self.exponent) as u32;
        let scaled = self.mantissa.abs() * num_traits::pow(BigInt::from(5u8), k as usize);
        let digits = scaled.to_string();
        let k = k as usize;
        let (int_part, frac_part) = if digits.len() > k {
            let (a, b) = digits.split_at(digits.len() - k);
            (a.to_string(), b.to_string())
        } else {
            ("0".to_string(), format!("{}{}", "0".repeat(k - digits.len()), digits))
        };
        let frac = frac_part.trim_end_matches('0');
        let sign = if self.is_negative() { "-" } else { "" };
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    }

    /// Parses the textual forms `m`, `m/2^k`, `m/d` (d a power of two),
    /// `m*2^e` and finite decimals such as `-0.375`.
    pub fn parse(s: &str) -> Result<Self, ParseDyadicError> {
        s.parse()
    }

    /// Ordering of absolute values.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        self.abs().cmp(&other.abs())
    }

    /// Machine integer view when the value is an integer that fits.
    pub fn to_i64(&self) -> Option<i64> {
        if self.exponent < 0 {
            return None;
        }
        (&self.mantissa << (self.exponent as u64)).to_i64()
    }

    /// Nearest-ish `f64`, for diagnostics only.
    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.bits() as i64;
        let shift = (bits - 60).max(0);
        let m = (&self.mantissa >> shift as u64).to_f64().unwrap_or(f64::NAN);
        let e = (self.exponent + shift).clamp(-2000, 2000) as i32;
        m * 2f64.powi(e)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Self::from_i64(v)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let e = self.exponent.min(other.exponent);
        let a = self.scaled_to(-e);
        let b = other.scaled_to(-e);
        cost::charge(bits_of(&a).max(bits_of(&b)));
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_impl(a: &Dyadic, b: &Dyadic, negate_b: bool) -> Dyadic {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return if negate_b { -b } else { b.clone() };
    }
    let e = a.exponent.min(b.exponent);
    let ma = a.scaled_to(-e);
    let mb = b.scaled_to(-e);
    cost::charge(bits_of(&ma).max(bits_of(&mb)));
    let m = if negate_b { ma - mb } else { ma + mb };
    Dyadic::new(m, e)
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &'a Dyadic) -> Dyadic {
        add_impl(self, rhs, false)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &'a Dyadic) -> Dyadic {
        add_impl(self, rhs, true)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &'a Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        cost::charge(bits_of(&self.mantissa) * bits_of(&rhs.mantissa));
        // product of odd mantissas is odd: already canonical
        let exponent = self.exponent + rhs.exponent;
        assert!(
            exponent.abs() <= MAX_EXPONENT,
            "dyadic exponent {exponent} out of range"
        );
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: &'a Dyadic) -> Dyadic {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Dyadic> for &'a Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

fn parse_int(s: &str, whole: &str) -> Result<BigInt, ParseDyadicError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseDyadicError::Malformed(whole.to_string()));
    }
    s.parse::<BigInt>()
        .map_err(|_| ParseDyadicError::Malformed(whole.to_string()))
}

fn parse_exp(s: &str, whole: &str) -> Result<i64, ParseDyadicError> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let v = parse_int(digits, whole)?;
    let v = v
        .to_i64()
        .filter(|v| *v <= MAX_EXPONENT)
        .ok_or_else(|| ParseDyadicError::ExponentRange(whole.to_string()))?;
    Ok(if neg { -v } else { v })
}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let s = raw.trim();
        if s.is_empty() {
            return Err(ParseDyadicError::Empty);
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let value = if let Some((m, e)) = body.split_once("*2^") {
            Dyadic::new(parse_int(m, s)?, parse_exp(e, s)?)
        } else if let Some((m, d)) = body.split_once('/') {
            let m = parse_int(m, s)?;
            let k = if let Some(k) = d.strip_prefix("2^") {
                let k = parse_exp(k, s)?;
                if k < 0 {
                    return Err(ParseDyadicError::Malformed(s.to_string()));
                }
                k
            } else {
                let d = parse_int(d, s)?;
                if d.is_zero() {
                    return Err(ParseDyadicError::Malformed(s.to_string()));
                }
                let g = m.gcd(&d);
                let den = &d / &g;
                let tz = den.trailing_zeros().unwrap_or(0);
                if (&den >> tz) != BigInt::one() {
                    let bits = 16;
                    let approx =
                        Dyadic::from_bigint(m).quotient_round(&Dyadic::from_bigint(d), bits);
                    let approx = if neg { -approx } else { approx };
                    return Err(ParseDyadicError::NotDyadic {
                        literal: s.to_string(),
                        bits: bits as u32,
                        nearest: approx.to_string(),
                    });
                }
                let m = m / g;
                return Ok({
                    let v = Dyadic::new(m, -(tz as i64));
                    if neg {
                        -v
                    } else {
                        v
                    }
                });
            };
            Dyadic::new(m, -k)
        } else if let Some((ip, fp)) = body.split_once('.') {
            let ip = if ip.is_empty() { "0" } else { ip };
            let int = parse_int(ip, s)?;
            let frac = parse_int(fp, s)?;
            let ten_k = num_traits::pow(BigInt::from(10u8), fp.len());
            let num = int * &ten_k + frac;
            // num / 10^k = num / (2^k 5^k) is dyadic iff 5^k divides num
            let five_k = num_traits::pow(BigInt::from(5u8), fp.len());
            let (q, r) = num.div_rem(&five_k);
            if !r.is_zero() {
                let bits = (4 * fp.len() as u32).max(8);
                let approx = Dyadic::from_bigint(num)
                    .quotient_round(&Dyadic::from_bigint(ten_k), bits as i64);
                let approx = if neg { -approx } else { approx };
                return Err(ParseDyadicError::NotDyadic {
                    literal: s.to_string(),
                    bits,
                    nearest: format!("{} ({})", approx, approx.to_decimal_string()),
                });
            }
            Dyadic::new(q, -(fp.len() as i64))
        } else {
            Dyadic::from_bigint(parse_int(body, s)?)
        };
        Ok(if neg { -value } else { value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn exact_arithmetic_examples() {
        assert_eq!(d("3/4") + d("5/8"), d("11/8"));
        assert_eq!(d("7/16") * Dyadic::zero(), Dyadic::zero());
        let z = d("1/2") - d("1/2");
        assert_eq!(z, Dyadic::zero());
        assert_eq!(z.exponent(), 0);
        assert_eq!(z.mantissa(), &BigInt::zero());
    }

    #[test]
    fn canonical_form_is_odd_mantissa() {
        let x = Dyadic::new(BigInt::from(12), -5);
        assert_eq!(x.mantissa(), &BigInt::from(3));
        assert_eq!(x.exponent(), -3);
        assert_eq!(Dyadic::new(BigInt::from(4), -3), d("1/2"));
    }

    #[test]
    fn round_to_examples() {
        assert_eq!(d("5/16").round_to(2), d("1/4"));
        assert_eq!(d("7/8").round_to(10), d("7/8"));
        // ties away from zero
        assert_eq!(d("3/8").round_to(2), d("1/2"));
        assert_eq!(d("-3/8").round_to(2), d("-1/2"));
    }

    #[test]
    fn floor_and_ceil_on_negatives() {
        assert_eq!(d("-5/16").floor_to(2), d("-1/2"));
        assert_eq!(d("-5/16").ceil_to(2), d("-1/4"));
        assert_eq!(d("5/16").floor_to(2), d("1/4"));
        assert_eq!(d("5/16").ceil_to(2), d("1/2"));
        assert_eq!(d("-7/2").floor_int(), BigInt::from(-4));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(d("0.5"), Dyadic::pow2(-1));
        assert_eq!(d("3/2^4"), Dyadic::from_parts(3, -4));
        assert_eq!(d("-3*2^-2"), Dyadic::from_parts(-3, -2));
        assert_eq!(d("6/8"), d("3/4"));
        assert_eq!(d("-.25"), Dyadic::from_parts(-1, -2));
        match "0.2".parse::<Dyadic>() {
            Err(ParseDyadicError::NotDyadic { nearest, .. }) => assert!(nearest.contains("*2^")),
            other => panic!("expected NotDyadic, got {other:?}"),
        }
        assert!(matches!(
            "1/3".parse::<Dyadic>(),
            Err(ParseDyadicError::NotDyadic { .. })
        ));
        assert!(matches!("1.2.3".parse::<Dyadic>(), Err(ParseDyadicError::Malformed(_))));
        assert!(matches!("abc".parse::<Dyadic>(), Err(ParseDyadicError::Malformed(_))));
        assert!(matches!("".parse::<Dyadic>(), Err(ParseDyadicError::Empty)));
        assert!(matches!(
            "1*2^99999999999".parse::<Dyadic>(),
            Err(ParseDyadicError::ExponentRange(_))
        ));
    }

    #[test]
    fn compare_examples() {
        assert_eq!(d("1/2").cmp(&d("3/4")), Ordering::Less);
        assert_eq!(Dyadic::new(BigInt::from(4), -3).cmp(&d("1/2")), Ordering::Equal);
        assert_eq!(d("-1").cmp(&Dyadic::zero()), Ordering::Less);
    }

    #[test]
    fn decimal_output() {
        assert_eq!(d("3/8").to_decimal_string(), "0.375");
        assert_eq!(d("-5/4").to_decimal_string(), "-1.25");
        assert_eq!(d("12").to_decimal_string(), "12");
        assert_eq!(Dyadic::pow2(-10).to_decimal_string(), "0.0009765625");
    }

    #[test]
    fn sqrt_bounds_bracket() {
        let (lo, hi) = Dyadic::from_i64(2).sqrt_pair(20);
        assert!(lo.square() <= Dyadic::from_i64(2));
        assert!(hi.square() >= Dyadic::from_i64(2));
        assert_eq!(&hi - &lo, Dyadic::pow2(-20));
        let (lo, hi) = d("9/16").sqrt_pair(4);
        assert_eq!(lo, d("3/4"));
        assert_eq!(hi, d("3/4"));
    }

    #[test]
    fn quotient_rounding() {
        let q = Dyadic::one().quotient_floor(&Dyadic::from_i64(3), 10);
        assert!(&q * &Dyadic::from_i64(3) <= Dyadic::one());
        assert!((&q + &Dyadic::pow2(-10)) * Dyadic::from_i64(3) > Dyadic::one());
        let q = Dyadic::from_i64(-1).quotient_floor(&Dyadic::from_i64(3), 4);
        assert_eq!(q, d("-6/16"));
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (any::<i64>(), -80i64..80).prop_map(|(m, e)| Dyadic::from_parts(m, e))
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_dyadic(), b in arb_dyadic(), c in arb_dyadic()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            prop_assert_eq!(&(&a - &b) + &b, a.clone());
        }

        #[test]
        fn round_to_error_bound(x in arb_dyadic(), n in 0i64..120) {
            let r = x.round_to(n);
            let err = (&r - &x).abs();
            prop_assert!(err <= Dyadic::pow2(-n - 1));
            prop_assert!(r.is_zero() || r.exponent() >= -n);
            prop_assert!(x.floor_to(n) <= x && x <= x.ceil_to(n));
        }

        #[test]
        fn parse_format_roundtrip(x in arb_dyadic()) {
            let text = x.to_string();
            prop_assert_eq!(text.parse::<Dyadic>().unwrap(), x.clone());
            prop_assert_eq!(x.to_decimal_string().parse::<Dyadic>().unwrap(), x);
        }

        #[test]
        fn order_matches_difference_sign(a in arb_dyadic(), b in arb_dyadic()) {
            let diff = &a - &b;
            prop_assert_eq!(a.cmp(&b), diff.signum().cmp(&0));
        }
    }
}
