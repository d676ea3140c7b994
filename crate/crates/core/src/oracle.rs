//! Computable reals presented as precision oracles.
//!
//! A [`RealOracle`] for a real `x` answers `query(n)` with a dyadic `q`
//! satisfying `|q - x| < 2^-n`. Oracles are cheap to clone (shared handle),
//! memoize their answers so repeated queries are deterministic, and count the
//! queries they serve and the bit operations spent producing answers.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cost;
use crate::Dyadic;

/// Precision in bits: an answer at precision `n` is within `2^-n`.
pub type Precision = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("cannot separate divisor from zero at precision {max_probe}")]
    Separation { max_probe: Precision },
}

type Kernel = dyn Fn(Precision) -> Dyadic + Send + Sync;

struct Inner {
    description: String,
    kernel: Box<Kernel>,
    memo: Mutex<BTreeMap<Precision, Dyadic>>,
    queries: AtomicU64,
    bit_ops: AtomicU64,
    probe_depth: Option<Precision>,
}

#[derive(Clone)]
pub struct RealOracle {
    inner: Arc<Inner>,
}

impl fmt::Debug for RealOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealOracle({})", self.inner.description)
    }
}

/// Named constants with built-in oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
    Sqrt2,
    OneThird,
}

impl RealOracle {
    /// Wraps an approximation function. The caller guarantees that
    /// `f(n)` is within `2^-n` of one fixed real for every `n`.
    pub fn from_fn(
        description: impl Into<String>,
        f: impl Fn(Precision) -> Dyadic + Send + Sync + 'static,
    ) -> Self {
        Self::build(description.into(), Box::new(f), None)
    }

    fn build(description: String, kernel: Box<Kernel>, probe_depth: Option<Precision>) -> Self {
        RealOracle {
            inner: Arc::new(Inner {
                description,
                kernel,
                memo: Mutex::new(BTreeMap::new()),
                queries: AtomicU64::new(0),
                bit_ops: AtomicU64::new(0),
                probe_depth,
            }),
        }
    }

    /// A dyadic within `2^-n` of the represented real.
    ///
    /// Answers are memoized; an answer already computed at a higher precision
    /// is reused for lower ones. The memo lock is held while a new answer is
    /// computed, so concurrent queries see one consistent answer per `n`.
    pub fn query(&self, n: Precision) -> Dyadic {
        self.inner.queries.fetch_add(1, Ordering::Relaxed);
        // reading an n-bit answer costs at least n bit operations
        cost::charge(u64::from(n));
        let mut memo = self
            .inner
            .memo
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner());
        if let Some(q) = memo.get(&n) {
            return q.clone();
        }
        if let Some((_, q)) = memo.range(n..).next() {
            let q = q.clone();
            memo.insert(n, q.clone());
            return q;
        }
        let (q, spent) = cost::measure(|| (self.inner.kernel)(n));
        self.inner.bit_ops.fetch_add(spent, Ordering::Relaxed);
        memo.insert(n, q.clone());
        q
    }

    pub fn description(&self) -> &str {
        &self.inner.description
    }

    /// Number of `query` calls served so far.
    pub fn query_count(&self) -> u64 {
        self.inner.queries.load(Ordering::Relaxed)
    }

    /// Bit operations spent computing fresh answers (including the cost of
    /// any operand queries made along the way).
    pub fn bit_ops(&self) -> u64 {
        self.inner.bit_ops.load(Ordering::Relaxed)
    }

    /// For quotient oracles: the precision at which the divisor was
    /// separated from zero.
    pub fn probe_depth(&self) -> Option<Precision> {
        self.inner.probe_depth
    }

    /// Exact dyadic `q`; `query(n) = round_to(q, n + 1)`.
    pub fn from_dyadic(q: Dyadic) -> Self {
        let description = q.to_string();
        Self::from_fn(description, move |n| q.round_to(i64::from(n) + 1))
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_dyadic(Dyadic::from_i64(v))
    }

    /// A dyadic upper bound on `|x|`, valid also for every answer `query(m)`.
    fn magnitude_bound(&self) -> Dyadic {
        self.query(0).abs() + Dyadic::from_i64(2)
    }

    pub fn add(&self, other: &RealOracle) -> RealOracle {
        self.sum(other, false)
    }

    pub fn sub(&self, other: &RealOracle) -> RealOracle {
        self.sum(other, true)
    }

    fn sum(&self, other: &RealOracle, negate: bool) -> RealOracle {
        let (a, b) = (self.clone(), other.clone());
        let op = if negate { '-' } else { '+' };
        let description = format!("({} {op} {})", a.description(), b.description());
        Self::from_fn(description, move |n| {
            let x = a.query(n + 2);
            let y = b.query(n + 2);
            let s = if negate { &x - &y } else { &x + &y };
            s.round_to(i64::from(n) + 1)
        })
    }

    pub fn neg(&self) -> RealOracle {
        let a = self.clone();
        let description = format!("-{}", a.description());
        Self::from_fn(description, move |n| -a.query(n))
    }

    /// Product; operand precisions are `n + 2 + ceil(log2(1 + |other|))`
    /// using magnitude bounds obtained from precision-0 queries.
    pub fn mul(&self, other: &RealOracle) -> RealOracle {
        let (a, b) = (self.clone(), other.clone());
        let bound_a = a.magnitude_bound();
        let bound_b = b.magnitude_bound();
        let extra = |bound: &Dyadic| -> Precision {
            (Dyadic::one() + bound).ceil_log2().unwrap_or(0).max(0) as Precision
        };
        let (ea, eb) = (extra(&bound_b), extra(&bound_a));
        let description = format!("({} * {})", a.description(), b.description());
        Self::from_fn(description, move |n| {
            let x = a.query(n + 2 + ea);
            let y = b.query(n + 2 + eb);
            (&x * &y).round_to(i64::from(n) + 1)
        })
    }

    /// Multiplication by `2^k`.
    pub fn scale_pow2(&self, k: i32) -> RealOracle {
        let a = self.clone();
        let description = format!("({} * 2^{k})", a.description());
        Self::from_fn(description, move |n| {
            let m = (i64::from(n) + i64::from(k)).max(0) as Precision;
            a.query(m).mul_pow2(i64::from(k))
        })
    }

    /// Quotient `self / other`.
    ///
    /// The divisor is probed at precisions `0, 1, ..., max_probe` until an
    /// answer exceeds `2 * 2^-k` in magnitude, which certifies `|other| > 2^-k`.
    pub fn div(&self, other: &RealOracle, max_probe: Precision) -> Result<RealOracle, OracleError> {
        let mut depth = None;
        for k in 0..=max_probe {
            let bk = other.query(k);
            if bk.abs() > Dyadic::pow2(1 - i64::from(k)) {
                depth = Some(k);
                break;
            }
        }
        let k = depth.ok_or(OracleError::Separation { max_probe })?;
        let (a, b) = (self.clone(), other.clone());
        let bound_a = a.magnitude_bound();
        let log_a = bound_a.ceil_log2().unwrap_or(0).max(0) as Precision;
        let description = format!("({} / {})", a.description(), b.description());
        let kernel = move |n: Precision| {
            // |b| > 2^-k and |b'| > 2^-(k+1): each error term below 2^-(n+2)
            let x = a.query(n + 2 + k);
            let y = b.query(n + 3 + 2 * k + log_a);
            x.quotient_round(&y, i64::from(n) + 1)
        };
        Ok(Self::build(description, Box::new(kernel), Some(k)))
    }

    /// `e^x` for `x` in `[-1, 1]`.
    ///
    /// Membership is checked with a precision-4 probe; inputs whose probe lies
    /// within `1 + 2^-4` are accepted (so `|x| < 1 + 2^-3`). Each query `n`
    /// reads the operand at precision `n + 4`.
    pub fn exp(&self) -> Result<RealOracle, OracleError> {
        let probe = self.query(EXP_PROBE_PRECISION);
        if probe.abs() > exp_probe_limit() {
            return Err(OracleError::Domain(format!(
                "exp expects x in [-1, 1], probe gave {}",
                probe.to_decimal_string()
            )));
        }
        let a = self.clone();
        let description = format!("exp({})", a.description());
        Ok(Self::from_fn(description, move |n| {
            exp_kernel(&a.query(n + EXP_INPUT_SLACK), n)
        }))
    }

    /// `x^(1/k)` for `x` in `[0, 1]`, `k` in `{2, 3}`.
    ///
    /// The operand is read at precision `k * (n + 2)`; the Hölder bound
    /// `|a^(1/k) - b^(1/k)| <= |a - b|^(1/k)` makes this valid down to 0.
    pub fn root(&self, k: u32) -> Result<RealOracle, OracleError> {
        if !(2..=3).contains(&k) {
            return Err(OracleError::Domain(format!("unsupported root degree {k}")));
        }
        let probe = self.query(4);
        if probe < -Dyadic::pow2(-4) || probe > Dyadic::one() + Dyadic::pow2(-4) {
            return Err(OracleError::Domain(format!(
                "root expects x in [0, 1], probe gave {}",
                probe.to_decimal_string()
            )));
        }
        let a = self.clone();
        let name = if k == 2 { "sqrt" } else { "cbrt" };
        let description = format!("{name}({})", a.description());
        Ok(Self::from_fn(description, move |n| {
            root_kernel(&a.query(root_precision(k, n)), k, n)
        }))
    }

    pub fn constant(c: Constant) -> RealOracle {
        match c {
            Constant::E => Self::from_fn("e", e_approx),
            Constant::Pi => Self::from_fn("pi", pi_approx),
            Constant::OneThird => Self::from_fn("1/3", one_third_approx),
            Constant::Sqrt2 => {
                let half = RealOracle::from_dyadic(Dyadic::pow2(-1));
                let root = half.root(2).unwrap_or_else(|_| unreachable!("1/2 lies in [0, 1]"));
                let s = root.scale_pow2(1);
                Self::from_fn("sqrt2", move |n| s.query(n))
            }
        }
    }
}

/// Precision of the range probe made by [`RealOracle::exp`].
pub const EXP_PROBE_PRECISION: Precision = 4;
/// Extra input bits read by the exponential: operand precision is `n + 4`.
pub const EXP_INPUT_SLACK: Precision = 4;

fn exp_probe_limit() -> Dyadic {
    Dyadic::one() + Dyadic::pow2(-4)
}

/// Number of Taylor terms (highest power) summed for output precision `n`:
/// the `n + 1` terms of the basic bound plus one guard term for inputs in the
/// probe slack, and never fewer than 7 so the tail bound holds for small `n`.
pub fn exp_terms(n: Precision) -> u32 {
    (n + 1).max(6)
}

/// Evaluates `sum_{k <= N} q^k / k!` with `N = exp_terms(n)` to within
/// `2^-(n+2)` and returns it.
///
/// For `|x| < 1 + 2^-3` and `|q - x| < 2^-(n+4)` the result is within `2^-n`
/// of `e^x`: tail below `2^-(n+1)`, input error below `2^-(n+2)`, evaluation
/// error below `2^-(n+2)`. Inputs beyond the slack are clamped.
pub fn exp_kernel(q: &Dyadic, n: Precision) -> Dyadic {
    let limit = Dyadic::one() + Dyadic::pow2(-3);
    let q = if q > &limit {
        limit
    } else if q < &-&limit {
        -limit
    } else {
        q.clone()
    };
    let terms = exp_terms(n);
    let log_terms = Dyadic::from_i64(i64::from(terms) + 1).ceil_log2().unwrap_or(0);
    // per-term rounding error 2^-(w+1), at most 4 accumulated per term
    let w = i64::from(n) + 5 + log_terms;
    let mut term = Dyadic::one();
    let mut sum = Dyadic::one();
    for k in 1..=terms {
        term = (&term * &q).quotient_round(&Dyadic::from_i64(i64::from(k)), w);
        sum = &sum + &term;
    }
    sum.round_to(i64::from(n) + 3)
}

/// Operand precision needed by a degree-`k` root at output precision `n`.
pub fn root_precision(k: u32, n: Precision) -> Precision {
    k * (n + 2)
}

/// `k`-th root of a (clamped nonnegative) dyadic to within `2^-(n+1)`.
pub fn root_kernel(q: &Dyadic, k: u32, n: Precision) -> Dyadic {
    let q = if q.is_negative() { Dyadic::zero() } else { q.clone() };
    dyadic_root(&q, k, i64::from(n) + 1)
}

/// Certified root bracket: `lo^k <= q <= hi^k`.
fn bracket_ok(lo: &Dyadic, hi: &Dyadic, q: &Dyadic, k: u32) -> bool {
    !lo.is_negative() && &lo.pow(k) <= q && q <= &hi.pow(k)
}

/// Returns `r` with `|r - q^(1/k)| <= 2^-j` for `q >= 0`.
///
/// Newton's iteration from a power-of-two upper guess; the final bracket is
/// verified exactly. Tiny `q` (root below `2^-(j+1)`) and any Newton run that
/// fails to certify fall back to bisection, which is slower but always
/// certified.
pub fn dyadic_root(q: &Dyadic, k: u32, j: i64) -> Dyadic {
    assert!(!q.is_negative(), "root of negative dyadic");
    if q.is_zero() {
        return Dyadic::zero();
    }
    let kk = i64::from(k);
    if q < &Dyadic::pow2(-kk * (j + 1)) {
        return bisect_root(q, k, Dyadic::zero(), Dyadic::pow2(-(j + 1)), j);
    }
    let w = j + 2;
    let e = q.ceil_log2().unwrap_or(0);
    // e/k rounded up, also for negative e
    let mut hi = Dyadic::pow2(e.div_euclid(kk) + i64::from(e.rem_euclid(kk) != 0));
    let kd = Dyadic::from_i64(kk);
    for _ in 0..200 {
        let f = &hi.pow(k) - q;
        let df = &kd * &hi.pow(k - 1);
        let mut next = (&hi - &f.quotient_floor(&df, w + 4)).ceil_to(w);
        if &next.pow(k) < q {
            next = &next + &Dyadic::pow2(-w);
        }
        let lo = (&next - &Dyadic::pow2(-w)).max(Dyadic::zero());
        if bracket_ok(&lo, &next, q, k) {
            // width 2^-w: the midpoint is within 2^-(w+1)
            return (&lo + &next).mul_pow2(-1);
        }
        if next >= hi {
            break;
        }
        hi = next;
    }
    let top = Dyadic::one().max(q.clone());
    bisect_root(q, k, Dyadic::zero(), top, j)
}

fn bisect_root(q: &Dyadic, k: u32, mut lo: Dyadic, mut hi: Dyadic, j: i64) -> Dyadic {
    debug_assert!(bracket_ok(&lo, &hi, q, k));
    while &hi - &lo > Dyadic::pow2(-j) {
        let mid = (&lo + &hi).mul_pow2(-1);
        if &mid.pow(k) <= q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (&lo + &hi).mul_pow2(-1)
}

/// `e` from exact partial sums `sum_{k<=N} 1/k!` with the tail `< 2/(N+1)!`.
fn e_approx(n: Precision) -> Dyadic {
    let target = Dyadic::pow2(-(i64::from(n) + 2));
    let mut fact = BigInt::one();
    let mut big_n: u64 = 1;
    // smallest N with 2/(N+1)! < 2^-(n+2)
    loop {
        let next = &fact * BigInt::from(big_n + 1);
        if Dyadic::from_i64(2).quotient_floor(&Dyadic::from_bigint(next.clone()), i64::from(n) + 8)
            < target
        {
            fact = &fact * BigInt::from(big_n);
            break;
        }
        fact = &fact * BigInt::from(big_n);
        big_n += 1;
    }
    // fact = N!, numerator = sum_k N!/k!
    let mut numerator = BigInt::zero();
    let mut tail = BigInt::one();
    for k in (0..=big_n).rev() {
        numerator += &tail;
        tail *= BigInt::from(k.max(1));
    }
    Dyadic::from_bigint(numerator).quotient_round(&Dyadic::from_bigint(fact), i64::from(n) + 2)
}

/// `atan(1/m)` to within `2^-p` by its alternating series.
fn atan_inv(m: u64, p: i64) -> Dyadic {
    let terms_bound = Dyadic::pow2(-(p + 2));
    let log_terms = (p + 2).max(2).ilog2() as i64 + 1;
    let w = p + 3 + log_terms;
    let m_big = BigInt::from(m);
    let m2 = &m_big * &m_big;
    let mut power = m_big.clone();
    let mut sum = Dyadic::zero();
    let mut k: u64 = 0;
    loop {
        let den = Dyadic::from_bigint(&power * BigInt::from(2 * k + 1));
        let term = Dyadic::one().quotient_round(&den, w);
        if term < terms_bound {
            break;
        }
        sum = if k % 2 == 0 { &sum + &term } else { &sum - &term };
        power *= &m2;
        k += 1;
    }
    sum
}

/// `pi = 16 atan(1/5) - 4 atan(1/239)`.
fn pi_approx(n: Precision) -> Dyadic {
    let p = i64::from(n) + 8;
    let a = atan_inv(5, p).mul_pow2(4);
    let b = atan_inv(239, p).mul_pow2(2);
    (a - b).round_to(i64::from(n) + 2)
}

/// `1/3 = (0.010101...)_2` truncated after `2m` bits, `2m >= n + 1`.
fn one_third_approx(n: Precision) -> Dyadic {
    let m = (n + 2) / 2;
    // (4^m - 1)/3 = 0b0101...01
    let mut mantissa = BigInt::zero();
    for _ in 0..m {
        mantissa = (mantissa << 2u32) + 1u32;
    }
    Dyadic::new(mantissa, -2 * i64::from(m))
}
