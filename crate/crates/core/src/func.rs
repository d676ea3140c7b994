//! Function machines: a precision map together with a kernel on dyadics.
//!
//! A machine for `f` on a closed interval promises: for every `x` in the
//! domain and every dyadic `q` with `|x - q| < 2^-m(n)`, the kernel value
//! `kernel(q, n)` is within `2^-n` of `f(x)`. The input real is read through a
//! [`RealOracle`], so applying a machine costs one oracle query.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::oracle::{dyadic_root, exp_kernel, root_kernel, root_precision, Precision, RealOracle};
use crate::sets::{primitive_distance, DistOracle, Point, Rect, SetError, Shape};
use crate::{DyInterval, Dyadic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncError {
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("range of inner machine not inside outer domain: {0}")]
    Range(String),
}

type PrecisionMap = dyn Fn(Precision) -> Precision + Send + Sync;
type KernelFn = dyn Fn(&Dyadic, Precision) -> Dyadic + Send + Sync;
/// Enclosure of the range over a subinterval, padded by at most `2^-p`.
type EncloseFn = dyn Fn(&DyInterval, i64) -> DyInterval + Send + Sync;

struct MachineInner {
    description: String,
    domain: DyInterval,
    precision_map: Box<PrecisionMap>,
    kernel: Box<KernelFn>,
    enclose: Option<Box<EncloseFn>>,
}

#[derive(Clone)]
pub struct FuncMachine {
    inner: Arc<MachineInner>,
}

impl fmt::Debug for FuncMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FuncMachine({} on {:?})", self.inner.description, self.inner.domain)
    }
}

/// Precision of the range probe made by [`FuncMachine::apply`].
pub const DOMAIN_PROBE_PRECISION: Precision = 4;

impl FuncMachine {
    /// Builds a machine. The kernel is only ever called with `q` inside the
    /// domain; `enclose`, when given, must bound the range over any
    /// subinterval of the domain.
    pub fn new(
        description: impl Into<String>,
        domain: DyInterval,
        precision_map: impl Fn(Precision) -> Precision + Send + Sync + 'static,
        kernel: impl Fn(&Dyadic, Precision) -> Dyadic + Send + Sync + 'static,
        enclose: Option<Box<EncloseFn>>,
    ) -> Self {
        FuncMachine {
            inner: Arc::new(MachineInner {
                description: description.into(),
                domain,
                precision_map: Box::new(precision_map),
                kernel: Box::new(kernel),
                enclose,
            }),
        }
    }

    pub fn description(&self) -> &str {
        &self.inner.description
    }

    pub fn domain(&self) -> &DyInterval {
        &self.inner.domain
    }

    pub fn precision_map(&self, n: Precision) -> Precision {
        (self.inner.precision_map)(n)
    }

    /// Kernel at `q` after clamping `q` into the domain. Clamping never moves
    /// `q` away from a point of the domain, so the contract is preserved for
    /// approximations that stray slightly outside.
    pub fn eval(&self, q: &Dyadic, n: Precision) -> Dyadic {
        let dom = &self.inner.domain;
        let q = if q < dom.lo() {
            dom.lo().clone()
        } else if q > dom.hi() {
            dom.hi().clone()
        } else {
            q.clone()
        };
        (self.inner.kernel)(&q, n)
    }

    /// Range enclosure over `iv` (clipped to the domain), if the machine has one.
    pub fn enclose(&self, iv: &DyInterval, p: i64) -> Option<DyInterval> {
        let dom = &self.inner.domain;
        let lo = iv.lo().clone().max(dom.lo().clone());
        let hi = iv.hi().clone().min(dom.hi().clone());
        let clipped = if lo <= hi {
            DyInterval::new(lo, hi)
        } else {
            DyInterval::point(if iv.hi() < dom.lo() { dom.lo().clone() } else { dom.hi().clone() })
        };
        self.inner.enclose.as_ref().map(|e| e(&clipped, p))
    }

    /// `M^phi(n)`: one query at precision `m(n)`, then the kernel.
    ///
    /// A precision-4 probe rejects inputs certified to lie outside the domain.
    pub fn apply(&self, phi: &RealOracle, n: Precision) -> Result<Dyadic, FuncError> {
        let probe = phi.query(DOMAIN_PROBE_PRECISION);
        let slack = Dyadic::pow2(-i64::from(DOMAIN_PROBE_PRECISION));
        if !self.inner.domain.inflate(&slack).contains(&probe) {
            return Err(FuncError::Domain(format!(
                "{} expects x in {:?}, probe gave {}",
                self.description(),
                self.inner.domain,
                probe.to_decimal_string()
            )));
        }
        let q = phi.query(self.precision_map(n));
        Ok(self.eval(&q, n))
    }

    /// `f(x)` as an oracle: query `n` runs the machine at `n + 1`.
    pub fn lift(&self, phi: &RealOracle) -> Result<RealOracle, FuncError> {
        self.apply(phi, 0)?;
        let m = self.clone();
        let phi = phi.clone();
        let description = format!("{}({})", m.description(), phi.description());
        Ok(RealOracle::from_fn(description, move |n| {
            let q = phi.query(m.precision_map(n + 1));
            m.eval(&q, n + 1)
        }))
    }
}

/// Range enclosure of a monotone machine from kernel values at the exact
/// endpoints (each within `2^-p`).
fn monotone_enclose(
    kernel: impl Fn(&Dyadic, Precision) -> Dyadic + Send + Sync + 'static,
    increasing: bool,
) -> Box<EncloseFn> {
    Box::new(move |iv, p| {
        let p = p.max(0);
        let pp = p as Precision;
        let eps = Dyadic::pow2(-p);
        let (a, b) = (kernel(iv.lo(), pp), kernel(iv.hi(), pp));
        let (lo, hi) = if increasing { (a, b) } else { (b, a) };
        DyInterval::new(lo - &eps, hi + eps)
    })
}

fn unit() -> DyInterval {
    DyInterval::new(Dyadic::zero(), Dyadic::one())
}

/// `g(x) = 1 - x^3` on `[0, 1]`, `m(n) = n + 2`.
///
/// `|x^3 - q^3| <= 3|x - q| < 3 * 2^-(n+2)`, and rounding to `2^-(n+2)` adds
/// at most `2^-(n+3)`.
pub fn g_machine() -> FuncMachine {
    let exact = |iv: &DyInterval, _p: i64| {
        let one = Dyadic::one();
        DyInterval::new(&one - &iv.hi().pow(3), &one - &iv.lo().pow(3))
    };
    FuncMachine::new(
        "1 - x^3",
        unit(),
        |n| n + 2,
        |q, n| (Dyadic::one() - q.pow(3)).round_to(i64::from(n) + 2),
        Some(Box::new(exact)),
    )
}

/// `e^x` on `[-1, 1]`, `m(n) = n + 4`.
pub fn exp_machine() -> FuncMachine {
    FuncMachine::new(
        "exp(x)",
        DyInterval::new(Dyadic::from_i64(-1), Dyadic::one()),
        |n| n + 4,
        exp_kernel,
        Some(monotone_enclose(exp_kernel, true)),
    )
}

/// `e^x - 1` on `[-1, 1/2]` (a dyadic interval inside `[-1, ln 2]`, where the
/// range stays in `[-1, 1]`), `m(n) = n + 4`.
pub fn expm1_machine() -> FuncMachine {
    let kernel = |q: &Dyadic, n: Precision| exp_kernel(q, n) - Dyadic::one();
    FuncMachine::new(
        "exp(x) - 1",
        DyInterval::new(Dyadic::from_i64(-1), Dyadic::pow2(-1)),
        |n| n + 4,
        kernel,
        Some(monotone_enclose(kernel, true)),
    )
}

fn root_machine(k: u32, name: &str) -> FuncMachine {
    let kernel = move |q: &Dyadic, n: Precision| root_kernel(q, k, n);
    let enclose = move |iv: &DyInterval, p: i64| {
        let j = p.max(0);
        let eps = Dyadic::pow2(-j);
        let lo = (dyadic_root(iv.lo(), k, j) - &eps).max(Dyadic::zero());
        // roots of points in [0, 1] stay in [0, 1]
        let hi = (dyadic_root(iv.hi(), k, j) + eps).min(Dyadic::one());
        DyInterval::new(lo.min(hi.clone()), hi)
    };
    FuncMachine::new(
        format!("{name}(x)"),
        unit(),
        move |n| root_precision(k, n),
        kernel,
        Some(Box::new(enclose)),
    )
}

/// `x^(1/3)` on `[0, 1]`, `m(n) = 3(n + 2)`.
pub fn cuberoot_machine() -> FuncMachine {
    root_machine(3, "cbrt")
}

/// `x^(1/2)` on `[0, 1]`, `m(n) = 2(n + 2)`.
pub fn sqrt_machine() -> FuncMachine {
    root_machine(2, "sqrt")
}

/// The identity on `domain`, `m(n) = n + 1`.
pub fn identity_machine(domain: DyInterval) -> FuncMachine {
    FuncMachine::new(
        "x",
        domain,
        |n| n + 1,
        |q, n| q.round_to(i64::from(n) + 1),
        Some(Box::new(|iv: &DyInterval, _| iv.clone())),
    )
}

/// The constant `c` on `domain`, `m(n) = 0`.
pub fn constant_machine(c: Dyadic, domain: DyInterval) -> FuncMachine {
    let value = c.clone();
    FuncMachine::new(
        c.to_string(),
        domain,
        |_| 0,
        move |_, n| value.round_to(i64::from(n) + 1),
        Some(Box::new(move |_: &DyInterval, _| DyInterval::point(c.clone()))),
    )
}

/// Machine for `f o g` with `m(n) = m_g(m_f(n))`: the inner stage delivers
/// `g(x)` to within `2^-m_f(n)`, which is what the outer contract needs.
///
/// The range of `g` over its whole domain, as certified by its enclosure,
/// must lie inside the domain of `f`.
pub fn compose(f: &FuncMachine, g: &FuncMachine) -> Result<FuncMachine, FuncError> {
    let range = g
        .enclose(g.domain(), 40)
        .ok_or_else(|| FuncError::Range(format!("{} has no range enclosure", g.description())))?;
    if !f.domain().contains_interval(&range) {
        return Err(FuncError::Range(format!(
            "{} maps into {:?}, outside {:?}",
            g.description(),
            range,
            f.domain()
        )));
    }
    let description = format!("{} o {}", f.description(), g.description());
    let (f1, g1) = (f.clone(), g.clone());
    let (f2, g2) = (f.clone(), g.clone());
    let enclose: Option<Box<EncloseFn>> = if f.inner.enclose.is_some() {
        let (f3, g3) = (f.clone(), g.clone());
        Some(Box::new(move |iv: &DyInterval, p: i64| {
            let inner = g3.enclose(iv, p).expect("checked above");
            f3.enclose(&inner, p).expect("outer enclosure present")
        }))
    } else {
        None
    };
    Ok(FuncMachine::new(
        description,
        g.domain().clone(),
        move |n| g1.precision_map(f1.precision_map(n)),
        move |q, n| f2.eval(&g2.eval(q, f2.precision_map(n)), n),
        enclose,
    ))
}

/// Default number of kernel samples allowed per graph distance evaluation.
pub const GRAPH_SAMPLE_BUDGET: u64 = 200_000;

struct Node {
    lower: Dyadic,
    iv: DyInterval,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on the lower bound, ties broken by position
        other.lower.cmp(&self.lower).then_with(|| other.iv.lo().cmp(self.iv.lo()))
    }
}

/// Vertical band containing the graph over `iv`.
///
/// From the precision map: with `j` the largest precision such that the
/// half-width is below `2^-m(j)`, every `x` in `iv` is approximated by the
/// midpoint well enough, so `f(x)` is within `2^-j` of `kernel(mid, j)`.
/// A range enclosure, when present, tightens the band.
fn graph_band(m: &FuncMachine, iv: &DyInterval, n: Precision) -> Option<DyInterval> {
    let half = iv.width().mul_pow2(-1);
    let mut best = None;
    for j in 0..=n + 3 {
        if half < Dyadic::pow2(-i64::from(m.precision_map(j))) {
            best = Some(j);
        } else {
            break;
        }
    }
    let from_modulus = best.map(|j| {
        let y = m.eval(&iv.mid(), j);
        DyInterval::centered(&y, &Dyadic::pow2(-i64::from(j)))
    });
    let from_enclosure = m.enclose(iv, i64::from(n) + 6);
    match (from_modulus, from_enclosure) {
        (Some(a), Some(b)) => {
            let lo = a.lo().clone().max(b.lo().clone());
            let hi = a.hi().clone().min(b.hi().clone());
            Some(if lo <= hi { DyInterval::new(lo, hi) } else { b })
        }
        (a, b) => a.or(b),
    }
}

fn graph_lower(m: &FuncMachine, p: &Point, iv: DyInterval, n: Precision) -> Node {
    let band = graph_band(m, &iv, n);
    let rect_x = iv.clone();
    let d2 = match band {
        Some(y) => Rect::new(rect_x, y).dist2(p),
        None => {
            let dx = if &p.x < iv.lo() {
                iv.lo() - &p.x
            } else if &p.x > iv.hi() {
                &p.x - iv.hi()
            } else {
                Dyadic::zero()
            };
            dx.square()
        }
    };
    Node { lower: d2.sqrt_floor(i64::from(n) + 4), iv }
}

/// Distance oracle for the graph `{(x, f(x)) : x in domain}`.
///
/// Branch and bound over subintervals: lower bounds from the band that holds
/// the graph over each subinterval, upper bounds from kernel samples at
/// midpoints. Stops once the two agree to `2^-(n+1)`.
pub fn graph_distance(m: &FuncMachine) -> DistOracle {
    graph_distance_with_budget(m, GRAPH_SAMPLE_BUDGET)
}

pub fn graph_distance_with_budget(m: &FuncMachine, budget: u64) -> DistOracle {
    let machine = m.clone();
    let dom = m.domain().clone();
    let bound = graph_band(m, &dom, 8).map(|y| Rect::new(dom.clone(), y));
    let description = format!("graph({})", m.description());
    DistOracle::new(description, bound, move |p, n| {
        let tol = Dyadic::pow2(-(i64::from(n) + 1));
        let j = n + 3;
        let mut upper: Option<Dyadic> = None;
        let mut heap = BinaryHeap::new();
        heap.push(graph_lower(&machine, p, machine.domain().clone(), n));
        let mut samples = 0u64;
        while let Some(node) = heap.pop() {
            if let Some(u) = &upper {
                if u - &node.lower <= tol {
                    break;
                }
            }
            samples += 1;
            if samples > budget {
                return Err(SetError::Budget { budget });
            }
            let c = node.iv.mid();
            let y = machine.eval(&c, j);
            let sample = Point::new(c, y);
            let ub = sample.dist2(p).sqrt_ceil(i64::from(n) + 4) + Dyadic::pow2(-i64::from(j));
            upper = Some(match upper {
                Some(u) => u.min(ub),
                None => ub,
            });
            let (a, b) = node.iv.split();
            heap.push(graph_lower(&machine, p, a, n));
            heap.push(graph_lower(&machine, p, b, n));
        }
        let u = upper.expect("at least one sample");
        Ok(u.round_to(i64::from(n) + 2))
    })
}

/// The graph of the unit step (0 for `x < 0`, 1 for `x >= 0`) clipped to the
/// x-range of `window`: two horizontal segments, no vertical connector.
pub fn step_graph(window: &Rect) -> DistOracle {
    let (xl, xr) = (window.x.lo().clone(), window.x.hi().clone());
    let zero = Dyadic::zero();
    let one = Dyadic::one();
    let mut segments = Vec::new();
    if xl < zero {
        segments.push((Point::new(xl, zero.clone()), Point::new(zero.clone(), zero.clone())));
    }
    if xr >= zero {
        segments.push((Point::new(zero.clone(), one.clone()), Point::new(xr, one)));
    }
    let o = primitive_distance(Shape::Segments(segments));
    let bound = o.bound_box().cloned();
    DistOracle::new("step graph", bound, move |p, n| o.eval(p, n))
}
