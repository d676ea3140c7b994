//! Mandelbrot and quadratic Julia sets by interval iteration of `z^2 + c`.

use crate::oracle::{Precision, RealOracle};
use crate::sets::{Diagnosis, PixelDecision, PixelVerdict, Point, Rect};
use crate::{ComplexBox, DyInterval, Dyadic};

/// Mandelbrot sub-boxes are never split more than this many times.
pub const MANDEL_SPLIT_DEPTH: u32 = 4;
/// Julia sub-boxes may go deeper, since the certified disk is smaller.
pub const JULIA_SPLIT_DEPTH: u32 = 6;

/// Attracting-cycle lengths tried by [`julia_classify`].
pub const MAX_CYCLE: usize = 32;

/// Cycle detection runs every this many steps.
const CYCLE_CHECK_EVERY: u32 = 8;

/// A box wider than this is treated as blown up.
const BLOW_UP_WIDTH: i64 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapeParams {
    /// Iteration cap. Mandelbrot uses `64 n` when unset; Julia caps `A n + B`.
    pub t_max: Option<u32>,
    /// Working precision is `n + extra_precision` fractional bits.
    pub extra_precision: u32,
    pub a: u32,
    pub b: u32,
    /// Total box splits allowed per pixel.
    pub max_subdivisions: u32,
}

impl Default for EscapeParams {
    fn default() -> Self {
        EscapeParams { t_max: None, extra_precision: 20, a: 8, b: 32, max_subdivisions: 256 }
    }
}

impl EscapeParams {
    pub fn mandel_budget(&self, n: Precision) -> u32 {
        self.t_max.unwrap_or(64 * n.max(1)).max(1)
    }

    pub fn julia_budget(&self, n: Precision) -> u32 {
        let t = self.a.saturating_mul(n).saturating_add(self.b);
        self.t_max.map_or(t, |m| t.min(m)).max(1)
    }

    pub fn working_precision(&self, n: Precision) -> i64 {
        i64::from(n) + i64::from(self.extra_precision)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Escape {
    Escaped(u32),
    Unknown { blow_up: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orbit {
    Escaped(u32),
    Attracted(usize),
    Unknown { blow_up: bool },
}

fn blown_up(z: &ComplexBox) -> bool {
    z.width() > Dyadic::from_i64(BLOW_UP_WIDTH)
}

/// Iterates `z <- z^2 + c` from `z = c` for every `c` in the box.
///
/// `Escaped(t)` certifies that every parameter in `c` lies outside the
/// Mandelbrot set: some iterate has modulus above 2.
pub fn mandel_escape(c: &ComplexBox, t_max: u32, p: i64) -> Escape {
    let two = Dyadic::from_i64(2);
    let mut orbit = Modulus::new(c, c, p);
    for t in 0..t_max {
        if orbit.lo > two {
            return Escape::Escaped(t);
        }
        if blown_up(&orbit.z) && !orbit.diverging() {
            return Escape::Unknown { blow_up: true };
        }
        orbit.step(c);
    }
    Escape::Unknown { blow_up: false }
}

/// A box orbit together with scalar bounds `lo <= |z| <= hi`.
///
/// The scalar bounds follow `|z|^2 - |c| <= |z^2 + c| <= |z|^2 + |c|`, which
/// does not suffer from the wrapping of rectangular boxes under squaring; the
/// box is clipped to `[-hi, hi]^2` after every step.
struct Modulus {
    z: ComplexBox,
    lo: Dyadic,
    hi: Dyadic,
    c_hi: Dyadic,
    p: i64,
}

impl Modulus {
    fn new(z: &ComplexBox, c: &ComplexBox, p: i64) -> Self {
        let (lo, hi) = z.mag_bounds(p);
        let (_, c_hi) = c.mag_bounds(p);
        Modulus { z: z.clone(), lo, hi, c_hi, p }
    }

    /// `lo^2 - |c| > lo`: the lower bound grows with growing increments from
    /// here on, so it passes any escape radius in finitely many steps.
    fn diverging(&self) -> bool {
        self.lo.square() - &self.c_hi > self.lo
    }

    fn step(&mut self, c: &ComplexBox) {
        let z = self.z.step(c, self.p);
        let (lo, hi) = z.mag_bounds(self.p);
        let lo2 = (self.lo.square() - &self.c_hi).floor_to(self.p);
        let hi2 = (self.hi.square() + &self.c_hi).ceil_to(self.p);
        self.lo = lo.max(lo2);
        self.hi = hi.min(hi2);
        let clip = |iv: &DyInterval| {
            let l = iv.lo().clone().max(-self.hi.clone());
            let h = iv.hi().clone().min(self.hi.clone());
            if l <= h {
                DyInterval::new(l, h)
            } else {
                iv.clone()
            }
        };
        self.z = ComplexBox::new(clip(&z.re), clip(&z.im));
    }
}

fn center_gap(a: &ComplexBox, b: &ComplexBox) -> Dyadic {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).abs().max((ay - by).abs())
}

/// Tries to prove that `f_c^l` maps `z` strictly into itself with derivative
/// modulus below 1 on `z`. Then every point of `z` converges to an attracting
/// cycle of length dividing `l`.
fn certify_cycle(z: &ComplexBox, c: &ComplexBox, l: usize, p: i64) -> bool {
    let mut w = z.clone();
    let mut product = Dyadic::one();
    for _ in 0..l {
        // |f'(w)| = 2|w|
        let (_, hi) = w.mag_bounds(p);
        product = (&product * &hi.mul_pow2(1)).ceil_to(p);
        if product >= Dyadic::one() {
            return false;
        }
        w = w.step(c, p);
    }
    z.contains_box_strictly(&w)
}

/// Classifies the orbits of all points of `x` under `z^2 + c`, `c` in `c`.
/// `Escaped(t)` means the `t`-th iterate left the escape disk.
pub fn julia_classify(c: &ComplexBox, x: &ComplexBox, t_max: u32, p: i64) -> Orbit {
    let (_, c_hi) = c.mag_bounds(p);
    let radius = Dyadic::from_i64(2).max(c_hi + Dyadic::one());
    let quarter = Dyadic::pow2(-2);
    let floor = Dyadic::pow2(-(p / 2));
    let mut history: Vec<ComplexBox> = Vec::with_capacity(MAX_CYCLE + 1);
    let mut orbit = Modulus::new(x, c, p);
    for t in 1..=t_max {
        if history.len() == MAX_CYCLE {
            history.remove(0);
        }
        history.push(orbit.z.clone());
        orbit.step(c);
        if orbit.lo > radius {
            return Orbit::Escaped(t);
        }
        let z = &orbit.z;
        if blown_up(z) && !orbit.diverging() {
            return Orbit::Unknown { blow_up: true };
        }
        if t % CYCLE_CHECK_EVERY == 0 {
            let best = (1..=history.len())
                .map(|l| (center_gap(z, &history[history.len() - l]), l))
                .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((gap, l)) = best {
                if gap <= quarter {
                    let hull = z.hull(&history[history.len() - l]);
                    let base = hull.width().max(floor.clone());
                    for k in 0..6 {
                        let candidate = hull.inflate(&base.mul_pow2(k));
                        if certify_cycle(&candidate, c, l, p) {
                            return Orbit::Attracted(l);
                        }
                    }
                }
            }
        }
    }
    Orbit::Unknown { blow_up: false }
}

/// Whether the square box misses the closed disk of radius `r` around `d`.
fn misses_disk(b: &ComplexBox, d: &Point, r: &Dyadic) -> bool {
    let gap = |iv: &DyInterval, v: &Dyadic| {
        if v < iv.lo() {
            iv.lo() - v
        } else if v > iv.hi() {
            v - iv.hi()
        } else {
            Dyadic::zero()
        }
    };
    let gx = gap(&b.re, &d.x);
    let gy = gap(&b.im, &d.y);
    gx.square() + gy.square() > r.square()
}

/// Checks `accept` on a cover of the closed disk `B(d, r)` by sub-boxes,
/// splitting boxes that `accept` rejects with `split = true`. Stops at the
/// first box that cannot be accepted. Returns `(all accepted, splits used)`.
fn cover_all(
    d: &Point,
    r: &Dyadic,
    budget: u32,
    max_depth: u32,
    mut accept: impl FnMut(&ComplexBox, u32) -> (bool, bool),
) -> (bool, u64) {
    let mut stack = vec![(ComplexBox::around(&d.x, &d.y, r), 0u32)];
    let mut splits = 0u32;
    while let Some((b, depth)) = stack.pop() {
        if misses_disk(&b, d, r) {
            continue;
        }
        let (ok, may_split) = accept(&b, depth);
        if ok {
            continue;
        }
        if !may_split || depth >= max_depth || splits >= budget {
            return (false, u64::from(splits));
        }
        splits += 1;
        for q in b.split4().into_iter().rev() {
            stack.push((q, depth + 1));
        }
    }
    (true, u64::from(splits))
}

/// The Mandelbrot set as a pixel decision.
///
/// `0` is certified: every parameter within `2 * 2^-n` of `d` escapes.
/// `1` is heuristic, except `certified_in` when `d` itself is shown to have
/// an attracting cycle.
pub fn mandel_pixel(params: EscapeParams) -> PixelDecision {
    let window = Rect::new(
        DyInterval::new(Dyadic::from_i64(-2), Dyadic::from_i64(2)),
        DyInterval::new(Dyadic::from_i64(-2), Dyadic::from_i64(2)),
    );
    PixelDecision::new("mandelbrot", Some(window), move |d, n| {
        let t = params.mandel_budget(n);
        let p = params.working_precision(n);
        let r = Dyadic::pow2(1 - i64::from(n));
        let (out, splits) = cover_all(d, &r, params.max_subdivisions, MANDEL_SPLIT_DEPTH, |b, depth| {
            match mandel_escape(b, t, p + 2 * i64::from(depth)) {
                Escape::Escaped(_) => (true, false),
                Escape::Unknown { blow_up } => (false, blow_up),
            }
        });
        let diagnosis = if out {
            Diagnosis::CertifiedOut
        } else {
            let c = ComplexBox::point(d.x.clone(), d.y.clone());
            let zero = ComplexBox::point(Dyadic::zero(), Dyadic::zero());
            match julia_classify(&c, &zero, t, p) {
                Orbit::Attracted(_) => Diagnosis::CertifiedIn,
                _ => Diagnosis::Undetermined,
            }
        };
        Ok(PixelVerdict { diagnosis, subdivisions: splits })
    })
}

/// A box containing `c` from oracle queries at precision `p`.
pub fn parameter_box(cx: &RealOracle, cy: &RealOracle, p: i64) -> ComplexBox {
    let q = p.max(0) as Precision;
    let eps = Dyadic::pow2(-i64::from(q));
    ComplexBox::new(DyInterval::centered(&cx.query(q), &eps), DyInterval::centered(&cy.query(q), &eps))
}

/// Sample points of the closed disk `B(d, 2^-n)`: the center, the four axis
/// points on the rim and four diagonal points at `(11/16) 2^-n` per axis.
fn probe_points(d: &Point, n: Precision) -> Vec<Point> {
    let h = Dyadic::pow2(-i64::from(n));
    let g = Dyadic::from_parts(11, -4 - i64::from(n));
    let z = Dyadic::zero();
    let offsets = [
        (z.clone(), z.clone()),
        (h.clone(), z.clone()),
        (-h.clone(), z.clone()),
        (z.clone(), h.clone()),
        (z.clone(), -h.clone()),
        (g.clone(), g.clone()),
        (-g.clone(), g.clone()),
        (g.clone(), -g.clone()),
        (-g.clone(), -g),
    ];
    offsets.into_iter().map(|(ox, oy)| Point::new(&d.x + &ox, &d.y + &oy)).collect()
}

/// Filled Julia set `K_c` (`filled = true`) or Julia set `J_c` as a pixel
/// decision, with budget `T(n) = A n + B`.
///
/// `0` is certified: every point within `(15/8) 2^-n` of `d` escapes (or, for
/// `J_c`, lies in an escaping or attracted box). The disk is a little smaller
/// than `2 * 2^-n` so that centers exactly `2 * 2^-n` from the set can still be
/// cleared. `1` is sound when `c` is
/// hyperbolic and the budget is large enough.
pub fn julia_pixel(cx: RealOracle, cy: RealOracle, filled: bool, params: EscapeParams) -> PixelDecision {
    let name = if filled { "filled julia" } else { "julia" };
    let description = format!("{name} c=({}, {})", cx.description(), cy.description());
    PixelDecision::new(description, None, move |d, n| {
        let t = params.julia_budget(n);
        let p = params.working_precision(n);
        let c = parameter_box(&cx, &cy, p);
        let r = Dyadic::from_parts(15, -3 - i64::from(n));
        let (out, splits) = cover_all(d, &r, params.max_subdivisions, JULIA_SPLIT_DEPTH, |b, depth| {
            match julia_classify(&c, b, t, p + 2 * i64::from(depth)) {
                Orbit::Escaped(_) => (true, false),
                Orbit::Attracted(_) => (!filled, filled),
                Orbit::Unknown { .. } => (false, true),
            }
        });
        let classify_point = |q: &Point| {
            julia_classify(&c, &ComplexBox::point(q.x.clone(), q.y.clone()), t, p)
        };
        let diagnosis = if out {
            Diagnosis::CertifiedOut
        } else if filled {
            match classify_point(d) {
                Orbit::Attracted(_) => Diagnosis::CertifiedIn,
                _ => Diagnosis::Undetermined,
            }
        } else {
            let (mut escaped, mut attracted) = (false, false);
            for q in probe_points(d, n) {
                match classify_point(&q) {
                    Orbit::Escaped(_) => escaped = true,
                    Orbit::Attracted(_) => attracted = true,
                    Orbit::Unknown { .. } => {}
                }
                if escaped && attracted {
                    break;
                }
            }
            if escaped && attracted {
                Diagnosis::CertifiedIn
            } else {
                Diagnosis::Undetermined
            }
        };
        Ok(PixelVerdict { diagnosis, subdivisions: splits })
    })
}
