//! Outward-rounded interval arithmetic over dyadics, on the line and on
//! rectangles in the complex plane.
//!
//! Every operation returns an enclosure of the exact pointwise image. Results
//! are rounded outward to multiples of `2^-p`, so endpoint sizes stay bounded
//! by the working precision while containment is never lost.

use std::fmt;

use crate::Dyadic;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl fmt::Debug for DyInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IvOp {
    Add,
    Sub,
    Mul,
}

impl DyInterval {
    /// Panics if `lo > hi`.
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "interval with lo > hi: [{lo}, {hi}]");
        DyInterval { lo, hi }
    }

    pub fn point(x: Dyadic) -> Self {
        DyInterval {
            lo: x.clone(),
            hi: x,
        }
    }

    /// `[c - r, c + r]`; `r` must be nonnegative.
    pub fn centered(c: &Dyadic, r: &Dyadic) -> Self {
        Self::new(c - r, c + r)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Dyadic {
        (&self.lo + &self.hi).mul_pow2(-1)
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &DyInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other` lies in the open interior of `self`.
    pub fn contains_strictly(&self, other: &DyInterval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn hull(&self, other: &DyInterval) -> DyInterval {
        DyInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn inflate(&self, r: &Dyadic) -> DyInterval {
        Self::new(&self.lo - r, &self.hi + r)
    }

    pub fn split(&self) -> (DyInterval, DyInterval) {
        let m = self.mid();
        (
            DyInterval::new(self.lo.clone(), m.clone()),
            DyInterval::new(m, self.hi.clone()),
        )
    }

    /// Smallest `|x|` over the interval.
    pub fn mig(&self) -> Dyadic {
        if self.contains_zero() {
            Dyadic::zero()
        } else if self.lo.is_positive() {
            self.lo.clone()
        } else {
            self.hi.abs()
        }
    }

    /// Largest `|x|` over the interval.
    pub fn mag(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }

    /// Rounds endpoints outward to multiples of `2^-p`.
    pub fn round_out(&self, p: i64) -> DyInterval {
        DyInterval {
            lo: self.lo.floor_to(p),
            hi: self.hi.ceil_to(p),
        }
    }

    pub fn neg(&self) -> DyInterval {
        DyInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add_exact(&self, other: &DyInterval) -> DyInterval {
        DyInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub_exact(&self, other: &DyInterval) -> DyInterval {
        DyInterval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn mul_exact(&self, other: &DyInterval) -> DyInterval {
        let a = &self.lo * &other.lo;
        let b = &self.lo * &other.hi;
        let c = &self.hi * &other.lo;
        let d = &self.hi * &other.hi;
        let lo = a.clone().min(b.clone()).min(c.clone()).min(d.clone());
        let hi = a.max(b).max(c).max(d);
        DyInterval { lo, hi }
    }

    /// `{x^2 : x in self}`, tighter than `self * self` when zero is inside.
    pub fn sqr_exact(&self) -> DyInterval {
        let a = self.lo.square();
        let b = self.hi.square();
        if self.contains_zero() {
            DyInterval {
                lo: Dyadic::zero(),
                hi: a.max(b),
            }
        } else if self.lo.is_positive() {
            DyInterval { lo: a, hi: b }
        } else {
            DyInterval { lo: b, hi: a }
        }
    }

    pub fn scale_pow2(&self, k: i64) -> DyInterval {
        DyInterval {
            lo: self.lo.mul_pow2(k),
            hi: self.hi.mul_pow2(k),
        }
    }

    /// Binary operation with outward rounding to `2^-p`.
    pub fn arith(&self, other: &DyInterval, op: IvOp, p: i64) -> DyInterval {
        let exact = match op {
            IvOp::Add => self.add_exact(other),
            IvOp::Sub => self.sub_exact(other),
            IvOp::Mul => self.mul_exact(other),
        };
        exact.round_out(p)
    }

    pub fn add(&self, other: &DyInterval, p: i64) -> DyInterval {
        self.arith(other, IvOp::Add, p)
    }

    pub fn sub(&self, other: &DyInterval, p: i64) -> DyInterval {
        self.arith(other, IvOp::Sub, p)
    }

    pub fn mul(&self, other: &DyInterval, p: i64) -> DyInterval {
        self.arith(other, IvOp::Mul, p)
    }

    pub fn sqr(&self, p: i64) -> DyInterval {
        self.sqr_exact().round_out(p)
    }

    /// Enclosure of `sqrt` over a nonnegative interval (negative parts are
    /// clipped to zero).
    pub fn sqrt(&self, p: i64) -> DyInterval {
        let lo = if self.lo.is_positive() {
            self.lo.sqrt_floor(p)
        } else {
            Dyadic::zero()
        };
        let hi = if self.hi.is_positive() {
            self.hi.sqrt_ceil(p)
        } else {
            Dyadic::zero()
        };
        DyInterval { lo, hi }
    }

    /// Pointwise maximum of two intervals' values.
    pub fn max_with(&self, other: &DyInterval) -> DyInterval {
        DyInterval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Pointwise minimum of two intervals' values.
    pub fn min_with(&self, other: &DyInterval) -> DyInterval {
        DyInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }
}

/// Closed axis-aligned rectangle `re x im` in the complex plane.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ComplexBox {
    pub re: DyInterval,
    pub im: DyInterval,
}

impl fmt::Debug for ComplexBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} x {:?}", self.re, self.im)
    }
}

impl ComplexBox {
    pub fn new(re: DyInterval, im: DyInterval) -> Self {
        ComplexBox { re, im }
    }

    pub fn point(re: Dyadic, im: Dyadic) -> Self {
        ComplexBox {
            re: DyInterval::point(re),
            im: DyInterval::point(im),
        }
    }

    /// Square box of half-width `r` around `(x, y)`.
    pub fn around(x: &Dyadic, y: &Dyadic, r: &Dyadic) -> Self {
        ComplexBox {
            re: DyInterval::centered(x, r),
            im: DyInterval::centered(y, r),
        }
    }

    /// Larger of the two side lengths.
    pub fn width(&self) -> Dyadic {
        self.re.width().max(self.im.width())
    }

    pub fn center(&self) -> (Dyadic, Dyadic) {
        (self.re.mid(), self.im.mid())
    }

    pub fn contains_point(&self, x: &Dyadic, y: &Dyadic) -> bool {
        self.re.contains(x) && self.im.contains(y)
    }

    pub fn contains_box(&self, other: &ComplexBox) -> bool {
        self.re.contains_interval(&other.re) && self.im.contains_interval(&other.im)
    }

    pub fn contains_box_strictly(&self, other: &ComplexBox) -> bool {
        self.re.contains_strictly(&other.re) && self.im.contains_strictly(&other.im)
    }

    pub fn hull(&self, other: &ComplexBox) -> ComplexBox {
        ComplexBox {
            re: self.re.hull(&other.re),
            im: self.im.hull(&other.im),
        }
    }

    pub fn inflate(&self, r: &Dyadic) -> ComplexBox {
        ComplexBox {
            re: self.re.inflate(r),
            im: self.im.inflate(r),
        }
    }

    /// Four congruent quarters.
    pub fn split4(&self) -> [ComplexBox; 4] {
        let (r0, r1) = self.re.split();
        let (i0, i1) = self.im.split();
        [
            ComplexBox::new(r0.clone(), i0.clone()),
            ComplexBox::new(r1.clone(), i0),
            ComplexBox::new(r0, i1.clone()),
            ComplexBox::new(r1, i1),
        ]
    }

    pub fn add(&self, other: &ComplexBox, p: i64) -> ComplexBox {
        ComplexBox {
            re: self.re.add(&other.re, p),
            im: self.im.add(&other.im, p),
        }
    }

    pub fn mul(&self, other: &ComplexBox, p: i64) -> ComplexBox {
        let rr = self.re.mul_exact(&other.re);
        let ii = self.im.mul_exact(&other.im);
        let ri = self.re.mul_exact(&other.im);
        let ir = self.im.mul_exact(&other.re);
        ComplexBox {
            re: rr.sub_exact(&ii).round_out(p),
            im: ri.add_exact(&ir).round_out(p),
        }
    }

    /// Enclosure of `{w^2 : w in self}`.
    pub fn square(&self, p: i64) -> ComplexBox {
        let re = self.re.sqr_exact().sub_exact(&self.im.sqr_exact());
        let im = self.re.mul_exact(&self.im).scale_pow2(1);
        ComplexBox {
            re: re.round_out(p),
            im: im.round_out(p),
        }
    }

    /// Enclosure of `{w^2 + g : w in self, g in c}`; one outward rounding per
    /// coordinate.
    pub fn step(&self, c: &ComplexBox, p: i64) -> ComplexBox {
        let re = self
            .re
            .sqr_exact()
            .sub_exact(&self.im.sqr_exact())
            .add_exact(&c.re);
        let im = self
            .re
            .mul_exact(&self.im)
            .scale_pow2(1)
            .add_exact(&c.im);
        ComplexBox {
            re: re.round_out(p),
            im: im.round_out(p),
        }
    }

    /// Exact bounds `(lo, hi)` on `|w|^2` over the box.
    pub fn mag2_bounds(&self) -> (Dyadic, Dyadic) {
        let lo = self.re.mig().square() + self.im.mig().square();
        let hi = self.re.mag().square() + self.im.mag().square();
        (lo, hi)
    }

    /// Certified bounds on `|w|` at `p` fractional bits: `lo <= |w| <= hi`
    /// for every `w` in the box.
    pub fn mag_bounds(&self, p: i64) -> (Dyadic, Dyadic) {
        let (lo2, hi2) = self.mag2_bounds();
        (lo2.sqrt_floor(p), hi2.sqrt_ceil(p))
    }
}

/// Iterates `z <- z^2 + c` once on boxes at working precision `p`.
pub fn box_step(z: &ComplexBox, c: &ComplexBox, p: i64) -> ComplexBox {
    z.step(c, p)
}

/// Certified magnitude bounds of a box; see [`ComplexBox::mag_bounds`].
pub fn mag_bounds(z: &ComplexBox, p: i64) -> (Dyadic, Dyadic) {
    z.mag_bounds(p)
}
