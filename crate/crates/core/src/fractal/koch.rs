//! Koch snowflake on the triangular lattice.
//!
//! Level-`i` vertices are lattice points `A + (u e1 + v e2) 3^-i` with
//! `e1 = (1, 0)`, `e2 = (1/2, sqrt(3)/2)` and `A = (-1/2, -sqrt(3)/6)`, so the
//! initial triangle has side 1, apex up and centroid at the origin. In units of
//! `1 / (6 * 3^i)` a lattice point has coordinates `X = 3(2u + v) - 3^(i+1)`
//! and `Y = sqrt(3) (3v - 3^i)`; squared distances between lattice points are
//! integers `dX^2 + 3 dYq^2` where `Y = sqrt(3) Yq`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use thiserror::Error;

use crate::oracle::Precision;
use crate::sets::{DistOracle, Point, Rect, SetError};
use crate::{DyInterval, Dyadic};

/// Highest level [`koch_polygon`] will build (`3 * 4^12` vertices).
pub const MAX_KOCH_LEVEL: u32 = 12;

/// Lattice directions `k * 60` degrees in `(u, v)` coordinates.
const DIRS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KochError {
    #[error("Koch level {0} exceeds the cap of {MAX_KOCH_LEVEL}")]
    LevelCap(u32),
}

/// A rational `num / den` in lowest terms, `den > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: i128,
    pub den: i128,
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0);
        let g = num.gcd(&den);
        let s = if den < 0 { -1 } else { 1 };
        Rational { num: s * num / g, den: s * den / g }
    }
}

/// `a + b sqrt(3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSqrt3 {
    pub a: Rational,
    pub b: Rational,
}

/// One edge of a level-`level` polygon: start vertex and direction index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KochSegment {
    pub level: u32,
    pub u: i64,
    pub v: i64,
    pub dir: usize,
}

impl KochSegment {
    pub fn end(&self) -> (i64, i64) {
        let (du, dv) = DIRS[self.dir];
        (self.u + du, self.v + dv)
    }

    /// The four edges replacing this one at the next level, bump outward.
    pub fn children(&self) -> [KochSegment; 4] {
        let k = self.dir;
        let dirs = [k, (k + 5) % 6, (k + 1) % 6, k];
        let (mut u, mut v) = (3 * self.u, 3 * self.v);
        let mut out = [*self; 4];
        for (slot, &d) in out.iter_mut().zip(&dirs) {
            *slot = KochSegment { level: self.level + 1, u, v, dir: d };
            u += DIRS[d].0;
            v += DIRS[d].1;
        }
        out
    }
}

fn initial_segments() -> [KochSegment; 3] {
    // A(0,0) -> B(1,0) -> C(0,1) -> A, counter-clockwise
    [
        KochSegment { level: 0, u: 0, v: 0, dir: 0 },
        KochSegment { level: 0, u: 1, v: 0, dir: 2 },
        KochSegment { level: 0, u: 0, v: 1, dir: 4 },
    ]
}

/// The level-`i` polygon.
#[derive(Clone, Debug)]
pub struct KochApprox {
    pub level: u32,
    /// Lattice vertices in order; edge `j` runs from vertex `j` to `j + 1`
    /// (cyclically).
    pub vertices: Vec<(i64, i64)>,
}

pub fn koch_polygon(i: u32) -> Result<KochApprox, KochError> {
    if i > MAX_KOCH_LEVEL {
        return Err(KochError::LevelCap(i));
    }
    Ok(KochApprox { level: i, vertices: segments_at(i).iter().map(|s| (s.u, s.v)).collect() })
}

fn segments_at(i: u32) -> Vec<KochSegment> {
    let mut segs = initial_segments().to_vec();
    for _ in 0..i {
        segs = segs.iter().flat_map(|s| s.children()).collect();
    }
    segs
}

fn pow3(e: u32) -> i64 {
    3i64.pow(e)
}

impl KochApprox {
    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    /// Cartesian coordinates of vertex `j` in `Q(sqrt 3)`.
    pub fn cartesian(&self, j: usize) -> (QSqrt3, QSqrt3) {
        let (u, v) = self.vertices[j];
        let s = 6 * i128::from(pow3(self.level));
        let t = i128::from(pow3(self.level));
        let x = Rational::new(3 * i128::from(2 * u + v) - 3 * t, s);
        let y = Rational::new(3 * i128::from(v) - t, s);
        let zero = Rational::new(0, 1);
        (QSqrt3 { a: x, b: zero.clone() }, QSqrt3 { a: zero, b: y })
    }

    /// Integer coordinates `(X, Yq)` of vertex `j` in units of
    /// `1 / (6 * 3^level)`.
    pub fn scaled(&self, j: usize) -> (i64, i64) {
        scaled_point(self.level, self.vertices[j])
    }

    /// Squared length of edge `j` in real units, as `(num, den)`.
    pub fn edge_length_sq(&self, j: usize) -> Rational {
        let (x0, y0) = self.scaled(j);
        let (x1, y1) = self.scaled((j + 1) % self.vertices.len());
        let d2 = i128::from(x1 - x0).pow(2) + 3 * i128::from(y1 - y0).pow(2);
        let s = 6 * i128::from(pow3(self.level));
        Rational::new(d2, s * s)
    }
}

fn scaled_point(level: u32, (u, v): (i64, i64)) -> (i64, i64) {
    let t = pow3(level);
    (3 * (2 * u + v) - 3 * t, 3 * v - t)
}

/// Exact bounds on a squared Hausdorff distance in real units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HausdorffSq {
    pub lower: (BigInt, BigInt),
    pub upper: (BigInt, BigInt),
}

impl HausdorffSq {
    pub fn is_exact(&self) -> bool {
        &self.lower.0 * &self.upper.1 == &self.upper.0 * &self.lower.1
    }
}

/// Bits of the dyadic parameter grid used when bisecting edges.
const PARAM_BITS: u32 = 16;

/// Segments of one polygon in scaled integer coordinates (times `2^16`),
/// bucketed for nearest-segment queries. All edges share one squared length.
struct SegIndex {
    segs: Vec<((i128, i128), (i128, i128))>,
    len2: i128,
    cell: i128,
    buckets: HashMap<(i128, i128), Vec<usize>>,
    span: (i128, i128, i128, i128),
}

fn metric2(dx: i128, dy: i128) -> i128 {
    dx * dx + 3 * dy * dy
}

impl SegIndex {
    fn new(segs: Vec<((i128, i128), (i128, i128))>) -> Self {
        let (a, b) = segs[0];
        let len2 = metric2(b.0 - a.0, b.1 - a.1);
        let side = segs.iter().map(|(a, b)| (b.0 - a.0).abs().max((b.1 - a.1).abs())).max().unwrap_or(1).max(1);
        let cell = 2 * side;
        let mut buckets: HashMap<(i128, i128), Vec<usize>> = HashMap::new();
        let mut span = (i128::MAX, i128::MIN, i128::MAX, i128::MIN);
        for (j, (a, b)) in segs.iter().enumerate() {
            let (cx0, cx1) = (a.0.min(b.0).div_euclid(cell), a.0.max(b.0).div_euclid(cell));
            let (cy0, cy1) = (a.1.min(b.1).div_euclid(cell), a.1.max(b.1).div_euclid(cell));
            for cx in cx0..=cx1 {
                for cy in cy0..=cy1 {
                    buckets.entry((cx, cy)).or_default().push(j);
                    span = (span.0.min(cx), span.1.max(cx), span.2.min(cy), span.3.max(cy));
                }
            }
        }
        SegIndex { segs, len2, cell, buckets, span }
    }

    /// `dist^2 * len2` from `p` to segment `j`.
    fn f(&self, j: usize, p: (i128, i128)) -> i128 {
        let (a, b) = self.segs[j];
        let (vx, vy) = (p.0 - a.0, p.1 - a.1);
        let (wx, wy) = (b.0 - a.0, b.1 - a.1);
        let dot = vx * wx + 3 * vy * wy;
        if dot <= 0 {
            metric2(vx, vy) * self.len2
        } else if dot >= self.len2 {
            metric2(p.0 - b.0, p.1 - b.1) * self.len2
        } else {
            let c = vx * wy - vy * wx;
            3 * c * c
        }
    }

    /// Exact minimum of `f` over all segments, and the segments examined.
    fn nearest(&self, p: (i128, i128), seen: &mut Vec<usize>) -> i128 {
        let (cx, cy) = (p.0.div_euclid(self.cell), p.1.div_euclid(self.cell));
        let max_ring = [cx - self.span.0, self.span.1 - cx, cy - self.span.2, self.span.3 - cy]
            .into_iter()
            .map(i128::abs)
            .max()
            .unwrap_or(0);
        let mut best = i128::MAX;
        let mut visit = |bx: i128, by: i128, best: &mut i128| {
            if let Some(list) = self.buckets.get(&(bx, by)) {
                for &j in list {
                    seen.push(j);
                    *best = (*best).min(self.f(j, p));
                }
            }
        };
        for r in 0..=max_ring {
            if r == 0 {
                visit(cx, cy, &mut best);
            } else {
                for t in -r..=r {
                    visit(cx + t, cy - r, &mut best);
                    visit(cx + t, cy + r, &mut best);
                }
                for t in -r + 1..r {
                    visit(cx - r, cy + t, &mut best);
                    visit(cx + r, cy + t, &mut best);
                }
            }
            // unseen segments lie more than r cells away in X or Yq, and the
            // Y metric weight sqrt(3) only increases distances
            let reach = r * self.cell;
            if best <= reach * reach * self.len2 {
                break;
            }
        }
        best
    }
}

fn scaled_segments(level: u32, refine_to: u32) -> Vec<((i128, i128), (i128, i128))> {
    let m = pow3(refine_to - level);
    segments_at(level)
        .iter()
        .map(|s| {
            let a = scaled_point(refine_to, (s.u * m, s.v * m));
            let (eu, ev) = s.end();
            let b = scaled_point(refine_to, (eu * m, ev * m));
            let up = |q: (i64, i64)| (i128::from(q.0) << PARAM_BITS, i128::from(q.1) << PARAM_BITS);
            (up(a), up(b))
        })
        .collect()
}

/// `sup over p in from of d(p, to)^2`, in the `f` units of `to`.
///
/// Lower bounds come from exact values at sample points, upper bounds from
/// convexity of each segment distance along a parameter interval. Intervals
/// whose upper bound does not exceed `floor` (or the running lower bound) are
/// discarded. Returns `(lower, upper)`.
fn directed_sup(
    from: &[((i128, i128), (i128, i128))],
    to: &SegIndex,
    floor: i128,
) -> (i128, i128) {
    let full: i128 = 1 << PARAM_BITS;
    let at = |s: &((i128, i128), (i128, i128)), t: i128| {
        let (a, b) = s;
        // coordinates are multiples of 2^16, so the division is exact
        (a.0 + (b.0 - a.0) * t / full, a.1 + (b.1 - a.1) * t / full)
    };
    let mut lower = floor;
    let mut seen = Vec::new();
    for s in from {
        lower = lower.max(to.nearest(s.0, &mut seen));
    }
    let mut upper = lower;
    for s in from {
        let mut stack = vec![(0i128, full)];
        while let Some((t0, t1)) = stack.pop() {
            let (p0, p1) = (at(s, t0), at(s, t1));
            seen.clear();
            let v0 = to.nearest(p0, &mut seen);
            let v1 = to.nearest(p1, &mut seen);
            lower = lower.max(v0).max(v1);
            let ub = seen.iter().map(|&j| to.f(j, p0).max(to.f(j, p1))).min().unwrap_or(i128::MAX);
            if ub <= lower {
                continue;
            }
            if t1 - t0 <= 1 {
                upper = upper.max(ub);
                continue;
            }
            let mid = (t0 + t1) / 2;
            stack.push((mid, t1));
            stack.push((t0, mid));
        }
    }
    (lower, upper.max(lower))
}

/// Exact `d_H(K_i, K_(i+1))^2` between the polygonal curves.
pub fn koch_hausdorff_sq(i: u32) -> Result<HausdorffSq, KochError> {
    if i + 1 > MAX_KOCH_LEVEL {
        return Err(KochError::LevelCap(i + 1));
    }
    let j = i + 1;
    let coarse = scaled_segments(i, j);
    let fine = scaled_segments(j, j);
    let fine_index = SegIndex::new(fine.clone());
    let coarse_index = SegIndex::new(coarse.clone());
    // fine -> coarse carries the bump apexes, so it goes first
    let (l1, u1) = directed_sup(&fine, &coarse_index, 0);
    // in fine f-units: value * len2_fine / len2_coarse
    let (lf, lc) = (fine_index.len2, coarse_index.len2);
    let floor2 = l1 * lf / lc;
    let (l2, u2) = directed_sup(&coarse, &fine_index, floor2);
    // squared real distance = f / (len2 * 4^16 * (6 * 3^j)^2)
    let s = BigInt::from(6 * pow3(j));
    let scale = BigInt::from(1u64) << (2 * PARAM_BITS);
    let den = |len2: i128| BigInt::from(len2) * &scale * &s * &s;
    let max = |a: (BigInt, BigInt), b: (BigInt, BigInt)| {
        if &a.0 * &b.1 >= &b.0 * &a.1 {
            a
        } else {
            b
        }
    };
    let lower = max((BigInt::from(l1), den(lc)), (BigInt::from(l2), den(lf)));
    let upper = max((BigInt::from(u1), den(lc)), (BigInt::from(u2), den(lf)));
    Ok(HausdorffSq { lower, upper })
}

/// How [`koch_distance`] picks the polygon level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelChoice {
    /// Smallest level whose tail bound `(7/16) 3^-i` is below `2^-(n+1)`;
    /// the oracle then approximates the distance to the snowflake itself.
    Auto,
    /// Distance to the level-`i` polygon only (no tail).
    Fixed(u32),
}

/// Smallest `i` with `(7/16) 3^-i < 2^-(n+1)`.
///
/// `d_H(K_i, K) <= sum_(j >= i) (sqrt(3)/6) 3^-j = (sqrt(3)/4) 3^-i`, and
/// `sqrt(3)/4 < 7/16`.
pub fn auto_level(n: Precision) -> u32 {
    let lhs = BigInt::from(7) << (n + 1);
    let mut i = 0;
    while lhs >= BigInt::from(16) * BigInt::from(3).pow(i) {
        i += 1;
    }
    i
}

/// Upper bound `(7/16) 3^-i` on `d_H(K_i, K)` as a dyadic (rounded up).
pub fn tail_bound(i: u32) -> Dyadic {
    let three = Dyadic::from_bigint(BigInt::from(3).pow(i));
    Dyadic::from_i64(7).quotient_floor(&three, 64).mul_pow2(-4) + Dyadic::pow2(-68)
}

struct KNode {
    lower: Dyadic,
    seg: KochSegment,
    leaf: bool,
}

impl PartialEq for KNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for KNode {}
impl PartialOrd for KNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for KNode {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower
            .cmp(&self.lower)
            .then_with(|| (other.seg.level, other.seg.u, other.seg.v, other.seg.dir).cmp(&(self.seg.level, self.seg.u, self.seg.v, self.seg.dir)))
    }
}

/// Distance computations against level-`target` lattice geometry with `sqrt 3`
/// enclosed in `[s3.lo, s3.hi]`, in units of `1 / (6 * 3^target)`.
struct KochGeom {
    target: u32,
    bits: i64,
    s3: DyInterval,
    px: Dyadic,
    py: Dyadic,
}

impl KochGeom {
    fn new(target: u32, p: &Point, bits: i64) -> Self {
        let three = Dyadic::from_i64(3);
        let s3 = DyInterval::new(three.sqrt_floor(bits), three.sqrt_ceil(bits));
        let s = Dyadic::from_i64(6 * pow3(target));
        KochGeom { target, bits, s3, px: &p.x * &s, py: &p.y * &s }
    }

    fn lattice(&self, seg_level: u32, q: (i64, i64)) -> (i64, i64) {
        let m = pow3(self.target - seg_level);
        scaled_point(self.target, (q.0 * m, q.1 * m))
    }

    /// `sqrt(3) * k` as an interval.
    fn root3(&self, k: i64) -> DyInterval {
        self.s3.mul_exact(&DyInterval::point(Dyadic::from_i64(k)))
    }

    /// Squared distance from the point to a lattice point.
    fn point_d2(&self, q: (i64, i64)) -> DyInterval {
        let dx = &self.px - &Dyadic::from_i64(q.0);
        let dy = DyInterval::point(self.py.clone()).sub_exact(&self.root3(q.1));
        DyInterval::point(dx.square()).add_exact(&dy.sqr_exact())
    }

    /// Squared distance from the point to segment `seg`.
    fn seg_d2(&self, seg: &KochSegment) -> DyInterval {
        let a = self.lattice(seg.level, (seg.u, seg.v));
        let b = self.lattice(seg.level, seg.end());
        let (wx, wq) = (b.0 - a.0, b.1 - a.1);
        let len2 = Dyadic::from_i64(wx * wx + 3 * wq * wq);
        let vx = DyInterval::point(&self.px - &Dyadic::from_i64(a.0));
        let vy = DyInterval::point(self.py.clone()).sub_exact(&self.root3(a.1));
        let wy = self.root3(wq);
        let wxi = DyInterval::point(Dyadic::from_i64(wx));
        let dot = vx.mul_exact(&wxi).add_exact(&vy.mul_exact(&wy));
        let cross = vx.mul_exact(&wy).sub_exact(&vy.mul_exact(&wxi));
        let zero = Dyadic::zero();
        let over = |v: &Dyadic| v - &len2;
        let m_lo = zero.clone().max(-dot.hi().clone()).max(over(dot.lo()));
        let m_hi = zero.max(-dot.lo().clone()).max(over(dot.hi()));
        let total = cross.sqr_exact().add_exact(&DyInterval::new(m_lo.square(), m_hi.square()));
        let p = self.bits + 8;
        DyInterval::new(total.lo().quotient_floor(&len2, p), total.hi().quotient_floor(&len2, p) + Dyadic::pow2(-p))
    }

    /// Bump height `sqrt(3) 3^(target - level)` rounded up.
    fn bump(&self, level: u32) -> Dyadic {
        self.root3(pow3(self.target - level)).hi().clone()
    }
}

/// Distance from `p` to the level-`target` polygon, to within `2^-(n+1)`,
/// by branch and bound over the edge tree.
///
/// The part of the curve generated by an edge of length `L` stays within
/// `L sqrt(3) / 6` of that edge, which gives the lower bounds; edge endpoints
/// lie on every later level and give the upper bounds.
fn polygon_distance(p: &Point, target: u32, n: Precision) -> Dyadic {
    let mut bits = i64::from(n) + 24 + 4 * i64::from(target);
    loop {
        if let Some(v) = polygon_distance_at(p, target, n, bits) {
            return v;
        }
        bits += 32;
    }
}

fn polygon_distance_at(p: &Point, target: u32, n: Precision, bits: i64) -> Option<Dyadic> {
    let g = KochGeom::new(target, p, bits);
    let s = Dyadic::from_i64(6 * pow3(target));
    let q = i64::from(n) + 8;
    let tol = s.mul_pow2(-(i64::from(n) + 2));
    let mut upper: Option<Dyadic> = None;
    let mut heap = BinaryHeap::new();
    let push = |seg: KochSegment, heap: &mut BinaryHeap<KNode>, upper: &mut Option<Dyadic>| {
        let d2 = g.seg_d2(&seg);
        let leaf = seg.level == target;
        let lower = if leaf {
            d2.lo().sqrt_floor(q)
        } else {
            (d2.lo().sqrt_floor(q) - g.bump(seg.level)).max(Dyadic::zero())
        };
        let end_ub = g.point_d2(g.lattice(seg.level, (seg.u, seg.v))).hi().sqrt_ceil(q);
        let ub = if leaf { d2.hi().sqrt_ceil(q).min(end_ub) } else { end_ub };
        *upper = Some(match upper.take() {
            Some(u) => u.min(ub),
            None => ub,
        });
        heap.push(KNode { lower, seg, leaf });
    };
    for seg in initial_segments() {
        push(seg, &mut heap, &mut upper);
    }
    while let Some(node) = heap.pop() {
        let u = upper.clone().expect("pushed");
        if &u - &node.lower <= tol {
            return Some(u.quotient_floor(&s, i64::from(n) + 3));
        }
        if node.leaf {
            // interval too wide to decide: retry with more bits of sqrt(3)
            return None;
        }
        for child in node.seg.children() {
            push(child, &mut heap, &mut upper);
        }
    }
    None
}

/// Distance oracle for the Koch snowflake (or a fixed polygon level).
pub fn koch_distance(choice: LevelChoice) -> DistOracle {
    let r = Dyadic::from_parts(5, -3);
    let bound = Rect::new(DyInterval::centered(&Dyadic::zero(), &r), DyInterval::centered(&Dyadic::zero(), &r));
    let description = match choice {
        LevelChoice::Auto => "koch".to_string(),
        LevelChoice::Fixed(i) => format!("koch polygon level {i}"),
    };
    DistOracle::new(description, Some(bound), move |p, n| {
        let target = match choice {
            LevelChoice::Auto => auto_level(n),
            LevelChoice::Fixed(i) => {
                if i > MAX_KOCH_LEVEL {
                    return Err(SetError::Domain(KochError::LevelCap(i).to_string()));
                }
                i
            }
        };
        Ok(polygon_distance(p, target, n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f64 distance from (x, y) to the level-i polygon.
    fn brute(i: u32, x: f64, y: f64) -> f64 {
        let k = koch_polygon(i).unwrap();
        let s3 = 3f64.sqrt();
        let pts: Vec<(f64, f64)> = (0..k.edge_count())
            .map(|j| {
                let (u, v) = k.vertices[j];
                let t = 3f64.powi(i as i32);
                (-0.5 + (u as f64 + v as f64 / 2.0) / t, -s3 / 6.0 + v as f64 * s3 / 2.0 / t)
            })
            .collect();
        (0..pts.len())
            .map(|j| {
                let (a, b) = (pts[j], pts[(j + 1) % pts.len()]);
                let (wx, wy) = (b.0 - a.0, b.1 - a.1);
                let t = (((x - a.0) * wx + (y - a.1) * wy) / (wx * wx + wy * wy)).clamp(0.0, 1.0);
                ((x - a.0 - t * wx).powi(2) + (y - a.1 - t * wy).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn polygon_counts_and_lengths() {
        let k0 = koch_polygon(0).unwrap();
        assert_eq!(k0.edge_count(), 3);
        let k1 = koch_polygon(1).unwrap();
        assert_eq!(k1.edge_count(), 12);
        for j in 0..12 {
            assert_eq!(k1.edge_length_sq(j), Rational::new(1, 9));
        }
        let k3 = koch_polygon(3).unwrap();
        assert_eq!(k3.edge_count(), 3 * 64);
        assert!((0..k3.edge_count()).all(|j| k3.edge_length_sq(j) == Rational::new(1, 729)));
        assert!(koch_polygon(13).is_err());
    }

    #[test]
    fn initial_triangle_coordinates() {
        let k0 = koch_polygon(0).unwrap();
        let (x, y) = k0.cartesian(0);
        assert_eq!(x.a, Rational::new(-1, 2));
        assert_eq!(y.b, Rational::new(-1, 6));
        let (x, y) = k0.cartesian(2);
        assert_eq!(x.a, Rational::new(0, 1));
        assert_eq!(y.b, Rational::new(1, 3));
    }

    #[test]
    fn bumps_point_outward() {
        // every level-1 vertex is at least as far from the centroid as the
        // inscribed circle of the triangle
        let k1 = koch_polygon(1).unwrap();
        for j in 0..12 {
            let (x, y) = k1.scaled(j);
            // inradius sqrt(3)/6 = 3 sqrt(3) in units of 1/18: squared 27
            assert!(i128::from(x).pow(2) + 3 * i128::from(y).pow(2) >= 27);
        }
    }

    #[test]
    fn hausdorff_small_levels() {
        for i in 0..3 {
            let h = koch_hausdorff_sq(i).unwrap();
            assert!(h.is_exact(), "level {i}: {h:?}");
            // (sqrt(3)/6)^2 9^-i = 1 / (12 * 9^i)
            let want_den = BigInt::from(12) * BigInt::from(9).pow(i);
            assert_eq!(&h.lower.0 * &want_den, h.lower.1.clone());
        }
    }

    #[test]
    fn distance_matches_brute_force() {
        let pts: [(f64, f64); 5] = [(0.0, 0.0), (0.3, 0.1), (-0.6, 0.4), (10.0, 0.0), (0.1, -0.33)];
        for i in 0..4 {
            let o = koch_distance(LevelChoice::Fixed(i));
            for &(x, y) in &pts {
                let p = Point::new(
                    Dyadic::from_parts((x * 1024.0) as i64, -10),
                    Dyadic::from_parts((y * 1024.0) as i64, -10),
                );
                let want = brute(i, (x * 1024.0).trunc() / 1024.0, (y * 1024.0).trunc() / 1024.0);
                let got = o.eval(&p, 20).unwrap();
                let got = got.to_decimal_string().parse::<f64>().unwrap();
                assert!((got - want).abs() < 2f64.powi(-20) + 1e-12, "i={i} ({x},{y}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn snowflake_examples() {
        let k = koch_distance(LevelChoice::Auto);
        let centroid = Point::new(Dyadic::zero(), Dyadic::zero());
        let a = k.eval(&centroid, 6).unwrap();
        let b = k.eval(&centroid, 12).unwrap();
        assert!(a.is_positive());
        assert!((a - b).abs() < Dyadic::pow2(-5));
        // vertex B = (1/2, -sqrt(3)/6) of K_0 persists; approximate it
        let three = Dyadic::from_i64(3);
        let y = -three.sqrt_floor(40).quotient_floor(&Dyadic::from_i64(6), 40);
        let v = Point::new(Dyadic::pow2(-1), y);
        assert!(k.eval(&v, 10).unwrap() < Dyadic::pow2(-10) + Dyadic::pow2(-30));
    }

    #[test]
    fn auto_level_tail() {
        for n in 0..30 {
            let i = auto_level(n);
            assert!(tail_bound(i) < Dyadic::pow2(-(i64::from(n) + 1)));
            if i > 0 {
                assert!(tail_bound(i - 1) >= Dyadic::pow2(-(i64::from(n) + 1)) - Dyadic::pow2(-60));
            }
        }
    }
}
