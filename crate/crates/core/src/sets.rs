//! Bit-computable planar sets.
//!
//! A set is presented either by a [`DistOracle`] (approximations of the
//! distance function) or by a [`PixelDecision`]: for a grid point `d` and
//! resolution `n` it answers 1 whenever the closed ball `B(d, 2^-n)` meets the
//! set, 0 whenever `B(d, 2 * 2^-n)` misses it, and either value in between.
//! The two presentations convert into each other, and pixel approximations
//! are compared with exact Hausdorff distances.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use thiserror::Error;

use crate::cost;
use crate::oracle::{OracleError, Precision, RealOracle};
use crate::{DyInterval, Dyadic};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("precision {requested} exceeds the pixel budget n_hi = {n_hi}")]
    PrecisionBudget { requested: Precision, n_hi: Precision },
    #[error("the set is empty")]
    Empty,
    #[error("a bounded window is required: {0}")]
    Unbounded(String),
    #[error("tolerance unreachable within the budget of {budget} samples")]
    Budget { budget: u64 },
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("malformed pixel data: {0}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Dyadic,
    pub y: Dyadic,
}

impl Point {
    pub fn new(x: Dyadic, y: Dyadic) -> Self {
        Point { x, y }
    }

    pub fn from_parts(x: (i64, i64), y: (i64, i64)) -> Self {
        Point::new(Dyadic::from_parts(x.0, x.1), Dyadic::from_parts(y.0, y.1))
    }

    pub fn dist2(&self, other: &Point) -> Dyadic {
        (&self.x - &other.x).square() + (&self.y - &other.y).square()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-parallel closed rectangle with dyadic corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: DyInterval,
    pub y: DyInterval,
}

impl Rect {
    pub fn new(x: DyInterval, y: DyInterval) -> Self {
        Rect { x, y }
    }

    /// `[cx - r, cx + r] x [cy - r, cy + r]`.
    pub fn around(c: &Point, r: &Dyadic) -> Self {
        Rect::new(DyInterval::centered(&c.x, r), DyInterval::centered(&c.y, r))
    }

    pub fn hull(&self, other: &Rect) -> Rect {
        Rect::new(self.x.hull(&other.x), self.y.hull(&other.y))
    }

    pub fn inflate(&self, r: &Dyadic) -> Rect {
        Rect::new(self.x.inflate(r), self.y.inflate(r))
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.x.contains(&p.x) && self.y.contains(&p.y)
    }

    /// Squared distance from `p` to the rectangle (0 inside).
    pub fn dist2(&self, p: &Point) -> Dyadic {
        let gap = |iv: &DyInterval, v: &Dyadic| {
            if v < iv.lo() {
                iv.lo() - v
            } else if v > iv.hi() {
                v - iv.hi()
            } else {
                Dyadic::zero()
            }
        };
        gap(&self.x, &p.x).square() + gap(&self.y, &p.y).square()
    }

    fn of_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Rect {
        let mut it = points.into_iter();
        let first = it.next().expect("at least one point");
        let mut r = Rect::new(DyInterval::point(first.x.clone()), DyInterval::point(first.y.clone()));
        for p in it {
            r = r.hull(&Rect::new(DyInterval::point(p.x.clone()), DyInterval::point(p.y.clone())));
        }
        r
    }

    /// Text form `xlo,xhi,ylo,yhi` with bit-exact dyadics.
    pub fn to_text(&self) -> String {
        format!("{},{},{},{}", self.x.lo(), self.x.hi(), self.y.lo(), self.y.hi())
    }

    pub fn parse(s: &str) -> Result<Rect, SetError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(SetError::Parse(format!("window needs 4 values: {s}")));
        }
        let v: Vec<Dyadic> = parts
            .iter()
            .map(|p| p.parse::<Dyadic>().map_err(|e| SetError::Parse(e.to_string())))
            .collect::<Result<_, _>>()?;
        if v[0] > v[1] || v[2] > v[3] {
            return Err(SetError::Parse(format!("empty window: {s}")));
        }
        Ok(Rect::new(
            DyInterval::new(v[0].clone(), v[1].clone()),
            DyInterval::new(v[2].clone(), v[3].clone()),
        ))
    }
}

/// A nonnegative rational `num / den` with dyadic parts, `den > 0`.
#[derive(Clone, Debug)]
pub struct Ratio {
    pub num: Dyadic,
    pub den: Dyadic,
}

impl Ratio {
    pub fn of(v: Dyadic) -> Ratio {
        Ratio { num: v, den: Dyadic::one() }
    }

    pub fn less_than(&self, other: &Ratio) -> bool {
        &self.num * &other.den < &other.num * &self.den
    }

    pub fn min(self, other: Ratio) -> Ratio {
        if other.less_than(&self) {
            other
        } else {
            self
        }
    }

    /// `self <= t^2` exactly.
    pub fn at_most_sq(&self, t: &Dyadic) -> bool {
        self.num <= &t.square() * &self.den
    }
}

/// `sqrt(num / den)` to within `2^-p`; exact when the quotient is a dyadic
/// square at the working precision.
pub fn sqrt_ratio(r: &Ratio, p: i64) -> Dyadic {
    let big_p = 2 * p + 4;
    let v_lo = r.num.quotient_floor(&r.den, big_p);
    let exact = &v_lo * &r.den == r.num;
    let lo = v_lo.sqrt_floor(p + 2);
    let hi = if exact {
        v_lo.sqrt_ceil(p + 2)
    } else {
        (&v_lo + &Dyadic::pow2(-big_p)).sqrt_ceil(p + 2)
    };
    if lo == hi {
        lo
    } else {
        (lo + hi).mul_pow2(-1)
    }
}

/// Squared distance from `p` to the closed segment `ab`, exactly.
pub fn segment_dist2(p: &Point, a: &Point, b: &Point) -> Ratio {
    let (dx, dy) = (&b.x - &a.x, &b.y - &a.y);
    let len2 = dx.square() + dy.square();
    if len2.is_zero() {
        return Ratio::of(p.dist2(a));
    }
    let (px, py) = (&p.x - &a.x, &p.y - &a.y);
    let t = &px * &dx + &py * &dy;
    if !t.is_positive() {
        return Ratio::of(p.dist2(a));
    }
    if t >= len2 {
        return Ratio::of(p.dist2(b));
    }
    let cross = &px * &dy - &py * &dx;
    Ratio { num: cross.square(), den: len2 }
}

type DistFn = dyn Fn(&Point, Precision) -> Result<Dyadic, SetError> + Send + Sync;

/// Approximations of `d_S(x) = inf |x - y|` over `y` in `S`:
/// `|eval(x, n) - d_S(x)| < 2^-n`.
#[derive(Clone)]
pub struct DistOracle {
    eval: Arc<DistFn>,
    bound_box: Option<Rect>,
    description: String,
}

impl fmt::Debug for DistOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DistOracle({})", self.description)
    }
}

impl DistOracle {
    pub fn new(
        description: impl Into<String>,
        bound_box: Option<Rect>,
        eval: impl Fn(&Point, Precision) -> Result<Dyadic, SetError> + Send + Sync + 'static,
    ) -> Self {
        DistOracle { eval: Arc::new(eval), bound_box, description: description.into() }
    }

    pub fn eval(&self, p: &Point, n: Precision) -> Result<Dyadic, SetError> {
        (self.eval)(p, n)
    }

    pub fn bound_box(&self) -> Option<&Rect> {
        self.bound_box.as_ref()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// The empty set: every distance reads as a huge constant.
    pub fn empty() -> Self {
        DistOracle::new("empty", None, |_, _| Ok(Dyadic::pow2(40)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Diagnosis {
    /// `B(d, 2^-n)` proven disjoint from the set; decision 0. Escape-time
    /// deciders prove the stronger `B(d, 2 * 2^-n)` statement.
    CertifiedOut,
    /// `B(d, 2^-n)` proven to meet the set; decision 1.
    CertifiedIn,
    /// Decision 1 without a proof of either kind.
    Undetermined,
}

impl Diagnosis {
    pub fn as_str(self) -> &'static str {
        match self {
            Diagnosis::CertifiedOut => "certified_out",
            Diagnosis::CertifiedIn => "certified_in",
            Diagnosis::Undetermined => "undetermined",
        }
    }

    pub fn parse(s: &str) -> Option<Diagnosis> {
        match s {
            "certified_out" => Some(Diagnosis::CertifiedOut),
            "certified_in" => Some(Diagnosis::CertifiedIn),
            "undetermined" => Some(Diagnosis::Undetermined),
            _ => None,
        }
    }

    pub fn decision(self) -> bool {
        self != Diagnosis::CertifiedOut
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelVerdict {
    pub diagnosis: Diagnosis,
    /// Box subdivisions spent (0 for decisions that never subdivide).
    pub subdivisions: u64,
}

impl PixelVerdict {
    pub fn new(diagnosis: Diagnosis) -> Self {
        PixelVerdict { diagnosis, subdivisions: 0 }
    }

    pub fn decision(&self) -> bool {
        self.diagnosis.decision()
    }
}

type VerdictFn = dyn Fn(&Point, Precision) -> Result<PixelVerdict, SetError> + Send + Sync;

/// A member of the pixel decision family, with a diagnosis per verdict.
#[derive(Clone)]
pub struct PixelDecision {
    verdict: Arc<VerdictFn>,
    window: Option<Rect>,
    description: String,
}

impl fmt::Debug for PixelDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PixelDecision({})", self.description)
    }
}

impl PixelDecision {
    pub fn new(
        description: impl Into<String>,
        window: Option<Rect>,
        verdict: impl Fn(&Point, Precision) -> Result<PixelVerdict, SetError> + Send + Sync + 'static,
    ) -> Self {
        PixelDecision { verdict: Arc::new(verdict), window, description: description.into() }
    }

    pub fn verdict(&self, d: &Point, n: Precision) -> Result<PixelVerdict, SetError> {
        (self.verdict)(d, n)
    }

    pub fn decide(&self, d: &Point, n: Precision) -> Result<bool, SetError> {
        Ok(self.verdict(d, n)?.decision())
    }

    pub fn diagnose(&self, d: &Point, n: Precision) -> Result<Diagnosis, SetError> {
        Ok(self.verdict(d, n)?.diagnosis)
    }

    /// A box known to contain the set, if any.
    pub fn window(&self) -> Option<&Rect> {
        self.window.as_ref()
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

/// Decision from a distance oracle: `a = eval(d, n + 2)`, decide 1 iff
/// `a < 3 * 2^-(n+1)`.
pub fn pixel_from_distance(dist: &DistOracle) -> PixelDecision {
    let oracle = dist.clone();
    let description = format!("pixels({})", dist.description());
    PixelDecision::new(description, dist.bound_box().cloned(), move |d, n| {
        let a = oracle.eval(d, n + 2)?;
        let ni = i64::from(n);
        let threshold = Dyadic::from_parts(3, -(ni + 1));
        let diagnosis = if a >= threshold {
            Diagnosis::CertifiedOut
        } else if &a + &Dyadic::pow2(-(ni + 2)) <= Dyadic::pow2(-ni) {
            Diagnosis::CertifiedIn
        } else {
            Diagnosis::Undetermined
        };
        Ok(PixelVerdict::new(diagnosis))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelCell {
    pub ix: i64,
    pub iy: i64,
    pub diagnosis: Diagnosis,
    pub subdivisions: u64,
    pub bit_ops: u64,
}

impl PixelCell {
    pub fn decision(&self) -> bool {
        self.diagnosis.decision()
    }
}

/// Verdicts for every pixel of a grid window; pixel `(ix, iy)` is centered at
/// `(ix, iy) * 2^-(n+k)`. Cells are stored row by row from the top row down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelSet {
    pub n: Precision,
    pub k: u32,
    pub window: Rect,
    pub cells: Vec<PixelCell>,
    /// Set when a kept pixel lies on the outermost ring of the grid.
    pub touches_boundary: bool,
}

/// Grid index range covering `iv` at pitch `2^-p`, one step beyond each end
/// when the endpoint is not on the grid.
pub fn grid_range(iv: &DyInterval, p: i64) -> (i64, i64) {
    let lo = iv.lo().mul_pow2(p).floor_int();
    let hi = (-(iv.hi().mul_pow2(p))).floor_int();
    let to = |b: num_bigint::BigInt| b.to_i64().expect("grid index fits in i64");
    (to(lo), -to(hi))
}

pub fn grid_point(ix: i64, iy: i64, p: i64) -> Point {
    Point::from_parts((ix, -p), (iy, -p))
}

impl PixelSet {
    pub fn pitch_exponent(&self) -> i64 {
        i64::from(self.n) + i64::from(self.k)
    }

    /// Kept (decision 1) pixels as grid indices.
    pub fn centers(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.cells.iter().filter(|c| c.decision()).map(|c| (c.ix, c.iy))
    }

    pub fn count(&self, diagnosis: Diagnosis) -> usize {
        self.cells.iter().filter(|c| c.diagnosis == diagnosis).count()
    }

    /// Grid dimensions (columns, rows).
    pub fn dims(&self) -> (usize, usize) {
        let p = self.pitch_exponent();
        let (x0, x1) = grid_range(&self.window.x, p);
        let (y0, y1) = grid_range(&self.window.y, p);
        ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# n={}\n# k={}\n# window={}\nix,iy,decision,diagnosis\n",
            self.n,
            self.k,
            self.window.to_text()
        );
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{}\n",
                c.ix,
                c.iy,
                u8::from(c.decision()),
                c.diagnosis.as_str()
            ));
        }
        out
    }

    /// Reads the CSV form; per-cell cost figures are not stored and read as 0.
    pub fn from_csv(text: &str) -> Result<PixelSet, SetError> {
        let mut n = None;
        let mut k = None;
        let mut window = None;
        let mut cells = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| SetError::Parse(line.to_string()))?;
                match key.trim() {
                    "n" => n = value.trim().parse().ok(),
                    "k" => k = value.trim().parse().ok(),
                    "window" => window = Some(Rect::parse(value)?),
                    _ => {}
                }
                continue;
            }
            if line.starts_with("ix,") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let bad = || SetError::Parse(line.to_string());
            if f.len() != 4 {
                return Err(bad());
            }
            let diagnosis = Diagnosis::parse(f[3]).ok_or_else(bad)?;
            if (f[2] == "1") != diagnosis.decision() {
                return Err(bad());
            }
            cells.push(PixelCell {
                ix: f[0].parse().map_err(|_| bad())?,
                iy: f[1].parse().map_err(|_| bad())?,
                diagnosis,
                subdivisions: 0,
                bit_ops: 0,
            });
        }
        let missing = |what: &str| SetError::Parse(format!("missing header {what}"));
        let mut set = PixelSet {
            n: n.ok_or_else(|| missing("n"))?,
            k: k.ok_or_else(|| missing("k"))?,
            window: window.ok_or_else(|| missing("window"))?,
            cells,
            touches_boundary: false,
        };
        set.touches_boundary = set.kept_on_ring();
        Ok(set)
    }

    fn kept_on_ring(&self) -> bool {
        let p = self.pitch_exponent();
        let (x0, x1) = grid_range(&self.window.x, p);
        let (y0, y1) = grid_range(&self.window.y, p);
        self.centers().any(|(ix, iy)| ix == x0 || ix == x1 || iy == y0 || iy == y1)
    }
}

/// Evaluates `decision` on every grid point of pitch `2^-(n+k)` covering
/// `window`. Rows are evaluated in parallel and merged in order.
pub fn approximate_set(
    decision: &PixelDecision,
    n: Precision,
    k: u32,
    window: &Rect,
) -> Result<PixelSet, SetError> {
    let p = i64::from(n) + i64::from(k);
    let (x0, x1) = grid_range(&window.x, p);
    let (y0, y1) = grid_range(&window.y, p);
    let rows: Vec<i64> = (y0..=y1).rev().collect();
    let row_cells: Vec<Result<Vec<PixelCell>, SetError>> = rows
        .par_iter()
        .map(|&iy| {
            (x0..=x1)
                .map(|ix| {
                    let (v, bit_ops) = cost::measure(|| decision.verdict(&grid_point(ix, iy, p), n));
                    let v = v?;
                    Ok(PixelCell {
                        ix,
                        iy,
                        diagnosis: v.diagnosis,
                        subdivisions: v.subdivisions,
                        bit_ops,
                    })
                })
                .collect()
        })
        .collect();
    let mut cells = Vec::with_capacity(rows.len() * (x1 - x0 + 1) as usize);
    for r in row_cells {
        cells.extend(r?);
    }
    let mut set = PixelSet { n, k, window: window.clone(), cells, touches_boundary: false };
    set.touches_boundary = set.kept_on_ring();
    Ok(set)
}

/// Bucketed integer point set for nearest-neighbor queries.
struct GridIndex {
    cell: i64,
    buckets: HashMap<(i64, i64), Vec<(i64, i64)>>,
    span: (i64, i64, i64, i64),
}

impl GridIndex {
    fn new(points: &[(i64, i64)], cell: i64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<(i64, i64)>> = HashMap::new();
        let mut span = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for &(x, y) in points {
            let key = (x.div_euclid(cell), y.div_euclid(cell));
            span = (span.0.min(key.0), span.1.max(key.0), span.2.min(key.1), span.3.max(key.1));
            buckets.entry(key).or_default().push((x, y));
        }
        GridIndex { cell, buckets, span }
    }

    fn nearest2(&self, (x, y): (i64, i64)) -> i128 {
        let (cx, cy) = (x.div_euclid(self.cell), y.div_euclid(self.cell));
        let max_ring = [cx - self.span.0, self.span.1 - cx, cy - self.span.2, self.span.3 - cy]
            .into_iter()
            .map(i64::abs)
            .max()
            .unwrap_or(0);
        let mut best = i128::MAX;
        let visit = |bx: i64, by: i64, best: &mut i128| {
            if let Some(pts) = self.buckets.get(&(bx, by)) {
                for &(px, py) in pts {
                    let (dx, dy) = (i128::from(px - x), i128::from(py - y));
                    *best = (*best).min(dx * dx + dy * dy);
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
            let reach = i128::from(r) * i128::from(self.cell);
            if best <= reach * reach {
                break;
            }
        }
        best
    }
}

/// Exact Hausdorff distance between the kept-center sets of two pixel sets
/// (grids may differ), as an interval of width at most `2^-p`.
pub fn hausdorff_pixels(a: &PixelSet, b: &PixelSet, p: i64) -> Result<DyInterval, SetError> {
    let ea = a.pitch_exponent();
    let eb = b.pitch_exponent();
    let e = ea.max(eb);
    let scale = |set: &PixelSet, own: i64| -> Vec<(i64, i64)> {
        let s = e - own;
        set.centers().map(|(x, y)| (x << s, y << s)).collect()
    };
    let (pa, pb) = (scale(a, ea), scale(b, eb));
    if pa.is_empty() || pb.is_empty() {
        return Err(SetError::Empty);
    }
    let directed = |from: &[(i64, i64)], to: &[(i64, i64)], pitch: i64| -> i128 {
        let index = GridIndex::new(to, 8 * pitch);
        from.iter().map(|&q| index.nearest2(q)).max().unwrap_or(0)
    };
    let d2 = directed(&pa, &pb, 1 << (e - eb)).max(directed(&pb, &pa, 1 << (e - ea)));
    let d2 = Dyadic::new(num_bigint::BigInt::from(d2), -2 * e);
    let (lo, hi) = d2.sqrt_pair(p);
    Ok(DyInterval::new(lo, hi))
}

/// Distance oracle reconstructed from a pixel decision by a coarse-to-fine
/// search for the nearest kept pixel.
///
/// At level `L` (pitch and radius `h = 2^-L`) the distance `D_L` from `x` to
/// the nearest kept center satisfies `|D_L - d_S(x)| <= 2h`. Level `L + 1` is
/// searched only around kept centers within `D_L + 9h` of `x`; that radius
/// provably contains every center needed at the next level. The answer at
/// precision `n` comes from level `n + 3`, which must not exceed `n_hi`.
pub fn distance_from_pixels(decision: &PixelDecision, n_hi: Precision) -> Result<DistOracle, SetError> {
    let window = decision
        .window()
        .cloned()
        .ok_or_else(|| SetError::Unbounded("distance_from_pixels needs a bounding window".into()))?;
    let dec = decision.clone();
    let win = window.clone();
    let description = format!("distance({})", decision.description());
    Ok(DistOracle::new(description, Some(window), move |x, n| {
        let target = n + 3;
        if target > n_hi {
            return Err(SetError::PrecisionBudget { requested: n, n_hi });
        }
        let d2 = nearest_kept2(&dec, &win, x, target)?;
        Ok(d2.sqrt_floor(i64::from(n) + 2))
    }))
}

fn nearest_kept2(dec: &PixelDecision, window: &Rect, x: &Point, target: Precision) -> Result<Dyadic, SetError> {
    let base: Precision = 0;
    let (x0, x1) = grid_range(&window.x, 0);
    let (y0, y1) = grid_range(&window.y, 0);
    let mut kept: Vec<(i64, i64)> = Vec::new();
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            if dec.decide(&grid_point(ix, iy, 0), base)? {
                kept.push((ix, iy));
            }
        }
    }
    let mut level = base;
    loop {
        let p = i64::from(level);
        let dists: Vec<Dyadic> = kept.iter().map(|&(ix, iy)| grid_point(ix, iy, p).dist2(x)).collect();
        let best = dists.iter().min().cloned().ok_or(SetError::Empty)?;
        if level == target {
            return Ok(best);
        }
        let radius = best.sqrt_ceil(p + 2) + Dyadic::from_parts(9, -p);
        let r2 = radius.square();
        let mut candidates: HashSet<(i64, i64)> = HashSet::new();
        for (&(ix, iy), d2) in kept.iter().zip(&dists) {
            if d2 <= &r2 {
                for dy in -4..=4 {
                    for dx in -4..=4 {
                        candidates.insert((2 * ix + dx, 2 * iy + dy));
                    }
                }
            }
        }
        let mut ordered: Vec<(i64, i64)> = candidates.into_iter().collect();
        ordered.sort_unstable();
        level += 1;
        kept.clear();
        for (ix, iy) in ordered {
            if dec.decide(&grid_point(ix, iy, i64::from(level)), level)? {
                kept.push((ix, iy));
            }
        }
    }
}

/// Shapes with exact distance functions.
#[derive(Clone, Debug)]
pub enum Shape {
    Point(Point),
    /// Closed segment; a zero-length segment is a point.
    Segment(Point, Point),
    Circle { center: Point, radius: Dyadic },
    Disk { center: Point, radius: Dyadic },
    /// Closed polygonal boundary through the vertices in order.
    Polygon(Vec<Point>),
    /// Union of closed segments.
    Segments(Vec<(Point, Point)>),
}

impl Shape {
    fn segments(&self) -> Vec<(Point, Point)> {
        match self {
            Shape::Point(p) => vec![(p.clone(), p.clone())],
            Shape::Segment(a, b) => vec![(a.clone(), b.clone())],
            Shape::Polygon(v) => (0..v.len()).map(|i| (v[i].clone(), v[(i + 1) % v.len()].clone())).collect(),
            Shape::Segments(s) => s.clone(),
            Shape::Circle { .. } | Shape::Disk { .. } => Vec::new(),
        }
    }

    pub fn bound_box(&self) -> Rect {
        match self {
            Shape::Circle { center, radius } | Shape::Disk { center, radius } => Rect::around(center, radius),
            _ => {
                let segs = self.segments();
                Rect::of_points(segs.iter().flat_map(|(a, b)| [a, b]))
            }
        }
    }

    /// Exact squared distance for the piecewise-linear shapes.
    pub fn dist2(&self, p: &Point) -> Option<Ratio> {
        let segs = self.segments();
        segs.iter().map(|(a, b)| segment_dist2(p, a, b)).reduce(Ratio::min)
    }

    /// Distance to within `2^-n`.
    pub fn distance(&self, p: &Point, n: Precision) -> Dyadic {
        let n = i64::from(n);
        match self {
            Shape::Circle { center, radius } => {
                let s = sqrt_ratio(&Ratio::of(p.dist2(center)), n + 2);
                (s - radius).abs()
            }
            Shape::Disk { center, radius } => {
                let s = sqrt_ratio(&Ratio::of(p.dist2(center)), n + 2);
                (s - radius).max(Dyadic::zero())
            }
            _ => sqrt_ratio(&self.dist2(p).expect("shape has segments"), n + 1),
        }
    }
}

pub fn primitive_distance(shape: Shape) -> DistOracle {
    let description = format!("{shape:?}");
    let bound = shape.bound_box();
    DistOracle::new(description, Some(bound), move |p, n| Ok(shape.distance(p, n)))
}

/// Circle whose center coordinates and radius are given by oracles; each is
/// read at precision `n + 3`.
pub fn oracle_circle(cx: RealOracle, cy: RealOracle, radius: RealOracle) -> DistOracle {
    let description = format!("circle(({}, {}), {})", cx.description(), cy.description(), radius.description());
    let c = Point::new(cx.query(0), cy.query(0));
    let r_bound = radius.query(0).abs() + Dyadic::from_i64(2);
    let bound = Rect::around(&c, &(r_bound + Dyadic::one()));
    DistOracle::new(description, Some(bound), move |p, n| {
        let m = n + 3;
        let center = Point::new(cx.query(m), cy.query(m));
        let r = radius.query(m);
        let s = sqrt_ratio(&Ratio::of(p.dist2(&center)), i64::from(n) + 2);
        Ok((s - r).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn pt(x: i64, y: i64) -> Point {
        Point::from_parts((x, 0), (y, 0))
    }

    fn near(v: &Dyadic, target: &Dyadic, n: i64) -> bool {
        (v - target).abs() < Dyadic::pow2(-n)
    }

    fn disk2() -> Shape {
        Shape::Disk { center: pt(0, 0), radius: Dyadic::from_i64(2) }
    }

    fn window(r: i64) -> Rect {
        Rect::around(&pt(0, 0), &Dyadic::from_i64(r))
    }

    #[test]
    fn primitive_examples() {
        let point = primitive_distance(Shape::Point(pt(0, 0)));
        assert_eq!(point.eval(&pt(3, 4), 10).unwrap(), Dyadic::from_i64(5));
        let seg = primitive_distance(Shape::Segment(pt(-1, 0), pt(1, 0)));
        assert!(near(&seg.eval(&pt(0, 3), 20).unwrap(), &Dyadic::from_i64(3), 20));
        let circle = primitive_distance(Shape::Circle { center: pt(0, 0), radius: Dyadic::one() });
        assert!(near(&circle.eval(&pt(2, 0), 20).unwrap(), &Dyadic::one(), 20));
        let degenerate = primitive_distance(Shape::Segment(pt(1, 1), pt(1, 1)));
        assert!(near(&degenerate.eval(&pt(4, 5), 20).unwrap(), &Dyadic::from_i64(5), 20));
    }

    #[test]
    fn sqrt_ratio_error_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let r = Ratio {
                num: Dyadic::from_parts(rng.gen_range(0..1 << 40), -rng.gen_range(0..30)),
                den: Dyadic::from_parts(rng.gen_range(1..1 << 20), -rng.gen_range(0..30)),
            };
            let p = rng.gen_range(0..60);
            let s = sqrt_ratio(&r, p);
            let eps = Dyadic::pow2(-p);
            let lo = (&s - &eps).max(Dyadic::zero());
            let hi = &s + &eps;
            assert!(r.at_most_sq(&hi));
            assert!(&lo.square() * &r.den <= r.num);
        }
    }

    #[test]
    fn distance_is_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let shapes = [
            disk2(),
            Shape::Segment(pt(-1, 0), pt(1, 0)),
            Shape::Polygon(vec![pt(0, 0), pt(2, 0), pt(0, 1)]),
        ];
        for shape in shapes {
            let o = primitive_distance(shape);
            for _ in 0..200 {
                let rp = |rng: &mut ChaCha8Rng| Point::from_parts((rng.gen_range(-400..400), -7), (rng.gen_range(-400..400), -7));
                let (a, b) = (rp(&mut rng), rp(&mut rng));
                let n = 12;
                let diff = (o.eval(&a, n).unwrap() - o.eval(&b, n).unwrap()).abs();
                let gap = sqrt_ratio(&Ratio::of(a.dist2(&b)), 20) + Dyadic::pow2(-20);
                assert!(diff <= gap + Dyadic::pow2(1 - 12));
            }
        }
    }

    #[test]
    fn pixel_examples() {
        let dec = pixel_from_distance(&primitive_distance(disk2()));
        for n in 0..8 {
            assert!(dec.decide(&pt(0, 0), n).unwrap());
        }
        assert!(!dec.decide(&pt(4, 0), 1).unwrap());
        assert_eq!(dec.diagnose(&pt(4, 0), 1).unwrap(), Diagnosis::CertifiedOut);
        assert_eq!(dec.diagnose(&pt(0, 0), 3).unwrap(), Diagnosis::CertifiedIn);
        // gray zone: d_S = 1.5 * 2^-n
        let n = 4;
        let g = Point::new(Dyadic::from_i64(2) + Dyadic::from_parts(3, -5), Dyadic::zero());
        let first = dec.decide(&g, n).unwrap();
        assert_eq!(first, dec.decide(&g, n).unwrap());
    }

    #[test]
    fn segment_pixels_stay_close() {
        let dec = pixel_from_distance(&primitive_distance(Shape::Segment(pt(-1, 0), pt(1, 0))));
        let set = approximate_set(&dec, 3, 0, &window(2)).unwrap();
        assert!(!set.touches_boundary);
        for (ix, iy) in set.centers() {
            assert!(iy.abs() <= 2 && ix.abs() <= 10, "({ix},{iy})");
        }
        // every point of the segment lies in a kept pixel
        for ix in -8..=8 {
            assert!(set.centers().any(|c| c == (ix, 0)));
        }
    }

    #[test]
    fn empty_set_has_no_pixels() {
        let dec = pixel_from_distance(&DistOracle::empty());
        let set = approximate_set(&dec, 3, 0, &window(1)).unwrap();
        assert_eq!(set.centers().count(), 0);
    }

    #[test]
    fn csv_round_trip() {
        let dec = pixel_from_distance(&primitive_distance(disk2()));
        let set = approximate_set(&dec, 2, 1, &window(3)).unwrap();
        let text = set.to_csv();
        assert!(text.starts_with("# n=2\n# k=1\n# window="));
        let back = PixelSet::from_csv(&text).unwrap();
        assert_eq!(back.to_csv(), text);
        assert_eq!(back.centers().count(), set.centers().count());
    }

    fn single(ix: i64, iy: i64, n: Precision) -> PixelSet {
        PixelSet {
            n,
            k: 0,
            window: window(10),
            cells: vec![PixelCell { ix, iy, diagnosis: Diagnosis::CertifiedIn, subdivisions: 0, bit_ops: 0 }],
            touches_boundary: false,
        }
    }

    #[test]
    fn hausdorff_examples() {
        let a = single(0, 0, 0);
        assert_eq!(hausdorff_pixels(&a, &a, 10).unwrap(), DyInterval::point(Dyadic::zero()));
        let b = single(3, 4, 0);
        assert_eq!(hausdorff_pixels(&a, &b, 10).unwrap(), DyInterval::point(Dyadic::from_i64(5)));
        let mut two = single(0, 0, 0);
        two.cells.push(PixelCell { ix: 1, ..two.cells[0].clone() });
        let h = hausdorff_pixels(&two, &a, 10).unwrap();
        assert_eq!(h, DyInterval::point(Dyadic::one()));
        assert_eq!(hausdorff_pixels(&a, &two, 10).unwrap(), h);
        // mixed grids: (1,1) at pitch 1/2 is (1/2, 1/2)
        let fine = single(1, 1, 1);
        let hh = hausdorff_pixels(&a, &fine, 20).unwrap();
        assert!(hh.width() <= Dyadic::pow2(-20));
        assert!(hh.lo().square() <= d("1/2") && d("1/2") <= hh.hi().square());
    }

    #[test]
    fn hausdorff_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let mk = |rng: &mut ChaCha8Rng| {
                let mut s = single(0, 0, 2);
                s.cells.clear();
                for _ in 0..rng.gen_range(1..40) {
                    s.cells.push(PixelCell {
                        ix: rng.gen_range(-60..60),
                        iy: rng.gen_range(-60..60),
                        diagnosis: Diagnosis::Undetermined,
                        subdivisions: 0,
                        bit_ops: 0,
                    });
                }
                s
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            let pa: Vec<_> = a.centers().collect();
            let pb: Vec<_> = b.centers().collect();
            let dir = |f: &[(i64, i64)], t: &[(i64, i64)]| {
                f.iter()
                    .map(|p| t.iter().map(|q| (p.0 - q.0).pow(2) + (p.1 - q.1).pow(2)).min().unwrap())
                    .max()
                    .unwrap()
            };
            let want = Dyadic::from_parts(dir(&pa, &pb).max(dir(&pb, &pa)), -4);
            let h = hausdorff_pixels(&a, &b, 30).unwrap();
            assert!(h.lo().square() <= want && want <= h.hi().square());
            assert!(h.width() <= Dyadic::pow2(-30));
        }
    }

    #[test]
    fn disk_pixels_hausdorff_guarantee() {
        let shape = disk2();
        let dec = pixel_from_distance(&primitive_distance(shape));
        for n in 2..=5u32 {
            let set = approximate_set(&dec, n, 0, &window(3)).unwrap();
            let h = Dyadic::pow2(-i64::from(n));
            // kept centers within 2h of the disk
            for (ix, iy) in set.centers() {
                let c = grid_point(ix, iy, n.into());
                let r = Dyadic::from_i64(2) + &h * &Dyadic::from_i64(2);
                assert!(c.dist2(&pt(0, 0)) <= r.square());
            }
            // grid points inside the disk are kept, so every disk point is
            // within h/sqrt(2) of a kept center
            for cell in &set.cells {
                let c = grid_point(cell.ix, cell.iy, n.into());
                if c.dist2(&pt(0, 0)) <= Dyadic::from_i64(4) {
                    assert!(cell.decision());
                }
            }
        }
    }

    #[test]
    fn refinement_convergence() {
        for shape in [disk2(), Shape::Segment(pt(-1, 0), pt(1, 1))] {
            let dec = pixel_from_distance(&primitive_distance(shape));
            for n in 2..=5u32 {
                let a = approximate_set(&dec, n, 0, &window(3)).unwrap();
                let b = approximate_set(&dec, n + 1, 0, &window(3)).unwrap();
                let h = hausdorff_pixels(&a, &b, 20).unwrap();
                assert!(h.hi() <= &Dyadic::from_parts(6, -i64::from(n)));
            }
        }
    }

    #[test]
    fn round_trip_through_pixels() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let shapes = [disk2(), Shape::Segment(pt(-1, 0), pt(1, 1)), Shape::Circle { center: pt(0, 0), radius: Dyadic::one() }];
        for shape in shapes {
            let exact = primitive_distance(shape.clone());
            let back = distance_from_pixels(&pixel_from_distance(&exact), 10).unwrap();
            for _ in 0..15 {
                let x = Point::from_parts((rng.gen_range(-256..256), -6), (rng.gen_range(-256..256), -6));
                let got = back.eval(&x, 6).unwrap();
                let want = exact.eval(&x, 30).unwrap();
                assert!((got - want).abs() < Dyadic::pow2(-6) + Dyadic::pow2(-29), "{shape:?} at {x:?}");
            }
        }
        let exact = primitive_distance(disk2());
        let back = distance_from_pixels(&pixel_from_distance(&exact), 10).unwrap();
        assert!(matches!(back.eval(&pt(0, 0), 8), Err(SetError::PrecisionBudget { .. })));
    }

    #[test]
    fn single_pixel_distance() {
        let dec = PixelDecision::new("one pixel", Some(window(2)), |p, n| {
            let r = Dyadic::pow2(-i64::from(n));
            let hit = p.dist2(&Point::from_parts((1, -1), (0, 0))) <= r.square();
            Ok(PixelVerdict::new(if hit { Diagnosis::CertifiedIn } else { Diagnosis::CertifiedOut }))
        });
        let o = distance_from_pixels(&dec, 12).unwrap();
        let v = o.eval(&pt(2, 0), 8).unwrap();
        assert!(near(&v, &d("1.5"), 8));
    }

    #[test]
    fn oracle_circle_matches_exact() {
        let c = oracle_circle(RealOracle::from_i64(0), RealOracle::from_i64(0), RealOracle::constant(crate::Constant::OneThird));
        let v = c.eval(&pt(1, 0), 20).unwrap();
        // |3v - 2| < 3 * 2^-20
        assert!((&v * &Dyadic::from_i64(3) - Dyadic::from_i64(2)).abs() < Dyadic::from_parts(3, -20));
    }
}
