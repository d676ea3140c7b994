//! Cross-module consistency checks run by `bitmodel selfcheck`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fractal::{julia_pixel, koch_hausdorff_sq, mandel_pixel, EscapeParams};
use crate::func::{g_machine, graph_distance, identity_machine};
use crate::sets::{
    approximate_set, distance_from_pixels, pixel_from_distance, primitive_distance, segment_dist2, sqrt_ratio, Diagnosis, PixelSet,
    Point, Ratio, Rect, Shape,
};
use crate::{DyInterval, Dyadic, RealOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Checks whose threshold can be deliberately broken with
/// [`Options::break_check`].
pub const BREAKABLE: [&str; 4] = ["round_trip", "hausdorff_guarantee", "graph_agreement", "pixel_contract"];

#[derive(Clone, Debug)]
pub struct Options {
    pub level: Level,
    /// Test hook: tighten the named check's threshold until it cannot hold.
    pub break_check: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "ok  " } else { "FAIL" }, self.name, self.detail)
    }
}

fn pt(x: i64, y: i64, e: i64) -> Point {
    Point::from_parts((x, e), (y, e))
}

fn square(half: i64) -> Rect {
    let iv = DyInterval::new(Dyadic::from_i64(-half), Dyadic::from_i64(half));
    Rect::new(iv.clone(), iv)
}

/// Exact comparisons of `d(p, S)` with `t`: `(d <= t, d < t)`.
pub fn compare_distance(shape: &Shape, p: &Point, t: &Dyadic) -> (bool, bool) {
    match shape {
        Shape::Disk { center, radius } => {
            let s2 = p.dist2(center);
            let outer = (radius + t).square();
            (s2 <= outer, s2 < outer)
        }
        Shape::Circle { center, radius } => {
            let s2 = p.dist2(center);
            let outer = (radius + t).square();
            let inner = (radius - t).square();
            let le = s2 <= outer && (radius <= t || s2 >= inner);
            let lt = s2 < outer && (radius < t || s2 > inner);
            (le, lt)
        }
        other => {
            let d2 = other.dist2(p).expect("piecewise-linear shape");
            let t2 = Ratio::of(t.square());
            (!t2.less_than(&d2), d2.less_than(&t2))
        }
    }
}

/// Violations of the pixel contract on a rendered set: decision 1 is required
/// at distance `<= h`, decision 0 at distance `>= gray * h`.
pub fn contract_violations(set: &PixelSet, gray: i64, shape: &Shape) -> usize {
    let p = set.pitch_exponent();
    let h = Dyadic::pow2(-i64::from(set.n));
    let far = &h * &Dyadic::from_i64(gray);
    set.cells
        .iter()
        .filter(|c| {
            let q = pt(c.ix, c.iy, -p);
            let near = compare_distance(shape, &q, &h).0;
            let is_far = !compare_distance(shape, &q, &far).1;
            (near && !c.decision()) || (is_far && c.decision())
        })
        .count()
}

fn round_trip(opts: &Options, tol: Dyadic) -> CheckResult {
    let shapes = [
        Shape::Disk { center: pt(0, 0, 0), radius: Dyadic::one() },
        Shape::Segment(pt(-1, 0, 0), pt(1, 1, 0)),
        Shape::Circle { center: pt(1, 1, -1), radius: Dyadic::pow2(-1) },
    ];
    let count = if opts.level == Level::Full { 20 } else { 4 };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = Dyadic::zero();
    for shape in shapes.iter().take(if opts.level == Level::Full { 3 } else { 1 }) {
        let exact = primitive_distance(shape.clone());
        let back = match distance_from_pixels(&pixel_from_distance(&exact), 10) {
            Ok(b) => b,
            Err(e) => return CheckResult { name: "round_trip", passed: false, detail: e.to_string() },
        };
        for _ in 0..count {
            let x = pt(rng.gen_range(-192..192), rng.gen_range(-192..192), -7);
            let got = back.eval(&x, 6);
            let want = exact.eval(&x, 40);
            match (got, want) {
                (Ok(g), Ok(w)) => worst = worst.max((g - w).abs()),
                (Err(e), _) | (_, Err(e)) => return CheckResult { name: "round_trip", passed: false, detail: e.to_string() },
            }
        }
    }
    let passed = worst < tol;
    CheckResult {
        name: "round_trip",
        passed,
        detail: format!("max |reconstructed - exact| = {} (limit {})", worst.to_decimal_string(), tol.to_decimal_string()),
    }
}

fn hausdorff_guarantee(opts: &Options, factor: i64) -> CheckResult {
    let shapes = [Shape::Disk { center: pt(0, 0, 0), radius: Dyadic::one() }, Shape::Segment(pt(-1, -1, -1), pt(3, 1, -2))];
    let top = if opts.level == Level::Full { 6 } else { 4 };
    let mut detail = String::new();
    let mut passed = true;
    for shape in &shapes {
        let dec = pixel_from_distance(&primitive_distance(shape.clone()));
        for n in 2..=top {
            let set = match approximate_set(&dec, n, 0, &square(2)) {
                Ok(s) => s,
                Err(e) => return CheckResult { name: "hausdorff_guarantee", passed: false, detail: e.to_string() },
            };
            let h = Dyadic::pow2(-i64::from(n));
            let p = set.pitch_exponent();
            let bound = &h * &Dyadic::from_i64(factor);
            // kept centers lie within the bound of the shape
            let far_kept = set.centers().filter(|&(ix, iy)| !compare_distance(shape, &pt(ix, iy, -p), &bound).0).count();
            // every shape point is within h/sqrt(2) of a grid point g, and
            // then d(g, S) <= h, so g must be kept
            let missing = set.cells.iter().filter(|c| !c.decision() && compare_distance(shape, &pt(c.ix, c.iy, -p), &h).0).count();
            let ok = missing == 0 && far_kept == 0 && factor >= 1;
            if !ok {
                passed = false;
                detail.push_str(&format!("{shape:?} n={n}: missing={missing} far={far_kept}; "));
            }
        }
    }
    if passed {
        detail = format!("d_H <= {factor} * 2^-n for n = 2..{top}");
    }
    CheckResult { name: "hausdorff_guarantee", passed, detail }
}

/// Exact squared distance from `p` to the polyline through `pts`.
fn polyline_dist2(pts: &[Point], p: &Point) -> Ratio {
    pts.windows(2).map(|w| segment_dist2(p, &w[0], &w[1])).reduce(Ratio::min).expect("two points")
}

fn graph_agreement(opts: &Options, tol: Option<Dyadic>) -> CheckResult {
    // identity on [-1, 1] has the diagonal segment as its graph
    let id = identity_machine(DyInterval::new(Dyadic::from_i64(-1), Dyadic::one()));
    let id_graph = graph_distance(&id);
    let diag = Shape::Segment(pt(-1, -1, 0), pt(1, 1, 0));
    // g(x) = 1 - x^3 against a chord polyline: |g''| <= 6, so chords of
    // width 2^-10 stay within 6 * 2^-20 / 8 < 2^-19 of the curve
    let g_graph = graph_distance(&g_machine());
    let poly: Vec<Point> = (0..=1024)
        .map(|i| {
            let x = Dyadic::from_parts(i, -10);
            let y = Dyadic::one() - x.pow(3);
            Point::new(x, y)
        })
        .collect();
    let count = if opts.level == Level::Full { 40 } else { 8 };
    let n = 12u32;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = Dyadic::zero();
    for _ in 0..count {
        let x = pt(rng.gen_range(-160..160), rng.gen_range(-160..160), -7);
        let a = id_graph.eval(&x, n);
        let b = g_graph.eval(&x, n);
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return CheckResult { name: "graph_agreement", passed: false, detail: e.to_string() },
        };
        let ea = (a - sqrt_ratio(&diag.dist2(&x).expect("segment"), 40)).abs();
        let eb = (b - sqrt_ratio(&polyline_dist2(&poly, &x), 40)).abs() - Dyadic::pow2(-19);
        worst = worst.max(ea).max(eb);
    }
    let tol = tol.unwrap_or_else(|| Dyadic::pow2(-i64::from(n)) + Dyadic::pow2(-18));
    CheckResult {
        name: "graph_agreement",
        passed: worst < tol,
        detail: format!("graph oracles within {} of geometric references (limit {})", worst.to_decimal_string(), tol.to_decimal_string()),
    }
}

fn pixel_contract(opts: &Options, gray: i64) -> CheckResult {
    let top = if opts.level == Level::Full { 8 } else { 5 };
    let shapes = [
        Shape::Disk { center: pt(1, 0, -2), radius: Dyadic::from_parts(3, -2) },
        Shape::Circle { center: pt(0, 0, 0), radius: Dyadic::one() },
        Shape::Segment(pt(-3, -1, -2), pt(1, 5, -3)),
    ];
    let mut bad = 0;
    for shape in &shapes {
        let dec = pixel_from_distance(&primitive_distance(shape.clone()));
        for n in 3..=top {
            match approximate_set(&dec, n, 0, &square(2)) {
                Ok(set) => bad += contract_violations(&set, gray, shape),
                Err(e) => return CheckResult { name: "pixel_contract", passed: false, detail: e.to_string() },
            }
        }
    }
    CheckResult { name: "pixel_contract", passed: bad == 0, detail: format!("{bad} violations over n = 3..{top}") }
}

/// `|z_t| > 2` for some `t <= steps` on the orbit of 0 under `z^2 + c`, in
/// `f64`; inconclusive orbits are rerun in 256-bit dyadic arithmetic.
pub fn sample_escapes(cx: f64, cy: f64, steps: u32) -> bool {
    let (mut x, mut y) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        let nx = x * x - y * y + cx;
        y = 2.0 * x * y + cy;
        x = nx;
        if x * x + y * y > 4.0 {
            return true;
        }
    }
    let c = (Dyadic::from_parts((cx * 2f64.powi(52)) as i64, -52), Dyadic::from_parts((cy * 2f64.powi(52)) as i64, -52));
    let (mut x, mut y) = (Dyadic::zero(), Dyadic::zero());
    let four = Dyadic::from_i64(4);
    for _ in 0..steps {
        let nx = (x.square() - y.square() + c.0.clone()).round_to(256);
        y = ((&x * &y).mul_pow2(1) + c.1.clone()).round_to(256);
        x = nx;
        if x.square() + y.square() > four {
            return true;
        }
    }
    false
}

fn mandelbrot_audit(opts: &Options) -> CheckResult {
    let n = if opts.level == Level::Full { 5 } else { 4 };
    let samples = if opts.level == Level::Full { 100 } else { 16 };
    let params = EscapeParams::default();
    let t = params.mandel_budget(n);
    let window = Rect::new(
        DyInterval::new(Dyadic::from_parts(-9, -2), Dyadic::from_parts(3, -2)),
        DyInterval::new(Dyadic::from_parts(-3, -1), Dyadic::from_parts(3, -1)),
    );
    let set = match approximate_set(&mandel_pixel(params), n, 0, &window) {
        Ok(s) => s,
        Err(e) => return CheckResult { name: "mandelbrot_audit", passed: false, detail: e.to_string() },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 2f64.powi(-(n as i32));
    let mut bad = 0;
    let mut audited = 0;
    for c in set.cells.iter().filter(|c| c.diagnosis == Diagnosis::CertifiedOut) {
        audited += 1;
        let (x0, y0) = (c.ix as f64 * h, c.iy as f64 * h);
        for _ in 0..samples {
            // uniform in the disk of radius 2h
            let (mut dx, mut dy);
            loop {
                dx = rng.gen_range(-1.0..1.0);
                dy = rng.gen_range(-1.0..1.0);
                if dx * dx + dy * dy <= 1.0 {
                    break;
                }
            }
            if !sample_escapes(x0 + 2.0 * h * dx, y0 + 2.0 * h * dy, 10 * t) {
                bad += 1;
            }
        }
    }
    let in_ok = [(0, 0), (-1, 0), (-2, 0)].iter().all(|&(x, y)| {
        set.cells.iter().find(|c| c.ix == x << n && c.iy == y << n).is_some_and(|c| c.decision())
    });
    CheckResult {
        name: "mandelbrot_audit",
        passed: bad == 0 && in_ok,
        detail: format!("{audited} certified_out pixels, {bad} non-escaping samples; members kept: {in_ok}"),
    }
}

fn julia_ground_truth(opts: &Options) -> CheckResult {
    let top = if opts.level == Level::Full { 6 } else { 4 };
    let circle = Shape::Circle { center: pt(0, 0, 0), radius: Dyadic::one() };
    let window = Rect::new(
        DyInterval::new(Dyadic::from_parts(-5, -2), Dyadic::from_parts(5, -2)),
        DyInterval::new(Dyadic::from_parts(-5, -2), Dyadic::from_parts(5, -2)),
    );
    let mut bad = 0;
    for n in 3..=top {
        let j = julia_pixel(RealOracle::from_i64(0), RealOracle::from_i64(0), false, EscapeParams::default());
        match approximate_set(&j, n, 0, &window) {
            Ok(set) => bad += contract_violations(&set, 2, &circle),
            Err(e) => return CheckResult { name: "julia_ground_truth", passed: false, detail: e.to_string() },
        }
    }
    CheckResult { name: "julia_ground_truth", passed: bad == 0, detail: format!("{bad} disagreements with the unit circle, n = 3..{top}") }
}

fn koch_convergence(opts: &Options) -> CheckResult {
    let top = if opts.level == Level::Full { 5 } else { 3 };
    let mut prev: Option<(num_bigint::BigInt, num_bigint::BigInt)> = None;
    for i in 0..=top {
        let h = match koch_hausdorff_sq(i) {
            Ok(h) => h,
            Err(e) => return CheckResult { name: "koch_convergence", passed: false, detail: e.to_string() },
        };
        if !h.is_exact() {
            return CheckResult { name: "koch_convergence", passed: false, detail: format!("level {i} bounds not tight") };
        }
        if let Some((pn, pd)) = &prev {
            // d_(i)^2 / d_(i-1)^2 = 1/9
            if &h.lower.0 * pd * 9 != pn * &h.lower.1 {
                return CheckResult { name: "koch_convergence", passed: false, detail: format!("ratio at level {i} is not 1/3") };
            }
        }
        prev = Some(h.lower);
    }
    CheckResult { name: "koch_convergence", passed: true, detail: format!("d_H(K_i, K_i+1) shrinks by exactly 1/3 for i < {top}") }
}

pub fn run(opts: &Options) -> Vec<CheckResult> {
    let broken = |name: &str| opts.break_check.as_deref() == Some(name);
    let rt_tol = if broken("round_trip") { Dyadic::zero() } else { Dyadic::pow2(-6) + Dyadic::pow2(-7) };
    let factor = if broken("hausdorff_guarantee") { 0 } else { 4 };
    let graph_tol = if broken("graph_agreement") { Some(Dyadic::zero()) } else { None };
    let gray = if broken("pixel_contract") { 1 } else { 2 };
    vec![
        round_trip(opts, rt_tol),
        hausdorff_guarantee(opts, factor),
        graph_agreement(opts, graph_tol),
        pixel_contract(opts, gray),
        koch_convergence(opts),
        julia_ground_truth(opts),
        mandelbrot_audit(opts),
    ]
}
