//! Render jobs: a set, a grid-aligned window and output writers.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::expr::{compile, parse_expr, ExprError};
use crate::fractal::{julia_pixel, koch_distance, mandel_pixel, EscapeParams, LevelChoice};
use crate::func::{compose, cuberoot_machine, exp_machine, expm1_machine, g_machine, graph_distance, identity_machine, sqrt_machine, step_graph, FuncMachine};
use crate::sets::{approximate_set, pixel_from_distance, primitive_distance, Diagnosis, PixelDecision, PixelSet, Point, Rect, SetError, Shape};
use crate::{DyInterval, Dyadic};

/// Largest `n + k` a job may ask for.
pub const MAX_GRID_BITS: u32 = 48;
/// Largest pixel count of one render.
pub const MAX_PIXELS: u64 = 1 << 22;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid job: {0}")]
    Job(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Machines available to `graph:<id>`.
pub const GRAPH_MACHINES: [&str; 7] = ["g", "exp", "expm1", "cbrt", "sqrt", "cbrt_g", "identity"];

pub fn graph_machine(id: &str) -> Option<FuncMachine> {
    Some(match id {
        "g" => g_machine(),
        "exp" => exp_machine(),
        "expm1" => expm1_machine(),
        "cbrt" => cuberoot_machine(),
        "sqrt" => sqrt_machine(),
        "cbrt_g" => compose(&cuberoot_machine(), &g_machine()).ok()?,
        "identity" => identity_machine(DyInterval::new(Dyadic::from_i64(-1), Dyadic::one())),
        _ => return None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetSpec {
    Koch,
    Mandelbrot,
    /// `c` given as two expressions, for example `"-1"` and `"0"`.
    Julia { c_re: String, c_im: String, filled: bool },
    Disk { center: Point, radius: Dyadic },
    Circle { center: Point, radius: Dyadic },
    Segment { a: Point, b: Point },
    Graph(String),
    Step,
}

impl SetSpec {
    pub fn id(&self) -> String {
        match self {
            SetSpec::Koch => "koch".into(),
            SetSpec::Mandelbrot => "mandelbrot".into(),
            SetSpec::Julia { filled: true, .. } => "julia-filled".into(),
            SetSpec::Julia { .. } => "julia".into(),
            SetSpec::Disk { .. } => "disk".into(),
            SetSpec::Circle { .. } => "circle".into(),
            SetSpec::Segment { .. } => "segment".into(),
            SetSpec::Graph(id) => format!("graph:{id}"),
            SetSpec::Step => "step".into(),
        }
    }

    /// Whether decision `1` rests on an unproved iteration budget.
    pub fn heuristic(&self) -> bool {
        matches!(self, SetSpec::Mandelbrot | SetSpec::Julia { .. })
    }
}

#[derive(Clone, Debug)]
pub struct RenderJob {
    pub set: SetSpec,
    pub center: Point,
    pub n: u32,
    pub k: u32,
    pub half_width: Dyadic,
    pub params: EscapeParams,
}

impl RenderJob {
    pub fn window(&self) -> Rect {
        Rect::around(&self.center, &self.half_width)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let bits = self.n + self.k;
        if bits > MAX_GRID_BITS {
            return Err(RenderError::Job(format!("n + k = {bits} exceeds {MAX_GRID_BITS}")));
        }
        if !self.half_width.is_positive() {
            return Err(RenderError::Job("half-width must be positive".into()));
        }
        let pitch = -i64::from(bits);
        let aligned = |v: &Dyadic| v.is_zero() || v.exponent() >= pitch;
        for (name, v) in [("center x", &self.center.x), ("center y", &self.center.y), ("half-width", &self.half_width)] {
            if !aligned(v) {
                return Err(RenderError::Job(format!("{name} {v} is not a multiple of 2^{pitch}")));
            }
        }
        let side = self.half_width.mul_pow2(i64::from(bits) + 1).to_i64().unwrap_or(i64::MAX);
        let pixels = (side as u64 + 1).saturating_mul(side as u64 + 1);
        if pixels > MAX_PIXELS {
            return Err(RenderError::Job(format!("{pixels} pixels exceed the limit of {MAX_PIXELS}")));
        }
        if let SetSpec::Graph(id) = &self.set {
            if graph_machine(id).is_none() {
                return Err(RenderError::Job(format!("unknown machine {id:?}; known: {}", GRAPH_MACHINES.join(", "))));
            }
        }
        Ok(())
    }

    pub fn decision(&self) -> Result<PixelDecision, RenderError> {
        let params = self.params.clone();
        Ok(match &self.set {
            SetSpec::Koch => pixel_from_distance(&koch_distance(LevelChoice::Auto)),
            SetSpec::Mandelbrot => mandel_pixel(params),
            SetSpec::Julia { c_re, c_im, filled } => {
                let cx = compile(&parse_expr(c_re)?, 128)?.oracle;
                let cy = compile(&parse_expr(c_im)?, 128)?.oracle;
                julia_pixel(cx, cy, *filled, params)
            }
            SetSpec::Disk { center, radius } => {
                pixel_from_distance(&primitive_distance(Shape::Disk { center: center.clone(), radius: radius.clone() }))
            }
            SetSpec::Circle { center, radius } => {
                pixel_from_distance(&primitive_distance(Shape::Circle { center: center.clone(), radius: radius.clone() }))
            }
            SetSpec::Segment { a, b } => pixel_from_distance(&primitive_distance(Shape::Segment(a.clone(), b.clone()))),
            SetSpec::Graph(id) => {
                let m = graph_machine(id).ok_or_else(|| RenderError::Job(format!("unknown machine {id:?}")))?;
                pixel_from_distance(&graph_distance(&m))
            }
            SetSpec::Step => pixel_from_distance(&step_graph(&self.window())),
        })
    }
}

pub struct RenderOutput {
    pub job: RenderJob,
    pub pixels: PixelSet,
    pub wall_time: Duration,
}

pub fn render(job: &RenderJob) -> Result<RenderOutput, RenderError> {
    job.validate()?;
    let decision = job.decision()?;
    let start = Instant::now();
    let pixels = approximate_set(&decision, job.n, job.k, &job.window())?;
    Ok(RenderOutput { job: job.clone(), pixels, wall_time: start.elapsed() })
}

pub fn gray_level(d: Diagnosis) -> u8 {
    match d {
        Diagnosis::CertifiedOut => 255,
        Diagnosis::CertifiedIn => 64,
        Diagnosis::Undetermined => 0,
    }
}

/// Plain PGM (P2), rows top-down as stored in the pixel set.
pub fn to_pgm(set: &PixelSet) -> String {
    let (w, h) = set.dims();
    let mut out = format!("P2\n{w} {h}\n255\n");
    for row in set.cells.chunks(w.max(1)) {
        let line: Vec<String> = row.iter().map(|c| gray_level(c.diagnosis).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

impl RenderOutput {
    pub fn stats_text(&self) -> String {
        let cells = &self.pixels.cells;
        let count = cells.len().max(1) as f64;
        let bit_ops: u64 = cells.iter().map(|c| c.bit_ops).sum();
        let splits: u64 = cells.iter().map(|c| c.subdivisions).sum();
        let ones = cells.iter().filter(|c| c.decision()).count();
        let mut s = String::new();
        let _ = writeln!(s, "set={}", self.job.set.id());
        let _ = writeln!(s, "n={}", self.job.n);
        let _ = writeln!(s, "k={}", self.job.k);
        let _ = writeln!(s, "window={}", self.pixels.window.to_text());
        let _ = writeln!(s, "pixels={}", cells.len());
        for d in [Diagnosis::CertifiedOut, Diagnosis::CertifiedIn, Diagnosis::Undetermined] {
            let _ = writeln!(s, "{}={}", d.as_str(), self.pixels.count(d));
        }
        let _ = writeln!(s, "decide_1={ones}");
        let _ = writeln!(s, "wall_time_s={:.3}", self.wall_time.as_secs_f64());
        let _ = writeln!(s, "bitops_total={bit_ops}");
        let _ = writeln!(s, "bitops_mean={:.1}", bit_ops as f64 / count);
        let _ = writeln!(s, "subdivisions_total={splits}");
        let _ = writeln!(s, "heuristic_one_direction={}", self.job.set.heuristic());
        if let SetSpec::Mandelbrot = self.job.set {
            let _ = writeln!(s, "t_max={}", self.job.params.mandel_budget(self.job.n));
        }
        if let SetSpec::Julia { .. } = self.job.set {
            let _ = writeln!(s, "t_budget={}", self.job.params.julia_budget(self.job.n));
        }
        s
    }

    /// Writes `<prefix>.pgm`, `<prefix>.csv` and `<prefix>.stats`.
    pub fn write(&self, prefix: &Path) -> Result<Vec<PathBuf>, RenderError> {
        let files = [("pgm", to_pgm(&self.pixels)), ("csv", self.pixels.to_csv()), ("stats", self.stats_text())];
        let mut written = Vec::new();
        for (ext, text) in files {
            let mut name = prefix.as_os_str().to_owned();
            name.push(format!(".{ext}"));
            let path = PathBuf::from(name);
            fs::write(&path, text).map_err(|source| RenderError::Io { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(set: SetSpec, n: u32, hw: i64) -> RenderJob {
        RenderJob {
            set,
            center: Point::from_parts((0, 0), (0, 0)),
            n,
            k: 0,
            half_width: Dyadic::from_i64(hw),
            params: EscapeParams::default(),
        }
    }

    #[test]
    fn validation() {
        let mut j = job(SetSpec::Koch, 4, 1);
        assert!(j.validate().is_ok());
        j.center = Point::from_parts((1, -6), (0, 0));
        assert!(j.validate().is_err());
        j.k = 2;
        assert!(j.validate().is_ok());
        assert!(job(SetSpec::Graph("nope".into()), 4, 1).validate().is_err());
        assert!(job(SetSpec::Koch, 30, 1).validate().is_err());
    }

    #[test]
    fn disk_render_matches_geometry() {
        let spec = SetSpec::Disk { center: Point::from_parts((0, 0), (0, 0)), radius: Dyadic::from_i64(2) };
        let out = render(&job(spec, 5, 4)).unwrap();
        let h = out.pixels.pitch_exponent();
        for c in &out.pixels.cells {
            let (ix, iy) = (c.ix, c.iy);
            // exact distance to the disk of radius 2 in pitch units: r2 = ix^2 + iy^2
            let r2 = ix * ix + iy * iy;
            let two = 2i64 << h;
            if r2 <= (two + 1) * (two + 1) {
                assert!(c.decision(), "({ix},{iy})");
            }
            if r2 >= (two + 2) * (two + 2) {
                assert!(!c.decision(), "({ix},{iy})");
            }
        }
        let pgm = to_pgm(&out.pixels);
        assert!(pgm.starts_with("P2\n257 257\n255\n"));
        let stats = out.stats_text();
        assert!(stats.contains("set=disk") && stats.contains("heuristic_one_direction=false"));
    }

    #[test]
    fn mandelbrot_grid_point_at_one() {
        let mut j = job(SetSpec::Mandelbrot, 6, 2);
        j.center = Point::from_parts((1, 0), (0, 0));
        j.half_width = Dyadic::pow2(-2);
        let out = render(&j).unwrap();
        let cell = out.pixels.cells.iter().find(|c| c.ix == 64 && c.iy == 0).map(|c| c.diagnosis);
        assert_eq!(cell, Some(Diagnosis::CertifiedOut));
    }

    #[test]
    fn deterministic_outputs() {
        let spec = SetSpec::Julia { c_re: "-1".into(), c_im: "0".into(), filled: false };
        let a = render(&job(spec.clone(), 4, 2)).unwrap();
        let b = render(&job(spec, 4, 2)).unwrap();
        assert_eq!(a.pixels.to_csv(), b.pixels.to_csv());
        assert_eq!(to_pgm(&a.pixels), to_pgm(&b.pixels));
    }
}
