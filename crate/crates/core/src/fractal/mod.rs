//! Koch snowflake, Mandelbrot set and quadratic Julia sets.

pub mod koch;
pub mod quadratic;

pub use koch::{auto_level, koch_distance, koch_hausdorff_sq, koch_polygon, HausdorffSq, KochApprox, KochError, LevelChoice, MAX_KOCH_LEVEL};
pub use quadratic::{julia_classify, julia_pixel, mandel_escape, mandel_pixel, parameter_box, Escape, EscapeParams, Orbit};
