pub mod cost;
pub mod dyadic;

pub use dyadic::{Dyadic, ParseDyadicError};
pub mod interval;

pub use interval::{ComplexBox, DyInterval, IvOp};
pub mod oracle;

pub use oracle::{Constant, OracleError, Precision, RealOracle};
pub mod sets;

pub use sets::{
    approximate_set, distance_from_pixels, hausdorff_pixels, pixel_from_distance, primitive_distance,
    Diagnosis, DistOracle, PixelDecision, PixelSet, PixelVerdict, Point, Rect, SetError, Shape,
};
pub mod func;

pub use func::{compose, graph_distance, step_graph, FuncError, FuncMachine};
pub mod fractal;
pub mod expr;
pub mod render;
pub mod selfcheck;
