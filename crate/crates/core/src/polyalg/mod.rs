//! Exact polynomial algebra over the rationals.

mod bipoly;
mod rational;
mod roots;
mod unipoly;

pub use bipoly::{invariance_residual, BiPoly, FloatBiPoly};
pub use rational::{
    format_rational, from_f64, int, parse_rational, pow2_neg, ratio, simplest_in, to_f64, Rational,
};
pub use roots::{
    has_root_in, isolate_real_roots, refine_enclosure, root_to_f64, sign_at_rational, sturm_count,
    RootEnclosure, SturmSequence,
};
pub use unipoly::{FloatPoly, UniPoly};
