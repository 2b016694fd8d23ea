//! Planar Liénard systems with a prescribed algebraic limit cycle.
//!
//! Given polynomials `p` and `q`, [`synthesis`] builds the vector field
//! `x' = y, y' = (3/2 q p' + p q') y - (p'/2)(p q^2 - 1)` together with its
//! invariant curve `(y - p q)^2 - p = 0`. [`hypotheses`] certifies, with exact
//! rational arithmetic, the conditions under which each oval of that curve is
//! a hyperbolic limit cycle; [`stability`] evaluates the characteristic
//! integrals and classifies the cycle; [`dynamics`] cross-checks everything
//! by integrating the flow.

pub mod dynamics;
pub mod error;
pub mod hypotheses;
pub mod polyalg;
pub mod stability;
pub mod synthesis;

pub use error::{AlgError, CertifyError, DynamicsError, StabilityError, SynthesisError};
