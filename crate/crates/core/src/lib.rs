//! Newton polygon strata of cyclic covers of the projective line.
//!
//! The crate computes, for a monodromy datum `(m, N, a)` and a prime class
//! `p mod m`, the set of Newton polygons allowed by the Kottwitz conditions,
//! the μ-ordinary Dieudonné module with its Ekedahl–Oort type, the boundary
//! degenerations of the family and the resulting smoothness verdicts.

pub mod arith;
pub mod classify;
pub mod degeneration;
pub mod dieudonne;
pub mod error;
pub mod golden;
pub mod kottwitz;
pub mod mass;
pub mod monodromy;
pub mod newton;
pub mod qr;
pub mod report;

pub use error::{Error, Result};
pub use monodromy::{MonodromyDatum, Signature};
pub use newton::{NewtonPolygon, Slope};
