//! Nonlinear pairings `(b(·,u), Du)` between divergence-measure fields and BV
//! functions, computed exactly on piecewise-polynomial data.
//!
//! A field `b(x, t)` is given cellwise on a polygonal partition together with
//! its `t`-antiderivative `B`. A BV function `u` is given cellwise, with jumps
//! on the partition skeleton and, in one dimension, an optional Cantor part.
//! The pairing measure is assembled from explicit densities
//! ([`pairing::pairing_decomposition`]) and cross-checked against its
//! distributional definition, a mollification limit, and a brute-force weak
//! divergence ([`oracle`]).
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bvfunc;
pub mod cantor;
pub mod clip;
pub mod field;
pub mod gaussgreen;
pub mod geometry;
pub mod math;
pub mod measure;
pub mod mollify;
pub mod oracle;
pub mod pairing;
pub mod poly;
pub mod quad;
pub mod roots;
pub mod traces;
pub mod vec2;

use alloc::string::String;

pub use bvfunc::PiecewiseBV;
pub use cantor::CantorSet;
pub use field::PiecewiseField;
pub use geometry::{FinitePerimeterSet, PolygonalDomain};
pub use measure::{HybridMeasure, TestFunction};
pub use pairing::PairingResult;
pub use poly::Poly;
pub use quad::{Integrator, Resolution};
pub use vec2::Vec2;

/// Errors raised by the numerical core.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to reach its tolerance.
    #[error("numeric error: {message} (best estimate {estimate})")]
    Numeric { message: String, estimate: f64 },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>, estimate: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            estimate,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

/// Absolute tolerance for point-on-edge tests, in domain coordinates.
pub const GEOM_TOL: f64 = 1e-12;
