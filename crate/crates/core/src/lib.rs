//! Numerical solutions of the gauge-reduced SU(2) Hitchin equations on the
//! plane, for det Φ a polynomial of degree at most three, together with the
//! L² geometry of the resulting moduli.
//!
//! The crate is organised bottom-up:
//!
//! * [`poly`] and [`model`]: polynomials, root finding, factorizations
//!   μ₊μ₋ = −H and the ψ-gauge field reconstruction.
//! * [`radial`]: rotationally-symmetric boundary-value problems (n = 1, and
//!   the n = 2 family labelled by B).
//! * [`elliptic`]: the two-dimensional Newton solver for ψ with α = 0.
//! * [`geometry`]: gauge-projected tangent vectors, the L² norm, the
//!   conformal factor Ω and Gaussian curvature on the surfaces S₊ and S₋.
//! * [`asymptotics`]: the singular (point-lump) approximation: the constant
//!   c, the flat asymptotic metric, the monodromy Υ and the moduli count.
//! * [`output`]: CSV and SVG writers shared by the command-line front end.

// `!(x >= lo)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod mat2;
pub mod model;
pub mod output;
pub mod poly;
pub mod quad;
pub mod radial;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
