//! Partial sums over quadratic twists of `y^2 = f(x)` and the lattices
//! `L_{alpha, d, d'}` that organise them.
//!
//! The crate is split by capability:
//!
//! - [`arith`]: factorisation, squarefree parts, divisor sums, `zeta`.
//! - [`curve`]: the cubic, its binary form `F(u, v)`, windows on the x-line.
//! - [`psi`]: coprime pairs in a box, twist classification, rank mining.
//! - [`series`]: the S and R partial sums.
//! - [`lattice`]: root sets modulo `d^2`, reduced bases, the Q sum.
//! - [`heuristics`]: random-annulus model experiments.
//! - [`verify`]: self-checks against brute-force oracles.
//! - [`cli`]: the `qtwist` command line.

pub mod arith;
pub mod cli;
pub mod curve;
pub mod error;
pub mod heuristics;
pub mod kahan;
pub mod lattice;
pub mod psi;
mod serde_int;
pub mod series;
pub mod verify;

pub use curve::{Curve, WindowX};
pub use error::{Error, Result};
pub use series::{Membership, SeriesKind, SumParams, SumReport};
