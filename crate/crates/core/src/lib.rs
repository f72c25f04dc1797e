//! Deterministic velocity-space solver for the spatially homogeneous
//! Landau-Coulomb equation
//!
//! ```text
//! ∂t f = ∇·(A[f]∇f − ∇a[f] f),   A[f] = Π(z)/(8π|z|) ∗ f,   a[f] = 1/(4π|z|) ∗ f
//! ```
//!
//! together with the diagnostics used to study small perturbations
//! `h = f − μ` of the Maxwellian: weighted norms, entropy, level-set
//! energies, De Giorgi iteration, moment envelopes and smoothing fits.
//!
//! The crate is organised bottom-up: [`grid`] (lattice, quadrature,
//! differentiation), [`fields`] (norms and functionals), [`coefficients`]
//! (free-space convolutions), [`solver`] (time stepping), [`analysis`]
//! (trajectory diagnostics) and [`io`] (config and persistence).

// Guards of the form `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod coefficients;
pub mod error;
mod fft;
pub mod fields;
pub mod grid;
pub mod io;
pub mod solver;
pub mod verify;

pub use analysis::{exponents, ExponentSet};
pub use coefficients::{compute_coefficients, CoefficientSet, CoefficientSolver};
pub use error::{Error, Result};
pub use fields::{moments, MomentVector, NormRequest};
pub use grid::{make_grid, Field, Grid, SymTensorField, VecField};
pub use solver::{run, InitialDatum, SimConfig, Trajectory};
