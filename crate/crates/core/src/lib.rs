//! Toeplitz operators on weighted Bergman spaces over complex projective space.
//!
//! The Bergman space of weight `m` over `P^n(C)` is realized in an affine chart as
//! the polynomials of degree at most `m` on `C^n`, square-integrable against the
//! probability measure
//!
//! ```text
//! dnu_m(z) = (n+m)!/(pi^n m!) * dz / (1 + |z|^2)^(n+m+1).
//! ```
//!
//! For a bounded symbol invariant under a block subgroup
//! `U(k_1) x ... x U(k_s)` of `U(n)`, the Toeplitz operator is diagonalized by the
//! monomial basis and its eigenvalues are explicit half-line / orthant integrals.
//! This crate builds the operators as dense matrices, evaluates the closed-form
//! spectra by deterministic quadrature, and verifies the representation-theoretic
//! structure (isotypic decompositions, multiplicity-freeness, commutativity)
//! numerically.

pub mod bergman;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod quadrature;
pub mod representation;
pub mod symbols;
pub mod toeplitz;

pub use bergman::SpaceParams;
pub use combinatorics::{BasisOrder, MultiIndex};
pub use error::Error;
pub use symbols::{BlockPartition, Invariance, Symbol};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix type used for operators and group elements.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
