//! Exact arithmetic and analytic machinery for heights on elliptic surfaces.
//!
//! The crate models one-parameter Weierstrass families `y² = x³ + a₄(λ)x +
//! a₆(λ)` over an open subset of the λ-line together with sections defined
//! over ℚ(λ), and provides:
//!
//! * exact rational / polynomial / rational-function arithmetic and certified
//!   algebraic numbers ([`arith`]);
//! * Weil heights over ℚ and over ℚ(λ), naive total heights on the surface,
//!   and heights on the base ([`heights`]);
//! * the family group law, torsion analysis, and specialization ([`family`]);
//! * Néron–Tate canonical heights over both fields by the doubling limit
//!   ([`canonical`]);
//! * period lattices, elliptic logarithms, Betti coordinates, monodromy, and
//!   degeneracy diagnostics ([`betti`]);
//! * a lattice-point counting engine for torsion-value loci ([`lattice`]).

pub mod arith;
pub mod betti;
pub mod canonical;
pub mod error;
pub mod family;
pub mod heights;
pub mod lattice;

pub use error::{CoreError, Result};
