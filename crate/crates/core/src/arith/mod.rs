//! Exact and validated arithmetic: rationals, polynomials in the base
//! parameter, rational functions, complex balls, and certified algebraic
//! numbers.

pub mod algebraic;
pub mod ball;
pub mod poly;
pub mod rational;
pub mod ratfunc;
pub mod roots;

pub use algebraic::AlgebraicNumber;
pub use ball::{cplx, ComplexBall};
pub use poly::Polynomial;
pub use ratfunc::RationalFunction;
pub use rational::Rat;
