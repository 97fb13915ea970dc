//! Period lattices, elliptic logarithms, Betti coordinates, monodromy, and
//! degeneracy diagnostics for a Weierstrass family over the λ-line.

pub mod agm;
pub mod cpoint;
pub mod frame;
pub mod log;
pub mod map;

pub use agm::{period_basis, PeriodBasis};
pub use cpoint::{CPoint, CurveC};
pub use frame::{circle_loop, continue_basis, frame_at, monodromy, MonodromyMatrix, PeriodFrame};
pub use log::elliptic_log;
pub use map::{
    betti_coords, betti_jacobian, betti_of_section, degeneracy_rank, fiber_curve,
    section_at_complex, transversality_delta0, wrapped_distance, BettiPoint, DegeneracyReport,
};
