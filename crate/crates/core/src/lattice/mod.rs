//! Lattice-point counting for parametric systems ψ_N = N·φ₁ − φ₂ and its
//! application to counting torsion specializations of a section.

pub mod engine;
pub mod torsion;

pub use engine::{
    count_lattice_points, delta0, psi_eval, volume_growth, CertifiedPoint, CountReport,
    SmoothMap, VolumeEstimate,
};
pub use torsion::{torsion_specialization_count, TorsionCountReport, TorsionHit};
