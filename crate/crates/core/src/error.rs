//! Error type shared by every module of the library.
//!
//! Numeric routines distinguish between *domain* errors (bad inputs the
//! caller can fix), *precision* errors (the requested quantity cannot be
//! resolved inside the error budget) and *convergence* errors (an iterative
//! process failed its own decay contract and aborted rather than returning a
//! silently wrong number).

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    /// Division by the zero polynomial or zero rational.
    #[error("division by zero polynomial")]
    DivisionByZeroPoly,

    /// Ball division where the denominator ball contains zero.
    #[error("indeterminate division")]
    IndeterminateDivision,

    /// A ball operation (sqrt near a branch point, Betti solve, ...) cannot
    /// resolve the result inside the error budget.
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    /// An `AlgebraicNumber` was built from a reducible minimal polynomial.
    #[error("reducible minimal polynomial: {0}")]
    ReducibleMinimalPolynomial(String),

    /// Irreducibility could not be certified with the desk-scale tests.
    #[error("cannot certify irreducibility of the candidate minimal polynomial: {0}")]
    UncertifiedIrreducibility(String),

    /// Degree budget exceeded in exact symbolic arithmetic.
    #[error("degree overflow: raise budget or lower max_doublings")]
    DegreeOverflow,

    /// An algebraic-number degree above the supported cap.
    #[error("algebraic degree {0} exceeds the supported cap of {1}")]
    DegreeCap(usize, usize),

    /// A base parameter hit a removed singular value.
    #[error("point outside S")]
    PointOutsideBase,

    /// A section coordinate has a pole at the requested fiber.
    #[error("section undefined here")]
    SectionUndefined,

    /// A point failed the exact curve-equation invariant.
    #[error("point does not satisfy the curve equation: {0}")]
    NotOnCurve(String),

    /// Group-law operands live on different fibers or mix section/fiber
    /// contexts.
    #[error("mixed fiber contexts")]
    MixedFiberContexts,

    /// The family has constant j-invariant; the trace case is unsupported.
    #[error("trace case unsupported")]
    IsotrivialFamily,

    /// The discriminant vanishes identically: not an elliptic family.
    #[error("discriminant vanishes identically: {0}")]
    SingularFamily(String),

    /// An analytic evaluation was requested too close to the discriminant
    /// locus.
    #[error("too close to discriminant locus")]
    TooCloseToDiscriminant,

    /// A monodromy loop needs refinement (passes too close to a singular
    /// value, or the continuation residual is above threshold).
    #[error("refine loop subdivision")]
    RefineLoopSubdivision,

    /// An iterative process violated its decay contract.
    #[error("non-convergence: {0}")]
    NonConvergent(String),

    /// Counting was requested for a degenerate section.
    #[error("Betti image not open; count undefined")]
    BettiImageNotOpen,

    /// The Monte-Carlo volume pass detected a sign change of delta0.
    #[error("delta0 changes sign: shrink U''")]
    ShrinkRegion,

    /// The height inequality experiment refuses generically special sections.
    #[error("inequality has no content on generically special X")]
    SpecialSectionRefused,

    /// Malformed input (dimension mismatch, point outside a domain box,
    /// empty sample set, bad configuration value, ...).
    #[error("domain error: {0}")]
    Domain(String),
}

impl CoreError {
    /// Convenience constructor for [`CoreError::Domain`].
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }
}
