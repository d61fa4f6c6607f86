//! Coupled Stokes–Darcy flow solver on two-rectangle domains.
//!
//! The free-flow region is discretized with weak Galerkin elements (independent
//! interior and edge polynomials, weak differential operators, stabilizer), the
//! porous region with H(div)-conforming BDM mixed elements, and the two are tied
//! together across the horizontal interface by a mortar Lagrange multiplier and
//! the Beavers–Joseph–Saffman slip term. A manufactured-solution harness measures
//! convergence orders in the six norms reported by the verification tables.

pub mod basis_quad;
pub mod coupling;
pub mod mesh;
pub mod mfem_darcy;
pub mod system;
pub mod verification;
pub mod wg_stokes;

/// Errors shared across the whole pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("degenerate element: {0}")]
    DegenerateElement(String),

    #[error("unsupported degree {requested} (supported range {min}..={max})")]
    UnsupportedDegree {
        requested: usize,
        min: usize,
        max: usize,
    },

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid degree profile: {0}")]
    InvalidProfile(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("incomplete case data: {0}")]
    IncompleteCase(String),

    #[error("DOF budget exceeded at level {level}: {dofs} unknowns > budget {budget}")]
    BudgetExceeded {
        level: u32,
        dofs: usize,
        budget: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
