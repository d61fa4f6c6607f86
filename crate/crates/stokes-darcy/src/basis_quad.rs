//! Polynomial bases on triangles and edges, Gaussian quadrature, and the L²
//! projection operators built from them.

mod cell;
mod edge;
mod quad;

pub use cell::{poly_dim, project_cell, project_cell_vector, CellBasis};
pub use edge::{project_edge, project_edge_vector, EdgeBasis};
pub use quad::{EdgeRule, QuadRule, Rules, MAX_EXACTNESS};
