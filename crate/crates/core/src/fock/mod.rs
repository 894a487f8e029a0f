//! Truncated product-Hermite (Fock) representation: operator assembly,
//! diagonalization and spectral statistics.

mod density;
mod eigen;
mod hermite;
mod operators;
mod spacing;
mod spectrum;

pub use density::{eigenstate_density, max_overlap_state};
pub use eigen::{symmetric_eigen, symmetric_tridiagonal_eigenvalues, SymmetricEigen};
pub use hermite::{hermite_functions, GaussHermiteRule};
pub use operators::{
    boost_generator, boost_squared, build_c_operator, build_c_operator_on, build_hamiltonian, build_hamiltonian_on,
    diagonal, interior_max_abs, kron, ladder_matrices, FockBasis, FockOperator, QuadratureGrid,
};
pub use spacing::{
    ks_distance, poisson_cdf, poisson_density, spacing_statistics, summarize, synthetic_goe_levels,
    synthetic_poisson_levels, unfold_global, wigner_cdf, wigner_density, Histogram, SpacingMode, SpacingOptions,
    SpacingStats,
};
pub use spectrum::{diagonalize, SpectrumResult, MULTIPLET_CAPTURE};

/// Default number of quadrature nodes per axis.
pub const DEFAULT_QUAD_ORDER: usize = 96;
