//! Dense symmetric linear algebra and one-dimensional spectral utilities.

pub mod correlate;
pub mod density;
pub mod matrix;
pub mod quadrature;
pub mod spectrum;

pub use correlate::{cross_correlate, Analytic, CrossCorrelation, SpectralFunction, Tabulated};
pub use density::{count_in, density_of_states, SpectralDensity, DEFAULT_BINS};
pub use matrix::{gemm, kron, orthogonality_error, SymmetricMatrix};
pub use quadrature::{integrate_adaptive, trapezoid, DEFAULT_TOL};
pub use spectrum::{eig_sym, eigvals_sym, Spectrum};
