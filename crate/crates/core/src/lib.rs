//! Spectral solver for the Neumann heat equation on thin rectangular plates
//! `(0,1) × (0,ε)`, together with the one-dimensional limit problem reached
//! as `ε → 0` and an independent finite-difference reference solver.
//!
//! The plate is mapped onto the unit square by `(x1, x2) ↦ (x1, ε x2)`. On
//! the square the problem becomes `v_t = v_{x1x1} + ε⁻² v_{x2x2}` with
//! ε-independent eigenfunctions `a_{m,n} cos(mπx1) cos(nπx2)`, and the
//! solution is the truncated series `Σ e^{-tλ} ⟨v0, v_k⟩ v_k`.
//!
//! Module map:
//! - [`eigenbasis`]: closed-form eigenpairs and ordered enumeration.
//! - [`projection`]: Simpson inner products and spectral expansions.
//! - [`evolution`]: the heat semigroup, truncation control, plate solves.
//! - [`limit1d`]: the limit problem on `(0,1)` and its embedding.
//! - [`fd_oracle`]: ADI finite differences, sharing no spectral code.
//! - [`convergence`]: eigenvalue gaps and 2D-vs-1D error curves.

pub mod convergence;
pub mod domain;
pub mod eigenbasis;
pub mod error;
pub mod evolution;
pub mod fd_oracle;
pub mod grid;
pub mod io;
pub mod limit1d;
pub mod projection;
pub mod quadrature;

pub use convergence::{
    convergence_report, eigen_convergence, epsilon_threshold, geometric_times, solution_error,
    ConvergenceReport, EigenGap, ErrorCurve, Experiment,
};
pub use domain::{DomainTag, Epsilon};
pub use eigenbasis::{
    eigenfunction_physical, eigenfunction_rescaled, eigenvalue, norm_const, ordered_spectrum,
    EigenPair, ModeIndex, Spectrum, PI_SQ,
};
pub use error::{Error, Result};
pub use evolution::{
    choose_truncation, evolve, solve, solve_physical, solve_with_modes, Solution, Truncation,
    TruncationPolicy,
};
pub use fd_oracle::{discrete_l2_distance, fd_mean, fd_solve, FdConfig};
pub use grid::{sample, sample1d, sample_physical, GridField, GridField1D};
pub use limit1d::{
    eigenfunction1d, eigenvalue1d, embed, evolve1d, project1d, reconstruct1d, vertical_average,
    SpectralState1D,
};
pub use projection::{inner_product, parseval_defect, project, reconstruct, SpectralState};
