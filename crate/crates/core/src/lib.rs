//! Symmetries of the special double confluent Heun equation
//!
//! ```text
//! z²E'' + ((l+1)z + μ(1−z²))E' + (−μ(l+1)z + λ)E = 0,   l = −𝓁, 𝓁 ∈ ℕ
//! ```
//!
//! and their images on the phase equation `φ̇ + sin φ = B + A cos ωt`.
//!
//! Solutions live on the universal cover of `ℂ \ {0}` ([`cover`]). The
//! polynomial coefficients of the operators `Θ_A`, `Θ_B`, `Θ_C` come from
//! [`polys`]; [`solver`] integrates the equation and applies the operators;
//! [`monodromy`] turns values at a few distinguished points into the matrices
//! `𝐀`, `𝐁`, `𝐌` and continues solutions across the plane; [`laurent`] builds
//! convergent two-sided series for the monodromy eigen-combinations;
//! [`josephson`] maps all of this to the phase equation.

pub mod cover;
pub mod error;
pub mod josephson;
pub mod laurent;
pub mod laurent_poly;
pub mod monodromy;
pub mod ode;
pub mod polys;
pub mod scalar;
pub mod series;
pub mod solver;

pub use num_complex::Complex64;

pub use cover::{apply_lift, compose_lifts, cover_pow, project, CoverPoint, LiftKind, LiftMap};
pub use error::{Error, Result};
pub use josephson::{
    extend_phase, integrate_phase, params_to_heun, phase_monodromy_matrix, JosephsonParams, PhaseTrajectory, ThetaAB,
    ThetaPhaseConstants,
};
pub use laurent::{build_series, eval_series, monodromy_eigen, LaurentSolution, MonodromyEigen};
pub use laurent_poly::Laurent;
pub use monodromy::{
    collect_boundary_data, continue_monodromy, matrices_ab, matrix_m, BoundaryData, Continuator, Matrix2, MonodromyData,
};
pub use polys::{build_polys, build_polys_exact, verify_poly_system, HeunParams, PolySet};
pub use scalar::Exact;
pub use solver::{
    eigenbasis, integrate_path, split_eigen, theta_apply, verify_compositions, wronskian, EigenBasis, SolutionFrame,
    SolutionHandle, Theta,
};
