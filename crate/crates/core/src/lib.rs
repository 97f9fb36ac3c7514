//! Null-controllability of a downstream system driven by an observation of an upstream one.
//!
//! The downstream control `v` is synthesized from an exponential moment problem, the
//! upstream control that produces it is recovered from a convolution Volterra equation,
//! and both are checked by modal simulation. [`heatwave`] assembles the pieces for a heat
//! equation fed by a wave equation.

pub mod error;
pub mod grid;
pub mod heatwave;
pub mod linalg;
pub mod minimality;
pub mod quadrature;
pub mod spectral;
pub mod synthesis;
pub mod volterra;

pub use error::{Error, Result};
pub use grid::{GridFunction, TimeGrid};
pub use minimality::{
    augmented_family, dirichlet_hypothesis, gram_matrix, minimality_from_gram,
    strong_minimality_constant, DirichletCheck, ExponentialFamily, GramMatrix, MinimalityConfig,
    MinimalityReport, Verdict,
};
pub use spectral::{
    control_moments, evolve_modal, evolve_modal_hermite, modal_tail, moment_targets, terminal_norm,
    ModalTrajectory, MomentTargets, SpectralSystem,
};
pub use synthesis::{
    build_moment_problem, solve_moment_problem, verify_smooth_null, MomentProblem,
    NullVerification, SmoothControl,
};
pub use volterra::{
    differentiate_antiderivative, first_kind_residual, resolvent_kernel, resolvent_series,
    second_kind_residual, solve_interconnection, solve_second_kind_direct, ConvolutionKernel,
    DistributionalControl, InterconnectCase, KernelBundle, Resolvent, SecondKindProblem,
};
