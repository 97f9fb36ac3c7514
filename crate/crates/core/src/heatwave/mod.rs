//! Heat equation on `(0, π)` controlled through an observation of a wave equation.
//!
//! Profiles are expanded in `sin nx`. Heat modes decay at `λ_n = -n²`; wave modes
//! oscillate at frequency `n`.

pub mod functions;
pub mod pipeline;
pub mod wave;

pub use functions::{inner_product, sine_coefficients, unnormalized, FunctionSpec};
pub use pipeline::{
    build_heat_system, classify_case, kernel_bundle, run_pipeline, CaseClassification,
    InterconnectReport, InterconnectSpec, InversionDiagnostics, PipelineTolerances, Stage,
    StageFailure,
};
pub use wave::{
    observe, observe_modal, simulate_wave, simulate_wave_modal, wave_kernel, WaveModalKernel,
    WaveTrajectory,
};
