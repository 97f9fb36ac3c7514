//! Shared inputs for the solver benchmarks.

use interconnect_core::heatwave::{FunctionSpec, InterconnectSpec, PipelineTolerances};
use interconnect_core::{
    ConvolutionKernel, ExponentialFamily, GridFunction, SecondKindProblem, TimeGrid,
};

/// `κ = 1`, `K(t) = e^{-t} cos 3t`, `w(t) = t sin t` on `[0, 1]`.
pub fn volterra_problem(intervals: usize) -> SecondKindProblem {
    let grid = TimeGrid::new(1.0, intervals).expect("valid grid");
    let kernel = ConvolutionKernel::smooth(
        |t| (-t).exp() * (3.0 * t).cos(),
        |t| -(-t).exp() * ((3.0 * t).cos() + 3.0 * (3.0 * t).sin()),
    );
    SecondKindProblem::new(1.0, kernel, GridFunction::from_fn(grid, |t| t * t.sin()))
        .expect("valid problem")
}

/// `{1} ∪ {e^{n² t} / n³}`, the augmented heat family shape.
pub fn heat_family(modes: usize) -> ExponentialFamily {
    let entries = (1..=modes)
        .map(|n| {
            let n = n as f64;
            (1.0 / (n * n * n), n * n)
        })
        .collect();
    ExponentialFamily::new(entries, true, 1.0).expect("valid family")
}

/// The regular worked configuration: `b₁ = b₂ = x`, `c₂ = 1`, `φ₀ = sin x + ½ sin 2x`.
pub fn regular_spec(modes: usize, intervals: usize) -> InterconnectSpec {
    let x = FunctionSpec::Polynomial(vec![0.0, 1.0]);
    InterconnectSpec {
        b1: x.clone(),
        b2: x,
        c1: FunctionSpec::zero(),
        c2: FunctionSpec::Polynomial(vec![1.0]),
        phi0: FunctionSpec::Sine(vec![1.0, 0.5]),
        psi0: FunctionSpec::zero(),
        psi1: FunctionSpec::zero(),
        modes,
        grid: TimeGrid::new(1.0, intervals).expect("valid grid"),
        tolerances: PipelineTolerances::default(),
    }
}
