use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid exponential family: {0}")]
    InvalidFamily(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("horizon mismatch: system t1 = {system}, control t1 = {control}")]
    HorizonMismatch { system: f64, control: f64 },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("mode {mode} is uncontrollable: input coefficient is zero but initial coefficient is {initial}")]
    UncontrollableMode { mode: usize, initial: f64 },

    #[error(
        "mode {mode} has a zero eigenvalue with zero input coefficient; the augmented family cannot be strongly minimal"
    )]
    DegenerateZeroMode { mode: usize },

    #[error(
        "Gram entry overflows double precision; largest usable leading block is {largest_usable} \
         (use the scaled lower bound, or reduce the mode count or horizon)"
    )]
    GramOverflow { largest_usable: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error(
        "step-size breakdown: |kappa + h*K(0)/2| = {denominator:e} is negligible relative to |kappa| = {kappa:e}"
    )]
    StepSize { denominator: f64, kappa: f64 },

    #[error(
        "resolvent series did not converge after {terms} terms (last term norm {last_norm:e}, tolerance {tol:e})"
    )]
    ResolventDiverged {
        terms: usize,
        last_norm: f64,
        tol: f64,
    },

    #[error("case misclassified: leading coefficient {kappa:e} vanishes for the declared case")]
    Misclassified { kappa: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
