//! The heat equation driven by an observation of the wave equation, end to end.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, TimeGrid};
use crate::minimality::{
    augmented_family, strong_minimality_constant, MinimalityConfig, MinimalityReport,
};
use crate::spectral::{evolve_modal, modal_tail, terminal_norm, ModalTrajectory, SpectralSystem};
use crate::synthesis::{
    build_moment_problem, solve_moment_problem, verify_smooth_null, SmoothControl,
};
use crate::volterra::{
    first_kind_residual, resolvent_series, second_kind_residual, solve_interconnection,
    DistributionalControl, InterconnectCase, KernelBundle, SecondKindProblem,
};

use super::functions::{inner_product, sine_coefficients, unnormalized, FunctionSpec};
use super::wave::{
    observe_modal, simulate_wave_modal, wave_kernel, WaveModalKernel, WaveTrajectory,
};

/// Heat modes `λ_n = -n²` with coefficients against `sin nx`.
pub fn build_heat_system(
    b1: &FunctionSpec,
    phi0: &FunctionSpec,
    modes: usize,
    horizon: f64,
) -> Result<SpectralSystem> {
    if modes == 0 {
        return Err(Error::InvalidInput("mode count must be positive".into()));
    }
    let eigenvalues = (1..=modes).map(|n| -((n * n) as f64)).collect();
    SpectralSystem::new(
        eigenvalues,
        sine_coefficients(b1, modes),
        sine_coefficients(phi0, modes),
        horizon,
    )
}

/// The case tag together with the inner products it was decided on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseClassification {
    pub case: InterconnectCase,
    /// `∫ c₂ b₂`.
    pub direct: f64,
    /// `∫ c₁ b₂`.
    pub chain: f64,
    /// `K(0), K'(0), K''(0)` of the truncated modal kernel.
    pub modal_leading: [f64; 3],
    pub tolerance: f64,
}

pub fn classify_case(
    c1: &FunctionSpec,
    c2: &FunctionSpec,
    b2: &FunctionSpec,
    modes: usize,
    tol: f64,
) -> CaseClassification {
    let direct = inner_product(c2, b2);
    let chain = inner_product(c1, b2);
    let case = if direct.abs() > tol {
        InterconnectCase::Regular
    } else if chain.abs() > tol {
        InterconnectCase::Singular(1)
    } else {
        InterconnectCase::Unsupported
    };
    let k = wave_kernel(c1, c2, b2, modes);
    CaseClassification {
        case,
        direct,
        chain,
        modal_leading: [
            k.derivative(0, 0.0),
            k.derivative(1, 0.0),
            k.derivative(2, 0.0),
        ],
        tolerance: tol,
    }
}

/// Leading coefficient and lifted kernel for `case`, taken from the modal kernel.
pub fn kernel_bundle(kernel: &WaveModalKernel, case: InterconnectCase) -> Result<KernelBundle> {
    let m = match case {
        InterconnectCase::Regular | InterconnectCase::Dual => 0,
        InterconnectCase::Singular(m) if m <= 2 => m,
        other => {
            return Err(Error::Unsupported(format!(
                "no kernel bundle for case {other}"
            )));
        }
    };
    Ok(KernelBundle {
        kappa: kernel.derivative(m, 0.0),
        kernel: kernel.kernel(m + 1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineTolerances {
    pub classification: f64,
    pub resolvent: f64,
    pub ridge: f64,
    pub minimality_floor: f64,
    pub minimality_decrement: f64,
    /// Treat failed Dirichlet evidence as a stage failure instead of a warning.
    pub require_dirichlet: bool,
}

impl Default for PipelineTolerances {
    fn default() -> Self {
        let m = MinimalityConfig::default();
        Self {
            classification: 1e-10,
            resolvent: 1e-10,
            ridge: 0.0,
            minimality_floor: m.floor,
            minimality_decrement: m.max_relative_decrement,
            require_dirichlet: false,
        }
    }
}

impl PipelineTolerances {
    pub fn minimality(&self) -> MinimalityConfig {
        MinimalityConfig {
            floor: self.minimality_floor,
            max_relative_decrement: self.minimality_decrement,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterconnectSpec {
    pub b1: FunctionSpec,
    pub b2: FunctionSpec,
    pub c1: FunctionSpec,
    pub c2: FunctionSpec,
    pub phi0: FunctionSpec,
    pub psi0: FunctionSpec,
    pub psi1: FunctionSpec,
    pub modes: usize,
    pub grid: TimeGrid,
    pub tolerances: PipelineTolerances,
}

impl InterconnectSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in self.functions() {
            f.validate()
                .map_err(|e| Error::InvalidInput(format!("{name}: {e}")))?;
        }
        if self.modes == 0 {
            return Err(Error::InvalidInput("mode count must be positive".into()));
        }
        if !self.c1.vanishes_at_ends() {
            return Err(Error::InvalidInput(
                "c1 must vanish at 0 and π (it pairs with the displacement gradient)".into(),
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("classification tolerance", t.classification),
            ("resolvent tolerance", t.resolvent),
            ("minimality floor", t.minimality_floor),
            ("minimality decrement", t.minimality_decrement),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(t.ridge.is_finite() && t.ridge >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "ridge must be nonnegative, got {}",
                t.ridge
            )));
        }
        Ok(())
    }

    pub fn functions(&self) -> [(&'static str, &FunctionSpec); 7] {
        [
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("c1", &self.c1),
            ("c2", &self.c2),
            ("phi0", &self.phi0),
            ("psi0", &self.psi0),
            ("psi1", &self.psi1),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    HeatSystem,
    Minimality,
    Synthesis,
    Classification,
    Inversion,
    WaveSimulation,
    HeatVerification,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::HeatSystem => "heat-system",
            Stage::Minimality => "minimality",
            Stage::Synthesis => "synthesis",
            Stage::Classification => "classification",
            Stage::Inversion => "inversion",
            Stage::WaveSimulation => "wave-simulation",
            Stage::HeatVerification => "heat-verification",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageFailure {
    pub stage: Stage,
    pub error: Error,
}

/// Checks on the Volterra inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionDiagnostics {
    pub kappa: f64,
    /// Residual of the second-kind equation for the interpolated solution.
    pub residual: f64,
    /// Node-wise gap between the stepping and resolvent solvers, if the series converged.
    pub solver_agreement: Option<f64>,
    /// `‖K * u - w‖_∞` with the unlifted kernel (order 0 only).
    pub first_kind_residual: Option<f64>,
}

/// Everything a pipeline run produced; later fields stay `None` after a failed stage.
#[derive(Debug, Clone, PartialEq)]
pub struct InterconnectReport {
    pub grid: TimeGrid,
    pub modes: usize,
    pub heat: Option<SpectralSystem>,
    /// `∫ b₁ sin nx` without the biorthogonal factor.
    pub input_coeffs_unnormalized: Vec<f64>,
    /// `Σ |x⁰_n|` over modes `N+1..=4N`, the part of the initial state left out.
    pub initial_tail: f64,
    pub minimality: Option<MinimalityReport>,
    pub alpha: f64,
    pub control: Option<SmoothControl>,
    pub smooth_terminal_norm: Option<f64>,
    pub classification: Option<CaseClassification>,
    pub upstream: Option<DistributionalControl>,
    pub inversion: Option<InversionDiagnostics>,
    pub wave: Option<WaveTrajectory>,
    pub v_hat: Option<GridFunction>,
    pub observation_error: Option<f64>,
    pub heat_trajectory: Option<ModalTrajectory>,
    pub terminal_norm: Option<f64>,
    pub uncontrolled_terminal_norm: Option<f64>,
    pub failure: Option<StageFailure>,
    pub warnings: Vec<String>,
}

impl InterconnectReport {
    fn new(spec: &InterconnectSpec) -> Self {
        Self {
            grid: spec.grid,
            modes: spec.modes,
            heat: None,
            input_coeffs_unnormalized: Vec::new(),
            initial_tail: 0.0,
            minimality: None,
            alpha: 0.0,
            control: None,
            smooth_terminal_norm: None,
            classification: None,
            upstream: None,
            inversion: None,
            wave: None,
            v_hat: None,
            observation_error: None,
            heat_trajectory: None,
            terminal_norm: None,
            uncontrolled_terminal_norm: None,
            failure: None,
            warnings: Vec::new(),
        }
    }

    /// `terminal / uncontrolled`, when both exist and the latter is nonzero.
    pub fn terminal_ratio(&self) -> Option<f64> {
        match (self.terminal_norm, self.uncontrolled_terminal_norm) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        }
    }
}

/// Runs every stage; a failing stage is recorded and stops the run.
pub fn run_pipeline(spec: &InterconnectSpec) -> Result<InterconnectReport> {
    spec.validate()?;
    let mut report = InterconnectReport::new(spec);
    if let Err(failure) = run_stages(spec, &mut report) {
        report.failure = Some(failure);
    }
    Ok(report)
}

fn at(stage: Stage) -> impl Fn(Error) -> StageFailure {
    move |error| StageFailure { stage, error }
}

fn run_stages(
    spec: &InterconnectSpec,
    report: &mut InterconnectReport,
) -> std::result::Result<(), StageFailure> {
    let n = spec.modes;
    let grid = spec.grid;
    let t1 = grid.horizon();

    let heat = build_heat_system(&spec.b1, &spec.phi0, n, t1).map_err(at(Stage::HeatSystem))?;
    report.input_coeffs_unnormalized = unnormalized(heat.input_coeffs());
    report.initial_tail = modal_tail(&sine_coefficients(&spec.phi0, 4 * n), n);
    report.heat = Some(heat.clone());

    minimality_stage(spec, &heat, report)?;

    let b2 = sine_coefficients(&spec.b2, n);
    let c1 = sine_coefficients(&spec.c1, n);
    let c2 = sine_coefficients(&spec.c2, n);
    let psi0 = sine_coefficients(&spec.psi0, n);
    let psi1 = sine_coefficients(&spec.psi1, n);
    report.alpha = PI / 2.0
        * (0..n)
            .map(|k| {
                let nf = (k + 1) as f64;
                nf * nf * psi0[k] * c1[k] + psi1[k] * c2[k]
            })
            .sum::<f64>();

    let problem = build_moment_problem(&heat, report.alpha).map_err(at(Stage::Synthesis))?;
    let control = solve_moment_problem(&problem, &grid, spec.tolerances.ridge)
        .map_err(at(Stage::Synthesis))?;
    report.warnings.extend(control.warnings.iter().cloned());
    let check = verify_smooth_null(&heat, &control).map_err(at(Stage::Synthesis))?;
    report.smooth_terminal_norm = Some(check.terminal_norm);
    report.control = Some(control.clone());

    let classification = classify_case(
        &spec.c1,
        &spec.c2,
        &spec.b2,
        n,
        spec.tolerances.classification,
    );
    let case = classification.case;
    report.classification = Some(classification);
    if case == InterconnectCase::Unsupported {
        report
            .warnings
            .push("both ∫c2·b2 and ∫c1·b2 vanish; the interconnection is not inverted".into());
        return Ok(());
    }

    let kernel = WaveModalKernel::from_coefficients(b2.clone(), c1.clone(), c2.clone())
        .map_err(at(Stage::Inversion))?;
    let rest = DistributionalControl {
        order: 0,
        antiderivative: GridFunction::zeros(grid),
        u_values: None,
    };
    let free = simulate_wave_modal(&b2, &rest, &psi0, &psi1).map_err(at(Stage::Inversion))?;
    let v_free = observe_modal(&c1, &c2, &free).map_err(at(Stage::Inversion))?;
    let w = GridFunction::new(
        grid,
        control
            .v
            .values()
            .iter()
            .zip(v_free.values())
            .map(|(v, f)| v - f)
            .collect(),
    )
    .map_err(at(Stage::Inversion))?;

    let bundle = kernel_bundle(&kernel, case).map_err(at(Stage::Inversion))?;
    let upstream = solve_interconnection(case, &w, &bundle).map_err(at(Stage::Inversion))?;
    let problem = SecondKindProblem::new(bundle.kappa, bundle.kernel.clone(), w.clone())
        .map_err(at(Stage::Inversion))?;
    let residual = second_kind_residual(&problem, &upstream.antiderivative);
    let solver_agreement = match resolvent_series(&problem, spec.tolerances.resolvent) {
        Ok(r) => Some(r.max_abs_diff(&upstream.antiderivative)),
        Err(e) => {
            report
                .warnings
                .push(format!("resolvent cross-check skipped: {e}"));
            None
        }
    };
    let first_kind = upstream
        .u_values
        .as_ref()
        .map(|u| first_kind_residual(&kernel.kernel(0), u, &w));
    report.inversion = Some(InversionDiagnostics {
        kappa: bundle.kappa,
        residual,
        solver_agreement,
        first_kind_residual: first_kind,
    });
    report.upstream = Some(upstream.clone());

    let wave =
        simulate_wave_modal(&b2, &upstream, &psi0, &psi1).map_err(at(Stage::WaveSimulation))?;
    let v_hat = observe_modal(&c1, &c2, &wave).map_err(at(Stage::WaveSimulation))?;
    report.observation_error = Some(v_hat.max_abs_diff(&control.v));
    report.wave = Some(wave);
    report.v_hat = Some(v_hat.clone());

    let traj = evolve_modal(&heat, &v_hat).map_err(at(Stage::HeatVerification))?;
    let idle =
        evolve_modal(&heat, &GridFunction::zeros(grid)).map_err(at(Stage::HeatVerification))?;
    report.terminal_norm = Some(terminal_norm(&traj));
    report.uncontrolled_terminal_norm = Some(terminal_norm(&idle));
    report.heat_trajectory = Some(traj);
    Ok(())
}

fn minimality_stage(
    spec: &InterconnectSpec,
    heat: &SpectralSystem,
    report: &mut InterconnectReport,
) -> std::result::Result<(), StageFailure> {
    let family = augmented_family(heat).map_err(at(Stage::Minimality))?;
    let config = spec.tolerances.minimality();
    let result = match strong_minimality_constant(&family, family.len(), &config) {
        Err(Error::GramOverflow { largest_usable }) if largest_usable >= 1 => {
            report.warnings.push(format!(
                "Gram matrix overflows beyond order {largest_usable}; minimality assessed on the leading block"
            ));
            strong_minimality_constant(&family, largest_usable, &config)
        }
        other => other,
    };
    let minimality = result.map_err(at(Stage::Minimality))?;
    if let Some(d) = &minimality.dirichlet {
        if !d.hypothesis_holds {
            if spec.tolerances.require_dirichlet {
                report.minimality = Some(minimality);
                return Err(StageFailure {
                    stage: Stage::Minimality,
                    error: Error::InvalidInput(
                        "Dirichlet-series evidence failed and is required by configuration".into(),
                    ),
                });
            }
            report
                .warnings
                .push("Dirichlet-series evidence failed; continuing".into());
        }
    }
    report.minimality = Some(minimality);
    Ok(())
}
