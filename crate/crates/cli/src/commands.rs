//! The four subcommands. Each writes its report files before reporting an error,
//! so a failed run still leaves a partial summary behind.

use std::path::Path;
use std::time::Instant;

use interconnect_core::heatwave::{
    build_heat_system, observe_modal, run_pipeline, simulate_wave_modal, wave_kernel, FunctionSpec,
    InterconnectReport,
};
use interconnect_core::{
    build_moment_problem, evolve_modal, resolvent_series, solve_moment_problem,
    solve_second_kind_direct, strong_minimality_constant, terminal_norm, verify_smooth_null,
    ConvolutionKernel, DistributionalControl, Error, ExponentialFamily, GridFunction,
    MinimalityConfig, MinimalityReport, SecondKindProblem, TimeGrid, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::report::{fmt_f64, write_file, Summary, Table};
use crate::CliError;

pub const SUMMARY: &str = "summary.toml";
pub const CONFIG_ECHO: &str = "config_echo.toml";
pub const SERIES: &str = "series.csv";
pub const GAMMA: &str = "gamma.csv";
pub const SELFTEST: &str = "selftest.toml";

fn header(s: &mut Summary, command: &str, cfg: &RunConfig) {
    s.string("command", command)
        .string("scenario", &cfg.scenario);
    s.section("run")
        .int("modes", cfg.modes as u64)
        .int("grid_intervals", cfg.grid as u64)
        .float("horizon", cfg.horizon)
        .float("step", cfg.horizon / cfg.grid as f64)
        .int("seed", cfg.seed);
}

fn write_minimality(s: &mut Summary, r: &MinimalityReport) {
    s.section("minimality")
        .string("verdict", &r.verdict.to_string())
        .floats("gamma", &r.gamma_sequence)
        .float("certified_lower_bound", r.certified_lower_bound)
        .float("normalized_min_eigenvalue", r.normalized_min_eigenvalue)
        .float("normalized_condition", r.normalized_condition)
        .opt_float("last_relative_decrement", r.last_relative_decrement)
        .strings("notes", &r.notes);
    if let Some(d) = &r.dirichlet {
        s.section("minimality.dirichlet")
            .boolean("hypothesis_holds", d.hypothesis_holds)
            .float("partial_reciprocal_sum", d.partial_reciprocal_sum)
            .float("reciprocal_tail_bound", d.reciprocal_tail_bound)
            .float(
                "reciprocal_rate_sum_estimate",
                d.reciprocal_rate_sum_estimate,
            )
            .float("rate_growth_exponent", d.rate_growth_exponent)
            .float("abscissa_estimate", d.abscissa_estimate)
            .float("abscissa_growth_slope", d.abscissa_growth_slope)
            .int("window_first", d.window.0 as u64)
            .int("window_last", d.window.1 as u64)
            .opt_float("shift", d.shift)
            .strings("notes", &d.notes);
    }
}

fn write_failure(s: &mut Summary, stage: &str, e: &Error) {
    s.section("failure")
        .string("stage", stage)
        .string("error", &e.to_string());
    if let Error::GramOverflow { largest_usable } = e {
        s.int("largest_usable", *largest_usable as u64);
    }
}

fn gamma_csv(r: &MinimalityReport) -> String {
    let mut out = String::from("n,gamma\n");
    for (k, &g) in r.gamma_sequence.iter().enumerate() {
        out.push_str(&format!("{},{}\n", k + 1, fmt_f64(g)));
    }
    out
}

fn finish(out: &Path, cfg: &RunConfig, summary: &Summary) -> Result<(), CliError> {
    write_file(out, SUMMARY, summary.finish())?;
    write_file(out, CONFIG_ECHO, &cfg.to_toml())?;
    Ok(())
}

/// Index of the first element that is zero or repeats an earlier rate; the constant is
/// element 0 when present.
fn first_dependent(entries: &[(f64, f64)], constant: bool) -> Option<usize> {
    let offset = usize::from(constant);
    let mut seen: Vec<f64> = if constant { vec![0.0] } else { Vec::new() };
    for (k, &(w, r)) in entries.iter().enumerate() {
        if w == 0.0 || seen.contains(&r) {
            return Some(k + offset);
        }
        seen.push(r);
    }
    None
}

/// Minimality report for `{1?} ∪ {w_k e^{r_k t}}`, where a dependent element makes
/// every later `γ_n` zero instead of being an error.
pub fn family_report(
    entries: &[(f64, f64)],
    constant: bool,
    horizon: f64,
    config: &MinimalityConfig,
) -> Result<MinimalityReport, Error> {
    let offset = usize::from(constant);
    let total = entries.len() + offset;
    let dependent = first_dependent(entries, constant);
    let usable = dependent.unwrap_or(total);
    let mut report = if usable == 0 {
        MinimalityReport {
            gamma_sequence: Vec::new(),
            certified_lower_bound: 0.0,
            normalized_min_eigenvalue: 0.0,
            normalized_condition: f64::INFINITY,
            last_relative_decrement: None,
            verdict: Verdict::Degenerate,
            dirichlet: None,
            notes: Vec::new(),
        }
    } else {
        let family =
            ExponentialFamily::new(entries[..usable - offset].to_vec(), constant, horizon)?;
        strong_minimality_constant(&family, usable, config)?
    };
    if let Some(k) = dependent {
        report.gamma_sequence.resize(total, 0.0);
        report.last_relative_decrement = (total >= 2).then(|| {
            if report.gamma_sequence[total - 2] > 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        });
        report.certified_lower_bound = 0.0;
        report.normalized_min_eigenvalue = 0.0;
        report.normalized_condition = f64::INFINITY;
        report.verdict = Verdict::Degenerate;
        report.dirichlet = None;
        report.notes.push(format!(
            "element {} is zero or repeats an earlier rate, so γ_n = 0 for n ≥ {}",
            k + 1,
            k + 1
        ));
    }
    Ok(report)
}

pub fn analyze(cfg: &RunConfig, out: &Path) -> Result<MinimalityReport, CliError> {
    cfg.validate()?;
    let (entries, constant, source): (Vec<(f64, f64)>, bool, &str) = match &cfg.family {
        Some(f) => (
            f.weights
                .iter()
                .copied()
                .zip(f.rates.iter().copied())
                .collect(),
            f.constant,
            "config",
        ),
        None => {
            let sys = build_heat_system(
                &cfg.functions.b1,
                &cfg.functions.phi0,
                cfg.modes,
                cfg.horizon,
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            let entries = sys
                .eigenvalues()
                .iter()
                .zip(sys.input_coeffs())
                .map(|(&l, &b)| (b / l, -l))
                .collect();
            (entries, true, "heat")
        }
    };

    let mut s = Summary::new();
    header(&mut s, "analyze", cfg);
    s.section("family")
        .string("source", source)
        .int("elements", (entries.len() + usize::from(constant)) as u64)
        .boolean("constant", constant);

    let start = Instant::now();
    let result = family_report(
        &entries,
        constant,
        cfg.horizon,
        &cfg.tolerances.minimality(),
    );
    log::info!("minimality analysis took {:.3?}", start.elapsed());
    match result {
        Ok(report) => {
            write_minimality(&mut s, &report);
            let mut warnings = Vec::new();
            if report.verdict == Verdict::Degenerate {
                warnings.push("family is degenerate".to_string());
            }
            if report
                .dirichlet
                .as_ref()
                .is_some_and(|d| !d.hypothesis_holds)
            {
                warnings.push("Dirichlet-series evidence does not support the hypothesis".into());
            }
            for w in &warnings {
                log::warn!("{w}");
            }
            s.section("diagnostics").strings("warnings", &warnings);
            finish(out, cfg, &s)?;
            write_file(out, GAMMA, &gamma_csv(&report))?;
            Ok(report)
        }
        Err(e) => {
            write_failure(&mut s, "minimality", &e);
            finish(out, cfg, &s)?;
            Err(match e {
                Error::InvalidFamily(msg) => CliError::Config(msg),
                other => CliError::numeric(other),
            })
        }
    }
}

pub fn synthesize(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    let grid = cfg.time_grid()?;
    let sys = build_heat_system(
        &cfg.functions.b1,
        &cfg.functions.phi0,
        cfg.modes,
        cfg.horizon,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let alpha = cfg.synthesis.map_or(0.0, |s| s.alpha);

    let mut s = Summary::new();
    header(&mut s, "synthesize", cfg);
    s.section("heat")
        .floats("input_coeffs", sys.input_coeffs())
        .floats("initial_coeffs", sys.initial_coeffs());

    let start = Instant::now();
    let result = build_moment_problem(&sys, alpha)
        .and_then(|p| solve_moment_problem(&p, &grid, cfg.tolerances.ridge))
        .and_then(|c| verify_smooth_null(&sys, &c).map(|v| (c, v)));
    log::info!("synthesis took {:.3?}", start.elapsed());
    let (control, check) = match result {
        Ok(ok) => ok,
        Err(e) => {
            write_failure(&mut s, "synthesis", &e);
            finish(out, cfg, &s)?;
            return Err(CliError::numeric(e));
        }
    };
    let free = evolve_modal(&sys, &GridFunction::zeros(grid)).map_err(CliError::numeric)?;

    s.section("synthesis")
        .float("alpha", control.alpha)
        .float("scaled_residual", control.scaled_residual)
        .float("moment_residual", control.moment_residual)
        .float("ridge", control.ridge)
        .boolean("used_fallback", control.used_fallback)
        .boolean("has_constant", control.has_constant)
        .floats("coefficients", &control.coefficients)
        .floats("rates", &control.rates)
        .float("v_max", control.v.max_abs());
    s.section("verification")
        .float("terminal_norm", check.terminal_norm)
        .float("linear_terminal_norm", check.linear_terminal_norm)
        .float("uncontrolled_terminal_norm", terminal_norm(&free))
        .float("initial_error", check.initial_error)
        .float("terminal_control", check.terminal_control);
    s.section("diagnostics")
        .strings("warnings", &control.warnings);
    finish(out, cfg, &s)?;

    let mut header = vec!["t".to_string(), "v".into(), "u".into()];
    header.extend((1..=cfg.modes).map(|j| format!("terminal_mode_{j}")));
    let mut table = Table::new(header);
    for (i, t) in grid.nodes().into_iter().enumerate() {
        let mut row = vec![t, control.v.values()[i], control.u.values()[i]];
        row.extend(check.trajectory.modes().iter().map(|m| m[i]));
        table.push(row);
    }
    write_file(out, SERIES, &table.to_csv())?;
    Ok(())
}

fn pipeline_summary(cfg: &RunConfig, r: &InterconnectReport) -> Summary {
    let mut s = Summary::new();
    header(&mut s, "pipeline", cfg);
    if let Some(heat) = &r.heat {
        s.section("heat")
            .floats("input_coeffs", heat.input_coeffs())
            .floats("input_coeffs_unnormalized", &r.input_coeffs_unnormalized)
            .floats("initial_coeffs", heat.initial_coeffs())
            .float("initial_tail", r.initial_tail);
    }
    if let Some(m) = &r.minimality {
        write_minimality(&mut s, m);
    }
    if let Some(c) = &r.control {
        s.section("synthesis")
            .float("alpha", r.alpha)
            .float("scaled_residual", c.scaled_residual)
            .float("moment_residual", c.moment_residual)
            .float("ridge", c.ridge)
            .boolean("used_fallback", c.used_fallback)
            .floats("coefficients", &c.coefficients)
            .floats("rates", &c.rates)
            .float("v_max", c.v.max_abs())
            .opt_float("smooth_terminal_norm", r.smooth_terminal_norm);
    }
    if let Some(c) = &r.classification {
        s.section("classification")
            .string("case", &c.case.to_string())
            .float("direct", c.direct)
            .float("chain", c.chain)
            .floats("modal_leading", &c.modal_leading)
            .float("tolerance", c.tolerance);
    }
    if let Some(up) = &r.upstream {
        s.section("inversion").int("order", up.order);
        if let Some(d) = &r.inversion {
            s.float("kappa", d.kappa)
                .float("residual", d.residual)
                .opt_float("solver_agreement", d.solver_agreement)
                .opt_float("first_kind_residual", d.first_kind_residual);
        }
    }
    if r.observation_error.is_some() || r.terminal_norm.is_some() {
        let relative = match (r.observation_error, &r.control) {
            (Some(e), Some(c)) if c.v.max_abs() > 0.0 => Some(e / c.v.max_abs()),
            _ => None,
        };
        s.section("verification")
            .opt_float("observation_error", r.observation_error)
            .opt_float("observation_error_relative", relative)
            .opt_float("terminal_norm", r.terminal_norm)
            .opt_float("uncontrolled_terminal_norm", r.uncontrolled_terminal_norm)
            .opt_float("terminal_ratio", r.terminal_ratio());
    }
    if let Some(f) = &r.failure {
        write_failure(&mut s, &f.stage.to_string(), &f.error);
    }
    s.section("diagnostics").strings("warnings", &r.warnings);
    s
}

fn pipeline_series(r: &InterconnectReport) -> Table {
    let mut header: Vec<String> = ["t", "v", "v_hat", "U", "u"].map(String::from).to_vec();
    header.extend((1..=r.modes).map(|j| format!("terminal_mode_{j}")));
    let mut table = Table::new(header);
    let pick = |f: Option<&GridFunction>, i: usize| f.map_or(f64::NAN, |g| g.values()[i]);
    for (i, t) in r.grid.nodes().into_iter().enumerate() {
        let mut row = vec![
            t,
            pick(r.control.as_ref().map(|c| &c.v), i),
            pick(r.v_hat.as_ref(), i),
            pick(r.upstream.as_ref().map(|u| &u.antiderivative), i),
            pick(r.upstream.as_ref().and_then(|u| u.u_values.as_ref()), i),
        ];
        match &r.heat_trajectory {
            Some(traj) => row.extend(traj.modes().iter().map(|m| m[i])),
            None => row.extend(std::iter::repeat_n(f64::NAN, r.modes)),
        }
        table.push(row);
    }
    table
}

pub fn pipeline(cfg: &RunConfig, out: &Path) -> Result<InterconnectReport, CliError> {
    cfg.validate()?;
    let spec = cfg.interconnect_spec()?;
    let start = Instant::now();
    let report = run_pipeline(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    log::info!("pipeline took {:.3?}", start.elapsed());
    for w in &report.warnings {
        log::warn!("{w}");
    }

    finish(out, cfg, &pipeline_summary(cfg, &report))?;
    write_file(out, SERIES, &pipeline_series(&report).to_csv())?;
    if let Some(m) = &report.minimality {
        write_file(out, GAMMA, &gamma_csv(m))?;
    }
    if let Some(f) = &report.failure {
        return Err(match &f.error {
            Error::GramOverflow { .. } => CliError::Range(f.error.to_string()),
            e => CliError::Stage(format!("{}: {e}", f.stage)),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestOutcome {
    pub passed: usize,
    pub failed: usize,
    /// One `PASS`/`FAIL` line per check.
    pub lines: Vec<String>,
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

fn oracle_checks(seed: u64, perturbation: f64) -> Result<Vec<Check>, Error> {
    let mut checks = Vec::new();
    let grid = TimeGrid::new(1.0, 1000)?;

    // κ = 1, K ≡ 1, w = t  ⇒  U = 1 - e^{-t}
    let p = SecondKindProblem::new(
        1.0,
        ConvolutionKernel::constant(1.0 + perturbation),
        GridFunction::from_fn(grid, |t| t),
    )?;
    let u = solve_second_kind_direct(&p)?;
    checks.push(Check {
        name: "volterra-constant-kernel",
        value: u.max_abs_diff(&GridFunction::from_fn(grid, |t| -(-t).exp_m1())),
        tolerance: 1e-4,
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, w, c) = (
        rng.random_range(0.0..2.0),
        rng.random_range(0.5..4.0),
        rng.random_range(-1.5..1.5),
    );
    let kernel = ConvolutionKernel::smooth(
        move |t| c * (-a * t).exp() * (w * t).cos(),
        move |t| -c * (-a * t).exp() * (a * (w * t).cos() + w * (w * t).sin()),
    );
    let p = SecondKindProblem::new(1.0, kernel, GridFunction::from_fn(grid, |t| t.sin()))?;
    checks.push(Check {
        name: "volterra-solver-agreement",
        value: solve_second_kind_direct(&p)?.max_abs_diff(&resolvent_series(&p, 1e-12)?),
        tolerance: 1e-6,
    });

    let rest = DistributionalControl {
        order: 0,
        antiderivative: GridFunction::zeros(grid),
        u_values: None,
    };
    let free = simulate_wave_modal(&[1.0], &rest, &[1.0], &[0.0])?;
    checks.push(Check {
        name: "wave-single-mode",
        value: GridFunction::new(grid, free.position(0).to_vec())?
            .max_abs_diff(&GridFunction::from_fn(grid, f64::cos)),
        tolerance: 1e-12,
    });
    let energy = free.energy();
    checks.push(Check {
        name: "wave-energy",
        value: energy
            .iter()
            .map(|e| (e - energy[0]).abs())
            .fold(0.0, f64::max),
        tolerance: 1e-10,
    });

    let impulse = simulate_wave_modal(&[1.0], &rest, &[0.0], &[1.0])?;
    let v = observe_modal(&[0.0], &[1.0], &impulse)?;
    let k = wave_kernel(
        &FunctionSpec::zero(),
        &FunctionSpec::Sine(vec![1.0]),
        &FunctionSpec::Sine(vec![1.0]),
        1,
    );
    checks.push(Check {
        name: "wave-impulse-kernel",
        value: v.max_abs_diff(&GridFunction::from_fn(grid, |t| k.eval(t))),
        tolerance: 1e-10,
    });

    // {e^t, e^{2t}} on [0, 1]
    let e = std::f64::consts::E;
    let (g11, g12, g22) = (
        (e.powi(2) - 1.0) / 2.0,
        (e.powi(3) - 1.0) / 3.0,
        (e.powi(4) - 1.0) / 4.0,
    );
    let exact = (g11 + g22) / 2.0 - (((g11 - g22) / 2.0).powi(2) + g12 * g12).sqrt();
    let family = ExponentialFamily::new(vec![(1.0, 1.0), (1.0, 2.0)], false, 1.0)?;
    let r = strong_minimality_constant(&family, 2, &MinimalityConfig::default())?;
    checks.push(Check {
        name: "gram-closed-form",
        value: (r.gamma() - exact).abs() / exact,
        tolerance: 1e-12,
    });
    Ok(checks)
}

/// Analytic-oracle suite; `perturbation` shifts the constant kernel to exercise failure.
pub fn selftest(
    seed: u64,
    perturbation: f64,
    out: Option<&Path>,
) -> Result<SelfTestOutcome, CliError> {
    let checks = oracle_checks(seed, perturbation).map_err(CliError::numeric)?;
    let mut s = Summary::new();
    s.string("command", "selftest").int("seed", seed);
    s.section("checks");
    let mut lines = Vec::new();
    let mut failed = 0;
    for c in &checks {
        let ok = c.value <= c.tolerance;
        failed += usize::from(!ok);
        s.float(c.name, c.value);
        lines.push(format!(
            "{} {} value={:.3e} tol={:.0e}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        ));
    }
    let outcome = SelfTestOutcome {
        passed: checks.len() - failed,
        failed,
        lines,
    };
    s.section("result")
        .int("passed", outcome.passed as u64)
        .int("failed", outcome.failed as u64);
    if let Some(dir) = out {
        write_file(dir, SELFTEST, s.finish())?;
    }
    Ok(outcome)
}
