use std::time::Instant;

use mhlab::chain_sampler::{
    empirical_vs_exact_with, family_sigma, long_chain_transitions, run_ensemble, EnsembleTrace,
    StepDiscrepancy, STREAM_ALGORITHM,
};
use mhlab::convergence_lab::{evolve, predicted_plateau, tv_trace, ConvergenceReport};
use mhlab::instances::random_function;
use mhlab::spectral_ops::{
    check_contraction, check_self_adjoint, duality_residuals, fixed_point_diagnostic,
    quadratic_form_sequence, verify_operator_inequality, OperatorNormBound, Spectrum,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, Suite, Tolerances};
use crate::error::CliResult;

/// Largest sub-kernel power examined for the positivity condition.
pub const MAX_NU: usize = 10;
const RANDOM_FUNCTIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub relation: Relation,
    /// Counts toward the summary's max residual.
    pub residual: bool,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            relation: Relation::AtMost,
            residual: true,
            pass: value <= limit,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            relation: Relation::AtLeast,
            residual: false,
            pass: value >= limit,
        }
    }

    fn not_residual(mut self) -> Self {
        self.residual = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub status: Status,
    pub mode: Option<String>,
    pub note: Option<String>,
    pub checks: Vec<Check>,
    pub elapsed_ms: f64,
}

impl SuiteReport {
    fn finish(suite: Suite, mode: Option<&str>, checks: Vec<Check>, started: Instant) -> Self {
        let status = if checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            suite,
            status,
            mode: mode.map(str::to_string),
            note: None,
            checks,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }

    fn skipped(suite: Suite, note: &str) -> Self {
        Self {
            suite,
            status: Status::Skipped,
            mode: None,
            note: Some(note.to_string()),
            checks: Vec::new(),
            elapsed_ms: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<f64>,
    pub second_modulus: f64,
    pub gap: f64,
    pub unit_multiplicity: usize,
    /// Smallest `ν ≤ 10` with a strictly positive sub-kernel power.
    pub positivity_nu: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerSummary {
    pub steps: usize,
    pub replicas: usize,
    pub chain_steps: usize,
    pub discrepancies: Vec<StepDiscrepancy>,
    pub ensemble: EnsembleTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub config: ExperimentConfig,
    pub config_text: String,
    pub kernel_id: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub stream_algorithm: String,
    pub spectrum: SpectrumSummary,
    pub suites: Vec<SuiteReport>,
    pub convergence: Option<ConvergenceReport>,
    pub sampler: Option<SamplerSummary>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status != Status::Fail)
    }

    pub fn max_residual(&self) -> f64 {
        self.suites
            .iter()
            .flat_map(|s| &s.checks)
            .filter(|c| c.residual)
            .map(|c| c.value)
            .fold(0.0, f64::max)
    }

    /// One line: verdict, max residual, gap, kernel id, seed.
    pub fn summary_line(&self) -> String {
        let failed: Vec<&str> = self
            .suites
            .iter()
            .filter(|s| s.status == Status::Fail)
            .map(|s| s.suite.name())
            .collect();
        format!(
            "{} max_residual={:e} spectral_gap={:e} kernel={} seed={} failed=[{}]",
            if self.passed() { "PASS" } else { "FAIL" },
            self.max_residual(),
            self.spectrum.gap,
            self.kernel_id,
            self.seed,
            failed.join(",")
        )
    }
}

fn max(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

fn kernel_suite(exp: &Experiment, tol: &Tolerances) -> SuiteReport {
    let started = Instant::now();
    let k = &exp.kernel;
    let phi_excess = max(k.phi().iter().map(|p| (-p).max(p - 1.0)));
    let checks = vec![
        Check::at_most(
            "detailed_balance",
            k.detailed_balance_residual(),
            tol.kernel,
        ),
        Check::at_most("closed_form", k.closed_form_residual(), tol.kernel),
        Check::at_most("row_closure", k.row_closure_residual(), tol.kernel),
        Check::at_most("stationarity", k.stationarity_residual(), tol.kernel),
        Check::at_most("rejection_mass_range", phi_excess, 0.0),
    ];
    SuiteReport::finish(Suite::KernelChecks, None, checks, started)
}

fn spectral_suite(
    exp: &Experiment,
    spec: &Spectrum,
    summary: &SpectrumSummary,
    tol: &Tolerances,
    seed: u64,
) -> SuiteReport {
    let started = Instant::now();
    let k = &exp.kernel;
    let n = k.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut contraction, mut adjoint, mut duality, mut increase, mut inequality) = (
        f64::NEG_INFINITY,
        0.0f64,
        0.0f64,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for i in 0..RANDOM_FUNCTIONS {
        let f = random_function(&mut rng, n);
        let g = random_function(&mut rng, n);
        let (kf, nf) = check_contraction(k, &f);
        contraction = contraction.max(kf - nf);
        adjoint = adjoint.max(check_self_adjoint(k, &f, &g));
        let density = exp
            .kernel
            .target()
            .times(&f.iter().map(|v| v.abs()).collect::<Vec<_>>());
        duality = duality.max(max(duality_residuals(k, &density, 20).into_iter()));
        let s = quadratic_form_sequence(k, &f, 1, 50);
        increase = increase.max(
            s.windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max),
        );
        let (np, p) = [(0, 1), (1, 1), (2, 5), (5, 1)][i % 4];
        let bound = OperatorNormBound::Exact(spec.difference_norm(1, np, p));
        let (lhs, rhs) = verify_operator_inequality(k, &f, 1, np, p, bound);
        inequality = inequality.max(lhs - rhs);
    }
    let mut checks = vec![
        Check::at_most("contraction_excess", contraction, tol.operator),
        Check::at_most("self_adjointness", adjoint, tol.operator),
        Check::at_most("duality", duality, tol.operator),
        Check::at_most("quadratic_form_increase", increase, tol.monotone),
        Check::at_most("operator_inequality_excess", inequality, tol.operator),
    ];
    let mode = match summary.positivity_nu {
        Some(_) => {
            let fp = fixed_point_diagnostic(k);
            checks.push(
                Check::at_most(
                    "second_eigenvalue",
                    fp.second_eigenvalue,
                    1.0 - mhlab::tolerances::GAP_SIMPLICITY,
                )
                .not_residual(),
            );
            checks.push(Check::at_most(
                "fixed_point_spread",
                fp.constancy_spread,
                tol.constancy,
            ));
            "positive"
        }
        None => {
            checks.push(Check::at_least(
                "unit_multiplicity",
                summary.unit_multiplicity as f64,
                2.0,
            ));
            "negative-control"
        }
    };
    SuiteReport::finish(Suite::Spectral, Some(mode), checks, started)
}

fn convergence_suite(
    exp: &Experiment,
    spec: &Spectrum,
    summary: &SpectrumSummary,
    config: &ExperimentConfig,
) -> CliResult<(SuiteReport, ConvergenceReport)> {
    let started = Instant::now();
    let tol = &config.tol;
    let k = &exp.kernel;
    let auto = config.run.steps.is_none();
    let steps = config.run.steps.unwrap_or_else(|| {
        if summary.gap > 0.0 {
            (10.0 / summary.gap).floor() as usize
        } else {
            100
        }
    });
    let report = tv_trace(&exp.initial, k, steps)
        .map_err(|e| crate::error::CliError::key("initial.family", e.to_string()))?;
    let mut checks = vec![
        Check::at_most(
            "tv_increase",
            report.max_tv_increase().max(0.0),
            tol.monotone,
        ),
        Check::at_most(
            "l1_sandwich_violation",
            report.max_sandwich_violation().max(0.0),
            tol.monotone,
        ),
    ];
    let mode = if summary.positivity_nu.is_some() {
        let e0 = report.records[0].l2pi_bound;
        let rate = spec.second_modulus();
        let spectral_excess = report
            .records
            .iter()
            .map(|r| r.l1 - rate.powi(r.n as i32) * e0)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most(
            "spectral_decay_excess",
            spectral_excess.max(0.0),
            tol.operator,
        ));
        if auto {
            checks
                .push(Check::at_most("final_tv", report.final_tv(), tol.tv_target).not_residual());
        }
        if k.len() == 2 {
            let lambda = 1.0 - k.transition_probability(0, 1) - k.transition_probability(1, 0);
            let tv0 = report.records[0].tv;
            let closed = max(report
                .records
                .iter()
                .map(|r| (r.tv - tv0 * lambda.powi(r.n as i32)).abs()));
            checks.push(Check::at_most("two_state_closed_form", closed, 1e-9));
        }
        "standard"
    } else {
        let floor = report.tv_values().into_iter().fold(f64::INFINITY, f64::min);
        let predicted = predicted_plateau(&exp.initial, k, spec);
        checks.push(Check::at_least("tv_plateau", floor, tol.plateau));
        checks.push(Check::at_least("predicted_plateau", predicted, tol.plateau));
        "negative-control"
    };
    Ok((
        SuiteReport::finish(Suite::Convergence, Some(mode), checks, started),
        report,
    ))
}

fn sampler_suite(
    exp: &Experiment,
    config: &ExperimentConfig,
) -> CliResult<(SuiteReport, SamplerSummary)> {
    let started = Instant::now();
    let run = &config.run;
    let tol = &config.tol;
    let k = &exp.kernel;
    let model_err = |e: mhlab::Error| crate::error::CliError::key("initial.family", e.to_string());
    let ensemble = run_ensemble(&exp.initial, k, run.sampler_steps, run.replicas, run.seed)
        .map_err(model_err)?;
    let exact = evolve(&exp.initial, k, run.sampler_steps).map_err(model_err)?;
    let discrepancies =
        empirical_vs_exact_with(&ensemble, &exact, tol.envelope_c).map_err(model_err)?;
    let worst = discrepancies
        .iter()
        .map(|d| d.tv - d.envelope)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut checks = vec![Check::at_most("ensemble_tv_over_envelope", worst, 0.0).not_residual()];
    if run.chain_steps > 0 {
        let counts =
            long_chain_transitions(k, k.target(), run.chain_steps, run.seed).map_err(model_err)?;
        let sigma = family_sigma(tol.sigma, counts.observed_pairs());
        checks.push(
            Check::at_most(
                "transition_symmetry_ratio",
                counts.symmetry_ratio(sigma),
                1.0,
            )
            .not_residual(),
        );
        checks.push(
            Check::at_most(
                "transition_row_ratio",
                counts.row_deviation_ratio(k, tol.sigma),
                1.0,
            )
            .not_residual(),
        );
    }
    let summary = SamplerSummary {
        steps: run.sampler_steps,
        replicas: run.replicas,
        chain_steps: run.chain_steps,
        discrepancies,
        ensemble,
    };
    Ok((
        SuiteReport::finish(Suite::Sampler, None, checks, started),
        summary,
    ))
}

/// Runs the requested suites in the order kernel checks, spectral,
/// convergence, sampler. The sampler only runs on a kernel that passed its
/// checks, so requesting it also reports the kernel checks.
pub fn run(config: &ExperimentConfig) -> CliResult<RunReport> {
    let exp = config.build()?;
    let k = &exp.kernel;
    let spec = Spectrum::of(k);
    let summary = SpectrumSummary {
        eigenvalues: spec.eigenvalues().to_vec(),
        second_modulus: spec.second_modulus(),
        gap: spec.gap(),
        unit_multiplicity: spec.unit_multiplicity(mhlab::tolerances::GAP_SIMPLICITY),
        positivity_nu: k.first_positive_power(MAX_NU),
    };
    let wants = |s: Suite| config.run.suites.contains(&s);
    let mut suites = Vec::new();
    let gate = kernel_suite(&exp, &config.tol);
    let kernel_ok = gate.status == Status::Pass;
    if wants(Suite::KernelChecks) || wants(Suite::Sampler) {
        suites.push(gate);
    }
    if wants(Suite::Spectral) {
        suites.push(spectral_suite(
            &exp,
            &spec,
            &summary,
            &config.tol,
            config.run.seed,
        ));
    }
    let mut convergence = None;
    if wants(Suite::Convergence) {
        let (suite, report) = convergence_suite(&exp, &spec, &summary, config)?;
        suites.push(suite);
        convergence = Some(report);
    }
    let mut sampler = None;
    if wants(Suite::Sampler) {
        if kernel_ok {
            let (suite, s) = sampler_suite(&exp, config)?;
            suites.push(suite);
            sampler = Some(s);
        } else {
            suites.push(SuiteReport::skipped(Suite::Sampler, "kernel checks failed"));
        }
    }
    Ok(RunReport {
        tool: format!("mhlab {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        config_text: config.to_text(),
        kernel_id: k.id().to_string(),
        seed: config.run.seed,
        tolerances: config.tol,
        stream_algorithm: STREAM_ALGORITHM.to_string(),
        spectrum: summary,
        suites,
        convergence,
        sampler,
    })
}
