//! Self-checks of the invariant solution for one configuration: the
//! auxiliary equation, the Liouville equation, the invariant spectrum, and
//! agreement with the brute-force propagator.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::auxiliary::{aux_rhs, delta_of_eta, ClosedForm, EtaMethod, EtaSolver, InitialCondition};
use crate::error::{Error, Result};
use crate::fock::{
    displaced_number_state, expect_a, fidelity, invariant_matrix, liouville_residual, propagate_oracle,
    propagate_oracle_with, FockSpace, FockVector,
};
use crate::model::{DriveAxis, OscillatorParams};
use crate::odeint::{integrate_rk4_with, OdeProblem};
use crate::par::{self, Strategy};
use crate::phases::{accumulate_phases, commensurate_period, loop_check, phases_at};
use crate::quadrature::uniform_grid;

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const SPECTRUM_TOL: f64 = 1e-6;
pub const FIDELITY_TOL: f64 = 1e-6;
pub const PHASE_TOL: f64 = 1e-4;
pub const LOOP_TOL: f64 = 1e-6;
pub const EHRENFEST_TOL: f64 = 1e-6;

const RK4_STEP: f64 = 1e-4;
const LIOUVILLE_STEP: f64 = 1e-5;
const LIOUVILLE_POINTS: usize = 20;
const LIOUVILLE_SEED: u64 = 0x5eed;
const SPECTRUM_TIMES: [f64; 4] = [0.0, 3.0, 7.0, 20.0];
const FIDELITY_TIME: f64 = 10.0;
const LOOP_SAMPLES: usize = 100_000;
const LOOP_MAX_DEN: u64 = 1000;
const LOOP_MAX_PERIOD: f64 = 5000.0;
const EDGE_MASS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub params: OscillatorParams,
    pub axis: DriveAxis,
    pub n: usize,
    pub t_max: f64,
    pub dt_out: f64,
    pub fock_dim: usize,
    pub oracle_dt: f64,
    pub ic: InitialCondition,
    pub method: EtaMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl CheckResult {
    fn measured(name: &'static str, value: f64, tol: f64, what: &str) -> Self {
        let outcome = if value < tol { Outcome::Pass } else { Outcome::Fail };
        CheckResult {
            name,
            outcome,
            detail: format!("{what} = {value:.3e} (tol {tol:.0e})"),
        }
    }

    fn skip(name: &'static str, reason: impl Into<String>) -> Self {
        CheckResult {
            name,
            outcome: Outcome::Skip,
            detail: reason.into(),
        }
    }

    fn error(name: &'static str, err: &Error) -> Self {
        CheckResult {
            name,
            outcome: Outcome::Fail,
            detail: err.to_string(),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<4}  {:<22}  {}", self.outcome, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }
}

#[derive(Debug, Clone, Copy)]
enum Job {
    ClosedForm,
    Ode,
    Liouville,
    Spectrum,
    Oracle,
    Loop,
    Ehrenfest,
}

const JOBS: [Job; 7] = [
    Job::ClosedForm,
    Job::Ode,
    Job::Liouville,
    Job::Spectrum,
    Job::Oracle,
    Job::Loop,
    Job::Ehrenfest,
];

/// Runs every check; independent checks run concurrently under `Parallel`.
pub fn run_checks(settings: &VerifySettings, strategy: Strategy) -> VerifyReport {
    let checks = par::map(strategy, &JOBS, |job| run_job(settings, *job))
        .into_iter()
        .flatten()
        .collect();
    VerifyReport { checks }
}

fn run_job(s: &VerifySettings, job: Job) -> Vec<CheckResult> {
    match job {
        Job::ClosedForm => vec![closed_form_residual(s)],
        Job::Ode => vec![ode_agreement(s)],
        Job::Liouville => vec![liouville(s)],
        Job::Spectrum => vec![spectrum(s)],
        Job::Oracle => oracle_overlap(s),
        Job::Loop => vec![loop_duality(s)],
        Job::Ehrenfest => vec![ehrenfest(s)],
    }
}

/// Falls back to the quadrature at resonance unless the numeric path is forced anyway.
fn solver(s: &VerifySettings) -> Result<EtaSolver> {
    match s.method {
        EtaMethod::ClosedForm => EtaSolver::with_fallback(&s.params, s.axis, s.ic),
        EtaMethod::Numeric => EtaSolver::new(&s.params, s.axis, s.ic, s.method),
    }
}

fn closed_form_residual(s: &VerifySettings) -> CheckResult {
    const NAME: &str = "closed-form residual";
    if s.axis == DriveAxis::Y {
        return CheckResult::skip(NAME, "y axis is solved by quadrature");
    }
    if s.method == EtaMethod::Numeric {
        return CheckResult::skip(NAME, "numeric path forced");
    }
    let cf = match ClosedForm::new(&s.params, s.ic) {
        Ok(cf) => cf,
        Err(e @ Error::Resonance { .. }) => return CheckResult::skip(NAME, e.to_string()),
        Err(e) => return CheckResult::error(NAME, &e),
    };
    let (omega, alpha) = (s.params.omega1, s.params.alpha);
    let mut worst: f64 = 0.0;
    for t in uniform_grid(s.t_max, s.dt_out) {
        let c = s.params.drive_value(DriveAxis::X, t);
        let rhs = Complex64::i() * (alpha * c - omega * cf.eta(t));
        worst = worst.max((cf.eta_dot(t) - rhs).norm());
    }
    CheckResult::measured(NAME, worst, RESIDUAL_TOL, "max |eta' - i(alpha c - omega eta)|")
}

fn ode_agreement(s: &VerifySettings) -> CheckResult {
    const NAME: &str = "ODE vs closed form";
    let run = || -> Result<CheckResult> {
        let sol = solver(s)?;
        let grid = uniform_grid(s.t_max, s.dt_out);
        let expected = sol.eta_on_grid(&grid)?;
        let (params, axis) = (s.params, s.axis);
        let rhs = move |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let (e, d) = aux_rhs(&params, axis, y[0], y[1], t);
            dy[0] = e;
            dy[1] = d;
        };
        // restart at every output time so the samples land on the grid exactly
        let mut y = vec![expected[0], Complex64::new(delta_of_eta(expected[0], params.alpha), 0.0)];
        let mut samples = vec![(y[0], y[1])];
        for w in grid.windows(2) {
            let problem = OdeProblem::new(rhs, y, w[0], w[1], RK4_STEP);
            y = integrate_rk4_with(&problem, |_, _| {})?;
            samples.push((y[0], y[1]));
        }
        let mut worst: f64 = 0.0;
        for ((eta, delta), want) in samples.iter().zip(&expected) {
            worst = worst.max((eta - want).norm());
            worst = worst.max((delta.re - delta_of_eta(*want, params.alpha)).abs());
        }
        let what = if sol.is_closed_form() {
            "max |RK4 - closed form|"
        } else {
            "max |RK4 - quadrature|"
        };
        Ok(CheckResult::measured(NAME, worst, RESIDUAL_TOL, what))
    };
    run().unwrap_or_else(|e| CheckResult::error(NAME, &e))
}

fn liouville(s: &VerifySettings) -> CheckResult {
    const NAME: &str = "Liouville residual";
    let run = || -> Result<CheckResult> {
        let sol = solver(s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(LIOUVILLE_SEED);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for _ in 0..LIOUVILLE_POINTS {
            let t = rng.random_range(10.0 * LIOUVILLE_STEP..s.t_max.max(1.0));
            worst = worst.max(liouville_residual(&sol, t, s.fock_dim, LIOUVILLE_STEP)?);
            scale = scale.max(sol.eta_at(t)?.norm_sqr());
        }
        // the centered difference of delta = |eta|^2 loses digits in proportion to it
        Ok(CheckResult::measured(
            NAME,
            worst / scale,
            RESIDUAL_TOL,
            "max ||dI/dt - i[I,H]||_F / max(1, |eta|^2)",
        ))
    };
    run().unwrap_or_else(|e| CheckResult::error(NAME, &e))
}

/// Rows dropped at the bottom of a truncated matrix, and again from the
/// eigenvalues compared, before the truncation edge stops mattering.
pub fn spectrum_buffer(dim: usize) -> usize {
    (dim / 4).min(16)
}

/// How many of the lowest levels of a `space.dim()`-row truncation are
/// trustworthy: `D(-beta)|n>` must keep its mass in the last four rows
/// below `EDGE_MASS`.
pub fn trusted_levels(space: &FockSpace, beta: Complex64) -> usize {
    let dim = space.dim();
    (0..dim)
        .take_while(|&n| {
            let Ok(v) = FockVector::basis(n, dim).and_then(|e| space.displace(-beta, &e)) else {
                return false;
            };
            v.amplitudes()[dim.saturating_sub(4)..].iter().map(|z| z.norm_sqr()).sum::<f64>() < EDGE_MASS
        })
        .count()
}

fn spectrum(s: &VerifySettings) -> CheckResult {
    const NAME: &str = "invariant spectrum";
    let run = || -> Result<CheckResult> {
        let sol = solver(s)?;
        let buffer = spectrum_buffer(s.fock_dim);
        let block = s.fock_dim - buffer;
        let alpha = s.params.alpha;
        let mut worst: f64 = 0.0;
        let space = FockSpace::new(block);
        let mut count = block;
        for t in SPECTRUM_TIMES.into_iter().filter(|&t| t <= s.t_max) {
            let levels = trusted_levels(&space, sol.beta_at(t)?);
            if levels == 0 {
                return Ok(CheckResult::skip(NAME, format!("|beta({t})| too large for N = {}", s.fock_dim)));
            }
            count = count.min(levels);
            let ev = invariant_matrix(&sol, t, s.fock_dim)?.block(block).hermitian_eigenvalues();
            for (n, e) in ev.iter().take(levels).enumerate() {
                worst = worst.max((e - alpha * n as f64).abs());
            }
        }
        Ok(CheckResult::measured(
            NAME,
            worst,
            SPECTRUM_TOL,
            &format!("max |lambda_n - alpha n|, n < {count}"),
        ))
    };
    run().unwrap_or_else(|e| CheckResult::error(NAME, &e))
}

fn oracle_overlap(s: &VerifySettings) -> Vec<CheckResult> {
    const FID: &str = "oracle fidelity";
    const ARG: &str = "phase argument";
    let run = || -> Result<Complex64> {
        let sol = solver(s)?;
        let t = FIDELITY_TIME.min(s.t_max);
        let psi0 = FockVector::basis(s.n, s.fock_dim)?;
        let oracle = propagate_oracle(&s.params, s.axis, &psi0, t, s.oracle_dt)?;
        let space = FockSpace::new(s.fock_dim);
        let phase = phases_at(&sol, s.n as u32, t)?.total;
        let analytic = displaced_number_state(&space, s.n, sol.beta_at(t)?, phase)?;
        fidelity(&oracle, &analytic)
    };
    match run() {
        Ok(f) => vec![
            CheckResult::measured(FID, 1.0 - f.norm(), FIDELITY_TOL, "1 - |<oracle|analytic>|"),
            CheckResult::measured(ARG, f.arg().abs(), PHASE_TOL, "|arg <oracle|analytic>|"),
        ],
        Err(e) => vec![CheckResult::error(FID, &e), CheckResult::error(ARG, &e)],
    }
}

fn loop_duality(s: &VerifySettings) -> CheckResult {
    const NAME: &str = "loop-area duality";
    let omega = s.params.frequency(s.axis);
    if !(s.params.drive_freq > 0.0) {
        return CheckResult::skip(NAME, "static drive has no closed loop");
    }
    let spec = match commensurate_period(omega, s.params.drive_freq, LOOP_MAX_DEN) {
        Ok(spec) if spec.period <= LOOP_MAX_PERIOD => spec,
        Ok(spec) => return CheckResult::skip(NAME, format!("common period {:.1} too long", spec.period)),
        Err(e) => return CheckResult::skip(NAME, e.to_string()),
    };
    let mut worst: f64 = 0.0;
    for ic in [InitialCondition::UnitaryStart, InitialCondition::HomogeneousFree] {
        let sol = match EtaSolver::new(&s.params, s.axis, ic, s.method) {
            Ok(sol) => sol,
            Err(e @ Error::Resonance { .. }) => return CheckResult::skip(NAME, e.to_string()),
            Err(e) => return CheckResult::error(NAME, &e),
        };
        match loop_check(&sol, spec.period, LOOP_SAMPLES) {
            Ok(lc) => worst = worst.max(lc.residual()),
            Err(e @ Error::OpenCurve { .. }) => return CheckResult::skip(NAME, e.to_string()),
            Err(e) => return CheckResult::error(NAME, &e),
        }
    }
    CheckResult::measured(NAME, worst, LOOP_TOL, "max |phi_g + 2 area| over both conventions")
}

fn ehrenfest(s: &VerifySettings) -> CheckResult {
    const NAME: &str = "Ehrenfest";
    let run = || -> Result<CheckResult> {
        let sol = solver(s)?;
        let grid = uniform_grid(s.t_max, s.dt_out);
        let betas = sol.beta_on_grid(&grid)?;
        let psi0 = FockVector::basis(s.n, s.fock_dim)?;
        let mut next = 0usize;
        let mut worst: f64 = 0.0;
        propagate_oracle_with(&s.params, s.axis, &psi0, s.t_max, s.oracle_dt, |t, psi| {
            while next < grid.len() && grid[next] <= t + 1e-9 * s.t_max {
                if (grid[next] - t).abs() <= 1e-9 * s.t_max.max(1.0) {
                    worst = worst.max((expect_a(psi) + betas[next]).norm());
                }
                next += 1;
            }
        })?;
        Ok(CheckResult::measured(NAME, worst, EHRENFEST_TOL, "max |<a> + beta|"))
    };
    run().unwrap_or_else(|e| CheckResult::error(NAME, &e))
}

/// Analytic states on `t_grid` with the phase accumulated once along the grid.
pub fn analytic_trajectory(solver: &EtaSolver, n: usize, t_grid: &[f64], dim: usize) -> Result<Vec<FockVector>> {
    let space = FockSpace::new(dim);
    let betas = solver.beta_on_grid(t_grid)?;
    let phases = accumulate_phases(solver, n as u32, t_grid)?;
    betas
        .iter()
        .zip(&phases)
        .map(|(b, p)| displaced_number_state(&space, n, *b, p.total))
        .collect()
}
