//! Command-line front end: JSON run configuration, the `solve`, `verify` and
//! `sweep` workflows, and CSV output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::auxiliary::{delta_of_eta, EtaMethod, EtaSolver, InitialCondition};
use crate::error::{Error, Result};
use crate::fock::{displaced_number_state, expect_a, FockSpace};
use crate::model::{DriveAxis, OscillatorParams};
use crate::par::{self, Strategy};
use crate::phases::{accumulate_phases, berry_sweep};
use crate::quadrature::uniform_grid;
use crate::verify::{run_checks, VerifyReport, VerifySettings};

pub const SOLVE_HEADER: &str =
    "t,eta_re,eta_im,delta,beta_re,beta_im,phase_total,phase_geom,phase_dyn,exp_a_re,exp_a_im";
pub const SWEEP_HEADER: &str = "Omega,phase_per_cycle,ratio,loop_area,area_check_residual";

/// Flat JSON run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mu: f64,
    pub omega1: f64,
    pub omega2: f64,
    #[serde(rename = "Omega")]
    pub drive_freq: f64,
    #[serde(rename = "Q")]
    pub charge: f64,
    #[serde(rename = "E")]
    pub field: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub n1: usize,
    #[serde(default)]
    pub n2: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_dt_out")]
    pub dt_out: f64,
    #[serde(default = "default_fock_dim")]
    pub fock_dim: usize,
    #[serde(default = "default_oracle_dt")]
    pub oracle_dt: f64,
    #[serde(default)]
    pub ic_convention: InitialCondition,
}

fn one() -> f64 {
    1.0
}
fn default_t_max() -> f64 {
    50.0
}
fn default_dt_out() -> f64 {
    0.1
}
fn default_fock_dim() -> usize {
    64
}
fn default_oracle_dt() -> f64 {
    1e-3
}

pub const MIN_FOCK_DIM: usize = 16;

impl RunConfig {
    pub fn params(&self) -> OscillatorParams {
        OscillatorParams {
            mu: self.mu,
            omega1: self.omega1,
            omega2: self.omega2,
            drive_freq: self.drive_freq,
            charge: self.charge,
            field: self.field,
            alpha: self.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if !(self.dt_out > 0.0 && self.dt_out <= self.t_max) {
            return bad(format!("dt_out must lie in (0, t_max], got {}", self.dt_out));
        }
        if self.fock_dim < MIN_FOCK_DIM {
            return bad(format!("fock_dim must be >= {MIN_FOCK_DIM}, got {}", self.fock_dim));
        }
        if !(self.oracle_dt > 0.0 && self.oracle_dt.is_finite()) {
            return bad(format!("oracle_dt must be positive, got {}", self.oracle_dt));
        }
        for (name, n) in [("n1", self.n1), ("n2", self.n2)] {
            if 4 * n > self.fock_dim {
                return bad(format!("{name} = {n} needs fock_dim >= {}", 4 * n));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn quantum_number(&self, axis: DriveAxis) -> usize {
        match axis {
            DriveAxis::X => self.n1,
            DriveAxis::Y => self.n2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dipole-lr", version, about = "Driven dipole oscillator via its exact invariant")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write eta, beta, phases and <a> on the output grid as CSV.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the self-checks and report PASS/FAIL/SKIP per check.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Per-cycle geometric phase for a list of drive frequencies, as CSV.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Drive frequencies, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        omegas: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        cycles: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Integrate the auxiliary equation instead of using the closed form.
    #[arg(long)]
    pub numeric: bool,
    /// Start from the periodic particular solution (B = 0).
    #[arg(long)]
    pub homogeneous_free: bool,
    #[arg(long)]
    pub fock_dim: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
    #[arg(long, default_value = "x", value_parser = parse_axis)]
    pub axis: DriveAxis,
}

fn parse_axis(s: &str) -> std::result::Result<DriveAxis, String> {
    match s {
        "x" => Ok(DriveAxis::X),
        "y" => Ok(DriveAxis::Y),
        _ => Err(format!("expected x or y, got {s}")),
    }
}

impl CommonArgs {
    /// Loads the config file and applies flag overrides.
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if self.homogeneous_free {
            cfg.ic_convention = InitialCondition::HomogeneousFree;
        }
        if let Some(dim) = self.fock_dim {
            cfg.fock_dim = dim;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn method(&self) -> EtaMethod {
        if self.numeric {
            EtaMethod::Numeric
        } else {
            EtaMethod::ClosedForm
        }
    }
}

/// Shortest round-trip decimal with 17 significant digits; `-0` prints as `0`.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn push_row(out: &mut String, values: &[f64]) {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format_number(*v));
    }
    out.push('\n');
}

pub fn solve_csv(cfg: &RunConfig, axis: DriveAxis, method: EtaMethod, strategy: Strategy) -> Result<String> {
    let params = cfg.params();
    let n = cfg.quantum_number(axis);
    let solver = EtaSolver::new(&params, axis, cfg.ic_convention, method)?;
    let grid = uniform_grid(cfg.t_max, cfg.dt_out);
    let etas = solver.eta_on_grid(&grid)?;
    let phases = accumulate_phases(&solver, n as u32, &grid)?;
    let space = FockSpace::new(cfg.fock_dim);
    let idx: Vec<usize> = (0..grid.len()).collect();
    let exp_a: Vec<_> = par::map(strategy, &idx, |&k| {
        let beta = etas[k] / params.alpha;
        displaced_number_state(&space, n, beta, phases[k].total).map(|psi| expect_a(&psi))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut out = String::with_capacity(grid.len() * 256);
    writeln!(out, "{SOLVE_HEADER}").expect("write to String");
    for k in 0..grid.len() {
        let (eta, ph, a) = (etas[k], phases[k], exp_a[k]);
        let beta = eta / params.alpha;
        push_row(
            &mut out,
            &[
                grid[k],
                eta.re,
                eta.im,
                delta_of_eta(eta, params.alpha),
                beta.re,
                beta.im,
                ph.total,
                ph.geometric,
                ph.dynamical,
                a.re,
                a.im,
            ],
        );
    }
    Ok(out)
}

pub fn sweep_csv(cfg: &RunConfig, omegas: &[f64], cycles: usize, strategy: Strategy) -> Result<String> {
    if omegas.is_empty() {
        return Err(Error::Config("empty frequency list".into()));
    }
    let rows = berry_sweep(&cfg.params(), omegas, cycles, strategy)?;
    let mut out = String::new();
    writeln!(out, "{SWEEP_HEADER}").expect("write to String");
    for r in rows {
        push_row(
            &mut out,
            &[r.omega, r.phase_per_cycle, r.ratio, r.loop_area, r.area_check_residual],
        );
    }
    Ok(out)
}

pub fn verify_report(cfg: &RunConfig, axis: DriveAxis, method: EtaMethod, strategy: Strategy) -> VerifyReport {
    let settings = VerifySettings {
        params: cfg.params(),
        axis,
        n: cfg.quantum_number(axis),
        t_max: cfg.t_max,
        dt_out: cfg.dt_out,
        fock_dim: cfg.fock_dim,
        oracle_dt: cfg.oracle_dt,
        ic: cfg.ic_convention,
        method,
    };
    run_checks(&settings, strategy)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            std::io::stdout().lock().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn diagnose(err: &Error) -> ExitCode {
    match err.root() {
        Error::Resonance { .. } => {
            eprintln!("error: {err}; rerun with --numeric");
            ExitCode::from(1)
        }
        Error::Config(_) | Error::InvalidParams(_) => {
            eprintln!("config error: {err}");
            ExitCode::from(2)
        }
        _ => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let strategy = Strategy::default();
    let common = match &cli.command {
        Command::Solve { common } | Command::Verify { common } | Command::Sweep { common, .. } => common,
    };
    let cfg = match common.config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Solve { .. } => solve_csv(&cfg, common.axis, common.method(), strategy)
            .and_then(|csv| emit(common.out.as_deref(), &csv)),
        Command::Sweep { omegas, cycles, .. } => {
            sweep_csv(&cfg, omegas, *cycles, strategy).and_then(|csv| emit(common.out.as_deref(), &csv))
        }
        Command::Verify { .. } => {
            let report = verify_report(&cfg, common.axis, common.method(), strategy);
            let mut text = String::new();
            for c in &report.checks {
                writeln!(text, "{c}").expect("write to String");
            }
            let failed = report.checks.iter().filter(|c| c.outcome == crate::verify::Outcome::Fail).count();
            writeln!(
                text,
                "{} checks, {failed} failed",
                report.checks.len()
            )
            .expect("write to String");
            if common.out.is_some() {
                if let Err(e) = emit(common.out.as_deref(), &text) {
                    return diagnose(&e);
                }
            }
            if !common.quiet {
                print!("{text}");
            }
            return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => diagnose(&e),
    }
}
