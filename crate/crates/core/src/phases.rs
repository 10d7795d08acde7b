//! Phase accumulated by the invariant eigenstates, split into dynamical and
//! geometric parts, and the closed-loop (area) form of the geometric part.
//!
//! Sign conventions, fixed once:
//!
//! * dynamical rate `n omega + omega |beta|^2 - (beta + beta^*) c(t)`
//! * geometric rate `(i/2)(beta' beta^* - beta'^* beta) = -Im(beta^* beta')`
//! * total phase `dynamical - geometric`, and the state carries `exp(-i total)`
//! * around a closed loop of signed area `A` in the beta plane, the geometric
//!   phase is `-2A`
//!
//! The geometric phase is therefore the Berry-convention phase gained by the
//! state, `exp(+i geometric)`, while the dynamical phase is subtracted.

use std::f64::consts::TAU;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::auxiliary::{beta_dot, EtaMethod, EtaSolver, InitialCondition};
use crate::error::{Error, Result};
use crate::model::{DriveAxis, OscillatorParams};
use crate::par::{self, Strategy};
use crate::quadrature::{check_grid, Refinement};

/// Largest `(omega + Omega) * h` on the phase quadrature's fine grid.
const PHASE_STEP: f64 = 0.002;

/// Polyline samples per drive period used by [`berry_sweep`].
pub const SWEEP_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseRates {
    pub geometric: f64,
    pub dynamical: f64,
}

impl Add for PhaseRates {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        PhaseRates {
            geometric: self.geometric + o.geometric,
            dynamical: self.dynamical + o.dynamical,
        }
    }
}

impl Mul<f64> for PhaseRates {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        PhaseRates {
            geometric: self.geometric * k,
            dynamical: self.dynamical * k,
        }
    }
}

impl crate::quadrature::Integrand for PhaseRates {}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseBreakdown {
    pub t: f64,
    pub total: f64,
    pub geometric: f64,
    pub dynamical: f64,
}

/// Instantaneous rates for quantum number `n` at displacement `beta`.
pub fn phase_integrand(
    params: &OscillatorParams,
    axis: DriveAxis,
    n: u32,
    beta: Complex64,
    t: f64,
) -> PhaseRates {
    let omega = params.frequency(axis);
    let c = params.drive_value(axis, t);
    let bdot = beta_dot(params, axis, beta, t);
    PhaseRates {
        geometric: -(beta.conj() * bdot).im,
        dynamical: n as f64 * omega + omega * beta.norm_sqr() - 2.0 * beta.re * c,
    }
}

/// Accumulated phases at every point of `t_grid` (starting at 0). The rates
/// are integrated by composite Simpson on a refinement of the grid fine
/// enough that the result does not depend on the output spacing.
pub fn accumulate_phases(solver: &EtaSolver, n: u32, t_grid: &[f64]) -> Result<Vec<PhaseBreakdown>> {
    check_grid(t_grid, 0.0)?;
    let params = solver.params();
    let axis = solver.axis();
    let h_max = PHASE_STEP / (params.frequency(axis) + params.drive_freq);
    let fine = Refinement::new(t_grid, h_max);
    let betas = solver.beta_on_grid(&fine.points)?;
    let rates: Vec<PhaseRates> = fine
        .points
        .iter()
        .zip(&betas)
        .map(|(&t, &b)| phase_integrand(params, axis, n, b, t))
        .collect();
    Ok(t_grid
        .iter()
        .zip(fine.cumulative(&rates))
        .map(|(&t, acc)| PhaseBreakdown {
            t,
            total: acc.dynamical - acc.geometric,
            geometric: acc.geometric,
            dynamical: acc.dynamical,
        })
        .collect())
}

pub fn phases_at(solver: &EtaSolver, n: u32, t: f64) -> Result<PhaseBreakdown> {
    if t == 0.0 {
        return Ok(PhaseBreakdown::default());
    }
    Ok(accumulate_phases(solver, n, &[0.0, t])?[1])
}

/// Common closure time of `e^{-i omega1 t}` and the drive: `omega1 / Omega = p / q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSpec {
    pub p: u64,
    pub q: u64,
    pub period: f64,
}

/// Continued-fraction search for `omega1 / Omega = p / q` with `q <= max_den`
/// to 1e-12 relative.
pub fn commensurate_period(omega1: f64, drive_freq: f64, max_den: u64) -> Result<LoopSpec> {
    if !(drive_freq > 0.0) || !(omega1 > 0.0) {
        return Err(Error::InvalidParams(
            "commensurate period needs omega1 > 0 and Omega > 0".into(),
        ));
    }
    let ratio = omega1 / drive_freq;
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = ratio;
    for _ in 0..64 {
        let a = x.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den {
            break;
        }
        if (p2 as f64 / q2 as f64 - ratio).abs() <= 1e-12 * ratio {
            return Ok(LoopSpec {
                p: p2,
                q: q2,
                period: TAU * p2 as f64 / omega1,
            });
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a as f64;
        if frac <= 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    Err(Error::Incommensurate { ratio, max_den })
}

/// Shoelace area of a closed polyline in the `(Re, Im)` plane,
/// counterclockwise positive. First and last samples must agree to 1e-9.
pub fn loop_signed_area(samples: &[Complex64]) -> Result<f64> {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(Error::OpenCurve { gap: f64::INFINITY });
    };
    let gap = (first - last).norm();
    if gap > 1e-9 {
        return Err(Error::OpenCurve { gap });
    }
    let twice: f64 = samples
        .iter()
        .zip(samples.iter().cycle().skip(1))
        .map(|(a, b)| a.re * b.im - b.re * a.im)
        .sum();
    Ok(0.5 * twice)
}

/// Geometric phase and enclosed area for one closed loop of `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopCheck {
    pub geometric: f64,
    pub area: f64,
}

impl LoopCheck {
    /// `|phi_g + 2A|`.
    pub fn residual(&self) -> f64 {
        (self.geometric + 2.0 * self.area).abs()
    }
}

/// Integrates the geometric phase over `[0, period]` and measures the
/// shoelace area of `beta` sampled at `samples` equal steps over the same span.
pub fn loop_check(solver: &EtaSolver, period: f64, samples: usize) -> Result<LoopCheck> {
    let geometric = phases_at(solver, 0, period)?.geometric;
    let grid: Vec<f64> = (0..=samples)
        .map(|k| if k == samples { period } else { period * k as f64 / samples as f64 })
        .collect();
    let betas = solver.beta_on_grid(&grid)?;
    Ok(LoopCheck {
        geometric,
        area: loop_signed_area(&betas)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub omega: f64,
    pub phase_per_cycle: f64,
    /// `phase_per_cycle / Omega`.
    pub ratio: f64,
    pub loop_area: f64,
    pub area_check_residual: f64,
}

/// Geometric phase of each successive drive period `2 pi / Omega`,
/// homogeneous-free convention on the x axis.
pub fn per_cycle_phases(params: &OscillatorParams, cycles: usize) -> Result<Vec<f64>> {
    let solver = EtaSolver::new(
        params,
        DriveAxis::X,
        InitialCondition::HomogeneousFree,
        EtaMethod::ClosedForm,
    )?;
    let period = TAU / params.drive_freq;
    let grid: Vec<f64> = (0..=cycles).map(|k| k as f64 * period).collect();
    let acc = accumulate_phases(&solver, 0, &grid)?;
    Ok(acc.windows(2).map(|w| w[1].geometric - w[0].geometric).collect())
}

/// Per-cycle geometric phase as the drive slows down. Every `Omega` must lie
/// in `(0, omega1 / 2)`. Points are independent and may run in parallel.
pub fn berry_sweep(
    template: &OscillatorParams,
    omegas: &[f64],
    cycles: usize,
    strategy: Strategy,
) -> Result<Vec<SweepRow>> {
    template.validate()?;
    if cycles == 0 {
        return Err(Error::InvalidParams("cycles must be >= 1".into()));
    }
    if let Some(om) = omegas
        .iter()
        .find(|&&om| !(om > 0.0 && om < template.omega1 / 2.0))
    {
        return Err(Error::InvalidParams(format!(
            "sweep frequency {om} outside (0, omega1/2)"
        )));
    }
    par::map(strategy, omegas, |&om| sweep_point(template, om, cycles))
        .into_iter()
        .collect()
}

fn sweep_point(template: &OscillatorParams, omega: f64, cycles: usize) -> Result<SweepRow> {
    let params = template.with_drive_freq(omega);
    let phases = per_cycle_phases(&params, cycles)?;
    let phase_per_cycle = phases.iter().sum::<f64>() / phases.len() as f64;
    let solver = EtaSolver::new(
        &params,
        DriveAxis::X,
        InitialCondition::HomogeneousFree,
        EtaMethod::ClosedForm,
    )?;
    let lc = loop_check(&solver, TAU / omega, SWEEP_SAMPLES)?;
    Ok(SweepRow {
        omega,
        phase_per_cycle,
        ratio: phase_per_cycle / omega,
        loop_area: lc.area,
        area_check_residual: (phases[0] + 2.0 * lc.area).abs(),
    })
}
