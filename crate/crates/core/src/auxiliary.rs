//! Coefficients of the invariant `I = alpha a^dag a + eta a^dag + eta^* a + delta`.
//!
//! They obey
//!
//! ```text
//! d eta / dt   = i (alpha c(t) - omega eta)
//! d delta / dt = i (eta^* - eta) c(t)
//! ```
//!
//! For the cosine drive there is a closed form; any drive can be handled by
//! variation of parameters,
//! `eta(t) = e^{-i omega t} [eta0 + i alpha int_0^t e^{i omega s} c(s) ds]`.
//! The displacement parameter is `beta = eta / alpha` and the scalar term is
//! pinned to `delta = |eta|^2 / alpha`, which makes the transformed invariant
//! exactly `alpha a^dag a`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriveAxis, OscillatorParams};
use crate::quadrature::{check_grid, cumulative_simpson};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Closed form refused when `|omega^2 - Omega^2| <= RESONANCE_EPS * omega^2`.
pub const RESONANCE_EPS: f64 = 1e-6;

/// Largest `(omega + Omega) * h` used by the variation-of-parameters quadrature.
const QUADRATURE_PHASE_STEP: f64 = 0.005;

/// How `eta(0)` is fixed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitialCondition {
    /// `eta(0) = 0`, so the evolution operator is the identity at t = 0.
    #[default]
    #[serde(rename = "default-B")]
    UnitaryStart,
    /// No homogeneous part: `eta` is the periodic particular solution and
    /// `beta` traces a closed ellipse.
    #[serde(rename = "homogeneous-free")]
    HomogeneousFree,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum EtaMethod {
    /// Closed form where one exists (x axis, off resonance); the y axis
    /// always goes through the quadrature.
    #[default]
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryState {
    pub eta: Complex64,
    pub delta: f64,
}

impl AuxiliaryState {
    pub fn from_eta(eta: Complex64, alpha: f64) -> Self {
        AuxiliaryState {
            eta,
            delta: delta_of_eta(eta, alpha),
        }
    }
}

/// `(d eta/dt, d delta/dt)`. Delta is carried as complex so that a spurious
/// imaginary part can be observed; the right-hand side does not depend on it.
pub fn aux_rhs(
    params: &OscillatorParams,
    axis: DriveAxis,
    eta: Complex64,
    _delta: Complex64,
    t: f64,
) -> (Complex64, Complex64) {
    let c = params.drive_value(axis, t);
    let omega = params.frequency(axis);
    let eta_dot = I * (params.alpha * c - eta * omega);
    let delta_dot = I * (eta.conj() - eta) * c;
    (eta_dot, delta_dot)
}

/// `omega^2 - Omega^2` for the axis, or `Resonance` if it is within the guard.
pub fn resonance_gap(params: &OscillatorParams, axis: DriveAxis) -> Result<f64> {
    let omega = params.frequency(axis);
    let gap = omega * omega - params.drive_freq * params.drive_freq;
    let threshold = RESONANCE_EPS * omega * omega;
    if gap.abs() <= threshold {
        return Err(Error::Resonance { gap, threshold });
    }
    Ok(gap)
}

/// Periodic particular solution for either axis.
///
/// x: `alpha c0 (omega cos Omega t - i Omega sin Omega t) / (omega^2 - Omega^2)`
/// y: `alpha s0 (omega sin Omega t + i Omega cos Omega t) / (omega^2 - Omega^2)`
pub fn particular_eta(params: &OscillatorParams, axis: DriveAxis, t: f64) -> Result<Complex64> {
    let gap = resonance_gap(params, axis)?;
    let scale = params.alpha * params.drive_amplitude(axis) / gap;
    let omega = params.frequency(axis);
    let (s, c) = (params.drive_freq * t).sin_cos();
    let om = params.drive_freq;
    Ok(match axis {
        DriveAxis::X => Complex64::new(scale * omega * c, -scale * om * s),
        DriveAxis::Y => Complex64::new(scale * omega * s, scale * om * c),
    })
}

/// `B` and `K` of the cosine-drive closed form
/// `eta(t) = B e^{-i omega1 t} + K (omega1 cos Omega t - i Omega sin Omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCoeffs {
    pub b: Complex64,
    pub k: f64,
}

impl ClosedFormCoeffs {
    pub fn new(params: &OscillatorParams, ic: InitialCondition) -> Result<Self> {
        let gap = resonance_gap(params, DriveAxis::X)?;
        let k = params.alpha * params.drive_amplitude(DriveAxis::X) / gap;
        let b = match ic {
            // -alpha QE sqrt(omega1/(2 mu)) / (omega1^2 - Omega^2)
            InitialCondition::UnitaryStart => Complex64::new(
                -params.alpha * params.qe() * (params.omega1 / (2.0 * params.mu)).sqrt() / gap,
                0.0,
            ),
            InitialCondition::HomogeneousFree => Complex64::default(),
        };
        Ok(ClosedFormCoeffs { b, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    omega: f64,
    drive_freq: f64,
    pub coeffs: ClosedFormCoeffs,
}

impl ClosedForm {
    pub fn new(params: &OscillatorParams, ic: InitialCondition) -> Result<Self> {
        Ok(ClosedForm {
            omega: params.omega1,
            drive_freq: params.drive_freq,
            coeffs: ClosedFormCoeffs::new(params, ic)?,
        })
    }

    pub fn eta(&self, t: f64) -> Complex64 {
        let ClosedFormCoeffs { b, k } = self.coeffs;
        let (s, c) = (self.drive_freq * t).sin_cos();
        b * Complex64::from_polar(1.0, -self.omega * t)
            + Complex64::new(k * self.omega * c, -k * self.drive_freq * s)
    }

    /// The conjugate coefficient written out as its own expression
    /// (`B e^{i omega t} + K (omega cos + i Omega sin)`), not as `eta.conj()`.
    pub fn eta_conj(&self, t: f64) -> Complex64 {
        let ClosedFormCoeffs { b, k } = self.coeffs;
        let (s, c) = (self.drive_freq * t).sin_cos();
        b.conj() * Complex64::from_polar(1.0, self.omega * t)
            + Complex64::new(k * self.omega * c, k * self.drive_freq * s)
    }

    pub fn eta_dot(&self, t: f64) -> Complex64 {
        let ClosedFormCoeffs { b, k } = self.coeffs;
        let (s, c) = (self.drive_freq * t).sin_cos();
        let om = self.drive_freq;
        -I * self.omega * b * Complex64::from_polar(1.0, -self.omega * t)
            + Complex64::new(-k * self.omega * om * s, -k * om * om * c)
    }
}

/// Cosine-drive closed form with `eta(0) = 0`.
pub fn closed_form_eta(params: &OscillatorParams, t: f64) -> Result<Complex64> {
    Ok(ClosedForm::new(params, InitialCondition::UnitaryStart)?.eta(t))
}

/// Variation-of-parameters solution on an arbitrary increasing grid starting
/// at 0. The drive integral is composite Simpson on a refinement of the grid.
pub fn general_eta(
    params: &OscillatorParams,
    axis: DriveAxis,
    eta0: Complex64,
    t_grid: &[f64],
) -> Result<Vec<Complex64>> {
    check_grid(t_grid, 0.0)?;
    let omega = params.frequency(axis);
    let h_max = QUADRATURE_PHASE_STEP / (omega + params.drive_freq);
    let integral = cumulative_simpson(t_grid, h_max, |s| {
        Complex64::from_polar(params.drive_value(axis, s), omega * s)
    });
    Ok(t_grid
        .iter()
        .zip(integral)
        .map(|(&t, acc)| Complex64::from_polar(1.0, -omega * t) * (eta0 + I * params.alpha * acc))
        .collect())
}

pub fn beta_of_eta(eta: Complex64, alpha: f64) -> Complex64 {
    eta / alpha
}

pub fn delta_of_eta(eta: Complex64, alpha: f64) -> f64 {
    eta.norm_sqr() / alpha
}

/// `d beta/dt = i (c(t) - omega beta)`.
pub fn beta_dot(params: &OscillatorParams, axis: DriveAxis, beta: Complex64, t: f64) -> Complex64 {
    I * (params.drive_value(axis, t) - params.frequency(axis) * beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Path {
    Closed(ClosedForm),
    Numeric { eta0: Complex64 },
}

/// Produces `eta(t)` for one axis under a chosen initial condition and
/// solution method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSolver {
    params: OscillatorParams,
    axis: DriveAxis,
    ic: InitialCondition,
    path: Path,
}

impl EtaSolver {
    pub fn new(
        params: &OscillatorParams,
        axis: DriveAxis,
        ic: InitialCondition,
        method: EtaMethod,
    ) -> Result<Self> {
        params.validate()?;
        let path = match (axis, method) {
            (DriveAxis::X, EtaMethod::ClosedForm) => Path::Closed(ClosedForm::new(params, ic)?),
            _ => Path::Numeric {
                eta0: match ic {
                    InitialCondition::UnitaryStart => Complex64::default(),
                    InitialCondition::HomogeneousFree => particular_eta(params, axis, 0.0)?,
                },
            },
        };
        Ok(EtaSolver {
            params: *params,
            axis,
            ic,
            path,
        })
    }

    /// Closed form for x off resonance, quadrature otherwise.
    pub fn with_fallback(
        params: &OscillatorParams,
        axis: DriveAxis,
        ic: InitialCondition,
    ) -> Result<Self> {
        match Self::new(params, axis, ic, EtaMethod::ClosedForm) {
            Err(Error::Resonance { .. }) => Self::new(params, axis, ic, EtaMethod::Numeric),
            r => r,
        }
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn axis(&self) -> DriveAxis {
        self.axis
    }

    pub fn initial_condition(&self) -> InitialCondition {
        self.ic
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.path, Path::Closed(_))
    }

    /// Grid must start at 0 and increase.
    pub fn eta_on_grid(&self, t_grid: &[f64]) -> Result<Vec<Complex64>> {
        match self.path {
            Path::Closed(cf) => {
                check_grid(t_grid, 0.0)?;
                Ok(t_grid.iter().map(|&t| cf.eta(t)).collect())
            }
            Path::Numeric { eta0 } => general_eta(&self.params, self.axis, eta0, t_grid),
        }
    }

    pub fn beta_on_grid(&self, t_grid: &[f64]) -> Result<Vec<Complex64>> {
        let alpha = self.params.alpha;
        Ok(self
            .eta_on_grid(t_grid)?
            .into_iter()
            .map(|eta| beta_of_eta(eta, alpha))
            .collect())
    }

    pub fn eta_at(&self, t: f64) -> Result<Complex64> {
        match self.path {
            Path::Closed(cf) => Ok(cf.eta(t)),
            Path::Numeric { eta0 } if t == 0.0 => Ok(eta0),
            Path::Numeric { eta0 } => Ok(general_eta(&self.params, self.axis, eta0, &[0.0, t])?[1]),
        }
    }

    pub fn state_at(&self, t: f64) -> Result<AuxiliaryState> {
        Ok(AuxiliaryState::from_eta(self.eta_at(t)?, self.params.alpha))
    }

    pub fn beta_at(&self, t: f64) -> Result<Complex64> {
        Ok(beta_of_eta(self.eta_at(t)?, self.params.alpha))
    }
}
