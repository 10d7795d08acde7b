//! Physical parameters of the driven dipole oscillator and its two drive
//! functions. Units have hbar = 1 throughout.
//!
//! The x-mode sees `c(t) = QE sqrt(1/(2 mu omega1)) cos(Omega t)` and the
//! y-mode sees `s(t) = QE sqrt(1/(2 mu omega2)) sin(Omega t)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub mu: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// Rotation frequency of the external field.
    #[serde(rename = "Omega")]
    pub drive_freq: f64,
    /// Polarization charge.
    #[serde(rename = "Q")]
    pub charge: f64,
    /// Field amplitude.
    #[serde(rename = "E")]
    pub field: f64,
    /// Free scale of the invariant. Physical outputs do not depend on it.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    1.0
}

impl OscillatorParams {
    /// Reference configuration: mu = 1, omega1 = 1, Omega = 0.3, QE = 0.2.
    pub fn reference() -> Self {
        OscillatorParams {
            mu: 1.0,
            omega1: 1.0,
            omega2: 1.5,
            drive_freq: 0.3,
            charge: 1.0,
            field: 0.2,
            alpha: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mu", self.mu),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("Omega", self.drive_freq),
            ("Q", self.charge),
            ("E", self.field),
            ("alpha", self.alpha),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite")));
        }
        if self.mu <= 0.0 {
            return Err(Error::InvalidParams("mu must be > 0".into()));
        }
        if self.omega1 <= 0.0 || self.omega2 <= 0.0 {
            return Err(Error::InvalidParams("omega1 and omega2 must be > 0".into()));
        }
        if self.drive_freq < 0.0 {
            return Err(Error::InvalidParams("Omega must be >= 0".into()));
        }
        if self.alpha == 0.0 {
            return Err(Error::InvalidParams("alpha must be nonzero".into()));
        }
        Ok(())
    }

    pub fn with_drive_freq(mut self, drive_freq: f64) -> Self {
        self.drive_freq = drive_freq;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Sets Q = 1, E = `qe`.
    pub fn with_qe(mut self, qe: f64) -> Self {
        self.charge = 1.0;
        self.field = qe;
        self
    }

    /// Charge and field only ever appear as this product.
    pub fn qe(&self) -> f64 {
        self.charge * self.field
    }

    pub fn frequency(&self, axis: DriveAxis) -> f64 {
        match axis {
            DriveAxis::X => self.omega1,
            DriveAxis::Y => self.omega2,
        }
    }

    /// `QE sqrt(1/(2 mu omega))` for the axis frequency.
    pub fn drive_amplitude(&self, axis: DriveAxis) -> f64 {
        self.qe() * (1.0 / (2.0 * self.mu * self.frequency(axis))).sqrt()
    }

    pub fn drive_value(&self, axis: DriveAxis, t: f64) -> f64 {
        let phase = self.drive_freq * t;
        match axis {
            DriveAxis::X => self.drive_amplitude(axis) * phase.cos(),
            DriveAxis::Y => self.drive_amplitude(axis) * phase.sin(),
        }
    }
}

/// Which of the two independent oscillator modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveAxis {
    /// Cosine drive at frequency `omega1`.
    X,
    /// Sine drive at frequency `omega2`.
    Y,
}

impl fmt::Display for DriveAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriveAxis::X => f.write_str("x"),
            DriveAxis::Y => f.write_str("y"),
        }
    }
}
