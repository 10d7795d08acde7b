//! Joins the x and y solutions into the two-mode state
//! `exp(-i (omega1 + omega2) t / 2) |psi_1(t)> |psi_2(t)>`, kept factored.

use crate::auxiliary::{EtaMethod, EtaSolver, InitialCondition};
use crate::error::Result;
use crate::fock::{analytic_state, expect_a, FockVector};
use crate::model::{DriveAxis, OscillatorParams};
use crate::par::{self, Strategy};

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    pub t: f64,
    pub x_state: FockVector,
    pub y_state: FockVector,
    /// Zero-point phase `-(omega1 + omega2) t / 2`.
    pub global_phase: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub ic: InitialCondition,
    /// x-axis method; the y axis always uses the quadrature.
    pub method: EtaMethod,
    pub strategy: Strategy,
}

pub fn axis_solver(params: &OscillatorParams, axis: DriveAxis, opts: &AssemblyOptions) -> Result<EtaSolver> {
    EtaSolver::new(params, axis, opts.ic, opts.method).map_err(|e| e.on_axis(axis))
}

pub fn full_state(
    params: &OscillatorParams,
    n1: usize,
    n2: usize,
    t: f64,
    dim: usize,
    opts: &AssemblyOptions,
) -> Result<CompositeState> {
    let build = |axis: DriveAxis, n: usize| -> Result<FockVector> {
        let solver = axis_solver(params, axis, opts)?;
        analytic_state(&solver, n, t, dim).map_err(|e| e.on_axis(axis))
    };
    let (x, y) = par::join(opts.strategy, || build(DriveAxis::X, n1), || build(DriveAxis::Y, n2));
    Ok(CompositeState {
        t,
        x_state: x?,
        y_state: y?,
        global_phase: -0.5 * (params.omega1 + params.omega2) * t,
    })
}

/// `(<x>, <y>)` with `<x> = 2 Re<a> / sqrt(2 mu omega1)` and likewise for y.
pub fn dipole_expectation(composite: &CompositeState, params: &OscillatorParams) -> (f64, f64) {
    let x = 2.0 * expect_a(&composite.x_state).re / (2.0 * params.mu * params.omega1).sqrt();
    let y = 2.0 * expect_a(&composite.y_state).re / (2.0 * params.mu * params.omega2).sqrt();
    (x, y)
}

impl CompositeState {
    pub fn axis_state(&self, axis: DriveAxis) -> &FockVector {
        match axis {
            DriveAxis::X => &self.x_state,
            DriveAxis::Y => &self.y_state,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fock::{fidelity, propagate_oracle};

    #[test]
    fn initial_state_is_product_of_number_states() {
        let p = OscillatorParams::reference();
        let s = full_state(&p, 1, 2, 0.0, 32, &AssemblyOptions::default()).unwrap();
        assert!(s.x_state.distance(&FockVector::basis(1, 32).unwrap()) < 1e-14);
        assert!(s.y_state.distance(&FockVector::basis(2, 32).unwrap()) < 1e-14);
        assert_eq!(s.global_phase, 0.0);
        assert_eq!(dipole_expectation(&s, &p), (0.0, 0.0));
    }

    #[test]
    fn undriven_state() {
        let mut p = OscillatorParams::reference();
        p.field = 0.0;
        let t = 2.2;
        let s = full_state(&p, 1, 3, t, 24, &AssemblyOptions::default()).unwrap();
        let ex = FockVector::basis(1, 24).unwrap().phase_shifted(-p.omega1 * t);
        let ey = FockVector::basis(3, 24).unwrap().phase_shifted(-3.0 * p.omega2 * t);
        assert!(s.x_state.distance(&ex) < 1e-12);
        assert!(s.y_state.distance(&ey) < 1e-12);
        assert_eq!(s.global_phase, -0.5 * (p.omega1 + p.omega2) * t);
        assert_eq!(dipole_expectation(&s, &p), (0.0, 0.0));
    }

    #[test]
    fn each_factor_matches_its_oracle() {
        let p = OscillatorParams::reference();
        let (t, dim) = (5.0, 48);
        let s = full_state(&p, 0, 1, t, dim, &AssemblyOptions::default()).unwrap();
        for (axis, n) in [(DriveAxis::X, 0), (DriveAxis::Y, 1)] {
            let oracle = propagate_oracle(&p, axis, &FockVector::basis(n, dim).unwrap(), t, 1e-3).unwrap();
            let f = fidelity(&oracle, s.axis_state(axis)).unwrap();
            assert!(f.norm() >= 1.0 - 1e-6, "{axis}: {}", f.norm());
            assert!(f.arg().abs() < 1e-4, "{axis}: {}", f.arg());
        }
    }

    #[test]
    fn dipole_readout_tracks_beta() {
        let p = OscillatorParams::reference();
        let opts = AssemblyOptions::default();
        let sx = axis_solver(&p, DriveAxis::X, &opts).unwrap();
        for t in [1.0, 7.0, 15.0] {
            let s = full_state(&p, 0, 0, t, 48, &opts).unwrap();
            let (x, _) = dipole_expectation(&s, &p);
            let b = sx.beta_at(t).unwrap();
            assert!((x + 2.0 * b.re / (2.0 * p.mu * p.omega1).sqrt()).abs() < 1e-8);

            let mut shifted = s.clone();
            shifted.global_phase += 1.234;
            assert_eq!(dipole_expectation(&shifted, &p), dipole_expectation(&s, &p));
        }
    }

    #[test]
    fn axes_are_independent() {
        let p = OscillatorParams::reference();
        let mut q = p;
        q.omega2 = 2.7;
        let opts = AssemblyOptions::default();
        let a = full_state(&p, 0, 0, 3.0, 32, &opts).unwrap();
        let b = full_state(&q, 0, 0, 3.0, 32, &opts).unwrap();
        assert_eq!(a.x_state, b.x_state);
        assert_ne!(a.y_state, b.y_state);
    }

    #[test]
    fn errors_carry_the_axis() {
        let mut p = OscillatorParams::reference();
        p.drive_freq = p.omega1;
        let err = full_state(&p, 0, 0, 1.0, 32, &AssemblyOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Axis { axis: DriveAxis::X, .. }));
        assert!(matches!(err.root(), Error::Resonance { .. }));

        let opts = AssemblyOptions {
            method: EtaMethod::Numeric,
            ..Default::default()
        };
        assert!(full_state(&p, 0, 0, 1.0, 32, &opts).is_ok());
    }
}
