//! Fixed-step classical Runge-Kutta for complex ODE systems.
//!
//! The step count is `round((t1 - t0) / dt)` and the step actually taken is
//! recomputed from it, so the trajectory lands on `t1` exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub struct OdeProblem<F> {
    pub rhs: F,
    pub y0: Vec<Complex64>,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl<F> OdeProblem<F>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(rhs: F, y0: Vec<Complex64>, t0: f64, t1: f64, dt: f64) -> Self {
        OdeProblem { rhs, y0, t0, t1, dt }
    }

    pub fn dimension(&self) -> usize {
        self.y0.len()
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Grid(format!("step size must be > 0, got {}", self.dt)));
        }
        if !(self.t1 > self.t0) {
            return Err(Error::Grid(format!(
                "empty interval [{}, {}]",
                self.t0, self.t1
            )));
        }
        let n = ((self.t1 - self.t0) / self.dt).round();
        Ok((n as usize).max(1))
    }
}

/// Both endpoints included; states stored flat, `dim` components each.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    data: Vec<Complex64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last(&self) -> &[Complex64] {
        self.state(self.len() - 1)
    }

    pub fn component(&self, i: usize) -> impl Iterator<Item = Complex64> + '_ {
        self.data.chunks_exact(self.dim).map(move |s| s[i])
    }
}

/// Streams every state (including the initial one) to `observe`, returning
/// the final state.
pub fn integrate_rk4_with<F, O>(problem: &OdeProblem<F>, mut observe: O) -> Result<Vec<Complex64>>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(f64, &[Complex64]),
{
    let n_steps = problem.steps()?;
    let h = (problem.t1 - problem.t0) / n_steps as f64;
    let dim = problem.dimension();
    let rhs = &problem.rhs;

    let mut y = problem.y0.clone();
    let mut k1 = vec![Complex64::default(); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    observe(problem.t0, &y);
    for step in 0..n_steps {
        let t = problem.t0 + step as f64 * h;
        rhs(t, &y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + k3[i] * h;
        }
        rhs(t + h, &tmp, &mut k4);
        for i in 0..dim {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        let t_next = if step + 1 == n_steps {
            problem.t1
        } else {
            problem.t0 + (step + 1) as f64 * h
        };
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: t_next });
        }
        observe(t_next, &y);
    }
    Ok(y)
}

pub fn integrate_rk4<F>(problem: &OdeProblem<F>) -> Result<Trajectory>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let n = problem.steps()?;
    let dim = problem.dimension();
    let mut times = Vec::with_capacity(n + 1);
    let mut data = Vec::with_capacity((n + 1) * dim);
    integrate_rk4_with(problem, |t, y| {
        times.push(t);
        data.extend_from_slice(y);
    })?;
    Ok(Trajectory { dim, times, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn rotation(_t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        dy[0] = -I * y[0];
    }

    #[test]
    fn zero_rhs_is_constant() {
        let y0 = vec![Complex64::new(1.5, -2.0), Complex64::new(0.0, 3.0)];
        let p = OdeProblem::new(|_, _: &[Complex64], dy: &mut [Complex64]| dy.fill(Complex64::default()), y0.clone(), 0.0, 1.0, 0.1);
        let tr = integrate_rk4(&p).unwrap();
        assert_eq!(tr.len(), 11);
        for k in 0..tr.len() {
            assert_eq!(tr.state(k), &y0[..]);
        }
    }

    #[test]
    fn rotation_half_turn() {
        let p = OdeProblem::new(rotation, vec![Complex64::new(1.0, 0.0)], 0.0, PI, 1e-4);
        let tr = integrate_rk4(&p).unwrap();
        assert_eq!(*tr.times.last().unwrap(), PI);
        assert!((tr.last()[0] + 1.0).norm() < 1e-12);
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |dt: f64| {
            let p = OdeProblem::new(rotation, vec![Complex64::new(1.0, 0.0)], 0.0, 10.0, dt);
            let y = integrate_rk4_with(&p, |_, _| {}).unwrap();
            (y[0] - Complex64::from_polar(1.0, -10.0)).norm()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn endpoint_hit_exactly() {
        let p = OdeProblem::new(rotation, vec![Complex64::new(1.0, 0.0)], 0.5, 1.0, 0.03);
        let tr = integrate_rk4(&p).unwrap();
        assert_eq!(tr.len(), 18);
        assert_eq!(tr.times[0], 0.5);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn deterministic() {
        let run = || {
            let p = OdeProblem::new(
                |t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = I * (t.cos() - y[0]),
                vec![Complex64::default()],
                0.0,
                7.0,
                1e-3,
            );
            integrate_rk4(&p).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn blow_up_is_reported() {
        let p = OdeProblem::new(
            |_, y: &[Complex64], dy: &mut [Complex64]| dy[0] = y[0] * y[0],
            vec![Complex64::new(1.0, 0.0)],
            0.0,
            5.0,
            0.01,
        );
        assert!(matches!(integrate_rk4(&p), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn rejects_bad_problems() {
        let y0 = vec![Complex64::new(1.0, 0.0)];
        assert!(integrate_rk4(&OdeProblem::new(rotation, y0.clone(), 0.0, 1.0, 0.0)).is_err());
        assert!(integrate_rk4(&OdeProblem::new(rotation, y0, 1.0, 1.0, 0.1)).is_err());
    }
}
