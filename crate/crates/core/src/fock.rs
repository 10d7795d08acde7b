//! Truncated Fock-space representation of one oscillator mode.
//!
//! This is the brute-force side of every check: operator matrices for the
//! Hamiltonian and the invariant, direct midpoint-exponential propagation of
//! the Schrödinger equation, and the displaced number states that the
//! invariant construction predicts.
//!
//! The truncated ladder operators violate `[a, a^dag] = 1` in the last basis
//! state, so spectral and residual checks only look at a top-left block.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::auxiliary::{delta_of_eta, EtaSolver};
use crate::error::{Error, Result};
use crate::model::{DriveAxis, OscillatorParams};
use crate::phases::phases_at;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest tolerated `|amp[N-1]|^2 + |amp[N-2]|^2`.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Largest `dt * max(omega, Omega, |c0| sqrt(N))` accepted by the oracle.
pub const ORACLE_STEP_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: DVector<Complex64>,
}

impl FockVector {
    /// Number state `|n>` in an `dim`-state basis.
    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParams(format!("|{n}> outside a {dim}-state basis")));
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = Complex64::new(1.0, 0.0);
        Ok(FockVector { amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        FockVector {
            amps: DVector::from_vec(amps),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn tail_mass(&self) -> f64 {
        self.amps.iter().rev().take(2).map(|z| z.norm_sqr()).sum()
    }

    pub fn check_truncation(&self) -> Result<()> {
        let tail_mass = self.tail_mass();
        if tail_mass > TAIL_TOLERANCE {
            return Err(Error::Truncation {
                tail_mass,
                dim: self.dim(),
                suggested: 2 * self.dim(),
            });
        }
        Ok(())
    }

    pub fn phase_shifted(mut self, phase: f64) -> Self {
        let z = Complex64::from_polar(1.0, phase);
        self.amps.iter_mut().for_each(|a| *a *= z);
        self
    }

    pub fn distance(&self, other: &FockVector) -> f64 {
        (&self.amps - &other.amps).norm()
    }
}

/// Dense `N x N` complex operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(pub DMatrix<Complex64>);

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `max |M - M^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M + M^dag|`.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        (&self.0 + self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn block(&self, size: usize) -> OperatorMatrix {
        OperatorMatrix(self.0.view((0, 0), (size, size)).into_owned())
    }

    /// Ascending eigenvalues; only meaningful for Hermitian matrices.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if v.dim() != self.dim() {
            return Err(Error::Dimension(self.dim(), v.dim()));
        }
        Ok(FockVector { amps: &self.0 * &v.amps })
    }
}

/// `(a, a^dag)` on `|0> .. |N-1>`.
pub fn ladder_matrices(dim: usize) -> (OperatorMatrix, OperatorMatrix) {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    (OperatorMatrix(a), OperatorMatrix(a_dag))
}

/// `omega a^dag a + c(t) (a^dag + a)`.
pub fn hamiltonian_matrix(params: &OscillatorParams, axis: DriveAxis, t: f64, dim: usize) -> OperatorMatrix {
    let h = real_hamiltonian(params.frequency(axis), params.drive_value(axis, t), dim);
    OperatorMatrix(h.map(|x| Complex64::new(x, 0.0)))
}

fn real_hamiltonian(omega: f64, c: f64, dim: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        h[(n, n)] = omega * n as f64;
        if n + 1 < dim {
            let v = c * ((n + 1) as f64).sqrt();
            h[(n, n + 1)] = v;
            h[(n + 1, n)] = v;
        }
    }
    h
}

/// `alpha a^dag a + eta a^dag + eta^* a + delta`.
pub fn invariant_from_coeffs(alpha: f64, eta: Complex64, delta: f64, dim: usize) -> OperatorMatrix {
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = Complex64::new(alpha * n as f64 + delta, 0.0);
        if n + 1 < dim {
            let s = ((n + 1) as f64).sqrt();
            m[(n + 1, n)] = eta * s;
            m[(n, n + 1)] = eta.conj() * s;
        }
    }
    OperatorMatrix(m)
}

/// The invariant at time `t` with `delta = |eta|^2 / alpha`.
pub fn invariant_matrix(solver: &EtaSolver, t: f64, dim: usize) -> Result<OperatorMatrix> {
    let alpha = solver.params().alpha;
    let eta = solver.eta_at(t)?;
    Ok(invariant_from_coeffs(alpha, eta, delta_of_eta(eta, alpha), dim))
}

/// Frobenius norm, on the top-left `(N-4)` block, of
/// `dI/dt + (1/i)[I, H]` with the derivative a centered difference of step
/// `h`. `coeffs` are `(eta, delta)` at `t - h`, `t`, `t + h`.
pub fn liouville_residual_from(
    params: &OscillatorParams,
    axis: DriveAxis,
    t: f64,
    dim: usize,
    h: f64,
    coeffs: [(Complex64, f64); 3],
) -> f64 {
    let alpha = params.alpha;
    let [(em, dm), (e0, d0), (ep, dp)] = coeffs;
    // differencing the coefficients keeps the constant alpha n diagonal out
    // of the cancellation
    let d_inv = invariant_from_coeffs(0.0, (ep - em) / (2.0 * h), (dp - dm) / (2.0 * h), dim).0;
    let inv = invariant_from_coeffs(alpha, e0, d0, dim).0;
    let ham = hamiltonian_matrix(params, axis, t, dim).0;
    let comm = &inv * &ham - &ham * &inv;
    let resid = d_inv - comm * I;
    let k = dim.saturating_sub(4);
    resid.view((0, 0), (k, k)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Liouville-von Neumann residual of the solver's invariant. Needs `t > h`.
pub fn liouville_residual(solver: &EtaSolver, t: f64, dim: usize, h: f64) -> Result<f64> {
    if !(t > h) || !(h > 0.0) {
        return Err(Error::Grid(format!("need t > h > 0, got t = {t}, h = {h}")));
    }
    let alpha = solver.params().alpha;
    // one grid so that the three samples share their quadrature history
    let etas = solver.eta_on_grid(&[0.0, t - h, t, t + h])?;
    let c = |e: Complex64| (e, delta_of_eta(e, alpha));
    Ok(liouville_residual_from(
        solver.params(),
        solver.axis(),
        t,
        dim,
        h,
        [c(etas[1]), c(etas[2]), c(etas[3])],
    ))
}

/// Fock basis with the eigendecomposition of `a + a^dag` cached, which is
/// all that displacements need.
#[derive(Debug, Clone)]
pub struct FockSpace {
    dim: usize,
    x_values: DVector<f64>,
    x_vectors: DMatrix<f64>,
}

impl FockSpace {
    pub fn new(dim: usize) -> Self {
        let eig = SymmetricEigen::new(real_hamiltonian(0.0, 1.0, dim));
        FockSpace {
            dim,
            x_values: eig.eigenvalues,
            x_vectors: eig.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `exp(gamma a^dag - gamma^* a) |state>` on the truncated space.
    ///
    /// With `gamma = r e^{i theta}` and `W = diag(e^{i k (theta - pi/2)})`,
    /// the generator is `W (i r (a + a^dag)) W^dag`, so only the real
    /// eigenbasis of `a + a^dag` is needed.
    pub fn displace(&self, gamma: Complex64, state: &FockVector) -> Result<FockVector> {
        if state.dim() != self.dim {
            return Err(Error::Dimension(self.dim, state.dim()));
        }
        state.check_truncation()?;
        if gamma == Complex64::default() {
            return Ok(state.clone());
        }
        let r = gamma.norm();
        let phi = gamma.arg() - std::f64::consts::FRAC_PI_2;
        let w: Vec<Complex64> = (0..self.dim)
            .map(|k| Complex64::from_polar(1.0, k as f64 * phi))
            .collect();
        let mut v: Vec<Complex64> = state.amps.iter().zip(&w).map(|(a, w)| a * w.conj()).collect();
        v = real_transpose_apply(&self.x_vectors, &v);
        for (z, &lambda) in v.iter_mut().zip(self.x_values.iter()) {
            *z *= Complex64::from_polar(1.0, r * lambda);
        }
        v = real_apply(&self.x_vectors, &v);
        let out = FockVector::from_amplitudes(v.into_iter().zip(&w).map(|(a, w)| a * w).collect());
        out.check_truncation()?;
        Ok(out)
    }
}

fn real_apply(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let mut out = vec![Complex64::default(); n];
    for (j, &vj) in v.iter().enumerate() {
        for (o, &mij) in out.iter_mut().zip(m.column(j).iter()) {
            *o += vj * mij;
        }
    }
    out
}

fn real_transpose_apply(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..v.len())
        .map(|j| {
            m.column(j)
                .iter()
                .zip(v)
                .fold(Complex64::default(), |acc, (&x, &z)| acc + z * x)
        })
        .collect()
}

/// Builds a fresh [`FockSpace`]; reuse one for repeated displacements.
pub fn displacement_apply(gamma: Complex64, state: &FockVector) -> Result<FockVector> {
    FockSpace::new(state.dim()).displace(gamma, state)
}

/// `exp(-i phi(t)) D(-beta(t)) |n>`, the invariant-based exact solution.
pub fn analytic_state(solver: &EtaSolver, n: usize, t: f64, dim: usize) -> Result<FockVector> {
    analytic_state_in(&FockSpace::new(dim), solver, n, t)
}

pub fn analytic_state_in(space: &FockSpace, solver: &EtaSolver, n: usize, t: f64) -> Result<FockVector> {
    let beta = solver.beta_at(t)?;
    let phase = phases_at(solver, n as u32, t)?.total;
    displaced_number_state(space, n, beta, phase)
}

/// `exp(-i total_phase) D(-beta) |n>`; needs `4n <= N`.
pub fn displaced_number_state(
    space: &FockSpace,
    n: usize,
    beta: Complex64,
    total_phase: f64,
) -> Result<FockVector> {
    if 4 * n > space.dim() {
        return Err(Error::InvalidParams(format!(
            "n = {n} leaves no displacement headroom in N = {}",
            space.dim()
        )));
    }
    let displaced = space.displace(-beta, &FockVector::basis(n, space.dim())?)?;
    Ok(displaced.phase_shifted(-total_phase))
}

/// Direct solution of `i d psi/dt = H(t) psi` from t = 0 to `t1` with the
/// exponential midpoint rule: each step applies `exp(-i dt H(t_mid))`, the
/// exponential taken through a dense symmetric eigendecomposition.
/// `observe` sees the state after every step and at t = 0.
pub fn propagate_oracle_with<O>(
    params: &OscillatorParams,
    axis: DriveAxis,
    psi0: &FockVector,
    t1: f64,
    dt: f64,
    mut observe: O,
) -> Result<FockVector>
where
    O: FnMut(f64, &FockVector),
{
    let dim = psi0.dim();
    let omega = params.frequency(axis);
    let c0 = params.drive_amplitude(axis).abs();
    let scale = omega.max(params.drive_freq).max(c0 * (dim as f64).sqrt());
    if !(dt > 0.0) || dt * scale > ORACLE_STEP_LIMIT {
        return Err(Error::InvalidParams(format!(
            "oracle step {dt} too large: dt * {scale:.3} > {ORACLE_STEP_LIMIT}"
        )));
    }
    if t1 < 0.0 {
        return Err(Error::Grid(format!("negative end time {t1}")));
    }
    observe(0.0, psi0);
    if t1 == 0.0 {
        return Ok(psi0.clone());
    }
    let steps = ((t1 / dt).round() as usize).max(1);
    let h = t1 / steps as f64;
    let mut psi = psi0.amps.as_slice().to_vec();
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * h;
        let eig = SymmetricEigen::new(real_hamiltonian(omega, params.drive_value(axis, t_mid), dim));
        let mut v = real_transpose_apply(&eig.eigenvectors, &psi);
        for (z, &e) in v.iter_mut().zip(eig.eigenvalues.iter()) {
            *z *= Complex64::from_polar(1.0, -h * e);
        }
        psi = real_apply(&eig.eigenvectors, &v);
        let t = if k + 1 == steps { t1 } else { (k + 1) as f64 * h };
        observe(t, &FockVector::from_amplitudes(psi.clone()));
    }
    let out = FockVector::from_amplitudes(psi);
    out.check_truncation()?;
    Ok(out)
}

pub fn propagate_oracle(
    params: &OscillatorParams,
    axis: DriveAxis,
    psi0: &FockVector,
    t1: f64,
    dt: f64,
) -> Result<FockVector> {
    propagate_oracle_with(params, axis, psi0, t1, dt, |_, _| {})
}

/// `<psi| a |psi>`.
pub fn expect_a(state: &FockVector) -> Complex64 {
    let a = state.amplitudes();
    (1..a.len())
        .map(|n| a[n - 1].conj() * a[n] * (n as f64).sqrt())
        .sum()
}

/// `<x|y>`.
pub fn fidelity(x: &FockVector, y: &FockVector) -> Result<Complex64> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension(x.dim(), y.dim()));
    }
    Ok(x.amps.dotc(&y.amps))
}
