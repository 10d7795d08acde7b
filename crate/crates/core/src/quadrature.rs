//! Composite Simpson quadrature, accumulated along a grid.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Integrand: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {}

impl Integrand for f64 {}
impl Integrand for Complex64 {}

/// Grid must start at `start`, be finite, and strictly increase.
pub fn check_grid(grid: &[f64], start: f64) -> Result<()> {
    match grid.first() {
        None => return Err(Error::Grid("empty grid".into())),
        Some(&t0) if t0 != start => {
            return Err(Error::Grid(format!("grid starts at {t0}, expected {start}")))
        }
        _ => {}
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::Grid(format!(
            "grid not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Grid must also have (relatively) equal spacing.
pub fn check_uniform_grid(grid: &[f64]) -> Result<()> {
    check_grid(grid, 0.0)?;
    if grid.len() > 2 {
        let h = grid[1] - grid[0];
        let span = grid[grid.len() - 1];
        for (k, &t) in grid.iter().enumerate() {
            if (t - k as f64 * h).abs() > 1e-9 * span.max(1.0) {
                return Err(Error::Grid(format!("grid not uniform at index {k}")));
            }
        }
    }
    Ok(())
}

/// Number of Simpson panels (even, at least 2) for an interval.
pub fn panels(width: f64, h_max: f64) -> usize {
    let m = (width / h_max).ceil().max(2.0) as usize;
    m + m % 2
}

/// A grid with every interval split into an even number of Simpson panels.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    /// Fine points, including every original grid point.
    pub points: Vec<f64>,
    /// Panel count of each original interval.
    pub panels: Vec<usize>,
}

impl Refinement {
    pub fn new(grid: &[f64], h_max: f64) -> Self {
        let mut points = Vec::new();
        let mut counts = Vec::with_capacity(grid.len().saturating_sub(1));
        if let Some(&t0) = grid.first() {
            points.push(t0);
        }
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let m = panels(b - a, h_max);
            let h = (b - a) / m as f64;
            points.extend((1..m).map(|j| a + j as f64 * h));
            points.push(b);
            counts.push(m);
        }
        Refinement {
            points,
            panels: counts,
        }
    }

    /// Running Simpson integral at each original grid point, from samples
    /// taken at `self.points`.
    pub fn cumulative<T: Integrand>(&self, samples: &[T]) -> Vec<T> {
        assert_eq!(samples.len(), self.points.len());
        let mut out = Vec::with_capacity(self.panels.len() + 1);
        if samples.is_empty() {
            return out;
        }
        let mut acc = T::default();
        out.push(acc);
        let mut start = 0;
        for &m in &self.panels {
            let end = start + m;
            let h = (self.points[end] - self.points[start]) / m as f64;
            let mut odd = T::default();
            let mut even = T::default();
            for j in 1..m {
                if j % 2 == 1 {
                    odd = odd + samples[start + j];
                } else {
                    even = even + samples[start + j];
                }
            }
            acc = acc + (samples[start] + odd * 4.0 + even * 2.0 + samples[end]) * (h / 3.0);
            out.push(acc);
            start = end;
        }
        out
    }
}

/// Running integral of `f` from `grid[0]` to every grid point. Each grid
/// interval is split into an even number of panels no wider than `h_max`,
/// so `f` is sampled on a refinement of the grid and the result at every
/// grid point is a plain composite Simpson sum.
pub fn cumulative_simpson<T, F>(grid: &[f64], h_max: f64, f: F) -> Vec<T>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    let fine = Refinement::new(grid, h_max);
    let samples: Vec<T> = fine.points.iter().copied().map(f).collect();
    fine.cumulative(&samples)
}

/// Uniform grid `0, dt, 2dt, ..., t_max` with the last point pinned to
/// `t_max`. The point count is `round(t_max / dt) + 1`.
pub fn uniform_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round().max(1.0) as usize;
    let h = t_max / n as f64;
    (0..=n)
        .map(|k| if k == n { t_max } else { k as f64 * h })
        .collect()
}
