//! Wavepacket propagation on a uniform Dirichlet grid.

mod cayley;
mod checkpoint;
mod moments;
mod monitor;
mod propagator;
mod stencil;

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{ensure, Result};
use crate::scalar::Real;

pub use cayley::BandedCayley;
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use moments::{measure_moments, MomentProbe, MomentRecord, BOUNDARY_RING};
pub use monitor::{
    evolve_monitored, lambda_scan, linear_fit_slope, run_monitored, BoundMonitor, EvolutionConfig, MonitorConfig,
    MonitoredRun, ScanEntry, Violation,
};
pub use propagator::{cn_step, Propagator};
pub use stencil::StencilOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// The wavefunction vanishes outside the grid.
    #[default]
    Dirichlet,
}

/// `[-L, L]^2` sampled at `N` points per axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    half_extent: T,
    points_per_axis: usize,
    boundary: Boundary,
}

impl<T: Real> GridSpec<T> {
    pub const MIN_POINTS: usize = 16;

    pub fn new(half_extent: T, points_per_axis: usize) -> Result<Self> {
        ensure(points_per_axis >= Self::MIN_POINTS, || {
            format!("need at least {} points per axis, got {points_per_axis}", Self::MIN_POINTS)
        })?;
        ensure(half_extent.is_finite() && half_extent > T::zero(), || {
            format!("half extent must be positive and finite, got {half_extent}")
        })?;
        Ok(Self { half_extent, points_per_axis, boundary: Boundary::Dirichlet })
    }

    pub fn half_extent(&self) -> T {
        self.half_extent
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_extent / T::from_count(self.points_per_axis - 1)
    }

    pub fn cell_area(&self) -> T {
        self.spacing() * self.spacing()
    }

    pub fn coordinate(&self, i: usize) -> T {
        -self.half_extent + T::from_count(i) * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<T> {
        (0..self.points_per_axis).map(|i| self.coordinate(i)).collect()
    }

    /// Grid whose spacing is `factor` times this one, keeping the same
    /// number of intervals rounded to the nearest integer.
    pub fn refined(&self, factor: T) -> Result<Self> {
        let intervals = T::from_count(self.points_per_axis - 1) / factor;
        let n = intervals.round().to_usize().unwrap_or(0) + 1;
        let l = self.spacing() * factor * T::from_count(n - 1) / T::lit(2.0);
        Self::new(l, n)
    }
}

/// How the Gaussian `width` parameter enters the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthConvention {
    /// `psi ~ exp(-r^2 / (2 sigma^2))`: per-axis position variance `sigma^2 / 2`.
    #[default]
    Amplitude,
    /// `psi ~ exp(-r^2 / (4 sigma^2))`: `|psi|^2` has per-axis variance `sigma^2`.
    Density,
}

impl WidthConvention {
    /// Per-axis variance of `|psi|^2` for width `sigma`.
    pub fn variance<T: Real>(self, sigma: T) -> T {
        match self {
            WidthConvention::Amplitude => sigma * sigma / T::lit(2.0),
            WidthConvention::Density => sigma * sigma,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WidthConvention::Amplitude => "amplitude",
            WidthConvention::Density => "density",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction<T> {
    pub grid: GridSpec<T>,
    /// `amplitudes[[i, j]]` sits at `(x_i, y_j)`.
    pub amplitudes: Array2<Complex<T>>,
    pub time: T,
}

impl<T: Real> Wavefunction<T> {
    pub fn new(grid: GridSpec<T>, amplitudes: Array2<Complex<T>>, time: T) -> Result<Self> {
        let n = grid.points_per_axis();
        ensure(amplitudes.dim() == (n, n), || format!("amplitudes {:?} do not match {n}x{n} grid", amplitudes.dim()))?;
        Ok(Self { grid, amplitudes, time })
    }

    /// Discrete `sum |psi|^2 da`.
    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>() * self.grid.cell_area()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        ensure(n > T::zero() && n.is_finite(), || format!("cannot normalize a state with norm {n}"))?;
        let s = T::one() / n.sqrt();
        self.amplitudes.mapv_inplace(|z| z * s);
        Ok(())
    }

    /// Largest per-amplitude difference `max |psi - phi|`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Normalized real Gaussian at rest.
pub fn init_gaussian<T: Real>(
    grid: &GridSpec<T>,
    center: (T, T),
    width: T,
    convention: WidthConvention,
) -> Result<Wavefunction<T>> {
    let l = grid.half_extent();
    ensure(center.0.abs() < l && center.1.abs() < l, || {
        format!("center ({}, {}) outside [-{l}, {l}]^2", center.0, center.1)
    })?;
    ensure(width > T::lit(2.0) * grid.spacing(), || {
        format!("width {width} not resolved by spacing {}", grid.spacing())
    })?;
    let denom = T::lit(4.0) * convention.variance(width);
    let xs = grid.coordinates();
    let n = grid.points_per_axis();
    let amplitudes = Array2::from_shape_fn((n, n), |(i, j)| {
        let dx = xs[i] - center.0;
        let dy = xs[j] - center.1;
        Complex::new((-(dx * dx + dy * dy) / denom).exp(), T::zero())
    });
    let mut psi = Wavefunction::new(*grid, amplitudes, T::zero())?;
    psi.normalize()?;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_coordinates() {
        let g = GridSpec::<f64>::new(10.0, 128).unwrap();
        assert!((g.spacing() - 20.0 / 127.0).abs() < 1e-15);
        assert_eq!(g.coordinate(0), -10.0);
        assert!((g.coordinate(127) - 10.0).abs() < 1e-12);
        assert!(GridSpec::<f64>::new(10.0, 15).is_err());
        assert!(GridSpec::<f64>::new(-1.0, 32).is_err());
    }

    #[test]
    fn refined_grid_keeps_three_quarter_spacing() {
        let g = GridSpec::<f64>::new(10.0, 128).unwrap();
        let r = g.refined(0.75).unwrap();
        assert_eq!(r.points_per_axis(), 170);
        assert!((r.spacing() - 0.75 * g.spacing()).abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments_follow_convention() {
        let g = GridSpec::<f64>::new(10.0, 256).unwrap();
        let psi = init_gaussian(&g, (0.0, 0.0), 1.0, WidthConvention::Amplitude).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        let xs = g.coordinates();
        let da = g.cell_area();
        let x2: f64 = psi.amplitudes.indexed_iter().map(|((i, _), z)| z.norm_sqr() * xs[i] * xs[i]).sum::<f64>() * da;
        assert!((x2 - 0.5).abs() < 1e-4);

        let psi = init_gaussian(&g, (1.0, 0.5), 0.7, WidthConvention::Density).unwrap();
        let r2: f64 = psi
            .amplitudes
            .indexed_iter()
            .map(|((i, j), z)| z.norm_sqr() * (xs[i] * xs[i] + xs[j] * xs[j]))
            .sum::<f64>()
            * da;
        assert!((r2 - (1.25 + 2.0 * 0.49)).abs() < 1e-3);
    }

    #[test]
    fn gaussian_preconditions() {
        let g = GridSpec::<f64>::new(10.0, 64).unwrap();
        assert!(init_gaussian(&g, (11.0, 0.0), 1.0, WidthConvention::Amplitude).is_err());
        assert!(init_gaussian(&g, (0.0, 0.0), 0.5, WidthConvention::Amplitude).is_err());
    }
}
