use ndarray::Array2;
use num_complex::Complex;

use super::stencil::StencilOrder;
use super::{GridSpec, Wavefunction};
use crate::model::{potential, Coupling};
use crate::scalar::Real;

/// Width in cells of the frame whose probability is reported as
/// `boundary_prob`.
pub const BOUNDARY_RING: usize = 4;

/// Expectation values at one instant. Momentum moments use the same finite
/// differences as the propagator, so `<E>` is conserved up to splitting error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRecord<T> {
    pub time: T,
    pub x2: T,
    pub y2: T,
    pub px2: T,
    pub py2: T,
    pub k2: T,
    pub h_mean: T,
    pub e_mean: T,
    pub norm: T,
    /// `<K^2> + (<p_x^2> + <x^2>)/2 + (<p_y^2> + <y^2>)/2`
    pub sigma: T,
    pub boundary_prob: T,
}

impl<T: Real> MomentRecord<T> {
    pub fn r2(&self) -> T {
        self.x2 + self.y2
    }

    /// `<x^2 + y^2 + p_x^2 + p_y^2>`
    pub fn moment_sum(&self) -> T {
        self.x2 + self.y2 + self.px2 + self.py2
    }

    pub fn to_f64(&self) -> MomentRecord<f64> {
        MomentRecord {
            time: self.time.as_f64(),
            x2: self.x2.as_f64(),
            y2: self.y2.as_f64(),
            px2: self.px2.as_f64(),
            py2: self.py2.as_f64(),
            k2: self.k2.as_f64(),
            h_mean: self.h_mean.as_f64(),
            e_mean: self.e_mean.as_f64(),
            norm: self.norm.as_f64(),
            sigma: self.sigma.as_f64(),
            boundary_prob: self.boundary_prob.as_f64(),
        }
    }
}

/// Cached coordinate-dependent tables for repeated measurements on one grid.
#[derive(Debug, Clone)]
pub struct MomentProbe<T> {
    grid: GridSpec<T>,
    order: StencilOrder,
    xs: Vec<T>,
    potential: Array2<T>,
    /// `(y^2 - x^2) V`
    shaped: Array2<T>,
}

impl<T: Real> MomentProbe<T> {
    pub fn new(grid: GridSpec<T>, coupling: Coupling<T>, order: StencilOrder) -> Self {
        let xs = grid.coordinates();
        let n = xs.len();
        let potential = Array2::from_shape_fn((n, n), |(i, j)| potential(xs[i], xs[j], coupling));
        let shaped = Array2::from_shape_fn((n, n), |(i, j)| (xs[j] * xs[j] - xs[i] * xs[i]) * potential[[i, j]]);
        Self { grid, order, xs, potential, shaped }
    }

    pub fn measure(&self, psi: &Wavefunction<T>) -> MomentRecord<T> {
        let amp = &psi.amplitudes;
        let n = self.xs.len();
        let h = self.grid.spacing();
        let da = self.grid.cell_area();
        let lap = self.order.second_derivative::<T>();
        let d1 = self.order.first_derivative::<T>();
        let at = |i: isize, j: isize| -> Complex<T> {
            if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                Complex::new(T::zero(), T::zero())
            } else {
                amp[[i as usize, j as usize]]
            }
        };

        let zero = T::zero();
        let (mut norm, mut x2, mut y2, mut px2, mut py2, mut k2) = (zero, zero, zero, zero, zero, zero);
        let (mut v_mean, mut shaped_mean, mut boundary) = (zero, zero, zero);
        for i in 0..n {
            let x = self.xs[i];
            for j in 0..n {
                let y = self.xs[j];
                let psi_ij = amp[[i, j]];
                let rho = psi_ij.norm_sqr();
                norm += rho;
                x2 += rho * x * x;
                y2 += rho * y * y;
                v_mean += rho * self.potential[[i, j]];
                shaped_mean += rho * self.shaped[[i, j]];
                if i < BOUNDARY_RING || j < BOUNDARY_RING || i + BOUNDARY_RING >= n || j + BOUNDARY_RING >= n {
                    boundary += rho;
                }

                let (ii, jj) = (i as isize, j as isize);
                let mut lxx = psi_ij * lap[0];
                let mut lyy = psi_ij * lap[0];
                for (k, &c) in lap.iter().enumerate().skip(1) {
                    let k = k as isize;
                    lxx += (at(ii + k, jj) + at(ii - k, jj)) * c;
                    lyy += (at(ii, jj + k) + at(ii, jj - k)) * c;
                }
                // <p^2> = -<psi, D2 psi>
                px2 -= (psi_ij.conj() * lxx).re;
                py2 -= (psi_ij.conj() * lyy).re;

                let mut dx = Complex::new(zero, zero);
                let mut dy = Complex::new(zero, zero);
                for (k, &c) in d1.iter().enumerate() {
                    let k = k as isize + 1;
                    dx += (at(ii + k, jj) - at(ii - k, jj)) * c;
                    dy += (at(ii, jj + k) - at(ii, jj - k)) * c;
                }
                // K psi = -i (x d_y + y d_x) psi
                k2 += (dy * x + dx * y).norm_sqr();
            }
        }
        let half = T::lit(0.5);
        let (norm, x2, y2) = (norm * da, x2 * da, y2 * da);
        let (px2, py2) = (px2 * da / (h * h), py2 * da / (h * h));
        let k2 = k2 * da / (h * h);
        let (v_mean, shaped_mean) = (v_mean * da, shaped_mean * da);
        let sigma = k2 + half * (px2 + x2) + half * (py2 + y2);
        MomentRecord {
            time: psi.time,
            x2,
            y2,
            px2,
            py2,
            k2,
            h_mean: half * (px2 + x2) - half * (py2 + y2) + v_mean,
            e_mean: sigma + shaped_mean,
            norm,
            sigma,
            boundary_prob: boundary * da,
        }
    }
}

pub fn measure_moments<T: Real>(psi: &Wavefunction<T>, coupling: Coupling<T>, order: StencilOrder) -> MomentRecord<T> {
    MomentProbe::new(psi.grid, coupling, order).measure(psi)
}
