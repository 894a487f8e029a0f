use ndarray::parallel::prelude::*;
use ndarray::{Array2, Axis};
use num_complex::Complex;

use super::cayley::BandedCayley;
use super::stencil::StencilOrder;
use super::{GridSpec, Wavefunction};
use crate::error::{ensure, Result};
use crate::model::{potential, Coupling};
use crate::scalar::Real;

/// Strang-split Cayley propagator for one `(grid, dt, coupling)` triple.
///
/// One step is `P(dt/2) X(dt/2) Y(dt) X(dt/2) P(dt/2)` where `P` is the
/// potential phase and `X`, `Y` are Cayley maps of the normal and ghost
/// oscillators. Every factor is exactly unitary for the discrete operators.
#[derive(Debug, Clone)]
pub struct Propagator<T> {
    grid: GridSpec<T>,
    dt: T,
    order: StencilOrder,
    half_phase: Array2<Complex<T>>,
    normal_half: BandedCayley<T>,
    ghost_full: BandedCayley<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: GridSpec<T>, dt: T, coupling: Coupling<T>, order: StencilOrder) -> Result<Self> {
        ensure(dt != T::zero() && dt.is_finite(), || format!("time step must be finite and nonzero, got {dt}"))?;
        let xs = grid.coordinates();
        let h2 = grid.spacing() * grid.spacing();
        let half = T::lit(0.5);
        let c = order.second_derivative::<T>();
        // -1/2 d^2/dx^2 + x^2/2
        let diag: Vec<T> = xs.iter().map(|&x| -half * c[0] / h2 + half * x * x).collect();
        let off: Vec<T> = c[1..].iter().map(|&ck| -half * ck / h2).collect();
        let normal_half = BandedCayley::new(&diag, &off, dt * half)?;
        let neg_diag: Vec<T> = diag.iter().map(|&d| -d).collect();
        let neg_off: Vec<T> = off.iter().map(|&o| -o).collect();
        let ghost_full = BandedCayley::new(&neg_diag, &neg_off, dt)?;

        let n = grid.points_per_axis();
        let half_phase = Array2::from_shape_fn((n, n), |(i, j)| {
            let v = potential(xs[i], xs[j], coupling);
            Complex::from_polar(T::one(), -half * dt * v)
        });
        Ok(Self { grid, dt, order, half_phase, normal_half, ghost_full })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn order(&self) -> StencilOrder {
        self.order
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn step(&self, psi: &mut Wavefunction<T>) {
        debug_assert_eq!(psi.grid, self.grid);
        let amp = &mut psi.amplitudes;
        amp.zip_mut_with(&self.half_phase, |z, p| *z *= *p);
        apply_along_x(amp, &self.normal_half);
        apply_along_y(amp, &self.ghost_full);
        apply_along_x(amp, &self.normal_half);
        amp.zip_mut_with(&self.half_phase, |z, p| *z *= *p);
        psi.time += self.dt;
    }

    pub fn advance(&self, psi: &mut Wavefunction<T>, steps: usize) {
        for _ in 0..steps {
            self.step(psi);
        }
    }
}

/// Lines of constant `y`: stride through the first index.
fn apply_along_x<T: Real>(amp: &mut Array2<Complex<T>>, map: &BandedCayley<T>) {
    let n = map.len();
    amp.axis_iter_mut(Axis(1)).into_par_iter().for_each_init(
        || (vec![Complex::new(T::zero(), T::zero()); n], vec![Complex::new(T::zero(), T::zero()); n]),
        |(line, scratch), mut col| {
            for (dst, src) in line.iter_mut().zip(col.iter()) {
                *dst = *src;
            }
            map.apply(line, scratch);
            for (dst, src) in col.iter_mut().zip(line.iter()) {
                *dst = *src;
            }
        },
    );
}

/// Lines of constant `x`: contiguous rows.
fn apply_along_y<T: Real>(amp: &mut Array2<Complex<T>>, map: &BandedCayley<T>) {
    let n = map.len();
    amp.axis_iter_mut(Axis(0)).into_par_iter().for_each_init(
        || vec![Complex::new(T::zero(), T::zero()); n],
        |scratch, mut row| match row.as_slice_mut() {
            Some(line) => map.apply(line, scratch),
            None => {
                let mut line: Vec<_> = row.iter().copied().collect();
                map.apply(&mut line, scratch);
                row.iter_mut().zip(line).for_each(|(d, s)| *d = s);
            }
        },
    );
}

/// One step with the default stencil. Building a [`Propagator`] once is much
/// cheaper for repeated steps.
pub fn cn_step<T: Real>(psi: &Wavefunction<T>, dt: T, coupling: Coupling<T>) -> Result<Wavefunction<T>> {
    let prop = Propagator::new(psi.grid, dt, coupling, StencilOrder::default())?;
    let mut out = psi.clone();
    prop.step(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{init_gaussian, measure_moments, WidthConvention};

    fn third() -> Coupling<f64> {
        Coupling::new(1.0 / 3.0).unwrap()
    }

    fn packet(n: usize) -> Wavefunction<f64> {
        let g = GridSpec::<f64>::new(10.0, n).unwrap();
        init_gaussian(&g, (1.0, 0.5), 0.7, WidthConvention::Density).unwrap()
    }

    #[test]
    fn single_step_preserves_norm() {
        let psi = packet(64);
        let next = cn_step(&psi, 5e-3, third()).unwrap();
        assert!((next.norm_sqr() - psi.norm_sqr()).abs() < 1e-13);
        assert!((next.time - 5e-3).abs() < 1e-18);
    }

    #[test]
    fn forward_then_backward_recovers_state() {
        let mut psi = packet(64);
        let start = psi.clone();
        for order in [StencilOrder::Second, StencilOrder::Sixth] {
            let fwd = Propagator::new(psi.grid, 5e-3, third(), order).unwrap();
            let bwd = Propagator::new(psi.grid, -5e-3, third(), order).unwrap();
            fwd.advance(&mut psi, 50);
            bwd.advance(&mut psi, 50);
            assert!(psi.max_abs_diff(&start) < 1e-10);
        }
    }

    #[test]
    fn free_ground_width_is_stationary_in_x() {
        // Amplitude convention with sigma = 1 is the x-sector ground state.
        let g = GridSpec::<f64>::new(8.0, 128).unwrap();
        let mut psi = init_gaussian(&g, (0.0, 0.0), 1.0, WidthConvention::Amplitude).unwrap();
        let free = Coupling::<f64>::free();
        let m0 = measure_moments(&psi, free, StencilOrder::Sixth);
        let prop = Propagator::new(g, 1e-2, free, StencilOrder::Sixth).unwrap();
        for _ in 0..10 {
            prop.advance(&mut psi, 100);
            let m = measure_moments(&psi, free, StencilOrder::Sixth);
            assert!((m.x2 - m0.x2).abs() < 1e-6);
            assert!((m.px2 - m0.px2).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_zero_step() {
        let psi = packet(64);
        assert!(cn_step(&psi, 0.0, third()).is_err());
    }
}
