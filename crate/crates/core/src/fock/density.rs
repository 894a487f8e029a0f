use ndarray::Array2;

use super::hermite::hermite_functions;
use super::spectrum::SpectrumResult;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Index of the eigenvector with the largest overlap with `|n_x, n_y>`.
/// Ties go to the lowest index.
pub fn max_overlap_state<T: Real>(spectrum: &SpectrumResult<T>, reference: (usize, usize)) -> Result<usize> {
    let row = spectrum.basis.index(reference.0, reference.1).ok_or_else(|| {
        Error::Precondition(format!("reference {reference:?} outside basis with n_max {}", spectrum.basis.n_max()))
    })?;
    let overlaps = spectrum.eigenvectors.row(row);
    let mut best = 0;
    let mut best_val = T::neg_infinity();
    let mut tied = false;
    for (k, &v) in overlaps.iter().enumerate() {
        let a = v.abs();
        if a > best_val {
            best = k;
            best_val = a;
            tied = false;
        } else if a == best_val {
            tied = true;
        }
    }
    if tied {
        log::warn!("maximum overlap with {reference:?} is degenerate; using state {best}");
    }
    Ok(best)
}

/// `|phi(x, y)|^2` on the tensor grid `xs` x `ys` for the eigenstate that best
/// matches `reference`; element `[i, j]` is at `(xs[i], ys[j])`.
pub fn eigenstate_density<T: Real>(
    spectrum: &SpectrumResult<T>,
    reference: (usize, usize),
    xs: &[T],
    ys: &[T],
) -> Result<Array2<T>> {
    let k = max_overlap_state(spectrum, reference)?;
    let n = spectrum.basis.dim();
    let hx = hermite_functions(spectrum.basis.n_max(), xs);
    let hy = hermite_functions(spectrum.basis.n_max(), ys);
    let coeffs = spectrum.eigenvectors.column(k).to_owned().into_shape_with_order((n, n)).expect("basis-sized column");
    // phi = hx^T c hy
    let phi = hx.t().dot(&coeffs).dot(&hy);
    Ok(phi.mapv(|v| v * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operators::{build_hamiltonian, FockBasis};
    use crate::fock::spectrum::diagonalize;
    use crate::model::Coupling;

    fn axis() -> Vec<f64> {
        (0..41).map(|i| -4.0 + 0.2 * i as f64).collect()
    }

    #[test]
    fn free_ground_state_is_gaussian() {
        let h = build_hamiltonian(&FockBasis::new(6), Coupling::<f64>::free(), 40).unwrap();
        let spec = diagonalize(&h).unwrap();
        let xs = axis();
        let rho = eigenstate_density(&spec, (0, 0), &xs, &xs).unwrap();
        let peak = rho[[20, 20]];
        assert!((peak - 1.0 / std::f64::consts::PI).abs() < 1e-12);
        for i in 0..41 {
            for j in 0..41 {
                let expect = (-(xs[i] * xs[i] + xs[j] * xs[j])).exp() / std::f64::consts::PI;
                assert!((rho[[i, j]] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_excited_has_nodal_line() {
        let h = build_hamiltonian(&FockBasis::new(6), Coupling::<f64>::free(), 40).unwrap();
        let spec = diagonalize(&h).unwrap();
        let xs = axis();
        let rho = eigenstate_density(&spec, (1, 0), &xs, &xs).unwrap();
        for j in 0..41 {
            assert!(rho[[20, j]] < 1e-20);
        }
        assert!(rho[[25, 20]] > 0.1);
    }

    #[test]
    fn interacting_states_stay_central() {
        let h = build_hamiltonian(&FockBasis::new(10), Coupling::new(1.0 / 3.0).unwrap(), 64).unwrap();
        let spec = diagonalize(&h).unwrap();
        let xs = axis();
        for r in [(0, 0), (1, 0), (0, 1)] {
            let rho = eigenstate_density(&spec, r, &xs, &xs).unwrap();
            let (mut bi, mut bj) = (0, 0);
            for ((i, j), &v) in rho.indexed_iter() {
                if v > rho[[bi, bj]] {
                    (bi, bj) = (i, j);
                }
            }
            assert!(xs[bi].hypot(xs[bj]) < 2.0, "{r:?} peaks at ({}, {})", xs[bi], xs[bj]);
        }
    }

    #[test]
    fn reference_outside_basis_errors() {
        let h = build_hamiltonian(&FockBasis::new(2), Coupling::<f64>::free(), 24).unwrap();
        let spec = diagonalize(&h).unwrap();
        assert!(max_overlap_state(&spec, (3, 0)).is_err());
    }
}
