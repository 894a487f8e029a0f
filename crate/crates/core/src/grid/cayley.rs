use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pre-factorized Cayley map `(1 + i tau A / 2)^{-1} (1 - i tau A / 2)` for a
/// real symmetric banded `A` whose off-diagonals are constant along each band.
///
/// `1 + i tau A / 2` has Hermitian part equal to the identity, so Gaussian
/// elimination needs no pivoting.
#[derive(Debug, Clone)]
pub struct BandedCayley<T> {
    n: usize,
    band: usize,
    /// `-i tau / 2 * a_ii`, reused for the explicit half.
    explicit_diag: Vec<Complex<T>>,
    explicit_off: Vec<Complex<T>>,
    /// LU factors in band storage: row `i`, slot `j - i + band`.
    lu: Vec<Complex<T>>,
    inv_pivot: Vec<Complex<T>>,
}

impl<T: Real> BandedCayley<T> {
    pub fn new(diag: &[T], off: &[T], tau: T) -> Result<Self> {
        let n = diag.len();
        let band = off.len();
        let width = 2 * band + 1;
        let half = Complex::new(T::zero(), tau / T::lit(2.0));
        let mut lu = vec![Complex::new(T::zero(), T::zero()); n * width];
        for i in 0..n {
            lu[i * width + band] = Complex::new(T::one(), T::zero()) + half * diag[i];
            for (k, &o) in off.iter().enumerate() {
                let d = k + 1;
                if i + d < n {
                    lu[i * width + band + d] = half * o;
                }
                if i >= d {
                    lu[i * width + band - d] = half * o;
                }
            }
        }

        let mut inv_pivot = Vec::with_capacity(n);
        for k in 0..n {
            let pivot = lu[k * width + band];
            if !(pivot.norm() > T::zero()) || !pivot.re.is_finite() || !pivot.im.is_finite() {
                return Err(Error::Solver(format!("pivot {k} of {n} is {pivot}")));
            }
            let inv = Complex::new(T::one(), T::zero()) / pivot;
            inv_pivot.push(inv);
            for i in (k + 1)..(k + band + 1).min(n) {
                let l = lu[i * width + k + band - i] * inv;
                lu[i * width + k + band - i] = l;
                for j in (k + 1)..(k + band + 1).min(n) {
                    let u = lu[k * width + j + band - k];
                    lu[i * width + j + band - i] -= l * u;
                }
            }
        }

        let explicit_diag = diag.iter().map(|&a| Complex::new(T::one(), T::zero()) - half * a).collect();
        let explicit_off = off.iter().map(|&o| -half * o).collect();
        Ok(Self { n, band, explicit_diag, explicit_off, lu, inv_pivot })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Applies the map to `line` in place. `scratch` must hold `len()` values.
    pub fn apply(&self, line: &mut [Complex<T>], scratch: &mut [Complex<T>]) {
        let (n, b) = (self.n, self.band);
        debug_assert_eq!(line.len(), n);
        let width = 2 * b + 1;

        for i in 0..n {
            let mut acc = self.explicit_diag[i] * line[i];
            for (k, &o) in self.explicit_off.iter().enumerate() {
                let d = k + 1;
                let mut s = Complex::new(T::zero(), T::zero());
                if i + d < n {
                    s += line[i + d];
                }
                if i >= d {
                    s += line[i - d];
                }
                acc += o * s;
            }
            scratch[i] = acc;
        }

        // forward: unit lower triangle
        for i in 0..n {
            let mut acc = scratch[i];
            for k in i.saturating_sub(b)..i {
                acc -= self.lu[i * width + k + b - i] * scratch[k];
            }
            scratch[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = scratch[i];
            for j in (i + 1)..(i + b + 1).min(n) {
                acc -= self.lu[i * width + j + b - i] * line[j];
            }
            line[i] = acc * self.inv_pivot[i];
        }
    }
}
