use std::collections::BTreeMap;

use ndarray::Array2;

use super::eigen::symmetric_eigen;
use super::operators::{FockBasis, FockOperator};
use crate::error::{ensure, Result};
use crate::scalar::Real;

/// Eigenvalues further than this from the nearest integer are flagged
/// instead of being assigned to a multiplet silently.
pub const MULTIPLET_CAPTURE: f64 = 0.25;

/// Full eigendecomposition of a Fock-space operator, grouped into multiplets
/// labelled by the nearest integer.
#[derive(Debug, Clone)]
pub struct SpectrumResult<T> {
    pub basis: FockBasis,
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: Array2<T>,
    pub multiplet_labels: Vec<i64>,
    /// Sorted consecutive differences inside each multiplet, keyed by label.
    pub intra_splittings: BTreeMap<i64, Vec<T>>,
    /// Indices of eigenvalues outside the capture window of every integer.
    pub unresolved: Vec<usize>,
}

impl<T: Real> SpectrumResult<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Number of states carrying each label.
    pub fn multiplicities(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for &l in &self.multiplet_labels {
            *out.entry(l).or_default() += 1;
        }
        out
    }

    /// Eigenvalues belonging to one multiplet, ascending.
    pub fn multiplet(&self, label: i64) -> Vec<T> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplet_labels)
            .filter(|(_, &l)| l == label)
            .map(|(&e, _)| e)
            .collect()
    }

    /// Largest distance of any eigenvalue from its label.
    pub fn max_label_offset(&self) -> T {
        self.eigenvalues
            .iter()
            .zip(&self.multiplet_labels)
            .map(|(&e, &l)| (e - T::lit(l as f64)).abs())
            .fold(T::zero(), T::max)
    }

    /// Element-wise difference of two sorted spectra of equal size.
    pub fn sorted_shifts(&self, reference: &SpectrumResult<T>) -> Result<Vec<T>> {
        ensure(self.len() == reference.len(), || {
            format!("spectra differ in size: {} vs {}", self.len(), reference.len())
        })?;
        Ok(self.eigenvalues.iter().zip(&reference.eigenvalues).map(|(&a, &b)| a - b).collect())
    }

    /// `<phi_k| op |phi_k>` for eigenvector `k`.
    pub fn expectation(&self, k: usize, op: &FockOperator<T>) -> T {
        let v = self.eigenvectors.column(k);
        v.dot(&op.entries().dot(&v))
    }
}

/// Diagonalizes a symmetric Fock operator and labels multiplets.
pub fn diagonalize<T: Real>(op: &FockOperator<T>) -> Result<SpectrumResult<T>> {
    let scale = op.entries().iter().fold(T::one(), |m, v| m.max(v.abs()));
    let defect = op.symmetry_defect();
    ensure(defect <= T::lit(1e-12) * scale, || format!("operator is not symmetric: defect {defect:e}"))?;

    let eig = symmetric_eigen(op.entries())?;
    let capture = T::lit(MULTIPLET_CAPTURE);
    let mut labels = Vec::with_capacity(eig.eigenvalues.len());
    let mut unresolved = Vec::new();
    for (k, &e) in eig.eigenvalues.iter().enumerate() {
        let nearest = e.round();
        if (e - nearest).abs() > capture {
            unresolved.push(k);
            log::warn!("eigenvalue {e} sits {} from the nearest integer", (e - nearest).abs());
        }
        labels.push(nearest.to_i64().expect("eigenvalue in i64 range"));
    }

    let mut intra_splittings: BTreeMap<i64, Vec<T>> = BTreeMap::new();
    let mut members: BTreeMap<i64, Vec<T>> = BTreeMap::new();
    for (&e, &l) in eig.eigenvalues.iter().zip(&labels) {
        members.entry(l).or_default().push(e);
    }
    for (label, levels) in members {
        // eigenvalues are already ascending
        let gaps: Vec<T> = levels.windows(2).map(|w| w[1] - w[0]).collect();
        intra_splittings.insert(label, gaps);
    }

    Ok(SpectrumResult {
        basis: *op.basis(),
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
        multiplet_labels: labels,
        intra_splittings,
        unresolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operators::build_hamiltonian;
    use crate::model::Coupling;

    #[test]
    fn free_spectrum_is_integer_ladder() {
        let basis = FockBasis::new(21);
        let h = build_hamiltonian(&basis, Coupling::<f64>::free(), 62).unwrap();
        let spec = diagonalize(&h).unwrap();
        assert_eq!(spec.len(), 484);
        for (&e, &l) in spec.eigenvalues.iter().zip(&spec.multiplet_labels) {
            assert_eq!(e, l as f64);
        }
        for (k, count) in spec.multiplicities() {
            assert_eq!(count as i64, 22 - k.abs());
        }
        assert_eq!(spec.multiplicities().len(), 43);
        assert!(spec.unresolved.is_empty());
    }

    #[test]
    fn interacting_spectrum_keeps_multiplets() {
        let basis = FockBasis::new(21);
        let h = build_hamiltonian(&basis, Coupling::new(1.0 / 3.0).unwrap(), 96).unwrap();
        let spec = diagonalize(&h).unwrap();
        assert_eq!(spec.len(), 484);
        assert!(spec.max_label_offset() < 0.25);
        assert!(spec.unresolved.is_empty());
        for (k, count) in spec.multiplicities() {
            assert_eq!(count as i64, 22 - k.abs(), "multiplet {k}");
        }
        let nonzero = spec.intra_splittings.values().flatten().filter(|g| **g > 1e-9).count();
        assert!(nonzero > 300);
    }

    #[test]
    fn rejects_asymmetric_operator() {
        let basis = FockBasis::new(1);
        let mut m = Array2::<f64>::zeros((4, 4));
        m[[0, 1]] = 1.0;
        let op = FockOperator::new(basis, m).unwrap();
        assert!(diagonalize(&op).is_err());
    }
}
