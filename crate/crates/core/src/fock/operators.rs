use ndarray::{Array2, Axis};

use super::hermite::{hermite_functions, GaussHermiteRule};
use crate::error::{ensure, Result};
use crate::model::{delta_expanded, Coupling};
use crate::scalar::Real;

/// Truncated product basis `|n_x> (x) |n_y>` with `n_x, n_y <= n_max`,
/// indexed row-major in `n_x`: `k = n_x (n_max + 1) + n_y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// States per sector.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn size(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn index(&self, nx: usize, ny: usize) -> Option<usize> {
        (nx <= self.n_max && ny <= self.n_max).then(|| nx * self.dim() + ny)
    }

    pub fn quantum_numbers(&self, k: usize) -> (usize, usize) {
        (k / self.dim(), k % self.dim())
    }
}

/// Real symmetric matrix of an operator in a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<T> {
    basis: FockBasis,
    entries: Array2<T>,
}

impl<T: Real> FockOperator<T> {
    pub fn new(basis: FockBasis, entries: Array2<T>) -> Result<Self> {
        ensure(entries.dim() == (basis.size(), basis.size()), || {
            format!("matrix {:?} does not fit basis of size {}", entries.dim(), basis.size())
        })?;
        Ok(Self { basis, entries })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<T> {
        self.entries
    }

    pub fn element(&self, bra: (usize, usize), ket: (usize, usize)) -> T {
        let i = self.basis.index(bra.0, bra.1).expect("bra within basis");
        let j = self.basis.index(ket.0, ket.1).expect("ket within basis");
        self.entries[[i, j]]
    }

    /// `max |M - M^T|`
    pub fn symmetry_defect(&self) -> T {
        let n = self.entries.nrows();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.entries[[i, j]] - self.entries[[j, i]]).abs());
            }
        }
        worst
    }
}

/// Quadrature nodes and Hermite-function tables shared by every
/// multiplication operator built on one basis.
pub struct QuadratureGrid<T> {
    rule: GaussHermiteRule<T>,
    /// `W_i h_n(x_i) h_m(x_i)`, row `n (n_max + 1) + m`, column `i`.
    pair_weights: Array2<T>,
    n_max: usize,
}

impl<T: Real> QuadratureGrid<T> {
    pub fn new(basis: &FockBasis, quad_order: usize) -> Result<Self> {
        let n_max = basis.n_max();
        ensure(quad_order >= 2 * n_max + 20, || {
            format!("quadrature order {quad_order} too low for n_max = {n_max}; need >= {}", 2 * n_max + 20)
        })?;
        let rule = GaussHermiteRule::new(quad_order)?;
        let h = hermite_functions(n_max, rule.nodes());
        let dim = n_max + 1;
        let mut pair_weights = Array2::zeros((dim * dim, quad_order));
        for n in 0..dim {
            for m in 0..dim {
                let mut row = pair_weights.row_mut(n * dim + m);
                for (i, w) in rule.weights().iter().enumerate() {
                    row[i] = *w * (h[[n, i]] * h[[m, i]]);
                }
            }
        }
        Ok(Self { rule, pair_weights, n_max })
    }

    pub fn nodes(&self) -> &[T] {
        self.rule.nodes()
    }

    /// Matrix of the multiplication operator `f(x, y)`:
    /// `<n_x n_y| f |m_x m_y> = sum_ij W_i W_j h_{n_x}(x_i) h_{m_x}(x_i) h_{n_y}(y_j) h_{m_y}(y_j) f(x_i, y_j)`.
    pub fn multiplication_operator<F>(&self, f: F) -> Array2<T>
    where
        F: Fn(T, T) -> T,
    {
        let nodes = self.rule.nodes();
        let q = nodes.len();
        let values = Array2::from_shape_fn((q, q), |(i, j)| f(nodes[i], nodes[j]));
        // g[(nx,mx), j] = sum_i P[(nx,mx), i] f(x_i, y_j)
        let g = self.pair_weights.dot(&values);
        // t[(nx,mx), (ny,my)] = sum_j g[(nx,mx), j] P[(ny,my), j]
        let t = g.dot(&self.pair_weights.t());
        let dim = self.n_max + 1;
        let size = dim * dim;
        let mut out = Array2::zeros((size, size));
        for nx in 0..dim {
            for mx in 0..dim {
                let row = t.row(nx * dim + mx);
                for ny in 0..dim {
                    for my in 0..dim {
                        out[[nx * dim + ny, mx * dim + my]] = row[ny * dim + my];
                    }
                }
            }
        }
        symmetrize(&mut out);
        out
    }
}

fn symmetrize<T: Real>(m: &mut Array2<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in 0..i {
            let avg = half * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
}

/// Single-sector ladder matrices: position `(a + a^dag)/sqrt 2` and the real
/// antisymmetric `(a^dag - a)/sqrt 2`, so that `p = i * antisym`.
pub fn ladder_matrices<T: Real>(n_max: usize) -> (Array2<T>, Array2<T>) {
    let dim = n_max + 1;
    let mut position = Array2::zeros((dim, dim));
    let mut antisym = Array2::zeros((dim, dim));
    for n in 0..n_max {
        let amp = (T::from_count(n + 1) / T::lit(2.0)).sqrt();
        position[[n + 1, n]] = amp;
        position[[n, n + 1]] = amp;
        antisym[[n + 1, n]] = amp;
        antisym[[n, n + 1]] = -amp;
    }
    (position, antisym)
}

/// Kronecker product in the row-major `(n_x, n_y)` ordering.
pub fn kron<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(r, c)| a[[r / br, c / bc]] * b[[r % br, c % bc]])
}

/// Real antisymmetric `A` with `K = x p_y + y p_x = i A` on the truncated basis.
pub fn boost_generator<T: Real>(basis: &FockBasis) -> Array2<T> {
    let (position, antisym) = ladder_matrices::<T>(basis.n_max());
    let mut a = kron(&position, &antisym);
    a += &kron(&antisym, &position);
    a
}

/// `K^2 = -A A` (real symmetric).
pub fn boost_squared<T: Real>(basis: &FockBasis) -> Array2<T> {
    let a = boost_generator::<T>(basis);
    let mut k2 = a.dot(&a);
    k2.mapv_inplace(|v| -v);
    symmetrize(&mut k2);
    k2
}

pub fn build_hamiltonian<T: Real>(basis: &FockBasis, coupling: Coupling<T>, quad_order: usize) -> Result<FockOperator<T>> {
    let grid = QuadratureGrid::new(basis, quad_order)?;
    build_hamiltonian_on(&grid, basis, coupling)
}

pub fn build_hamiltonian_on<T: Real>(
    grid: &QuadratureGrid<T>,
    basis: &FockBasis,
    coupling: Coupling<T>,
) -> Result<FockOperator<T>> {
    let lambda = coupling.lambda();
    let mut entries = if lambda == T::zero() {
        Array2::zeros((basis.size(), basis.size()))
    } else {
        grid.multiplication_operator(|x, y| lambda / delta_expanded(x, y).sqrt())
    };
    // (p_x^2 + x^2)/2 - (p_y^2 + y^2)/2 is diagonal with n_x - n_y.
    for k in 0..basis.size() {
        let (nx, ny) = basis.quantum_numbers(k);
        entries[[k, k]] += T::from_count(nx) - T::from_count(ny);
    }
    FockOperator::new(*basis, entries)
}

pub fn build_c_operator<T: Real>(basis: &FockBasis, coupling: Coupling<T>, quad_order: usize) -> Result<FockOperator<T>> {
    let grid = QuadratureGrid::new(basis, quad_order)?;
    build_c_operator_on(&grid, basis, coupling)
}

/// `C = K^2 + (p_x^2 + x^2) - (x^2 - y^2 - 1) V`.
pub fn build_c_operator_on<T: Real>(
    grid: &QuadratureGrid<T>,
    basis: &FockBasis,
    coupling: Coupling<T>,
) -> Result<FockOperator<T>> {
    let lambda = coupling.lambda();
    let mut entries = boost_squared::<T>(basis);
    if lambda != T::zero() {
        let shaped = grid.multiplication_operator(|x, y| (x * x - y * y - T::one()) * lambda / delta_expanded(x, y).sqrt());
        entries -= &shaped;
    }
    for k in 0..basis.size() {
        let (nx, _) = basis.quantum_numbers(k);
        entries[[k, k]] += T::lit(2.0) * T::from_count(nx) + T::one();
    }
    FockOperator::new(*basis, entries)
}

/// Diagonal of an operator as a vector, used for quick free-theory checks.
pub fn diagonal<T: Real>(op: &FockOperator<T>) -> Vec<T> {
    op.entries().diag().to_vec()
}

/// Largest entry of `op` restricted to `n_x, n_y <= cutoff`.
pub fn interior_max_abs<T: Real>(basis: &FockBasis, m: &Array2<T>, cutoff: usize) -> T {
    let keep: Vec<usize> = (0..basis.size())
        .filter(|&k| {
            let (nx, ny) = basis.quantum_numbers(k);
            nx <= cutoff && ny <= cutoff
        })
        .collect();
    let sub = m.select(Axis(0), &keep).select(Axis(1), &keep);
    sub.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}
