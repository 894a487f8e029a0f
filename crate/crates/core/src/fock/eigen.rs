//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by implicit QL iterations (the EISPACK `tred2`/`tql2` pair).

use ndarray::Array2;

use crate::error::{ensure, Error, Result};
use crate::scalar::Real;

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Array2<T>,
}

/// Full eigendecomposition of a real symmetric matrix. Only the lower
/// triangle is trusted; callers are expected to have checked symmetry.
pub fn symmetric_eigen<T: Real>(matrix: &Array2<T>) -> Result<SymmetricEigen<T>> {
    let n = matrix.nrows();
    ensure(matrix.is_square(), || format!("matrix is {:?}, not square", matrix.dim()))?;
    if n == 0 {
        return Ok(SymmetricEigen { eigenvalues: vec![], eigenvectors: Array2::zeros((0, 0)) });
    }
    let mut v = matrix.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut d, &mut e, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.column_mut(dst).assign(&v.column(src));
    }
    Ok(SymmetricEigen { eigenvalues, eigenvectors })
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal (`off.len() == diag.len() - 1`).
pub fn symmetric_tridiagonal_eigenvalues<T: Real>(diag: &[T], off: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    ensure(n > 0 && off.len() + 1 == n, || {
        format!("tridiagonal shape mismatch: {} diagonal, {} off-diagonal", diag.len(), off.len())
    })?;
    let mut d = diag.to_vec();
    // ql_implicit expects the sub-diagonal in e[1..].
    let mut e = vec![T::zero(); n];
    e[1..].copy_from_slice(off);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(d)
}

/// Householder reduction. On return `v` holds the accumulated orthogonal
/// transform, `d` the diagonal and `e[1..]` the sub-diagonal.
#[allow(clippy::needless_range_loop)]
fn tridiagonalize<T: Real>(v: &mut Array2<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[[n - 1, j]];
    }

    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = T::zero();
                v[[j, i]] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[[j, i]] = f;
                g = e[j] + v[[j, j]] * f;
                for k in (j + 1)..i {
                    g += v[[k, j]] * d[k];
                    e[k] += v[[k, j]] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let cur = v[[k, j]];
                    v[[k, j]] = cur - (f * e[k] + g * d[k]);
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = T::zero();
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    let cur = v[[k, j]];
                    v[[k, j]] = cur - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = T::zero();
    }
    v[[n - 1, n - 1]] = T::one();
    e[0] = T::zero();
}

/// Implicit QL on the tridiagonal `(d, e[1..])`; rotations are applied to the
/// columns of `vectors` when given.
fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T], mut vectors: Option<&mut Array2<T>>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { index: l, size: n, offdiag: e[l].abs().as_f64() });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = vectors.as_deref_mut() {
                        for k in 0..n {
                            let hk = v[[k, i + 1]];
                            let vk = v[[k, i]];
                            v[[k, i + 1]] = s * vk + c * hk;
                            v[[k, i]] = c * vk - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}
