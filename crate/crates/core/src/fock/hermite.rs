//! Normalized Hermite functions and a Gauss-Hermite rule re-weighted for them.

use ndarray::Array2;

use super::eigen::symmetric_tridiagonal_eigenvalues;
use crate::error::{ensure, Result};
use crate::scalar::Real;

/// `h_n(x)` for `0 <= n <= n_max` at every node; row `n`, column `node`.
///
/// Uses the three-term recurrence
/// `h_{n+1} = x sqrt(2/(n+1)) h_n - sqrt(n/(n+1)) h_{n-1}`, which is stable in
/// the forward direction for the normalized functions.
pub fn hermite_functions<T: Real>(n_max: usize, nodes: &[T]) -> Array2<T> {
    let mut out = Array2::zeros((n_max + 1, nodes.len()));
    for (j, &x) in nodes.iter().enumerate() {
        let mut prev = T::zero();
        let mut cur = T::FRAC_1_PI().powf(T::lit(0.25)) * (-x * x / T::lit(2.0)).exp();
        out[[0, j]] = cur;
        for n in 0..n_max {
            let nf = T::from_count(n);
            let next = x * (T::lit(2.0) / (nf + T::one())).sqrt() * cur
                - (nf / (nf + T::one())).sqrt() * prev;
            out[[n + 1, j]] = next;
            prev = cur;
            cur = next;
        }
    }
    out
}

/// Returns `(h_{n-1}(x), h_n(x))`.
fn hermite_pair<T: Real>(n: usize, x: T) -> (T, T) {
    let mut prev = T::zero();
    let mut cur = T::FRAC_1_PI().powf(T::lit(0.25)) * (-x * x / T::lit(2.0)).exp();
    for k in 0..n {
        let kf = T::from_count(k);
        let next = x * (T::lit(2.0) / (kf + T::one())).sqrt() * cur - (kf / (kf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// Gauss-Hermite nodes with weights for integrands of the form
/// `h_n(x) h_m(x) f(x)`: the `exp(-x^2)` factor of the classical weights is
/// absorbed, `W_i = w_i exp(x_i^2) = 1 / sum_{k<N} h_k(x_i)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermiteRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussHermiteRule<T> {
    pub fn new(order: usize) -> Result<Self> {
        ensure(order >= 1, || "quadrature order must be at least 1".into())?;
        // Jacobi matrix of the physicists' Hermite polynomials.
        let diag = vec![T::zero(); order];
        let off: Vec<T> = (1..order).map(|k| (T::from_count(k) / T::lit(2.0)).sqrt()).collect();
        let mut nodes = symmetric_tridiagonal_eigenvalues(&diag, &off)?;

        // Newton polish on h_N, whose zeros are the nodes:
        // h_N' = sqrt(2N) h_{N-1} - x h_N.
        let root_2n = (T::lit(2.0) * T::from_count(order)).sqrt();
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (hm1, hn) = hermite_pair(order, *x);
                let deriv = root_2n * hm1 - *x * hn;
                if deriv == T::zero() {
                    break;
                }
                let step = hn / deriv;
                *x -= step;
                if step.abs() <= T::epsilon() * x.abs().max(T::one()) {
                    break;
                }
            }
        }
        // Exact symmetry of the rule.
        for i in 0..order / 2 {
            let m = (nodes[order - 1 - i] - nodes[i]) / T::lit(2.0);
            nodes[i] = -m;
            nodes[order - 1 - i] = m;
        }
        if order % 2 == 1 {
            nodes[order / 2] = T::zero();
        }

        let h = hermite_functions(order - 1, &nodes);
        let weights = (0..order)
            .map(|j| T::one() / h.column(j).iter().map(|&v| v * v).sum::<T>())
            .collect();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `sum_i W_i f(x_i)`, approximating `int f(x) dx` for integrands that
    /// decay like `exp(-x^2)` times a polynomial.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_values() {
        let h = hermite_functions(1, &[0.0f64]);
        assert_relative_eq!(h[[0, 0]], std::f64::consts::PI.powf(-0.25), max_relative = 1e-15);
        assert_relative_eq!(h[[0, 0]], 0.7511255444649425, max_relative = 1e-15);
        assert_eq!(h[[1, 0]], 0.0);
    }

    #[test]
    fn orthonormal_under_200_node_rule() {
        let rule = GaussHermiteRule::<f64>::new(200).unwrap();
        let h = hermite_functions(21, rule.nodes());
        for n in 0..=21 {
            for m in 0..=21 {
                let v: f64 = (0..rule.order()).map(|i| rule.weights()[i] * h[[n, i]] * h[[m, i]]).sum();
                let expect = if n == m { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10, "<{n}|{m}> = {v}");
            }
        }
    }

    #[test]
    fn orthonormal_on_uniform_grid() {
        // Independent of the rule: plain Riemann sum on a fine uniform grid,
        // which is spectrally accurate for these rapidly decaying integrands.
        let step = 0.01;
        let xs: Vec<f64> = (0..=2400).map(|i| -12.0 + step * i as f64).collect();
        let h = hermite_functions(21, &xs);
        for n in [0, 3, 10, 21] {
            for m in [0, 3, 10, 21] {
                let v: f64 = (0..xs.len()).map(|i| h[[n, i]] * h[[m, i]]).sum::<f64>() * step;
                let expect = if n == m { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10, "<{n}|{m}> = {v}");
            }
        }
    }

    #[test]
    fn rule_reproduces_gaussian_moments() {
        let rule = GaussHermiteRule::<f64>::new(20).unwrap();
        let pi = std::f64::consts::PI;
        // int exp(-x^2) x^2 dx = sqrt(pi)/2
        let v = rule.integrate(|x| (-x * x).exp() * x * x);
        assert_relative_eq!(v, pi.sqrt() / 2.0, max_relative = 1e-13);
        let v = rule.integrate(|x| (-x * x).exp() * x.cos());
        assert_relative_eq!(v, pi.sqrt() * (-0.25f64).exp(), max_relative = 1e-13);
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        let rule = GaussHermiteRule::<f64>::new(33).unwrap();
        let n = rule.nodes();
        assert!(n.windows(2).all(|w| w[0] < w[1]));
        for i in 0..n.len() {
            assert_eq!(n[i], -n[n.len() - 1 - i]);
        }
        assert_eq!(n[16], 0.0);
    }
}
