//! Symmetric central finite-difference stencils.

use crate::scalar::Real;

/// Formal accuracy of the central differences used for kinetic terms and for
/// the momentum monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StencilOrder {
    Second,
    Fourth,
    #[default]
    Sixth,
}

impl StencilOrder {
    /// Points on each side of the centre.
    pub fn half_width(self) -> usize {
        match self {
            StencilOrder::Second => 1,
            StencilOrder::Fourth => 2,
            StencilOrder::Sixth => 3,
        }
    }

    pub fn accuracy(self) -> usize {
        2 * self.half_width()
    }

    pub fn from_accuracy(order: usize) -> Option<Self> {
        match order {
            2 => Some(StencilOrder::Second),
            4 => Some(StencilOrder::Fourth),
            6 => Some(StencilOrder::Sixth),
            _ => None,
        }
    }

    /// `[c0, c1, ..]` with `f'' ~ (c0 f_i + sum_k c_k (f_{i+k} + f_{i-k})) / h^2`.
    pub fn second_derivative<T: Real>(self) -> Vec<T> {
        let c: &[f64] = match self {
            StencilOrder::Second => &[-2.0, 1.0],
            StencilOrder::Fourth => &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Sixth => &[-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
        };
        c.iter().map(|&v| T::lit(v)).collect()
    }

    /// `[d1, d2, ..]` with `f' ~ sum_k d_k (f_{i+k} - f_{i-k}) / h`.
    pub fn first_derivative<T: Real>(self) -> Vec<T> {
        let c: &[f64] = match self {
            StencilOrder::Second => &[1.0 / 2.0],
            StencilOrder::Fourth => &[2.0 / 3.0, -1.0 / 12.0],
            StencilOrder::Sixth => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        };
        c.iter().map(|&v| T::lit(v)).collect()
    }
}

impl std::fmt::Display for StencilOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.accuracy())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [StencilOrder; 3] = [StencilOrder::Second, StencilOrder::Fourth, StencilOrder::Sixth];

    #[test]
    fn exact_on_polynomials_up_to_order() {
        for order in ALL {
            let c2 = order.second_derivative::<f64>();
            let c1 = order.first_derivative::<f64>();
            // monomials x^p at x = 0 with h = 1
            for p in 0..=order.accuracy() {
                let f = |x: f64| x.powi(p as i32);
                let mut d2 = c2[0] * f(0.0);
                for (k, c) in c2.iter().enumerate().skip(1) {
                    d2 += c * (f(k as f64) + f(-(k as f64)));
                }
                let mut d1 = 0.0;
                for (k, c) in c1.iter().enumerate() {
                    let s = (k + 1) as f64;
                    d1 += c * (f(s) - f(-s));
                }
                assert!((d2 - if p == 2 { 2.0 } else { 0.0 }).abs() < 1e-12, "{order} x^{p}");
                assert!((d1 - if p == 1 { 1.0 } else { 0.0 }).abs() < 1e-12, "{order} x^{p}");
            }
        }
    }

    #[test]
    fn accuracy_roundtrip() {
        for order in ALL {
            assert_eq!(StencilOrder::from_accuracy(order.accuracy()), Some(order));
        }
        assert_eq!(StencilOrder::from_accuracy(3), None);
    }
}
