//! Scalar functions of the ghost-coupled oscillator.
//!
//! Natural units (hbar = omega = m = 1). The normal sector is `(x, p_x)`, the
//! ghost sector `(y, p_y)` enters the Hamiltonian with an overall minus sign:
//!
//! ```text
//! H = (p_x^2 + x^2)/2 - (p_y^2 + y^2)/2 + V(x, y)
//! V = lambda / sqrt(Delta),   Delta = (x^2 - y^2 - 1)^2 + 4 x^2 = d^2 + 2 s + 1
//! ```
//!
//! with `s = x^2 + y^2` and `d = x^2 - y^2`. `Delta >= 1` everywhere, so the
//! potential is bounded by `|lambda|` and every function here is total on the
//! plane.

use crate::error::{ensure, Error, Result};
use crate::scalar::Real;

/// Interaction strength of the bounded potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling<T> {
    lambda: T,
}

impl<T: Real> Coupling<T> {
    pub fn new(lambda: T) -> Result<Self> {
        ensure(lambda.is_finite(), || format!("coupling must be finite, got {lambda}"))?;
        Ok(Self { lambda })
    }

    /// The free theory (`lambda = 0`).
    pub fn free() -> Self {
        Self { lambda: T::zero() }
    }

    #[inline]
    pub fn lambda(&self) -> T {
        self.lambda
    }

    #[inline]
    pub fn magnitude(&self) -> T {
        self.lambda.abs()
    }
}

/// Classical state `(x, p_x, y, p_y)`.
///
/// The same type doubles as the rate vector returned by the equations of
/// motion, which is why it supports the few linear operations RK4 needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub x: T,
    pub px: T,
    pub y: T,
    pub py: T,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(x: T, px: T, y: T, py: T) -> Self {
        Self { x, px, y, py }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.px.is_finite() && self.y.is_finite() && self.py.is_finite()
    }

    /// `self + scale * rate`
    #[inline]
    pub fn advanced(&self, rate: &Self, scale: T) -> Self {
        Self {
            x: self.x + scale * rate.x,
            px: self.px + scale * rate.px,
            y: self.y + scale * rate.y,
            py: self.py + scale * rate.py,
        }
    }

    /// `x^2 + y^2 + p_x^2 + p_y^2`
    #[inline]
    pub fn second_moment(&self) -> T {
        self.x * self.x + self.y * self.y + self.px * self.px + self.py * self.py
    }

    pub fn max_abs(&self) -> T {
        self.x.abs().max(self.px.abs()).max(self.y.abs()).max(self.py.abs())
    }
}

/// Value, gradient and Hessian of the interaction potential at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialJet<T> {
    pub v: T,
    pub dv_dx: T,
    pub dv_dy: T,
    pub d2v_dxx: T,
    pub d2v_dyy: T,
    pub d2v_dxy: T,
    pub delta: T,
}

/// `Delta` in the form `(x^2 - y^2 - 1)^2 + 4 x^2`.
#[inline]
pub fn delta_geometric<T: Real>(x: T, y: T) -> T {
    let four = T::lit(4.0);
    let m = x * x - y * y - T::one();
    m * m + four * x * x
}

/// `Delta` in the form `d^2 + 2 s + 1`; a sum of non-negative terms, so it is
/// free of cancellation for large coordinates.
#[inline]
pub fn delta_expanded<T: Real>(x: T, y: T) -> T {
    let two = T::lit(2.0);
    let (x2, y2) = (x * x, y * y);
    let d = x2 - y2;
    d * d + two * (x2 + y2) + T::one()
}

#[inline]
pub fn potential<T: Real>(x: T, y: T, coupling: Coupling<T>) -> T {
    coupling.lambda() / delta_expanded(x, y).sqrt()
}

/// Potential value with its closed-form first and second derivatives.
pub fn potential_jet<T: Real>(x: T, y: T, coupling: Coupling<T>) -> PotentialJet<T> {
    let lambda = coupling.lambda();
    let (two, three, four) = (T::lit(2.0), T::lit(3.0), T::lit(4.0));
    let (x2, y2) = (x * x, y * y);
    let s = x2 + y2;
    let d = x2 - y2;
    let delta = delta_expanded(x, y);
    let root = delta.sqrt();
    let delta_3_2 = delta * root;
    let delta_5_2 = delta_3_2 * delta;

    // Gradient of Delta.
    let ddelta_dx = four * x * (d + T::one());
    let ddelta_dy = four * y * (T::one() - d);
    // Hessian of Delta.
    let d2delta_dxx = T::lit(12.0) * x2 - four * y2 + four;
    let d2delta_dyy = T::lit(12.0) * y2 - four * x2 + four;

    let dv_dx = -two * lambda * x * (d + T::one()) / delta_3_2;
    let dv_dy = -two * lambda * y * (T::one() - d) / delta_3_2;

    let d2v_dxx = -lambda * d2delta_dxx / (two * delta_3_2)
        + three * lambda * ddelta_dx * ddelta_dx / (four * delta_5_2);
    let d2v_dyy = -lambda * d2delta_dyy / (two * delta_3_2)
        + three * lambda * ddelta_dy * ddelta_dy / (four * delta_5_2);
    let d2v_dxy = -T::lit(8.0) * lambda * x * y / delta_3_2
        + T::lit(24.0) * lambda * x * y * (s + T::one()) / delta_5_2;

    PotentialJet {
        v: lambda / root,
        dv_dx,
        dv_dy,
        d2v_dxx,
        d2v_dyy,
        d2v_dxy,
        delta,
    }
}

/// Laplacian of the potential from its own closed form,
/// `4 lambda (2s + 5) / Delta^{3/2} - 24 lambda (s + 1)^2 / Delta^{5/2}`.
pub fn potential_laplacian<T: Real>(x: T, y: T, coupling: Coupling<T>) -> T {
    let lambda = coupling.lambda();
    let s = x * x + y * y;
    let delta = delta_expanded(x, y);
    let delta_3_2 = delta * delta.sqrt();
    let sp1 = s + T::one();
    T::lit(4.0) * lambda * (T::lit(2.0) * s + T::lit(5.0)) / delta_3_2
        - T::lit(24.0) * lambda * sp1 * sp1 / (delta_3_2 * delta)
}

/// Classical observables at one phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalObservables<T> {
    /// Hamiltonian.
    pub h: T,
    /// Second integral of motion.
    pub c: T,
    /// Hyperbolic boost generator `p_y x + p_x y`.
    pub k: T,
    /// `E = C - H`.
    pub e: T,
    /// `K^2 + (p_x^2 + x^2)/2 + (p_y^2 + y^2)/2`.
    pub sigma: T,
    /// `E` assembled as `sigma + (y^2 - x^2) V`.
    pub e_sigma_form: T,
}

impl<T: Real> ClassicalObservables<T> {
    /// Relative disagreement between the two expressions for `E`.
    pub fn e_identity_residual(&self) -> T {
        let scale = self.e.abs().max(self.e_sigma_form.abs()).max(T::one());
        (self.e - self.e_sigma_form).abs() / scale
    }
}

pub fn classical_observables<T: Real>(
    point: &PhasePoint<T>,
    coupling: Coupling<T>,
) -> ClassicalObservables<T> {
    let half = T::lit(0.5);
    let PhasePoint { x, px, y, py } = *point;
    let v = potential(x, y, coupling);
    let normal = px * px + x * x;
    let ghost = py * py + y * y;
    let k = py * x + px * y;

    let h = half * normal - half * ghost + v;
    let c = k * k + normal - (x * x - y * y - T::one()) * v;
    let sigma = k * k + half * normal + half * ghost;
    ClassicalObservables {
        h,
        c,
        k,
        e: c - h,
        sigma,
        e_sigma_form: sigma + (y * y - x * x) * v,
    }
}

/// Ceiling on `<x^2 + y^2 + p_x^2 + p_y^2>(t)` given its initial value.
pub fn bound_ceiling<T: Real>(initial_moment: T, coupling: Coupling<T>) -> Result<T> {
    check_moment(initial_moment, "initial second moment")?;
    Ok(initial_moment + T::lit(4.0) * coupling.magnitude())
}

/// Ceiling on `<Sigma>(t)` given its initial value.
pub fn sigma_ceiling<T: Real>(initial_sigma: T, coupling: Coupling<T>) -> Result<T> {
    check_moment(initial_sigma, "initial sigma")?;
    Ok(initial_sigma + T::lit(2.0) * coupling.magnitude())
}

fn check_moment<T: Real>(value: T, what: &str) -> Result<()> {
    if value.is_finite() && value >= T::zero() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} must be finite and >= 0, got {value}")))
    }
}
