//! Classical / Ehrenfest-level orbits integrated with fixed-step RK4.

use crate::error::{ensure, Error, Result};
use crate::model::{classical_observables, Coupling, PhasePoint};
use crate::scalar::Real;

/// Coordinates beyond this magnitude abort the run.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    /// Step size. Negative values integrate backwards in time.
    pub dt: T,
    /// Length of the run, `> 0`.
    pub t_final: T,
    pub method: Method,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn rk4(dt: T, t_final: T) -> Self {
        Self { dt, t_final, method: Method::Rk4 }
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt.abs()).round().to_usize().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.dt.is_finite() && self.dt != T::zero(), || {
            format!("time step must be finite and non-zero, got {}", self.dt)
        })?;
        ensure(self.t_final.is_finite() && self.t_final > T::zero(), || {
            format!("final time must be positive, got {}", self.t_final)
        })?;
        ensure(self.steps() >= 1, || "run is shorter than one step".into())
    }
}

/// Sampled orbit with the two invariants recorded at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub points: Vec<PhasePoint<T>>,
    pub h_series: Vec<T>,
    pub c_series: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&PhasePoint<T>> {
        self.points.last()
    }

    /// `H(t) - H(0)` per sample.
    pub fn h_drift(&self) -> impl Iterator<Item = T> + '_ {
        let h0 = self.h_series[0];
        self.h_series.iter().map(move |&h| h - h0)
    }

    pub fn c_drift(&self) -> impl Iterator<Item = T> + '_ {
        let c0 = self.c_series[0];
        self.c_series.iter().map(move |&c| c - c0)
    }

    pub fn max_h_drift(&self) -> T {
        self.h_drift().map(T::abs).fold(T::zero(), T::max)
    }

    pub fn max_c_drift(&self) -> T {
        self.c_drift().map(T::abs).fold(T::zero(), T::max)
    }

    /// Largest `x^2 + y^2 + p_x^2 + p_y^2` along the orbit.
    pub fn max_second_moment(&self) -> T {
        self.points.iter().map(PhasePoint::second_moment).fold(T::zero(), T::max)
    }

    pub fn max_coordinate(&self) -> T {
        self.points.iter().map(PhasePoint::max_abs).fold(T::zero(), T::max)
    }
}

/// Hamilton's equations; the ghost sector has `dy/dt = -p_y`.
pub fn eom_rhs<T: Real>(point: &PhasePoint<T>, coupling: Coupling<T>) -> PhasePoint<T> {
    let PhasePoint { x, px, y, py } = *point;
    let two = T::lit(2.0);
    let lambda = coupling.lambda();
    let (x2, y2) = (x * x, y * y);
    let m = x2 - y2 - T::one();
    let delta = m * m + T::lit(4.0) * x2;
    let delta_3_2 = delta * delta.sqrt();

    let force_x = lambda * (two * x2 * x - two * x * y2 + two * x) / delta_3_2;
    let force_y = lambda * (two * y * x2 - two * y2 * y - two * y) / delta_3_2;
    PhasePoint {
        x: px,
        px: -x + force_x,
        y: -py,
        py: y - force_y,
    }
}

#[inline]
fn rk4_step<T: Real>(p: &PhasePoint<T>, dt: T, coupling: Coupling<T>) -> PhasePoint<T> {
    let half = dt / T::lit(2.0);
    let k1 = eom_rhs(p, coupling);
    let k2 = eom_rhs(&p.advanced(&k1, half), coupling);
    let k3 = eom_rhs(&p.advanced(&k2, half), coupling);
    let k4 = eom_rhs(&p.advanced(&k3, dt), coupling);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    PhasePoint {
        x: p.x + sixth * (k1.x + two * k2.x + two * k3.x + k4.x),
        px: p.px + sixth * (k1.px + two * k2.px + two * k3.px + k4.px),
        y: p.y + sixth * (k1.y + two * k2.y + two * k3.y + k4.y),
        py: p.py + sixth * (k1.py + two * k2.py + two * k3.py + k4.py),
    }
}

pub fn integrate<T: Real>(
    start: PhasePoint<T>,
    config: &IntegratorConfig<T>,
    coupling: Coupling<T>,
) -> Result<Trajectory<T>> {
    config.validate()?;
    ensure(start.is_finite(), || format!("start point is not finite: {start:?}"))?;
    let steps = config.steps();
    let threshold = T::lit(BLOWUP_THRESHOLD);

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        points: Vec::with_capacity(steps + 1),
        h_series: Vec::with_capacity(steps + 1),
        c_series: Vec::with_capacity(steps + 1),
    };
    let record = |traj: &mut Trajectory<T>, t: T, p: PhasePoint<T>| {
        let obs = classical_observables(&p, coupling);
        traj.times.push(t);
        traj.points.push(p);
        traj.h_series.push(obs.h);
        traj.c_series.push(obs.c);
    };

    record(&mut traj, T::zero(), start);
    let mut point = start;
    for n in 1..=steps {
        point = rk4_step(&point, config.dt, coupling);
        let t = T::from_count(n) * config.dt;
        if !point.is_finite() || point.max_abs() > threshold {
            return Err(Error::Blowup {
                time: t.as_f64(),
                detail: format!("state left |z| <= {BLOWUP_THRESHOLD:e}: {point:?}"),
            });
        }
        record(&mut traj, t, point);
    }
    Ok(traj)
}

/// Exact free-theory orbit (`lambda = 0`): the normal sector rotates
/// clockwise in `(x, p_x)`, the ghost sector counter-clockwise in `(y, p_y)`.
pub fn free_orbit<T: Real>(start: &PhasePoint<T>, t: T) -> PhasePoint<T> {
    let (s, c) = t.sin_cos();
    PhasePoint {
        x: start.x * c + start.px * s,
        px: start.px * c - start.x * s,
        y: start.y * c - start.py * s,
        py: start.py * c + start.y * s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn third() -> Coupling<f64> {
        Coupling::new(1.0 / 3.0).unwrap()
    }

    #[test]
    fn rhs_fixed_point_and_free() {
        let r = eom_rhs(&PhasePoint::origin(), Coupling::new(0.8).unwrap());
        assert_eq!(r, PhasePoint::origin());
        let r = eom_rhs(&PhasePoint::new(0.0, 1.0, 0.0, 0.0), Coupling::<f64>::free());
        assert_eq!(r, PhasePoint::new(1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn rhs_hand_value() {
        let r = eom_rhs(&PhasePoint::new(1.0, 0.0, 0.0, 0.0), third());
        assert_eq!(r.x, 0.0);
        assert_relative_eq!(r.px, -5.0 / 6.0, max_relative = 1e-15);
        assert_eq!(r.y, 0.0);
        assert_eq!(r.py, 0.0);
    }

    #[test]
    fn rhs_is_hamiltons_equations() {
        // dq/dt = dH/dp, dp/dt = -dH/dq with H differentiated numerically.
        use crate::model::classical_observables;
        let c = third();
        let p = PhasePoint::new(0.6, -0.4, 1.2, 0.9);
        let h = 1e-6;
        let ham = |q: PhasePoint<f64>| classical_observables(&q, c).h;
        let d = |f: fn(&mut PhasePoint<f64>, f64)| {
            let mut a = p;
            let mut b = p;
            f(&mut a, h);
            f(&mut b, -h);
            (ham(a) - ham(b)) / (2.0 * h)
        };
        let r = eom_rhs(&p, c);
        assert_relative_eq!(r.x, d(|q, s| q.px += s), epsilon = 1e-8);
        assert_relative_eq!(r.px, -d(|q, s| q.x += s), epsilon = 1e-8);
        assert_relative_eq!(r.y, d(|q, s| q.py += s), epsilon = 1e-8);
        assert_relative_eq!(r.py, -d(|q, s| q.y += s), epsilon = 1e-8);
    }

    #[test]
    fn free_theory_matches_exact_orbit() {
        let start = PhasePoint::<f64>::new(1.0, 0.3, 0.5, -0.2);
        let cfg = IntegratorConfig::rk4(0.02, 100.0);
        let traj = integrate(start, &cfg, Coupling::<f64>::free()).unwrap();
        let mut worst: f64 = 0.0;
        for (t, p) in traj.times.iter().zip(&traj.points) {
            let e = free_orbit(&start, *t);
            worst = worst.max((p.x - e.x).abs()).max((p.y - e.y).abs());
            worst = worst.max((p.px - e.px).abs()).max((p.py - e.py).abs());
        }
        // RK4 on a unit-frequency rotation lags by dt^5/120 radians per step.
        let amplitude = (1.0f64 + 0.09).sqrt().max((0.25f64 + 0.04).sqrt());
        let phase_bound = 100.0 * 0.02f64.powi(4) / 120.0;
        assert!(worst < 1.05 * amplitude * phase_bound, "worst {worst:e}");

        let fine = integrate(start, &IntegratorConfig::rk4(0.01, 100.0), Coupling::<f64>::free()).unwrap();
        let e = free_orbit(&start, 100.0);
        let last = fine.last().unwrap();
        assert!((last.x - e.x).abs() < 1e-8 && (last.y - e.y).abs() < 1e-8);
    }

    #[test]
    fn forward_then_backward_returns() {
        let start = PhasePoint::new(1.0, 0.0, 0.5, 0.0);
        let fwd = integrate(start, &IntegratorConfig::rk4(0.02, 50.0), third()).unwrap();
        let back = integrate(*fwd.last().unwrap(), &IntegratorConfig::rk4(-0.02, 50.0), third()).unwrap();
        let end = back.last().unwrap();
        assert!((end.x - start.x).abs() < 1e-6);
        assert!((end.px - start.px).abs() < 1e-6);
        assert!((end.y - start.y).abs() < 1e-6);
        assert!((end.py - start.py).abs() < 1e-6);
    }

    #[test]
    fn trajectory_shape() {
        let traj = integrate(PhasePoint::new(1.0, 0.0, 0.5, 0.0), &IntegratorConfig::rk4(0.1, 2.0), third()).unwrap();
        assert_eq!(traj.len(), 21);
        assert_eq!(traj.h_series.len(), traj.points.len());
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_config() {
        let p = PhasePoint::origin();
        assert!(integrate(p, &IntegratorConfig::rk4(0.0, 1.0), third()).is_err());
        assert!(integrate(p, &IntegratorConfig::rk4(0.1, -1.0), third()).is_err());
        assert!(integrate(PhasePoint::new(f64::NAN, 0.0, 0.0, 0.0), &IntegratorConfig::rk4(0.1, 1.0), third()).is_err());
    }

    #[test]
    fn blowup_is_reported_with_time() {
        // A huge step makes RK4 unstable on the oscillator sector.
        let err = integrate(PhasePoint::new(1.0, 0.0, 0.0, 0.0), &IntegratorConfig::rk4(3.5, 1e4), Coupling::<f64>::free())
            .unwrap_err();
        match err {
            Error::Blowup { time, .. } => assert!(time > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn moderate_orbits_stay_finite() {
        for &lam in &[-0.8, -0.5, 0.5, 0.8] {
            for start in [PhasePoint::new(2.0, -1.0, 1.5, 2.0), PhasePoint::new(-2.0, 2.0, -2.0, -1.0)] {
                let t = integrate(start, &IntegratorConfig::rk4(0.02, 500.0), Coupling::new(lam).unwrap());
                assert!(t.is_ok(), "lambda {lam} start {start:?}");
            }
        }
    }
}
