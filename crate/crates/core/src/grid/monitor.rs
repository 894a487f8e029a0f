use rayon::prelude::*;

use super::moments::{MomentProbe, MomentRecord};
use super::propagator::Propagator;
use super::stencil::StencilOrder;
use super::Wavefunction;
use crate::error::{ensure, BoundKind, Error, Result};
use crate::model::{bound_ceiling, sigma_ceiling, Coupling};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig<T> {
    pub dt: T,
    pub t_final: T,
    /// Steps between moment samples.
    pub sample_every: usize,
    pub order: StencilOrder,
}

impl<T: Real> EvolutionConfig<T> {
    pub fn new(dt: T, t_final: T, sample_every: usize) -> Self {
        Self { dt, t_final, sample_every, order: StencilOrder::default() }
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).abs().round().to_usize().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.dt > T::zero() && self.dt.is_finite(), || format!("dt must be positive, got {}", self.dt))?;
        ensure(self.t_final > T::zero() && self.t_final.is_finite(), || {
            format!("t_final must be positive, got {}", self.t_final)
        })?;
        ensure(self.sample_every >= 1, || "sample_every must be at least 1".into())
    }
}

/// Slack allowed on each monitored inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig<T> {
    /// Added to both moment ceilings to absorb discretization of the monitors.
    pub tol_disc: T,
    pub tol_e: T,
    pub norm_tol: T,
    pub boundary_tol: T,
}

impl<T: Real> Default for MonitorConfig<T> {
    fn default() -> Self {
        Self { tol_disc: T::lit(0.05), tol_e: T::lit(0.02), norm_tol: T::lit(1e-9), boundary_tol: T::lit(1e-8) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: BoundKind,
    pub time: f64,
    pub observed: f64,
    pub limit: f64,
}

/// Checks samples against ceilings fixed by the initial record.
#[derive(Debug, Clone, Copy)]
pub struct BoundMonitor<T> {
    pub initial: MomentRecord<T>,
    /// `moment_sum(0) + 4|lambda|`
    pub ceiling: T,
    /// `sigma(0) + 2|lambda|`
    pub sigma_ceiling: T,
    pub config: MonitorConfig<T>,
}

impl<T: Real> BoundMonitor<T> {
    pub fn new(initial: MomentRecord<T>, coupling: Coupling<T>, config: MonitorConfig<T>) -> Result<Self> {
        Ok(Self {
            initial,
            ceiling: bound_ceiling(initial.moment_sum(), coupling)?,
            sigma_ceiling: sigma_ceiling(initial.sigma, coupling)?,
            config,
        })
    }

    pub fn check(&self, rec: &MomentRecord<T>) -> Vec<Violation> {
        let cfg = &self.config;
        let mut out = Vec::new();
        let mut flag = |kind, observed: T, limit: T| {
            // NaN observations count as violations
            if !(observed <= limit) {
                out.push(Violation { kind, time: rec.time.as_f64(), observed: observed.as_f64(), limit: limit.as_f64() });
            }
        };
        flag(BoundKind::Norm, (rec.norm - self.initial.norm).abs(), cfg.norm_tol);
        flag(BoundKind::SecondMoment, rec.moment_sum(), self.ceiling + cfg.tol_disc);
        flag(BoundKind::Sigma, rec.sigma, self.sigma_ceiling + cfg.tol_disc);
        flag(BoundKind::ConservedE, (rec.e_mean - self.initial.e_mean).abs(), cfg.tol_e);
        flag(BoundKind::Boundary, rec.boundary_prob, cfg.boundary_tol);
        out
    }
}

#[derive(Debug, Clone)]
pub struct MonitoredRun<T> {
    pub records: Vec<MomentRecord<T>>,
    pub violations: Vec<Violation>,
    pub final_state: Wavefunction<T>,
    pub ceiling: T,
    pub sigma_ceiling: T,
}

impl<T: Real> MonitoredRun<T> {
    fn max_of(&self, f: impl Fn(&MomentRecord<T>) -> T) -> T {
        self.records.iter().map(f).fold(T::neg_infinity(), T::max)
    }

    pub fn max_r2(&self) -> T {
        self.max_of(|r| r.r2())
    }

    pub fn min_r2(&self) -> T {
        -self.max_of(|r| -r.r2())
    }

    pub fn max_moment_sum(&self) -> T {
        self.max_of(|r| r.moment_sum())
    }

    pub fn max_sigma(&self) -> T {
        self.max_of(|r| r.sigma)
    }

    pub fn max_e_drift(&self) -> T {
        let e0 = self.records[0].e_mean;
        self.max_of(|r| (r.e_mean - e0).abs())
    }

    pub fn max_norm_drift(&self) -> T {
        let n0 = self.records[0].norm;
        self.max_of(|r| (r.norm - n0).abs())
    }

    pub fn max_boundary_prob(&self) -> T {
        self.max_of(|r| r.boundary_prob)
    }

    /// Least-squares slope of `<r^2>(t)` over samples with `t` in `[from, to]`.
    pub fn r2_slope(&self, from: T, to: T) -> Option<T> {
        let (ts, ys): (Vec<T>, Vec<T>) =
            self.records.iter().filter(|r| r.time >= from && r.time <= to).map(|r| (r.time, r.r2())).unzip();
        linear_fit_slope(&ts, &ys)
    }
}

/// Propagates `psi0`, sampling every `sample_every` steps (and at `t = 0`).
/// All violations are collected; `on_sample` sees every record as it is made.
pub fn run_monitored<T: Real>(
    psi0: &Wavefunction<T>,
    evo: &EvolutionConfig<T>,
    coupling: Coupling<T>,
    monitor: MonitorConfig<T>,
    mut on_sample: impl FnMut(&MomentRecord<T>, &[Violation]) -> bool,
) -> Result<MonitoredRun<T>> {
    evo.validate()?;
    let prop = Propagator::new(psi0.grid, evo.dt, coupling, evo.order)?;
    let probe = MomentProbe::new(psi0.grid, coupling, evo.order);
    let mut psi = psi0.clone();
    let first = probe.measure(&psi);
    let bounds = BoundMonitor::new(first, coupling, monitor)?;
    let mut records = vec![first];
    let mut violations = bounds.check(&first);
    let keep_going = on_sample(&first, &violations);

    let steps = evo.steps();
    let mut done = 0;
    while keep_going && done < steps {
        let chunk = evo.sample_every.min(steps - done);
        prop.advance(&mut psi, chunk);
        done += chunk;
        let rec = probe.measure(&psi);
        let found = bounds.check(&rec);
        records.push(rec);
        let go = on_sample(&rec, &found);
        violations.extend(found);
        if !go {
            break;
        }
    }
    Ok(MonitoredRun {
        records,
        violations,
        final_state: psi,
        ceiling: bounds.ceiling,
        sigma_ceiling: bounds.sigma_ceiling,
    })
}

/// Like [`run_monitored`] but stops at the first violation and reports it as
/// an error carrying the offending record.
pub fn evolve_monitored<T: Real>(
    psi0: &Wavefunction<T>,
    evo: &EvolutionConfig<T>,
    coupling: Coupling<T>,
    monitor: MonitorConfig<T>,
) -> Result<Vec<MomentRecord<T>>> {
    let run = run_monitored(psi0, evo, coupling, monitor, |_, found| found.is_empty())?;
    if let Some(v) = run.violations.first() {
        let record = run.records.last().expect("at least the initial record").to_f64();
        return Err(Error::BoundViolation {
            kind: v.kind,
            time: v.time,
            observed: v.observed,
            limit: v.limit,
            record: Box::new(record),
        });
    }
    Ok(run.records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanEntry {
    pub lambda: f64,
    pub max_r2: f64,
    pub max_moment_sum: f64,
    /// `moment_sum(0) + 4|lambda|`
    pub ceiling: f64,
    pub max_e_drift: f64,
    /// Linear-fit slope of `<r^2>` over the last three quarters of the run.
    pub late_r2_slope: Option<f64>,
    pub violated: bool,
}

/// Runs the same initial state at every coupling in parallel. `max_abs_lambda`
/// guards against typos in the scan range.
pub fn lambda_scan<T: Real>(
    lambdas: &[T],
    psi0: &Wavefunction<T>,
    evo: &EvolutionConfig<T>,
    monitor: MonitorConfig<T>,
    max_abs_lambda: T,
) -> Result<Vec<ScanEntry>> {
    for &l in lambdas {
        ensure(l.abs() <= max_abs_lambda, || format!("|lambda| = {} exceeds the scan guard {max_abs_lambda}", l.abs()))?;
    }
    lambdas
        .par_iter()
        .map(|&l| {
            let coupling = Coupling::new(l)?;
            let run = run_monitored(psi0, evo, coupling, monitor, |_, _| true)?;
            log::info!("scan lambda = {l}: max r2 = {}, ceiling = {}", run.max_r2(), run.ceiling);
            Ok(ScanEntry {
                lambda: l.as_f64(),
                max_r2: run.max_r2().as_f64(),
                max_moment_sum: run.max_moment_sum().as_f64(),
                ceiling: run.ceiling.as_f64(),
                max_e_drift: run.max_e_drift().as_f64(),
                late_r2_slope: run.r2_slope(evo.t_final / T::lit(4.0), evo.t_final).map(|v| v.as_f64()),
                violated: !run.violations.is_empty() || run.max_r2() > run.ceiling,
            })
        })
        .collect()
}

/// Ordinary least-squares slope; `None` with fewer than two distinct times.
pub fn linear_fit_slope<T: Real>(ts: &[T], ys: &[T]) -> Option<T> {
    if ts.len() != ys.len() || ts.len() < 2 {
        return None;
    }
    let n = T::from_count(ts.len());
    let tm = ts.iter().copied().sum::<T>() / n;
    let ym = ys.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&t, &y) in ts.iter().zip(ys) {
        sxy += (t - tm) * (y - ym);
        sxx += (t - tm) * (t - tm);
    }
    (sxx > T::zero()).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{init_gaussian, GridSpec, WidthConvention};

    fn packet() -> Wavefunction<f64> {
        let g = GridSpec::<f64>::new(10.0, 64).unwrap();
        init_gaussian(&g, (1.0, 0.5), 0.7, WidthConvention::Density).unwrap()
    }

    #[test]
    fn slope_of_line() {
        let ts = [0.0f64, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((linear_fit_slope(&ts, &ys).unwrap() - 2.0).abs() < 1e-14);
        assert!(linear_fit_slope(&[1.0], &[2.0]).is_none());
        assert!(linear_fit_slope(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn short_run_stays_inside_bounds() {
        let evo = EvolutionConfig::new(1e-2, 2.0, 20);
        let recs = evolve_monitored(&packet(), &evo, Coupling::new(1.0 / 3.0).unwrap(), MonitorConfig::default()).unwrap();
        assert_eq!(recs.len(), 11);
        assert!((recs[10].time - 2.0).abs() < 1e-12);
    }

    #[test]
    fn free_run_conserves_moment_sum() {
        let g = GridSpec::<f64>::new(10.0, 96).unwrap();
        let psi = init_gaussian(&g, (1.0, 0.5), 0.7, WidthConvention::Amplitude).unwrap();
        let evo = EvolutionConfig::new(1e-2, 10.0, 50);
        let run = run_monitored(&psi, &evo, Coupling::<f64>::free(), MonitorConfig::default(), |_, _| true).unwrap();
        let m0 = run.records[0].moment_sum();
        for r in &run.records {
            assert!((r.moment_sum() - m0).abs() < 1e-4, "t = {}: {}", r.time, r.moment_sum() - m0);
        }
        assert!(run.violations.is_empty());
    }

    #[test]
    fn tight_tolerance_is_reported_as_error() {
        let evo = EvolutionConfig::new(1e-2, 1.0, 10);
        let monitor = MonitorConfig { tol_e: 1e-30, ..MonitorConfig::default() };
        let err = evolve_monitored(&packet(), &evo, Coupling::new(0.8).unwrap(), monitor).unwrap_err();
        match err {
            Error::BoundViolation { kind, record, .. } => {
                assert_eq!(kind, BoundKind::ConservedE);
                assert!(record.time > 0.0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn scan_guard_and_shape() {
        let evo = EvolutionConfig::new(2e-2, 0.4, 10);
        assert!(lambda_scan(&[1.5], &packet(), &evo, MonitorConfig::default(), 1.0).is_err());
        let out = lambda_scan(&[-0.5, 0.0, 0.5], &packet(), &evo, MonitorConfig::default(), 1.0).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|e| !e.violated && e.max_r2 < e.ceiling));
        assert_eq!(out[1].lambda, 0.0);
    }
}
