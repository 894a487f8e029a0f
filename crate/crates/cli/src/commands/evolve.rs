use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use ghostbound::grid::{
    init_gaussian, load_checkpoint, run_monitored, save_checkpoint, MonitoredRun, StencilOrder, WidthConvention,
};
use ghostbound::{Coupling, EvolutionConfig, GridSpec, MonitorConfig, Wavefunction};

use super::{recorder, unknown_preset, usage};
use crate::report::{Check, Recorder};
use crate::{config, AppError, Context};

/// Grid, initial packet, stepping and monitor settings shared with `scan`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PacketFlags {
    /// Grid points per axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_extent: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// `amplitude`: psi ~ exp(-r^2/(2 sigma^2)); `density`: psi ~ exp(-r^2/(4 sigma^2)).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width_convention: Option<String>,
    /// Finite-difference accuracy: 2, 4 or 6.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stencil: Option<usize>,
    /// Steps between moment samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_disc: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketParams {
    pub n: usize,
    pub half_extent: f64,
    pub dt: f64,
    pub t_final: f64,
    pub x0: f64,
    pub y0: f64,
    pub sigma: f64,
    pub width_convention: String,
    pub stencil: usize,
    pub sample_every: usize,
    pub tol_disc: f64,
    pub tol_e: f64,
    pub norm_tol: f64,
    pub boundary_tol: f64,
}

impl Default for PacketParams {
    fn default() -> Self {
        Self {
            n: 128,
            half_extent: 10.0,
            dt: 5e-3,
            t_final: 200.0,
            x0: 1.0,
            y0: 0.5,
            sigma: 0.7,
            width_convention: "amplitude".into(),
            stencil: 6,
            sample_every: 100,
            tol_disc: 0.05,
            tol_e: 0.02,
            norm_tol: 1e-9,
            boundary_tol: 1e-8,
        }
    }
}

impl PacketParams {
    /// The printed wavepacket run; `sigma` is read as the density width.
    pub fn fig2() -> Self {
        Self { width_convention: "density".into(), ..Self::default() }
    }

    pub fn convention(&self) -> Result<WidthConvention, AppError> {
        match self.width_convention.as_str() {
            "amplitude" => Ok(WidthConvention::Amplitude),
            "density" => Ok(WidthConvention::Density),
            other => Err(usage(format!("width_convention must be amplitude or density, got {other}"))),
        }
    }

    pub fn stencil_order(&self) -> Result<StencilOrder, AppError> {
        StencilOrder::from_accuracy(self.stencil).ok_or_else(|| usage(format!("stencil must be 2, 4 or 6, got {}", self.stencil)))
    }

    pub fn evolution(&self) -> Result<EvolutionConfig, AppError> {
        let mut evo = EvolutionConfig::new(self.dt, self.t_final, self.sample_every);
        evo.order = self.stencil_order()?;
        evo.validate()?;
        Ok(evo)
    }

    pub fn monitor(&self) -> MonitorConfig {
        MonitorConfig { tol_disc: self.tol_disc, tol_e: self.tol_e, norm_tol: self.norm_tol, boundary_tol: self.boundary_tol }
    }

    pub fn initial_state(&self) -> Result<Wavefunction, AppError> {
        let grid = GridSpec::new(self.half_extent, self.n)?;
        Ok(init_gaussian(&grid, (self.x0, self.y0), self.sigma, self.convention()?)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Flags {
    /// fig2
    #[arg(long)]
    #[serde(skip)]
    pub preset: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Start from this checkpoint instead of a Gaussian.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<PathBuf>,
    /// Write the final state here.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub packet: PacketFlags,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    /// Empty for none.
    pub initial: PathBuf,
    /// Empty for none; relative paths are taken inside the output directory.
    pub checkpoint: PathBuf,
    #[serde(flatten)]
    pub packet: PacketParams,
}

impl Default for Params {
    fn default() -> Self {
        Self { lambda: 1.0 / 3.0, initial: PathBuf::new(), checkpoint: PathBuf::new(), packet: PacketParams::default() }
    }
}

pub fn preset(name: &str) -> Result<Params, AppError> {
    match name {
        "fig2" => Ok(Params { packet: PacketParams::fig2(), ..Params::default() }),
        other => Err(unknown_preset(other, "evolve")),
    }
}

pub fn resolve(ctx: &Context, flags: &Flags) -> Result<Params, AppError> {
    let base = match &ctx.preset {
        Some(name) => preset(name)?,
        None => Params::default(),
    };
    config::resolve(&base, &ctx.file_section, flags)
}

pub const MOMENT_HEADER: &[&str] = &[
    "time",
    "x2",
    "y2",
    "px2",
    "py2",
    "k2",
    "h_mean",
    "e_mean",
    "norm",
    "sigma",
    "boundary_prob",
    "r2",
    "moment_sum",
    "ceiling",
    "sigma_ceiling",
];

/// Adds the per-invariant checks of a monitored run to `rec`.
pub fn record_checks(rec: &mut Recorder, run: &MonitoredRun<f64>, packet: &PacketParams, label: &str) {
    let monitor = packet.monitor();
    rec.check(Check::at_most(format!("{label}norm drift"), run.max_norm_drift(), monitor.norm_tol));
    rec.check(Check::at_most(format!("{label}moment bound"), run.max_moment_sum(), run.ceiling + monitor.tol_disc));
    rec.check(Check::at_most(format!("{label}sigma bound"), run.max_sigma(), run.sigma_ceiling + monitor.tol_disc));
    rec.check(Check::at_most(format!("{label}<E> drift"), run.max_e_drift(), monitor.tol_e));
    rec.check(Check::at_most(format!("{label}boundary probability"), run.max_boundary_prob(), monitor.boundary_tol));
}

pub fn run(ctx: &Context, flags: &Flags) -> Result<bool, AppError> {
    let p = resolve(ctx, flags)?;
    let coupling = Coupling::new(p.lambda)?;
    let evo = p.packet.evolution()?;
    let psi0 = if p.initial.as_os_str().is_empty() {
        p.packet.initial_state()?
    } else {
        load_checkpoint(&p.initial)?
    };
    let mut rec = recorder(ctx, "evolve", &p)?;
    // a checkpoint carries its own grid; n and half_extent then go unused
    rec.metric("grid_points", psi0.grid.points_per_axis());
    rec.metric("grid_half_extent", psi0.grid.half_extent());

    let run = run_monitored(&psi0, &evo, coupling, p.packet.monitor(), |r, found| {
        log::info!("t = {:.3}: r2 = {:.6}, <E> = {:.9}", r.time, r.r2(), r.e_mean);
        for v in found {
            log::warn!("{} violated at t = {}: {:e} > {:e}", v.kind, v.time, v.observed, v.limit);
        }
        true
    })?;

    let mut csv = rec.csv("evolve.csv", MOMENT_HEADER)?;
    for r in &run.records {
        csv.floats(&[
            r.time,
            r.x2,
            r.y2,
            r.px2,
            r.py2,
            r.k2,
            r.h_mean,
            r.e_mean,
            r.norm,
            r.sigma,
            r.boundary_prob,
            r.r2(),
            r.moment_sum(),
            run.ceiling,
            run.sigma_ceiling,
        ])?;
    }
    let path = csv.finish()?;
    rec.output(&path);

    if !p.checkpoint.as_os_str().is_empty() {
        let path = rec.dir().join(&p.checkpoint);
        save_checkpoint(&run.final_state, &path)?;
        rec.output(&path);
    }

    record_checks(&mut rec, &run, &p.packet, "");
    rec.metric("max_r2", run.max_r2());
    rec.metric("min_r2", run.min_r2());
    rec.metric("ceiling", run.ceiling);
    rec.metric("sigma_ceiling", run.sigma_ceiling);
    rec.metric("max_e_drift", run.max_e_drift());
    rec.metric("width_convention", &p.packet.width_convention);
    if p.packet.t_final > 50.0 {
        rec.metric("r2_slope_after_50", run.r2_slope(50.0, p.packet.t_final));
    }
    if let Some(v) = run.violations.first() {
        rec.metric("first_violation", format!("{} at t = {}", v.kind, v.time));
    }
    rec.finish(ctx.threads)
}
