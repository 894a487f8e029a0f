use clap::Args;
use serde::{Deserialize, Serialize};

use ghostbound::ehrenfest::{integrate, IntegratorConfig};
use ghostbound::model::bound_ceiling;
use ghostbound::{Coupling, PhasePoint};

use super::{recorder, unknown_preset, usage};
use crate::report::Check;
use crate::{config, AppError, Context};

#[derive(Debug, Clone, Args, Serialize)]
pub struct Flags {
    /// fig1
    #[arg(long)]
    #[serde(skip)]
    pub preset: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub px: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub py: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Write every n-th step to the CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    pub x: f64,
    pub px: f64,
    pub y: f64,
    pub py: f64,
    pub dt: f64,
    pub t_final: f64,
    pub sample_every: usize,
    /// Allowed `max |H(t) - H(0)|` and likewise for `C`.
    pub drift_tolerance: f64,
    /// Slack on the classical moment ceiling.
    pub bound_slack: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            lambda: 1.0 / 3.0,
            x: 1.0,
            px: 0.0,
            y: 0.5,
            py: 0.0,
            dt: 0.02,
            t_final: 100.0,
            sample_every: 1,
            drift_tolerance: 1e-7,
            bound_slack: 1e-6,
        }
    }
}

pub fn preset(name: &str) -> Result<Params, AppError> {
    match name {
        // RK4 with dt = 0.02 to t = 500; the start mirrors the wavepacket centre.
        "fig1" => Ok(Params { t_final: 500.0, ..Params::default() }),
        other => Err(unknown_preset(other, "ehrenfest")),
    }
}

pub fn resolve(ctx: &Context, flags: &Flags) -> Result<Params, AppError> {
    let base = match &ctx.preset {
        Some(name) => preset(name)?,
        None => Params::default(),
    };
    let p: Params = config::resolve(&base, &ctx.file_section, flags)?;
    if p.sample_every == 0 {
        return Err(usage("sample_every must be at least 1"));
    }
    Ok(p)
}

pub fn run(ctx: &Context, flags: &Flags) -> Result<bool, AppError> {
    let p = resolve(ctx, flags)?;
    let coupling = Coupling::new(p.lambda)?;
    let start = PhasePoint::new(p.x, p.px, p.y, p.py);
    let cfg = IntegratorConfig::rk4(p.dt, p.t_final);
    let mut rec = recorder(ctx, "ehrenfest", &p)?;

    let traj = match integrate(start, &cfg, coupling) {
        Ok(t) => t,
        Err(ghostbound::Error::Blowup { time, detail }) => {
            rec.check(Check::flag("finite orbit", false, format!("blew up at t = {time}: {detail}")));
            return rec.finish(ctx.threads);
        }
        Err(e) => return Err(e.into()),
    };

    let mut csv = rec.csv("ehrenfest.csv", &["t", "x", "px", "y", "py", "H", "C", "drift_H", "drift_C"])?;
    let (h0, c0) = (traj.h_series[0], traj.c_series[0]);
    for k in (0..traj.len()).step_by(p.sample_every) {
        let q = traj.points[k];
        let (h, c) = (traj.h_series[k], traj.c_series[k]);
        csv.floats(&[traj.times[k], q.x, q.px, q.y, q.py, h, c, h - h0, c - c0])?;
    }
    let path = csv.finish()?;
    rec.output(&path);

    let ceiling = bound_ceiling(start.second_moment(), coupling)?;
    rec.check(Check::at_most("H drift", traj.max_h_drift(), p.drift_tolerance));
    rec.check(Check::at_most("C drift", traj.max_c_drift(), p.drift_tolerance));
    rec.check(Check::at_most("classical moment bound", traj.max_second_moment(), ceiling + p.bound_slack));
    rec.metric("max_coordinate", traj.max_coordinate());
    rec.metric("moment_ceiling", ceiling);
    rec.metric("steps", traj.len() - 1);
    rec.finish(ctx.threads)
}
