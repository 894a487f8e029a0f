use clap::Args;
use serde::{Deserialize, Serialize};

use ghostbound::grid::lambda_scan;

use super::evolve::{PacketFlags, PacketParams};
use super::{recorder, unknown_preset, usage};
use crate::report::{float, Check};
use crate::{config, AppError, Context};

#[derive(Debug, Clone, Args, Serialize)]
pub struct Flags {
    /// fig3
    #[arg(long)]
    #[serde(skip)]
    pub preset: Option<String>,
    /// Explicit couplings; overrides the range when given.
    #[arg(long = "lambda", allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_step: Option<f64>,
    /// Sanity guard on |lambda|.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_lambda: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub packet: PacketFlags,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub lambdas: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
    pub max_abs_lambda: f64,
    #[serde(flatten)]
    pub packet: PacketParams,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            lambdas: vec![],
            lambda_min: -0.8,
            lambda_max: 0.8,
            lambda_step: 0.1,
            max_abs_lambda: 1.0,
            packet: PacketParams::default(),
        }
    }
}

impl Params {
    pub fn couplings(&self) -> Result<Vec<f64>, AppError> {
        if !self.lambdas.is_empty() {
            return Ok(self.lambdas.clone());
        }
        if !(self.lambda_step > 0.0) || !(self.lambda_max >= self.lambda_min) {
            return Err(usage(format!(
                "empty lambda range [{}, {}] step {}",
                self.lambda_min, self.lambda_max, self.lambda_step
            )));
        }
        let count = ((self.lambda_max - self.lambda_min) / self.lambda_step + 1e-9).floor() as usize + 1;
        // integer multiples keep the grid free of accumulated round-off
        Ok((0..count)
            .map(|k| self.lambda_min + k as f64 * self.lambda_step)
            .map(|l| if l.abs() < 1e-12 { 0.0 } else { l })
            .collect())
    }
}

pub fn preset(name: &str) -> Result<Params, AppError> {
    match name {
        "fig3" => Ok(Params { packet: PacketParams::fig2(), ..Params::default() }),
        other => Err(unknown_preset(other, "scan")),
    }
}

pub fn resolve(ctx: &Context, flags: &Flags) -> Result<Params, AppError> {
    let base = match &ctx.preset {
        Some(name) => preset(name)?,
        None => Params::default(),
    };
    config::resolve(&base, &ctx.file_section, flags)
}

pub fn run(ctx: &Context, flags: &Flags) -> Result<bool, AppError> {
    let p = resolve(ctx, flags)?;
    let lambdas = p.couplings()?;
    let evo = p.packet.evolution()?;
    let psi0 = p.packet.initial_state()?;
    let mut rec = recorder(ctx, "scan", &p)?;
    rec.metric("lambdas", &lambdas);

    let entries = lambda_scan(&lambdas, &psi0, &evo, p.packet.monitor(), p.max_abs_lambda)?;
    let mut csv = rec.csv("scan.csv", &["lambda", "max_r2", "ceiling", "violated", "max_moment_sum", "max_e_drift", "late_r2_slope"])?;
    for e in &entries {
        csv.row([
            float(e.lambda),
            float(e.max_r2),
            float(e.ceiling),
            e.violated.to_string(),
            float(e.max_moment_sum),
            float(e.max_e_drift),
            e.late_r2_slope.map(float).unwrap_or_default(),
        ])?;
        rec.check(
            Check::at_most(format!("lambda={} confined", e.lambda), e.max_r2, e.ceiling)
                .with_detail(format!("max moment sum {:.6}", e.max_moment_sum)),
        );
        rec.check(Check::flag(
            format!("lambda={} monitors", e.lambda),
            !e.violated,
            "norm, moment, sigma, <E> and boundary monitors",
        ));
    }
    let path = csv.finish()?;
    rec.output(&path);
    rec.finish(ctx.threads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_range_has_seventeen_points() {
        let l = Params::default().couplings().unwrap();
        assert_eq!(l.len(), 17);
        assert_eq!(l[0], -0.8);
        assert!((l[16] - 0.8).abs() < 1e-12);
        assert_eq!(l[8], 0.0);
    }

    #[test]
    fn explicit_list_wins() {
        let p = Params { lambdas: vec![0.5, -0.5], ..Params::default() };
        assert_eq!(p.couplings().unwrap(), vec![0.5, -0.5]);
    }
}
