use clap::Args;
use serde::{Deserialize, Serialize};

use ghostbound::commutator::{coefficient_sweep, fock_commutator_residual, poisson_sweep};
use ghostbound::Coupling;

use super::{recorder, unknown_preset, usage};
use crate::report::{float, Check};
use crate::{config, AppError, Context};

#[derive(Debug, Clone, Args, Serialize)]
pub struct Flags {
    #[arg(long)]
    #[serde(skip)]
    pub preset: Option<String>,
    /// Random points per coupling for the coefficient sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Half-width of the square the points are drawn from.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    /// Coupling(s) to check; repeat the flag for several.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_extent: Option<f64>,
    /// Also run the truncated Fock-space commutator check.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock_n_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock_margin: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub samples: usize,
    pub extent: f64,
    pub lambda: Vec<f64>,
    pub seed: u64,
    /// Coefficient residuals must stay below `tolerance * |lambda|`.
    pub tolerance: f64,
    pub bracket_samples: usize,
    pub bracket_extent: f64,
    pub bracket_tolerance: f64,
    pub fock: bool,
    pub fock_n_max: usize,
    pub fock_margin: usize,
    pub quad_order: usize,
    pub fock_tolerance: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            samples: 100_000,
            extent: 10.0,
            lambda: vec![1.0 / 3.0, -1.0 / 3.0, 0.8, -0.8],
            seed: 7,
            tolerance: 1e-10,
            bracket_samples: 10_000,
            bracket_extent: 5.0,
            bracket_tolerance: 1e-10,
            fock: false,
            fock_n_max: 21,
            fock_margin: 6,
            quad_order: 96,
            fock_tolerance: 1e-8,
        }
    }
}

pub fn resolve(ctx: &Context, flags: &Flags) -> Result<Params, AppError> {
    if let Some(p) = &ctx.preset {
        return Err(unknown_preset(p, "verify"));
    }
    let params: Params = config::resolve(&Params::default(), &ctx.file_section, flags)?;
    if params.lambda.is_empty() {
        return Err(usage("at least one --lambda is required"));
    }
    Ok(params)
}

pub fn run(ctx: &Context, flags: &Flags) -> Result<bool, AppError> {
    let p = resolve(ctx, flags)?;
    let mut rec = recorder(ctx, "verify", &p)?;
    let mut csv = rec.csv("verify.csv", &["check", "lambda", "samples", "max_residual", "limit", "passed"])?;

    for &lambda in &p.lambda {
        let coupling = Coupling::new(lambda)?;
        let sweep = coefficient_sweep(p.samples, p.extent, coupling, p.seed)?;
        let limit = p.tolerance * lambda.abs();
        let check = Check::at_most(format!("coefficients lambda={lambda}"), sweep.max_abs(), limit).with_detail(format!(
            "a_x {:e}, a_y {:e}, a_0 {:e}, worst at ({}, {})",
            sweep.max_a_x, sweep.max_a_y, sweep.max_a_0, sweep.worst_point.0, sweep.worst_point.1
        ));
        csv.row(["coefficients".into(), float(lambda), p.samples.to_string(), float(sweep.max_abs()), float(limit), check.passed.to_string()])?;
        rec.check(check);

        let bracket = poisson_sweep(p.bracket_samples, p.bracket_extent, coupling, p.seed)?;
        let check = Check::at_most(format!("poisson bracket lambda={lambda}"), bracket.max_abs, p.bracket_tolerance);
        csv.row([
            "poisson_bracket".into(),
            float(lambda),
            p.bracket_samples.to_string(),
            float(bracket.max_abs),
            float(p.bracket_tolerance),
            check.passed.to_string(),
        ])?;
        rec.check(check);

        if p.fock {
            let residual = fock_commutator_residual(p.fock_n_max, coupling, p.fock_margin, p.quad_order)?;
            let check = Check::at_most(format!("fock commutator lambda={lambda}"), residual, p.fock_tolerance)
                .with_detail(format!("n_max {}, margin {}, {} nodes", p.fock_n_max, p.fock_margin, p.quad_order));
            csv.row(["fock_commutator".into(), float(lambda), p.fock_n_max.to_string(), float(residual), float(p.fock_tolerance), check.passed.to_string()])?;
            rec.check(check);
        }
    }
    let path = csv.finish()?;
    rec.output(&path);
    let worst = rec.checks.iter().filter(|c| c.name.starts_with("coefficients")).map(|c| c.observed).fold(0.0, f64::max);
    rec.metric("max_coefficient_residual", worst);
    rec.finish(ctx.threads)
}
