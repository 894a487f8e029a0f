pub mod ehrenfest;
pub mod evolve;
pub mod scan;
pub mod spectrum;
pub mod verify;

use serde::Serialize;

use crate::report::Recorder;
use crate::{AppError, Context};

pub const PRESETS: &[(&str, &str)] =
    &[("fig1", "ehrenfest"), ("fig2", "evolve"), ("fig3", "scan"), ("fig4", "spectrum")];

pub fn unknown_preset(name: &str, subcommand: &str) -> AppError {
    let valid: Vec<&str> = PRESETS.iter().filter(|(_, s)| *s == subcommand).map(|(p, _)| *p).collect();
    if valid.is_empty() {
        AppError::Usage(format!("`{subcommand}` has no presets (got {name})"))
    } else {
        AppError::Usage(format!("unknown preset {name} for `{subcommand}`; expected one of {}", valid.join(", ")))
    }
}

pub fn recorder<P: Serialize>(ctx: &Context, subcommand: &str, params: &P) -> Result<Recorder, AppError> {
    let config = serde_json::to_value(params).map_err(|e| AppError::Runtime(e.to_string()))?;
    let mut config = config;
    if let Some(obj) = config.as_object_mut() {
        obj.insert("output_dir".into(), ctx.output_dir.display().to_string().into());
    }
    Ok(Recorder::new(subcommand, ctx.preset.clone(), config, ctx.output_dir.clone()))
}

pub fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}
