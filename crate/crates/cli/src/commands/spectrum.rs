use clap::Args;
use serde::{Deserialize, Serialize};

use ghostbound::fock::{
    build_hamiltonian, diagonalize, eigenstate_density, max_overlap_state, poisson_density, spacing_statistics,
    wigner_density, FockBasis, SpacingMode, SpacingOptions, SpacingStats,
};
use ghostbound::Coupling;

use super::{recorder, unknown_preset, usage};
use crate::report::{float, Check, Recorder};
use crate::{config, AppError, Context};

#[derive(Debug, Clone, Args, Serialize)]
pub struct Flags {
    /// fig4
    #[arg(long)]
    #[serde(skip)]
    pub preset: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    /// intra, global or both.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Degree of the staircase polynomial used by global unfolding.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// Write eigenstate density grids (default true).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub densities: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub n_max: usize,
    pub lambda: f64,
    pub quad_order: usize,
    pub mode: String,
    pub degree: usize,
    pub bins: usize,
    pub histogram_max: f64,
    pub densities: bool,
    /// `[n_x, n_y]` basis states whose best-matching eigenstates are imaged.
    pub references: Vec<[usize; 2]>,
    pub density_extent: f64,
    pub density_points: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n_max: 21,
            lambda: 1.0 / 3.0,
            quad_order: 96,
            mode: "both".into(),
            degree: 7,
            bins: 40,
            histogram_max: 4.0,
            densities: true,
            references: vec![[0, 0], [1, 0], [0, 1]],
            density_extent: 5.0,
            density_points: 101,
        }
    }
}

pub fn preset(name: &str) -> Result<Params, AppError> {
    match name {
        "fig4" => Ok(Params::default()),
        other => Err(unknown_preset(other, "spectrum")),
    }
}

pub fn resolve(ctx: &Context, flags: &Flags) -> Result<Params, AppError> {
    let base = match &ctx.preset {
        Some(name) => preset(name)?,
        None => Params::default(),
    };
    let p: Params = config::resolve(&base, &ctx.file_section, flags)?;
    if !matches!(p.mode.as_str(), "intra" | "global" | "both") {
        return Err(usage(format!("mode must be intra, global or both, got {}", p.mode)));
    }
    if p.density_points < 2 {
        return Err(usage("density_points must be at least 2"));
    }
    Ok(p)
}

fn write_stats(rec: &mut Recorder, tag: &str, stats: &SpacingStats) -> Result<(), AppError> {
    let mut csv = rec.csv(&format!("spacings_{tag}.csv"), &["index", "unfolded_spacing"])?;
    for (i, s) in stats.unfolded_spacings.iter().enumerate() {
        csv.row([i.to_string(), float(*s)])?;
    }
    let path = csv.finish()?;
    rec.output(&path);

    let mut csv = rec.csv(&format!("histogram_{tag}.csv"), &["bin_lo", "bin_hi", "count", "density", "poisson", "wigner"])?;
    let dens = stats.histogram.density();
    for (k, w) in stats.histogram.edges.windows(2).enumerate() {
        let mid = 0.5 * (w[0] + w[1]);
        csv.row([
            float(w[0]),
            float(w[1]),
            stats.histogram.counts[k].to_string(),
            float(dens[k]),
            float(poisson_density(mid)),
            float(wigner_density(mid)),
        ])?;
    }
    let path = csv.finish()?;
    rec.output(&path);

    rec.metric(&format!("{tag}_ks_poisson"), stats.ks_poisson);
    rec.metric(&format!("{tag}_ks_wigner"), stats.ks_wigner);
    rec.metric(&format!("{tag}_preferred"), if stats.prefers_wigner() { "wigner-dyson" } else { "poisson" });
    rec.metric(&format!("{tag}_spacings"), stats.unfolded_spacings.len());
    println!(
        "{tag} spacings: ks_poisson {:.4}, ks_wigner {:.4} ({} spacings)",
        stats.ks_poisson,
        stats.ks_wigner,
        stats.unfolded_spacings.len()
    );
    Ok(())
}

pub fn run(ctx: &Context, flags: &Flags) -> Result<bool, AppError> {
    let p = resolve(ctx, flags)?;
    let coupling = Coupling::new(p.lambda)?;
    let basis = FockBasis::new(p.n_max);
    let mut rec = recorder(ctx, "spectrum", &p)?;

    let h = build_hamiltonian(&basis, coupling, p.quad_order)?;
    rec.check(Check::at_most("hamiltonian symmetry", h.symmetry_defect(), 1e-12));
    let spec = diagonalize(&h)?;

    let mut csv = rec.csv("eigenvalues.csv", &["index", "eigenvalue", "multiplet", "offset"])?;
    for (k, (&e, &l)) in spec.eigenvalues.iter().zip(&spec.multiplet_labels).enumerate() {
        csv.row([k.to_string(), float(e), l.to_string(), float(e - l as f64)])?;
    }
    let path = csv.finish()?;
    rec.output(&path);

    rec.check(Check::flag(
        "eigenvalue count",
        spec.len() == basis.size(),
        format!("{} eigenvalues for {} basis states", spec.len(), basis.size()),
    ));
    rec.check(
        Check::at_most("distance from nearest integer", spec.max_label_offset(), 0.25)
            .with_detail(format!("{} unresolved", spec.unresolved.len())),
    );
    let multiplets_intact = spec
        .multiplicities()
        .iter()
        .all(|(&k, &count)| k.unsigned_abs() as usize <= p.n_max && count == p.n_max + 1 - k.unsigned_abs() as usize);
    rec.check(Check::flag("multiplicities n_max+1-|k|", multiplets_intact, "count of states per integer label"));
    if p.lambda == 0.0 {
        let exact = spec.eigenvalues.iter().zip(&spec.multiplet_labels).all(|(&e, &l)| e == l as f64);
        rec.check(Check::flag("free ladder is exact", exact, "eigenvalues equal n_x - n_y"));
    } else {
        let free = diagonalize(&build_hamiltonian(&basis, Coupling::free(), p.quad_order)?)?;
        let mut shifts: Vec<f64> = spec.sorted_shifts(&free)?.iter().map(|s| s.abs()).collect();
        shifts.sort_by(f64::total_cmp);
        rec.metric("sorted_shift_max", shifts.last().copied().unwrap_or(0.0));
        rec.metric("sorted_shift_median", shifts[shifts.len() / 2]);

        let modes: &[(&str, SpacingMode)] = match p.mode.as_str() {
            "intra" => &[("intra", SpacingMode::IntraMultiplet)],
            "global" => &[("global", SpacingMode::Global)],
            _ => &[("intra", SpacingMode::IntraMultiplet), ("global", SpacingMode::Global)],
        };
        for &(tag, mode) in modes {
            let opts = SpacingOptions { staircase_degree: p.degree, bins: p.bins, histogram_max: p.histogram_max, ..SpacingOptions::new(mode) };
            let stats = spacing_statistics(&spec, &opts)?;
            write_stats(&mut rec, tag, &stats)?;
        }
    }

    if p.densities {
        let step = 2.0 * p.density_extent / (p.density_points - 1) as f64;
        let axis: Vec<f64> = (0..p.density_points).map(|i| -p.density_extent + step * i as f64).collect();
        let mut meta = Vec::new();
        for &[nx, ny] in &p.references {
            let state = max_overlap_state(&spec, (nx, ny))?;
            let rho = eigenstate_density(&spec, (nx, ny), &axis, &axis)?;
            let name = format!("density_{nx}_{ny}.csv");
            let mut header = vec!["x\\y".to_string()];
            header.extend(axis.iter().map(|&y| float(y)));
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut csv = rec.csv(&name, &header_refs)?;
            for (i, &x) in axis.iter().enumerate() {
                let mut row = vec![float(x)];
                row.extend(rho.row(i).iter().map(|&v| float(v)));
                csv.row(row)?;
            }
            let path = csv.finish()?;
            rec.output(&path);
            meta.push(serde_json::json!({
                "reference": [nx, ny],
                "file": name,
                "state_index": state,
                "eigenvalue": spec.eigenvalues[state],
                "overlap": spec.eigenvectors[[basis.index(nx, ny).expect("checked"), state]].abs(),
            }));
        }
        let sidecar = serde_json::json!({
            "n_max": p.n_max,
            "lambda": p.lambda,
            "quad_order": p.quad_order,
            "axis": { "min": -p.density_extent, "max": p.density_extent, "points": p.density_points },
            "layout": "row i is x_i, column j is y_j",
            "states": meta,
        });
        let path = rec.path("density_meta.json");
        std::fs::write(&path, serde_json::to_string_pretty(&sidecar).expect("json")).map_err(|e| AppError::io(&path, e))?;
        rec.output(&path);
    }

    rec.metric("unresolved", &spec.unresolved);
    rec.metric("max_label_offset", spec.max_label_offset());
    rec.finish(ctx.threads)
}
