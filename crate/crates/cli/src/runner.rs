//! The four run modes.

use std::path::Path;

use kanewave_core::dispersion::{ModeKind, ModeSet};
use kanewave_core::ensemble::{integrate_with, solve_node, EnsembleConfig, EnsembleResult, NodeCache, NodeSample};
use kanewave_core::observables::current_profile;
use kanewave_core::potential::PiecewisePotential;
use kanewave_core::scattering::{build_problem, solve_on_grid, Grid, ScatteringSolution};
use kanewave_core::Complex64;
use rayon::prelude::*;

use crate::config::{Mode, PotentialSpec, RunConfig, Statistics};
use crate::error::{CliError, Result};
use crate::output::{Csv, OutputDir, Table};

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<String>,
    /// Some ensemble node failed or the node budget ran out.
    pub partial: bool,
}

/// Runs `config` and writes everything below `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut dir = OutputDir::create(out)?;
    // The echo goes first so that even a failed run records its inputs.
    dir.write("effective_config.toml", &config.to_toml())?;
    let result = match config.mode {
        Mode::Scatter => run_scatter(config, &mut dir),
        Mode::Sweep => run_sweep(config, &mut dir),
        Mode::Ensemble => run_ensemble(config, &mut dir),
        Mode::Compare => run_compare(config, &mut dir),
    };
    let (partial, notes) = match &result {
        Ok(r) => (r.partial, r.notes.clone()),
        Err(e) => (true, vec![e.to_string()]),
    };
    let mut manifest = Table::new();
    manifest
        .set("version", env!("CARGO_PKG_VERSION"))
        .set("mode", mode_name(config.mode))
        .set(
            "status",
            match (&result, partial) {
                (Err(_), _) => "failed",
                (Ok(_), true) => "partial",
                (Ok(_), false) => "complete",
            },
        );
    let mut files: Vec<String> = dir.files().to_vec();
    files.push("manifest.toml".into());
    manifest.set("files", files.clone());
    if !notes.is_empty() {
        manifest.set("notes", notes);
    }
    dir.write_toml("manifest.toml", &manifest.into_inner())?;
    result.map(|r| Outcome {
        files,
        partial: r.partial,
    })
}

struct ModeResult {
    partial: bool,
    notes: Vec<String>,
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Scatter => "scatter",
        Mode::Sweep => "sweep",
        Mode::Ensemble => "ensemble",
        Mode::Compare => "compare",
    }
}

fn complex_table(values: &[Complex64]) -> Table {
    let mut t = Table::new();
    t.floats("re", &values.iter().map(|z| z.re).collect::<Vec<_>>());
    t.floats("im", &values.iter().map(|z| z.im).collect::<Vec<_>>());
    t
}

fn mode_table(set: &ModeSet) -> Table {
    let mut t = complex_table(&set.wave_vectors());
    let kinds: Vec<&str> = set
        .modes()
        .iter()
        .map(|m| match m.kind {
            ModeKind::Propagating => "propagating",
            ModeKind::Evanescent => "evanescent",
        })
        .collect();
    t.set("kind", kinds).float("kinetic_energy", set.kinetic_energy());
    t
}

fn solve_one(config: &RunConfig, grid: &Grid, k: f64) -> Result<ScatteringSolution> {
    let problem = build_problem(config.model(config.model.order)?, config.potential()?, k)?;
    Ok(solve_on_grid(&problem, grid, &config.solver_options())?)
}

fn grid(config: &RunConfig, potential: &PiecewisePotential) -> Result<Grid> {
    Ok(Grid::new(potential, &config.solver_options().grid)?)
}

fn run_scatter(config: &RunConfig, dir: &mut OutputDir) -> Result<ModeResult> {
    let k = config.scatter.expect("validated").k;
    let potential = config.potential()?;
    let grid = grid(config, &potential)?;
    let sol = solve_one(config, &grid, k)?;
    let profile = current_profile(&sol)?;

    let mut csv = Csv::new(&["x_nm", "re_psi", "im_psi", "density", "current"]);
    let table = sol.table();
    for i in 0..table.len() {
        let psi = table.psi(i);
        csv.row(&[table.x()[i], psi.re, psi.im, psi.norm_sqr(), profile.current[i]]);
    }
    dir.write_csv("wavefunction.csv", &csv)?;

    let p = sol.problem();
    let mut s = Table::new();
    s.set("order", config.model.order as i64)
        .float("incident_k", k)
        .float("energy", p.energy())
        .sub("left_modes", mode_table(p.left_modes()))
        .sub("right_modes", mode_table(p.right_modes()))
        .sub("reflection", complex_table(sol.reflection()))
        .sub("transmission", complex_table(&sol.transmission()))
        .sub("transmission_edge", complex_table(sol.transmission_edge()))
        .float("j_inc", profile.boundary.incident)
        .float("j_refl", profile.boundary.reflected)
        .float("j_transm", profile.boundary.transmitted)
        .float("t2", profile.t2)
        .float("r2", profile.r2)
        .float("conservation_residual", profile.conservation_residual)
        .float("flux_residual", profile.flux_residual)
        .float("condition", sol.condition())
        .set("method", format!("{:?}", sol.method()).to_lowercase());
    dir.write_toml("summary.toml", &s.into_inner())?;
    Ok(ModeResult {
        partial: false,
        notes: Vec::new(),
    })
}

fn run_sweep(config: &RunConfig, dir: &mut OutputDir) -> Result<ModeResult> {
    let sw = config.sweep.expect("validated");
    let potential = config.potential()?;
    let grid = grid(config, &potential)?;
    let ks: Vec<f64> = (0..sw.points)
        .map(|i| {
            if sw.points == 1 {
                sw.k_min
            } else {
                sw.k_min + (sw.k_max - sw.k_min) * i as f64 / (sw.points - 1) as f64
            }
        })
        .collect();
    let rows: Vec<Result<[f64; 7]>> = ks
        .par_iter()
        .map(|&k| {
            let sol = solve_one(config, &grid, k)?;
            let p = current_profile(&sol)?;
            let b = p.boundary;
            Ok([k, b.incident, b.reflected, b.transmitted, p.t2, p.r2, b.balance()])
        })
        .collect();

    let mut csv = Csv::new(&["k", "J_inc", "J_refl", "J_transm", "T2", "R2", "balance", "status"]);
    let mut notes = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, row) in ks.iter().zip(&rows) {
        match row {
            Ok(r) => {
                worst = worst.max(r[6].abs() / r[1].abs());
                csv.row_with(r, &["ok"]);
            }
            Err(e) => {
                let nan = f64::NAN;
                csv.row_with(&[*k, nan, nan, nan, nan, nan, nan], &["failed"]);
                notes.push(format!("k = {k}: {e}"));
            }
        }
    }
    dir.write_csv("sweep.csv", &csv)?;
    let mut s = Table::new();
    s.set("order", config.model.order as i64)
        .set("points", sw.points as i64)
        .set("failed_points", notes.len() as i64)
        .float("max_relative_balance", worst);
    dir.write_toml("summary.toml", &s.into_inner())?;
    Ok(ModeResult {
        partial: !notes.is_empty(),
        notes,
    })
}

/// Evaluates a batch of nodes on the rayon pool, keeping the input order.
pub fn parallel_evaluator<'a>(config: &'a EnsembleConfig, grid: &'a Grid) -> impl FnMut(&[f64]) -> Vec<kanewave_core::Result<NodeSample>> + 'a {
    move |ks: &[f64]| ks.par_iter().map(|&k| solve_node(config, grid, k)).collect()
}

fn ensemble_files(
    dir: &mut OutputDir,
    tag: &str,
    config: &EnsembleConfig,
    result: &EnsembleResult,
) -> Result<Table> {
    let mut dens = Csv::new(&["x_nm", "n"]);
    for (x, n) in result.x.iter().zip(&result.density) {
        dens.row(&[*x, *n]);
    }
    dir.write_csv(&format!("density{tag}.csv"), &dens)?;

    let mut nodes = Csv::new(&["k_x", "J_kx", "T2", "occupation", "weight", "residual", "flagged"]);
    for d in &result.nodes {
        nodes.row_with(
            &[d.k_x, d.transmitted_current, d.t2, d.occupation, d.weight, d.residual],
            &[if d.error.is_some() { "failed" } else if d.flagged { "flagged" } else { "ok" }],
        );
    }
    dir.write_csv(&format!("current_kx{tag}.csv"), &nodes)?;

    let (peak_x, peak_n) = peak(&result.x, &result.density, f64::NEG_INFINITY, f64::INFINITY);
    let mut s = Table::new();
    s.set("order", config.model.order() as i64)
        .float("fermi_energy", config.params().fermi_energy)
        .float("current", result.current)
        .float("current_error", result.current_error)
        .float("current_positive_kx", result.current_by_sign.0)
        .float("current_negative_kx", result.current_by_sign.1)
        .float("density_error", result.density_error)
        .float("sigma_error", result.sigma_error)
        .float("kx_max", result.support.0)
        .float("sigma_max", result.support.1)
        .float("peak_x", peak_x)
        .float("peak_density", peak_n)
        .set("nodes", result.nodes.len() as i64)
        .set("failed_nodes", result.failed_nodes as i64)
        .set("flagged_nodes", result.flagged_nodes as i64)
        .set("budget_exhausted", result.budget_exhausted)
        .set("partial", result.is_partial());
    if let Some(w) = result.window_limit {
        s.float("window_limit", w);
    }
    Ok(s)
}

/// `(x, n)` at the largest density with `lo ≤ x ≤ hi`.
fn peak(x: &[f64], n: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    x.iter()
        .zip(n)
        .filter(|(x, _)| (lo..=hi).contains(*x))
        .fold((f64::NAN, f64::NEG_INFINITY), |best, (&x, &v)| if v > best.1 { (x, v) } else { best })
}

fn run_ensemble(config: &RunConfig, dir: &mut OutputDir) -> Result<ModeResult> {
    let stats = config.statistics.dispersion;
    let ens = config.ensemble(config.model.order, stats)?;
    let grid = ens.grid()?;
    let mut eval = parallel_evaluator(&ens, &grid);
    let result = integrate_with(&ens, &mut eval, &mut NodeCache::new())?;
    let mut s = ensemble_files(dir, "", &ens, &result)?;
    s.set("statistics", stats.name());
    dir.write_toml("summary.toml", &s.into_inner())?;
    Ok(ModeResult {
        partial: result.is_partial(),
        notes: partial_notes("", &result),
    })
}

fn partial_notes(tag: &str, r: &EnsembleResult) -> Vec<String> {
    let mut notes = Vec::new();
    if r.failed_nodes > 0 {
        notes.push(format!("run{tag}: {} quadrature nodes failed and contribute zero", r.failed_nodes));
    }
    if r.budget_exhausted {
        notes.push(format!("run{tag}: node budget exhausted before the tolerance was met"));
    }
    notes
}

fn run_compare(config: &RunConfig, dir: &mut OutputDir) -> Result<ModeResult> {
    let cmp = config.compare.clone().expect("resolved");
    let well = match &config.potential {
        PotentialSpec::Rtd { a, .. } => Some((a[2], a[3])),
        PotentialSpec::Segments { .. } => None,
    };
    let mut summary = Table::new();
    let mut runs = Vec::new();
    let mut partial = false;
    let mut notes = Vec::new();
    for &order in &cmp.orders {
        // Node solves do not depend on the statistics, so one cache serves all.
        let mut cache = NodeCache::new();
        for &stats in &cmp.statistics {
            let ens = config.ensemble(order, stats)?;
            let grid = ens.grid()?;
            let mut eval = parallel_evaluator(&ens, &grid);
            let result = integrate_with(&ens, &mut eval, &mut cache)?;
            let tag = format!("_se{order}_{}", stats.name());
            let mut s = ensemble_files(dir, &tag, &ens, &result)?;
            s.set("statistics", stats.name());
            if let Some((lo, hi)) = well {
                let (x, n) = peak(&result.x, &result.density, lo, hi);
                s.float("well_peak_x", x).float("well_peak_density", n);
            }
            partial |= result.is_partial();
            notes.extend(partial_notes(&tag, &result));
            summary.sub(&format!("se{order}_{}", stats.name()), s);
            runs.push((order, stats, result.current));
        }
    }
    let mut ratios = Table::new();
    for &stats in &cmp.statistics {
        let of = |o: usize| runs.iter().find(|r| r.0 == o && r.1 == stats).map(|r| r.2);
        let base = cmp.orders[0];
        for &o in &cmp.orders[1..] {
            if let (Some(j), Some(j0)) = (of(o), of(base)) {
                ratios.float(&format!("se{o}_over_se{base}_{}", stats.name()), j / j0);
            }
        }
    }
    if cmp.statistics.contains(&Statistics::Parabolic) && cmp.statistics.contains(&Statistics::Kane) {
        for &o in &cmp.orders {
            let get = |s: Statistics| runs.iter().find(|r| r.0 == o && r.1 == s).map(|r| r.2).unwrap();
            ratios.float(&format!("se{o}_parabolic_over_kane"), get(Statistics::Parabolic) / get(Statistics::Kane));
        }
    }
    summary.sub("ratios", ratios);
    dir.write_toml("summary.toml", &summary.into_inner())?;
    Ok(ModeResult { partial, notes })
}

/// Fails with a validation error when the run has nothing to write to.
pub fn output_dir(config: &RunConfig, flag: Option<&Path>) -> Result<std::path::PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .ok_or_else(|| CliError::validation("output", "give an output directory with --out or `output = ...`"))
}
