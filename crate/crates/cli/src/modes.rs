//! The four run modes. Each writes its files into `output_dir` and returns
//! the list of written paths plus any per-δ failures; a failure for one δ
//! does not stop the others.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use inertial_core::inertial::dynamical_phase;
use inertial_core::{
    distance_grid, distance_series, integrate_spinor_perturbed, initial_ground_state,
    linear_fit, normalized_distance_series, normalized_energy, validate, Comparison, FieldNoise,
    IntegratorConfig, ProtocolParams, Trajectory, ValidationReport,
};
use serde_json::{json, Value};

use crate::config::{Mode, RunConfig};
use crate::table::{write_table, Cell};
use crate::CliError;

pub const TRACE_COLUMNS: [&str; 10] = [
    "t",
    "theta",
    "mu",
    "Omega",
    "E_norm_exact",
    "E_norm_inertial",
    "E_norm_corrected",
    "E_norm_adiabatic",
    "D_inertial_exact",
    "D_inertial_exact_norm",
];
pub const GRID_COLUMNS: [&str; 3] = ["delta", "t", "D"];
pub const PHASE_SPACE_COLUMNS: [&str; 6] = ["delta", "label", "t", "h", "l", "c"];
pub const NOISE_COLUMNS: [&str; 3] = ["t", "E_norm_exact", "E_norm_noisy"];

/// δ/α₀ values shown in the phase-space figure.
pub const PHASE_SPACE_DELTAS: [f64; 2] = [-0.01, -0.05];

#[derive(Debug, Default)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl RunSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, delta_over_alpha0: f64, err: impl std::fmt::Display) -> Value {
        let msg = format!("delta_over_alpha0={delta_over_alpha0}: {err}");
        self.failures.push(msg.clone());
        json!({ "delta_over_alpha0": delta_over_alpha0, "error": msg })
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    cfg.check()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.clone(),
        source: e,
    })?;
    let mut summary = RunSummary::default();
    match cfg.mode {
        Mode::Simulate => simulate(cfg, &mut summary)?,
        Mode::Sweep => sweep(cfg, &mut summary)?,
        Mode::Figures => figures(cfg, &mut summary)?,
        Mode::Validate => validate_mode(cfg, &mut summary)?,
    }
    Ok(summary)
}

pub fn trace_file_name(prefix: &str, delta_over_alpha0: f64) -> String {
    format!("{prefix}_{delta_over_alpha0}.csv")
}

fn units(cfg: &RunConfig) -> Value {
    json!({
        "time": "ms",
        "frequency": "rad/ms (kHz inputs multiplied by 2*pi)",
        "gamma": cfg.gamma_unit.describe(),
        "delta": "delta_over_alpha0 is delta in units of alpha0",
        "distance": "D in energy units (rad/ms); D_norm divides by |Omega(0)|/2",
    })
}

fn integrator_meta(c: &IntegratorConfig) -> Value {
    json!({
        "method": c.method,
        "rel_tol": c.rel_tol,
        "abs_tol": c.abs_tol,
        "max_step": if c.max_step.is_finite() { json!(c.max_step) } else { Value::Null },
        "max_steps": c.max_steps,
        "spinor_phase_step": c.spinor_phase_step,
    })
}

fn validation_meta(report: &ValidationReport) -> Value {
    json!({
        "min_abs_mu": report.min_abs_mu,
        "max_abs_rabi": report.max_abs_rabi,
        "zero_crossing": report.zero_crossing,
        "upsilon": report.inertial,
        "problems": report.problems,
    })
}

fn write_json(path: &Path, value: &Value, summary: &mut RunSummary) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    summary.written.push(path.to_path_buf());
    Ok(())
}

fn energies(t: &Trajectory) -> Result<Vec<f64>, CliError> {
    Ok(normalized_energy(t)?.into_iter().map(|(_, e)| e).collect())
}

fn trace_rows(c: &Comparison) -> Result<Vec<Vec<Cell>>, CliError> {
    let exact = energies(&c.exact)?;
    let inertial = energies(&c.inertial)?;
    let corrected = energies(&c.corrected)?;
    let adiabatic = energies(&c.adiabatic)?;
    let d = distance_series(&c.inertial, &c.exact)?;
    let dn = normalized_distance_series(&c.inertial, &c.exact)?;
    Ok(c.exact
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s = p.sample;
            vec![
                s.t.into(),
                s.theta.into(),
                s.mu.into(),
                s.omega_rabi.into(),
                exact[i].into(),
                inertial[i].into(),
                corrected[i].into(),
                adiabatic[i].into(),
                d[i].1.into(),
                dn[i].1.into(),
            ]
        })
        .collect())
}

/// Runs all four trajectories for one δ and writes the trace CSV; returns
/// the per-δ meta entry.
fn trace(
    cfg: &RunConfig,
    prefix: &str,
    delta_over_alpha0: f64,
    summary: &mut RunSummary,
) -> Result<Value, CliError> {
    let params = cfg.protocol(delta_over_alpha0);
    let report = validate(&params);
    if !report.is_ok() {
        return Err(CliError::Config(report.problems.join("; ")));
    }
    let c = Comparison::run(&params, &cfg.integrator, &cfg.inertial())?;
    let path = cfg.output_dir.join(trace_file_name(prefix, delta_over_alpha0));
    write_table(&path, &TRACE_COLUMNS, &trace_rows(&c)?)?;
    summary.written.push(path.clone());

    let theta_final = c.exact.last().sample.theta;
    let periods = dynamical_phase(&params, params.t_final)?.abs() / TAU;
    let max_d = c
        .inertial_distance()
        .iter()
        .map(|x| x.1)
        .fold(0.0, f64::max);
    let mut entry = json!({
        "delta_over_alpha0": delta_over_alpha0,
        "file": file_name(&path),
        "params": params,
        "validation": validation_meta(&report),
        "theta_final": theta_final,
        "kappa_theta_periods": periods,
        "max_D_inertial_exact": max_d,
    });
    if cfg.noise_rel_sigma > 0.0 {
        entry["noise"] = noisy_run(cfg, &params, &c.exact, delta_over_alpha0, summary)?;
    }
    Ok(entry)
}

fn noisy_run(
    cfg: &RunConfig,
    params: &ProtocolParams,
    exact: &Trajectory,
    delta_over_alpha0: f64,
    summary: &mut RunSummary,
) -> Result<Value, CliError> {
    let (psi0, _) = initial_ground_state(params)?;
    let noise = FieldNoise::gaussian(params.n_samples - 1, cfg.noise_rel_sigma, cfg.seed);
    let noisy = integrate_spinor_perturbed(params, &psi0, &cfg.integrator, &noise)?;
    let clean = energies(exact)?;
    let perturbed = energies(&noisy)?;
    let rows: Vec<Vec<Cell>> = exact
        .points
        .iter()
        .zip(clean.iter().zip(&perturbed))
        .map(|(p, (a, b))| vec![p.sample.t.into(), (*a).into(), (*b).into()])
        .collect();
    let path = cfg.output_dir.join(trace_file_name("noise", delta_over_alpha0));
    write_table(&path, &NOISE_COLUMNS, &rows)?;
    summary.written.push(path.clone());
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(json!({
        "file": file_name(&path),
        "seed": cfg.seed,
        "rel_sigma": cfg.noise_rel_sigma,
        "max_E_norm_exact": max(&clean),
        "max_E_norm_noisy": max(&perturbed),
    }))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn traces(
    cfg: &RunConfig,
    prefix: &str,
    deltas: &[f64],
    summary: &mut RunSummary,
) -> Result<(Vec<Value>, Vec<Value>), CliError> {
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for &d in deltas {
        match trace(cfg, prefix, d, summary) {
            Ok(entry) => runs.push(entry),
            // a failed output directory write is fatal, anything else is per-δ
            Err(e @ CliError::Io { .. }) => return Err(e),
            Err(e) => failures.push(summary.fail(d, e)),
        }
    }
    Ok((runs, failures))
}

fn simulate(cfg: &RunConfig, summary: &mut RunSummary) -> Result<(), CliError> {
    let (runs, failures) = traces(cfg, "trace", &cfg.simulate_deltas(), summary)?;
    let meta = json!({
        "mode": "simulate",
        "units": units(cfg),
        "integrator": integrator_meta(&cfg.integrator),
        "inertial": cfg.inertial(),
        "runs": runs,
        "failures": failures,
    });
    write_json(&cfg.output_dir.join("meta.json"), &meta, summary)
}

/// Writes the long-format grid and returns its meta entry.
fn grid(
    cfg: &RunConfig,
    file: &str,
    deltas_over_alpha0: &[f64],
    summary: &mut RunSummary,
) -> Result<Value, CliError> {
    let base = cfg.protocol(0.0).with_samples(cfg.grid.n_time);
    let deltas: Vec<f64> = deltas_over_alpha0.iter().map(|d| d * base.alpha0).collect();
    let g = distance_grid(&base, &deltas, &cfg.integrator, &cfg.inertial());
    let mut rows = Vec::with_capacity(deltas.len() * g.time_grid.len());
    for (j, &d) in deltas_over_alpha0.iter().enumerate() {
        for (i, &t) in g.time_grid.iter().enumerate() {
            rows.push(vec![d.into(), t.into(), g.d[j][i].into()]);
        }
    }
    let path = cfg.output_dir.join(file);
    write_table(&path, &GRID_COLUMNS, &rows)?;
    summary.written.push(path.clone());

    let mut failures = Vec::new();
    for f in &g.failures {
        let d = f.delta / base.alpha0;
        eprintln!("warning: grid column delta_over_alpha0={d} failed: {}", f.message);
        failures.push(json!({ "delta_over_alpha0": d, "error": f.message }));
    }
    let finals = g.final_distances();
    let (xs, ys): (Vec<f64>, Vec<f64>) = deltas_over_alpha0
        .iter()
        .zip(&finals)
        .filter(|(d, v)| **d > 0.0 && v.is_finite())
        .map(|(d, v)| (*d, *v))
        .unzip();
    Ok(json!({
        "file": file_name(&path),
        "base_params": base,
        "delta_over_alpha0": deltas_over_alpha0,
        "n_time": g.time_grid.len(),
        "final_D": finals.iter().map(|x| if x.is_finite() { json!(x) } else { Value::Null }).collect::<Vec<_>>(),
        "fit_final_D_vs_positive_delta": linear_fit(&xs, &ys).ok(),
        "failures": failures,
    }))
}

fn sweep(cfg: &RunConfig, summary: &mut RunSummary) -> Result<(), CliError> {
    let entry = grid(cfg, "distance_grid.csv", &cfg.sweep_deltas(), summary)?;
    let meta = json!({
        "mode": "sweep",
        "units": units(cfg),
        "integrator": integrator_meta(&cfg.integrator),
        "inertial": cfg.inertial(),
        "grid": entry,
    });
    write_json(&cfg.output_dir.join("grid_meta.json"), &meta, summary)
}

fn phase_space(cfg: &RunConfig, summary: &mut RunSummary) -> Result<Vec<Value>, CliError> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &d in &PHASE_SPACE_DELTAS {
        let params = cfg.protocol(d);
        let c = match Comparison::run(&params, &cfg.integrator, &cfg.inertial()) {
            Ok(c) => c,
            Err(e) => {
                failures.push(summary.fail(d, e));
                continue;
            }
        };
        for (label, traj) in [
            ("exact", &c.exact),
            ("inertial", &c.inertial),
            ("adiabatic", &c.adiabatic),
        ] {
            for p in &traj.points {
                rows.push(vec![
                    d.into(),
                    label.into(),
                    p.sample.t.into(),
                    p.state.h.into(),
                    p.state.l.into(),
                    p.state.c.into(),
                ]);
            }
        }
    }
    let path = cfg.output_dir.join("fig4_trajectories.csv");
    write_table(&path, &PHASE_SPACE_COLUMNS, &rows)?;
    summary.written.push(path);
    Ok(failures)
}

fn figures(cfg: &RunConfig, summary: &mut RunSummary) -> Result<(), CliError> {
    let (runs, mut failures) = traces(cfg, "fig2", &cfg.figure_deltas(), summary)?;
    let grid_entry = grid(cfg, "fig3_grid.csv", &cfg.grid.deltas_over_alpha0(), summary)?;
    failures.extend(phase_space(cfg, summary)?);
    let meta = json!({
        "mode": "figures",
        "units": units(cfg),
        "integrator": integrator_meta(&cfg.integrator),
        "inertial": cfg.inertial(),
        "fig2": runs,
        "fig3": grid_entry,
        "fig4": { "file": "fig4_trajectories.csv", "delta_over_alpha0": PHASE_SPACE_DELTAS },
        "failures": failures,
    });
    write_json(&cfg.output_dir.join("meta.json"), &meta, summary)
}

fn validate_mode(cfg: &RunConfig, summary: &mut RunSummary) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for d in cfg.simulate_deltas() {
        let params = cfg.protocol(d);
        let report = validate(&params);
        if !report.is_ok() {
            summary.fail(d, report.problems.join("; "));
        }
        println!(
            "delta_over_alpha0={d}: {} (upsilon={})",
            if report.is_ok() { "ok" } else { "invalid" },
            report
                .inertial
                .map(|r| format!("{:e}", r.upsilon))
                .unwrap_or_else(|| "n/a".into())
        );
        reports.push(json!({
            "delta_over_alpha0": d,
            "params": params,
            "validation": validation_meta(&report),
        }));
    }
    let meta = json!({
        "mode": "validate",
        "units": units(cfg),
        "integrator": integrator_meta(&cfg.integrator),
        "runs": reports,
    });
    write_json(&cfg.output_dir.join("validate.json"), &meta, summary)
}
