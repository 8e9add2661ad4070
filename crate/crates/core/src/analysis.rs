//! Trajectory comparisons: normalized energy, Euclidean distance in
//! (⟨Ĥ⟩, ⟨L̂⟩, ⟨Ĉ⟩), (δ, t) distance grids and line fits.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{initial_ground_state, integrate_exact, IntegratorConfig};
use crate::inertial::{
    adiabatic_reference, corrected_propagate, inertial_propagate, InertialConfig,
};
use crate::protocol::ProtocolParams;
use crate::trajectory::Trajectory;

pub fn normalized_energy(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let e0 = traj.initial_energy;
    if e0.abs() <= 1e-14 {
        return Err(Error::ZeroInitialEnergy(e0));
    }
    Ok(traj.points.iter().map(|p| (p.sample.t, p.state.h / e0)).collect())
}

fn check_same_grid(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!(
            "{} has {} samples, {} has {}",
            a.label,
            a.len(),
            b.label,
            b.len()
        )));
    }
    if let Some((i, _)) = a
        .points
        .iter()
        .zip(&b.points)
        .enumerate()
        .find(|(_, (p, q))| p.sample.t != q.sample.t)
    {
        return Err(Error::GridMismatch(format!("sample {i} times differ")));
    }
    Ok(())
}

/// `D(t) = ‖v_a(t) − v_b(t)‖₂` over (h, l, c).
pub fn distance_series(a: &Trajectory, b: &Trajectory) -> Result<Vec<(f64, f64)>> {
    check_same_grid(a, b)?;
    Ok(a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| (p.sample.t, p.state.distance(&q.state)))
        .collect())
}

/// [`distance_series`] divided by `|Ω(0)|/2`.
pub fn normalized_distance_series(a: &Trajectory, b: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let scale = 0.5 * a.points[0].sample.omega_rabi.abs();
    Ok(distance_series(a, b)?
        .into_iter()
        .map(|(t, d)| (t, d / scale))
        .collect())
}

/// Exact, inertial, corrected and adiabatic trajectories for one protocol,
/// all started from the ground state of `Ĥ(0)`. The exact route follows
/// `integrator.method`.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub params: ProtocolParams,
    pub exact: Trajectory,
    pub inertial: Trajectory,
    pub corrected: Trajectory,
    pub adiabatic: Trajectory,
}

impl Comparison {
    pub fn run(
        params: &ProtocolParams,
        integrator: &IntegratorConfig,
        inertial: &InertialConfig,
    ) -> Result<Self> {
        let (_, v0) = initial_ground_state(params)?;
        Ok(Self {
            params: *params,
            exact: integrate_exact(params, integrator)?,
            inertial: inertial_propagate(params, &v0, inertial)?,
            corrected: corrected_propagate(params, &v0)?,
            adiabatic: adiabatic_reference(params, &v0)?,
        })
    }

    pub fn inertial_distance(&self) -> Vec<(f64, f64)> {
        distance_series(&self.inertial, &self.exact).expect("trajectories share the grid")
    }

    pub fn corrected_distance(&self) -> Vec<(f64, f64)> {
        distance_series(&self.corrected, &self.exact).expect("trajectories share the grid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub delta: f64,
    pub message: String,
}

/// `d[j][i]` is D(inertial, exact) at `delta_values[j]`, `time_grid[i]`;
/// failed columns are NaN and listed in `failures`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceGrid {
    pub delta_values: Vec<f64>,
    pub time_grid: Vec<f64>,
    pub d: Vec<Vec<f64>>,
    pub failures: Vec<CellFailure>,
    pub base_params: ProtocolParams,
}

impl DistanceGrid {
    pub fn column(&self, delta_index: usize) -> &[f64] {
        &self.d[delta_index]
    }

    pub fn final_distances(&self) -> Vec<f64> {
        self.d.iter().map(|c| *c.last().unwrap_or(&f64::NAN)).collect()
    }
}

fn grid_column(
    params: &ProtocolParams,
    integrator: &IntegratorConfig,
    inertial: &InertialConfig,
) -> Result<Vec<f64>> {
    let (_, v0) = initial_ground_state(params)?;
    let exact = integrate_exact(params, integrator)?;
    let approx = inertial_propagate(params, &v0, inertial)?;
    Ok(distance_series(&approx, &exact)?
        .into_iter()
        .map(|(_, d)| d)
        .collect())
}

/// Runs exact and inertial propagation for every δ (in parallel) on the
/// grid of `base`.
pub fn distance_grid(
    base: &ProtocolParams,
    deltas: &[f64],
    integrator: &IntegratorConfig,
    inertial: &InertialConfig,
) -> DistanceGrid {
    let time_grid = base.time_grid();
    let columns: Vec<Result<Vec<f64>>> = deltas
        .par_iter()
        .map(|&delta| grid_column(&base.with_delta(delta), integrator, inertial))
        .collect();
    let mut failures = Vec::new();
    let d = columns
        .into_iter()
        .zip(deltas)
        .map(|(col, &delta)| match col {
            Ok(c) => c,
            Err(e) => {
                failures.push(CellFailure {
                    delta,
                    message: e.to_string(),
                });
                vec![f64::NAN; time_grid.len()]
            }
        })
        .collect();
    DistanceGrid {
        delta_values: deltas.to_vec(),
        time_grid,
        d,
        failures,
        base_params: *base,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateInput(format!(
            "{} x values vs {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateInput("need at least 3 points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("all x values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSpaceRow {
    pub label: String,
    pub t: f64,
    pub h: f64,
    pub l: f64,
    pub c: f64,
}

/// Long-format `(label, t, h, l, c)` rows; all trajectories must share a grid.
pub fn phase_space_export(trajs: &[&Trajectory]) -> Result<Vec<PhaseSpaceRow>> {
    if let Some(first) = trajs.first() {
        for t in &trajs[1..] {
            check_same_grid(first, t)?;
        }
    }
    Ok(trajs
        .iter()
        .flat_map(|tr| {
            tr.points.iter().map(|p| PhaseSpaceRow {
                label: tr.label.to_string(),
                t: p.sample.t,
                h: p.state.h,
                l: p.state.l,
                c: p.state.c,
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Max,
    Min,
}

/// Interior local extrema of a sampled series.
pub fn extrema(values: &[f64]) -> Vec<(usize, ExtremumKind)> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if b > a && b >= c {
            out.push((i, ExtremumKind::Max));
        } else if b < a && b <= c {
            out.push((i, ExtremumKind::Min));
        }
    }
    out
}

/// For every extremum of `reference`, the index distance to the nearest
/// extremum of the same kind in `other` (`None` if `other` has none).
pub fn extremum_shifts(reference: &[f64], other: &[f64]) -> Vec<Option<usize>> {
    let theirs = extrema(other);
    extrema(reference)
        .into_iter()
        .map(|(i, kind)| {
            theirs
                .iter()
                .filter(|(_, k)| *k == kind)
                .map(|(j, _)| i.abs_diff(*j))
                .min()
        })
        .collect()
}
