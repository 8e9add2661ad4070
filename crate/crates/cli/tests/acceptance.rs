//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Thresholds are fixed here and never tuned per run.

use std::path::Path;
use std::time::{Duration, Instant};

use inertial_core::analysis::{extrema, extremum_shifts};
use inertial_core::protocol::REFERENCE_DELTAS;
use inertial_core::{
    bprime, correction_operator, corrected_propagate, distance_series, inertial_parameter,
    inertial_propagate, initial_ground_state, integrate_liouville, integrate_spinor,
    integrate_spinor_perturbed, linear_fit, normalized_energy, EigenSystem, FieldNoise, Gauge,
    InertialConfig, IntegratorConfig, ProtocolParams, Trajectory,
};
use inertial_sim::{run, Mode, RunConfig};
use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest |E_norm(inertial) − E_norm(exact)| accepted at δ = ±0.01·α₀.
/// Calibrated once against the exact trajectories at the reference drive
/// (observed 0.0059 and 0.0065) and frozen.
const SMALL_DELTA_BOUND: f64 = 0.01;
const NOISE_SEED: u64 = 7;
const NOISE_REL_SIGMA: f64 = 0.01;
const NOISE_MAX_CHANGE: f64 = 0.05;
const CORRECTION_GRID_SEED: u64 = 11;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn energies(t: &Trajectory) -> Vec<f64> {
    normalized_energy(t)
        .expect("nonzero initial energy")
        .into_iter()
        .map(|x| x.1)
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn exact(params: &ProtocolParams) -> Trajectory {
    let (_, v0) = initial_ground_state(params).unwrap();
    integrate_liouville(params, &v0, &IntegratorConfig::default()).unwrap()
}

fn inertial(params: &ProtocolParams) -> Trajectory {
    let (_, v0) = initial_ground_state(params).unwrap();
    inertial_propagate(params, &v0, &InertialConfig::default()).unwrap()
}

fn reference_deltas_nonsingular() -> Vec<ProtocolParams> {
    REFERENCE_DELTAS
        .iter()
        .map(|&d| ProtocolParams::reference(d))
        .filter(|p| p.check_nonsingular().is_ok())
        .collect()
}

fn eigensystem() -> Outcome {
    let start = Instant::now();
    let mut worst_residual = 0.0f64;
    let mut worst_kappa = 0.0f64;
    for i in 0..100 {
        let mu = -5.0 + 10.0 * i as f64 / 99.0;
        let b = bprime(mu).entries;
        for gauge in [Gauge::Regular, Gauge::Unitary] {
            let es = EigenSystem::with_gauge(mu, gauge).unwrap();
            let kappa = es.kappa;
            let target = Matrix3::from_diagonal(&nalgebra::Vector3::new(
                Complex64::new(0.0, 0.0),
                Complex64::new(kappa, 0.0),
                Complex64::new(-kappa, 0.0),
            ));
            let r = (es.p_inv * b * es.p - target)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            worst_residual = worst_residual.max(r);
        }
        // general (non-Hermitian) complex Schur solver as the oracle
        let mut ev: Vec<f64> = b
            .schur()
            .eigenvalues()
            .expect("triangular Schur form")
            .iter()
            .map(|z| z.re)
            .collect();
        ev.sort_by(f64::total_cmp);
        let kappa = EigenSystem::new(mu).kappa;
        let err = (ev[0] + kappa).abs().max(ev[1].abs()).max((ev[2] - kappa).abs());
        worst_kappa = worst_kappa.max(err);
    }
    let elapsed = start.elapsed();
    outcome(
        worst_residual < 1e-12 && worst_kappa < 1e-12 && elapsed < Duration::from_secs(1),
        format!(
            "max diagonalization residual {worst_residual:.2e}, max eigenvalue error {worst_kappa:.2e}, {:.3}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn dual_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = IntegratorConfig::default();
    let mut worst = 0.0f64;
    let mut n = 0;
    for p in reference_deltas_nonsingular() {
        let (psi0, v0) = initial_ground_state(&p).unwrap();
        let a = integrate_liouville(&p, &v0, &cfg).unwrap();
        let b = integrate_spinor(&p, &psi0, &cfg).unwrap();
        let omega0 = p.rabi_at(0.0).unwrap().abs();
        let rel = a
            .points
            .iter()
            .zip(&b.points)
            .flat_map(|(x, y)| {
                let (u, v) = (x.state.components(), y.state.components());
                (0..3).map(move |i| (u[i] - v[i]).abs())
            })
            .fold(0.0, f64::max)
            / omega0;
        worst = worst.max(rel);
        n += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        n == 6 && worst < 1e-8 && elapsed < Duration::from_secs(30),
        format!(
            "{n} drives, max |liouville − spinor| = {worst:.2e}·Ω(0), {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn norm_conservation() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut worst = 0.0f64;
    for p in reference_deltas_nonsingular() {
        let (psi0, v0) = initial_ground_state(&p).unwrap();
        let omega0_sq = p.rabi_at(0.0).unwrap().powi(2);
        for traj in [
            integrate_liouville(&p, &v0, &cfg).unwrap(),
            integrate_spinor(&p, &psi0, &cfg).unwrap(),
        ] {
            for pt in &traj.points {
                let drift = (pt.state.norm_sq() - 0.25 * pt.sample.omega_rabi.powi(2)).abs();
                worst = worst.max(drift / omega0_sq);
            }
        }
    }
    outcome(
        worst < 1e-8,
        format!("max |h²+l²+c² − Ω²/4| = {worst:.2e}·Ω(0)²"),
    )
}

fn zero_drift_exactness() -> Outcome {
    let p = ProtocolParams::reference(0.0);
    let d = distance_series(&inertial(&p), &exact(&p)).unwrap();
    let worst = d.iter().map(|x| x.1).fold(0.0, f64::max);
    let limit = 1e-6 * p.rabi_at(0.0).unwrap().abs() / 2.0;
    outcome(
        worst <= limit,
        format!("max D = {worst:.2e} (limit {limit:.2e})"),
    )
}

fn small_drift_accuracy() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for r in [-0.01, 0.01] {
        let p = ProtocolParams::reference(r);
        let dev = max_abs_diff(&energies(&inertial(&p)), &energies(&exact(&p)));
        pass &= dev < SMALL_DELTA_BOUND;
        parts.push(format!("δ/α₀={r}: {dev:.4}"));
    }
    outcome(
        pass,
        format!(
            "max |ΔE_norm| {} (bound {SMALL_DELTA_BOUND})",
            parts.join(", ")
        ),
    )
}

fn breakdown_ordering() -> Outcome {
    let rates = [0.01, 0.05, 0.1];
    let finals: Vec<f64> = rates
        .iter()
        .map(|&r| {
            let p = ProtocolParams::reference(r);
            let d = distance_series(&inertial(&p), &exact(&p)).unwrap();
            d.last().unwrap().1
        })
        .collect();
    let increasing = finals.windows(2).all(|w| w[0] < w[1]);
    let fit = linear_fit(&rates, &finals).unwrap();
    outcome(
        increasing && fit.r_squared > 0.9,
        format!(
            "D(t_final) = {:.3?} at δ/α₀ = {rates:?}, r² = {:.3}",
            finals, fit.r_squared
        ),
    )
}

fn phase_robustness() -> Outcome {
    let p = ProtocolParams::reference(-1.0);
    let e_exact = energies(&exact(&p));
    let e_inertial = energies(&inertial(&p));
    let shifts = extremum_shifts(&e_exact, &e_inertial);
    let same_count = extrema(&e_exact).len() == extrema(&e_inertial).len();
    let worst_shift = shifts.iter().map(|s| s.unwrap_or(usize::MAX)).max().unwrap_or(0);
    let amplitude = max_abs_diff(&e_exact, &e_inertial);
    let phase_ok = same_count && !shifts.is_empty() && worst_shift <= 2;
    outcome(
        phase_ok && amplitude > SMALL_DELTA_BOUND,
        format!(
            "{} extrema, shifts {:?} samples (limit 2), max |ΔE_norm| = {amplitude:.3} (must exceed {SMALL_DELTA_BOUND})",
            shifts.len(),
            shifts.iter().map(|s| s.map(|k| k as i64).unwrap_or(-1)).collect::<Vec<_>>()
        ),
    )
}

fn correction_operator_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(CORRECTION_GRID_SEED);
    let mut worst_imag = 0.0f64;
    for _ in 0..1000 {
        let mut mu: f64 = rng.random_range(-5.0..5.0);
        if mu.abs() < 0.05 {
            mu = 0.05f64.copysign(mu);
        }
        let omega = rng.random_range(1.0..500.0);
        let delta = rng.random_range(-50.0..50.0);
        let o = correction_operator(mu, omega, delta).unwrap();
        let scale = o.entries.abs().max();
        let imag = o
            .entries
            .complex_eigenvalues()
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max);
        worst_imag = worst_imag.max(imag / scale);
    }

    // O against −P⁻¹ dP/dθ with dP/dθ = (δ/Ω)·dP/dμ by central differences
    let mut worst_ratio = 0.0f64;
    for &(mu, omega, delta) in &[(-1.3, 40.0, -2.0), (-0.6, 90.0, 3.5), (2.2, -15.0, 0.7)] {
        let o = correction_operator(mu, omega, delta).unwrap();
        let err = |h: f64| {
            let p = |m: f64| EigenSystem::with_gauge(m, Gauge::Printed).unwrap();
            let dp = (p(mu + h).p - p(mu - h).p) / Complex64::new(2.0 * h, 0.0);
            let fd = -(p(mu).p_inv * dp) * Complex64::new(delta / omega, 0.0);
            fd.iter()
                .zip(o.entries.iter())
                .map(|(z, x)| (z - x).norm())
                .fold(0.0, f64::max)
        };
        worst_ratio = worst_ratio.max(err(1e-3) / err(2e-3));
    }

    let p = ProtocolParams::reference(-0.05);
    let (_, v0) = initial_ground_state(&p).unwrap();
    let ex = exact(&p);
    let end = |t: &Trajectory| t.last().state.distance(&ex.last().state);
    let d_corr = end(&corrected_propagate(&p, &v0).unwrap());
    let d_inert = end(&inertial(&p));

    outcome(
        worst_imag < 1e-12 && worst_ratio < 0.3 && d_corr <= d_inert,
        format!(
            "max |Im λ|/‖O‖ = {worst_imag:.1e}, FD error ratio at h/2 = {worst_ratio:.3}, end distance corrected {d_corr:.4} vs inertial {d_inert:.4}"
        ),
    )
}

fn upsilon_diagnostic() -> Outcome {
    let zero = inertial_parameter(&ProtocolParams::reference(0.0)).unwrap().upsilon;
    let mut pts: Vec<(f64, f64)> = REFERENCE_DELTAS
        .iter()
        .map(|&d| {
            let u = inertial_parameter(&ProtocolParams::reference(d)).unwrap().upsilon;
            (d.abs(), u)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = pts.iter().enumerate().all(|(i, a)| {
        pts[i + 1..]
            .iter()
            .all(|b| b.0 == a.0 || a.1 < b.1)
    });
    outcome(
        zero == 0.0 && monotone,
        format!(
            "Υ(0) = {zero}, (|δ|/α₀, Υ) = {:?}",
            pts.iter()
                .map(|(d, u)| format!("({d}, {u:.2e})"))
                .collect::<Vec<_>>()
        ),
    )
}

fn noise_robustness() -> Outcome {
    let p = ProtocolParams::reference(-0.01);
    let cfg = IntegratorConfig::default();
    let (psi0, _) = initial_ground_state(&p).unwrap();
    let clean = integrate_spinor(&p, &psi0, &cfg).unwrap();
    let noise = FieldNoise::gaussian(p.n_samples - 1, NOISE_REL_SIGMA, NOISE_SEED);
    let noisy = integrate_spinor_perturbed(&p, &psi0, &cfg, &noise).unwrap();
    let peak = |t: &Trajectory| energies(t).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = (peak(&clean), peak(&noisy));
    let change = (b - a).abs() / a.abs();
    outcome(
        change < NOISE_MAX_CHANGE,
        format!(
            "max E_norm {a:.5} → {b:.5} ({:.3}% change, seed {NOISE_SEED}, σ = {NOISE_REL_SIGMA})",
            100.0 * change
        ),
    )
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let runs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            for mode in [Mode::Simulate, Mode::Sweep] {
                let cfg = RunConfig {
                    mode,
                    n_samples: 400,
                    delta_list: Some(vec![-0.05, 0.01, 0.1]),
                    noise_rel_sigma: 0.01,
                    seed: NOISE_SEED,
                    output_dir: dir.path().to_path_buf(),
                    ..RunConfig::default()
                };
                assert!(run(&cfg).unwrap().ok());
            }
            read_dir_sorted(dir.path())
        })
        .collect();
    let csvs = runs[0].iter().filter(|f| f.0.ends_with(".csv")).count();
    outcome(
        runs[0] == runs[1] && csvs > 0,
        format!("{} files ({csvs} CSV) compared byte for byte", runs[0].len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("eigensystem correctness", eigensystem),
        ("dual-oracle exactness", dual_oracle),
        ("norm conservation", norm_conservation),
        ("zero-drift exactness", zero_drift_exactness),
        ("small-drift accuracy", small_drift_accuracy),
        ("breakdown ordering", breakdown_ordering),
        ("phase robustness", phase_robustness),
        ("correction operator", correction_operator_checks),
        ("inertial parameter", upsilon_diagnostic),
        ("noise robustness", noise_robustness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
