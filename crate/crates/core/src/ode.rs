//! Dormand–Prince 5(4) with continuous (dense) output.
//!
//! Step-size control follows Hairer, Nørsett & Wanner (RMS error norm,
//! safety factor 0.9, growth clamped to [0.2, 10]). Output is produced by
//! the fourth-order continuous extension at the requested times, so the
//! step sequence does not depend on the output grid.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        let s = h * coef;
        for i in 0..N {
            out[i] += s * k[i];
        }
    }
    out
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    ctl: &StepControl,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = ctl.abs_tol + ctl.rel_tol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &mut F, t0: f64, y0: &[f64; N], f0: &[f64; N], dir: f64, ctl: &StepControl) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sk = ctl.abs_tol + ctl.rel_tol * y0[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y0[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * (dny / dnf).sqrt()
    };
    h = h.min(ctl.max_step);
    let y1 = axpy(y0, dir * h, &[(1.0, f0)]);
    let f1 = f(t0 + dir * h, &y1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sk = ctl.abs_tol + ctl.rel_tol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 5.0)
    };
    (100.0 * h).min(h1).min(ctl.max_step)
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each of
/// `t_out`, which must be monotone in the direction of integration and may
/// start at `t0`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_out: &[f64],
    ctl: &StepControl,
) -> Result<(Vec<[f64; N]>, OdeStats)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if !(ctl.rel_tol > 0.0 && ctl.abs_tol > 0.0 && ctl.max_step > 0.0) {
        return Err(Error::InvalidConfig(
            "tolerances and max_step must be positive".into(),
        ));
    }
    let mut out = Vec::with_capacity(t_out.len());
    let mut stats = OdeStats::default();
    let Some(&t_end) = t_out.last() else {
        return Ok((out, stats));
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    if t_out.windows(2).any(|w| dir * (w[1] - w[0]) < 0.0) || dir * (t_out[0] - t0) < 0.0 {
        return Err(Error::InvalidConfig(
            "output times must be monotone in the integration direction".into(),
        ));
    }

    let mut next_out = 0;
    while next_out < t_out.len() && t_out[next_out] == t0 {
        out.push(y0);
        next_out += 1;
    }
    if next_out == t_out.len() {
        return Ok((out, stats));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, &y, &k1, dir, ctl);
    stats.evaluations += 1;
    let span = (t_end - t0).abs();
    let h_min = 16.0 * f64::EPSILON * span.max(t0.abs());
    let mut last_rejected = false;

    while next_out < t_out.len() {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return Err(Error::TooManySteps {
                t,
                max_steps: ctl.max_steps,
            });
        }
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let remaining = (t_end - t).abs();
        let hs = if h >= remaining { remaining } else { h };
        let hd = dir * hs;

        let k2 = f(t + C2 * hd, &axpy(&y, hd, &[(A21, &k1)]));
        let k3 = f(t + C3 * hd, &axpy(&y, hd, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * hd, &axpy(&y, hd, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * hd,
            &axpy(&y, hd, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + hd,
            &axpy(&y, hd, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hd, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if hs == remaining { t_end } else { t + hd };
        let k7 = f(t_new, &y_new);
        stats.evaluations += 6;

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = hd
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&err, &y, &y_new, ctl);
        if !en.is_finite() {
            h *= 0.2;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        if en <= 1.0 {
            stats.accepted += 1;
            // continuous extension on [t, t_new]
            while next_out < t_out.len() && dir * (t_out[next_out] - t_new) <= 0.0 {
                let s = (t_out[next_out] - t) / hd;
                let s1 = 1.0 - s;
                let mut ys = [0.0; N];
                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = hd * k1[i] - ydiff;
                    let r4 = ydiff - hd * k7[i] - bspl;
                    let r5 = hd
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                    ys[i] = y[i] + s * (ydiff + s1 * (bspl + s * (r4 + s1 * r5)));
                }
                out.push(if t_out[next_out] == t_new { y_new } else { ys });
                next_out += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            let mut fac = 0.9 * en.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (hs * fac).min(ctl.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (0.9 * en.powf(-0.2)).max(0.2);
            h = hs * fac;
            last_rejected = true;
        }
    }
    Ok((out, stats))
}
