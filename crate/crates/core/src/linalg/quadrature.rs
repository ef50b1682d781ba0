//! Adaptive Simpson quadrature with explicit kink splitting.

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_DEPTH: u32 = 48;

struct Outcome {
    value: f64,
    error: f64,
    converged: bool,
}

/// Integrates `f` over `[a, b]` to an absolute error estimate of `tol`.
///
/// `kinks` lists points where `f` or its derivative is discontinuous; the
/// interval is split there first and the tolerance shared in proportion to
/// piece length. Points outside `(a, b)` are ignored. When a piece fails to
/// converge within the depth limit the error carries the best estimate.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    kinks: &[f64],
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut points = Vec::with_capacity(kinks.len() + 2);
    points.push(lo);
    points.extend(kinks.iter().copied().filter(|&k| k > lo && k < hi && k.is_finite()));
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let width = hi - lo;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut ok = true;
    for w in points.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let piece_tol = tol * (x1 - x0) / width;
        let out = simpson_piece(&f, x0, x1, piece_tol)?;
        total += out.value;
        err += out.error;
        ok &= out.converged;
    }
    if !ok {
        return Err(Error::Quadrature {
            a,
            b,
            best_estimate: sign * total,
            error_estimate: err,
        });
    }
    Ok(sign * total)
}

fn eval(f: &impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    let v = f(x);
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!("integrand is {v} at x = {x}")));
    }
    Ok(v)
}

fn simpson_piece(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Outcome> {
    let fa = eval(f, a)?;
    let fb = eval(f, b)?;
    let m = 0.5 * (a + b);
    let fm = eval(f, m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut out = Outcome {
        value: 0.0,
        error: 0.0,
        converged: true,
    };
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut Outcome,
) -> Result<()> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(f, lm)?;
    let frm = eval(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    let delta = refined - whole;
    let floor = 64.0 * f64::EPSILON * refined.abs();
    if delta.abs() <= 15.0 * tol || delta.abs() <= floor {
        out.value += refined + delta / 15.0;
        out.error += delta.abs() / 15.0;
        return Ok(());
    }
    if depth == 0 || m <= a || m >= b {
        out.value += refined + delta / 15.0;
        out.error += delta.abs() / 15.0;
        out.converged = false;
        return Ok(());
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out)?;
    recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out)
}

/// Composite trapezoid rule on `n` equal panels.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for k in 1..n {
        sum += f(a + k as f64 * h);
    }
    sum * h
}

/// Trapezoid integral of tabulated samples.
pub fn trapezoid_samples(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
