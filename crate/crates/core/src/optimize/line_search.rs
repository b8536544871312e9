//! Step-length selection for the quasi-Newton methods.

use super::{Objective, Tracked};
use crate::error::Result;

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_STEPS: usize = 30;

pub(crate) struct Step {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn along(x: &[f64], d: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

/// Minimizer of the cubic interpolating `(a, fa, da)` and `(b, fb, db)`,
/// safeguarded into the interior of the bracket.
fn cubic_min(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let mut t = if disc >= 0.0 {
        let d2 = (b - a).signum() * disc.sqrt();
        b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2)
    } else {
        f64::NAN
    };
    let margin = 0.1 * (hi - lo);
    if !t.is_finite() || t < lo + margin || t > hi - margin {
        t = 0.5 * (lo + hi);
    }
    t
}

/// Strong-Wolfe line search along the descent direction `d`.
///
/// Returns `None` when no acceptable step was found within the budget; the
/// caller then treats the current point as converged.
pub(crate) fn strong_wolfe<O: Objective + ?Sized>(
    t: &mut Tracked<'_, O>,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha0: f64,
) -> Result<Option<Step>> {
    let dphi0 = dot(g0, d);
    let mut eval = |alpha: f64, t: &mut Tracked<'_, O>| -> Result<(Step, f64)> {
        let xa = along(x, d, alpha);
        let f = t.value(&xa)?;
        let g = t.gradient(&xa)?;
        let dphi = dot(&g, d);
        Ok((Step { x: xa, f, g }, dphi))
    };

    let (mut a_prev, mut f_prev, mut d_prev) = (0.0, f0, dphi0);
    let mut alpha = alpha0;
    for i in 0..MAX_STEPS {
        let (step, dphi) = eval(alpha, t)?;
        if step.f > f0 + C1 * alpha * dphi0 || (i > 0 && step.f >= f_prev) {
            return zoom(t, &mut eval, f0, dphi0, (a_prev, f_prev, d_prev), (alpha, step.f, dphi));
        }
        if dphi.abs() <= -C2 * dphi0 {
            return Ok(Some(step));
        }
        if dphi >= 0.0 {
            return zoom(t, &mut eval, f0, dphi0, (alpha, step.f, dphi), (a_prev, f_prev, d_prev));
        }
        a_prev = alpha;
        f_prev = step.f;
        d_prev = dphi;
        alpha *= 2.0;
    }
    Ok(None)
}

type Point = (f64, f64, f64);

fn zoom<O: Objective + ?Sized>(
    t: &mut Tracked<'_, O>,
    eval: &mut impl FnMut(f64, &mut Tracked<'_, O>) -> Result<(Step, f64)>,
    f0: f64,
    dphi0: f64,
    mut lo: Point,
    mut hi: Point,
) -> Result<Option<Step>> {
    let mut best: Option<Step> = None;
    for _ in 0..MAX_STEPS {
        if (hi.0 - lo.0).abs() < 1e-14 * lo.0.abs().max(1.0) {
            break;
        }
        let alpha = cubic_min(lo.0, lo.1, lo.2, hi.0, hi.1, hi.2);
        let (step, dphi) = eval(alpha, t)?;
        if step.f > f0 + C1 * alpha * dphi0 || step.f >= lo.1 {
            hi = (alpha, step.f, dphi);
            continue;
        }
        if dphi.abs() <= -C2 * dphi0 {
            return Ok(Some(step));
        }
        if dphi * (hi.0 - lo.0) >= 0.0 {
            hi = lo;
        }
        lo = (alpha, step.f, dphi);
        best = Some(step);
    }
    // Sufficient decrease without the curvature condition is still progress.
    Ok(best)
}

/// Armijo backtracking along the projected path `P(x + α d)`.
pub(crate) fn projected_backtracking<O: Objective + ?Sized>(
    t: &mut Tracked<'_, O>,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha0: f64,
) -> Result<Option<Step>> {
    let mut alpha = alpha0;
    for _ in 0..MAX_STEPS {
        let mut xa = along(x, d, alpha);
        t.project(&mut xa);
        let s: Vec<f64> = xa.iter().zip(x).map(|(a, b)| a - b).collect();
        let decrease = dot(g0, &s);
        if decrease >= 0.0 {
            return Ok(None);
        }
        let f = t.value(&xa)?;
        if f <= f0 + C1 * decrease {
            let g = t.gradient(&xa)?;
            return Ok(Some(Step { x: xa, f, g }));
        }
        alpha *= 0.5;
    }
    Ok(None)
}
