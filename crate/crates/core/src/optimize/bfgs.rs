//! Dense BFGS and limited-memory BFGS with box projection.

use std::collections::VecDeque;

use super::line_search::{projected_backtracking, strong_wolfe, Step};
use super::{Objective, OptimizerSpec, Outcome, Tracked};
use crate::error::Result;

const GRADIENT_TOL: f64 = 1e-10;
const LBFGS_MEMORY: usize = 10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gradient with the components that would leave the box zeroed.
fn projected_gradient(g: &[f64], x: &[f64], bounds: Option<&[(f64, f64)]>) -> Vec<f64> {
    let mut pg = g.to_vec();
    if let Some(b) = bounds {
        for i in 0..g.len() {
            let (lo, hi) = b[i];
            if (x[i] <= lo && g[i] > 0.0) || (x[i] >= hi && g[i] < 0.0) {
                pg[i] = 0.0;
            }
        }
    }
    pg
}

/// Inverse-Hessian approximation driving the shared outer loop.
trait Curvature {
    fn direction(&self, g: &[f64]) -> Vec<f64>;
    fn update(&mut self, s: &[f64], y: &[f64]);
    fn reset(&mut self);
}

struct DenseInverse {
    h: Vec<Vec<f64>>,
    fresh: bool,
}

impl DenseInverse {
    fn new(n: usize) -> Self {
        let mut d = DenseInverse { h: vec![vec![0.0; n]; n], fresh: true };
        d.reset();
        d
    }
}

impl Curvature for DenseInverse {
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        self.h.iter().map(|row| -dot(row, g)).collect()
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        let sy = dot(s, y);
        let n = s.len();
        if self.fresh {
            let scale = sy / dot(y, y);
            for (i, row) in self.h.iter_mut().enumerate() {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[i] = scale;
            }
            self.fresh = false;
        }
        let rho = 1.0 / sy;
        let hy: Vec<f64> = self.h.iter().map(|row| dot(row, y)).collect();
        let yhy = dot(y, &hy);
        // H ← (I − ρsyᵀ)H(I − ρysᵀ) + ρssᵀ, expanded.
        for i in 0..n {
            for j in 0..n {
                self.h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                    + (rho * rho * yhy + rho) * s[i] * s[j];
            }
        }
    }

    fn reset(&mut self) {
        for (i, row) in self.h.iter_mut().enumerate() {
            row.iter_mut().for_each(|v| *v = 0.0);
            row[i] = 1.0;
        }
        self.fresh = true;
    }
}

struct LimitedMemory {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl Curvature for LimitedMemory {
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        if self.pairs.len() == LBFGS_MEMORY {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s.to_vec(), y.to_vec(), 1.0 / dot(s, y)));
    }

    fn reset(&mut self) {
        self.pairs.clear();
    }
}

fn quasi_newton<O: Objective + ?Sized>(
    spec: &OptimizerSpec,
    t: &mut Tracked<'_, O>,
    x0: &[f64],
    curvature: &mut dyn Curvature,
) -> Result<Outcome> {
    let mut x = x0.to_vec();
    let mut f = t.value(&x)?;
    let mut g = t.gradient(&x)?;
    let bounded = t.bounds().is_some();
    for iteration in 0..spec.max_iterations {
        let pg = projected_gradient(&g, &x, t.bounds());
        if inf_norm(&pg) < GRADIENT_TOL {
            return Ok(Outcome { x, f, iterations: iteration, converged: true, message: "gradient below tolerance" });
        }
        let mut d = curvature.direction(&pg);
        if let Some(b) = t.bounds() {
            // Variables pinned at a bound stay there this iteration.
            for i in 0..d.len() {
                if pg[i] == 0.0 && (x[i] <= b[i].0 || x[i] >= b[i].1) {
                    d[i] = 0.0;
                }
            }
        }
        if dot(&d, &pg) >= 0.0 {
            curvature.reset();
            d = pg.iter().map(|v| -v).collect();
        }
        let alpha0 = if iteration == 0 { (1.0 / inf_norm(&d)).min(1.0) } else { 1.0 };
        let step: Option<Step> = if bounded {
            projected_backtracking(t, &x, f, &g, &d, alpha0)?
        } else {
            strong_wolfe(t, &x, f, &g, &d, alpha0)?
        };
        let Some(step) = step else {
            return Ok(Outcome { x, f, iterations: iteration + 1, converged: true, message: "line search made no progress" });
        };
        let s = sub(&step.x, &x);
        let y = sub(&step.g, &g);
        if dot(&s, &y) > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            curvature.update(&s, &y);
        }
        let df = (f - step.f).abs();
        x = step.x;
        f = step.f;
        g = step.g;
        if df < spec.function_tolerance {
            return Ok(Outcome { x, f, iterations: iteration + 1, converged: true, message: "function change below tolerance" });
        }
    }
    Ok(Outcome { x, f, iterations: spec.max_iterations, converged: false, message: "iteration limit reached" })
}

pub(crate) fn bfgs<O: Objective + ?Sized>(
    spec: &OptimizerSpec,
    t: &mut Tracked<'_, O>,
    x0: &[f64],
) -> Result<Outcome> {
    quasi_newton(spec, t, x0, &mut DenseInverse::new(x0.len()))
}

pub(crate) fn lbfgsb<O: Objective + ?Sized>(
    spec: &OptimizerSpec,
    t: &mut Tracked<'_, O>,
    x0: &[f64],
) -> Result<Outcome> {
    quasi_newton(spec, t, x0, &mut LimitedMemory { pairs: VecDeque::new() })
}
