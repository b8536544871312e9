//! Derivative-free trust-region minimization on an interpolating simplex.
//!
//! The model gradient comes from the `n + 1` simplex values alone. A
//! damped-BFGS curvature estimate, built from successive model gradients,
//! corrects the interpolation and shapes the trust-region step, which
//! matters on curved valleys where a purely linear model crawls.

use super::{Objective, OptimizerSpec, Outcome, Tracked};
use crate::error::Result;

const DEFAULT_RHO_BEGIN: f64 = 0.5;
const DEFAULT_RHO_END: f64 = 1e-6;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// LU factorization with partial pivoting of a square matrix.
struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    fn new(mut a: Vec<Vec<f64>>) -> Option<Lu> {
        let n = a.len();
        let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return None;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
            if a[p][k].abs() <= 1e-13 * scale {
                return None;
            }
            a.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..n {
                let m = a[i][k] / a[k][k];
                a[i][k] = m;
                for j in k + 1..n {
                    a[i][j] -= m * a[k][j];
                }
            }
        }
        Some(Lu { lu: a, perm })
    }

    /// Solves `A x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i][j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i][j] * x[j];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut z = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                z[i] -= self.lu[j][i] * z[j];
            }
            z[i] /= self.lu[i][i];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                z[i] -= self.lu[j][i] * z[j];
            }
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }
}

fn cholesky_solve(b: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = b[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i][k] * y[k];
        }
        y[i] /= l[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k][i] * y[k];
        }
        y[i] /= l[i][i];
    }
    Some(y)
}

/// Dogleg minimizer of `gᵀs + ½ sᵀBs` over `‖s‖ ≤ delta`.
fn trust_step(g: &[f64], b: Option<&Vec<Vec<f64>>>, delta: f64) -> Vec<f64> {
    let gn = norm(g);
    if gn == 0.0 {
        return vec![0.0; g.len()];
    }
    let boundary: Vec<f64> = g.iter().map(|v| -v * delta / gn).collect();
    let Some(b) = b else { return boundary };
    let bg = matvec(b, g);
    let gbg = dot(g, &bg);
    if gbg <= 0.0 {
        return boundary;
    }
    let tau = gn * gn / gbg;
    let cauchy: Vec<f64> = g.iter().map(|v| -tau * v).collect();
    if tau * gn >= delta {
        return boundary;
    }
    let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
    let Some(newton) = cholesky_solve(b, &neg_g) else { return cauchy };
    if norm(&newton) <= delta {
        return newton;
    }
    // Walk from the Cauchy point toward the Newton point to the boundary.
    let p: Vec<f64> = newton.iter().zip(&cauchy).map(|(n, c)| n - c).collect();
    let (a2, a1, a0) = (dot(&p, &p), 2.0 * dot(&cauchy, &p), dot(&cauchy, &cauchy) - delta * delta);
    let t = (-a1 + (a1 * a1 - 4.0 * a2 * a0).max(0.0).sqrt()) / (2.0 * a2);
    cauchy.iter().zip(&p).map(|(c, pi)| c + t * pi).collect()
}

/// Powell-damped BFGS update of a Hessian estimate.
fn damped_bfgs(b: &mut Option<Vec<Vec<f64>>>, s: &[f64], y: &[f64]) {
    let n = s.len();
    let ss = dot(s, s);
    if ss == 0.0 {
        return;
    }
    let b = match b {
        Some(b) => b,
        None => {
            let sy = dot(s, y);
            if sy <= 0.0 {
                return;
            }
            let scale = dot(y, y) / sy;
            *b = Some((0..n).map(|i| (0..n).map(|j| if i == j { scale } else { 0.0 }).collect()).collect());
            b.as_mut().expect("just set")
        }
    };
    let bs = matvec(b, s);
    let sbs = dot(s, &bs);
    if sbs <= 0.0 {
        return;
    }
    let sy = dot(s, y);
    let theta = if sy >= 0.2 * sbs { 1.0 } else { 0.8 * sbs / (sbs - sy) };
    let r: Vec<f64> = y.iter().zip(&bs).map(|(yi, bi)| theta * yi + (1.0 - theta) * bi).collect();
    let sr = dot(s, &r);
    for i in 0..n {
        for j in 0..n {
            b[i][j] += r[i] * r[j] / sr - bs[i] * bs[j] / sbs;
        }
    }
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn best(&self) -> usize {
        (0..self.values.len())
            .min_by(|&i, &j| self.values[i].total_cmp(&self.values[j]))
            .expect("non-empty simplex")
    }

    /// Edge matrix (rows `x_i − x_best`, `i ≠ best`) and the vertex order.
    fn edges(&self, best: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let others: Vec<usize> = (0..self.points.len()).filter(|&i| i != best).collect();
        let rows = others
            .iter()
            .map(|&i| self.points[i].iter().zip(&self.points[best]).map(|(a, b)| a - b).collect())
            .collect();
        (rows, others)
    }
}

struct Model {
    best: usize,
    others: Vec<usize>,
    edges: Vec<Vec<f64>>,
    lu: Lu,
    gradient: Vec<f64>,
}

fn build_model(sx: &Simplex, hessian: Option<&Vec<Vec<f64>>>) -> Option<Model> {
    let best = sx.best();
    let (edges, others) = sx.edges(best);
    let lu = Lu::new(edges.clone())?;
    let rhs: Vec<f64> = others
        .iter()
        .zip(&edges)
        .map(|(&i, d)| {
            let curv = hessian.map_or(0.0, |b| 0.5 * dot(d, &matvec(b, d)));
            sx.values[i] - sx.values[best] - curv
        })
        .collect();
    let gradient = lu.solve(&rhs);
    Some(Model { best, others, edges, lu, gradient })
}

fn next_rho(rho: f64, rho_end: f64) -> f64 {
    let r = 0.5 * rho;
    if r <= 1.5 * rho_end {
        rho_end
    } else {
        r
    }
}

pub(crate) fn cobyla<O: Objective + ?Sized>(
    spec: &OptimizerSpec,
    t: &mut Tracked<'_, O>,
    x0: &[f64],
) -> Result<Outcome> {
    let n = x0.len();
    let budget = spec.max_iterations;
    let rho_end = spec.hyperparameters.rho_end.unwrap_or(DEFAULT_RHO_END);
    let mut rho = spec.hyperparameters.rho_begin.unwrap_or(DEFAULT_RHO_BEGIN).max(rho_end);
    let mut delta = rho;
    let mut hessian: Option<Vec<Vec<f64>>> = None;
    let mut iterations = 0;

    let mut sx = Simplex { points: Vec::with_capacity(n + 1), values: Vec::with_capacity(n + 1) };
    let f0 = t.value(x0)?;
    sx.points.push(x0.to_vec());
    sx.values.push(f0);

    macro_rules! finish {
        ($converged:expr, $msg:expr) => {{
            let b = sx.best();
            return Ok(Outcome {
                x: sx.points[b].clone(),
                f: sx.values[b],
                iterations,
                converged: $converged,
                message: $msg,
            });
        }};
    }

    let rebuild = |sx: &mut Simplex, t: &mut Tracked<'_, O>, rho: f64| -> Result<bool> {
        let b = sx.best();
        let centre = sx.points[b].clone();
        let fc = sx.values[b];
        sx.points = vec![centre.clone()];
        sx.values = vec![fc];
        for i in 0..n {
            if t.evaluations() >= budget {
                return Ok(false);
            }
            let mut p = centre.clone();
            p[i] += rho;
            if let Some(bounds) = t.bounds() {
                if p[i] > bounds[i].1 {
                    p[i] = centre[i] - rho;
                }
            }
            t.project(&mut p);
            let f = t.value(&p)?;
            sx.points.push(p);
            sx.values.push(f);
        }
        Ok(true)
    };
    if !rebuild(&mut sx, t, rho)? {
        finish!(false, "evaluation budget exhausted");
    }

    // Anchor of the last curvature update: (best point, model gradient).
    let mut anchor: Option<(Vec<f64>, Vec<f64>)> = None;
    loop {
        iterations += 1;
        let Some(model) = build_model(&sx, hessian.as_ref()) else {
            if !rebuild(&mut sx, t, rho)? {
                finish!(false, "evaluation budget exhausted");
            }
            continue;
        };

        // Keep every vertex within reach of the best one so the model
        // gradient is accurate at the current resolution.
        if let Some(j) = worst_vertex(&model, rho) {
            if t.evaluations() >= budget {
                finish!(false, "evaluation budget exhausted");
            }
            let mut w = model.lu.solve(&unit(n, j));
            let wn = norm(&w);
            w.iter_mut().for_each(|v| *v *= rho / wn);
            if dot(&w, &model.gradient) > 0.0 {
                w.iter_mut().for_each(|v| *v = -*v);
            }
            let mut xg: Vec<f64> = sx.points[model.best].iter().zip(&w).map(|(a, b)| a + b).collect();
            t.project(&mut xg);
            let fg = t.value(&xg)?;
            let vertex = model.others[j];
            sx.points[vertex] = xg;
            sx.values[vertex] = fg;
            continue;
        }

        let xb = sx.points[model.best].clone();
        let fb = sx.values[model.best];
        match &anchor {
            Some((xa, ga)) => {
                let step: Vec<f64> = xb.iter().zip(xa).map(|(a, b)| a - b).collect();
                if norm(&step) >= 4.0 * rho {
                    let y: Vec<f64> = model.gradient.iter().zip(ga).map(|(a, b)| a - b).collect();
                    damped_bfgs(&mut hessian, &step, &y);
                    anchor = Some((xb.clone(), model.gradient.clone()));
                }
            }
            None => anchor = Some((xb.clone(), model.gradient.clone())),
        }

        let s = trust_step(&model.gradient, hessian.as_ref(), delta);
        let s_norm = norm(&s);
        if s_norm >= 0.5 * rho {
            if t.evaluations() >= budget {
                finish!(false, "evaluation budget exhausted");
            }
            let mut xt: Vec<f64> = xb.iter().zip(&s).map(|(a, b)| a + b).collect();
            t.project(&mut xt);
            let s: Vec<f64> = xt.iter().zip(&xb).map(|(a, b)| a - b).collect();
            let predicted = -(dot(&model.gradient, &s)
                + hessian.as_ref().map_or(0.0, |b| 0.5 * dot(&s, &matvec(b, &s))));
            let ft = t.value(&xt)?;
            let ratio = if predicted > 0.0 { (fb - ft) / predicted } else { -1.0 };
            insert(&mut sx, &model, &xt, ft, rho);
            if ratio >= 0.7 {
                delta = delta.max(2.0 * s_norm);
            }
            if ratio >= 0.1 {
                continue;
            }
            if delta > rho {
                delta = (0.5 * delta).max(rho);
                continue;
            }
        }
        if rho <= rho_end {
            finish!(true, "trust radius reached rho_end");
        }
        rho = next_rho(rho, rho_end);
        delta = rho;
    }
}

fn unit(n: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[j] = 1.0;
    e
}

/// Index (into `model.others`) of a vertex that is too far from the best
/// point or too close to the opposite face.
fn worst_vertex(model: &Model, rho: f64) -> Option<usize> {
    let far = model
        .edges
        .iter()
        .enumerate()
        .map(|(j, d)| (j, norm(d)))
        .filter(|(_, d)| *d > 2.0 * rho)
        .max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((j, _)) = far {
        return Some(j);
    }
    let n = model.edges.len();
    (0..n)
        .map(|j| (j, 1.0 / norm(&model.lu.solve(&unit(n, j)))))
        .filter(|(_, height)| *height < 0.25 * rho)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(j, _)| j)
}

/// Adds a trial point to the simplex, replacing the vertex whose removal
/// best preserves volume, weighted toward dropping distant vertices.
fn insert(
    sx: &mut Simplex,
    model: &Model,
    x: &[f64],
    f: f64,
    rho: f64,
) {
    let xb = sx.points[model.best].clone();
    let rel: Vec<f64> = x.iter().zip(&xb).map(|(a, b)| a - b).collect();
    let mu = model.lu.solve_transpose(&rel);
    let improves = f < sx.values[model.best];
    let anchor: &[f64] = if improves { x } else { &xb };
    let weight = |p: &[f64]| {
        let d = p.iter().zip(anchor).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        (d / rho).max(1.0).powi(2)
    };
    let mut choice: Option<(usize, f64)> = None;
    for (j, &i) in model.others.iter().enumerate() {
        let score = mu[j].abs() * weight(&sx.points[i]);
        if choice.map_or(true, |(_, s)| score > s) {
            choice = Some((i, score));
        }
    }
    if improves {
        let lambda_best = 1.0 - mu.iter().sum::<f64>();
        let score = lambda_best.abs() * weight(&sx.points[model.best]);
        if choice.map_or(true, |(_, s)| score > s) {
            choice = Some((model.best, score));
        }
    }
    let Some((i, score)) = choice else { return };
    // A worse point only earns a place if it keeps the simplex local.
    if !improves && (score < 0.1 || norm(&rel) > 2.0 * rho) {
        return;
    }
    sx.points[i] = x.to_vec();
    sx.values[i] = f;
}
