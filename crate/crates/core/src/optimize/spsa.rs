//! Simultaneous perturbation stochastic approximation.

use rand::Rng;

use super::{Objective, OptimizerSpec, Outcome, Tracked};
use crate::error::Result;
use crate::rng::{substream, Purpose};

pub(crate) fn spsa<O: Objective + ?Sized>(
    spec: &OptimizerSpec,
    t: &mut Tracked<'_, O>,
    x0: &[f64],
) -> Result<Outcome> {
    let h = &spec.hyperparameters;
    let a = h.a.unwrap_or(0.2);
    let c = h.c.unwrap_or(0.1);
    let alpha = h.alpha.unwrap_or(0.602);
    let gamma = h.gamma.unwrap_or(0.101);
    let stability = h.stability.unwrap_or(0.1 * spec.max_iterations as f64);
    let mut rng = substream(spec.seed, Purpose::Optimizer, 0);

    let n = x0.len();
    let mut x = x0.to_vec();
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for k in 0..spec.max_iterations {
        let ak = a / (k as f64 + 1.0 + stability).powf(alpha);
        let ck = c / (k as f64 + 1.0).powf(gamma);
        let delta: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        for i in 0..n {
            plus[i] = x[i] + ck * delta[i];
            minus[i] = x[i] - ck * delta[i];
        }
        t.project(&mut plus);
        t.project(&mut minus);
        let fp = t.value(&plus)?;
        let fm = t.value(&minus)?;
        let slope = (fp - fm) / (2.0 * ck);
        for i in 0..n {
            x[i] -= ak * slope / delta[i];
        }
        t.project(&mut x);
    }
    let f = t.value(&x)?;
    Ok(Outcome {
        x,
        f,
        iterations: spec.max_iterations,
        converged: true,
        message: "iteration budget completed",
    })
}
