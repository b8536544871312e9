//! Classical optimizers driving the variational loop.
//!
//! All four methods share one bookkeeping layer: every call of the objective
//! value, including the ones a gradient rule makes, is appended to the
//! [`Trace`]. Only analytic gradients (supplied by the objective itself)
//! bypass the trace.

mod bfgs;
mod cobyla;
mod line_search;
mod spsa;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// BFGS with a strong-Wolfe line search; equivalent to SLSQP when the
    /// problem has no constraints beyond optional box bounds.
    SlsqpEquiv,
    Lbfgsb,
    Cobyla,
    Spsa,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 4] = [
        OptimizerKind::SlsqpEquiv,
        OptimizerKind::Lbfgsb,
        OptimizerKind::Cobyla,
        OptimizerKind::Spsa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::SlsqpEquiv => "slsqp_equiv",
            OptimizerKind::Lbfgsb => "lbfgsb",
            OptimizerKind::Cobyla => "cobyla",
            OptimizerKind::Spsa => "spsa",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Spec(format!("unknown optimizer `{s}`")))
    }
}

/// How gradient-based methods obtain derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum GradientRule {
    /// Ask the objective ([`Objective::gradient`]).
    Analytic,
    /// `[f(x + π/2 e_k) − f(x − π/2 e_k)] / 2`; exact when every parameter
    /// drives exactly one Pauli rotation.
    ParameterShift,
    CentralDifference { step: f64 },
}

/// Kind-specific knobs; unset values fall back to the documented defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparameters {
    /// SPSA step gain (default 0.2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// SPSA perturbation gain (default 0.1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// SPSA step decay exponent (default 0.602).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// SPSA perturbation decay exponent (default 0.101).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// SPSA stability offset (default `0.1 · max_iterations`).
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
    /// COBYLA initial trust radius (default 0.5).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_begin: Option<f64>,
    /// COBYLA final trust radius (default 1e-6).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_end: Option<f64>,
}

pub const DEFAULT_MAX_ITERATIONS: usize = 1000;
pub const DEFAULT_FUNCTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    /// Outer iterations for the quasi-Newton methods and SPSA; objective
    /// evaluations for COBYLA.
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_ftol")]
    pub function_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    /// Overrides the objective's preferred gradient rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<GradientRule>,
}

fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

fn default_ftol() -> f64 {
    DEFAULT_FUNCTION_TOLERANCE
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind) -> Self {
        OptimizerSpec {
            kind,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            function_tolerance: DEFAULT_FUNCTION_TOLERANCE,
            bounds: None,
            seed: 0,
            hyperparameters: Hyperparameters::default(),
            gradient: None,
        }
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_gradient(mut self, rule: GradientRule) -> Self {
        self.gradient = Some(rule);
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.function_tolerance > 0.0) {
            return Err(Error::Spec("function_tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Spec("max_iterations must be positive".into()));
        }
        if let Some(b) = &self.bounds {
            if b.len() != dim {
                return Err(Error::Arity {
                    expected: dim,
                    got: b.len(),
                });
            }
            if let Some((i, (lo, hi))) = b.iter().enumerate().find(|(_, (lo, hi))| !(lo <= hi)) {
                return Err(Error::Spec(format!("bound {i} has lo {lo} > hi {hi}")));
            }
        }
        let h = &self.hyperparameters;
        let positive = [
            ("a", h.a),
            ("c", h.c),
            ("rho_begin", h.rho_begin),
            ("rho_end", h.rho_end),
        ];
        if let Some((name, v)) = positive
            .iter()
            .find_map(|(n, v)| v.filter(|x| !(*x > 0.0)).map(|x| (*n, x)))
        {
            return Err(Error::Spec(format!("{name} must be positive, got {v}")));
        }
        if let (Some(b), Some(e)) = (h.rho_begin, h.rho_end) {
            if e > b {
                return Err(Error::Spec("rho_end exceeds rho_begin".into()));
            }
        }
        if let Some(GradientRule::CentralDifference { step }) = self.gradient {
            if !(step > 0.0) {
                return Err(Error::Spec("finite-difference step must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Function to minimize.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Analytic gradient, used only under [`GradientRule::Analytic`].
    fn gradient(&mut self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Gradient rule used when the spec does not set one.
    fn preferred_gradient(&self) -> GradientRule {
        GradientRule::CentralDifference { step: 1e-6 }
    }

    /// Deterministic objectives reuse the value of a bit-identical point
    /// instead of re-evaluating (and re-recording) it.
    fn is_deterministic(&self) -> bool {
        false
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn value(&mut self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub index: usize,
    pub params: Vec<f64>,
    pub value: f64,
}

/// Every objective evaluation of one run, in call order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub evaluations: Vec<Evaluation>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.evaluations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluations.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.evaluations.iter().map(|e| e.value)
    }

    /// Running minimum of the recorded values.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.values()
            .map(|v| {
                best = best.min(v);
                best
            })
            .collect()
    }

    pub fn best(&self) -> Option<&Evaluation> {
        self.evaluations
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }

    /// Number of evaluations until the running minimum first comes within
    /// `tol` of `target`.
    pub fn evaluations_to_reach(&self, target: f64, tol: f64) -> Option<usize> {
        self.best_so_far()
            .iter()
            .position(|b| *b <= target + tol)
            .map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub trace: Trace,
    pub iterations: usize,
    /// Analytic gradient calls (not part of the trace).
    pub gradient_calls: usize,
    pub converged: bool,
    pub message: String,
}

/// Failure of a run; the trace up to the failure is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Aborted {
    pub error: Error,
    pub trace: Trace,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} after {} evaluations", self.error, self.trace.len())
    }
}

impl std::error::Error for Aborted {}

/// Evaluation bookkeeping shared by all methods.
pub(crate) struct Tracked<'a, O: ?Sized> {
    objective: &'a mut O,
    trace: Trace,
    cache: Option<HashMap<Vec<u64>, f64>>,
    gradient_rule: GradientRule,
    gradient_calls: usize,
    bounds: Option<Vec<(f64, f64)>>,
}

impl<'a, O: Objective + ?Sized> Tracked<'a, O> {
    fn new(objective: &'a mut O, spec: &OptimizerSpec) -> Self {
        let cache = objective.is_deterministic().then(HashMap::new);
        let gradient_rule = spec.gradient.unwrap_or_else(|| objective.preferred_gradient());
        Tracked {
            objective,
            trace: Trace::default(),
            cache,
            gradient_rule,
            gradient_calls: 0,
            bounds: spec.bounds.clone(),
        }
    }

    pub(crate) fn evaluations(&self) -> usize {
        self.trace.len()
    }

    pub(crate) fn value(&mut self, x: &[f64]) -> Result<f64> {
        let key: Option<Vec<u64>> = self
            .cache
            .as_ref()
            .map(|_| x.iter().map(|v| v.to_bits()).collect());
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(v) = cache.get(key) {
                return Ok(*v);
            }
        }
        let v = self.objective.value(x);
        let index = self.trace.len();
        if !v.is_finite() {
            return Err(Error::NonFinite { evaluation: index });
        }
        self.trace.evaluations.push(Evaluation {
            index,
            params: x.to_vec(),
            value: v,
        });
        if let (Some(cache), Some(key)) = (&mut self.cache, key) {
            cache.insert(key, v);
        }
        Ok(v)
    }

    pub(crate) fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let (shift, divisor) = match self.gradient_rule {
            GradientRule::Analytic => {
                self.gradient_calls += 1;
                let g = self.objective.gradient(x).ok_or_else(|| {
                    Error::Spec("analytic gradient requested but the objective has none".into())
                })?;
                if g.len() != x.len() {
                    return Err(Error::Arity {
                        expected: x.len(),
                        got: g.len(),
                    });
                }
                if let Some(i) = g.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { evaluation: i });
                }
                return Ok(g);
            }
            GradientRule::ParameterShift => (std::f64::consts::FRAC_PI_2, 2.0),
            GradientRule::CentralDifference { step } => (step, 2.0 * step),
        };
        // Finite-difference probes stay inside the box (one-sided at a
        // bound); shifted angles are periodic and need no clipping.
        let clip = matches!(self.gradient_rule, GradientRule::CentralDifference { .. });
        let mut g = vec![0.0; x.len()];
        let mut probe = x.to_vec();
        for k in 0..x.len() {
            let (mut hi, mut lo) = (x[k] + shift, x[k] - shift);
            if let (true, Some(b)) = (clip, &self.bounds) {
                hi = hi.min(b[k].1);
                lo = lo.max(b[k].0);
            }
            probe[k] = hi;
            let plus = self.value(&probe)?;
            probe[k] = lo;
            let minus = self.value(&probe)?;
            probe[k] = x[k];
            g[k] = if clip { (plus - minus) / (hi - lo) } else { (plus - minus) / divisor };
        }
        Ok(g)
    }

    pub(crate) fn project(&self, x: &mut [f64]) {
        if let Some(b) = &self.bounds {
            for (xi, (lo, hi)) in x.iter_mut().zip(b) {
                *xi = xi.clamp(*lo, *hi);
            }
        }
    }

    pub(crate) fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }

    fn finish(self, x: Vec<f64>, f: f64, iterations: usize, converged: bool, message: &str) -> Minimum {
        Minimum {
            x,
            f,
            trace: self.trace,
            iterations,
            gradient_calls: self.gradient_calls,
            converged,
            message: message.to_string(),
        }
    }
}

/// What a method hands back to [`minimize`].
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub message: &'static str,
}

/// Minimizes `objective` from `x0` with the method selected by `spec`.
///
/// Returns the best point found (the final iterate for SPSA) together with
/// the full evaluation trace.
pub fn minimize<O: Objective + ?Sized>(
    spec: &OptimizerSpec,
    objective: &mut O,
    x0: &[f64],
) -> std::result::Result<Minimum, Aborted> {
    let fail = |error: Error| Aborted {
        error,
        trace: Trace::default(),
    };
    if x0.is_empty() {
        return Err(fail(Error::Argument("x0 is empty".into())));
    }
    spec.validate(x0.len()).map_err(fail)?;
    if let Some(b) = &spec.bounds {
        if let Some(i) = x0
            .iter()
            .zip(b)
            .position(|(x, (lo, hi))| x < lo || x > hi)
        {
            return Err(fail(Error::Argument(format!(
                "x0[{i}] = {} outside [{}, {}]",
                x0[i], b[i].0, b[i].1
            ))));
        }
    }
    let mut tracked = Tracked::new(objective, spec);
    let outcome = match spec.kind {
        OptimizerKind::SlsqpEquiv => bfgs::bfgs(spec, &mut tracked, x0),
        OptimizerKind::Lbfgsb => bfgs::lbfgsb(spec, &mut tracked, x0),
        OptimizerKind::Cobyla => cobyla::cobyla(spec, &mut tracked, x0),
        OptimizerKind::Spsa => spsa::spsa(spec, &mut tracked, x0),
    };
    match outcome {
        Ok(o) => Ok(tracked.finish(o.x, o.f, o.iterations, o.converged, o.message)),
        Err(error) => Err(Aborted {
            error,
            trace: tracked.trace,
        }),
    }
}
