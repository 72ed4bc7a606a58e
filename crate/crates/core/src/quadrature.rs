//! Deterministic integration engines for the spectral integrals, plus seeded
//! Monte Carlo integration against `nu_m`.
//!
//! The 1-D half-line rule substitutes `r = t/(1-t)` and applies Gauss-Legendre
//! on `(0, 1)`; for the integer-exponent Beta integrands that appear in the
//! spectra this makes the transformed integrand a polynomial, so the rule is
//! exact at modest orders. Orthant integrals tensorize the 1-D rule. Spectrum
//! evaluation additionally uses a Duffy-type map of the unit simplex (see
//! [`integrate_simplex`]), under which the Dirichlet-type integrands become
//! polynomials as well.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use crate::bergman::{sample_measure, SpaceParams};
use crate::error::{Error, Result};
use crate::C64;

/// Hard cap on tensor-rule evaluation counts (per refinement level).
const TENSOR_EVAL_BUDGET: usize = 400_000_000;

/// Parameters of a deterministic rule: nodes per axis and optional integrand
/// discontinuities (in the integration variable of the half-line rule).
#[derive(Clone, Debug)]
pub struct QuadratureSpec {
    pub order: usize,
    pub split_points: Vec<f64>,
}

impl QuadratureSpec {
    pub fn with_order(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParameter("quadrature order must be >= 2".into()));
        }
        Ok(QuadratureSpec {
            order,
            split_points: Vec::new(),
        })
    }

    pub fn with_splits(order: usize, split_points: Vec<f64>) -> Result<Self> {
        let mut spec = Self::with_order(order)?;
        for w in split_points.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidParameter(
                    "split points must be strictly increasing".into(),
                ));
            }
        }
        if split_points.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return Err(Error::InvalidParameter(
                "split points must be strictly inside (0, inf)".into(),
            ));
        }
        spec.split_points = split_points;
        Ok(spec)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 64,
            split_points: Vec::new(),
        }
    }
}

/// Value, error estimate (refinement difference or standard error), and
/// evaluation count of a single integration.
#[derive(Clone, Copy, Debug)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Complex-valued variant used by the Monte Carlo estimator.
#[derive(Clone, Copy, Debug)]
pub struct ComplexIntegralResult {
    pub value: C64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Nodes and weights of a rule, shared across callers.
pub type Rule = Arc<(Vec<f64>, Vec<f64>)>;

static GL_CACHE: Lazy<Mutex<HashMap<usize, Rule>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Gauss-Legendre nodes and weights on `(0, 1)`, cached per order.
pub fn gauss_legendre_unit(order: usize) -> Rule {
    let mut cache = GL_CACHE.lock().expect("quadrature cache poisoned");
    cache
        .entry(order)
        .or_insert_with(|| Arc::new(compute_gauss_legendre_unit(order)))
        .clone()
}

fn compute_gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton iteration from the Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // Map from (-1, 1) to (0, 1).
    let nodes = nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let weights = weights.iter().map(|w| 0.5 * w).collect();
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Applies the rule of the given order to `g` on each subinterval of `(0, 1)`
/// determined by the (already transformed) split points.
fn integrate_unit(g: &dyn Fn(f64) -> f64, order: usize, splits: &[f64]) -> (f64, usize) {
    let rule = gauss_legendre_unit(order);
    let (nodes, weights) = (&rule.0, &rule.1);
    let mut bounds = Vec::with_capacity(splits.len() + 2);
    bounds.push(0.0);
    bounds.extend(splits.iter().copied().filter(|s| *s > 0.0 && *s < 1.0));
    bounds.push(1.0);
    let mut total = 0.0;
    let mut evals = 0;
    for pair in bounds.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let len = b - a;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            total += w * len * g(a + len * x);
            evals += 1;
        }
    }
    (total, evals)
}

/// Integrates `f` over `(0, inf)` via the substitution `r = t/(1-t)` with
/// Jacobian `1/(1-t)^2`. The error estimate is the difference between the
/// order and 2x-order results.
pub fn integrate_halfline(f: impl Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    if spec.order < 2 {
        return Err(Error::InvalidParameter("order must be >= 2".into()));
    }
    let g = |t: f64| {
        let omt = 1.0 - t;
        f(t / omt) / (omt * omt)
    };
    // Transform split points r -> r/(1+r).
    let splits: Vec<f64> = spec.split_points.iter().map(|&r| r / (1.0 + r)).collect();
    let (coarse, e1) = integrate_unit(&g, spec.order, &splits);
    let (fine, e2) = integrate_unit(&g, spec.order * 2, &splits);
    Ok(IntegralResult {
        value: fine,
        error_estimate: (fine - coarse).abs(),
        evaluations: e1 + e2,
    })
}

/// Tensor product of the half-line rule over the positive orthant `(0, inf)^s`.
/// `s` is capped at 4; split points are only supported for `s = 1`.
pub fn integrate_orthant(
    f: impl Fn(&[f64]) -> f64,
    s: usize,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    if s == 0 || s > 4 {
        return Err(Error::InvalidParameter(format!(
            "orthant dimension s = {s} outside supported range 1..=4"
        )));
    }
    if s > 1 && !spec.split_points.is_empty() {
        return Err(Error::InvalidParameter(
            "split points are only supported for 1-D rules".into(),
        ));
    }
    if s == 1 {
        return integrate_halfline(|r| f(&[r]), spec);
    }
    let fine_order = spec.order * 2;
    if fine_order.pow(s as u32) > TENSOR_EVAL_BUDGET {
        return Err(Error::InvalidParameter(format!(
            "tensor rule of order {} in dimension {s} exceeds the evaluation budget",
            spec.order
        )));
    }
    let eval = |order: usize| -> (f64, usize) {
        let rule = gauss_legendre_unit(order);
        let (nodes, weights) = (&rule.0, &rule.1);
        // Precompute per-axis transformed nodes and weight*Jacobian factors.
        let t: Vec<f64> = nodes.iter().map(|&u| u / (1.0 - u)).collect();
        let wj: Vec<f64> = nodes
            .iter()
            .zip(weights.iter())
            .map(|(&u, &w)| w / ((1.0 - u) * (1.0 - u)))
            .collect();
        let mut idx = vec![0usize; s];
        let mut point = vec![0.0; s];
        let mut total = 0.0;
        let mut evals = 0usize;
        loop {
            let mut w = 1.0;
            for a in 0..s {
                point[a] = t[idx[a]];
                w *= wj[idx[a]];
            }
            total += w * f(&point);
            evals += 1;
            // Odometer increment.
            let mut axis = 0;
            loop {
                idx[axis] += 1;
                if idx[axis] < order {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
                if axis == s {
                    return (total, evals);
                }
            }
        }
    };
    let (coarse, e1) = eval(spec.order);
    let (fine, e2) = eval(fine_order);
    Ok(IntegralResult {
        value: fine,
        error_estimate: (fine - coarse).abs(),
        evaluations: e1 + e2,
    })
}

/// Nodes and weights of a tensor Gauss-Legendre rule pushed through the Duffy
/// map onto the open unit simplex `{x in (0,1)^s : sum x < 1}`.
///
/// The map `x_1 = u_1, x_j = u_j (1 - u_1) ... (1 - u_{j-1})` has polynomial
/// Jacobian, so polynomial integrands over the simplex are integrated exactly
/// at sufficient order. Used by the spectrum engine, where the substitution
/// `t_b = x_b / (1 - sum x)` turns the orthant Dirichlet integrands into
/// polynomials over the simplex when the symbol profile is polynomial in the
/// normalized block weights.
pub fn simplex_rule(s: usize, order: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rule = gauss_legendre_unit(order);
    let (nodes, weights) = (&rule.0, &rule.1);
    let total = order.pow(s as u32);
    let mut points = Vec::with_capacity(total);
    let mut wts = Vec::with_capacity(total);
    let mut idx = vec![0usize; s];
    loop {
        let mut x = vec![0.0; s];
        let mut scale = 1.0;
        let mut w = 1.0;
        for a in 0..s {
            let u = nodes[idx[a]];
            x[a] = u * scale;
            w *= weights[idx[a]] * scale;
            scale *= 1.0 - u;
        }
        points.push(x);
        wts.push(w);
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] < order {
                break;
            }
            idx[axis] = 0;
            axis += 1;
            if axis == s {
                return (points, wts);
            }
        }
    }
}

/// Integrates `g` over the unit simplex, with the order-doubling error
/// estimate. For `s = 1` the simplex is `(0, 1)` and split points (given in
/// simplex coordinates) are honored.
pub fn integrate_simplex(
    g: impl Fn(&[f64]) -> f64,
    s: usize,
    order: usize,
    splits: &[f64],
) -> Result<IntegralResult> {
    if s == 0 {
        return Err(Error::InvalidParameter("simplex dimension must be >= 1".into()));
    }
    if s == 1 {
        let g1 = |x: f64| g(&[x]);
        let (coarse, e1) = integrate_unit(&g1, order, splits);
        let (fine, e2) = integrate_unit(&g1, order * 2, splits);
        return Ok(IntegralResult {
            value: fine,
            error_estimate: (fine - coarse).abs(),
            evaluations: e1 + e2,
        });
    }
    if !splits.is_empty() {
        return Err(Error::InvalidParameter(
            "split points are only supported for 1-D rules".into(),
        ));
    }
    if (order * 2).pow(s as u32) > TENSOR_EVAL_BUDGET {
        return Err(Error::InvalidParameter(format!(
            "simplex rule of order {order} in dimension {s} exceeds the evaluation budget"
        )));
    }
    let eval = |ord: usize| {
        let (pts, wts) = simplex_rule(s, ord);
        let v: f64 = pts.iter().zip(wts.iter()).map(|(x, w)| w * g(x)).sum();
        (v, pts.len())
    };
    let (coarse, e1) = eval(order);
    let (fine, e2) = eval(order * 2);
    Ok(IntegralResult {
        value: fine,
        error_estimate: (fine - coarse).abs(),
        evaluations: e1 + e2,
    })
}

/// Estimates `int g dnu_m` by the sample mean over `count` seeded draws,
/// with the standard error of the mean as error estimate.
pub fn mc_expectation(
    params: SpaceParams,
    g: impl Fn(&[C64]) -> C64,
    count: usize,
    seed: u64,
) -> Result<ComplexIntegralResult> {
    let samples = sample_measure(params, seed, count)?;
    let mut sum = C64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    for z in &samples {
        let v = g(z);
        sum += v;
        sum_sq += v.norm_sqr();
    }
    let mean = sum / count as f64;
    let var = (sum_sq / count as f64 - mean.norm_sqr()).max(0.0);
    let se = (var / count as f64).sqrt();
    Ok(ComplexIntegralResult {
        value: mean,
        error_estimate: se,
        evaluations: count,
    })
}
