//! Compute-performance model for a data-selection method.
//!
//! Training on `k` tokens costs `C(k) = c k + F` where `F` is the method's
//! one-off selection cost, and performance follows
//!
//! ```text
//! P(k) = (Pbar - P0) * (1 - exp(-lambda * C(k) / C(|D|))) + P0
//! ```
//!
//! This module evaluates and fits that curve, simulates which method wins at
//! each budget, extracts and fits the empirical Pareto frontier
//! `P(C) = a ln C + b`, and asks when an expensive method would cross it.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfCurveParams {
    pub p0: f64,
    pub pbar: f64,
    pub lam: f64,
}

impl PerfCurveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p0.is_finite() && self.pbar.is_finite() && self.lam.is_finite()) {
            return invalid("curve parameters must be finite");
        }
        if !(0.0 <= self.p0 && self.p0 <= self.pbar) {
            return invalid("curve needs 0 <= p0 <= pbar");
        }
        if self.lam < 0.0 {
            return invalid("curve needs lam >= 0");
        }
        Ok(())
    }

    /// Performance at normalized compute `frac = C(k) / C(|D|)`.
    pub fn at_fraction(&self, frac: f64) -> f64 {
        (self.pbar - self.p0) * (1.0 - (-self.lam * frac).exp()) + self.p0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCostModel {
    pub label: String,
    pub fixed_selection_flops: f64,
    pub train_flops_per_token: f64,
    /// Token counts are carried as reals; budgets routinely exceed 2^53 FLOPs
    /// but token counts stay far below it.
    pub dataset_tokens: f64,
}

impl MethodCostModel {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(ok(self.fixed_selection_flops) && ok(self.train_flops_per_token)) {
            return invalid(format!("method `{}`: costs must be finite and >= 0", self.label));
        }
        if !(self.dataset_tokens > 0.0 && self.dataset_tokens.is_finite()) {
            return invalid(format!("method `{}`: dataset_tokens must be positive", self.label));
        }
        Ok(())
    }

    fn cost_at(&self, k: f64) -> f64 {
        self.train_flops_per_token * k + self.fixed_selection_flops
    }

    /// `C(|D|)`, the cost of selection plus one full epoch.
    pub fn full_cost(&self) -> f64 {
        self.cost_at(self.dataset_tokens)
    }
}

/// `C(k) = c k + F`.
pub fn total_cost(k_tokens: f64, cost: &MethodCostModel) -> Result<f64> {
    if !(0.0..=cost.dataset_tokens).contains(&k_tokens) {
        return invalid(format!(
            "k = {k_tokens} outside [0, {}] for `{}`",
            cost.dataset_tokens, cost.label
        ));
    }
    Ok(cost.cost_at(k_tokens))
}

/// The curve at `k` tokens; `k` is clamped to `[0, |D|]`.
pub fn predicted_performance(k_tokens: f64, params: &PerfCurveParams, cost: &MethodCostModel) -> f64 {
    let k = k_tokens.clamp(0.0, cost.dataset_tokens);
    let full = cost.full_cost();
    let frac = if full > 0.0 { cost.cost_at(k) / full } else { 0.0 };
    params.at_fraction(frac)
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct LmOptions {
    /// Per-parameter bounds; empty means unbounded.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub max_iter: usize,
    /// Stop when an accepted step changes the cost by less than this fraction.
    pub ftol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            lower: Vec::new(),
            upper: Vec::new(),
            max_iter: 200,
            ftol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Half the residual sum of squares at `params`.
    pub cost: f64,
    pub iterations: usize,
    /// Costs after each accepted step, starting with the initial cost.
    pub cost_history: Vec<f64>,
}

const INITIAL_DAMPING: f64 = 1e-3;
const MAX_DAMPING: f64 = 1e16;
const JACOBIAN_STEP: f64 = 1e-6;

fn half_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for (i, xi) in x.iter_mut().enumerate() {
        if let Some(&lo) = lower.get(i) {
            *xi = xi.max(lo);
        }
        if let Some(&hi) = upper.get(i) {
            *xi = xi.min(hi);
        }
    }
}

/// Bounded Levenberg-Marquardt with a forward-difference Jacobian.
///
/// Damping starts at 1e-3 and moves by a factor of 10 per rejected (up) or
/// accepted (down) step; trial points are projected onto the bounds. The
/// Jacobian step is `1e-6 * |x|` (or `1e-6` at zero) and flips to a backward
/// difference when the forward point would leave the box.
pub fn levenberg_marquardt<F>(residuals: F, init: &[f64], opts: &LmOptions) -> Result<LmFit>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = init.len();
    if n == 0 {
        return invalid("levenberg_marquardt needs at least one parameter");
    }
    if (!opts.lower.is_empty() && opts.lower.len() != n) || (!opts.upper.is_empty() && opts.upper.len() != n) {
        return invalid("bounds must match the parameter count");
    }
    if opts.lower.iter().zip(&opts.upper).any(|(lo, hi)| lo > hi) {
        return invalid("lower bound exceeds upper bound");
    }

    let mut x = init.to_vec();
    project(&mut x, &opts.lower, &opts.upper);
    let mut r = residuals(&x);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(0));
    }
    let m = r.len();
    let mut cost = half_sq(&r);
    let mut history = vec![cost];
    let mut mu = INITIAL_DAMPING;
    let mut iterations = 0;

    'outer: while iterations < opts.max_iter && cost > 0.0 {
        iterations += 1;

        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let mut h = JACOBIAN_STEP * x[j].abs();
            if h == 0.0 {
                h = JACOBIAN_STEP;
            }
            if opts.upper.get(j).is_some_and(|&hi| x[j] + h > hi) {
                h = -h;
            }
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residuals(&xp);
            if rp.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(iterations));
            }
            for i in 0..m {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * rv;
        if grad.iter().all(|g| *g == 0.0) {
            break;
        }
        let diag_floor = jtj.diagonal().max().max(1.0) * 1e-12;

        loop {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += mu * jtj[(j, j)].max(diag_floor);
            }
            let step = a.lu().solve(&(-&grad));
            let Some(step) = step else {
                mu *= 10.0;
                if mu > MAX_DAMPING {
                    break 'outer;
                }
                continue;
            };
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, s)| xi + s).collect();
            project(&mut trial, &opts.lower, &opts.upper);
            if trial == x {
                break 'outer;
            }
            let r_trial = residuals(&trial);
            if r_trial.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(iterations));
            }
            let trial_cost = half_sq(&r_trial);
            if trial_cost < cost {
                let rel = (cost - trial_cost) / cost;
                x = trial;
                r = r_trial;
                cost = trial_cost;
                history.push(cost);
                mu = (mu / 10.0).max(1e-300);
                if rel < opts.ftol {
                    break 'outer;
                }
                break;
            }
            mu *= 10.0;
            if mu > MAX_DAMPING {
                break 'outer;
            }
        }
    }

    Ok(LmFit {
        params: x,
        cost,
        iterations,
        cost_history: history,
    })
}

// ---------------------------------------------------------------------------
// Curve fitting
// ---------------------------------------------------------------------------

pub const DEFAULT_PBAR_BUFFER: f64 = 0.05;

/// Fits `(P0, lambda)` to `(k_tokens, performance)` observations with `Pbar`
/// pinned at the best observation plus `eps`.
pub fn fit_perf_curve(obs: &[(f64, f64)], cost: &MethodCostModel, eps: f64) -> Result<PerfCurveParams> {
    cost.validate()?;
    if obs.len() < 3 {
        return invalid(format!("need at least 3 observations, got {}", obs.len()));
    }
    if obs.iter().any(|(k, p)| !k.is_finite() || !p.is_finite()) {
        return invalid("observations must be finite");
    }
    let pbar = obs.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max) + eps;
    let full = cost.full_cost();
    let fracs: Vec<f64> = obs
        .iter()
        .map(|(k, _)| {
            let k = k.clamp(0.0, cost.dataset_tokens);
            if full > 0.0 { cost.cost_at(k) / full } else { 0.0 }
        })
        .collect();
    let residuals = |theta: &[f64]| -> Vec<f64> {
        let curve = PerfCurveParams {
            p0: theta[0],
            pbar,
            lam: theta[1],
        };
        fracs
            .iter()
            .zip(obs)
            .map(|(&f, &(_, p))| curve.at_fraction(f) - p)
            .collect()
    };
    let init_p0 = obs[0].1.clamp(0.0, pbar.max(0.0));
    let opts = LmOptions {
        lower: vec![0.0, 0.0],
        upper: vec![pbar.max(0.0), f64::INFINITY],
        ..LmOptions::default()
    };
    let fit = levenberg_marquardt(residuals, &[init_p0, 1.0], &opts)?;
    Ok(PerfCurveParams {
        p0: fit.params[0],
        pbar,
        lam: fit.params[1],
    })
}

// ---------------------------------------------------------------------------
// Budget simulation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: String,
    pub feasible: bool,
    pub best_k: f64,
    pub compute: f64,
    pub performance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetOutcome {
    pub budget: f64,
    pub outcomes: Vec<MethodOutcome>,
    pub winner: Option<String>,
}

/// Best achievable performance for every method at every budget.
///
/// A method is infeasible when its selection cost alone exceeds the budget.
/// Otherwise it trains on `min(|D|, floor((K - F) / c))` tokens. The winner
/// is the feasible method with the highest performance; ties go to the method
/// that spent less compute, then to the earlier method.
pub fn simulate(methods: &[(PerfCurveParams, MethodCostModel)], budgets: &[f64]) -> Result<Vec<BudgetOutcome>> {
    if methods.is_empty() || budgets.is_empty() {
        return invalid("simulate needs at least one method and one budget");
    }
    for (curve, cost) in methods {
        curve.validate()?;
        cost.validate()?;
    }
    Ok(budgets
        .par_iter()
        .map(|&budget| {
            let outcomes: Vec<MethodOutcome> = methods
                .iter()
                .map(|(curve, cost)| evaluate_at_budget(curve, cost, budget))
                .collect();
            let mut winner: Option<&MethodOutcome> = None;
            for o in &outcomes {
                let Some(p) = o.performance else { continue };
                let better = match winner {
                    None => true,
                    Some(w) => {
                        let wp = w.performance.expect("winner is feasible");
                        p > wp || (p == wp && o.compute < w.compute)
                    }
                };
                if better {
                    winner = Some(o);
                }
            }
            BudgetOutcome {
                budget,
                winner: winner.map(|w| w.method.clone()),
                outcomes,
            }
        })
        .collect())
}

fn evaluate_at_budget(curve: &PerfCurveParams, cost: &MethodCostModel, budget: f64) -> MethodOutcome {
    if cost.fixed_selection_flops > budget {
        return MethodOutcome {
            method: cost.label.clone(),
            feasible: false,
            best_k: 0.0,
            compute: 0.0,
            performance: None,
        };
    }
    let k = if cost.train_flops_per_token > 0.0 {
        ((budget - cost.fixed_selection_flops) / cost.train_flops_per_token)
            .floor()
            .min(cost.dataset_tokens)
    } else {
        cost.dataset_tokens
    };
    MethodOutcome {
        method: cost.label.clone(),
        feasible: true,
        best_k: k,
        compute: cost.cost_at(k),
        performance: Some(predicted_performance(k, curve, cost)),
    }
}

// ---------------------------------------------------------------------------
// Pareto frontier
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub method: String,
    pub tokens_trained: f64,
    pub compute: f64,
    pub performance: f64,
}

impl Run {
    pub fn validate(&self) -> Result<()> {
        if !(self.compute > 0.0 && self.compute.is_finite()) {
            return invalid(format!("run `{}`: compute must be positive", self.method));
        }
        if !self.performance.is_finite() {
            return invalid(format!("run `{}`: performance must be finite", self.method));
        }
        Ok(())
    }

    /// True when `self` weakly beats `other` on both axes and strictly on one.
    pub fn dominates(&self, other: &Run) -> bool {
        self.compute <= other.compute
            && self.performance >= other.performance
            && (self.compute < other.compute || self.performance > other.performance)
    }
}

/// Non-dominated runs (less compute, more performance), sorted by compute.
/// Exact duplicates dominate neither each other and are all kept.
pub fn pareto_frontier(runs: &[Run]) -> Vec<Run> {
    let mut order: Vec<&Run> = runs.iter().collect();
    order.sort_by(|a, b| {
        a.compute
            .total_cmp(&b.compute)
            .then(b.performance.total_cmp(&a.performance))
    });
    let mut frontier = Vec::new();
    let mut best_before = f64::NEG_INFINITY;
    let mut i = 0;
    while i < order.len() {
        let group_max = order[i].performance;
        let mut j = i;
        while j < order.len() && order[j].compute == order[i].compute {
            let r = order[j];
            if r.performance == group_max && r.performance > best_before {
                frontier.push(r.clone());
            }
            j += 1;
        }
        best_before = best_before.max(group_max);
        i = j;
    }
    frontier
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierFit {
    pub a: f64,
    pub b: f64,
}

impl FrontierFit {
    /// `a ln(compute) + b`.
    pub fn eval(&self, compute: f64) -> f64 {
        self.a * compute.ln() + self.b
    }
}

/// Ordinary least squares of performance on `ln(compute)`.
pub fn fit_frontier(frontier: &[Run]) -> Result<FrontierFit> {
    if frontier.len() < 2 {
        return invalid("frontier fit needs at least 2 runs");
    }
    for r in frontier {
        r.validate()?;
    }
    let n = frontier.len() as f64;
    let xs: Vec<f64> = frontier.iter().map(|r| r.compute.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = frontier.iter().map(|r| r.performance).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, r) in xs.iter().zip(frontier) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (r.performance - y_mean);
    }
    if sxx == 0.0 {
        return invalid("frontier fit is degenerate: all runs share one compute value");
    }
    let a = sxy / sxx;
    Ok(FrontierFit {
        a,
        b: y_mean - a * x_mean,
    })
}

// ---------------------------------------------------------------------------
// Crossing analysis
// ---------------------------------------------------------------------------

/// Number of points on the normalized-compute grid used by crossing checks.
pub const CROSSING_GRID: usize = 1000;

/// Whether the curve strictly beats the frontier somewhere in `[0, |D|]`.
///
/// The frontier is stated in compute units of `compute_scale` times less than
/// `cost`, so each point compares `P(k)` with `a ln(C(k) / compute_scale) + b`.
/// Points are taken at `C(k) / C(|D|) = i / 1000` for `i = 1..=1000`,
/// skipping those that would need `k < 0`. Because the grid is in normalized
/// compute, the curve value at each grid point does not depend on `F`.
fn crosses_frontier(curve: &PerfCurveParams, cost: &MethodCostModel, frontier: &FrontierFit, compute_scale: f64) -> bool {
    let full = cost.full_cost();
    if full <= 0.0 {
        return false;
    }
    (1..=CROSSING_GRID).any(|i| {
        let frac = i as f64 / CROSSING_GRID as f64;
        let compute = frac * full;
        if compute < cost.fixed_selection_flops {
            return false;
        }
        curve.at_fraction(frac) > frontier.eval(compute / compute_scale)
    })
}

/// Smallest training-to-selector cost ratio at which the method crosses the
/// frontier, or `None` when no ratio in the grid does.
///
/// For each `r` the training cost per token becomes `r c` while the selection
/// cost stays fixed. The frontier is given at ratio 1, so the compute of
/// every frontier run scales by `r` as well.
pub fn extrapolate_optimal_ratio(
    curve: &PerfCurveParams,
    cost: &MethodCostModel,
    frontier: &FrontierFit,
    ratio_grid: &[f64],
) -> Result<Option<f64>> {
    curve.validate()?;
    cost.validate()?;
    if ratio_grid.is_empty() {
        return invalid("ratio grid is empty");
    }
    if ratio_grid.windows(2).any(|w| w[0] > w[1]) || ratio_grid.iter().any(|r| !(*r > 0.0)) {
        return invalid("ratio grid must be positive and sorted ascending");
    }
    Ok(ratio_grid.iter().copied().find(|&r| {
        let scaled = MethodCostModel {
            train_flops_per_token: r * cost.train_flops_per_token,
            ..cost.clone()
        };
        crosses_frontier(curve, &scaled, frontier, r)
    }))
}

/// Smallest number of tasks `T <= max_tasks` over which the selection cost
/// must be shared (`F / T` per task) for the method to cross the frontier.
pub fn break_even_tasks(
    curve: &PerfCurveParams,
    cost: &MethodCostModel,
    frontier: &FrontierFit,
    max_tasks: u32,
) -> Result<Option<u32>> {
    curve.validate()?;
    cost.validate()?;
    if max_tasks < 1 {
        return invalid("max_tasks must be >= 1");
    }
    Ok((1..=max_tasks).find(|&t| {
        let amortized = MethodCostModel {
            fixed_selection_flops: cost.fixed_selection_flops / t as f64,
            ..cost.clone()
        };
        crosses_frontier(curve, &amortized, frontier, 1.0)
    }))
}
