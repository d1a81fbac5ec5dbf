//! Closed-form expected-utility model of selection compute versus training
//! compute.
//!
//! A dataset of `D` points holds a fraction `P` of unit-utility points. Spending
//! `C` FLOPs on selection raises the chance of picking one to
//! `p(C) = 1 - (1 - P) exp(-beta C)` but leaves only `(K - C) / c_train` points
//! of training budget.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::perf_model::{levenberg_marquardt, LmOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityModelParams {
    pub dataset_size: f64,
    pub budget: f64,
    pub train_cost: f64,
    pub concentration: f64,
    pub rate: f64,
}

impl UtilityModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.concentration) {
            return invalid("concentration P must lie in [0, 1]");
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return invalid("budget K must be positive");
        }
        if !(self.train_cost > 0.0 && self.train_cost.is_finite()) {
            return invalid("train_cost must be positive");
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return invalid("rate beta must be >= 0");
        }
        if !(self.dataset_size >= 0.0) {
            return invalid("dataset_size must be >= 0");
        }
        Ok(())
    }

    /// Number of high-utility points, `P * D`.
    pub fn high_utility_points(&self) -> f64 {
        self.concentration * self.dataset_size
    }

    /// Points trainable after spending `c_ds` on selection.
    pub fn trainable_points(&self, c_ds: f64) -> f64 {
        (self.budget - c_ds) / self.train_cost
    }

    fn check_range(&self, c_ds: f64) -> Result<()> {
        if !(0.0..=self.budget).contains(&c_ds) {
            return invalid(format!("selection compute {c_ds} outside [0, {}]", self.budget));
        }
        Ok(())
    }
}

fn p_of(c_ds: f64, concentration: f64, rate: f64) -> f64 {
    concentration - (1.0 - concentration) * (-rate * c_ds).exp_m1()
}

pub fn p_select(c_ds: f64, params: &UtilityModelParams) -> Result<f64> {
    params.validate()?;
    params.check_range(c_ds)?;
    Ok(p_of(c_ds, params.concentration, params.rate))
}

pub fn expected_utility_random(params: &UtilityModelParams) -> f64 {
    params.budget / params.train_cost * params.concentration
}

fn u_ds(c_ds: f64, p: &UtilityModelParams) -> f64 {
    p.trainable_points(c_ds) * p_of(c_ds, p.concentration, p.rate)
}

pub fn expected_utility_ds(c_ds: f64, params: &UtilityModelParams) -> Result<f64> {
    params.validate()?;
    params.check_range(c_ds)?;
    Ok(u_ds(c_ds, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryOptimum {
    pub c_ds_star: f64,
    pub u_star: f64,
    pub u_rand: f64,
}

const GRID_POINTS: usize = 10_001;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `f` on `[lo, hi]` down to width `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Maximizes the expected utility over `C_DS in [0, K]`: a uniform grid scan,
/// then golden-section refinement between the neighbours of the best grid
/// point. Ties go to the smaller selection spend.
pub fn optimal_selection_compute(params: &UtilityModelParams, tol: f64) -> Result<TheoryOptimum> {
    params.validate()?;
    if !(tol > 0.0) {
        return invalid("tol must be positive");
    }
    let k = params.budget;
    let step = k / (GRID_POINTS - 1) as f64;
    let at = |i: usize| if i == GRID_POINTS - 1 { k } else { i as f64 * step };

    let mut best_i = 0;
    let mut best_u = u_ds(0.0, params);
    for i in 1..GRID_POINTS {
        let u = u_ds(at(i), params);
        if u > best_u {
            best_i = i;
            best_u = u;
        }
    }
    let mut c_star = at(best_i);
    let lo = at(best_i.saturating_sub(1));
    let hi = at((best_i + 1).min(GRID_POINTS - 1));
    let refine_tol = tol.min(1e-9 * k);
    let c_ref = golden_section_max(|c| u_ds(c, params), lo, hi, refine_tol).clamp(0.0, k);
    let u_ref = u_ds(c_ref, params);
    if u_ref > best_u {
        c_star = c_ref;
        best_u = u_ref;
    }
    Ok(TheoryOptimum {
        c_ds_star: c_star,
        u_star: best_u,
        u_rand: expected_utility_random(params),
    })
}

/// Least-squares fit of the selection rate `beta >= 0` to observed
/// `(c_ds, p_hat)` pairs with concentration `P` held fixed.
pub fn fit_beta(observations: &[(f64, f64)], concentration: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&concentration) {
        return invalid("fit_beta needs 0 <= P < 1");
    }
    if observations.iter().any(|(c, p)| !(c.is_finite() && p.is_finite()) || *c < 0.0) {
        return invalid("observations must be finite with c_ds >= 0");
    }
    let informative: Vec<f64> = observations.iter().map(|o| o.0).filter(|&c| c > 0.0).collect();
    if informative.is_empty() {
        return invalid("beta is unidentifiable: every observation has c_ds = 0");
    }
    let init = 1.0 / (informative.iter().sum::<f64>() / informative.len() as f64);
    let residuals = |theta: &[f64]| -> Vec<f64> {
        observations
            .iter()
            .map(|&(c, p_hat)| p_of(c, concentration, theta[0]) - p_hat)
            .collect()
    };
    let opts = LmOptions {
        lower: vec![0.0],
        upper: vec![f64::INFINITY],
        ..LmOptions::default()
    };
    let fit = levenberg_marquardt(residuals, &[init], &opts)?;
    Ok(fit.params[0])
}
