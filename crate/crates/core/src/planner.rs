//! Turning scores and a compute budget into a concrete training subset.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, ScoreTable};
use crate::error::{invalid, Error, Result};
use crate::flops::CostBreakdown;
use crate::selectors::{ppl_rank, PplMode};

/// Which constraint determines `trainable_tokens`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BindingBound {
    Compute,
    Data,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPlan {
    pub total_budget_flops: f64,
    pub selection_flops: f64,
    pub train_flops_per_token: f64,
    pub trainable_tokens: u64,
    pub binding: BindingBound,
}

impl BudgetPlan {
    /// Applies an additional data budget in tokens; the tighter bound wins and
    /// is recorded in `binding`.
    pub fn with_token_cap(mut self, max_tokens: u64) -> Self {
        if max_tokens < self.trainable_tokens {
            self.trainable_tokens = max_tokens;
            self.binding = BindingBound::Data;
        }
        self
    }
}

/// Splits `budget` into the fixed selection cost and whole trainable tokens.
pub fn make_budget_plan(budget: f64, cost: &CostBreakdown) -> Result<BudgetPlan> {
    if !(budget > 0.0 && budget.is_finite()) {
        return invalid("budget must be positive and finite");
    }
    if !(cost.train_flops_per_token > 0.0 && cost.train_flops_per_token.is_finite()) {
        return invalid("train_flops_per_token must be positive");
    }
    if !(cost.selection_flops >= 0.0) {
        return invalid("selection_flops must be non-negative");
    }
    if cost.selection_flops > budget {
        return Err(Error::BudgetExhausted {
            selection: cost.selection_flops,
            budget,
        });
    }
    let trainable = ((budget - cost.selection_flops) / cost.train_flops_per_token).floor();
    Ok(BudgetPlan {
        total_budget_flops: budget,
        selection_flops: cost.selection_flops,
        train_flops_per_token: cost.train_flops_per_token,
        trainable_tokens: trainable as u64,
        binding: BindingBound::Compute,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// In selection order.
    pub ids: Vec<String>,
    pub tokens_used: u64,
    /// Sum of member scores, accumulated in ascending id order so equal sets
    /// always give bit-identical sums.
    pub utility_sum: f64,
}

fn utility_of(ids: &[String], scores: Option<&ScoreTable>) -> f64 {
    let Some(scores) = scores else { return 0.0 };
    let mut sorted: Vec<&String> = ids.iter().collect();
    sorted.sort_unstable();
    sorted.iter().map(|id| scores.get(id).unwrap_or(0.0)).sum()
}

fn check_scores_cover(scores: &ScoreTable, corpus: &Corpus) -> Result<()> {
    for id in corpus.ids() {
        if scores.get(id).is_none() {
            return Err(Error::MissingIds(vec![id.to_string()]));
        }
    }
    Ok(())
}

/// The `k` highest-scoring examples, ties broken by ascending id.
pub fn select_topk(scores: &ScoreTable, corpus: &Corpus, k: usize) -> Result<Selection> {
    if k > corpus.len() {
        return invalid(format!("k = {k} exceeds corpus size {}", corpus.len()));
    }
    check_scores_cover(scores, corpus)?;
    let ids: Vec<String> = ppl_rank(scores, PplMode::Top)
        .into_iter()
        .filter(|id| corpus.contains(id))
        .take(k)
        .collect();
    let tokens_used = ids.iter().map(|id| corpus.get(id).expect("filtered").token_count).sum();
    let utility_sum = utility_of(&ids, Some(scores));
    Ok(Selection {
        ids,
        tokens_used,
        utility_sum,
    })
}

/// Walks `ranking`, keeping every example that still fits the token budget.
/// The result is maximal: no skipped example fits the residual budget.
pub fn select_under_budget(
    ranking: &[String],
    corpus: &Corpus,
    plan: &BudgetPlan,
    scores: Option<&ScoreTable>,
) -> Result<Selection> {
    if ranking.len() != corpus.len() {
        return invalid(format!(
            "ranking has {} ids but corpus has {}",
            ranking.len(),
            corpus.len()
        ));
    }
    let mut seen = HashSet::with_capacity(ranking.len());
    let mut remaining = plan.trainable_tokens;
    let mut ids = Vec::new();
    for id in ranking {
        let ex = corpus.get(id).ok_or_else(|| Error::UnknownId(id.clone()))?;
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
        if ex.token_count <= remaining {
            remaining -= ex.token_count;
            ids.push(id.clone());
        }
    }
    let utility_sum = utility_of(&ids, scores);
    Ok(Selection {
        ids,
        tokens_used: plan.trainable_tokens - remaining,
        utility_sum,
    })
}
