//! FLOP accounting for transformer training and for each data-selection
//! pipeline.
//!
//! Per-token counts follow the Kaplan-style operation table: every matmul
//! costs 2 FLOPs per multiply-accumulate, both embedding matrices are counted,
//! and a training step is three forward passes (backward = 2x forward).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Architectural dimensions of a decoder-only transformer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformerConfig {
    #[serde(default)]
    pub name: String,
    pub n_layer: u64,
    pub n_ctx: u64,
    pub d_model: u64,
    pub d_ff: u64,
    /// Total attention width across heads.
    pub d_attn: u64,
    pub n_vocab: u64,
}

impl TransformerConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("n_layer", self.n_layer),
            ("n_ctx", self.n_ctx),
            ("d_model", self.d_model),
            ("d_ff", self.d_ff),
            ("d_attn", self.d_attn),
            ("n_vocab", self.n_vocab),
        ];
        for (field, v) in fields {
            if v == 0 {
                return invalid(format!("config `{}`: {field} must be positive", self.name));
            }
        }
        Ok(())
    }

    pub fn llama2_7b() -> Self {
        Self::llama("llama2-7b", 32, 4096, 11008, 4096)
    }

    pub fn llama2_13b() -> Self {
        Self::llama("llama2-13b", 40, 5120, 13824, 5120)
    }

    /// 70B with the table's `d_attn = 128 x 80`; grouped-query attention is
    /// not modeled.
    pub fn llama2_70b() -> Self {
        Self::llama("llama2-70b", 80, 8192, 28672, 10240)
    }

    fn llama(name: &str, n_layer: u64, d_model: u64, d_ff: u64, d_attn: u64) -> Self {
        TransformerConfig {
            name: name.to_string(),
            n_layer,
            n_ctx: 4096,
            d_model,
            d_ff,
            d_attn,
            n_vocab: 32000,
        }
    }

    /// Built-in configs keyed by name.
    pub fn builtin() -> BTreeMap<String, TransformerConfig> {
        [Self::llama2_7b(), Self::llama2_13b(), Self::llama2_70b()]
            .into_iter()
            .map(|c| (c.name.clone(), c))
            .collect()
    }
}

/// Loads a JSON object `{ "<name>": {n_layer, n_ctx, ...}, ... }`. The map key
/// overrides any `name` inside the entry.
pub fn load_model_configs(path: &Path) -> Result<BTreeMap<String, TransformerConfig>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut map: BTreeMap<String, TransformerConfig> =
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })?;
    for (name, cfg) in map.iter_mut() {
        cfg.name = name.clone();
        cfg.validate()?;
    }
    Ok(map)
}

/// Total parameter count N, including the input embedding and the output head.
pub fn param_count(cfg: &TransformerConfig) -> f64 {
    let l = cfg.n_layer as f64;
    let d = cfg.d_model as f64;
    let attn = cfg.d_attn as f64;
    let ff = cfg.d_ff as f64;
    let v = cfg.n_vocab as f64;
    2.0 * d * l * (2.0 * attn + 1.5 * ff) + 2.0 * d * v
}

/// `2N + 2 n_layer n_ctx d_attn`, using the full context length for the
/// attention-score term.
pub fn forward_flops_per_token(cfg: &TransformerConfig) -> f64 {
    2.0 * param_count(cfg) + 2.0 * (cfg.n_layer as f64) * (cfg.n_ctx as f64) * (cfg.d_attn as f64)
}

pub fn training_flops_per_token(cfg: &TransformerConfig) -> f64 {
    3.0 * forward_flops_per_token(cfg)
}

/// The common `6 N D` training estimate.
pub fn approx_6nd(param_count: f64, tokens: f64) -> f64 {
    6.0 * param_count * tokens
}

/// Per-example cost of one gradient (forward + backward) on the selector.
pub fn per_point_gradient_cost(selector: &TransformerConfig, example_tokens: u64) -> f64 {
    3.0 * forward_flops_per_token(selector) * example_tokens as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Bm25,
    Embed,
    Ppl,
    Gradient,
    Random,
}

impl SelectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMethod::Bm25 => "bm25",
            SelectionMethod::Embed => "embed",
            SelectionMethod::Ppl => "ppl",
            SelectionMethod::Gradient => "gradient",
            SelectionMethod::Random => "random",
        }
    }
}

impl std::str::FromStr for SelectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bm25" | "lexicon" => Ok(SelectionMethod::Bm25),
            "embed" | "embedding" => Ok(SelectionMethod::Embed),
            "ppl" | "perplexity" => Ok(SelectionMethod::Ppl),
            "gradient" | "grad" | "less" => Ok(SelectionMethod::Gradient),
            "random" => Ok(SelectionMethod::Random),
            other => invalid(format!("unknown selection method `{other}`")),
        }
    }
}

fn default_bm25_flops() -> f64 {
    1.0
}
fn default_warmup_fraction() -> f64 {
    0.05
}
fn default_warmup_epochs() -> u32 {
    4
}
/// Gradient-feature time over warm-up time (48h / 6h).
fn default_grad_ratio() -> f64 {
    8.0
}

/// Inputs that determine the one-off cost of scoring a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionCostSpec {
    pub method: SelectionMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selector_config: Option<TransformerConfig>,
    #[serde(default)]
    pub embed_param_count: f64,
    #[serde(default = "default_bm25_flops")]
    pub bm25_flops_per_token: f64,
    #[serde(default = "default_warmup_fraction")]
    pub warmup_fraction: f64,
    #[serde(default = "default_warmup_epochs")]
    pub warmup_epochs: u32,
    #[serde(default = "default_grad_ratio")]
    pub grad_feature_time_ratio: f64,
}

impl SelectionCostSpec {
    pub fn new(method: SelectionMethod) -> Self {
        SelectionCostSpec {
            method,
            selector_config: None,
            embed_param_count: 0.0,
            bm25_flops_per_token: default_bm25_flops(),
            warmup_fraction: default_warmup_fraction(),
            warmup_epochs: default_warmup_epochs(),
            grad_feature_time_ratio: default_grad_ratio(),
        }
    }

    pub fn with_selector(mut self, cfg: TransformerConfig) -> Self {
        self.selector_config = Some(cfg);
        self
    }

    pub fn with_embed_params(mut self, n: f64) -> Self {
        self.embed_param_count = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let needs_selector = matches!(self.method, SelectionMethod::Ppl | SelectionMethod::Gradient);
        match (&self.selector_config, needs_selector) {
            (None, true) => {
                return invalid(format!("method `{}` requires selector_config", self.method.as_str()))
            }
            (Some(_), false) => {
                return invalid(format!(
                    "method `{}` does not take a selector_config",
                    self.method.as_str()
                ))
            }
            (Some(cfg), true) => cfg.validate()?,
            (None, false) => {}
        }
        if !(self.warmup_fraction > 0.0 && self.warmup_fraction <= 1.0) {
            return invalid("warmup_fraction must lie in (0, 1]");
        }
        if self.warmup_epochs < 1 {
            return invalid("warmup_epochs must be >= 1");
        }
        if !(self.bm25_flops_per_token > 0.0 && self.bm25_flops_per_token.is_finite()) {
            return invalid("bm25_flops_per_token must be positive");
        }
        if !(self.grad_feature_time_ratio > 0.0 && self.grad_feature_time_ratio.is_finite()) {
            return invalid("grad_feature_time_ratio must be positive");
        }
        if self.method == SelectionMethod::Embed
            && !(self.embed_param_count > 0.0 && self.embed_param_count.is_finite())
        {
            return invalid("embed method requires a positive embed_param_count");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub selection_flops: f64,
    pub train_flops_per_token: f64,
    pub notes: Vec<String>,
}

/// Total selection FLOPs for `spec` over the corpus, with the training model's
/// per-token cost left at zero (callers attach it with [`with_training`]).
pub fn selection_cost(
    spec: &SelectionCostSpec,
    corpus_tokens: u64,
    validation_tokens: u64,
) -> Result<CostBreakdown> {
    spec.validate()?;
    if corpus_tokens == 0 {
        return invalid("corpus_tokens must be positive");
    }
    let d = corpus_tokens as f64;
    let v = validation_tokens as f64;
    let mut notes = Vec::new();
    let selection_flops = match spec.method {
        SelectionMethod::Bm25 => {
            notes.push(format!("{} FLOP per corpus token", spec.bm25_flops_per_token));
            spec.bm25_flops_per_token * d
        }
        SelectionMethod::Embed => {
            notes.push("2 N per embedded token over corpus and validation".to_string());
            2.0 * spec.embed_param_count * (d + v)
        }
        SelectionMethod::Ppl => {
            let cfg = spec.selector_config.as_ref().expect("validated");
            notes.push(format!("one forward pass of `{}` per corpus token", cfg.name));
            forward_flops_per_token(cfg) * d
        }
        SelectionMethod::Gradient => {
            let cfg = spec.selector_config.as_ref().expect("validated");
            let warmup = spec.warmup_epochs as f64
                * spec.warmup_fraction
                * d
                * training_flops_per_token(cfg);
            let features = spec.grad_feature_time_ratio * warmup;
            notes.push(format!(
                "warm-up: {} epochs on {} of the corpus with `{}` = {warmup:e}",
                spec.warmup_epochs, spec.warmup_fraction, cfg.name
            ));
            notes.push(format!(
                "gradient features: {} x warm-up = {features:e}",
                spec.grad_feature_time_ratio
            ));
            warmup + features
        }
        SelectionMethod::Random => {
            notes.push("random selection has no scoring cost".to_string());
            0.0
        }
    };
    Ok(CostBreakdown {
        selection_flops,
        train_flops_per_token: 0.0,
        notes,
    })
}

/// Attaches the training model's per-token cost to a selection breakdown.
pub fn with_training(mut cost: CostBreakdown, train: &TransformerConfig) -> CostBreakdown {
    cost.train_flops_per_token = training_flops_per_token(train);
    cost.notes
        .push(format!("training `{}`: 3 x forward per token", train.name));
    cost
}
