//! `compsel` command-line interface.
//!
//! Every subcommand writes JSON to stdout (or `--out`), optionally a CSV
//! series to `--csv-out`, and exits 0. Failures exit 1 with a single JSON
//! line `{"error": "..."}` on stderr.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::jaccard_matrix;
use crate::corpus::{self, Corpus, ScoreTable};
use crate::error::{invalid, Error, Result};
use crate::flops::{self, CostBreakdown, SelectionCostSpec, SelectionMethod, TransformerConfig};
use crate::perf_model::{self, FrontierFit, MethodCostModel, PerfCurveParams, Run};
use crate::planner::{self, Selection};
use crate::selectors::{self, Bm25Params, PplMode};
use crate::theory::{self, UtilityModelParams};

#[derive(Parser, Debug)]
#[command(name = "compsel", version, about = "Compute-constrained data selection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-token FLOPs of a model and the selection cost of a method.
    Flops(FlopsArgs),
    /// Score a training corpus with one utility function.
    Score(ScoreArgs),
    /// Split a FLOP budget into selection cost and trainable tokens.
    Plan(PlanArgs),
    /// Pick a subset from scores, by count or by compute budget.
    Select(SelectArgs),
    /// Simulate the per-budget winner for a scenario file.
    Simulate(SimulateArgs),
    /// Fit the compute-performance curve of one method to its runs.
    Fit(FitArgs),
    /// Extract and fit the Pareto frontier of a set of runs.
    Pareto(ParetoArgs),
    /// Smallest training-to-selector ratio that crosses the frontier.
    Extrapolate(CrossingArgs),
    /// Smallest number of tasks that amortizes selection past the frontier.
    Breakeven(CrossingArgs),
    /// Pairwise Jaccard similarity between selections.
    Jaccard(JaccardArgs),
    /// Optimal selection compute under the expected-utility model.
    #[command(name = "theory-opt")]
    TheoryOpt(TheoryArgs),
}

#[derive(Args, Debug, Default)]
struct OutputArgs {
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an (x, y) CSV series here.
    #[arg(long = "csv-out")]
    csv_out: Option<PathBuf>,
}

/// Shared cost-accounting flags.
#[derive(Args, Debug)]
struct CostArgs {
    /// Training model name (built-in or from --config).
    #[arg(long, default_value = "llama2-7b")]
    model: String,
    /// JSON file of model configs keyed by name.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Selection method whose cost is charged.
    #[arg(long, default_value = "random")]
    method: SelectionMethod,
    /// Selector model for ppl/gradient.
    #[arg(long)]
    selector: Option<String>,
    /// Embedding model parameter count for embed.
    #[arg(long = "embed-params", default_value_t = 2.2e8)]
    embed_params: f64,
    #[arg(long = "validation-tokens", default_value_t = 0)]
    validation_tokens: u64,
}

#[derive(Args, Debug)]
struct FlopsArgs {
    #[command(flatten)]
    cost: CostArgs,
    /// Corpus tokens to price.
    #[arg(long, default_value_t = 1)]
    tokens: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScoreMethod {
    Bm25,
    Embed,
    Ppl,
    Grad,
    Random,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long, value_enum)]
    method: ScoreMethod,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    validation: Option<PathBuf>,
    /// Precomputed scores (ppl).
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Training-set vectors (embed, grad).
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Validation-set vectors (embed, grad).
    #[arg(long = "validation-vectors")]
    validation_vectors: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.2)]
    k1: f64,
    #[arg(long, default_value_t = 0.75)]
    b: f64,
    /// Learning-rate scale of the gradient utility.
    #[arg(long)]
    eta: Option<f64>,
    /// Hashed TF-IDF dimension when embed has no --vectors.
    #[arg(long = "embed-dim", default_value_t = 1024)]
    embed_dim: usize,
    /// Scores JSONL destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Total FLOP budget.
    #[arg(long)]
    budget: f64,
    #[command(flatten)]
    cost: CostArgs,
    /// Corpus whose tokens are priced; alternative to --corpus-tokens.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long = "corpus-tokens")]
    corpus_tokens: Option<u64>,
    /// Optional data budget as a fraction of corpus tokens.
    #[arg(long = "data-fraction")]
    data_fraction: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Top,
    Mid,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    /// Select exactly this many examples.
    #[arg(long, conflicts_with = "budget")]
    k: Option<usize>,
    /// Select under this FLOP budget.
    #[arg(long)]
    budget: Option<f64>,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long = "data-fraction")]
    data_fraction: Option<f64>,
    /// Ranking order (mid ranks by distance to the median score).
    #[arg(long, value_enum, default_value = "top")]
    order: Order,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Runs JSONL.
    #[arg(long)]
    runs: PathBuf,
    /// Method label whose runs are fitted.
    #[arg(long)]
    method: String,
    #[arg(long = "dataset-tokens")]
    dataset_tokens: f64,
    #[arg(long = "train-flops-per-token")]
    train_flops_per_token: f64,
    #[arg(long = "fixed-flops", default_value_t = 0.0)]
    fixed_flops: f64,
    #[arg(long, default_value_t = perf_model::DEFAULT_PBAR_BUFFER)]
    eps: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ParetoArgs {
    #[arg(long)]
    runs: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CrossingArgs {
    /// JSON with `curve`, `cost`, `frontier` and `ratio_grid` or `max_tasks`.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct JaccardArgs {
    /// Selection JSON files; labels are the file stems.
    #[arg(required = true, num_args = 2..)]
    selections: Vec<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[arg(long = "dataset-size")]
    dataset_size: f64,
    #[arg(long)]
    budget: f64,
    #[arg(long = "train-cost")]
    train_cost: f64,
    #[arg(long)]
    concentration: f64,
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

impl clap::ValueEnum for SelectionMethod {
    fn value_variants<'a>() -> &'a [Self] {
        &[
            SelectionMethod::Bm25,
            SelectionMethod::Embed,
            SelectionMethod::Ppl,
            SelectionMethod::Gradient,
            SelectionMethod::Random,
        ]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.as_str()))
    }
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

/// How a scenario method's one-off selection cost is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionCostEntry {
    /// A literal FLOP count.
    Fixed { flops: f64 },
    /// `passes x flops_per_token x dataset_tokens`.
    PerToken { flops_per_token: f64, passes: f64 },
    /// Priced with the selection-cost model; `selector` names a model config.
    Method {
        method: SelectionMethod,
        #[serde(default)]
        selector: Option<String>,
        #[serde(default)]
        embed_param_count: f64,
        #[serde(default)]
        validation_tokens: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMethod {
    pub label: String,
    pub curve: PerfCurveParams,
    pub selection: SelectionCostEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPanel {
    pub name: String,
    /// Training cost per token; alternatively `train_model`.
    #[serde(default)]
    pub train_flops_per_token: Option<f64>,
    #[serde(default)]
    pub train_model: Option<String>,
    pub budget_grid: Vec<f64>,
    pub methods: Vec<ScenarioMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub model_configs: BTreeMap<String, TransformerConfig>,
    pub dataset_tokens: f64,
    #[serde(default)]
    pub seed: u64,
    pub panels: Vec<ScenarioPanel>,
}

/// A panel name, its methods as `(curve, cost)` pairs, and its budget grid.
pub type ResolvedPanel = (String, Vec<(PerfCurveParams, MethodCostModel)>, Vec<f64>);

impl ScenarioConfig {
    fn model(&self, name: &str) -> Result<TransformerConfig> {
        if let Some(cfg) = self.model_configs.get(name) {
            let mut cfg = cfg.clone();
            cfg.name = name.to_string();
            cfg.validate()?;
            return Ok(cfg);
        }
        TransformerConfig::builtin()
            .remove(name)
            .ok_or_else(|| Error::Invalid(format!("unknown model `{name}`")))
    }

    /// Resolves every panel into `(curve, cost)` pairs plus its budget grid.
    pub fn resolve(&self) -> Result<Vec<ResolvedPanel>> {
        if !(self.dataset_tokens > 0.0) {
            return invalid("dataset_tokens must be positive");
        }
        let mut panels = Vec::with_capacity(self.panels.len());
        for panel in &self.panels {
            if panel.budget_grid.windows(2).any(|w| w[0] >= w[1]) {
                return invalid(format!("panel `{}`: budget grid must be strictly increasing", panel.name));
            }
            let train = match (panel.train_flops_per_token, &panel.train_model) {
                (Some(c), None) => c,
                (None, Some(name)) => flops::training_flops_per_token(&self.model(name)?),
                _ => {
                    return invalid(format!(
                        "panel `{}`: give exactly one of train_flops_per_token, train_model",
                        panel.name
                    ))
                }
            };
            let mut methods = Vec::with_capacity(panel.methods.len());
            for m in &panel.methods {
                let fixed = match &m.selection {
                    SelectionCostEntry::Fixed { flops } => *flops,
                    SelectionCostEntry::PerToken { flops_per_token, passes } => {
                        passes * flops_per_token * self.dataset_tokens
                    }
                    SelectionCostEntry::Method {
                        method,
                        selector,
                        embed_param_count,
                        validation_tokens,
                    } => {
                        let mut spec = SelectionCostSpec::new(*method).with_embed_params(*embed_param_count);
                        if let Some(name) = selector {
                            spec = spec.with_selector(self.model(name)?);
                        }
                        flops::selection_cost(&spec, self.dataset_tokens as u64, *validation_tokens)?.selection_flops
                    }
                };
                methods.push((
                    m.curve,
                    MethodCostModel {
                        label: m.label.clone(),
                        fixed_selection_flops: fixed,
                        train_flops_per_token: train,
                        dataset_tokens: self.dataset_tokens,
                    },
                ));
            }
            panels.push((panel.name.clone(), methods, panel.budget_grid.clone()));
        }
        Ok(panels)
    }
}

#[derive(Debug, Clone, Deserialize)]
struct CrossingConfig {
    curve: PerfCurveParams,
    cost: MethodCostModel,
    frontier: FrontierFit,
    #[serde(default)]
    ratio_grid: Vec<f64>,
    #[serde(default)]
    max_tasks: Option<u32>,
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Parses `argv` and runs one subcommand against the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
            let _ = writeln!(err, "{}", json!({ "error": first }));
            return 1;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", json!({ "error": e.to_string() }));
            1
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Flops(a) => cmd_flops(a, out),
        Command::Score(a) => cmd_score(a, out),
        Command::Plan(a) => cmd_plan(a, out),
        Command::Select(a) => cmd_select(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Fit(a) => cmd_fit(a, out),
        Command::Pareto(a) => cmd_pareto(a, out),
        Command::Extrapolate(a) => cmd_extrapolate(a, out),
        Command::Breakeven(a) => cmd_breakeven(a, out),
        Command::Jaccard(a) => cmd_jaccard(a, out),
        Command::TheoryOpt(a) => cmd_theory(a, out),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn emit(value: &impl Serialize, output: &OutputArgs, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("outputs serialize") + "\n";
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(io_err(path)),
        None => out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

fn emit_csv(output: &OutputArgs, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let Some(path) = &output.csv_out else { return Ok(()) };
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(io_err(path))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

fn load_runs(path: &Path) -> Result<Vec<Run>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut runs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let run: Run = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        run.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        runs.push(run);
    }
    if runs.is_empty() {
        return invalid(format!("{}: no runs", path.display()));
    }
    Ok(runs)
}

impl CostArgs {
    fn models(&self) -> Result<BTreeMap<String, TransformerConfig>> {
        let mut models = TransformerConfig::builtin();
        if let Some(path) = &self.config {
            models.extend(flops::load_model_configs(path)?);
        }
        Ok(models)
    }

    fn breakdown(&self, corpus_tokens: u64) -> Result<(TransformerConfig, CostBreakdown)> {
        let models = self.models()?;
        let lookup = |name: &str| {
            models
                .get(name)
                .cloned()
                .ok_or_else(|| Error::Invalid(format!("unknown model `{name}`")))
        };
        let train = lookup(&self.model)?;
        let mut spec = SelectionCostSpec::new(self.method);
        if self.method == SelectionMethod::Embed {
            spec = spec.with_embed_params(self.embed_params);
        }
        if matches!(self.method, SelectionMethod::Ppl | SelectionMethod::Gradient) {
            let name = self.selector.as_deref().unwrap_or(&self.model);
            spec = spec.with_selector(lookup(name)?);
        }
        let cost = flops::selection_cost(&spec, corpus_tokens, self.validation_tokens)?;
        Ok((train.clone(), flops::with_training(cost, &train)))
    }
}

fn cmd_flops(a: FlopsArgs, out: &mut dyn Write) -> Result<()> {
    let (model, cost) = a.cost.breakdown(a.tokens)?;
    let n = flops::param_count(&model);
    let train = flops::training_flops_per_token(&model);
    let tokens = a.tokens as f64;
    let value = json!({
        "model": model.name,
        "param_count": n,
        "forward_flops_per_token": flops::forward_flops_per_token(&model),
        "training_flops_per_token": train,
        "tokens": a.tokens,
        "training_flops": train * tokens,
        "approx_6nd": flops::approx_6nd(n, tokens),
        "flop_ratio_vs_6nd": train / (6.0 * n),
        "method": a.cost.method,
        "cost": cost,
    });
    emit(&value, &a.output, out)
}

fn write_score_table(table: &ScoreTable, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => corpus::write_scores(p, table),
        None => {
            for (id, score) in &table.scores {
                let line = json!({ "id": id, "score": score });
                writeln!(out, "{line}").map_err(io_err(Path::new("<stdout>")))?;
            }
            Ok(())
        }
    }
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str, method: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Invalid(format!("--{flag} is required for --method {method}")))
}

fn cmd_score(a: ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let train = corpus::load_corpus(&a.corpus)?;
    let table = match a.method {
        ScoreMethod::Bm25 => {
            let val = corpus::load_corpus(need(&a.validation, "validation", "bm25")?)?;
            selectors::bm25_utility(&train, &val, Bm25Params { k1: a.k1, b: a.b })?
        }
        ScoreMethod::Embed => {
            let (tv, vv) = match (&a.vectors, &a.validation_vectors) {
                (Some(tp), Some(vp)) => {
                    let val = corpus::load_corpus(need(&a.validation, "validation", "embed")?)?;
                    (corpus::load_vectors(tp, &train)?, corpus::load_vectors(vp, &val)?)
                }
                (None, None) => {
                    let val = corpus::load_corpus(need(&a.validation, "validation", "embed")?)?;
                    (
                        selectors::hashed_tfidf_embed(&train, a.embed_dim, a.seed)?,
                        selectors::hashed_tfidf_embed(&val, a.embed_dim, a.seed)?,
                    )
                }
                _ => return invalid("--vectors and --validation-vectors go together"),
            };
            selectors::embed_utility(&tv, &vv)?
        }
        ScoreMethod::Ppl => {
            let mut t = corpus::load_scores(need(&a.scores, "scores", "ppl")?, &train)?;
            t.method = "ppl".into();
            t
        }
        ScoreMethod::Grad => {
            let val = corpus::load_corpus(need(&a.validation, "validation", "grad")?)?;
            let tv = corpus::load_vectors(need(&a.vectors, "vectors", "grad")?, &train)?;
            let vv = corpus::load_vectors(need(&a.validation_vectors, "validation-vectors", "grad")?, &val)?;
            let eta = a.eta.ok_or_else(|| Error::Invalid("--eta is required for --method grad".into()))?;
            selectors::gradient_utility(&tv, &vv, eta)?
        }
        ScoreMethod::Random => selectors::random_utility(&train, a.seed),
    };
    write_score_table(&table, a.out.as_deref(), out)
}

fn corpus_tokens(corpus: Option<&Corpus>, explicit: Option<u64>) -> Result<u64> {
    match (corpus, explicit) {
        (Some(c), None) => Ok(c.total_tokens()),
        (None, Some(t)) => Ok(t),
        (Some(_), Some(_)) => invalid("give --corpus or --corpus-tokens, not both"),
        (None, None) => invalid("one of --corpus, --corpus-tokens is required"),
    }
}

fn apply_fraction(plan: planner::BudgetPlan, fraction: Option<f64>, total_tokens: u64) -> Result<planner::BudgetPlan> {
    let Some(f) = fraction else { return Ok(plan) };
    if !(f > 0.0 && f <= 1.0) {
        return invalid("--data-fraction must lie in (0, 1]");
    }
    Ok(plan.with_token_cap((f * total_tokens as f64).floor() as u64))
}

fn cmd_plan(a: PlanArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = a.corpus.as_deref().map(corpus::load_corpus).transpose()?;
    let tokens = corpus_tokens(corpus.as_ref(), a.corpus_tokens)?;
    let (_, cost) = a.cost.breakdown(tokens)?;
    let plan = planner::make_budget_plan(a.budget, &cost)?;
    let plan = apply_fraction(plan, a.data_fraction, tokens)?;
    emit(&plan, &a.output, out)
}

fn cmd_select(a: SelectArgs, out: &mut dyn Write) -> Result<()> {
    let corpus = corpus::load_corpus(&a.corpus)?;
    let scores = corpus::load_scores(&a.scores, &corpus)?;
    let mode = match a.order {
        Order::Top => PplMode::Top,
        Order::Mid => PplMode::Mid,
    };
    let selection: Selection = match (a.k, a.budget) {
        (Some(k), None) => {
            if mode == PplMode::Top {
                planner::select_topk(&scores, &corpus, k)?
            } else {
                if k > corpus.len() {
                    return invalid(format!("k = {k} exceeds corpus size {}", corpus.len()));
                }
                let ranking: Vec<String> = selectors::ppl_rank(&scores, mode).into_iter().take(k).collect();
                let tokens_used = ranking.iter().map(|id| corpus.get(id).map_or(0, |e| e.token_count)).sum();
                let mut sorted = ranking.clone();
                sorted.sort();
                let utility_sum = sorted.iter().filter_map(|id| scores.get(id)).sum();
                Selection {
                    ids: ranking,
                    tokens_used,
                    utility_sum,
                }
            }
        }
        (None, Some(budget)) => {
            let (_, cost) = a.cost.breakdown(corpus.total_tokens())?;
            let plan = planner::make_budget_plan(budget, &cost)?;
            let plan = apply_fraction(plan, a.data_fraction, corpus.total_tokens())?;
            let ranking = selectors::ppl_rank(&scores, mode);
            planner::select_under_budget(&ranking, &corpus, &plan, Some(&scores))?
        }
        _ => return invalid("give exactly one of --k, --budget"),
    };
    emit(&selection, &a.output, out)
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let scenario: ScenarioConfig = read_json(&a.config)?;
    let panels = scenario.resolve()?;
    let mut results = Vec::with_capacity(panels.len());
    let mut csv = Vec::new();
    for (name, methods, grid) in &panels {
        let rows = perf_model::simulate(methods, grid)?;
        for row in &rows {
            for o in &row.outcomes {
                if let Some(p) = o.performance {
                    csv.push(format!("{name},{},{},{p}", o.method, row.budget));
                }
            }
        }
        let winners: Vec<Option<String>> = rows.iter().map(|r| r.winner.clone()).collect();
        let costs: Vec<&MethodCostModel> = methods.iter().map(|m| &m.1).collect();
        results.push(json!({
            "name": name,
            "methods": costs,
            "winners": winners,
            "rows": rows,
        }));
    }
    let value = json!({ "seed": a.seed.unwrap_or(scenario.seed), "panels": results });
    emit_csv(&a.output, "panel,method,x,y", csv)?;
    emit(&value, &a.output, out)
}

fn cmd_fit(a: FitArgs, out: &mut dyn Write) -> Result<()> {
    let runs = load_runs(&a.runs)?;
    let mut obs: Vec<(f64, f64)> = runs
        .iter()
        .filter(|r| r.method == a.method)
        .map(|r| (r.tokens_trained, r.performance))
        .collect();
    obs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let cost = MethodCostModel {
        label: a.method.clone(),
        fixed_selection_flops: a.fixed_flops,
        train_flops_per_token: a.train_flops_per_token,
        dataset_tokens: a.dataset_tokens,
    };
    let curve = perf_model::fit_perf_curve(&obs, &cost, a.eps)?;
    let n = 100;
    emit_csv(
        &a.output,
        "x,y",
        (0..=n).map(|i| {
            let k = a.dataset_tokens * i as f64 / n as f64;
            let c = perf_model::total_cost(k, &cost).expect("k in range");
            format!("{c},{}", perf_model::predicted_performance(k, &curve, &cost))
        }),
    )?;
    emit(&json!({ "method": a.method, "observations": obs.len(), "curve": curve }), &a.output, out)
}

fn cmd_pareto(a: ParetoArgs, out: &mut dyn Write) -> Result<()> {
    let runs = load_runs(&a.runs)?;
    let frontier = perf_model::pareto_frontier(&runs);
    let fit = if frontier.len() >= 2 {
        perf_model::fit_frontier(&frontier).ok()
    } else {
        None
    };
    emit_csv(
        &a.output,
        "x,y",
        frontier.iter().map(|r| format!("{},{}", r.compute, r.performance)),
    )?;
    emit(&json!({ "frontier": frontier, "fit": fit }), &a.output, out)
}

fn cmd_extrapolate(a: CrossingArgs, out: &mut dyn Write) -> Result<()> {
    let cfg: CrossingConfig = read_json(&a.config)?;
    let ratio = perf_model::extrapolate_optimal_ratio(&cfg.curve, &cfg.cost, &cfg.frontier, &cfg.ratio_grid)?;
    emit(&json!({ "method": cfg.cost.label, "ratio": ratio }), &a.output, out)
}

fn cmd_breakeven(a: CrossingArgs, out: &mut dyn Write) -> Result<()> {
    let cfg: CrossingConfig = read_json(&a.config)?;
    let max_tasks = cfg
        .max_tasks
        .ok_or_else(|| Error::Invalid("breakeven config needs max_tasks".into()))?;
    let tasks = perf_model::break_even_tasks(&cfg.curve, &cfg.cost, &cfg.frontier, max_tasks)?;
    emit(&json!({ "method": cfg.cost.label, "tasks": tasks }), &a.output, out)
}

fn cmd_jaccard(a: JaccardArgs, out: &mut dyn Write) -> Result<()> {
    let mut sets = BTreeMap::new();
    for path in &a.selections {
        let sel: Selection = read_json(path)?;
        let label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        if sets.insert(label.clone(), sel.ids.into_iter().collect::<BTreeSet<_>>()).is_some() {
            return Err(Error::DuplicateId(label));
        }
    }
    let matrix = jaccard_matrix(&sets)?;
    if let Some(path) = &a.output.csv_out {
        std::fs::write(path, matrix.to_csv()).map_err(io_err(path))?;
    }
    emit(&matrix, &a.output, out)
}

fn cmd_theory(a: TheoryArgs, out: &mut dyn Write) -> Result<()> {
    let params = UtilityModelParams {
        dataset_size: a.dataset_size,
        budget: a.budget,
        train_cost: a.train_cost,
        concentration: a.concentration,
        rate: a.rate,
    };
    let tol = a.tol.unwrap_or(1e-6 * a.budget);
    let opt = theory::optimal_selection_compute(&params, tol)?;
    emit(&opt, &a.output, out)
}
