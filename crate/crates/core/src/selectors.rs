//! Utility functions v(x; V) for the lexicon, embedding, perplexity and
//! gradient method families, plus the random baseline.
//!
//! Scorers parallelize over training examples. Every mean over the validation
//! set accumulates in ascending validation-id order, so results are
//! bit-identical for any number of worker threads.

use std::collections::{BTreeMap, HashMap};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, ScoreTable, VectorTable};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 >= 0.0 && self.k1.is_finite()) {
            return invalid("bm25 k1 must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.b) {
            return invalid("bm25 b must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PplMode {
    Top,
    Mid,
}

/// Lowercased maximal alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// `ln(1 + (n - df + 0.5) / (df + 0.5))`, non-negative for `df <= n`.
pub fn bm25_idf(n_docs: usize, df: usize) -> f64 {
    let n = n_docs as f64;
    let df = df as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

struct Bm25Index {
    n_docs: usize,
    avg_len: f64,
    df: HashMap<String, usize>,
}

impl Bm25Index {
    fn build(docs: &[Vec<String>]) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut total = 0usize;
        for doc in docs {
            total += doc.len();
            let mut uniq: Vec<&String> = doc.iter().collect();
            uniq.sort_unstable();
            uniq.dedup();
            for t in uniq {
                *df.entry(t.clone()).or_default() += 1;
            }
        }
        let avg_len = if docs.is_empty() { 0.0 } else { total as f64 / docs.len() as f64 };
        Bm25Index {
            n_docs: docs.len(),
            avg_len,
            df,
        }
    }

    /// Okapi score of one document against one query; each distinct query
    /// term contributes once.
    fn score(&self, tf: &HashMap<&str, usize>, doc_len: usize, query: &[String], p: Bm25Params) -> f64 {
        let norm = if self.avg_len > 0.0 {
            1.0 - p.b + p.b * doc_len as f64 / self.avg_len
        } else {
            1.0
        };
        let mut sum = 0.0;
        for term in query {
            let Some(&f) = tf.get(term.as_str()) else { continue };
            let f = f as f64;
            let df = self.df.get(term).copied().unwrap_or(0);
            sum += bm25_idf(self.n_docs, df) * f * (p.k1 + 1.0) / (f + p.k1 * norm);
        }
        sum
    }
}

fn distinct_sorted(tokens: Vec<String>) -> Vec<String> {
    let mut t = tokens;
    t.sort_unstable();
    t.dedup();
    t
}

/// Mean Okapi BM25 of each training document against every validation query.
/// IDF and average length come from the training corpus.
pub fn bm25_utility(train: &Corpus, validation: &Corpus, params: Bm25Params) -> Result<ScoreTable> {
    params.validate()?;
    if validation.is_empty() {
        return invalid("bm25 utility needs a non-empty validation set");
    }
    if train.is_empty() {
        return invalid("bm25 utility needs a non-empty training set");
    }
    let docs: Vec<Vec<String>> = train.examples().iter().map(|e| tokenize(&e.text)).collect();
    let index = Bm25Index::build(&docs);

    let mut val: Vec<(&str, Vec<String>)> = validation
        .examples()
        .iter()
        .map(|e| (e.id.as_str(), distinct_sorted(tokenize(&e.text))))
        .collect();
    val.sort_by(|a, b| a.0.cmp(b.0));
    let n_val = val.len() as f64;

    let scores: Vec<(String, f64)> = train
        .examples()
        .par_iter()
        .zip(docs.par_iter())
        .map(|(ex, doc)| {
            let mut tf: HashMap<&str, usize> = HashMap::new();
            for t in doc {
                *tf.entry(t.as_str()).or_default() += 1;
            }
            let total: f64 = val
                .iter()
                .map(|(_, q)| index.score(&tf, doc.len(), q, params))
                .sum();
            (ex.id.clone(), total / n_val)
        })
        .collect();
    Ok(ScoreTable {
        method: "bm25".into(),
        scores: scores.into_iter().collect(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

fn check_dims(train: &VectorTable, val: &VectorTable) -> Result<()> {
    if val.is_empty() {
        return invalid("validation table is empty");
    }
    if train.dim != val.dim {
        return Err(Error::DimensionMismatch {
            expected: train.dim,
            got: val.dim,
        });
    }
    Ok(())
}

/// Mean cosine similarity of each training vector to the validation vectors.
pub fn embed_utility(train_vecs: &VectorTable, val_vecs: &VectorTable) -> Result<ScoreTable> {
    check_dims(train_vecs, val_vecs)?;
    let n_val = val_vecs.len() as f64;
    let scores: BTreeMap<String, f64> = train_vecs
        .vectors
        .par_iter()
        .map(|(id, x)| {
            let total: f64 = val_vecs.vectors.values().map(|v| cosine(x, v)).sum();
            (id.clone(), total / n_val)
        })
        .collect();
    Ok(ScoreTable {
        method: "embed".into(),
        scores,
    })
}

/// Seeded 64-bit FNV-1a.
fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Signed feature-hashed TF-IDF vectors, L2-normalized. IDF is the smoothed
/// `ln((1 + n) / (1 + df)) + 1` over `corpus`. Empty texts map to zero.
pub fn hashed_tfidf_embed(corpus: &Corpus, dim: usize, seed: u64) -> Result<VectorTable> {
    if dim == 0 {
        return invalid("embedding dim must be >= 1");
    }
    let docs: Vec<Vec<String>> = corpus.examples().iter().map(|e| tokenize(&e.text)).collect();
    let index = Bm25Index::build(&docs);
    let n = corpus.len() as f64;

    let vectors: BTreeMap<String, Vec<f64>> = corpus
        .examples()
        .par_iter()
        .zip(docs.par_iter())
        .map(|(ex, doc)| {
            let mut tf: BTreeMap<&str, usize> = BTreeMap::new();
            for t in doc {
                *tf.entry(t.as_str()).or_default() += 1;
            }
            let mut v = vec![0.0; dim];
            for (term, count) in tf {
                let df = index.df.get(term).copied().unwrap_or(0) as f64;
                let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
                let h = fnv1a(seed, term.as_bytes());
                let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
                v[(h % dim as u64) as usize] += sign * count as f64 * idf;
            }
            let l2 = norm(&v);
            if l2 > 0.0 {
                v.iter_mut().for_each(|x| *x /= l2);
            }
            (ex.id.clone(), v)
        })
        .collect();
    VectorTable::new(vectors)
}

fn cmp_desc_then_id(a: (&str, f64), b: (&str, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// Orders ids for prefix consumption.
///
/// `Top`: score descending, ties by ascending id. `Mid`: ascending distance
/// between an id's rank in the `Top` order and the median rank, ties by
/// ascending id. Tied scores share their average rank, so a block of equal
/// scores is never split by the id tie-break of the `Top` order.
pub fn ppl_rank(scores: &ScoreTable, mode: PplMode) -> Vec<String> {
    let mut top: Vec<(&str, f64)> = scores.scores.iter().map(|(id, &s)| (id.as_str(), s)).collect();
    top.sort_by(|a, b| cmp_desc_then_id(*a, *b));
    if mode == PplMode::Top {
        return top.into_iter().map(|(id, _)| id.to_string()).collect();
    }

    let n = top.len();
    let median = (n as f64 - 1.0) / 2.0;
    let mut ranked: Vec<(&str, f64)> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && top[j + 1].1 == top[i].1 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0;
        for item in &top[i..=j] {
            ranked.push((item.0, (avg_rank - median).abs()));
        }
        i = j + 1;
    }
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().map(|(id, _)| id.to_string()).collect()
}

/// `eta * <g_x, mean_v g_v>` for every training feature vector.
pub fn gradient_utility(train_feats: &VectorTable, val_feats: &VectorTable, eta: f64) -> Result<ScoreTable> {
    check_dims(train_feats, val_feats)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return invalid("eta must be positive");
    }
    let mut mean = vec![0.0; val_feats.dim];
    for v in val_feats.vectors.values() {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let n_val = val_feats.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n_val);

    let scores = train_feats
        .vectors
        .par_iter()
        .map(|(id, g)| (id.clone(), eta * dot(g, &mean)))
        .collect();
    Ok(ScoreTable {
        method: "grad".into(),
        scores,
    })
}

/// Uniform (0, 1) scores from ChaCha8 seeded with `seed`, drawn in ascending
/// id order.
pub fn random_utility(corpus: &Corpus, seed: u64) -> ScoreTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<&str> = corpus.ids().collect();
    ids.sort_unstable();
    let scores = ids
        .into_iter()
        .map(|id| {
            // 53 random bits centred in their cell: strictly inside (0, 1).
            let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            (id.to_string(), u)
        })
        .collect();
    ScoreTable {
        method: "random".into(),
        scores,
    }
}
