//! Corpora and precomputed per-example artifacts, all stored as JSONL.
//!
//! ```text
//! corpus   {"id": str, "text": str, "token_count": int?}
//! vectors  {"id": str, "vector": [real]}
//! scores   {"id": str, "score": real}
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub text: String,
    pub token_count: u64,
}

/// Whitespace token count, the fallback when a row carries no `token_count`.
pub fn whitespace_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// Ordered, id-unique collection of examples.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    examples: Vec<Example>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Corpus {
    pub fn new(examples: Vec<Example>) -> Result<Self> {
        let mut index = HashMap::with_capacity(examples.len());
        let mut total_tokens = 0u64;
        for (i, ex) in examples.iter().enumerate() {
            if ex.id.is_empty() {
                return invalid(format!("example {i} has an empty id"));
            }
            if ex.token_count == 0 {
                return invalid(format!("example `{}` has token_count 0", ex.id));
            }
            if index.insert(ex.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(ex.id.clone()));
            }
            total_tokens += ex.token_count;
        }
        Ok(Corpus {
            examples,
            index,
            total_tokens,
        })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn get(&self, id: &str) -> Option<&Example> {
        self.index.get(id).map(|&i| &self.examples[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.examples.iter().map(|e| e.id.as_str())
    }
}

/// Per-example utility values for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub method: String,
    pub scores: BTreeMap<String, f64>,
}

impl ScoreTable {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.scores.get(id).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorTable {
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl VectorTable {
    /// Builds a table, checking uniform dimension and finite entries.
    pub fn new(vectors: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        let dim = vectors.values().next().map_or(0, Vec::len);
        for (id, v) in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return invalid(format!("vector `{id}` has a non-finite entry"));
            }
        }
        Ok(VectorTable { dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusRow {
    id: String,
    text: String,
    #[serde(default)]
    token_count: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct VectorRow {
    id: String,
    vector: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ScoreRow {
    id: String,
    score: f64,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Yields `(line_number, parsed_row)` for every non-blank line.
fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let mut rows = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg: e.to_string(),
        })?;
        rows.push((lineno, row));
    }
    Ok(rows)
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let rows: Vec<(usize, CorpusRow)> = read_jsonl(path)?;
    let mut examples = Vec::with_capacity(rows.len());
    for (lineno, row) in rows {
        let token_count = row
            .token_count
            .unwrap_or_else(|| whitespace_tokens(&row.text));
        if token_count == 0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("example `{}` has no tokens", row.id),
            });
        }
        examples.push(Example {
            id: row.id,
            text: row.text,
            token_count,
        });
    }
    Corpus::new(examples)
}

/// Checks that `ids` covers `corpus` exactly, with no duplicates.
fn check_coverage<'a>(ids: impl Iterator<Item = &'a str>, corpus: &Corpus) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !corpus.contains(id) {
            return Err(Error::UnknownId(id.to_string()));
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    let missing: Vec<String> = corpus
        .ids()
        .filter(|id| !seen.contains(id))
        .map(str::to_string)
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingIds(missing));
    }
    Ok(())
}

pub fn load_vectors(path: &Path, corpus: &Corpus) -> Result<VectorTable> {
    let rows: Vec<(usize, VectorRow)> = read_jsonl(path)?;
    check_coverage(rows.iter().map(|(_, r)| r.id.as_str()), corpus)?;
    let dim = rows.first().map_or(0, |(_, r)| r.vector.len());
    let mut vectors = BTreeMap::new();
    for (lineno, row) in rows {
        if row.vector.len() != dim {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: Error::DimensionMismatch {
                    expected: dim,
                    got: row.vector.len(),
                }
                .to_string(),
            });
        }
        vectors.insert(row.id, row.vector);
    }
    VectorTable::new(vectors)
}

pub fn load_scores(path: &Path, corpus: &Corpus) -> Result<ScoreTable> {
    let rows: Vec<(usize, ScoreRow)> = read_jsonl(path)?;
    check_coverage(rows.iter().map(|(_, r)| r.id.as_str()), corpus)?;
    let mut scores = BTreeMap::new();
    for (lineno, row) in rows {
        if !row.score.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("non-finite score for `{}`", row.id),
            });
        }
        scores.insert(row.id, row.score);
    }
    let method = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scores")
        .to_string();
    Ok(ScoreTable { method, scores })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_rows<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = create(path)?;
    for row in rows {
        let line = serde_json::to_string(&row).expect("rows serialize");
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    write_rows(path, corpus.examples().iter())
}

/// Writes scores in ascending id order.
pub fn write_scores(path: &Path, table: &ScoreTable) -> Result<()> {
    write_rows(
        path,
        table.scores.iter().map(|(id, &score)| ScoreRow {
            id: id.clone(),
            score,
        }),
    )
}

pub fn write_vectors(path: &Path, table: &VectorTable) -> Result<()> {
    write_rows(
        path,
        table.vectors.iter().map(|(id, v)| VectorRow {
            id: id.clone(),
            vector: v.clone(),
        }),
    )
}
