//! Overlap between subsets picked by different selection methods.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// `|a ∩ b| / |a ∪ b|`, with two empty sets counted as identical.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// Header row plus one row per label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            out.push_str(l);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise Jaccard similarity in label order.
pub fn jaccard_matrix(selections: &BTreeMap<String, BTreeSet<String>>) -> Result<SimilarityMatrix> {
    if selections.len() < 2 {
        return invalid("jaccard matrix needs at least 2 selections");
    }
    let labels: Vec<String> = selections.keys().cloned().collect();
    let sets: Vec<&BTreeSet<String>> = selections.values().collect();
    let n = sets.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        values[i][i] = 1.0;
        for j in i + 1..n {
            let s = jaccard(sets[i], sets[j]);
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    Ok(SimilarityMatrix { labels, values })
}
