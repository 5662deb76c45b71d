//! Greedy cosine matching between source and translation token embeddings.
//!
//! Every source token is credited with its best cosine against any
//! translation token (recall) and vice versa (precision). The maxima are
//! independent per row and per column; this is not an assignment problem.

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Below this, `P + R` is treated as zero and F is reported as 0.
pub const HARMONIC_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceBertScore {
    pub recall: f64,
    pub precision: f64,
    pub f_bert: f64,
}

/// Dense `src_rows x mt_rows` matrix of inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inner products of every src row with every mt row. Inputs are expected to
/// be row-normalized, which makes each entry a cosine.
pub fn similarity_matrix(src: &EmbeddingMatrix, mt: &EmbeddingMatrix) -> Result<SimilarityMatrix> {
    if src.dim() != mt.dim() {
        return Err(Error::DimMismatch {
            expected: src.dim(),
            found: mt.dim(),
        });
    }
    let mut data = Vec::with_capacity(src.rows() * mt.rows());
    for s in src.iter_rows() {
        data.extend(mt.iter_rows().map(|t| dot(s, t)));
    }
    Ok(SimilarityMatrix {
        rows: src.rows(),
        cols: mt.rows(),
        data,
    })
}

/// Harmonic mean of precision and recall, 0 when undefined.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    let denom = precision + recall;
    if denom > HARMONIC_EPS {
        2.0 * precision * recall / denom
    } else {
        0.0
    }
}

pub fn sentence_bertscore(src: &EmbeddingMatrix, mt: &EmbeddingMatrix) -> Result<SentenceBertScore> {
    if src.rows() == 0 {
        return Err(Error::EmptyMatrix { side: "source" });
    }
    if mt.rows() == 0 {
        return Err(Error::EmptyMatrix { side: "translation" });
    }
    let sim = similarity_matrix(src, mt)?;

    let mut col_max = vec![f64::NEG_INFINITY; sim.cols];
    let mut recall_sum = 0.0;
    for i in 0..sim.rows {
        let row = sim.row(i);
        let mut row_max = f64::NEG_INFINITY;
        for (j, &v) in row.iter().enumerate() {
            row_max = row_max.max(v);
            col_max[j] = col_max[j].max(v);
        }
        recall_sum += row_max;
    }
    let precision_sum: f64 = col_max.iter().sum();

    let recall = recall_sum / sim.rows as f64;
    let precision = precision_sum / sim.cols as f64;
    Ok(SentenceBertScore {
        recall,
        precision,
        f_bert: f_measure(precision, recall),
    })
}
