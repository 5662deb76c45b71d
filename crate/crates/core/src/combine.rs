//! Fusing the entity score with the embedding score, and system-level
//! aggregation.
//!
//! The α-free components (greedy-matching F and entity F) are computed once
//! per pair by [`score_components`]; every α, whether a single run or a
//! sweep, goes through [`apply_alpha`]. All means are summed in corpus order.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bertscore::{sentence_bertscore, SentenceBertScore};
use crate::corpus::Corpus;
use crate::embedding::EmbeddingFile;
use crate::error::{Error, Result};
use crate::kg::{kg_match_score, EntityMatchScore};

/// Interpolation weight on the entity score, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AlphaWeight(f64);

impl AlphaWeight {
    pub const DEFAULT: AlphaWeight = AlphaWeight(0.5);

    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(AlphaWeight(alpha))
        } else {
            Err(Error::AlphaOutOfRange(alpha))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for AlphaWeight {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<f64> for AlphaWeight {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        AlphaWeight::new(v)
    }
}

impl From<AlphaWeight> for f64 {
    fn from(a: AlphaWeight) -> f64 {
        a.0
    }
}

impl fmt::Display for AlphaWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `alpha * f_kg + (1 - alpha) * f_bert`
pub fn combine(f_kg: f64, f_bert: f64, alpha: AlphaWeight) -> Result<f64> {
    for v in [f_kg, f_bert] {
        if !v.is_finite() {
            return Err(Error::NonFiniteInput(v));
        }
    }
    let a = alpha.get();
    Ok(a * f_kg + (1.0 - a) * f_bert)
}

/// α-independent scores for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComponents {
    pub pair_id: String,
    pub bert: SentenceBertScore,
    pub kg: EntityMatchScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub pair_id: String,
    pub recall: f64,
    pub precision: f64,
    pub f_bert: f64,
    pub f_kg: f64,
    pub f_kg_bert: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system_id: String,
    pub lang_pair: String,
    pub alpha: f64,
    pub n_sentences: usize,
    pub mean_f_bert: f64,
    pub mean_f_kg: f64,
    /// System-level score.
    pub mean_f_kg_bert: f64,
}

/// Scores for every pair at one α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub alpha: f64,
    pub systems: Vec<SystemReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sentences: Vec<SentenceScore>,
}

fn check_alignment(corpus: &Corpus, embeddings: &EmbeddingFile) -> Result<()> {
    if corpus.len() != embeddings.len() {
        return Err(Error::CountMismatch {
            corpus: corpus.len(),
            embeddings: embeddings.len(),
        });
    }
    Ok(())
}

/// Greedy-matching and entity scores for every pair, in corpus order.
///
/// Pairs are scored in parallel on the current rayon pool; each pair's result
/// depends only on its own inputs, so output is independent of thread count.
pub fn score_components(corpus: &Corpus, embeddings: &EmbeddingFile) -> Result<Vec<PairComponents>> {
    check_alignment(corpus, embeddings)?;
    corpus
        .pairs()
        .par_iter()
        .zip(embeddings.pairs.par_iter())
        .map(|(pair, emb)| {
            let bert = sentence_bertscore(&emb.src, &emb.mt).map_err(|e| e.for_pair(&pair.pair_id))?;
            let kg = kg_match_score(&pair.src_entities, &pair.mt_entities);
            Ok(PairComponents {
                pair_id: pair.pair_id.clone(),
                bert,
                kg,
            })
        })
        .collect()
}

pub fn apply_alpha(components: &[PairComponents], alpha: AlphaWeight) -> Result<Vec<SentenceScore>> {
    components
        .iter()
        .map(|c| {
            let f_kg_bert = combine(c.kg.f_kg, c.bert.f_bert, alpha).map_err(|e| e.for_pair(&c.pair_id))?;
            Ok(SentenceScore {
                pair_id: c.pair_id.clone(),
                recall: c.bert.recall,
                precision: c.bert.precision,
                f_bert: c.bert.f_bert,
                f_kg: c.kg.f_kg,
                f_kg_bert,
            })
        })
        .collect()
}

pub fn score_corpus(corpus: &Corpus, embeddings: &EmbeddingFile, alpha: AlphaWeight) -> Result<Vec<SentenceScore>> {
    let components = score_components(corpus, embeddings)?;
    apply_alpha(&components, alpha)
}

#[derive(Default)]
struct Accumulator {
    n: usize,
    f_bert: f64,
    f_kg: f64,
    f_kg_bert: f64,
}

/// One report per (lang_pair, system_id), ordered by that key.
pub fn system_scores(scores: &[SentenceScore], corpus: &Corpus, alpha: AlphaWeight) -> Result<Vec<SystemReport>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if scores.len() != corpus.len() {
        return Err(Error::CountMismatch {
            corpus: corpus.len(),
            embeddings: scores.len(),
        });
    }
    let mut groups: BTreeMap<(&str, &str), Accumulator> = BTreeMap::new();
    for (index, (s, p)) in scores.iter().zip(corpus.pairs()).enumerate() {
        if s.pair_id != p.pair_id {
            return Err(Error::Misaligned { index });
        }
        let acc = groups.entry((&p.lang_pair, &p.system_id)).or_default();
        acc.n += 1;
        acc.f_bert += s.f_bert;
        acc.f_kg += s.f_kg;
        acc.f_kg_bert += s.f_kg_bert;
    }
    Ok(groups
        .into_iter()
        .map(|((lang_pair, system_id), acc)| {
            let n = acc.n as f64;
            SystemReport {
                system_id: system_id.to_owned(),
                lang_pair: lang_pair.to_owned(),
                alpha: alpha.get(),
                n_sentences: acc.n,
                mean_f_bert: acc.f_bert / n,
                mean_f_kg: acc.f_kg / n,
                mean_f_kg_bert: acc.f_kg_bert / n,
            }
        })
        .collect())
}

/// Scores the corpus at each α. Pair components are computed once and reused.
pub fn evaluate(
    corpus: &Corpus,
    embeddings: &EmbeddingFile,
    alphas: &[AlphaWeight],
    keep_sentences: bool,
) -> Result<Vec<Evaluation>> {
    if alphas.is_empty() {
        return Err(Error::EmptyAlphas);
    }
    let components = score_components(corpus, embeddings)?;
    alphas
        .iter()
        .map(|&alpha| {
            let sentences = apply_alpha(&components, alpha)?;
            let systems = system_scores(&sentences, corpus, alpha)?;
            Ok(Evaluation {
                alpha: alpha.get(),
                systems,
                sentences: if keep_sentences { sentences } else { Vec::new() },
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepColumn {
    pub alpha: f64,
    pub systems: Vec<SystemReport>,
}

pub fn alpha_sweep(corpus: &Corpus, embeddings: &EmbeddingFile, alphas: &[AlphaWeight]) -> Result<Vec<SweepColumn>> {
    Ok(evaluate(corpus, embeddings, alphas, false)?
        .into_iter()
        .map(|e| SweepColumn {
            alpha: e.alpha,
            systems: e.systems,
        })
        .collect())
}
