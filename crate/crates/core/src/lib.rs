//! Reference-free machine-translation evaluation.
//!
//! A sentence pair is scored by greedy cosine matching of source and
//! translation token embeddings ([`bertscore`]) and by the share of source
//! knowledge-graph entities recovered in the translation ([`kg`]). The two are
//! linearly interpolated with weight α ([`combine`]), averaged per system, and
//! meta-evaluated against human judgments by Pearson correlation ([`meta`]).
//!
//! Embeddings are produced elsewhere and read from KGBE files ([`embedding`]);
//! entity annotations arrive with the corpus ([`corpus`]).

pub mod bertscore;
pub mod combine;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod kg;
pub mod meta;
pub mod report;

pub use bertscore::{sentence_bertscore, similarity_matrix, SentenceBertScore, SimilarityMatrix};
pub use combine::{
    alpha_sweep, apply_alpha, combine, evaluate, score_components, score_corpus, system_scores, AlphaWeight,
    Evaluation, PairComponents, SentenceScore, SweepColumn, SystemReport,
};
pub use corpus::{parse_corpus, parse_human_scores, Corpus, HumanScore, HumanScoreTable, SentencePair};
pub use embedding::{
    normalize_rows, read_embeddings, read_embeddings_raw, write_embeddings, EmbeddingFile, EmbeddingMatrix,
    EmbeddingPair,
};
pub use error::{Error, Result};
pub use kg::{kg_match_score, EntityMatchScore};
pub use meta::{correlate, pearson, CorrelationReport, CorrelationRow, MeanCorrelation, Metric};
