use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure carries a locator: a line number, a pair id, or a byte offset.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    // corpus ingestion
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("line {line}: malformed JSON: {message}")]
    MalformedJson { line: usize, message: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: invalid lang_pair {value:?} (expected xx-yy)")]
    InvalidLangPair { line: usize, value: String },
    #[error("line {line}: empty entity id in `{field}`")]
    EmptyEntityId { line: usize, field: &'static str },
    #[error("line {line}: duplicate pair_id {pair_id:?} (first seen on line {first_line})")]
    DuplicatePairId {
        pair_id: String,
        line: usize,
        first_line: usize,
    },

    // human scores
    #[error("human scores: bad header {found:?} (expected \"lang_pair,system_id,human_score\")")]
    BadHeader { found: String },
    #[error("human scores line {line}: {message}")]
    MalformedCsv { line: u64, message: String },
    #[error("human scores line {line}: score {value:?} is not a number")]
    NonNumericScore { line: u64, value: String },
    #[error("human scores line {line}: score {value:?} is not finite")]
    NonFiniteScore { line: u64, value: String },
    #[error("human scores line {line}: duplicate key ({lang_pair}, {system_id})")]
    DuplicateHumanScore {
        line: u64,
        lang_pair: String,
        system_id: String,
    },

    // embeddings
    #[error("bad magic {found:?} at byte 0 (expected \"KGBE\")")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported KGBE version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated embedding file at byte offset {offset}: need {needed} more bytes, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("embedding file has {extra} trailing bytes after byte offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("non-finite embedding value at byte offset {offset}")]
    NonFiniteEmbedding { offset: usize },
    #[error("pair {pair}: matrix has zero rows")]
    ZeroRows { pair: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("matrix data length {len} is not rows ({rows}) x dim ({dim})")]
    ShapeMismatch { rows: usize, dim: usize, len: usize },
    #[error("embedding dimension must be at least 1")]
    ZeroDim,
    #[error("row {row} has near-zero L2 norm {norm:e}")]
    NearZeroRow { row: usize, norm: f64 },

    // scoring
    #[error("{side} embedding matrix has no rows")]
    EmptyMatrix { side: &'static str },
    #[error("alpha {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("non-finite score input {0}")]
    NonFiniteInput(f64),
    #[error("embedding file holds {embeddings} pairs but corpus holds {corpus}")]
    CountMismatch { corpus: usize, embeddings: usize },
    #[error("pair {pair_id}: {source}")]
    Pair {
        pair_id: String,
        #[source]
        source: Box<Error>,
    },
    #[error("sentence scores are not aligned with the corpus at index {index}")]
    Misaligned { index: usize },
    #[error("nothing to aggregate")]
    EmptyScores,
    #[error("alpha list is empty")]
    EmptyAlphas,

    // meta-evaluation
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 points for a correlation, got {0}")]
    TooFewPoints(usize),
    #[error("zero variance in {which} values; correlation undefined")]
    ZeroVariance { which: &'static str },
    #[error("lang_pair {lang_pair}: {joined} system(s) shared with human scores, need at least 2")]
    InsufficientOverlap { lang_pair: String, joined: usize },
    #[error("lang_pair {lang_pair}, metric {metric}: {source}")]
    Correlation {
        lang_pair: String,
        metric: String,
        #[source]
        source: Box<Error>,
    },
    #[error("no language pair could be correlated against human scores")]
    NothingCorrelated,
}

impl Error {
    pub(crate) fn for_pair(self, pair_id: &str) -> Self {
        Error::Pair {
            pair_id: pair_id.to_owned(),
            source: Box::new(self),
        }
    }
}
