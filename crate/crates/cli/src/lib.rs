//! Command-line front end: `score`, `sweep`, `correlate`, `validate`.
//!
//! Exit codes are a stable contract: 0 success, 1 data error, 2 usage error.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use kgb_core::report;
use kgb_core::{
    correlate, evaluate, parse_corpus, parse_human_scores, read_embeddings, AlphaWeight, Corpus, EmbeddingFile,
    Evaluation, HumanScoreTable, Metric, SweepColumn,
};
use serde_json::json;

pub const THREADS_ENV: &str = "KGB_THREADS";

/// Metrics reported by `correlate`.
pub const CORRELATED_METRICS: [Metric; 2] = [Metric::Bert, Metric::KgBert];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<kgb_core::Error> for CliError {
    fn from(e: kgb_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Count(NonZeroUsize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        s.parse::<NonZeroUsize>()
            .map(Threads::Count)
            .map_err(|_| format!("expected a positive integer or \"auto\", got {s:?}"))
    }
}

impl Threads {
    fn pool(self) -> anyhow::Result<rayon::ThreadPool> {
        let n = match self {
            Threads::Auto => 0,
            Threads::Count(n) => n.get(),
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

fn parse_alpha(s: &str) -> Result<AlphaWeight, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    AlphaWeight::new(v).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "kgb",
    version,
    about = "Reference-free MT evaluation with embedding and entity matching"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score a corpus at one alpha and write system-level reports.
    Score(ScoreArgs),
    /// Score a corpus at several alphas, one column per alpha.
    Sweep(SweepArgs),
    /// Correlate system-level scores with human judgments.
    Correlate(CorrelateArgs),
    /// Check that a corpus and an embedding file parse and line up.
    Validate(InputArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Corpus, JSONL.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Token embeddings, KGBE.
    #[arg(long)]
    pub embeddings: PathBuf,
}

#[derive(Debug, Args)]
pub struct ThreadArgs {
    /// Worker threads for per-pair scoring: a positive integer or "auto".
    #[arg(long, env = THREADS_ENV, default_value = "auto")]
    pub threads: Threads,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Weight on the entity score.
    #[arg(long, default_value = "0.5", value_parser = parse_alpha)]
    pub alpha: AlphaWeight,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Also emit per-sentence scores.
    #[arg(long)]
    pub per_sentence: bool,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated weights, e.g. 0,0.2,0.4,0.5,0.6,0.8,1.0
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_alpha)]
    pub alphas: Vec<AlphaWeight>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// CSV with header `lang_pair,system_id,human_score`.
    #[arg(long)]
    pub human_scores: PathBuf,
    #[arg(long, default_value = "0.5", value_parser = parse_alpha)]
    pub alpha: AlphaWeight,
    /// Correlation report file (CSV unless --format json). The text table
    /// always goes to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

/// Resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus_path: PathBuf,
    pub embeddings_path: PathBuf,
    pub alpha: AlphaWeight,
    pub alphas: Vec<AlphaWeight>,
    pub human_scores_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub per_sentence: bool,
    pub threads: Threads,
}

impl RunConfig {
    pub fn new(corpus_path: impl Into<PathBuf>, embeddings_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            corpus_path: corpus_path.into(),
            embeddings_path: embeddings_path.into(),
            alpha: AlphaWeight::DEFAULT,
            alphas: Vec::new(),
            human_scores_path: None,
            output_path: None,
            output_format: OutputFormat::Json,
            per_sentence: false,
            threads: Threads::Auto,
        }
    }

    fn check(&self) -> CliResult {
        if self.corpus_path.as_os_str().is_empty() {
            return Err(CliError::Usage("--corpus must not be empty".into()));
        }
        if self.embeddings_path.as_os_str().is_empty() {
            return Err(CliError::Usage("--embeddings must not be empty".into()));
        }
        if matches!(&self.output_path, Some(p) if p.as_os_str().is_empty()) {
            return Err(CliError::Usage("--output must not be empty".into()));
        }
        Ok(())
    }
}

impl From<ScoreArgs> for RunConfig {
    fn from(a: ScoreArgs) -> Self {
        RunConfig {
            alpha: a.alpha,
            alphas: vec![a.alpha],
            output_path: a.output,
            output_format: a.format,
            per_sentence: a.per_sentence,
            threads: a.threads.threads,
            ..RunConfig::new(a.input.corpus, a.input.embeddings)
        }
    }
}

impl From<SweepArgs> for RunConfig {
    fn from(a: SweepArgs) -> Self {
        RunConfig {
            alphas: a.alphas,
            output_path: a.output,
            output_format: a.format,
            threads: a.threads.threads,
            ..RunConfig::new(a.input.corpus, a.input.embeddings)
        }
    }
}

impl From<CorrelateArgs> for RunConfig {
    fn from(a: CorrelateArgs) -> Self {
        RunConfig {
            alpha: a.alpha,
            alphas: vec![a.alpha],
            human_scores_path: Some(a.human_scores),
            output_path: a.output,
            output_format: a.format,
            threads: a.threads.threads,
            ..RunConfig::new(a.input.corpus, a.input.embeddings)
        }
    }
}

impl From<InputArgs> for RunConfig {
    fn from(a: InputArgs) -> Self {
        RunConfig::new(a.corpus, a.embeddings)
    }
}

pub fn load_corpus(path: &Path) -> anyhow::Result<Corpus> {
    let file = File::open(path).with_context(|| format!("corpus {}", path.display()))?;
    parse_corpus(BufReader::new(file)).with_context(|| format!("corpus {}", path.display()))
}

pub fn load_embeddings(path: &Path) -> anyhow::Result<EmbeddingFile> {
    let bytes = fs::read(path).with_context(|| format!("embeddings {}", path.display()))?;
    read_embeddings(&bytes).with_context(|| format!("embeddings {}", path.display()))
}

pub fn load_human_scores(path: &Path) -> anyhow::Result<HumanScoreTable> {
    let file = File::open(path).with_context(|| format!("human scores {}", path.display()))?;
    parse_human_scores(BufReader::new(file)).with_context(|| format!("human scores {}", path.display()))
}

fn load_inputs(cfg: &RunConfig) -> anyhow::Result<(Corpus, EmbeddingFile)> {
    let corpus = load_corpus(&cfg.corpus_path)?;
    let embeddings = load_embeddings(&cfg.embeddings_path)?;
    if corpus.len() != embeddings.len() {
        anyhow::bail!(
            "{} holds {} pairs but {} has pair_count {}",
            cfg.corpus_path.display(),
            corpus.len(),
            cfg.embeddings_path.display(),
            embeddings.len()
        );
    }
    Ok((corpus, embeddings))
}

/// The one scoring path behind `score`, `sweep`, and `correlate`.
fn run_evaluation(cfg: &RunConfig, keep_sentences: bool) -> CliResult<(Corpus, Vec<Evaluation>)> {
    if cfg.alphas.is_empty() {
        return Err(CliError::Usage("at least one alpha is required".into()));
    }
    let (corpus, embeddings) = load_inputs(cfg)?;
    let pool = cfg.threads.pool()?;
    let evals = pool.install(|| evaluate(&corpus, &embeddings, &cfg.alphas, keep_sentences))?;
    Ok((corpus, evals))
}

fn emit(cfg: &RunConfig, bytes: &[u8], stdout: &mut dyn Write) -> CliResult {
    match &cfg.output_path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

pub fn cmd_score(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult {
    cfg.check()?;
    let cfg = RunConfig {
        alphas: vec![cfg.alpha],
        ..cfg.clone()
    };
    let (_, evals) = run_evaluation(&cfg, cfg.per_sentence)?;
    let eval = &evals[0];
    let mut buf = Vec::new();
    match cfg.output_format {
        OutputFormat::Json => buf = to_json(eval)?,
        OutputFormat::Csv => {
            report::write_systems_csv(&mut buf, &eval.systems)?;
            if cfg.per_sentence {
                match &cfg.output_path {
                    Some(p) => {
                        let mut sbuf = Vec::new();
                        report::write_sentences_csv(&mut sbuf, eval.alpha, &eval.sentences)?;
                        let sp = sentences_path(p);
                        fs::write(&sp, sbuf).with_context(|| format!("writing {}", sp.display()))?;
                    }
                    None => {
                        buf.push(b'\n');
                        report::write_sentences_csv(&mut buf, eval.alpha, &eval.sentences)?;
                    }
                }
            }
        }
        OutputFormat::Table => {
            report::write_systems_table(&mut buf, &eval.systems)?;
            if cfg.per_sentence {
                buf.push(b'\n');
                report::write_sentences_table(&mut buf, &eval.sentences)?;
            }
        }
    }
    emit(&cfg, &buf, stdout)
}

/// `out.csv` -> `out.sentences.csv`
pub fn sentences_path(p: &Path) -> PathBuf {
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match p.extension() {
        Some(ext) => format!("{stem}.sentences.{}", ext.to_string_lossy()),
        None => format!("{stem}.sentences"),
    };
    p.with_file_name(name)
}

pub fn cmd_sweep(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult {
    cfg.check()?;
    let (_, evals) = run_evaluation(cfg, false)?;
    let columns: Vec<SweepColumn> = evals
        .into_iter()
        .map(|e| SweepColumn {
            alpha: e.alpha,
            systems: e.systems,
        })
        .collect();
    let mut buf = Vec::new();
    match cfg.output_format {
        OutputFormat::Json => {
            let alphas: Vec<f64> = columns.iter().map(|c| c.alpha).collect();
            buf = to_json(&json!({ "alphas": alphas, "columns": columns }))?;
        }
        OutputFormat::Csv => report::write_systems_csv(&mut buf, columns.iter().flat_map(|c| &c.systems))?,
        OutputFormat::Table => report::write_sweep_table(&mut buf, &columns)?,
    }
    emit(cfg, &buf, stdout)
}

pub fn cmd_correlate(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    cfg.check()?;
    let human_path = cfg
        .human_scores_path
        .as_deref()
        .ok_or_else(|| CliError::Usage("--human-scores is required".into()))?;
    // Fail on a bad human table before spending time on scoring.
    let humans = load_human_scores(human_path)?;
    let cfg = RunConfig {
        alphas: vec![cfg.alpha],
        ..cfg.clone()
    };
    let (_, evals) = run_evaluation(&cfg, false)?;
    let result = correlate(&evals[0].systems, &humans, &CORRELATED_METRICS)
        .with_context(|| format!("correlating against {}", human_path.display()))?;
    for w in &result.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    report::write_correlation_table(&mut *stdout, &result)?;
    if let Some(p) = &cfg.output_path {
        let mut buf = Vec::new();
        match cfg.output_format {
            OutputFormat::Json => buf = to_json(&result)?,
            _ => report::write_correlation_csv(&mut buf, &result)?,
        }
        fs::write(p, buf).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

pub fn cmd_validate(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult {
    cfg.check()?;
    let corpus = load_corpus(&cfg.corpus_path)?;
    let embeddings = load_embeddings(&cfg.embeddings_path)?;
    if corpus.len() != embeddings.len() {
        return Err(anyhow::anyhow!(
            "count mismatch: corpus {} has n = {} pairs, embeddings {} has pair_count = {}",
            cfg.corpus_path.display(),
            corpus.len(),
            cfg.embeddings_path.display(),
            embeddings.len()
        )
        .into());
    }
    for (p, e) in corpus.pairs().iter().zip(&embeddings.pairs) {
        for m in [&e.src, &e.mt] {
            if m.dim() != embeddings.dim {
                return Err(anyhow::anyhow!(
                    "pair {}: dim {} differs from file dim {}",
                    p.pair_id,
                    m.dim(),
                    embeddings.dim
                )
                .into());
            }
        }
    }
    let tokens: (usize, usize) = embeddings
        .pairs
        .iter()
        .fold((0, 0), |(s, t), e| (s + e.src.rows(), t + e.mt.rows()));
    let systems = corpus.systems();
    let lang_pairs = corpus.lang_pairs();
    writeln!(stdout, "pairs:      {}", corpus.len())?;
    writeln!(stdout, "dim:        {}", embeddings.dim)?;
    writeln!(stdout, "tokens:     {} source, {} translation", tokens.0, tokens.1)?;
    writeln!(stdout, "systems:    {} ({})", systems.len(), systems.join(", "))?;
    writeln!(stdout, "lang_pairs: {} ({})", lang_pairs.len(), lang_pairs.join(", "))?;
    writeln!(stdout, "ok")?;
    Ok(())
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Score(a) => cmd_score(&a.into(), stdout),
        Command::Sweep(a) => cmd_sweep(&a.into(), stdout),
        Command::Correlate(a) => cmd_correlate(&a.into(), stdout, stderr),
        Command::Validate(a) => cmd_validate(&a.into(), stdout),
    }
}
