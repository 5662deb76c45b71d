#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kgb_core::embedding::encode_embeddings;
use kgb_core::{Corpus, EmbeddingMatrix, EmbeddingPair, SentencePair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SYSTEMS: [&str; 4] = ["sysA", "sysB", "sysC", "sysD"];
pub const LANG_PAIRS: [&str; 2] = ["de-en", "zh-en"];

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub corpus: PathBuf,
    pub embeddings: PathBuf,
}

impl Fixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

/// `n` pairs spread over every (lang_pair, system) combination, random raw
/// embeddings of width `dim`, entity ids drawn from a small pool.
pub fn synthetic_corpus(n: usize, dim: usize, seed: u64) -> (Corpus, Vec<EmbeddingPair>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = ["/m/02xry", "/m/0hl_6", "/m/083sl", "/m/05qv5f", "/m/0j49l", "/m/0chln1"];
    let mut pairs = Vec::with_capacity(n);
    let mut emb = Vec::with_capacity(n);
    for i in 0..n {
        let lang_pair = LANG_PAIRS[i % LANG_PAIRS.len()];
        let system = SYSTEMS[(i / LANG_PAIRS.len()) % SYSTEMS.len()];
        let mut ents = |max: usize| -> Vec<String> {
            let k = rng.gen_range(0..=max);
            (0..k).map(|_| pool[rng.gen_range(0..pool.len())].to_owned()).collect()
        };
        let src_entities = ents(3);
        let mt_entities = ents(4);
        pairs.push(SentencePair {
            pair_id: format!("{lang_pair}-{i:04}"),
            lang_pair: lang_pair.into(),
            system_id: system.into(),
            src_text: format!("source sentence {i}"),
            mt_text: format!("translation {i}"),
            src_entities,
            mt_entities,
        });
        let src_rows = rng.gen_range(3..12);
        let mt_rows = rng.gen_range(3..12);
        emb.push(EmbeddingPair {
            src: random_matrix(&mut rng, src_rows, dim),
            mt: random_matrix(&mut rng, mt_rows, dim),
        });
    }
    (Corpus::new(pairs).unwrap(), emb)
}

// Values are exactly representable as f32 so the file round-trips bitwise.
fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> EmbeddingMatrix {
    let data = (0..rows * dim)
        .map(|_| f64::from(rng.gen_range(-1.0f32..1.0) + 0.25))
        .collect();
    EmbeddingMatrix::new(rows, dim, data).unwrap()
}

pub fn write_fixture(n: usize, dim: usize, seed: u64) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, emb) = synthetic_corpus(n, dim, seed);
    let corpus_path = dir.path().join("corpus.jsonl");
    let emb_path = dir.path().join("corpus.kgbe");
    let mut buf = Vec::new();
    corpus.write_jsonl(&mut buf).unwrap();
    std::fs::write(&corpus_path, buf).unwrap();
    std::fs::write(&emb_path, encode_embeddings(&emb, dim).unwrap()).unwrap();
    Fixture {
        dir,
        corpus: corpus_path,
        embeddings: emb_path,
    }
}

pub fn kgb<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_kgb"))
        .env_remove("KGB_THREADS")
        .args(args)
        .output()
        .expect("spawn kgb")
}

pub fn inputs(f: &Fixture) -> Vec<String> {
    vec!["--corpus".into(), s(&f.corpus), "--embeddings".into(), s(&f.embeddings)]
}

pub fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}
