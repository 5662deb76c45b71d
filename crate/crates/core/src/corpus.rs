//! Evaluation data model: sentence pairs with entity annotations, and human
//! judgment tables.
//!
//! Corpora are JSONL, one [`SentencePair`] object per line. Human scores are a
//! CSV with the exact header `lang_pair,system_id,human_score`.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub pair_id: String,
    pub lang_pair: String,
    pub system_id: String,
    pub src_text: String,
    pub mt_text: String,
    #[serde(default)]
    pub src_entities: Vec<String>,
    #[serde(default)]
    pub mt_entities: Vec<String>,
}

/// Ordered sentence pairs. Position `i` is the alignment key into an
/// embedding file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pairs: Vec<SentencePair>,
}

// Every field optional so a missing one can be reported by name and line.
#[derive(Deserialize)]
struct RawRecord {
    pair_id: Option<String>,
    lang_pair: Option<String>,
    system_id: Option<String>,
    src_text: Option<String>,
    mt_text: Option<String>,
    #[serde(default)]
    src_entities: Vec<String>,
    #[serde(default)]
    mt_entities: Vec<String>,
}

/// `^[a-z]{2,3}-[a-z]{2,3}$`
pub fn is_valid_lang_pair(s: &str) -> bool {
    let code = |c: &str| (2..=3).contains(&c.len()) && c.bytes().all(|b| b.is_ascii_lowercase());
    match s.split_once('-') {
        Some((a, b)) => code(a) && code(b),
        None => false,
    }
}

impl RawRecord {
    fn into_pair(self, line: usize) -> Result<SentencePair> {
        fn req(v: Option<String>, line: usize, field: &'static str) -> Result<String> {
            v.ok_or(Error::MissingField { line, field })
        }
        let pair = SentencePair {
            pair_id: req(self.pair_id, line, "pair_id")?,
            lang_pair: req(self.lang_pair, line, "lang_pair")?,
            system_id: req(self.system_id, line, "system_id")?,
            src_text: req(self.src_text, line, "src_text")?,
            mt_text: req(self.mt_text, line, "mt_text")?,
            src_entities: self.src_entities,
            mt_entities: self.mt_entities,
        };
        if !is_valid_lang_pair(&pair.lang_pair) {
            return Err(Error::InvalidLangPair {
                line,
                value: pair.lang_pair,
            });
        }
        if pair.src_entities.iter().any(String::is_empty) {
            return Err(Error::EmptyEntityId {
                line,
                field: "src_entities",
            });
        }
        if pair.mt_entities.iter().any(String::is_empty) {
            return Err(Error::EmptyEntityId {
                line,
                field: "mt_entities",
            });
        }
        Ok(pair)
    }
}

impl Corpus {
    /// Builds a corpus from already-validated pairs, enforcing pair_id uniqueness.
    pub fn new(pairs: Vec<SentencePair>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(pairs.len());
        for (i, p) in pairs.iter().enumerate() {
            if let Some(first) = seen.insert(p.pair_id.as_str(), i) {
                return Err(Error::DuplicatePairId {
                    pair_id: p.pair_id.clone(),
                    line: i + 1,
                    first_line: first + 1,
                });
            }
        }
        Ok(Corpus { pairs })
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct system ids, sorted.
    pub fn systems(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.pairs.iter().map(|p| p.system_id.as_str()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Distinct lang pairs, sorted.
    pub fn lang_pairs(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.pairs.iter().map(|p| p.lang_pair.as_str()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Serializes as JSONL, one record per line, LF endings.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for p in &self.pairs {
            serde_json::to_writer(&mut w, p).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parses a JSONL corpus. Blank lines are skipped; line numbers in errors are
/// 1-based physical lines.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut pairs = Vec::new();
    let mut first_line: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(text).map_err(|e| Error::MalformedJson {
            line: line_no,
            message: e.to_string(),
        })?;
        let pair = raw.into_pair(line_no)?;
        if let Some(&first) = first_line.get(&pair.pair_id) {
            return Err(Error::DuplicatePairId {
                pair_id: pair.pair_id,
                line: line_no,
                first_line: first,
            });
        }
        first_line.insert(pair.pair_id.clone(), line_no);
        pairs.push(pair);
    }
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Corpus { pairs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanScore {
    pub lang_pair: String,
    pub system_id: String,
    pub human_score: f64,
}

/// Human judgments keyed by (lang_pair, system_id). Any affine scale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HumanScoreTable {
    rows: Vec<HumanScore>,
    index: BTreeMap<(String, String), usize>,
}

impl HumanScoreTable {
    pub fn rows(&self) -> &[HumanScore] {
        &self.rows
    }

    pub fn get(&self, lang_pair: &str, system_id: &str) -> Option<f64> {
        self.index
            .get(&(lang_pair.to_owned(), system_id.to_owned()))
            .map(|&i| self.rows[i].human_score)
    }

    pub fn has_lang_pair(&self, lang_pair: &str) -> bool {
        self.rows.iter().any(|r| r.lang_pair == lang_pair)
    }

    fn push(&mut self, row: HumanScore, line: u64) -> Result<()> {
        let key = (row.lang_pair.clone(), row.system_id.clone());
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateHumanScore {
                line,
                lang_pair: key.0,
                system_id: key.1,
            });
        }
        self.index.insert(key, self.rows.len());
        self.rows.push(row);
        Ok(())
    }
}

const HUMAN_HEADER: [&str; 3] = ["lang_pair", "system_id", "human_score"];

pub fn parse_human_scores<R: Read>(reader: R) -> Result<HumanScoreTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(Error::BadHeader { found: String::new() }),
    };
    if header.iter().ne(HUMAN_HEADER.iter().copied()) {
        return Err(Error::BadHeader {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut table = HumanScoreTable::default();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::MalformedCsv {
                line,
                message: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let raw = &rec[2];
        let human_score: f64 = raw.parse().map_err(|_| Error::NonNumericScore {
            line,
            value: raw.to_owned(),
        })?;
        if !human_score.is_finite() {
            return Err(Error::NonFiniteScore {
                line,
                value: raw.to_owned(),
            });
        }
        let row = HumanScore {
            lang_pair: rec[0].to_owned(),
            system_id: rec[1].to_owned(),
            human_score,
        };
        table.push(row, line)?;
    }
    Ok(table)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::MalformedCsv {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLORIDA_EXAMPLE: &str = r#"{"pair_id":"p1","lang_pair":"en-zh","system_id":"sysA","src_text":"Respiratory irritation was not reported in Northwest Florida over the past week.","mt_text":"本周，佛罗里达西北部没有消化道刺激的报告。","src_entities":["/m/0hl_6","/m/02xry","/m/083sl"],"mt_entities":["/m/05qv5f","/m/02xry","/m/0j49l","/m/0chln1"]}"#;

    fn line(id: &str, extra: &str) -> String {
        format!(r#"{{"pair_id":"{id}","lang_pair":"de-en","system_id":"s","src_text":"a","mt_text":"b"{extra}}}"#)
    }

    #[test]
    fn parses_worked_example() {
        let c = parse_corpus(FLORIDA_EXAMPLE.as_bytes()).unwrap();
        assert_eq!(c.len(), 1);
        let p = &c.pairs()[0];
        assert_eq!(p.src_entities, ["/m/0hl_6", "/m/02xry", "/m/083sl"]);
        assert_eq!(p.mt_entities, ["/m/05qv5f", "/m/02xry", "/m/0j49l", "/m/0chln1"]);
        assert_eq!(p.mt_text, "本周，佛罗里达西北部没有消化道刺激的报告。");
    }

    #[test]
    fn entity_lists_default_to_empty() {
        let c = parse_corpus(line("p1", "").as_bytes()).unwrap();
        assert!(c.pairs()[0].src_entities.is_empty());
        assert!(c.pairs()[0].mt_entities.is_empty());
    }

    #[test]
    fn duplicate_pair_id_is_named() {
        let input = format!("{}\n{}\n", line("p1", ""), line("p1", ""));
        let err = parse_corpus(input.as_bytes()).unwrap_err();
        match &err {
            Error::DuplicatePairId {
                pair_id,
                line,
                first_line,
            } => {
                assert_eq!(pair_id, "p1");
                assert_eq!((*line, *first_line), (2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("\"p1\""));
    }

    #[test]
    fn malformed_json_reports_line() {
        let input = format!("{}\n\n{{not json\n", line("p1", ""));
        match parse_corpus(input.as_bytes()).unwrap_err() {
            Error::MalformedJson { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_reports_name() {
        let input = r#"{"pair_id":"p","lang_pair":"de-en","system_id":"s","src_text":"a"}"#;
        match parse_corpus(input.as_bytes()).unwrap_err() {
            Error::MissingField { line, field } => assert_eq!((line, field), (1, "mt_text")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_stream_rejected() {
        assert!(matches!(parse_corpus("".as_bytes()), Err(Error::EmptyCorpus)));
        assert!(matches!(parse_corpus("\n \r\n".as_bytes()), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn crlf_accepted() {
        let input = format!("{}\r\n{}\r\n", line("a", ""), line("b", ""));
        let c = parse_corpus(input.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.pairs()[1].pair_id, "b");
    }

    #[test]
    fn lang_pair_pattern() {
        for ok in ["de-en", "en-zh", "kk-en", "fil-eng"] {
            assert!(is_valid_lang_pair(ok), "{ok}");
        }
        for bad in ["de_en", "DE-EN", "d-en", "deen-en", "de-", "de-en-fr", ""] {
            assert!(!is_valid_lang_pair(bad), "{bad}");
        }
        let input = line("p", "").replace("de-en", "German-English");
        assert!(matches!(
            parse_corpus(input.as_bytes()),
            Err(Error::InvalidLangPair { line: 1, .. })
        ));
    }

    #[test]
    fn empty_entity_id_rejected() {
        let input = line("p", r#","mt_entities":["/m/1",""]"#);
        assert!(matches!(
            parse_corpus(input.as_bytes()),
            Err(Error::EmptyEntityId {
                field: "mt_entities",
                ..
            })
        ));
    }

    #[test]
    fn human_scores_parse() {
        let t = parse_human_scores("lang_pair,system_id,human_score\nde-en,sysA,0.12\r\nde-en,sysB,-1.5\n".as_bytes())
            .unwrap();
        assert_eq!(t.rows().len(), 2);
        assert_eq!(
            t.rows()[0],
            HumanScore {
                lang_pair: "de-en".into(),
                system_id: "sysA".into(),
                human_score: 0.12
            }
        );
        assert_eq!(t.get("de-en", "sysB"), Some(-1.5));
        assert_eq!(t.get("de-en", "sysC"), None);
    }

    #[test]
    fn human_scores_errors() {
        let h = "lang_pair,system_id,human_score\n";
        assert!(matches!(
            parse_human_scores(format!("{h}de-en,sysA,NaN\n").as_bytes()),
            Err(Error::NonFiniteScore { line: 2, .. })
        ));
        assert!(matches!(
            parse_human_scores(format!("{h}de-en,sysA,inf\n").as_bytes()),
            Err(Error::NonFiniteScore { .. })
        ));
        assert!(matches!(
            parse_human_scores(format!("{h}de-en,sysA,good\n").as_bytes()),
            Err(Error::NonNumericScore { .. })
        ));
        assert!(matches!(
            parse_human_scores(format!("{h}de-en,sysA,1\nde-en,sysA,2\n").as_bytes()),
            Err(Error::DuplicateHumanScore { line: 3, .. })
        ));
        assert!(matches!(
            parse_human_scores("lp,system,score\nde-en,sysA,1\n".as_bytes()),
            Err(Error::BadHeader { .. })
        ));
        assert!(matches!(
            parse_human_scores("".as_bytes()),
            Err(Error::BadHeader { .. })
        ));
    }
}
