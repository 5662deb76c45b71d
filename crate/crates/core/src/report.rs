//! CSV and plain-text renderings of score and correlation reports.
//!
//! Floats in CSV use Rust's shortest round-trip formatting, so a CSV value
//! parses back to the exact `f64` that was computed. Text tables round to
//! four decimals for reading.

use std::io::Write;

use crate::combine::{SentenceScore, SweepColumn, SystemReport};
use crate::error::Result;
use crate::meta::CorrelationReport;

pub const SYSTEM_CSV_HEADER: [&str; 7] = [
    "system_id",
    "lang_pair",
    "alpha",
    "n",
    "mean_f_bert",
    "mean_f_kg",
    "mean_f_kg_bert",
];

pub const SENTENCE_CSV_HEADER: [&str; 7] = ["pair_id", "alpha", "recall", "precision", "f_bert", "f_kg", "f_kg_bert"];

pub const CORRELATION_CSV_HEADER: [&str; 4] = ["lang_pair", "metric", "n_systems", "pearson_r"];

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn finish<W: Write>(wtr: csv::Writer<W>) -> Result<()> {
    wtr.into_inner().map_err(|e| e.into_error())?.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(e.into())
}

/// One header, then one row per system report. Multiple α columns can be
/// written by passing all their reports in sequence.
pub fn write_systems_csv<'a, W, I>(w: W, reports: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a SystemReport>,
{
    let mut wtr = csv_writer(w);
    wtr.write_record(SYSTEM_CSV_HEADER).map_err(csv_err)?;
    for r in reports {
        wtr.write_record([
            r.system_id.clone(),
            r.lang_pair.clone(),
            r.alpha.to_string(),
            r.n_sentences.to_string(),
            r.mean_f_bert.to_string(),
            r.mean_f_kg.to_string(),
            r.mean_f_kg_bert.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(wtr)
}

pub fn write_sentences_csv<W: Write>(w: W, alpha: f64, scores: &[SentenceScore]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(SENTENCE_CSV_HEADER).map_err(csv_err)?;
    for s in scores {
        wtr.write_record([
            s.pair_id.clone(),
            alpha.to_string(),
            s.recall.to_string(),
            s.precision.to_string(),
            s.f_bert.to_string(),
            s.f_kg.to_string(),
            s.f_kg_bert.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(wtr)
}

/// Body rows followed by one `mean` row per metric; for mean rows the
/// `n_systems` column holds the number of language pairs averaged.
pub fn write_correlation_csv<W: Write>(w: W, report: &CorrelationReport) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(CORRELATION_CSV_HEADER).map_err(csv_err)?;
    for r in &report.rows {
        wtr.write_record([
            r.lang_pair.clone(),
            r.metric.name().to_owned(),
            r.n_systems.to_string(),
            r.pearson_r.to_string(),
        ])
        .map_err(csv_err)?;
    }
    for m in &report.means {
        wtr.write_record([
            "mean".to_owned(),
            m.metric.name().to_owned(),
            m.n_pairs.to_string(),
            m.mean_r.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(wtr)
}

fn write_aligned<W: Write>(mut w: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let pad = widths[i] - c.chars().count();
            // First column left-aligned, numbers right-aligned.
            if i == 0 {
                s.push_str(c);
                s.extend(std::iter::repeat_n(' ', pad));
            } else {
                s.extend(std::iter::repeat_n(' ', pad));
                s.push_str(c);
            }
        }
        s.trim_end().to_owned()
    };
    writeln!(w, "{}", line(header))?;
    let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
    writeln!(w, "{}", "-".repeat(total))?;
    for row in rows {
        writeln!(w, "{}", line(row))?;
    }
    Ok(())
}

fn f4(v: f64) -> String {
    format!("{v:.4}")
}

pub fn write_systems_table<W: Write>(w: W, reports: &[SystemReport]) -> Result<()> {
    let header: Vec<String> = ["system", "lang_pair", "alpha", "n", "F_BERT", "F_KG", "F_KG-BERT"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.system_id.clone(),
                r.lang_pair.clone(),
                r.alpha.to_string(),
                r.n_sentences.to_string(),
                f4(r.mean_f_bert),
                f4(r.mean_f_kg),
                f4(r.mean_f_kg_bert),
            ]
        })
        .collect();
    write_aligned(w, &header, &rows)
}

pub fn write_sentences_table<W: Write>(w: W, scores: &[SentenceScore]) -> Result<()> {
    let header: Vec<String> = ["pair_id", "R", "P", "F_BERT", "F_KG", "F_KG-BERT"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = scores
        .iter()
        .map(|s| {
            vec![
                s.pair_id.clone(),
                f4(s.recall),
                f4(s.precision),
                f4(s.f_bert),
                f4(s.f_kg),
                f4(s.f_kg_bert),
            ]
        })
        .collect();
    write_aligned(w, &header, &rows)
}

/// Systems down, one system-level F_KG-BERT column per α.
pub fn write_sweep_table<W: Write>(w: W, columns: &[SweepColumn]) -> Result<()> {
    let mut header = vec!["system".to_owned(), "lang_pair".to_owned()];
    header.extend(columns.iter().map(|c| format!("a={}", c.alpha)));
    let first = columns.first().map(|c| c.systems.as_slice()).unwrap_or_default();
    let rows: Vec<Vec<String>> = first
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![s.system_id.clone(), s.lang_pair.clone()];
            row.extend(columns.iter().map(|c| f4(c.systems[i].mean_f_kg_bert)));
            row
        })
        .collect();
    write_aligned(w, &header, &rows)
}

/// Metrics down, language pairs across, with a trailing mean column.
pub fn write_correlation_table<W: Write>(w: W, report: &CorrelationReport) -> Result<()> {
    let pairs = report.lang_pairs();
    let mut header = vec!["metric".to_owned()];
    header.extend(pairs.iter().map(|p| p.to_string()));
    header.push("mean".to_owned());
    let rows: Vec<Vec<String>> = report
        .means
        .iter()
        .map(|m| {
            let mut row = vec![m.metric.name().to_owned()];
            row.extend(pairs.iter().map(|lp| {
                report
                    .get(lp, m.metric)
                    .map_or_else(|| "-".to_owned(), |r| format!("{:.3}", r.pearson_r))
            }));
            row.push(format!("{:.3}", m.mean_r));
            row
        })
        .collect();
    write_aligned(w, &header, &rows)
}
