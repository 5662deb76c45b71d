//! Knowledge-graph entity matching.
//!
//! Entities are compared by their language-independent KG id only. The score
//! is the fraction of source entities found in the translation, with multiset
//! semantics for repeated ids; a source with no entities scores 1.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntityMatchScore {
    pub f_kg: f64,
    pub matched: usize,
    pub source_count: usize,
}

fn counts<S: AsRef<str>>(ids: &[S]) -> HashMap<&str, usize> {
    let mut m = HashMap::with_capacity(ids.len());
    for id in ids {
        *m.entry(id.as_ref()).or_insert(0) += 1;
    }
    m
}

/// Multiset intersection size: sum over ids of `min(count_src, count_mt)`.
pub fn matched_entities<S: AsRef<str>, T: AsRef<str>>(src: &[S], mt: &[T]) -> usize {
    let mut available = counts(mt);
    let mut matched = 0;
    for id in src {
        if let Some(n) = available.get_mut(id.as_ref()) {
            if *n > 0 {
                *n -= 1;
                matched += 1;
            }
        }
    }
    matched
}

pub fn kg_match_score<S: AsRef<str>, T: AsRef<str>>(src_entities: &[S], mt_entities: &[T]) -> EntityMatchScore {
    let source_count = src_entities.len();
    if source_count == 0 {
        return EntityMatchScore {
            f_kg: 1.0,
            matched: 0,
            source_count,
        };
    }
    let matched = matched_entities(src_entities, mt_entities);
    EntityMatchScore {
        f_kg: matched as f64 / source_count as f64,
        matched,
        source_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let src = ["/m/0hl_6", "/m/02xry", "/m/083sl"];
        let mt = ["/m/05qv5f", "/m/02xry", "/m/0j49l", "/m/0chln1"];
        let s = kg_match_score(&src, &mt);
        assert_eq!(s.matched, 1);
        assert_eq!(s.source_count, 3);
        assert!((s.f_kg - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn no_source_entities_scores_one() {
        let none: [&str; 0] = [];
        assert_eq!(kg_match_score(&none, &["/m/02xry"]).f_kg, 1.0);
        assert_eq!(kg_match_score(&none, &none).f_kg, 1.0);
    }

    #[test]
    fn duplicates_use_min_count() {
        let s = kg_match_score(&["A", "A", "B"], &["A"]);
        assert_eq!(s.matched, 1);
        assert!((s.f_kg - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(kg_match_score(&["A", "A", "B"], &["A", "B", "A", "A"]).f_kg, 1.0);
    }

    #[test]
    fn no_translation_entities() {
        let none: [&str; 0] = [];
        let s = kg_match_score(&["A", "B"], &none);
        assert_eq!((s.matched, s.f_kg), (0, 0.0));
    }

    #[test]
    fn exact_id_equality_only() {
        assert_eq!(kg_match_score(&["/m/02xry"], &["/m/02XRY", " /m/02xry"]).matched, 0);
    }
}
