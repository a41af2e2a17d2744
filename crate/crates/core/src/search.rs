//! Inverted index over claim text with the classic TF-IDF similarity:
//!
//! ```text
//! score(q,d) = coord(q,d) · queryNorm(q) · Σ_t tf(t,d) · idf(t)² · boost(t) · norm(d)
//! tf = √freq    idf = 1 + ln(N/(df+1))    norm = 1/√len(d)
//! coord = |q ∩ d| / |q|    queryNorm = 1/√Σ_t (idf(t)·boost(t))²
//! ```

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scoring::QuerySpec;
use crate::text::analyze;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc_id: String,
    pub freq: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    /// Sorted by doc id within each term.
    pub postings: BTreeMap<String, Vec<Posting>>,
    pub field_lengths: BTreeMap<String, usize>,
    pub families: BTreeMap<String, String>,
    pub num_docs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub family_id: String,
    pub best_doc_id: String,
    pub score: f64,
    pub rank: usize,
}

/// Per-term factors of one document score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermFactors {
    pub term: String,
    pub boost: f64,
    pub freq: u32,
    pub tf: f64,
    pub idf: f64,
    pub norm: f64,
}

impl TermFactors {
    pub fn weight(&self) -> f64 {
        self.tf * self.idf * self.idf * self.boost * self.norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub doc_id: String,
    pub coord: f64,
    pub query_norm: f64,
    pub terms: Vec<TermFactors>,
    pub score: f64,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    index: InvertedIndex,
}

/// Indexes the claims of every processed-language document.
pub fn build_index(corpus: &Corpus) -> InvertedIndex {
    let mut index = InvertedIndex::default();
    // Corpus iterates in doc id order, so pushes keep postings sorted.
    for doc in corpus.processed_documents() {
        let terms = analyze(&doc.claims_text());
        let mut freq: BTreeMap<String, u32> = BTreeMap::new();
        for t in &terms {
            *freq.entry(t.clone()).or_default() += 1;
        }
        for (term, f) in freq {
            index.postings.entry(term).or_default().push(Posting {
                doc_id: doc.doc_id.clone(),
                freq: f,
            });
        }
        index.field_lengths.insert(doc.doc_id.clone(), terms.len());
        index
            .families
            .insert(doc.doc_id.clone(), doc.family_id().to_string());
    }
    index.num_docs = index.field_lengths.len();
    index
}

impl InvertedIndex {
    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn idf(&self, term: &str) -> f64 {
        1.0 + (self.num_docs as f64 / (self.doc_freq(term) as f64 + 1.0)).ln()
    }

    pub fn freq(&self, term: &str, doc_id: &str) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| {
                list.binary_search_by(|p| p.doc_id.as_str().cmp(doc_id))
                    .ok()
                    .map(|i| list[i].freq)
            })
            .unwrap_or(0)
    }

    pub fn family_of(&self, doc_id: &str) -> Option<&str> {
        self.families.get(doc_id).map(String::as_str)
    }

    pub fn query_norm(&self, query: &QuerySpec) -> f64 {
        let sum: f64 = query
            .terms
            .iter()
            .map(|t| (self.idf(&t.word) * t.boost).powi(2))
            .sum();
        if sum > 0.0 {
            1.0 / sum.sqrt()
        } else {
            0.0
        }
    }

    /// All five factors of `score(query, doc_id)`; `terms` lists only the
    /// query terms present in the document.
    pub fn explain(&self, query: &QuerySpec, doc_id: &str) -> Result<Explanation> {
        let len = *self
            .field_lengths
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
        let mut terms = Vec::new();
        for t in &query.terms {
            let freq = self.freq(&t.word, doc_id);
            if freq == 0 {
                continue;
            }
            terms.push(TermFactors {
                term: t.word.clone(),
                boost: t.boost,
                freq,
                tf: f64::from(freq).sqrt(),
                idf: self.idf(&t.word),
                norm: 1.0 / (len as f64).sqrt(),
            });
        }
        let coord = if query.is_empty() {
            0.0
        } else {
            terms.len() as f64 / query.len() as f64
        };
        let query_norm = self.query_norm(query);
        let score = if terms.is_empty() {
            0.0
        } else {
            coord * query_norm * terms.iter().map(TermFactors::weight).sum::<f64>()
        };
        Ok(Explanation {
            doc_id: doc_id.to_string(),
            coord,
            query_norm,
            terms,
            score,
        })
    }

    pub fn score_doc(&self, query: &QuerySpec, doc_id: &str) -> Result<f64> {
        Ok(self.explain(query, doc_id)?.score)
    }

    pub fn search(&self, query: &QuerySpec, k: usize) -> Vec<SearchResult> {
        self.search_excluding(query, k, None)
    }

    /// Like [`search`](Self::search), never returning `exclude_family`.
    pub fn search_excluding(
        &self,
        query: &QuerySpec,
        k: usize,
        exclude_family: Option<&str>,
    ) -> Vec<SearchResult> {
        if query.is_empty() || k == 0 {
            return Vec::new();
        }
        let query_norm = self.query_norm(query);
        let mut acc: HashMap<&str, (usize, f64)> = HashMap::new();
        for t in &query.terms {
            let Some(list) = self.postings.get(&t.word) else {
                continue;
            };
            let idf = self.idf(&t.word);
            for p in list {
                let len = self.field_lengths[&p.doc_id] as f64;
                let w = f64::from(p.freq).sqrt() * idf * idf * t.boost * (1.0 / len.sqrt());
                let e = acc.entry(p.doc_id.as_str()).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += w;
            }
        }
        let mut best: HashMap<&str, (&str, f64)> = HashMap::new();
        for (doc_id, (present, sum)) in acc {
            let family = self.families[doc_id].as_str();
            if Some(family) == exclude_family {
                continue;
            }
            let score = present as f64 / query.len() as f64 * query_norm * sum;
            let e = best.entry(family).or_insert((doc_id, score));
            if score > e.1 || (score == e.1 && doc_id < e.0) {
                *e = (doc_id, score);
            }
        }
        let mut ranked: Vec<(&str, &str, f64)> =
            best.into_iter().map(|(f, (d, s))| (f, d, s)).collect();
        ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(b.0)));
        ranked
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, (family, doc, score))| SearchResult {
                family_id: family.to_string(),
                best_doc_id: doc.to_string(),
                score,
                rank: i + 1,
            })
            .collect()
    }

    pub fn to_snapshot(&self) -> Result<String> {
        Ok(serde_json::to_string(&Snapshot {
            version: SNAPSHOT_VERSION,
            index: self.clone(),
        })?)
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(text)?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::Config(format!(
                "index snapshot version {} (expected {SNAPSHOT_VERSION})",
                snap.version
            )));
        }
        Ok(snap.index)
    }

    pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_snapshot(&text)
    }
}

/// One line of a retrieval run file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub topic_doc_id: String,
    pub family_id: String,
    pub rank: usize,
    pub score: f64,
    pub tag: String,
}

pub fn write_run(
    mut out: impl Write,
    topic_doc_id: &str,
    results: &[SearchResult],
    tag: &str,
) -> std::io::Result<()> {
    for r in results {
        writeln!(
            out,
            "{topic_doc_id} Q0 {} {} {:.6} {tag}",
            r.family_id, r.rank, r.score
        )?;
    }
    Ok(())
}

pub fn parse_run(text: &str, origin: &Path) -> Result<Vec<RunEntry>> {
    let bad = |line: usize, message: String| Error::Format {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(bad(
                line_no,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let rank = fields[3]
            .parse()
            .map_err(|_| bad(line_no, format!("bad rank {:?}", fields[3])))?;
        let score = fields[4]
            .parse()
            .map_err(|_| bad(line_no, format!("bad score {:?}", fields[4])))?;
        entries.push(RunEntry {
            topic_doc_id: fields[0].to_string(),
            family_id: fields[2].to_string(),
            rank,
            score,
            tag: fields[5].to_string(),
        });
    }
    Ok(entries)
}

pub fn load_run(path: impl AsRef<Path>) -> Result<Vec<RunEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_run(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Claim, ClaimDocument};
    use crate::scoring::QueryTerm;
    use proptest::prelude::*;

    fn doc(id: &str, family: Option<&str>, text: &str) -> ClaimDocument {
        ClaimDocument::new(
            id,
            family.map(str::to_string),
            "en",
            vec![Claim {
                num: 1,
                text: text.into(),
            }],
        )
        .unwrap()
    }

    fn index(docs: Vec<ClaimDocument>) -> InvertedIndex {
        build_index(&Corpus::from_documents(docs).unwrap())
    }

    fn q(words: &[&str]) -> QuerySpec {
        QuerySpec::unboosted(words.iter().copied())
    }

    #[test]
    fn postings_count_terms() {
        let ix = index(vec![doc("D", None, "pump pump valve")]);
        assert_eq!(
            ix.postings["pump"],
            vec![Posting {
                doc_id: "D".into(),
                freq: 2
            }]
        );
        assert_eq!(
            ix.postings["valve"],
            vec![Posting {
                doc_id: "D".into(),
                freq: 1
            }]
        );
        assert_eq!(ix.field_lengths["D"], 3);
    }

    #[test]
    fn empty_corpus() {
        let ix = index(vec![]);
        assert_eq!(ix.num_docs, 0);
        assert!(ix.search(&q(&["pump"]), 5).is_empty());
    }

    #[test]
    fn shared_term_postings_sorted() {
        let ix = index(vec![doc("B", None, "pump"), doc("A", None, "pump seal")]);
        let ids: Vec<_> = ix.postings["pump"]
            .iter()
            .map(|p| p.doc_id.as_str())
            .collect();
        assert_eq!(ids, ["A", "B"]);
    }

    #[test]
    fn no_overlap_scores_zero() {
        let ix = index(vec![doc("D", None, "pump")]);
        let e = ix.explain(&q(&["valve"]), "D").unwrap();
        assert_eq!(e.coord, 0.0);
        assert_eq!(e.score, 0.0);
    }

    #[test]
    fn one_document_hand_example() {
        let ix = index(vec![doc("D", None, "pump")]);
        let e = ix.explain(&q(&["pump"]), "D").unwrap();
        let idf = 1.0 + 0.5f64.ln();
        assert!((idf - 0.3069).abs() < 1e-4);
        assert_eq!(e.coord, 1.0);
        assert!((e.query_norm - 1.0 / idf).abs() < 1e-12);
        assert_eq!(e.terms[0].tf, 1.0);
        assert!((e.terms[0].idf - idf).abs() < 1e-12);
        assert_eq!(e.terms[0].norm, 1.0);
        assert!((e.score - idf).abs() < 1e-12);
    }

    #[test]
    fn unknown_document() {
        let ix = index(vec![doc("D", None, "pump")]);
        assert!(matches!(
            ix.score_doc(&q(&["pump"]), "X"),
            Err(Error::UnknownDocument(_))
        ));
    }

    #[test]
    fn family_keeps_best_member() {
        let ix = index(vec![
            doc("A1", Some("F"), "pump pump pump"),
            doc("A2", Some("F"), "pump seal seal seal"),
            doc("B", Some("G"), "seal"),
        ]);
        let hits = ix.search(&q(&["pump"]), 10);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].best_doc_id, "A1");
        assert_eq!(hits[0].score, ix.score_doc(&q(&["pump"]), "A1").unwrap());
    }

    #[test]
    fn ranks_descending_and_k_larger_than_candidates() {
        let ix = index(vec![
            doc("A", None, "pump valve seal"),
            doc("B", None, "pump valve"),
            doc("C", None, "pump rotor rotor rotor"),
            doc("D", None, "gasket"),
        ]);
        let hits = ix.search(&q(&["pump", "valve", "seal"]), 50);
        assert_eq!(hits.len(), 3);
        assert_eq!(hits.iter().map(|h| h.rank).collect::<Vec<_>>(), [1, 2, 3]);
        assert!(hits.windows(2).all(|w| w[0].score > w[1].score));
        assert_eq!(hits[0].family_id, "A");
    }

    #[test]
    fn excluded_family_never_returned() {
        let ix = index(vec![
            doc("T", Some("F"), "pump"),
            doc("U", Some("G"), "pump"),
        ]);
        let hits = ix.search_excluding(&q(&["pump"]), 10, Some("F"));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].family_id, "G");
    }

    #[test]
    fn doubling_single_boost_keeps_scores() {
        let ix = index(vec![
            doc("A", None, "pump valve"),
            doc("B", None, "pump pump"),
        ]);
        let one = ix.search(&q(&["pump"]), 10);
        let two = ix.search(
            &QuerySpec {
                terms: vec![QueryTerm {
                    word: "pump".into(),
                    boost: 2.0,
                }],
            },
            10,
        );
        assert_eq!(one, two);
    }

    #[test]
    fn run_file_round_trip() {
        let results = vec![SearchResult {
            family_id: "F1".into(),
            best_doc_id: "D1".into(),
            score: 0.5,
            rank: 1,
        }];
        let mut buf = Vec::new();
        write_run(&mut buf, "T1", &results, "clst05").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "T1 Q0 F1 1 0.500000 clst05\n");
        let parsed = parse_run(&text, Path::new("run")).unwrap();
        assert_eq!(parsed[0].family_id, "F1");
        assert_eq!(parsed[0].rank, 1);
        assert!(parse_run("T1 Q0 F1 x 0.5 t", Path::new("run")).is_err());
    }

    #[test]
    fn snapshot_round_trip_and_version_check() {
        let ix = index(vec![doc("A", Some("F"), "pump valve")]);
        let text = ix.to_snapshot().unwrap();
        assert_eq!(InvertedIndex::from_snapshot(&text).unwrap(), ix);
        let bumped = text.replace("\"version\":1", "\"version\":99");
        assert!(InvertedIndex::from_snapshot(&bumped).is_err());
    }

    fn corpus_strategy(max_docs: usize) -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[a-f]( [a-f]){0,7}", 1..max_docs)
    }

    fn docs_from(texts: &[String]) -> Vec<ClaimDocument> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| doc(&format!("D{i:02}"), Some(&format!("F{}", i / 2)), t))
            .collect()
    }

    fn query_strategy() -> impl Strategy<Value = QuerySpec> {
        prop::collection::btree_map("[a-f]", 0.1f64..5.0, 1..5).prop_map(|m| QuerySpec {
            terms: m
                .into_iter()
                .map(|(word, boost)| QueryTerm { word, boost })
                .collect(),
        })
    }

    /// Direct evaluation from counts, independent of the index.
    fn brute_score(texts: &[String], query: &QuerySpec, d: usize) -> f64 {
        let bags: Vec<Vec<String>> = texts.iter().map(|t| analyze(t)).collect();
        let n = bags.len() as f64;
        let idf = |w: &str| {
            let df = bags.iter().filter(|b| b.iter().any(|x| x == w)).count() as f64;
            1.0 + (n / (df + 1.0)).ln()
        };
        let qn = 1.0
            / query
                .terms
                .iter()
                .map(|t| (idf(&t.word) * t.boost).powi(2))
                .sum::<f64>()
                .sqrt();
        let mut present = 0;
        let mut sum = 0.0;
        for t in &query.terms {
            let f = bags[d].iter().filter(|x| **x == t.word).count();
            if f > 0 {
                present += 1;
                sum += (f as f64).sqrt() * idf(&t.word).powi(2) * t.boost
                    / (bags[d].len() as f64).sqrt();
            }
        }
        present as f64 / query.len() as f64 * qn * sum
    }

    proptest! {
        #[test]
        fn score_matches_factor_product(texts in corpus_strategy(10), query in query_strategy()) {
            let ix = index(docs_from(&texts));
            for d in 0..texts.len() {
                let id = format!("D{d:02}");
                let e = ix.explain(&query, &id).unwrap();
                let recomposed = if e.terms.is_empty() { 0.0 } else {
                    e.coord * e.query_norm * e.terms.iter().map(TermFactors::weight).sum::<f64>()
                };
                prop_assert!((e.score - recomposed).abs() < 1e-12);
                prop_assert!((e.score - brute_score(&texts, &query, d)).abs() < 1e-9);
            }
        }

        #[test]
        fn adding_unrelated_document_only_moves_idf(texts in corpus_strategy(9), query in query_strategy()) {
            let before = index(docs_from(&texts));
            let mut more = docs_from(&texts);
            more.push(doc("Z", None, "zzz"));
            let after = index(more);
            let mut extended = texts.clone();
            extended.push("zzz".into());
            for d in 0..texts.len() {
                let id = format!("D{d:02}");
                prop_assert!((before.score_doc(&query, &id).unwrap() - brute_score(&texts, &query, d)).abs() < 1e-9);
                prop_assert!((after.score_doc(&query, &id).unwrap() - brute_score(&extended, &query, d)).abs() < 1e-9);
            }
        }

        #[test]
        fn smaller_k_is_prefix(texts in corpus_strategy(10), query in query_strategy(), k1 in 1usize..6, extra in 0usize..6) {
            let ix = index(docs_from(&texts));
            let short = ix.search(&query, k1);
            let long = ix.search(&query, k1 + extra);
            prop_assert_eq!(&long[..short.len()], &short[..]);
        }

        #[test]
        fn uniform_boost_scaling_keeps_ranking(texts in corpus_strategy(20), query in query_strategy(), c in 0.01f64..100.0) {
            let ix = index(docs_from(&texts));
            let scaled = QuerySpec {
                terms: query.terms.iter().map(|t| QueryTerm { word: t.word.clone(), boost: t.boost * c }).collect(),
            };
            let a = ix.search(&query, 100);
            let b = ix.search(&scaled, 100);
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.score / y.score - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn results_invariants(texts in corpus_strategy(10), query in query_strategy()) {
            let ix = index(docs_from(&texts));
            let hits = ix.search(&query, 100);
            for w in hits.windows(2) {
                prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].family_id < w[1].family_id));
            }
            for (i, h) in hits.iter().enumerate() {
                prop_assert_eq!(h.rank, i + 1);
                prop_assert!(h.score > 0.0);
            }
        }
    }
}
