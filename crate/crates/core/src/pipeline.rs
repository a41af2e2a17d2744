//! Per-topic query extraction, retrieval and evaluation.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{tfidf_keywords, CollectionStats};
use crate::claimgraph::{build_claim_graph, claim_depth, DropReason};
use crate::corpus::{ClaimDocument, Corpus, TopicCase};
use crate::error::{Error, Result};
use crate::eval::{MetricReport, TopicOutcome};
use crate::parsetree::{retag, ParseSet};
use crate::scoring::{extract_query, Method, QuerySpec, ScoringParams};
use crate::search::{build_index, InvertedIndex, SearchResult};
use crate::spectree::{build_spec_tree, PositionIndex};

/// A keyword extraction system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Clst05,
    Clst06,
    Baseline,
}

impl System {
    pub fn method(self) -> Option<Method> {
        match self {
            System::Clst05 => Some(Method::Clst05),
            System::Clst06 => Some(Method::Clst06),
            System::Baseline => None,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.method() {
            Some(m) => m.fmt(f),
            None => f.write_str("baseline"),
        }
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("baseline") || s.eq_ignore_ascii_case("tfidf") {
            return Ok(System::Baseline);
        }
        match s.parse::<Method>()? {
            Method::Clst05 => Ok(System::Clst05),
            Method::Clst06 => Ok(System::Clst06),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractOptions {
    pub system: System,
    pub alpha: f64,
    pub beta: f64,
    pub top_n: usize,
    pub boost: bool,
    pub retag: bool,
}

/// Non-fatal data problems found while processing a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    MissingParse {
        doc_id: String,
        claim: u32,
    },
    DroppedReference {
        doc_id: String,
        claim: u32,
        referenced: u32,
        reason: DropReason,
    },
    SkippedLanguage {
        doc_id: String,
        language: String,
    },
    EmptyQuery {
        doc_id: String,
    },
}

/// Word positions over all parsed claims of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentPositions {
    pub doc_id: String,
    pub positions: PositionIndex,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn document_positions(
    doc: &ClaimDocument,
    parses: &ParseSet,
    retagged: bool,
) -> DocumentPositions {
    let mut out = DocumentPositions {
        doc_id: doc.doc_id.clone(),
        ..Default::default()
    };
    if !doc.is_processed_language() {
        out.diagnostics.push(Diagnostic::SkippedLanguage {
            doc_id: doc.doc_id.clone(),
            language: doc.language.clone(),
        });
        return out;
    }
    let graph = build_claim_graph(doc);
    for d in &graph.diagnostics {
        out.diagnostics.push(Diagnostic::DroppedReference {
            doc_id: doc.doc_id.clone(),
            claim: d.claim,
            referenced: d.referenced,
            reason: d.reason,
        });
    }
    let depths = claim_depth(&graph);
    for claim in &doc.claims {
        let Some(tree) = parses.get(&doc.doc_id, claim.num) else {
            out.diagnostics.push(Diagnostic::MissingParse {
                doc_id: doc.doc_id.clone(),
                claim: claim.num,
            });
            continue;
        };
        let spec = if retagged {
            build_spec_tree(&retag(tree))
        } else {
            build_spec_tree(tree)
        };
        let cd = depths.get(claim.num).unwrap_or(1);
        out.positions.add_tree(&spec, cd);
    }
    out
}

/// The query generated for one topic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicQuery {
    pub doc_id: String,
    pub method: System,
    pub terms: QuerySpec,
}

/// Loaded collection plus everything derived from it once.
pub struct Experiment<'a> {
    pub corpus: &'a Corpus,
    pub topics: &'a [TopicCase],
    pub parses: &'a ParseSet,
    pub index: InvertedIndex,
    pub stats: CollectionStats,
}

impl<'a> Experiment<'a> {
    pub fn new(corpus: &'a Corpus, topics: &'a [TopicCase], parses: &'a ParseSet) -> Result<Self> {
        for t in topics {
            if corpus.get(&t.topic_doc_id).is_none() {
                return Err(Error::UnknownDocument(t.topic_doc_id.clone()));
            }
        }
        Ok(Experiment {
            corpus,
            topics,
            parses,
            index: build_index(corpus),
            stats: CollectionStats::from_corpus(corpus),
        })
    }

    fn topic_doc(&self, topic: &TopicCase) -> &'a ClaimDocument {
        self.corpus
            .get(&topic.topic_doc_id)
            .expect("topic presence checked at construction")
    }

    /// Positions of every topic document, in topic order.
    pub fn topic_positions(&self, retagged: bool) -> Vec<DocumentPositions> {
        self.topics
            .par_iter()
            .map(|t| document_positions(self.topic_doc(t), self.parses, retagged))
            .collect()
    }

    /// Queries for every topic, in topic order, with their diagnostics.
    pub fn queries(&self, opts: &ExtractOptions) -> Result<(Vec<TopicQuery>, Vec<Diagnostic>)> {
        let mut diagnostics = Vec::new();
        let queries = match opts.system.method() {
            None => self
                .topics
                .par_iter()
                .map(|t| {
                    let doc = self.topic_doc(t);
                    let terms = if doc.is_processed_language() {
                        tfidf_keywords(doc, &self.stats, opts.top_n)
                    } else {
                        QuerySpec::default()
                    };
                    TopicQuery {
                        doc_id: t.topic_doc_id.clone(),
                        method: opts.system,
                        terms,
                    }
                })
                .collect(),
            Some(method) => {
                let positions = self.topic_positions(opts.retag);
                let queries = self.clst_queries(&positions, method, opts)?;
                diagnostics.extend(positions.into_iter().flat_map(|p| p.diagnostics));
                queries
            }
        };
        for q in &queries {
            if q.terms.is_empty() {
                diagnostics.push(Diagnostic::EmptyQuery {
                    doc_id: q.doc_id.clone(),
                });
            }
        }
        Ok((queries, diagnostics))
    }

    /// CLST queries from precomputed positions, so α/β sweeps parse once.
    pub fn clst_queries(
        &self,
        positions: &[DocumentPositions],
        method: Method,
        opts: &ExtractOptions,
    ) -> Result<Vec<TopicQuery>> {
        let params = ScoringParams {
            method,
            alpha: opts.alpha,
            beta: opts.beta,
            top_n: opts.top_n,
        };
        positions
            .par_iter()
            .map(|p| {
                Ok(TopicQuery {
                    doc_id: p.doc_id.clone(),
                    method: opts.system,
                    terms: extract_query(&p.positions, &params, opts.boost)?,
                })
            })
            .collect()
    }

    /// Top `n_max` families per query, never the topic's own family.
    pub fn retrieve(&self, queries: &[TopicQuery], n_max: usize) -> Vec<Vec<SearchResult>> {
        queries
            .par_iter()
            .map(|q| {
                let own = self.corpus.get(&q.doc_id).map(ClaimDocument::family_id);
                self.index.search_excluding(&q.terms, n_max, own)
            })
            .collect()
    }

    pub fn outcomes(&self, results: &[Vec<SearchResult>], n_max: usize) -> Vec<TopicOutcome> {
        self.topics
            .iter()
            .zip(results)
            .map(|(t, r)| {
                TopicOutcome::from_ranking(
                    &t.topic_doc_id,
                    r.iter().map(|h| h.family_id.as_str()),
                    &t.relevant_family_ids,
                    n_max,
                )
            })
            .collect()
    }

    /// Retrieval plus metrics for a set of queries.
    pub fn evaluate(
        &self,
        queries: &[TopicQuery],
        n_max: usize,
        metadata: serde_json::Value,
    ) -> Result<(Vec<Vec<SearchResult>>, MetricReport)> {
        let results = self.retrieve(queries, n_max);
        let outcomes = self.outcomes(&results, n_max);
        let empty: BTreeSet<String> = queries
            .iter()
            .filter(|q| q.terms.is_empty())
            .map(|q| q.doc_id.clone())
            .collect();
        let report = MetricReport::from_outcomes(metadata, n_max, &outcomes, &empty)?;
        Ok((results, report))
    }
}
