//! Document collection, topics and relevance judgments.
//!
//! The collection is stored as JSON Lines, one patent document per line:
//!
//! ```text
//! {"doc_id": "EP1", "family_id": "F1", "language": "en", "claims": [{"num": 1, "text": "..."}]}
//! ```
//!
//! Relevance judgments (qrels) are tab-separated `topic_doc_id<TAB>family_id`
//! lines; lines starting with `#` are comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Language processed by the downstream modules.
pub const PROCESSED_LANGUAGE: &str = "en";

/// One numbered claim of a patent document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub num: u32,
    pub text: String,
}

/// One patent document: identifiers plus its ordered claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimDocument {
    pub doc_id: String,
    /// Patent family; equals `doc_id` when the record omits it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family_id: Option<String>,
    pub language: String,
    pub claims: Vec<Claim>,
}

impl ClaimDocument {
    pub fn new(
        doc_id: impl Into<String>,
        family_id: Option<String>,
        language: impl Into<String>,
        claims: Vec<Claim>,
    ) -> Result<Self> {
        let doc = ClaimDocument {
            doc_id: doc_id.into(),
            family_id,
            language: language.into(),
            claims,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn family_id(&self) -> &str {
        self.family_id.as_deref().unwrap_or(&self.doc_id)
    }

    pub fn is_processed_language(&self) -> bool {
        self.language.eq_ignore_ascii_case(PROCESSED_LANGUAGE)
    }

    pub fn claim(&self, num: u32) -> Option<&Claim> {
        self.claims
            .binary_search_by_key(&num, |c| c.num)
            .ok()
            .map(|i| &self.claims[i])
    }

    /// All claim texts joined by newlines.
    pub fn claims_text(&self) -> String {
        self.claims
            .iter()
            .map(|c| c.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidDocument {
            doc_id: self.doc_id.clone(),
            message,
        };
        if self.doc_id.trim().is_empty() {
            return Err(invalid("empty doc_id".into()));
        }
        let mut prev = 0u32;
        for claim in &self.claims {
            if claim.num == 0 {
                return Err(invalid("claim numbers start at 1".into()));
            }
            if claim.num <= prev {
                return Err(invalid(format!(
                    "claim {} out of order or repeated after claim {}",
                    claim.num, prev
                )));
            }
            if claim.text.trim().is_empty() {
                return Err(invalid(format!("claim {} has empty text", claim.num)));
            }
            prev = claim.num;
        }
        Ok(())
    }
}

/// Immutable document collection keyed by `doc_id`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: BTreeMap<String, ClaimDocument>,
}

impl Corpus {
    pub fn from_documents(docs: impl IntoIterator<Item = ClaimDocument>) -> Result<Self> {
        let mut documents = BTreeMap::new();
        for doc in docs {
            doc.validate()?;
            if documents.contains_key(&doc.doc_id) {
                return Err(Error::DuplicateDocument(doc.doc_id));
            }
            documents.insert(doc.doc_id.clone(), doc);
        }
        Ok(Corpus { documents })
    }

    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&ClaimDocument> {
        self.documents.get(doc_id)
    }

    /// Documents in ascending `doc_id` order.
    pub fn documents(&self) -> impl Iterator<Item = &ClaimDocument> {
        self.documents.values()
    }

    /// Documents in the processed language, ascending `doc_id` order.
    pub fn processed_documents(&self) -> impl Iterator<Item = &ClaimDocument> {
        self.documents
            .values()
            .filter(|d| d.is_processed_language())
    }

    /// Number of documents skipped because of their language.
    pub fn skipped_language_count(&self) -> usize {
        self.documents
            .values()
            .filter(|d| !d.is_processed_language())
            .count()
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for doc in self.documents.values() {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")
                .map_err(|e| Error::io("<corpus output>", e))?;
        }
        Ok(())
    }
}

/// Parses corpus JSONL from memory. `origin` names the source in errors.
pub fn parse_corpus(text: &str, origin: &Path) -> Result<Corpus> {
    let mut documents: BTreeMap<String, ClaimDocument> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let format_err = |message: String| Error::Format {
            path: origin.to_path_buf(),
            line: line_no,
            message,
        };
        let doc: ClaimDocument =
            serde_json::from_str(line).map_err(|e| format_err(e.to_string()))?;
        doc.validate().map_err(|e| format_err(e.to_string()))?;
        if documents.contains_key(&doc.doc_id) {
            return Err(Error::DuplicateDocument(doc.doc_id));
        }
        documents.insert(doc.doc_id.clone(), doc);
    }
    Ok(Corpus { documents })
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, path)
}

/// A topic document with its judged-relevant patent families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicCase {
    pub topic_doc_id: String,
    pub relevant_family_ids: BTreeSet<String>,
}

/// Parses qrels text; topics come back sorted by `topic_doc_id`.
pub fn parse_qrels(text: &str, origin: &Path) -> Result<Vec<TopicCase>> {
    let mut grouped: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let format_err = |message: &str| Error::Format {
            path: origin.to_path_buf(),
            line: idx + 1,
            message: message.to_string(),
        };
        let mut fields = line.split('\t').map(str::trim).filter(|f| !f.is_empty());
        let (Some(topic), Some(family)) = (fields.next(), fields.next()) else {
            return Err(format_err("expected topic_doc_id<TAB>family_id"));
        };
        if topic == family {
            return Err(format_err("topic document judged relevant to itself"));
        }
        grouped
            .entry(topic.to_string())
            .or_default()
            .insert(family.to_string());
    }
    Ok(grouped
        .into_iter()
        .map(|(topic_doc_id, relevant_family_ids)| TopicCase {
            topic_doc_id,
            relevant_family_ids,
        })
        .collect())
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<Vec<TopicCase>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_qrels(&text, path)
}
