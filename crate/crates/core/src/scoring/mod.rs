//! Stem grouping, CLST05/CLST06 scores and query construction.
//!
//! For a stem `s` with position multiset `P(s)`:
//!
//! ```text
//! CLST05(s) = Σ_{(nd,nh,cd) ∈ P(s)} exp(α·nd/(nd+nh−1) + β·cd)
//! CLST06(s) = Σ_{P(s)} exp(α·max nd + β·max cd) = |P(s)|·exp(α·max nd + β·max cd)
//! ```
//!
//! where the maxima in CLST06 range over the whole multiset.

mod porter;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use porter::stem;

use crate::error::{Error, Result};
use crate::spectree::{PositionIndex, WordPosition};

/// Exponent arguments are clamped here so pathological trees cannot overflow.
pub const MAX_EXPONENT: f64 = 700.0;

/// Boosts are rescaled so the top term gets this value.
pub const MAX_BOOST: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "clst05")]
    Clst05,
    #[serde(rename = "clst06")]
    Clst06,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Clst05 => "clst05",
            Method::Clst06 => "clst06",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clst05" | "clst-05" => Ok(Method::Clst05),
            "clst06" | "clst-06" => Ok(Method::Clst06),
            other => Err(Error::Config(format!("unknown scoring method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams {
    pub method: Method,
    pub alpha: f64,
    pub beta: f64,
    pub top_n: usize,
}

/// Aggregate over all words sharing a stem.
#[derive(Debug, Clone, PartialEq)]
pub struct StemProfile {
    pub stem: String,
    /// Most frequent surface word; ties go to the lexicographically smallest.
    pub representative: String,
    pub occurrences: BTreeMap<String, usize>,
    pub positions: Vec<WordPosition>,
}

pub fn aggregate_stems(index: &PositionIndex) -> Vec<StemProfile> {
    let mut by_stem: BTreeMap<String, StemProfile> = BTreeMap::new();
    for (word, positions) in &index.positions {
        let s = stem(word);
        let profile = by_stem.entry(s.clone()).or_insert_with(|| StemProfile {
            stem: s,
            representative: String::new(),
            occurrences: BTreeMap::new(),
            positions: Vec::new(),
        });
        *profile.occurrences.entry(word.clone()).or_default() += positions.len();
        profile.positions.extend_from_slice(positions);
    }
    let mut profiles: Vec<StemProfile> = by_stem.into_values().collect();
    for p in &mut profiles {
        // BTreeMap iterates words in ascending order, so the first maximum wins ties.
        let mut best: Option<(&String, usize)> = None;
        for (w, &c) in &p.occurrences {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((w, c));
            }
        }
        p.representative = best.map(|(w, _)| w.clone()).unwrap_or_default();
    }
    profiles
}

fn clamped_exp(x: f64) -> f64 {
    x.min(MAX_EXPONENT).exp()
}

pub fn clst05(positions: &[WordPosition], alpha: f64, beta: f64) -> Result<f64> {
    if positions.is_empty() {
        return Err(Error::EmptyPositions);
    }
    Ok(positions
        .iter()
        .map(|p| {
            let nd = f64::from(p.nd);
            let relative_depth = nd / (nd + f64::from(p.nh) - 1.0);
            clamped_exp(alpha * relative_depth + beta * f64::from(p.cd))
        })
        .sum())
}

pub fn clst06(positions: &[WordPosition], alpha: f64, beta: f64) -> Result<f64> {
    let max_nd = positions
        .iter()
        .map(|p| p.nd)
        .max()
        .ok_or(Error::EmptyPositions)?;
    let max_cd = positions
        .iter()
        .map(|p| p.cd)
        .max()
        .ok_or(Error::EmptyPositions)?;
    let each = clamped_exp(alpha * f64::from(max_nd) + beta * f64::from(max_cd));
    Ok(positions.len() as f64 * each)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredStem {
    pub profile: StemProfile,
    pub score: f64,
}

pub fn score_profiles(
    profiles: Vec<StemProfile>,
    method: Method,
    alpha: f64,
    beta: f64,
) -> Result<Vec<ScoredStem>> {
    profiles
        .into_iter()
        .map(|profile| {
            let score = match method {
                Method::Clst05 => clst05(&profile.positions, alpha, beta)?,
                Method::Clst06 => clst06(&profile.positions, alpha, beta)?,
            };
            Ok(ScoredStem { profile, score })
        })
        .collect()
}

fn by_score_then_stem(a: &ScoredStem, b: &ScoredStem) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.profile.stem.cmp(&b.profile.stem))
}

/// The `n` best stems, descending score, ties by stem.
pub fn select_top_n(mut stems: Vec<ScoredStem>, n: usize) -> Vec<ScoredStem> {
    stems.sort_by(by_score_then_stem);
    stems.truncate(n);
    stems
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTerm {
    #[serde(rename = "w")]
    pub word: String,
    pub boost: f64,
}

/// Ordered, distinct query words with boosts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub terms: Vec<QueryTerm>,
}

impl QuerySpec {
    pub fn unboosted<S: Into<String>>(words: impl IntoIterator<Item = S>) -> Self {
        QuerySpec {
            terms: words
                .into_iter()
                .map(|w| QueryTerm {
                    word: w.into(),
                    boost: 1.0,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.word.as_str())
    }
}

pub fn build_query(top: &[ScoredStem], boosted: bool) -> QuerySpec {
    let max = top.iter().map(|s| s.score).fold(0.0_f64, f64::max);
    let mut seen = std::collections::HashSet::new();
    let terms = top
        .iter()
        .filter(|s| seen.insert(s.profile.representative.clone()))
        .map(|s| QueryTerm {
            word: s.profile.representative.clone(),
            boost: if boosted && max > 0.0 {
                s.score / max * MAX_BOOST
            } else {
                1.0
            },
        })
        .collect();
    QuerySpec { terms }
}

/// Full CLST keyword selection for one document's position index.
pub fn extract_query(
    index: &PositionIndex,
    params: &ScoringParams,
    boosted: bool,
) -> Result<QuerySpec> {
    let scored = score_profiles(
        aggregate_stems(index),
        params.method,
        params.alpha,
        params.beta,
    )?;
    Ok(build_query(&select_top_n(scored, params.top_n), boosted))
}
