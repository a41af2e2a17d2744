//! Recall, PRES, paired randomization test and α/β grid search.
//!
//! PRES with `n` relevant documents at cutoff `N_max`:
//!
//! ```text
//! PRES = 1 − (Σr/n − (n+1)/2) / N_max
//! ```
//!
//! Missing relevant documents are placed just past the cutoff, so that with
//! `n_R` retrieved the missing ones take ranks `N_max+n − (i−n_R−1)` for
//! `i = n_R+1 … n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_ITERATIONS: usize = 100_000;
pub const DEFAULT_ALPHA_GRID: [f64; 7] = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
pub const DEFAULT_BETA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopicOutcome {
    pub topic_doc_id: String,
    /// Ascending, distinct, each in `1..=n_max`.
    pub ranks_of_relevant: Vec<usize>,
    pub n: usize,
    pub n_max: usize,
}

impl TopicOutcome {
    /// Outcome of a ranked family list against a relevant set.
    pub fn from_ranking<'a>(
        topic_doc_id: &str,
        ranked_families: impl IntoIterator<Item = &'a str>,
        relevant: &std::collections::BTreeSet<String>,
        n_max: usize,
    ) -> Self {
        let ranks_of_relevant = ranked_families
            .into_iter()
            .take(n_max)
            .enumerate()
            .filter(|(_, f)| relevant.contains(*f))
            .map(|(i, _)| i + 1)
            .collect();
        TopicOutcome {
            topic_doc_id: topic_doc_id.to_string(),
            ranks_of_relevant,
            n: relevant.len(),
            n_max,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::NoRelevant(self.topic_doc_id.clone()));
        }
        let sorted = self.ranks_of_relevant.windows(2).all(|w| w[0] < w[1]);
        let in_range = self
            .ranks_of_relevant
            .iter()
            .all(|&r| (1..=self.n_max).contains(&r));
        if !sorted || !in_range || self.ranks_of_relevant.len() > self.n {
            return Err(Error::Config(format!(
                "invalid outcome for {}: ranks {:?}, n = {}, N_max = {}",
                self.topic_doc_id, self.ranks_of_relevant, self.n, self.n_max
            )));
        }
        Ok(())
    }
}

pub fn recall_at(outcome: &TopicOutcome) -> Result<f64> {
    outcome.check()?;
    Ok(outcome.ranks_of_relevant.len() as f64 / outcome.n as f64)
}

fn pres_from_sum(sum: f64, n: usize, n_max: usize) -> f64 {
    let n = n as f64;
    1.0 - (sum / n - (n + 1.0) / 2.0) / n_max as f64
}

pub fn pres_at(outcome: &TopicOutcome) -> Result<f64> {
    outcome.check()?;
    let n = outcome.n;
    let n_r = outcome.ranks_of_relevant.len();
    let retrieved: usize = outcome.ranks_of_relevant.iter().sum();
    let missing: usize = (n_r + 1..=n)
        .map(|i| outcome.n_max + n - (i - n_r - 1))
        .sum();
    Ok(pres_from_sum(
        (retrieved + missing) as f64,
        n,
        outcome.n_max,
    ))
}

/// PRES with the missing-document sum as originally published:
/// `Σr + n_R(N_max+n) − n_R(n_R−1)/2`. It can leave `[0, 1]`.
pub fn pres_original(outcome: &TopicOutcome) -> Result<f64> {
    outcome.check()?;
    let n = outcome.n as f64;
    let n_r = outcome.ranks_of_relevant.len() as f64;
    let retrieved: usize = outcome.ranks_of_relevant.iter().sum();
    let sum = retrieved as f64 + n_r * (outcome.n_max as f64 + n) - n_r * (n_r - 1.0) / 2.0;
    Ok(pres_from_sum(sum, outcome.n, outcome.n_max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicMetrics {
    pub topic_doc_id: String,
    pub recall: f64,
    pub pres: f64,
    pub retrieved_relevant: usize,
    pub relevant: usize,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub empty_query: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub metadata: serde_json::Value,
    pub n_max: usize,
    pub topics: Vec<TopicMetrics>,
    pub mean_recall: f64,
    pub mean_pres: f64,
}

impl MetricReport {
    /// `empty_query` lists topics whose query came out empty.
    pub fn from_outcomes(
        metadata: serde_json::Value,
        n_max: usize,
        outcomes: &[TopicOutcome],
        empty_query: &std::collections::BTreeSet<String>,
    ) -> Result<Self> {
        let topics = outcomes
            .iter()
            .map(|o| {
                Ok(TopicMetrics {
                    topic_doc_id: o.topic_doc_id.clone(),
                    recall: recall_at(o)?,
                    pres: pres_at(o)?,
                    retrieved_relevant: o.ranks_of_relevant.len(),
                    relevant: o.n,
                    empty_query: empty_query.contains(&o.topic_doc_id),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mean = |f: fn(&TopicMetrics) -> f64| {
            if topics.is_empty() {
                0.0
            } else {
                topics.iter().map(f).sum::<f64>() / topics.len() as f64
            }
        };
        Ok(MetricReport {
            metadata,
            n_max,
            mean_recall: mean(|t| t.recall),
            mean_pres: mean(|t| t.pres),
            topics,
        })
    }

    pub fn recalls(&self) -> Vec<f64> {
        self.topics.iter().map(|t| t.recall).collect()
    }

    pub fn pres_values(&self) -> Vec<f64> {
        self.topics.iter().map(|t| t.pres).collect()
    }
}

fn mean_abs(diffs: &[f64], signs: impl Fn(usize) -> bool) -> f64 {
    let s: f64 = diffs
        .iter()
        .enumerate()
        .map(|(i, d)| if signs(i) { -d } else { *d })
        .sum();
    (s / diffs.len() as f64).abs()
}

/// Two-sided paired sign-flip test on the mean difference.
/// `p = (1 + #{|flipped mean| ≥ observed}) / (1 + iterations)`.
pub fn randomization_test(a: &[f64], b: &[f64], iterations: usize, seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if iterations == 0 {
        return Err(Error::Config(
            "randomization test needs at least one iteration".into(),
        ));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let observed = mean_abs(&diffs, |_| false);
    // Relative slack so float noise in the sums cannot turn ties into misses.
    let threshold = observed - 1e-12 * observed.max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flips = vec![false; diffs.len()];
    let mut hits = 0usize;
    for _ in 0..iterations {
        for f in flips.iter_mut() {
            *f = rng.random::<bool>();
        }
        if mean_abs(&diffs, |i| flips[i]) >= threshold {
            hits += 1;
        }
    }
    Ok((1 + hits) as f64 / (1 + iterations) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub mean_pres: f64,
    pub mean_recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub points: Vec<GridPoint>,
    pub best_alpha: f64,
    pub best_beta: f64,
    pub best_mean_pres: f64,
}

/// Evaluates `evaluate(α, β) → (mean PRES, mean recall)` on every grid point
/// and returns the PRES argmax; ties go to smaller α, then smaller β.
pub fn grid_search<F>(alpha_grid: &[f64], beta_grid: &[f64], evaluate: F) -> Result<GridReport>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    if alpha_grid.is_empty() || beta_grid.is_empty() {
        return Err(Error::Config(
            "grid search needs non-empty α and β grids".into(),
        ));
    }
    let mut cells: Vec<(f64, f64)> = alpha_grid
        .iter()
        .flat_map(|&a| beta_grid.iter().map(move |&b| (a, b)))
        .collect();
    cells.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    cells.dedup();
    let points = cells
        .par_iter()
        .map(|&(alpha, beta)| {
            let (mean_pres, mean_recall) = evaluate(alpha, beta)?;
            Ok(GridPoint {
                alpha,
                beta,
                mean_pres,
                mean_recall,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // Points are in (α, β) order, so the first strict maximum wins ties.
    let best = points
        .iter()
        .fold(None::<&GridPoint>, |acc, p| match acc {
            Some(b) if b.mean_pres >= p.mean_pres => Some(b),
            _ => Some(p),
        })
        .expect("non-empty grid");
    Ok(GridReport {
        best_alpha: best.alpha,
        best_beta: best.beta,
        best_mean_pres: best.mean_pres,
        points,
    })
}
