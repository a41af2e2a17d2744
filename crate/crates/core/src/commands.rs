//! Experiment commands behind the command-line tool.
//!
//! Each command takes a [`RunConfig`], reads its inputs, writes its outputs
//! under `output_dir` and returns a summary. File names carry the run tag,
//! e.g. `run-clst06-noretag-boost.txt`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::claimgraph::build_claim_graph;
use crate::corpus::{load_corpus, load_qrels, Corpus, TopicCase};
use crate::error::{Error, Result};
use crate::eval::{
    grid_search, randomization_test, GridReport, MetricReport, TopicOutcome, DEFAULT_ALPHA_GRID,
    DEFAULT_BETA_GRID, DEFAULT_ITERATIONS,
};
use crate::parsetree::{load_parse_set, ParseSet};
use crate::pipeline::{Diagnostic, Experiment, ExtractOptions, System, TopicQuery};
use crate::search::{load_run, write_run, InvertedIndex, SearchResult};

pub const DEFAULT_CLST_TOP_N: usize = 100;
pub const DEFAULT_N_MAX: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: System,
    pub boost: bool,
    pub retag: bool,
    /// Defaults to 70 for the baseline and 100 otherwise.
    pub top_n: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub n_max: usize,
    pub seed: u64,
    pub iterations: usize,
    pub corpus: Option<PathBuf>,
    pub parses: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    /// Prebuilt index snapshot; built from the corpus when absent.
    pub index: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: System::Clst05,
            boost: false,
            retag: true,
            top_n: None,
            alpha: 1.0,
            beta: 0.5,
            n_max: DEFAULT_N_MAX,
            seed: 0,
            iterations: DEFAULT_ITERATIONS,
            corpus: None,
            parses: None,
            qrels: None,
            index: None,
            output_dir: None,
            alpha_grid: DEFAULT_ALPHA_GRID.to_vec(),
            beta_grid: DEFAULT_BETA_GRID.to_vec(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn top_n(&self) -> usize {
        self.top_n.unwrap_or(match self.method {
            System::Baseline => crate::baseline::DEFAULT_KEYWORDS,
            _ => DEFAULT_CLST_TOP_N,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let top_n = self.top_n();
        if !(10..=100).contains(&top_n) || !top_n.is_multiple_of(10) {
            return Err(Error::Config(format!(
                "top_n must be a multiple of 10 between 10 and 100, got {top_n}"
            )));
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        let all_finite = [self.alpha, self.beta]
            .iter()
            .chain(&self.alpha_grid)
            .chain(&self.beta_grid)
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::Config(
                "alpha, beta and grid values must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Run tag naming the system variant.
    pub fn tag(&self) -> String {
        let mut tag = self.method.to_string();
        if self.method != System::Baseline {
            if !self.retag {
                tag.push_str("-noretag");
            }
            if self.boost {
                tag.push_str("-boost");
            }
        }
        tag
    }

    pub fn extract_options(&self) -> ExtractOptions {
        ExtractOptions {
            system: self.method,
            alpha: self.alpha,
            beta: self.beta,
            top_n: self.top_n(),
            boost: self.boost,
            retag: self.retag,
        }
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method,
            "tag": self.tag(),
            "alpha": self.alpha,
            "beta": self.beta,
            "top_n": self.top_n(),
            "boost": self.boost,
            "retag": self.retag,
            "n_max": self.n_max,
            "seed": self.seed,
        })
    }

    fn require(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
        path.clone()
            .ok_or_else(|| Error::Config(format!("missing {what} path")))
    }

    fn output_path(&self, name: &str) -> Result<PathBuf> {
        let dir = Self::require(&self.output_dir, "output directory")?;
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir.join(name))
    }
}

struct Inputs {
    corpus: Corpus,
    topics: Vec<TopicCase>,
    parses: ParseSet,
}

fn load_inputs(cfg: &RunConfig, need_parses: bool) -> Result<Inputs> {
    cfg.validate()?;
    let corpus = load_corpus(RunConfig::require(&cfg.corpus, "corpus")?)?;
    let topics = load_qrels(RunConfig::require(&cfg.qrels, "qrels")?)?;
    let parses = match &cfg.parses {
        Some(p) => load_parse_set(p)?,
        None if need_parses => return Err(Error::Config("missing parses path".into())),
        None => ParseSet::default(),
    };
    Ok(Inputs {
        corpus,
        topics,
        parses,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn pretty_json(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub documents: usize,
    pub processed_documents: usize,
    pub skipped_language: usize,
    pub parses: usize,
    pub topics: usize,
    pub warnings: Vec<Diagnostic>,
    /// Problems that make the data set unusable.
    pub fatal: Vec<String>,
}

impl ValidationSummary {
    pub fn is_ok(&self) -> bool {
        self.fatal.is_empty()
    }
}

/// Checks corpus, parses and qrels. Unreadable files are errors; the
/// summary's `fatal` list holds consistency failures.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationSummary> {
    let corpus = load_corpus(RunConfig::require(&cfg.corpus, "corpus")?)?;
    let parses = match &cfg.parses {
        Some(p) => load_parse_set(p)?,
        None => ParseSet::default(),
    };
    let topics = match &cfg.qrels {
        Some(q) => load_qrels(q)?,
        None => Vec::new(),
    };
    let mut warnings = Vec::new();
    let mut fatal = Vec::new();
    for doc in corpus.documents() {
        if !doc.is_processed_language() {
            warnings.push(Diagnostic::SkippedLanguage {
                doc_id: doc.doc_id.clone(),
                language: doc.language.clone(),
            });
            continue;
        }
        for d in build_claim_graph(doc).diagnostics {
            warnings.push(Diagnostic::DroppedReference {
                doc_id: doc.doc_id.clone(),
                claim: d.claim,
                referenced: d.referenced,
                reason: d.reason,
            });
        }
    }
    // Parses are only needed for the documents queries are built from.
    let needs_parses: BTreeSet<&str> = if cfg.qrels.is_some() {
        topics.iter().map(|t| t.topic_doc_id.as_str()).collect()
    } else {
        corpus
            .processed_documents()
            .map(|d| d.doc_id.as_str())
            .collect()
    };
    let families: BTreeSet<&str> = corpus.documents().map(|d| d.family_id()).collect();
    for t in &topics {
        if corpus.get(&t.topic_doc_id).is_none() {
            fatal.push(format!("topic {} is not in the corpus", t.topic_doc_id));
        }
        for f in &t.relevant_family_ids {
            if !families.contains(f.as_str()) {
                fatal.push(format!(
                    "topic {} judges unknown family {f}",
                    t.topic_doc_id
                ));
            }
        }
    }
    if cfg.parses.is_some() {
        for id in &needs_parses {
            let Some(doc) = corpus.get(id) else { continue };
            if !doc.is_processed_language() {
                continue;
            }
            for c in &doc.claims {
                if parses.get(id, c.num).is_none() {
                    warnings.push(Diagnostic::MissingParse {
                        doc_id: doc.doc_id.clone(),
                        claim: c.num,
                    });
                }
            }
        }
        for (doc_id, claim) in parses.trees.keys() {
            let known = corpus
                .get(doc_id)
                .is_some_and(|d| d.claim(*claim).is_some());
            if !known {
                fatal.push(format!("parse for unknown claim {doc_id} #{claim}"));
            }
        }
    }
    Ok(ValidationSummary {
        documents: corpus.num_documents(),
        processed_documents: corpus.processed_documents().count(),
        skipped_language: corpus.skipped_language_count(),
        parses: parses.len(),
        topics: topics.len(),
        warnings,
        fatal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractSummary {
    pub output: PathBuf,
    pub queries: Vec<TopicQuery>,
    pub diagnostics: Vec<Diagnostic>,
}

/// One line per topic: `{"doc_id", "method", "terms": [{"w", "boost"}]}`.
fn query_dump(queries: &[TopicQuery]) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Line<'a> {
        doc_id: &'a str,
        method: System,
        terms: &'a [crate::scoring::QueryTerm],
    }
    let mut out = Vec::new();
    for q in queries {
        serde_json::to_writer(
            &mut out,
            &Line {
                doc_id: &q.doc_id,
                method: q.method,
                terms: &q.terms.terms,
            },
        )?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Writes `queries-<tag>.jsonl`, one line per topic.
pub fn cmd_extract(cfg: &RunConfig) -> Result<ExtractSummary> {
    let inputs = load_inputs(cfg, cfg.method != System::Baseline)?;
    let exp = Experiment::new(&inputs.corpus, &inputs.topics, &inputs.parses)?;
    let (queries, diagnostics) = exp.queries(&cfg.extract_options())?;
    let output = cfg.output_path(&format!("queries-{}.jsonl", cfg.tag()))?;
    write_file(&output, &query_dump(&queries)?)?;
    Ok(ExtractSummary {
        output,
        queries,
        diagnostics,
    })
}

/// Writes the index snapshot `index.json`.
pub fn cmd_index(cfg: &RunConfig) -> Result<PathBuf> {
    let corpus = load_corpus(RunConfig::require(&cfg.corpus, "corpus")?)?;
    let output = cfg.output_path("index.json")?;
    write_file(
        &output,
        crate::search::build_index(&corpus)
            .to_snapshot()?
            .as_bytes(),
    )?;
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run_file: PathBuf,
    pub report_file: PathBuf,
    pub report: MetricReport,
    pub diagnostics: Vec<Diagnostic>,
}

fn run_bytes(queries: &[TopicQuery], results: &[Vec<SearchResult>], tag: &str) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (q, r) in queries.iter().zip(results) {
        write_run(&mut out, &q.doc_id, r, tag).map_err(|e| Error::io("<run output>", e))?;
    }
    Ok(out)
}

/// Extracts, retrieves and evaluates; writes `run-<tag>.txt`,
/// `report-<tag>.json` and `queries-<tag>.jsonl`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let inputs = load_inputs(cfg, cfg.method != System::Baseline)?;
    let mut exp = Experiment::new(&inputs.corpus, &inputs.topics, &inputs.parses)?;
    if let Some(path) = &cfg.index {
        exp.index = InvertedIndex::load_snapshot(path)?;
    }
    let (queries, diagnostics) = exp.queries(&cfg.extract_options())?;
    let (results, report) = exp.evaluate(&queries, cfg.n_max, cfg.metadata())?;
    let tag = cfg.tag();
    let run_file = cfg.output_path(&format!("run-{tag}.txt"))?;
    write_file(&run_file, &run_bytes(&queries, &results, &tag)?)?;
    let report_file = cfg.output_path(&format!("report-{tag}.json"))?;
    write_file(&report_file, &pretty_json(&report)?)?;
    write_file(
        &cfg.output_path(&format!("queries-{tag}.jsonl"))?,
        &query_dump(&queries)?,
    )?;
    Ok(RunSummary {
        run_file,
        report_file,
        report,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub output: PathBuf,
    pub grid: GridReport,
}

/// Mean PRES@N_max over the α × β grid; writes `grid-<tag>.json`.
pub fn cmd_grid(cfg: &RunConfig) -> Result<GridSummary> {
    let Some(method) = cfg.method.method() else {
        return Err(Error::Config("grid search needs a CLST method".into()));
    };
    let inputs = load_inputs(cfg, true)?;
    let exp = Experiment::new(&inputs.corpus, &inputs.topics, &inputs.parses)?;
    let positions = exp.topic_positions(cfg.retag);
    let base = cfg.extract_options();
    let grid = grid_search(&cfg.alpha_grid, &cfg.beta_grid, |alpha, beta| {
        let opts = ExtractOptions {
            alpha,
            beta,
            ..base
        };
        let queries = exp.clst_queries(&positions, method, &opts)?;
        let (_, report) = exp.evaluate(&queries, cfg.n_max, serde_json::Value::Null)?;
        Ok((report.mean_pres, report.mean_recall))
    })?;
    let output = cfg.output_path(&format!("grid-{}.json", cfg.tag()))?;
    let doc = serde_json::json!({"metadata": cfg.metadata(), "grid": grid});
    write_file(&output, &pretty_json(&doc)?)?;
    Ok(GridSummary { output, grid })
}

/// Significance of the per-topic difference between two runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline_mean_recall: f64,
    pub baseline_mean_pres: f64,
    pub p_recall: f64,
    pub p_pres: f64,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub report: MetricReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

fn report_from_run(run: &Path, topics: &[TopicCase], n_max: usize) -> Result<MetricReport> {
    let mut ranked: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
    let mut tags = BTreeSet::new();
    for e in load_run(run)? {
        tags.insert(e.tag);
        ranked
            .entry(e.topic_doc_id)
            .or_default()
            .push((e.rank, e.family_id));
    }
    let outcomes: Vec<TopicOutcome> = topics
        .iter()
        .map(|t| {
            let mut list = ranked.remove(&t.topic_doc_id).unwrap_or_default();
            list.sort();
            TopicOutcome::from_ranking(
                &t.topic_doc_id,
                list.iter().map(|(_, f)| f.as_str()),
                &t.relevant_family_ids,
                n_max,
            )
        })
        .collect();
    let metadata = serde_json::json!({"run": run, "tags": tags});
    MetricReport::from_outcomes(metadata, n_max, &outcomes, &BTreeSet::new())
}

/// Metrics of an existing run file against the qrels, optionally compared
/// with a second run by the paired randomization test.
pub fn cmd_report(cfg: &RunConfig, run: &Path, compare: Option<&Path>) -> Result<ReportSummary> {
    cfg.validate()?;
    let topics = load_qrels(RunConfig::require(&cfg.qrels, "qrels")?)?;
    let report = report_from_run(run, &topics, cfg.n_max)?;
    let comparison = match compare {
        None => None,
        Some(other) => {
            let base = report_from_run(other, &topics, cfg.n_max)?;
            Some(Comparison {
                baseline_mean_recall: base.mean_recall,
                baseline_mean_pres: base.mean_pres,
                p_recall: randomization_test(
                    &report.recalls(),
                    &base.recalls(),
                    cfg.iterations,
                    cfg.seed,
                )?,
                p_pres: randomization_test(
                    &report.pres_values(),
                    &base.pres_values(),
                    cfg.iterations,
                    cfg.seed,
                )?,
                iterations: cfg.iterations,
                seed: cfg.seed,
            })
        }
    };
    let summary = ReportSummary { report, comparison };
    if cfg.output_dir.is_some() {
        let stem = run.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let path = cfg.output_path(&format!("metrics-{stem}.json"))?;
        write_file(&path, &pretty_json(&summary)?)?;
    }
    Ok(summary)
}

/// Writes a JSON value followed by a newline.
pub fn print_json(mut out: impl Write, value: &impl Serialize) -> Result<()> {
    out.write_all(&pretty_json(value)?)
        .map_err(|e| Error::io("<stdout>", e))
}
