use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use claimtree_core::commands::{self, RunConfig};
use claimtree_core::pipeline::{Diagnostic, System};
use claimtree_core::Error;

/// Keyword extraction from patent claims and prior-art retrieval experiments.
#[derive(Parser)]
#[command(name = "claimtree", version)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(flatten)]
    opts: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check corpus, parses and qrels for consistency.
    Validate,
    /// Write the keyword query of every topic.
    Extract,
    /// Build the index and write a snapshot.
    Index,
    /// Extract, retrieve, and write a run file and metric report.
    Run,
    /// Grid-search alpha and beta for mean PRES.
    Grid,
    /// Metrics of an existing run file, optionally tested against another.
    Report {
        #[arg(long, value_name = "FILE")]
        run: PathBuf,
        /// Second run for the paired randomization test.
        #[arg(long, value_name = "FILE")]
        compare: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    parses: Option<PathBuf>,
    #[arg(long, global = true)]
    qrels: Option<PathBuf>,
    /// Index snapshot to search instead of building one.
    #[arg(long, global = true)]
    index: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// clst05, clst06 or baseline.
    #[arg(long, global = true, value_parser = parse_system)]
    method: Option<System>,
    #[arg(long, global = true)]
    top_n: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Use keyword scores as query boosts.
    #[arg(long, global = true)]
    boost: bool,
    /// Keep the parser's POS tags.
    #[arg(long, global = true)]
    no_retag: bool,
    #[arg(long, global = true)]
    n_max: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Randomization test iterations.
    #[arg(long, global = true)]
    iterations: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    beta_grid: Option<Vec<f64>>,
}

fn parse_system(s: &str) -> Result<System, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Overrides {
    fn apply(self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(method, alpha, beta, n_max, seed, iterations, alpha_grid, beta_grid);
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if self.$field.is_some() { cfg.$field = self.$field; })*
            };
        }
        set_opt!(corpus, parses, qrels, index, output_dir, top_n);
        if self.boost {
            cfg.boost = true;
        }
        if self.no_retag {
            cfg.retag = false;
        }
    }
}

fn report_diagnostics(diagnostics: &[Diagnostic]) {
    if !diagnostics.is_empty() {
        eprintln!("{} warning(s)", diagnostics.len());
    }
    for d in diagnostics {
        if let Ok(line) = serde_json::to_string(d) {
            eprintln!("warning: {line}");
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.opts.apply(&mut cfg);
    cfg.validate()?;
    let stdout = std::io::stdout().lock();
    match cli.command {
        Command::Validate => {
            let summary = commands::cmd_validate(&cfg)?;
            report_diagnostics(&summary.warnings);
            for f in &summary.fatal {
                eprintln!("error: {f}");
            }
            commands::print_json(stdout, &summary)?;
            if !summary.is_ok() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Extract => {
            let summary = commands::cmd_extract(&cfg)?;
            report_diagnostics(&summary.diagnostics);
            println!("{}", summary.output.display());
        }
        Command::Index => {
            println!("{}", commands::cmd_index(&cfg)?.display());
        }
        Command::Run => {
            let summary = commands::cmd_run(&cfg)?;
            report_diagnostics(&summary.diagnostics);
            commands::print_json(
                stdout,
                &serde_json::json!({
                    "run_file": summary.run_file,
                    "report_file": summary.report_file,
                    "mean_recall": summary.report.mean_recall,
                    "mean_pres": summary.report.mean_pres,
                }),
            )?;
        }
        Command::Grid => {
            let summary = commands::cmd_grid(&cfg)?;
            commands::print_json(
                stdout,
                &serde_json::json!({
                    "output": summary.output,
                    "best_alpha": summary.grid.best_alpha,
                    "best_beta": summary.grid.best_beta,
                    "best_mean_pres": summary.grid.best_mean_pres,
                }),
            )?;
        }
        Command::Report { run, compare } => {
            let summary = commands::cmd_report(&cfg, &run, compare.as_deref())?;
            commands::print_json(stdout, &summary)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
