use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use contribmine::embed::EmbedderSpec;
use contribmine::evaluation::{author_match_accuracy, load_gold, task_accuracy};
use contribmine::hcontrib::{build_prototypes, ClassifierOptions};
use contribmine::model::{load_corpus, read_assignments, write_assignments, Corpus};
use contribmine::names::ResolutionRecord;
use contribmine::pipeline::{merge, process_article, CorpusOutput};
use contribmine::predictor::{self, ModelKind};
use contribmine::taxonomy::{load_taxonomy, Taxonomy};
use contribmine::{analytics, miner};

#[derive(Parser, Debug)]
#[command(
    name = "contribmine",
    version,
    about = "Mine CRediT roles from author contribution statements"
)]
struct Cli {
    /// Worker threads; 0 picks one per core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a corpus file and report rejected lines.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Assign CRediT roles to every author of every article.
    Classify(ClassifyArgs),
    /// Frequent role combinations across articles.
    Mine {
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long, default_value_t = miner::DEFAULT_MIN_SUPPORT)]
        min_support: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write directed pair rows (support only, no confidence).
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Positional and disparity statistics.
    Stats {
        #[arg(long)]
        assignments: PathBuf,
        /// Corpus the assignments came from; gives exact team sizes.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Required for csv; json goes to stdout without it.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Score assignments and mention resolutions against gold labels.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        resolutions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict roles from byline metadata.
    #[command(subcommand)]
    Predict(PredictCommand),
    /// ingest, resolve, classify, mine and stats into one directory.
    Pipeline {
        #[command(flatten)]
        classify: ClassifierFlags,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = miner::DEFAULT_MIN_SUPPORT)]
        min_support: f64,
    },
}

#[derive(Args, Debug)]
struct ClassifierFlags {
    #[arg(long, env = "CONTRIBMINE_TAXONOMY")]
    taxonomy: Option<PathBuf>,
    /// `lexical` or `vectors:<path>`.
    #[arg(long, default_value = "lexical")]
    embedder: String,
    /// Leave clauses unclassified when the best similarity is below this.
    #[arg(long)]
    min_sim: Option<f64>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    flags: ClassifierFlags,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Dump every resolved mention as JSONL.
    #[arg(long)]
    resolutions: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum PredictCommand {
    /// Build feature rows from a corpus and its assignments.
    Features {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Train {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Held-out accuracy of all three models.
    Eval {
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e
                .chain()
                .filter_map(|c| c.downcast_ref::<contribmine::Error>())
                .any(contribmine::Error::is_validation);
            ExitCode::from(if validation { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { corpus } => {
            let c = ingest(&corpus)?;
            let authors: usize = c.records.iter().map(|r| r.team_size()).sum();
            println!(
                "{} records, {} rejected, {} authors",
                c.records.len(),
                c.diagnostics.len(),
                authors
            );
        }
        Command::Classify(args) => {
            let corpus = ingest(&args.corpus)?;
            let out = classify(&corpus, &args.flags)?;
            write_assignments(&out.assignments, &args.out)?;
            if let Some(path) = &args.diagnostics {
                let mut lines: Vec<String> =
                    corpus.diagnostics.iter().map(|d| d.to_string()).collect();
                lines.extend(out.diagnostics.iter().cloned());
                write_lines(path, &lines)?;
            }
            if let Some(path) = &args.resolutions {
                write_resolutions(path, &out.resolutions)?;
            }
            for d in &out.diagnostics {
                eprintln!("{d}");
            }
        }
        Command::Mine {
            assignments,
            min_support,
            out,
            pairs,
        } => {
            let rows = read_assignments(&assignments)?;
            let itemsets = miner::mine(&miner::build_transactions(&rows), min_support)?;
            write_text(&out, &miner::itemsets_csv(&itemsets))?;
            if let Some(path) = pairs {
                write_text(&path, &miner::pairs_csv(&miner::top_pairs(&itemsets)))?;
            }
        }
        Command::Stats {
            assignments,
            corpus,
            out_dir,
            format,
        } => {
            let rows = read_assignments(&assignments)?;
            let sizes = corpus
                .map(|p| ingest(&p))
                .transpose()?
                .map(|c| c.team_sizes());
            let report = analytics::compute_stats(&rows, sizes.as_ref())?;
            match (format, out_dir) {
                (Format::Csv, Some(dir)) => write_stats(&dir, &report)?,
                (Format::Csv, None) => anyhow::bail!(contribmine::Error::Config(
                    "--out-dir is required for csv output".into()
                )),
                (Format::Json, dir) => {
                    let json = serde_json::to_string_pretty(&report)? + "\n";
                    match dir {
                        Some(dir) => {
                            create_dir(&dir)?;
                            write_text(&dir.join("stats.json"), &json)?;
                        }
                        None => print!("{json}"),
                    }
                }
            }
        }
        Command::Eval {
            gold,
            pred,
            resolutions,
            out,
        } => {
            let gold = load_gold(&gold)?;
            let pred = read_assignments(&pred)?;
            let mut report = serde_json::Map::new();
            report.insert(
                "tasks".into(),
                serde_json::to_value(task_accuracy(&gold, &pred)?)?,
            );
            if let Some(path) = resolutions {
                let res = read_resolutions(&path)?;
                report.insert(
                    "author_matching".into(),
                    serde_json::to_value(author_match_accuracy(&gold, &res)?)?,
                );
            }
            write_text(&out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
        Command::Predict(cmd) => predict(cmd, cli.seed)?,
        Command::Pipeline {
            classify: flags,
            corpus,
            out_dir,
            min_support,
        } => {
            if !(min_support > 0.0 && min_support <= 1.0) {
                anyhow::bail!(contribmine::Error::Config(format!(
                    "--min-support must be in (0, 1], got {min_support}"
                )));
            }
            let corpus = ingest(&corpus)?;
            create_dir(&out_dir)?;
            let out = classify(&corpus, &flags)?;
            write_assignments(&out.assignments, &out_dir.join("assignments.jsonl"))?;
            write_resolutions(&out_dir.join("resolutions.jsonl"), &out.resolutions)?;
            let mut diag: Vec<String> = corpus.diagnostics.iter().map(|d| d.to_string()).collect();
            diag.extend(out.diagnostics.iter().cloned());
            write_lines(&out_dir.join("diagnostics.tsv"), &diag)?;

            let itemsets = miner::mine(&miner::build_transactions(&out.assignments), min_support)?;
            write_text(
                &out_dir.join("itemsets.csv"),
                &miner::itemsets_csv(&itemsets),
            )?;
            write_text(
                &out_dir.join("pairs.csv"),
                &miner::pairs_csv(&miner::top_pairs(&itemsets)),
            )?;

            let report = analytics::compute_stats(&out.assignments, Some(&corpus.team_sizes()))?;
            write_stats(&out_dir, &report)?;
        }
    }
    Ok(())
}

fn ingest(path: &Path) -> Result<Corpus> {
    let corpus = load_corpus(path)?;
    for d in &corpus.diagnostics {
        eprintln!("{d}");
    }
    log::info!("{}: {} records", path.display(), corpus.records.len());
    Ok(corpus)
}

fn load_classifier(
    flags: &ClassifierFlags,
) -> Result<(Taxonomy, Box<dyn contribmine::embed::EmbeddingProvider>)> {
    let spec: EmbedderSpec = flags.embedder.parse()?;
    let provider = spec.build()?;
    let taxonomy = match &flags.taxonomy {
        Some(p) => load_taxonomy(p)?,
        None => Taxonomy::default_bundled(),
    };
    let taxonomy = build_prototypes(&taxonomy, provider.as_ref())?;
    Ok((taxonomy, provider))
}

/// Articles are processed on the rayon pool; the merge step re-sorts, so
/// the result is the same for any thread count.
fn classify(corpus: &Corpus, flags: &ClassifierFlags) -> Result<CorpusOutput> {
    let (taxonomy, provider) = load_classifier(flags)?;
    let options = ClassifierOptions {
        min_similarity: flags.min_sim,
    };
    let outputs = corpus
        .records
        .par_iter()
        .map(|a| process_article(a, &taxonomy, provider.as_ref(), options))
        .collect();
    Ok(merge(outputs))
}

fn predict(cmd: PredictCommand, seed: u64) -> Result<()> {
    match cmd {
        PredictCommand::Features {
            corpus,
            assignments,
            out,
        } => {
            let corpus = ingest(&corpus)?;
            let rows = read_assignments(&assignments)?;
            let ex = predictor::extract_features(&rows, &corpus)?;
            if ex.zero_task_authors > 0 {
                eprintln!(
                    "-\tauthors without tasks excluded: {}",
                    ex.zero_task_authors
                );
            }
            write_text(&out, &predictor::rows_csv(&ex.rows))?;
        }
        PredictCommand::Train { rows, model, out } => {
            let kind: ModelKind = model.parse()?;
            let rows = read_rows(&rows)?;
            let model = predictor::train(&rows, kind, seed)?;
            for c in &model.constant_fallbacks {
                log::warn!("{c}: single class in training rows, constant prediction");
            }
            model.save(&out)?;
        }
        PredictCommand::Eval { rows, out } => {
            let rows = read_rows(&rows)?;
            let table = predictor::evaluate_models(&rows, seed)?;
            write_text(&out, &table.to_csv())?;
        }
    }
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<predictor::FeatureRow>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(predictor::parse_rows_csv(&text)?)
}

fn write_stats(dir: &Path, report: &analytics::StatsReport) -> Result<()> {
    create_dir(dir)?;
    for (name, body) in report.csv_files() {
        write_text(&dir.join(name), &body)?;
    }
    write_text(&dir.join("fit.json"), &report.fit_json())
}

fn write_resolutions(path: &Path, records: &[ResolutionRecord]) -> Result<()> {
    let lines = records
        .iter()
        .map(serde_json::to_string)
        .collect::<serde_json::Result<Vec<_>>>()?;
    write_lines(path, &lines)
}

fn read_resolutions(path: &Path) -> Result<Vec<ResolutionRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                contribmine::Error::Invalid(format!("{}:{}: {e}", path.display(), i + 1)).into()
            })
        })
        .collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut body = String::new();
    for l in lines {
        body.push_str(l);
        body.push('\n');
    }
    write_text(path, &body)
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    f.write_all(body.as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}
