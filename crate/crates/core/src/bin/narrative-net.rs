use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use narrative_net::config::{resolve_http, HttpSettings};
use narrative_net::extraction::TokenBudget;
use narrative_net::pipeline::{
    cmd_align, cmd_analyze, cmd_clean, cmd_extract, cmd_validate, AnalyzeOptions, Backend,
    CorpusSource, ExtractOptions, RunManifest, DEFAULT_SVG_METRICS,
};

#[derive(Parser)]
#[command(name = "narrative-net", version, about = "Character-relationship networks from narrative texts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Mock,
    Http,
}

#[derive(Subcommand)]
enum Command {
    /// Extract relationship networks from a corpus.
    Extract {
        #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
        corpus: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "mock")]
        backend: BackendKind,
        /// Scripted replies for the mock backend.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        max_context_tokens: u64,
        #[arg(long, default_value_t = 8_000)]
        max_output_tokens: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        rejects: PathBuf,
        /// TOML file with an [http] table.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        api_url: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        timeout_secs: Option<u64>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Repair labels and drop duplicate pairs and networks.
    Clean {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Metrics, communities, group comparisons, trends and histograms.
    Analyze {
        #[arg(long)]
        networks: PathBuf,
        #[arg(long)]
        metadata: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Write histograms; optionally a comma-separated metric list.
        #[arg(long, num_args = 0..=1, value_delimiter = ',', require_equals = true)]
        svg: Option<Vec<String>>,
    },
    /// Score predicted annotations against gold annotations.
    Validate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fuzzy_pairs: bool,
    },
    /// Match volumes against a catalog by title and author similarity.
    Align {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<RunManifest> {
    Ok(match cli.command {
        Command::Extract {
            corpus,
            manifest,
            backend,
            fixtures,
            max_context_tokens,
            max_output_tokens,
            out,
            rejects,
            config,
            api_url,
            model,
            timeout_secs,
            workers,
        } => {
            let corpus = match (corpus, manifest) {
                (Some(dir), _) => CorpusSource::Directory(dir),
                (None, Some(csv)) => CorpusSource::Manifest(csv),
                (None, None) => bail!("one of --corpus or --manifest is required"),
            };
            let backend = match backend {
                BackendKind::Mock => Backend::Mock {
                    fixtures: fixtures.context("--backend mock needs --fixtures")?,
                },
                BackendKind::Http => {
                    let flags = HttpSettings {
                        api_url,
                        api_key: None,
                        model,
                        timeout_secs,
                    };
                    Backend::Http(resolve_http(flags, |k| std::env::var(k).ok(), config.as_deref())?)
                }
            };
            cmd_extract(&ExtractOptions {
                corpus,
                backend,
                budget: TokenBudget::new(max_context_tokens, max_output_tokens)?,
                out,
                rejects,
                workers,
            })?
        }
        Command::Clean { input, out } => cmd_clean(&input, &out)?,
        Command::Analyze {
            networks,
            metadata,
            out_dir,
            svg,
        } => {
            let svg_metrics = match svg {
                None => Vec::new(),
                Some(list) if list.is_empty() => DEFAULT_SVG_METRICS.map(String::from).to_vec(),
                Some(list) => list,
            };
            cmd_analyze(&AnalyzeOptions {
                networks,
                metadata,
                out_dir,
                svg_metrics,
            })?
        }
        Command::Validate {
            gold,
            pred,
            out,
            fuzzy_pairs,
        } => cmd_validate(&gold, &pred, &out, fuzzy_pairs)?,
        Command::Align {
            left,
            right,
            threshold,
            out,
        } => cmd_align(&left, &right, threshold, &out)?,
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(manifest) => {
            for notice in &manifest.notices {
                eprintln!("notice: {notice}");
            }
            let counts: Vec<String> = manifest.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("{}: {}", manifest.command, counts.join(" "));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
