use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use emoflow::pipeline::{self, Overrides, PipelineConfig, StageReport};
use emoflow::scoring::{serve_lexicon, Lexicon};
use emoflow::synth::{write_fixture, SynthConfig};

/// Emotion dynamics across social and news media.
#[derive(Debug, Parser)]
#[command(name = "emoflow", version, about)]
struct Cli {
    /// Pipeline config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, replacing `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for surrogate testing and synthetic corpora.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of equal-width bins for transfer entropy.
    #[arg(long, global = true)]
    bins: Option<usize>,
    /// Rolling-mean window in days.
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Transfer entropy lag in days.
    #[arg(long, global = true)]
    lag: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every stage and print the artifact manifest.
    Run,
    /// Parse, filter and deduplicate both corpora.
    Ingest,
    /// Score ingested documents with the configured scorer.
    Score,
    /// Build daily and smoothed series, volume and crossovers.
    Aggregate,
    /// Compute transfer entropy in both directions.
    Te,
    /// Render SVG plots from the aggregate and te artifacts.
    Plot,
    /// Write a synthetic corpus, lexicon and config into `--out`.
    Synth {
        #[arg(long, value_enum, default_value_t = Scenario::Forward)]
        scenario: Scenario,
    },
    /// Answer scoring requests on stdin with a lexicon (plugin protocol).
    ServeLexicon {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = Lexicon::DEFAULT_SMOOTHING)]
        smoothing_mass: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scenario {
    /// Two months, social leads news by three days.
    Forward,
    /// Four months, the leading channel flips halfway.
    Reversal,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            output_dir: self.out.clone(),
            seed: self.seed,
            bins: self.bins,
            window: self.window,
            lag: self.lag,
        }
    }

    fn pipeline_config(&self) -> anyhow::Result<PipelineConfig> {
        let Some(path) = &self.config else {
            bail!(emoflow::Error::Config(
                "--config is required for this command".into()
            ));
        };
        let mut cfg = PipelineConfig::load(path)?;
        cfg.apply(&self.overrides());
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_stage(name: &str, report: &StageReport) -> anyhow::Result<()> {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let summary = serde_json::json!({
        "stage": name,
        "artifacts": report.artifacts,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Run => {
            let cfg = cli.pipeline_config()?;
            let outcome = pipeline::run_pipeline(&cfg)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", outcome.manifest.to_json());
        }
        Command::Ingest => print_stage("ingest", &pipeline::ingest(&cli.pipeline_config()?)?)?,
        Command::Score => print_stage("score", &pipeline::score(&cli.pipeline_config()?)?)?,
        Command::Aggregate => {
            print_stage("aggregate", &pipeline::aggregate(&cli.pipeline_config()?)?)?
        }
        Command::Te => print_stage("te", &pipeline::te(&cli.pipeline_config()?)?)?,
        Command::Plot => print_stage("plot", &pipeline::plot(&cli.pipeline_config()?)?)?,
        Command::Synth { scenario } => {
            let Some(out) = &cli.out else {
                bail!(emoflow::Error::Config("synth needs --out".into()));
            };
            let seed = cli.seed.unwrap_or(0);
            let synth = match scenario {
                Scenario::Forward => SynthConfig::two_months(seed),
                Scenario::Reversal => SynthConfig::reversal(seed),
            };
            let windows = match scenario {
                Scenario::Forward => Vec::new(),
                Scenario::Reversal => synth.phase_windows(),
            };
            let path = write_fixture(out, &synth, &windows)?;
            println!("{}", path.display());
        }
        Command::ServeLexicon {
            lexicon,
            smoothing_mass,
        } => {
            let text = std::fs::read_to_string(lexicon).map_err(|e| emoflow::Error::Io {
                path: lexicon.clone(),
                source: e,
            })?;
            let lex = Lexicon::from_json(&text, *smoothing_mass)?;
            let stdin = io::stdin();
            let stdout = io::stdout();
            serve_lexicon(BufReader::new(stdin.lock()), stdout.lock(), &lex)
                .context("serving requests")?;
        }
    }
    Ok(())
}

fn report_error(err: &anyhow::Error) -> ExitCode {
    let (kind, path, validation) = match err.downcast_ref::<emoflow::Error>() {
        Some(e) => (
            e.kind(),
            e.path().map(|p| p.display().to_string()),
            e.is_validation(),
        ),
        None => ("internal", None, false),
    };
    let body = serde_json::json!({
        "error": { "kind": kind, "message": format!("{err:#}"), "path": path }
    });
    let _ = writeln!(io::stderr(), "{body}");
    ExitCode::from(if validation { 2 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => report_error(&err),
    }
}
