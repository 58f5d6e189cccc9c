//! Command-line front end: ingest annotated text, extract measurements with
//! their sentence context, score against labeled data, and export histograms.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use quantext::annotation::service::{fetch_annotations, ServiceOptions};
use quantext::annotation::{parse_annotation_json, parse_conllu};
use quantext::evaluation::{
    aggregate, load_labels, render_table, ConfusionCounts, LabeledSentence,
};
use quantext::matcher::output::{format_number, parse_extraction_lines};
use quantext::pipeline::{
    bin_lower_bound, evaluate_corpus, extract_corpus, histogram, render_extractions,
    score_extraction_records, validate_dimension, with_jobs, EvaluationMode, ExtractOptions,
    SentenceRecord, SpanSource,
};
use quantext::rules::{load_rules_with, RuleOptions, RuleSet};
use quantext::{Sentence, UnitGazetteer};

#[derive(Parser)]
#[command(
    name = "quantext",
    version,
    about = "Measurement and context extraction from dependency-annotated text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract measurements and their related words as JSON Lines
    Extract(ExtractArgs),
    /// Score extractions against labeled data
    Evaluate(EvaluateArgs),
    /// Export a histogram of normalized quantities as CSV
    Stats(StatsArgs),
    /// Rule-file utilities
    Rules {
        #[command(subcommand)]
        command: RulesCommand,
    },
}

#[derive(Subcommand)]
enum RulesCommand {
    /// Check a rule file against the schema and report its footprint
    Validate {
        /// Rule file to check
        file: PathBuf,
        /// Accept dependency types outside the built-in inventory
        #[arg(long)]
        allow_unknown_deps: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    /// CoNLL-U with enhanced dependencies in the DEPS column
    Conllu,
    /// The annotation JSON document format
    AnnotationJson,
    /// Plain text, annotated through --endpoint
    RawText,
}

#[derive(Args)]
struct InputArgs {
    /// Input corpus files
    #[arg(long = "input", value_name = "PATH", num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Input format
    #[arg(long, value_enum, default_value_t = InputFormat::Conllu)]
    format: InputFormat,
    /// Annotation service URL (required for raw-text input)
    #[arg(long)]
    endpoint: Option<String>,
    /// Annotation service timeout in milliseconds
    #[arg(long, default_value_t = 30_000)]
    timeout_ms: u64,
    /// Extra annotation request attempts on connection errors and 5xx
    #[arg(long, default_value_t = 0)]
    retries: u32,
    /// Rule file (bundled rules when omitted)
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Unit gazetteer TSV (bundled table when omitted)
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// Worker threads for extraction (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Labeled data whose (number, unit) pairs can replace the detector
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Take measurement spans from --labels instead of the detector
    #[arg(long, requires = "labels")]
    override_spans: bool,
    /// Output path (stdout when omitted)
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Fail on per-sentence errors instead of skipping them
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Labeled data files; one per --input, or exactly one overall
    #[arg(long = "labels", value_name = "PATH", required = true, num_args = 1..)]
    labels: Vec<PathBuf>,
    /// Source tag per labels file for the report (default: file stem)
    #[arg(long = "tag", value_name = "NAME", num_args = 1..)]
    tags: Vec<String>,
    /// Run the detector instead of injecting ground-truth spans
    #[arg(long)]
    end_to_end: bool,
    /// Score a previously written extraction file instead of re-extracting
    #[arg(long, value_name = "PATH", conflicts_with_all = ["end_to_end"])]
    from_extractions: Option<PathBuf>,
    /// Also write the report as JSON
    #[arg(long, value_name = "PATH")]
    report_json: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Bin a previously written extraction file instead of re-extracting
    #[arg(long, value_name = "PATH")]
    from_extractions: Option<PathBuf>,
    /// Dimension to bin (e.g. "length")
    #[arg(long, conflicts_with = "unit")]
    dimension: Option<String>,
    /// Unit whose dimension is binned (e.g. "nm")
    #[arg(long)]
    unit: Option<String>,
    /// Bin width in base units
    #[arg(long, value_name = "WIDTH")]
    bin_width: f64,
    /// Output path (stdout when omitted)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(error) = run() {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Extract(args) => run_extract(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Stats(args) => run_stats(args),
        Command::Rules { command } => run_rules(command),
    }
}

/// Owned-or-bundled holder for rules and gazetteer.
enum Loaded<T: 'static> {
    Owned(T),
    Bundled(&'static T),
}

impl<T> std::ops::Deref for Loaded<T> {
    type Target = T;
    fn deref(&self) -> &T {
        match self {
            Loaded::Owned(value) => value,
            Loaded::Bundled(value) => value,
        }
    }
}

fn load_rule_set(path: Option<&Path>) -> Result<Loaded<RuleSet>> {
    match path {
        None => Ok(Loaded::Bundled(RuleSet::bundled())),
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading rules {}", path.display()))?;
            let rules = load_rules_with(&text, RuleOptions::default())
                .with_context(|| format!("loading rules {}", path.display()))?;
            Ok(Loaded::Owned(rules))
        }
    }
}

fn load_gazetteer(path: Option<&Path>) -> Result<Loaded<UnitGazetteer>> {
    match path {
        None => Ok(Loaded::Bundled(UnitGazetteer::bundled())),
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading gazetteer {}", path.display()))?;
            let gazetteer = UnitGazetteer::parse(&text)
                .with_context(|| format!("loading gazetteer {}", path.display()))?;
            Ok(Loaded::Owned(gazetteer))
        }
    }
}

fn load_sentences_from(path: &Path, args: &InputArgs) -> Result<Vec<Sentence>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading input {}", path.display()))?;
    let sentences = match args.format {
        InputFormat::Conllu => parse_conllu(&text)
            .with_context(|| format!("parsing CoNLL-U input {}", path.display()))?,
        InputFormat::AnnotationJson => parse_annotation_json(&text)
            .with_context(|| format!("parsing annotation JSON {}", path.display()))?,
        InputFormat::RawText => {
            let endpoint = args
                .endpoint
                .as_deref()
                .context("raw-text input requires --endpoint")?;
            let options = ServiceOptions {
                timeout: Duration::from_millis(args.timeout_ms),
                retries: args.retries,
            };
            fetch_annotations(endpoint, &text, &options)
                .with_context(|| format!("annotating {}", path.display()))?
        }
    };
    Ok(sentences)
}

fn load_all_sentences(args: &InputArgs) -> Result<Vec<Sentence>> {
    if args.inputs.is_empty() {
        bail!("at least one --input is required");
    }
    let mut all = Vec::new();
    for path in &args.inputs {
        all.extend(load_sentences_from(path, args)?);
    }
    Ok(all)
}

fn load_labels_file(path: &Path) -> Result<Vec<LabeledSentence>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading labels {}", path.display()))?;
    load_labels(&text).with_context(|| format!("loading labels {}", path.display()))
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => io::stdout()
            .write_all(content.as_bytes())
            .context("writing to stdout")?,
    }
    Ok(())
}

fn run_extract(args: ExtractArgs) -> Result<()> {
    let rules = load_rule_set(args.input.rules.as_deref())?;
    let gazetteer = load_gazetteer(args.input.gazetteer.as_deref())?;
    let sentences = load_all_sentences(&args.input)?;
    let labels = match &args.labels {
        Some(path) if args.override_spans => Some(load_labels_file(path)?),
        _ => None,
    };
    let source = match &labels {
        Some(labels) => SpanSource::Labels(labels),
        None => SpanSource::Detector,
    };
    let options = ExtractOptions {
        strict: args.strict,
    };
    let (records, summary) = with_jobs(args.input.jobs, || {
        extract_corpus(&sentences, &rules, &gazetteer, source, options)
    })??;
    write_output(args.output.as_deref(), &render_extractions(&records))?;
    eprintln!(
        "{} sentences, {} measurements, {} related words",
        summary.sentences, summary.measurements, summary.related_words
    );
    Ok(())
}

fn tag_for(labels_path: &Path, tags: &[String], index: usize) -> String {
    tags.get(index).cloned().unwrap_or_else(|| {
        labels_path
            .file_stem()
            .map(|stem| stem.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("source-{}", index + 1))
    })
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let mut tagged: Vec<(String, ConfusionCounts)> = Vec::new();
    if let Some(extractions_path) = &args.from_extractions {
        let text = fs::read_to_string(extractions_path)
            .with_context(|| format!("reading extractions {}", extractions_path.display()))?;
        let records = parse_extraction_lines(&text)
            .with_context(|| format!("parsing extractions {}", extractions_path.display()))?;
        for (index, labels_path) in args.labels.iter().enumerate() {
            let labels = load_labels_file(labels_path)?;
            let counts = score_extraction_records(&records, &labels);
            tagged.push((tag_for(labels_path, &args.tags, index), counts));
        }
    } else {
        if args.input.inputs.len() != args.labels.len() && args.input.inputs.len() != 1 {
            bail!(
                "{} label files need {} matching --input files (or exactly one shared corpus)",
                args.labels.len(),
                args.labels.len()
            );
        }
        let rules = load_rule_set(args.input.rules.as_deref())?;
        let gazetteer = load_gazetteer(args.input.gazetteer.as_deref())?;
        let mode = if args.end_to_end {
            EvaluationMode::EndToEnd
        } else {
            EvaluationMode::OverrideSpans
        };
        let shared = if args.input.inputs.len() == 1 {
            Some(load_sentences_from(&args.input.inputs[0], &args.input)?)
        } else {
            None
        };
        for (index, labels_path) in args.labels.iter().enumerate() {
            let sentences = match &shared {
                Some(sentences) => sentences.clone(),
                None => load_sentences_from(&args.input.inputs[index], &args.input)?,
            };
            let labels = load_labels_file(labels_path)?;
            let counts = with_jobs(args.input.jobs, || {
                evaluate_corpus(&sentences, &labels, &rules, &gazetteer, mode)
            })??;
            tagged.push((tag_for(labels_path, &args.tags, index), counts));
        }
    }
    let report = aggregate(&tagged);
    print!("{}", render_table(&report));
    if let Some(path) = &args.report_json {
        let json = serde_json::to_string_pretty(&report).context("serializing report")?;
        fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_stats(args: StatsArgs) -> Result<()> {
    if args.bin_width <= 0.0 || !args.bin_width.is_finite() {
        bail!("--bin-width must be a positive number");
    }
    let gazetteer = load_gazetteer(args.input.gazetteer.as_deref())?;
    let dimension = match (&args.dimension, &args.unit) {
        (Some(dimension), None) => dimension.clone(),
        (None, Some(unit)) => match gazetteer.lookup(unit) {
            Some(entry) => entry.dimension.clone(),
            None => bail!("unknown unit \"{unit}\""),
        },
        (None, None) => bail!("one of --dimension or --unit is required"),
        (Some(_), Some(_)) => unreachable!("clap rejects this combination"),
    };
    validate_dimension(&dimension, &gazetteer)?;
    let quantities: Vec<f64> = if let Some(extractions_path) = &args.from_extractions {
        let text = fs::read_to_string(extractions_path)
            .with_context(|| format!("reading extractions {}", extractions_path.display()))?;
        parse_extraction_lines(&text)
            .with_context(|| format!("parsing extractions {}", extractions_path.display()))?
            .iter()
            .flat_map(|record| &record.measurements)
            .filter(|m| m.dimension == dimension)
            .map(|m| m.normalized_quantity)
            .collect()
    } else {
        let rules = load_rule_set(args.input.rules.as_deref())?;
        let sentences = load_all_sentences(&args.input)?;
        let (records, _) = with_jobs(args.input.jobs, || {
            extract_corpus(
                &sentences,
                &rules,
                &gazetteer,
                SpanSource::Detector,
                ExtractOptions::default(),
            )
        })??;
        records
            .iter()
            .flat_map(|record: &SentenceRecord| &record.extractions)
            .filter(|e| e.normalized_unit.dimension == dimension)
            .map(|e| e.normalized_quantity)
            .collect()
    };
    let bins = histogram(quantities, args.bin_width);
    let mut csv = String::from("bin,count\n");
    for (index, count) in &bins {
        csv.push_str(&format_number(bin_lower_bound(*index, args.bin_width)));
        csv.push(',');
        csv.push_str(&count.to_string());
        csv.push('\n');
    }
    write_output(args.output.as_deref(), &csv)?;
    Ok(())
}

fn run_rules(command: RulesCommand) -> Result<()> {
    match command {
        RulesCommand::Validate {
            file,
            allow_unknown_deps,
        } => {
            let text = fs::read_to_string(&file)
                .with_context(|| format!("reading rules {}", file.display()))?;
            let rules = load_rules_with(&text, RuleOptions { allow_unknown_deps })
                .with_context(|| format!("invalid rule file {}", file.display()))?;
            println!(
                "ok: {} dependency types, {} distinct POS keys",
                rules.dependency_types().len(),
                rules.distinct_pos_keys().len()
            );
            Ok(())
        }
    }
}
