//! Command-line front end: `evaluate`, `estimate`, `inject` and `measure`.
//!
//! All commands stream their inputs in bounded batches, so memory use does
//! not grow with corpus size; batches still fan out across threads and
//! output order always matches input order.
//!
//! Exit codes form a pipeline contract: 0 on success, 1 on fatal I/O or
//! format problems (missing files, unequal parallel line counts, no usable
//! input), 2 when evaluation finished but some input lines were malformed
//! (the report is still produced, with the per-line errors listed).
//!
//! `SPELLBENCH_THREADS` caps internal parallelism without affecting
//! results. All files are UTF-8, one sentence per line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::align::EvalTriple;
use crate::error::{Error, Result};
use crate::inject::{
    count_errors, inject_errors_from, ErrorCounts, ErrorModel, InjectionConfig, ModelEstimator,
};
use crate::metrics::{evaluate_indexed, CountTable, EvalMode, LineError, MetricReport};
use crate::textnorm::{NormConfig, ZwjPolicy};

/// Environment variable capping the size of the internal thread pool.
pub const THREADS_ENV: &str = "SPELLBENCH_THREADS";

/// Lines processed per streaming batch.
const BATCH_LINES: usize = 4096;

const EXIT_OK: i32 = 0;
const EXIT_FATAL: i32 = 1;
const EXIT_PARTIAL: i32 = 2;

#[derive(Parser)]
#[command(
    name = "spellbench",
    version,
    about = "Evaluate spell-correction output and build noisy test corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions against references with alignment-aware counting
    Evaluate(EvaluateArgs),
    /// Estimate an error model from a noisy/clean parallel corpus
    Estimate(EstimateArgs),
    /// Inject spelling errors into a clean corpus
    Inject(InjectArgs),
    /// Report the character-level error percentage between two corpora
    Measure(MeasureArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ZwjArg {
    Keep,
    Strip,
    Cluster,
}

#[derive(Args)]
struct NormArgs {
    /// Disable canonical composition (NFC)
    #[arg(long)]
    no_nfc: bool,
    /// Zero-width-joiner handling
    #[arg(long, value_enum, default_value = "cluster")]
    zwj: ZwjArg,
    /// Lowercase text before comparison
    #[arg(long)]
    lowercase: bool,
}

impl NormArgs {
    fn config(&self) -> NormConfig {
        NormConfig {
            nfc: !self.no_nfc,
            zwj_policy: match self.zwj {
                ZwjArg::Keep => ZwjPolicy::Keep,
                ZwjArg::Strip => ZwjPolicy::Strip,
                ZwjArg::Cluster => ZwjPolicy::Cluster,
            },
            lowercase: self.lowercase,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// JSONL file with one {"original","predicted","expected"} object per line
    #[arg(long, value_name = "FILE", conflicts_with_all = ["original", "predicted", "expected"])]
    jsonl: Option<PathBuf>,
    /// Original (uncorrected) sentences, one per line
    #[arg(long, value_name = "FILE", requires_all = ["predicted", "expected"])]
    original: Option<PathBuf>,
    /// System output sentences, one per line
    #[arg(long, value_name = "FILE")]
    predicted: Option<PathBuf>,
    /// Gold sentences, one per line
    #[arg(long, value_name = "FILE")]
    expected: Option<PathBuf>,
    /// Compare position by position without alignment
    #[arg(long)]
    legacy: bool,
    /// Write the JSON report to this path
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Args)]
struct EstimateArgs {
    /// Noisy side of the parallel corpus
    #[arg(long, value_name = "FILE")]
    noisy: PathBuf,
    /// Clean side of the parallel corpus
    #[arg(long, value_name = "FILE")]
    clean: PathBuf,
    /// Where to write the error-model JSON
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Args)]
struct InjectArgs {
    /// Clean corpus to corrupt
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Error-model JSON (see `estimate`)
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Probability that a word stays unchanged; defaults to the model's value
    #[arg(long, value_name = "RATE")]
    pass_through: Option<f64>,
    /// Seed for reproducible corruption
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Most edits applied to a single corrupted word
    #[arg(long, default_value_t = 1)]
    max_edits: u32,
    /// Where to write the noisy corpus
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Args)]
struct MeasureArgs {
    /// Noisy corpus
    #[arg(long, value_name = "FILE")]
    noisy: PathBuf,
    /// Clean reference corpus
    #[arg(long, value_name = "FILE")]
    clean: PathBuf,
    #[command(flatten)]
    norm: NormArgs,
}

/// Buffered line reader that tracks byte offsets (for decode errors) and
/// whether each line carried a terminating newline (so output can be
/// byte-identical).
struct LineReader {
    path: PathBuf,
    inner: BufReader<File>,
    byte_offset: usize,
    lines_read: usize,
}

/// One input line without its terminator, plus whether one was present.
#[derive(Debug)]
struct Line {
    text: String,
    terminated: bool,
}

impl LineReader {
    fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            inner: BufReader::new(file),
            byte_offset: 0,
            lines_read: 0,
        })
    }

    fn next_line(&mut self) -> Result<Option<Line>> {
        let mut buf = Vec::new();
        let n = self
            .inner
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::Format(format!("cannot read {}: {e}", self.path.display())))?;
        if n == 0 {
            return Ok(None);
        }
        let terminated = buf.last() == Some(&b'\n');
        if terminated {
            buf.pop();
        }
        let text = String::from_utf8(buf).map_err(|e| Error::Decode {
            offset: self.byte_offset + e.utf8_error().valid_up_to(),
        })?;
        self.byte_offset += n;
        self.lines_read += 1;
        Ok(Some(Line { text, terminated }))
    }

    /// Up to `max` further lines; empty at end of input.
    fn next_batch(&mut self, max: usize) -> Result<Vec<Line>> {
        let mut batch = Vec::new();
        while batch.len() < max {
            match self.next_line()? {
                Some(line) => batch.push(line),
                None => break,
            }
        }
        Ok(batch)
    }
}

/// Where evaluation triples come from: one JSONL file or three parallel
/// line-aligned text files.
pub enum TripleSource {
    Jsonl(PathBuf),
    Parallel {
        original: PathBuf,
        predicted: PathBuf,
        expected: PathBuf,
    },
}

enum TripleStream {
    Jsonl(LineReader),
    Parallel {
        original: LineReader,
        predicted: LineReader,
        expected: LineReader,
    },
}

impl TripleSource {
    fn stream(&self) -> Result<TripleStream> {
        Ok(match self {
            TripleSource::Jsonl(path) => TripleStream::Jsonl(LineReader::open(path)?),
            TripleSource::Parallel {
                original,
                predicted,
                expected,
            } => TripleStream::Parallel {
                original: LineReader::open(original)?,
                predicted: LineReader::open(predicted)?,
                expected: LineReader::open(expected)?,
            },
        })
    }
}

/// Line-numbered triples plus the parse errors found alongside them.
type TripleBatch = (Vec<(usize, EvalTriple)>, Vec<LineError>);

impl TripleStream {
    /// Next batch of line-numbered triples plus per-line parse errors;
    /// both empty at end of input.
    fn next_batch(&mut self) -> Result<TripleBatch> {
        match self {
            TripleStream::Jsonl(reader) => {
                let mut triples = Vec::new();
                let mut errors = Vec::new();
                while triples.len() + errors.len() < BATCH_LINES {
                    let line_no = reader.lines_read + 1;
                    let Some(line) = reader.next_line()? else {
                        break;
                    };
                    if line.text.trim().is_empty() {
                        errors.push(LineError {
                            line: line_no,
                            message: "empty line".into(),
                        });
                        continue;
                    }
                    match serde_json::from_str::<EvalTriple>(&line.text) {
                        Ok(triple) => triples.push((line_no, triple)),
                        Err(e) => errors.push(LineError {
                            line: line_no,
                            message: format!("invalid JSON: {e}"),
                        }),
                    }
                }
                Ok((triples, errors))
            }
            TripleStream::Parallel {
                original,
                predicted,
                expected,
            } => {
                let mut triples = Vec::new();
                while triples.len() < BATCH_LINES {
                    let line_no = expected.lines_read + 1;
                    let o = original.next_line()?;
                    let p = predicted.next_line()?;
                    let e = expected.next_line()?;
                    match (o, p, e) {
                        (Some(o), Some(p), Some(e)) => {
                            triples.push((line_no, EvalTriple::new(o.text, p.text, e.text)));
                        }
                        (None, None, None) => break,
                        _ => {
                            return Err(Error::Format(
                                "parallel files differ in length".to_string(),
                            ))
                        }
                    }
                }
                Ok((triples, Vec::new()))
            }
        }
    }
}

/// Runs the CLI on the given arguments and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    configure_threads();
    let cli = Cli::parse_from(args);
    let outcome = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Inject(args) => cmd_inject(args),
        Command::Measure(args) => cmd_measure(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FATAL
        }
    }
}

fn configure_threads() {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                // ignored when a global pool already exists
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn read_model(path: &Path) -> Result<ErrorModel> {
    let file = File::open(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn create_output(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path)
        .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut out = create_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

fn print_summary(report: &MetricReport, legacy: bool) {
    let mode = if legacy {
        "legacy (positional)"
    } else {
        "aligned"
    };
    println!("mode:          {mode}");
    println!("sentences:     {}", report.n_sentences);
    println!("hallucinated:  {}", report.n_hallucinated);
    println!(
        "detection:     precision {:.6}  recall {:.6}  f1 {:.6}",
        report.detection.precision, report.detection.recall, report.detection.f1
    );
    println!(
        "correction:    precision {:.6}  recall {:.6}  f0.5 {:.6}",
        report.correction.precision, report.correction.recall, report.correction.f0_5
    );
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<i32> {
    let source = match (&args.jsonl, &args.original, &args.predicted, &args.expected) {
        (Some(path), None, None, None) => TripleSource::Jsonl(path.clone()),
        (None, Some(o), Some(p), Some(e)) => TripleSource::Parallel {
            original: o.clone(),
            predicted: p.clone(),
            expected: e.clone(),
        },
        _ => {
            return Err(Error::InvalidArgument(
                "provide either --jsonl or all of --original/--predicted/--expected".into(),
            ))
        }
    };
    let cfg = args.norm.config();
    let mode = if args.legacy {
        EvalMode::Legacy
    } else {
        EvalMode::Aligned
    };

    let mut stream = source.stream()?;
    let mut counts = CountTable::default();
    let mut n_sentences = 0;
    let mut n_hallucinated = 0;
    let mut errors = Vec::new();
    let mut evaluated_any = false;
    loop {
        let (triples, parse_errors) = stream.next_batch()?;
        if triples.is_empty() && parse_errors.is_empty() {
            break;
        }
        evaluated_any |= !triples.is_empty();
        let batch = evaluate_indexed(&triples, &cfg, mode);
        counts.merge(&batch.counts);
        n_sentences += batch.n_sentences;
        n_hallucinated += batch.n_hallucinated;
        errors.extend(batch.errors);
        errors.extend(parse_errors);
    }
    if !evaluated_any {
        return Err(Error::Format("no triples in input".into()));
    }
    errors.sort_by_key(|e| e.line);
    let report = MetricReport::from_counts(counts, n_sentences, n_hallucinated, errors);

    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    print_summary(&report, args.legacy);
    for err in &report.errors {
        eprintln!("line {}: {}", err.line, err.message);
    }
    Ok(if report.errors.is_empty() {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    })
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    let mut noisy = LineReader::open(&args.noisy)?;
    let mut clean = LineReader::open(&args.clean)?;
    let cfg = args.norm.config();
    let mut estimator = ModelEstimator::new();
    loop {
        match (noisy.next_line()?, clean.next_line()?) {
            (Some(n), Some(c)) => estimator.observe(&n.text, &c.text, &cfg),
            (None, None) => break,
            _ => {
                return Err(Error::Format(format!(
                    "parallel files differ in length: {} has more lines",
                    if noisy.lines_read > clean.lines_read {
                        args.noisy.display()
                    } else {
                        args.clean.display()
                    }
                )))
            }
        }
    }
    let model = estimator.finish()?;
    write_json(&args.out, &model)?;
    println!(
        "proportions: substitute {:.4}  insert {:.4}  delete {:.4}  transpose {:.4}",
        model.proportions.substitute,
        model.proportions.insert,
        model.proportions.delete,
        model.proportions.transpose
    );
    println!("pass_through_default: {:.4}", model.pass_through_default);
    Ok(EXIT_OK)
}

fn cmd_inject(args: InjectArgs) -> Result<i32> {
    let model = read_model(&args.model)?;
    let icfg = InjectionConfig {
        pass_through_rate: args.pass_through.unwrap_or(model.pass_through_default),
        seed: args.seed,
        max_edits_per_word: args.max_edits,
    };
    let norm = args.norm.config();

    let mut reader = LineReader::open(&args.input)?;
    let mut out = create_output(&args.out)?;
    let mut tally = ErrorCounts::default();
    let mut sentence_index = 0usize;
    loop {
        let batch = reader.next_batch(BATCH_LINES)?;
        if batch.is_empty() {
            break;
        }
        let clean_lines: Vec<String> = batch.iter().map(|l| l.text.clone()).collect();
        let noisy_lines = inject_errors_from(&clean_lines, sentence_index, &model, &icfg, &norm)?;
        sentence_index += clean_lines.len();
        for (noisy, line) in noisy_lines.iter().zip(&batch) {
            out.write_all(noisy.as_bytes())
                .and_then(|_| {
                    if line.terminated {
                        out.write_all(b"\n")
                    } else {
                        Ok(())
                    }
                })
                .map_err(|e| Error::Format(format!("cannot write {}: {e}", args.out.display())))?;
        }
        tally.merge(&count_errors(&noisy_lines, &clean_lines, &norm)?);
    }
    out.flush()
        .map_err(|e| Error::Format(format!("cannot write {}: {e}", args.out.display())))?;

    println!("error_percentage: {:.6}", tally.percentage());
    Ok(EXIT_OK)
}

fn cmd_measure(args: MeasureArgs) -> Result<i32> {
    let mut noisy = LineReader::open(&args.noisy)?;
    let mut clean = LineReader::open(&args.clean)?;
    let cfg = args.norm.config();
    let mut tally = ErrorCounts::default();
    loop {
        let noisy_batch = noisy.next_batch(BATCH_LINES)?;
        let clean_batch = clean.next_batch(BATCH_LINES)?;
        if noisy_batch.len() != clean_batch.len() {
            return Err(Error::Format(format!(
                "parallel corpora differ in length: {} vs {} sentences so far",
                noisy.lines_read, clean.lines_read
            )));
        }
        if noisy_batch.is_empty() {
            break;
        }
        let noisy_lines: Vec<String> = noisy_batch.into_iter().map(|l| l.text).collect();
        let clean_lines: Vec<String> = clean_batch.into_iter().map(|l| l.text).collect();
        tally.merge(&count_errors(&noisy_lines, &clean_lines, &cfg)?);
    }
    println!("error_percentage: {:.6}", tally.percentage());
    Ok(EXIT_OK)
}
