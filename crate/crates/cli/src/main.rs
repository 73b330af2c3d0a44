//! `driverid`: command-line front end for the driver identification pipeline.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use driverid::eval::{compare_accuracies, Comparison, CvReport, SplitMode};
use driverid::ingest::class_distribution;
use driverid::matrix::FeatureMatrix;
use driverid::models::{ModelKind, ModelSpec};
use driverid::obd::{parse_hex_bytes, parse_hex_u8, PidRegistry};
use driverid::pipeline::{
    self, compare_to_zeror, read_json, write_json, FeatureMode, ModelBundle, Preset, RunConfig,
    RunReport, WindowSummary,
};
use driverid::preprocess::{FeatureSelectionReport, FitPolicy, Statistic};
use driverid::{Error, ErrorKind};

const AFTER_HELP: &str = "\
Configuration precedence, lowest to highest: built-in defaults, the `repro`
preset, the --config file, command-line flags.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.";

#[derive(Parser, Debug)]
#[command(name = "driverid", version, about = "Identify drivers from CAN-bus / OBD-II telemetry")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    /// JSON run configuration; any flag given on the command line wins.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decode one OBD-II response payload.
    Decode(DecodeArgs),
    /// Load a trip log and summarise it; optionally write the filtered rows.
    Ingest(IngestArgs),
    /// Select features and extract sliding-window statistics.
    Prepare(PrepareArgs),
    /// Train one model on a prepared matrix and save it.
    Train(TrainArgs),
    /// Cross-validate models on a prepared matrix.
    Evaluate(EvaluateArgs),
    /// Rank models from saved reports against a baseline.
    Compare(CompareArgs),
    /// Run ingest, preparation and evaluation in one go.
    Run(RunArgs),
    /// Repeat one of the two headline experiments.
    Repro(ReproArgs),
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Service (mode) byte in hex.
    #[arg(long, default_value = "01")]
    service: String,
    /// PID in hex, e.g. 0C.
    #[arg(long)]
    pid: String,
    /// Data bytes in hex, e.g. "1A F8".
    #[arg(long)]
    bytes: String,
    /// Alternative PID registry CSV.
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct DataArgs {
    /// Trip log CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    /// Columns to ignore, comma separated.
    #[arg(long, value_delimiter = ',')]
    exclude: Option<Vec<String>>,
    /// Labels to keep, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    keep: Option<Vec<String>>,
}

#[derive(Args, Debug, Default)]
struct FeatureArgs {
    /// fixed15, rank:K or list:a,b,c.
    #[arg(long)]
    features: Option<FeatureMode>,
    /// Window length in samples.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Statistics per window, e.g. mean,median,std.
    #[arg(long, value_parser = parse_stats)]
    stats: Option<Stats>,
}

#[derive(Args, Debug, Default)]
struct EvalArgs {
    /// Model kinds, comma separated, or `all`.
    #[arg(long, value_parser = parse_kinds)]
    kind: Option<Kinds>,
    /// Neighbours for k-NN.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    stratified: Option<bool>,
    #[arg(long, value_parser = parse_split)]
    split: Option<SplitMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rows the normalizer is fitted on in each fold: train or all.
    #[arg(long, value_parser = parse_fit)]
    fit_normalizer_on: Option<FitPolicy>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Write the kept rows here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the summary even when writing rows with --out.
    #[arg(long)]
    summary: bool,
}

#[derive(Args, Debug)]
struct PrepareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    features: FeatureArgs,
    /// Window matrix CSV; a JSON sidecar with the same stem records the selection.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Prepared matrix CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "Class")]
    label_column: String,
    #[arg(long)]
    kind: ModelKind,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Prepared matrix CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-class metrics as CSV, for plotting.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Reports written by `evaluate`, `run` or `repro`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long, default_value = "zeror")]
    baseline: String,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-class metrics as CSV, for plotting.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Also train every model on all windows and save it here.
    #[arg(long)]
    model_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReproArgs {
    /// table6 (drivers A and D) or table7 (all drivers).
    preset: Preset,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone)]
struct Stats(Vec<Statistic>);

#[derive(Debug, Clone)]
struct Kinds(Vec<ModelKind>);

fn parse_stats(s: &str) -> Result<Stats, String> {
    Statistic::parse_list(s).map(Stats).map_err(|e| e.to_string())
}

fn parse_kinds(s: &str) -> Result<Kinds, String> {
    if s == "all" {
        return Ok(Kinds(ModelKind::ALL.to_vec()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<ModelKind>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()
        .map(Kinds)
}

fn parse_split(s: &str) -> Result<SplitMode, String> {
    match s {
        "random" | "random_window" => Ok(SplitMode::RandomWindow),
        "blocked" | "blocked_time" => Ok(SplitMode::BlockedTime),
        _ => Err(format!("unknown split {s:?} (expected random or blocked)")),
    }
}

fn parse_fit(s: &str) -> Result<FitPolicy, String> {
    match s {
        "train" => Ok(FitPolicy::Train),
        "all" => Ok(FitPolicy::All),
        _ => Err(format!("unknown fit policy {s:?} (expected train or all)")),
    }
}

impl DataArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(v) = &self.input {
            c.input = v.clone();
        }
        if let Some(v) = &self.label_column {
            c.label_column = v.clone();
        }
        if let Some(v) = &self.exclude {
            c.exclude_columns = v.clone();
        }
        if let Some(v) = &self.keep {
            c.keep_labels = v.clone();
        }
    }
}

impl FeatureArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(v) = &self.features {
            c.features = v.clone();
        }
        if let Some(v) = self.window {
            c.window = v;
        }
        if let Some(v) = self.stride {
            c.stride = v;
        }
        if let Some(Stats(v)) = &self.stats {
            c.stats = v.clone();
        }
    }
}

impl EvalArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(Kinds(v)) = &self.kind {
            c.models = v.clone();
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.folds {
            c.folds = v;
        }
        if let Some(v) = self.stratified {
            c.stratified = v;
        }
        if let Some(v) = self.split {
            c.split = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.fit_normalizer_on {
            c.fit_normalizer_on = v;
        }
    }
}

impl RunArgs {
    fn apply(&self, c: &mut RunConfig) {
        self.data.apply(c);
        self.features.apply(c);
        self.eval.apply(c);
        if let Some(v) = &self.report {
            c.report = Some(v.clone());
        }
        if let Some(v) = &self.table {
            c.table = Some(v.clone());
        }
        if let Some(v) = &self.model_dir {
            c.model_dir = Some(v.clone());
        }
    }
}

/// Written by `prepare` next to the matrix CSV.
#[derive(Serialize)]
struct PrepareSidecar<'a> {
    config: &'a RunConfig,
    selection: &'a FeatureSelectionReport,
    data: &'a WindowSummary,
}

#[derive(Serialize, Deserialize)]
struct EvaluationReport {
    config: RunConfig,
    results: Vec<CvReport>,
    comparison: Option<Comparison>,
}

/// The part of any saved report that `compare` needs.
#[derive(Deserialize)]
struct ResultsOnly {
    results: Vec<CvReport>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Internal => 3,
            })
        }
    }
}

fn base_config(cli: &Cli, preset: Option<RunConfig>) -> Result<RunConfig, Error> {
    let base = preset.unwrap_or_default();
    let Some(path) = &cli.config else { return Ok(base) };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    // file keys are laid over the base, so only the keys present change
    let mut merged = serde_json::to_value(&base)?;
    let overrides: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let serde_json::Value::Object(map) = overrides else {
        return Err(Error::Config(format!("{}: expected a JSON object", path.display())));
    };
    for (k, v) in map {
        merged[k] = v;
    }
    serde_json::from_value(merged).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Decode(a) => decode(cli, a),
        Command::Ingest(a) => {
            let mut c = base_config(cli, None)?;
            a.data.apply(&mut c);
            ingest_cmd(cli, &c, a.out.as_deref(), a.summary)
        }
        Command::Prepare(a) => {
            let mut c = base_config(cli, None)?;
            a.data.apply(&mut c);
            a.features.apply(&mut c);
            prepare(cli, &c, &a.out)
        }
        Command::Train(a) => train(cli, a),
        Command::Evaluate(a) => {
            let mut c = base_config(cli, None)?;
            if let Some(v) = &a.input {
                c.input = v.clone();
            }
            if let Some(v) = &a.label_column {
                c.label_column = v.clone();
            }
            a.eval.apply(&mut c);
            if let Some(v) = &a.report {
                c.report = Some(v.clone());
            }
            if let Some(v) = &a.table {
                c.table = Some(v.clone());
            }
            evaluate(cli, &c)
        }
        Command::Compare(a) => compare(cli, a),
        Command::Run(a) => {
            let mut c = base_config(cli, None)?;
            a.apply(&mut c);
            run(cli, &c)
        }
        Command::Repro(a) => {
            let preset_input = a.run.data.input.clone().unwrap_or_default();
            let mut c = base_config(cli, Some(RunConfig::preset(a.preset, preset_input)))?;
            a.run.apply(&mut c);
            run(cli, &c)
        }
    }
}

fn emit_json<T: Serialize>(value: &T) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn decode(cli: &Cli, a: &DecodeArgs) -> Result<(), Error> {
    let registry = match &a.registry {
        Some(p) => PidRegistry::from_reader(File::open(p).map_err(|e| Error::io(p, e))?)?,
        None => PidRegistry::builtin(),
    };
    let service = parse_hex_u8(&a.service)?;
    let pid = parse_hex_u8(&a.pid)?;
    let payload = parse_hex_bytes(&a.bytes)?;
    let reading = registry.decode(service, pid, &payload)?;
    match cli.format {
        Format::Json => emit_json(&reading),
        Format::Text => {
            println!(
                "{:02X} {}: {}",
                reading.descriptor.pid, reading.descriptor.description, reading.value
            );
            Ok(())
        }
    }
}

fn ingest_cmd(cli: &Cli, c: &RunConfig, out: Option<&Path>, summary: bool) -> Result<(), Error> {
    if c.input.as_os_str().is_empty() {
        return Err(Error::Config("--input is required".into()));
    }
    let ds = pipeline::load_input(c)?;
    if let Some(path) = out {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        ds.write_csv(f, &c.label_column)?;
        if !summary {
            println!("{} rows -> {}", ds.len(), path.display());
            return Ok(());
        }
    }
    let dist = class_distribution(&ds);
    match cli.format {
        Format::Json => emit_json(&serde_json::json!({
            "input": c.input,
            "rows": ds.len(),
            "columns": ds.column_names(),
            "class_distribution": dist,
        })),
        Format::Text => {
            println!("{}: {} rows, {} channels", c.input.display(), ds.len(), ds.dimension());
            for (label, share) in &dist {
                println!("  {label:>6}  {:6.2}%", 100.0 * share);
            }
            Ok(())
        }
    }
}

fn prepare(cli: &Cli, c: &RunConfig, out: &Path) -> Result<(), Error> {
    if c.input.as_os_str().is_empty() {
        return Err(Error::Config("--input is required".into()));
    }
    c.window_spec().validate()?;
    let ds = pipeline::load_input(c)?;
    let (selection, matrix, data) = pipeline::prepare(&ds, c)?;
    let f = File::create(out).map_err(|e| Error::io(out, e))?;
    matrix.write_csv(f, &c.label_column).map_err(driverid::IngestError::from)?;
    let sidecar = PrepareSidecar { config: c, selection: &selection, data: &data };
    write_json(&out.with_extension("json"), &sidecar)?;
    match cli.format {
        Format::Json => emit_json(&sidecar),
        Format::Text => {
            println!("kept {} features: {}", selection.kept.len(), selection.kept.join(", "));
            println!(
                "{} windows ({} dropped for mixed labels), {} columns -> {}",
                data.windows,
                data.dropped_mixed_label,
                data.features.len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn read_matrix(path: &Path, label_column: &str) -> Result<FeatureMatrix, Error> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(FeatureMatrix::read_csv(BufReader::new(f), label_column)?)
}

fn train(cli: &Cli, a: &TrainArgs) -> Result<(), Error> {
    let mut c = base_config(cli, None)?;
    if let Some(k) = a.k {
        c.k = k;
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if c.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let m = read_matrix(&a.input, &a.label_column)?;
    let spec: ModelSpec = c.model_spec(a.kind);
    let bundle = ModelBundle::fit(&spec, &m)?;
    write_json(&a.out, &bundle)?;
    match cli.format {
        Format::Json => emit_json(&serde_json::json!({
            "model": spec.label(),
            "classes": bundle.model.classes,
            "n_features": bundle.model.n_features,
            "out": a.out,
        })),
        Format::Text => {
            println!("trained {} on {} rows -> {}", spec.label(), m.n_rows(), a.out.display());
            Ok(())
        }
    }
}

fn evaluate(cli: &Cli, c: &RunConfig) -> Result<(), Error> {
    if c.input.as_os_str().is_empty() {
        return Err(Error::Config("--input is required".into()));
    }
    if c.models.is_empty() || c.k == 0 {
        return Err(Error::Config("need at least one model and k >= 1".into()));
    }
    let m = read_matrix(&c.input, &c.label_column)?;
    let results = pipeline::evaluate(&m, c)?;
    let comparison = compare_to_zeror(&results);
    let report = EvaluationReport { config: c.clone(), results, comparison };
    if let Some(path) = &c.report {
        write_json(path, &report)?;
    }
    if let Some(path) = &c.table {
        pipeline::write_table(path, &report.results)?;
    }
    match cli.format {
        Format::Json => emit_json(&report),
        Format::Text => {
            print_results(&report.results, report.comparison.as_ref());
            Ok(())
        }
    }
}

fn compare(cli: &Cli, a: &CompareArgs) -> Result<(), Error> {
    let mut entries = Vec::new();
    for p in &a.reports {
        let r: ResultsOnly = read_json(p)?;
        entries.extend(r.results.iter().map(|r| (r.model.clone(), r.accuracy())));
    }
    let cmp = compare_accuracies(&entries, &a.baseline)?;
    match cli.format {
        Format::Json => emit_json(&cmp),
        Format::Text => {
            print_comparison(&cmp);
            Ok(())
        }
    }
}

fn run(cli: &Cli, c: &RunConfig) -> Result<(), Error> {
    let report: RunReport = pipeline::run_pipeline(c)?;
    match cli.format {
        Format::Json => emit_json(&report),
        Format::Text => {
            let d = &report.data;
            println!(
                "{} rows -> {} windows over {} features ({} dropped for mixed labels)",
                d.raw_rows,
                d.windows,
                report.selection.kept.len(),
                d.dropped_mixed_label
            );
            print_results(&report.results, report.comparison.as_ref());
            Ok(())
        }
    }
}

fn print_results(results: &[CvReport], comparison: Option<&Comparison>) {
    println!("{:<12} {:>9} {:>10} {:>9} {:>9}", "model", "accuracy", "precision", "recall", "f1");
    for r in results {
        let a = &r.metrics.averaged;
        println!(
            "{:<12} {:>8.2}% {:>9.2}% {:>8.2}% {:>8.2}%",
            r.model,
            r.accuracy(),
            a.precision.value,
            a.recall.value,
            a.f1.value
        );
    }
    if let Some(cmp) = comparison {
        println!();
        print_comparison(cmp);
    }
}

fn print_comparison(cmp: &Comparison) {
    println!("baseline {} at {:.2}%", cmp.baseline, cmp.baseline_accuracy);
    for row in &cmp.rows {
        let mark = if row.model == cmp.baseline {
            " "
        } else if row.better_than_baseline {
            "+"
        } else {
            "!"
        };
        println!("{mark} {:<12} {:>8.2}% {:>+8.2}", row.model, row.accuracy, row.delta);
    }
    if !cmp.not_better.is_empty() {
        println!("not better than baseline: {}", cmp.not_better.join(", "));
    }
}
