use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use quadcode::corpus::fixtures::{aligned_fixture, separable_splits, FixtureLang};
use quadcode::corpus::{self, class_histogram, stratified_split, transfer_labels, CorpusError, SentenceRecord};
use quadcode::models::check::check_gradients;
use quadcode::models::{self, load_checkpoint, predict, save_checkpoint, ModelError, ModelKind};
use quadcode::ontology::{OntologyError, QuadClass, QuadClassMap};
use quadcode::softlabel::{Coder, PatternDictionary, SoftLabelError};
use quadcode::train::experiment::fixture_suite;
use quadcode::train::{self, evaluate, fit, history_to_jsonl, run_experiment, ExperimentSpec, Settings, SettingsError, TrainError};
use quadcode::{digest, par};

/// Event-category classification toolkit.
///
/// Worker threads default to all cores; set QUADCODE_THREADS to cap them.
/// Results do not depend on the thread count.
#[derive(Parser)]
#[command(name = "quadcode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label a sentence corpus with a verb-phrase dictionary.
    Softlabel(SoftlabelArgs),
    /// Copy labels across a sentence alignment.
    Transfer(TransferArgs),
    /// Stratified train/dev/test split.
    Split(SplitArgs),
    /// Train a word or character model.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a labelled corpus.
    Eval(EvalArgs),
    /// Annotate records with predicted class and probabilities.
    Predict(PredictArgs),
    /// Compare analytic and numeric gradients on a tiny model.
    Gradcheck(GradcheckArgs),
    /// Write the synthetic fixture corpora.
    Fixture(FixtureArgs),
    /// Train and evaluate a suite of (model, corpus) pairs.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SoftlabelArgs {
    /// Dictionary file of `phrase -> CAMEO` lines.
    #[arg(long)]
    dict: PathBuf,
    /// QuadClass map file; the built-in map when omitted.
    #[arg(long)]
    quadmap: Option<PathBuf>,
    /// Input sentence JSONL.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output JSONL of labelled sentences.
    #[arg(long)]
    out: PathBuf,
    /// Optional actor list, one per line; sentences without an actor stay
    /// unlabelled.
    #[arg(long)]
    actors: Option<PathBuf>,
}

#[derive(Args)]
struct TransferArgs {
    /// Labelled source-language JSONL.
    #[arg(long)]
    src: PathBuf,
    /// Target-language JSONL.
    #[arg(long)]
    tgt: PathBuf,
    /// Alignment JSONL of {"src_id", "tgt_id"} pairs.
    #[arg(long)]
    align: PathBuf,
    /// Output JSONL of labelled target sentences.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    /// Labelled JSONL.
    #[arg(long = "in")]
    input: PathBuf,
    /// Train,dev,test fractions.
    #[arg(long, default_value = "0.8,0.1,0.1")]
    fractions: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Receives train.jsonl, dev.jsonl and test.jsonl.
    #[arg(long)]
    outdir: PathBuf,
}

#[derive(Args, Clone)]
struct SettingsArgs {
    /// Flat `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the small fixture-scale sizes instead of the full ones.
    #[arg(long)]
    fixture_scale: bool,
    /// Override one setting, e.g. `--set epochs=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: PathBuf,
    #[arg(long)]
    out_checkpoint: PathBuf,
    /// QuadClass map whose digest is recorded in the checkpoint.
    #[arg(long)]
    quadmap: Option<PathBuf>,
    #[command(flatten)]
    settings: SettingsArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Text report; a JSON twin is written alongside with `.json` appended.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scale convolution weight gradients by 1.5 (negative control).
    #[arg(long, hide = true)]
    corrupt_backward: bool,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    outdir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    train_per_class: usize,
    #[arg(long, default_value_t = 50)]
    dev_per_class: usize,
    #[arg(long, default_value_t = 100)]
    test_per_class: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Suite file: `model | condition | train | dev | test` per line.
    #[arg(long, conflicts_with = "fixture")]
    suite: Option<PathBuf>,
    /// Run the built-in fixture suite instead of a suite file.
    #[arg(long)]
    fixture: bool,
    /// Text report; a JSON twin is written alongside with `.json` appended.
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    settings: SettingsArgs,
}

/// Exit code 2 for bad input, 1 for internal failures.
#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<OntologyError> for CliError {
    fn from(e: OntologyError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SoftLabelError> for CliError {
    fn from(e: SoftLabelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SettingsError> for CliError {
    fn from(e: SettingsError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Nn(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Model(m) => m.into(),
            TrainError::NonFiniteLoss(_) | TrainError::Nn(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Provenance record written next to every output.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: BTreeMap<String, String>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    seed: Option<u64>,
    version: &'static str,
    threads: Option<usize>,
    started_unix: u64,
    finished_unix: u64,
}

struct Manifest {
    inner: RunManifest,
}

impl Manifest {
    fn new(command: &str) -> Self {
        Manifest {
            inner: RunManifest {
                command: command.to_string(),
                config: BTreeMap::new(),
                inputs: BTreeMap::new(),
                outputs: Vec::new(),
                seed: None,
                version: env!("CARGO_PKG_VERSION"),
                threads: par::threads_from_env(),
                started_unix: unix_now(),
                finished_unix: 0,
            },
        }
    }

    fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inner.config.insert(key.to_string(), value.to_string());
        self
    }

    fn settings(&mut self, s: &Settings) -> &mut Self {
        for (k, v) in s.entries() {
            self.config(k, v);
        }
        self
    }

    fn input(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        let d = digest::file_sha256_hex(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.inner.inputs.insert(path.display().to_string(), d);
        Ok(self)
    }

    fn output(&mut self, path: &Path) -> &mut Self {
        self.inner.outputs.push(path.display().to_string());
        self
    }

    /// Writes `<stem>.manifest.json`, or `manifest.json` inside a directory.
    fn write(&mut self, anchor: &Path) -> Result<(), CliError> {
        self.inner.finished_unix = unix_now();
        let path = if anchor.is_dir() {
            anchor.join("manifest.json")
        } else {
            let mut p = anchor.as_os_str().to_owned();
            p.push(".manifest.json");
            PathBuf::from(p)
        };
        let json = serde_json::to_string_pretty(&self.inner).expect("plain data") + "\n";
        write_file(&path, json)
    }
}

fn load_map(path: Option<&Path>) -> Result<QuadClassMap, CliError> {
    Ok(match path {
        Some(p) => QuadClassMap::load(p)?,
        None => QuadClassMap::default(),
    })
}

fn resolve_settings(args: &SettingsArgs) -> Result<Settings, CliError> {
    let mut s = if args.fixture_scale { Settings::fixture() } else { Settings::default() };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        s.apply_text(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    for o in &args.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("--set expects KEY=VALUE, got {o:?}")))?;
        s.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = args.seed {
        s.train.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        s.train.epochs = epochs;
    }
    Ok(s)
}

fn cmd_softlabel(a: &SoftlabelArgs) -> Result<(), CliError> {
    let dict = PatternDictionary::load(&a.dict)?;
    let map = load_map(a.quadmap.as_deref())?;
    let mut coder = Coder::new(dict, map);
    let mut m = Manifest::new("softlabel");
    if let Some(path) = &a.actors {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        coder = coder.with_actor_gate(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
        m.input(path)?;
    }
    let hist = coder.code_corpus(&a.input, &a.out)?;
    println!("{hist}");
    m.input(&a.dict)?.input(&a.input)?.output(&a.out);
    if let Some(q) = &a.quadmap {
        m.input(q)?;
    }
    m.config("dict", a.dict.display()).config("in", a.input.display()).config("out", a.out.display());
    m.write(&a.out)
}

fn cmd_transfer(a: &TransferArgs) -> Result<(), CliError> {
    let src = corpus::read_jsonl(&a.src)?;
    let tgt = corpus::read_jsonl(&a.tgt)?;
    let pairs = corpus::read_alignments(&a.align)?;
    let (out, report) = transfer_labels(&src, &tgt, &pairs)?;
    corpus::write_jsonl(&out, &a.out)?;
    println!(
        "pairs {}  labelled {}  fan-out sources {}  conflicts {}  redundant {}  unaligned {}",
        report.pairs,
        report.labelled_targets,
        report.fanout_sources,
        report.conflicts,
        report.redundant,
        report.unaligned_targets
    );
    println!("{}", class_histogram(&out));
    let mut m = Manifest::new("transfer");
    m.input(&a.src)?.input(&a.tgt)?.input(&a.align)?.output(&a.out);
    m.write(&a.out)
}

fn parse_fractions(s: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("--fractions: cannot parse {s:?}")))?;
    parts
        .try_into()
        .map_err(|_| CliError::Input(format!("--fractions needs three values, got {s:?}")))
}

fn cmd_split(a: &SplitArgs) -> Result<(), CliError> {
    let fractions = parse_fractions(&a.fractions)?;
    let records = corpus::read_jsonl(&a.input)?;
    let split = stratified_split(&records, fractions, a.seed)?;
    create_dir(&a.outdir)?;
    let mut m = Manifest::new("split");
    m.input(&a.input)?.config("fractions", &a.fractions).config("seed", a.seed);
    m.inner.seed = Some(a.seed);
    for (name, part) in [("train", &split.train), ("dev", &split.dev), ("test", &split.test)] {
        let path = a.outdir.join(format!("{name}.jsonl"));
        corpus::write_jsonl(part, &path)?;
        m.output(&path);
        let h = class_histogram(part);
        println!("{name:<6}{:>7}  {:?}", part.len(), h.counts);
    }
    m.write(&a.outdir)
}

fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let settings = resolve_settings(&a.settings)?;
    let train_records = corpus::read_jsonl(&a.train)?;
    let dev_records = corpus::read_jsonl(&a.dev)?;
    let map = load_map(a.quadmap.as_deref())?;
    let fitted = fit(a.model, &settings, &train_records, &dev_records, Some(map.digest()))?;
    save_checkpoint(&fitted.checkpoint, &a.out_checkpoint)?;
    let mut history_path = a.out_checkpoint.as_os_str().to_owned();
    history_path.push(".history.jsonl");
    let history_path = PathBuf::from(history_path);
    write_file(&history_path, history_to_jsonl(&fitted.history))?;
    for r in &fitted.history {
        println!("epoch {:>3}  train_loss {:.6}  dev_accuracy {:.4}", r.epoch, r.train_loss, r.dev_accuracy);
    }
    let meta = &fitted.checkpoint.metadata;
    println!("best epoch {} of {}, {} steps", meta.best_epoch, meta.epochs_run, meta.steps);

    let mut m = Manifest::new("train");
    m.input(&a.train)?.input(&a.dev)?;
    if let Some(q) = &a.quadmap {
        m.input(q)?;
    }
    if let Some(c) = &a.settings.config {
        m.input(c)?;
    }
    m.config("model", a.model).settings(&settings).output(&a.out_checkpoint).output(&history_path);
    m.inner.seed = Some(settings.train.seed);
    m.write(&a.out_checkpoint)
}

#[derive(Serialize)]
struct EvalReport<'a> {
    checkpoint: String,
    test: String,
    model: ModelKind,
    metrics: &'a train::Metrics,
}

fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let ck = load_checkpoint(&a.checkpoint)?;
    let encoder = ck
        .encoder
        .as_ref()
        .ok_or_else(|| CliError::Input(format!("{}: checkpoint has no encoder", a.checkpoint.display())))?;
    let records = corpus::read_jsonl(&a.test)?;
    let data = encoder.encode_records(&records);
    let metrics = evaluate(&ck.model, &data)?;
    let text = format!(
        "model {}\ncheckpoint {}\ntest {}\n\n{}",
        ck.model.kind(),
        a.checkpoint.display(),
        a.test.display(),
        metrics.to_text()
    );
    print!("{text}");
    write_file(&a.report, &text)?;
    let json_path = sibling(&a.report, ".json");
    let report = EvalReport {
        checkpoint: a.checkpoint.display().to_string(),
        test: a.test.display().to_string(),
        model: ck.model.kind(),
        metrics: &metrics,
    };
    write_file(&json_path, serde_json::to_string_pretty(&report).expect("plain data") + "\n")?;
    let mut m = Manifest::new("eval");
    m.input(&a.checkpoint)?.input(&a.test)?.output(&a.report).output(&json_path);
    m.write(&a.report)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(suffix);
    PathBuf::from(p)
}

fn cmd_predict(a: &PredictArgs) -> Result<(), CliError> {
    let ck = load_checkpoint(&a.checkpoint)?;
    let encoder = ck
        .encoder
        .as_ref()
        .ok_or_else(|| CliError::Input(format!("{}: checkpoint has no encoder", a.checkpoint.display())))?;
    let records = corpus::read_jsonl(&a.input)?;
    let preds = par::map(&records, |r| predict(&ck.model, &encoder.encode(&r.text)));
    let mut out = String::new();
    for (r, p) in records.iter().zip(preds) {
        let p = p.map_err(|e| CliError::Internal(e.to_string()))?;
        let mut v = serde_json::to_value(r).expect("plain record");
        let class = QuadClass::from_index(p.class).expect("class index below 4");
        v["predicted"] = serde_json::to_value(class).expect("enum");
        v["probs"] = serde_json::to_value(p.probs).expect("floats");
        out.push_str(&serde_json::to_string(&v).expect("json value"));
        out.push('\n');
    }
    write_file(&a.out, out)?;
    println!("{} records", records.len());
    let mut m = Manifest::new("predict");
    m.input(&a.checkpoint)?.input(&a.input)?.output(&a.out);
    m.write(&a.out)
}

/// Relative error at or above this fails the check.
const GRADCHECK_TOLERANCE: f64 = 1e-4;

fn cmd_gradcheck(a: &GradcheckArgs) -> Result<(), CliError> {
    let report = check_gradients(a.model, a.seed, a.corrupt_backward)?;
    let (name, idx) = report.worst.clone().unwrap_or_default();
    println!(
        "model {}  seed {}  checked {}  max relative error {:.3e}  (worst {name}[{idx}])",
        a.model, a.seed, report.checked, report.max_rel_error
    );
    if report.max_rel_error < GRADCHECK_TOLERANCE {
        Ok(())
    } else {
        Err(CliError::Internal(format!(
            "max relative error {:.3e} is not below {GRADCHECK_TOLERANCE:e}",
            report.max_rel_error
        )))
    }
}

/// Dictionary covering the English fixture keywords.
fn fixture_dictionary() -> String {
    let mut out = String::from("# English fixture verbs\n");
    for class in QuadClass::ALL {
        let code = corpus::fixtures::fixture_cameo(class);
        for kw in FixtureLang::English.keywords()[class.index()] {
            out.push_str(&format!("{kw} -> {code}\n"));
        }
    }
    out
}

fn cmd_fixture(a: &FixtureArgs) -> Result<(), CliError> {
    create_dir(&a.outdir)?;
    let mut m = Manifest::new("fixture");
    m.config("seed", a.seed)
        .config("train_per_class", a.train_per_class)
        .config("dev_per_class", a.dev_per_class)
        .config("test_per_class", a.test_per_class);
    m.inner.seed = Some(a.seed);
    for lang in [FixtureLang::English, FixtureLang::Arabic] {
        let parts = separable_splits(lang, a.train_per_class, a.dev_per_class, a.test_per_class, a.seed);
        for (name, part) in ["train", "dev", "test"].iter().zip(&parts) {
            let path = a.outdir.join(format!("{}_{name}.jsonl", lang.code()));
            corpus::write_jsonl(part, &path)?;
            m.output(&path);
        }
    }
    let (src, tgt, pairs) = aligned_fixture(4 * a.dev_per_class, a.seed);
    let unlabelled: Vec<SentenceRecord> = src.iter().map(|r| SentenceRecord::new(&r.id, &r.lang, &r.text)).collect();
    for (name, recs) in [("aligned_en.jsonl", &src), ("aligned_ar.jsonl", &tgt), ("raw_en.jsonl", &unlabelled)] {
        let path = a.outdir.join(name);
        corpus::write_jsonl(recs, &path)?;
        m.output(&path);
    }
    let align = a.outdir.join("alignment.jsonl");
    corpus::write_alignments(&pairs, &align)?;
    let dict = a.outdir.join("dictionary.txt");
    write_file(&dict, fixture_dictionary())?;
    m.output(&align).output(&dict);
    println!("fixtures written to {}", a.outdir.display());
    m.write(&a.outdir)
}

fn read_suite(path: &Path) -> Result<(Vec<ExperimentSpec>, Vec<PathBuf>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut specs = Vec::new();
    let mut inputs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        let [model, condition, tr, dev, test] = fields[..] else {
            return Err(CliError::Input(format!(
                "{}:{}: expected `model | condition | train | dev | test`",
                path.display(),
                i + 1
            )));
        };
        let model: ModelKind = model
            .parse()
            .map_err(|e: models::ConfigError| CliError::Input(format!("{}:{}: {e}", path.display(), i + 1)))?;
        let mut load = |p: &str| {
            let p = base.join(p);
            let r = corpus::read_jsonl(&p);
            inputs.push(p);
            r
        };
        specs.push(ExperimentSpec {
            model,
            condition: condition.to_string(),
            train: load(tr)?,
            dev: load(dev)?,
            test: load(test)?,
        });
    }
    Ok((specs, inputs))
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<(), CliError> {
    let settings = resolve_settings(&a.settings)?;
    let mut m = Manifest::new("experiment");
    let specs = match (&a.suite, a.fixture) {
        (Some(path), _) => {
            let (specs, inputs) = read_suite(path)?;
            m.input(path)?;
            for p in inputs {
                m.input(&p)?;
            }
            specs
        }
        (None, true) => {
            m.config("suite", "fixture");
            fixture_suite(500, 50, 100, settings.train.seed)
        }
        (None, false) => return Err(CliError::Input("give --suite FILE or --fixture".into())),
    };
    let report = run_experiment(&specs, &settings)?;
    let text = report.to_text();
    print!("{text}");
    write_file(&a.report, &text)?;
    let json_path = sibling(&a.report, ".json");
    write_file(&json_path, report.to_json())?;
    m.settings(&settings).output(&a.report).output(&json_path);
    m.inner.seed = Some(settings.train.seed);
    m.write(&a.report)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Softlabel(a) => cmd_softlabel(a),
        Command::Transfer(a) => cmd_transfer(a),
        Command::Split(a) => cmd_split(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Fixture(a) => cmd_fixture(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match par::install(par::threads_from_env(), || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
