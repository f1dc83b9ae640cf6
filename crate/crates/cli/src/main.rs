mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use subjaug::augment::{generate_paraphrases, ParaphraseRecord, Stage};
use subjaug::baseline::{fit, ClassifierHandle, LinearModel};
use subjaug::corpus::{class_distribution, parse_tsv, LabeledSentence};
use subjaug::correct::correct_dataset;
use subjaug::dataset::{build_dataset, write_dataset};
use subjaug::eval::{evaluate, EvalReport, DEFAULT_CONSISTENCY_TOL};
use subjaug::gateway::{Gateway, MockFallback, MockResponder};
use subjaug::pipeline::{parse_records_jsonl, run_pipeline, stamp_manifest, write_records_jsonl, StageGateways};
use subjaug::predictions::{align_to_gold, parse_predictions, write_predictions, PredictionRow};
use subjaug::tables::{audit, bundled_rows, parse_tables, render_audit};
use subjaug::template::sha256_hex;
use subjaug::trainer::{DelegateJob, DEFAULT_TRAINER_SEED};

use crate::config::RunConfig;

/// Exit status when `--threshold-macro-f1` is not met.
const THRESHOLD_EXIT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "subjaug", version, about = "Subjectivity data augmentation, correction and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the class distribution of a TSV split
    Stats(StatsArgs),
    /// Generate k opposite-class paraphrases per sentence (records JSONL)
    Augment(AugmentArgs),
    /// Run the self-correction pass over generated records
    Correct(CorrectArgs),
    /// Write an augmented training set: TSV, provenance JSONL and manifest
    Build(BuildArgs),
    /// Fit the hashed-feature logistic regression baseline
    Fit(FitArgs),
    /// Write predictions for a split with a local model or remote endpoint
    Predict(PredictArgs),
    /// Score predictions against a gold split
    Evaluate(EvaluateArgs),
    /// Check reported results tables for macro-F1 consistency
    AuditTables(AuditArgs),
    /// Hand a dataset to the external encoder trainer and re-score its output
    Delegate(DelegateArgs),
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// TOML run configuration; flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SplitArgs {
    /// Labeled TSV split (sentence_id, sentence, label)
    #[arg(long, value_name = "TSV")]
    split: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FallbackArg {
    /// ECHO[<request fingerprint>]
    Fingerprint,
    /// The sentence under rewrite, unchanged
    EchoSentence,
}

#[derive(Args, Debug)]
struct GatewayArgs {
    /// Answer chat requests with the offline deterministic mock
    #[arg(long)]
    mock: bool,
    /// Mock reply when no rule matches
    #[arg(long, value_enum, value_name = "MODE")]
    mock_fallback: Option<FallbackArg>,
    /// Maximum concurrent requests
    #[arg(long, value_name = "N")]
    max_in_flight: Option<usize>,
    /// Chat-completion API base URL
    #[arg(long, value_name = "URL")]
    base_url: Option<String>,
    /// Environment variable holding the API key
    #[arg(long, value_name = "NAME")]
    api_key_env: Option<String>,
}

#[derive(Args, Debug)]
struct KArgs {
    /// Paraphrases per source sentence
    #[arg(long, value_name = "K")]
    k: Option<usize>,
    /// Accept k outside {2, 6}
    #[arg(long)]
    allow_any_k: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Directory for written artifacts
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Also write the resolved config and input hashes next to the outputs
    #[arg(long)]
    manifest: bool,
}

#[derive(Args, Debug)]
struct ClassifierArgs {
    /// Fitted baseline model (JSON)
    #[arg(long, value_name = "FILE", conflicts_with = "endpoint")]
    model: Option<PathBuf>,
    /// Remote inference service base URL (/predict, /health)
    #[arg(long, value_name = "URL")]
    endpoint: Option<String>,
    /// Maximum concurrent requests to the endpoint
    #[arg(long, value_name = "N")]
    max_in_flight: Option<usize>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Print JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct AugmentArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    k: KArgs,
    #[command(flatten)]
    gateway: GatewayArgs,
    #[command(flatten)]
    out: OutputArgs,
    /// Records file (default: <out-dir>/generated.balanced<k>.jsonl)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorrectArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Generated records JSONL
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[command(flatten)]
    gateway: GatewayArgs,
    #[command(flatten)]
    out: OutputArgs,
    /// Corrected records file (default: <out-dir>/corrected.jsonl); stats go
    /// next to it as <stem>.stats.json
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Existing records JSONL; without it augmentation (and correction) run first
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    #[command(flatten)]
    k: KArgs,
    /// Build the corrected variant
    #[arg(long)]
    corrected: bool,
    #[command(flatten)]
    gateway: GatewayArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Recorded in the model file
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Gradient descent step size
    #[arg(long, value_name = "RATE")]
    learning_rate: Option<f64>,
    /// L2 penalty on the weights (bias unpenalized)
    #[arg(long, value_name = "LAMBDA")]
    l2_penalty: Option<f64>,
    /// Full-batch gradient steps
    #[arg(long, value_name = "N")]
    epochs: Option<usize>,
    /// Feature space size is 2^bits
    #[arg(long, value_name = "BITS")]
    dim_bits: Option<u32>,
    #[command(flatten)]
    out: OutputArgs,
    /// Model file (default: <out-dir>/model.json)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[command(flatten)]
    out: OutputArgs,
    /// Predictions TSV (default: <out-dir>/predictions.tsv)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Gold TSV split
    #[arg(long, value_name = "TSV")]
    split: Option<PathBuf>,
    /// Predictions TSV (sentence_id, pred_label, score)
    #[arg(long, value_name = "FILE", conflicts_with_all = ["model", "endpoint"])]
    predictions: Option<PathBuf>,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// Exit with status 2 when macro-F1 is below this value
    #[arg(long, value_name = "F1")]
    threshold_macro_f1: Option<f64>,
    /// Print JSON instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Allowed gap between reported macro-F1 and the mean of class F1s
    #[arg(long, value_name = "TOL", default_value_t = DEFAULT_CONSISTENCY_TOL)]
    tol: f64,
    /// Table rows in TOML instead of the bundled ones
    #[arg(long, value_name = "FILE")]
    fixture: Option<PathBuf>,
    /// Print JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct DelegateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Encoder checkpoint name (case-insensitive), e.g. RoBERTa-base
    #[arg(long, value_name = "NAME")]
    model_name: String,
    /// original, balanced2, balanced6, balanced2_corrected or balanced6_corrected
    #[arg(long, value_name = "VARIANT", default_value = "original")]
    dataset_variant: String,
    /// Training TSV
    #[arg(long, value_name = "TSV")]
    split: Option<PathBuf>,
    /// Dev TSV, also used to re-score the trainer's predictions
    #[arg(long, value_name = "TSV")]
    dev: Option<PathBuf>,
    /// Trainer seed (default 42)
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Trainer program and leading arguments
    #[arg(long, value_name = "CMD", default_value = "python3 -m encoder_trainer")]
    trainer_cmd: String,
    /// Print the trainer command without running it
    #[arg(long)]
    dry_run: bool,
    #[command(flatten)]
    out: OutputArgs,
    /// Exit with status 2 when the re-scored macro-F1 is below this value
    #[arg(long, value_name = "F1")]
    threshold_macro_f1: Option<f64>,
}

impl GatewayArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.gateway.mock |= self.mock;
        if let Some(f) = self.mock_fallback {
            cfg.gateway.mock_fallback = Some(match f {
                FallbackArg::Fingerprint => MockFallback::Fingerprint,
                FallbackArg::EchoSentence => MockFallback::EchoSentence,
            });
        }
        if let Some(n) = self.max_in_flight {
            cfg.gateway.max_in_flight = n;
        }
        if let Some(url) = &self.base_url {
            cfg.gateway.base_url = url.clone();
        }
        if let Some(name) = &self.api_key_env {
            cfg.gateway.api_key_env = name.clone();
        }
    }
}

impl KArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(k) = self.k {
            cfg.augment.k = k;
        }
        cfg.augment.allow_any_k |= self.allow_any_k;
    }
}

impl OutputArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(dir) = &self.out_dir {
            cfg.output.out_dir = dir.clone();
        }
        cfg.output.manifest |= self.manifest;
    }
}

impl SplitArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.split {
            cfg.data.split = Some(p.clone());
        }
    }
}

impl ClassifierArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = &self.model {
            cfg.classifier.model = Some(m.clone());
            cfg.classifier.endpoint = None;
        }
        if let Some(e) = &self.endpoint {
            cfg.classifier.endpoint = Some(e.clone());
            cfg.classifier.model = None;
        }
        if let Some(n) = self.max_in_flight {
            cfg.gateway.max_in_flight = n;
        }
    }
}

fn load(config: &ConfigArgs) -> Result<RunConfig> {
    RunConfig::load(config.config.as_deref())
}

fn split_path(cfg: &RunConfig) -> Result<&Path> {
    cfg.data.split.as_deref().ok_or_else(|| anyhow!("no split given (--split or [data] split)"))
}

fn read_split(path: &Path) -> Result<Vec<LabeledSentence>> {
    let raw = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_tsv(&raw).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn file_sha256(path: &Path) -> Result<String> {
    let raw = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&String::from_utf8_lossy(&raw)))
}

/// `<out-dir>/run.<subcommand>.json`: resolved config plus input hashes.
fn write_run_manifest(cfg: &RunConfig, subcommand: &str, inputs: &[&Path], outputs: &[PathBuf]) -> Result<PathBuf> {
    let inputs = inputs
        .iter()
        .map(|p| Ok(json!({ "path": p.display().to_string(), "sha256": file_sha256(p)? })))
        .collect::<Result<Vec<_>>>()?;
    let doc = json!({
        "subcommand": subcommand,
        "config": cfg,
        "inputs": inputs,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    let path = cfg.output.out_dir.join(format!("run.{subcommand}.json"));
    write_file(&path, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(path)
}

#[derive(Clone, Copy)]
enum GatewayRole {
    Generation,
    Correction,
}

fn make_gateway(cfg: &RunConfig, role: GatewayRole) -> Result<Gateway> {
    if cfg.gateway.mock {
        let fallback = cfg.gateway.mock_fallback.unwrap_or(match role {
            GatewayRole::Generation => MockFallback::Fingerprint,
            GatewayRole::Correction => MockFallback::EchoSentence,
        });
        Ok(Gateway::mock(cfg.gateway_config(), MockResponder::new(fallback))?)
    } else {
        Ok(Gateway::live(cfg.gateway_config())?)
    }
}

async fn classifier(cfg: &RunConfig) -> Result<ClassifierHandle> {
    if let Some(endpoint) = &cfg.classifier.endpoint {
        return Ok(ClassifierHandle::remote(endpoint, cfg.gateway.max_in_flight).await?);
    }
    let path = cfg
        .classifier
        .model
        .as_deref()
        .ok_or_else(|| anyhow!("no classifier given (--model or --endpoint)"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ClassifierHandle::Local(LinearModel::from_json(&text)?))
}

async fn predict_rows(handle: &ClassifierHandle, rows: &[LabeledSentence]) -> Result<Vec<PredictionRow>> {
    let texts: Vec<String> = rows.iter().map(|r| r.text.clone()).collect();
    let preds = handle.predict(&texts).await?;
    Ok(rows
        .iter()
        .zip(preds)
        .map(|(row, p)| PredictionRow {
            sentence_id: row.sentence_id.clone(),
            label: p.label,
            score: p.score,
        })
        .collect())
}

fn print_report(report: &EvalReport, as_json: bool) -> Result<()> {
    if as_json {
        println!("{}", serde_json::to_string_pretty(report)?);
    } else {
        print!("{}", report.to_table());
    }
    Ok(())
}

fn threshold_status(report: &EvalReport, threshold: Option<f64>) -> ExitCode {
    match threshold {
        Some(t) if report.macro_f1 < t => {
            eprintln!("macro-F1 {:.4} is below the required {t}", report.macro_f1);
            ExitCode::from(THRESHOLD_EXIT)
        }
        _ => ExitCode::SUCCESS,
    }
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.config)?;
    args.split.apply(&mut cfg);
    let rows = read_split(split_path(&cfg)?)?;
    let stats = class_distribution(&rows);
    if args.json {
        println!("{}", serde_json::to_string(&stats)?);
    } else {
        println!("{stats}");
    }
    Ok(ExitCode::SUCCESS)
}

async fn cmd_augment(args: AugmentArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.config)?;
    args.split.apply(&mut cfg);
    args.k.apply(&mut cfg);
    args.gateway.apply(&mut cfg);
    args.out.apply(&mut cfg);
    cfg.validate()?;

    let split = split_path(&cfg)?.to_path_buf();
    let rows = read_split(&split)?;
    let gateway = make_gateway(&cfg, GatewayRole::Generation)?;
    let records = generate_paraphrases(&rows, cfg.augment.k, &gateway, &cfg.generation_settings()?).await?;

    let output = args
        .output
        .unwrap_or_else(|| cfg.output.out_dir.join(format!("generated.balanced{}.jsonl", cfg.augment.k)));
    write_file(&output, &write_records_jsonl(&records))?;
    if cfg.output.manifest {
        write_run_manifest(&cfg, "augment", &[&split], std::slice::from_ref(&output))?;
    }
    println!("generated {} records from {} sentences -> {}", records.len(), rows.len(), output.display());
    Ok(ExitCode::SUCCESS)
}

fn read_records(path: &Path) -> Result<Vec<ParaphraseRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_records_jsonl(&text).with_context(|| format!("parsing {}", path.display()))
}

async fn cmd_correct(args: CorrectArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.config)?;
    args.gateway.apply(&mut cfg);
    args.out.apply(&mut cfg);
    cfg.validate()?;

    let records = read_records(&args.input)?;
    let gateway = make_gateway(&cfg, GatewayRole::Correction)?;
    let run = correct_dataset(&records, &gateway, &cfg.correction_settings()).await?;

    let output = args.output.unwrap_or_else(|| cfg.output.out_dir.join("corrected.jsonl"));
    let stats_path = output.with_extension("stats.json");
    write_file(&output, &write_records_jsonl(&run.records))?;
    let stats_doc = json!({
        "stats": run.stats,
        "flagged": run.flagged.iter().map(|(id, v)| json!({ "synthetic_id": id, "violation": v })).collect::<Vec<_>>(),
        "failures": run.failures.iter().map(|f| json!({ "synthetic_id": f.synthetic_id, "error": f.error })).collect::<Vec<_>>(),
    });
    write_file(&stats_path, &(serde_json::to_string_pretty(&stats_doc)? + "\n"))?;
    if cfg.output.manifest {
        write_run_manifest(&cfg, "correct", &[&args.input], &[output.clone(), stats_path])?;
    }
    for failure in &run.failures {
        eprintln!("warning: {}: {}", failure.synthetic_id, failure.error);
    }
    let s = run.stats;
    println!(
        "corrected {} records: changed {}, flagged {}, failed {} -> {}",
        s.total,
        s.changed_count,
        s.flagged_count,
        s.failed_count,
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

async fn cmd_build(args: BuildArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.config)?;
    args.split.apply(&mut cfg);
    args.k.apply(&mut cfg);
    args.gateway.apply(&mut cfg);
    args.out.apply(&mut cfg);
    cfg.correct.corrected |= args.corrected;
    cfg.validate()?;

    let split = split_path(&cfg)?.to_path_buf();
    let originals = read_split(&split)?;
    let (k, corrected) = (cfg.augment.k, cfg.correct.corrected);
    let generation = cfg.generation_settings()?;
    let gen_gateway = make_gateway(&cfg, GatewayRole::Generation)?;
    let corr_gateway = make_gateway(&cfg, GatewayRole::Correction)?;
    let gateways = StageGateways {
        generation: &gen_gateway,
        correction: &corr_gateway,
    };

    let mut inputs: Vec<&Path> = vec![&split];
    let dataset = match &args.input {
        Some(records_path) => {
            let records = read_records(records_path)?;
            let mut records_for_build = records;
            let mut run = None;
            if corrected && records_for_build.iter().all(|r| r.stage == Stage::Generated) {
                let r = correct_dataset(&records_for_build, &corr_gateway, &cfg.correction_settings()).await?;
                records_for_build = r.records.clone();
                run = Some(r);
            }
            let mut ds = build_dataset(&originals, &records_for_build, k, corrected)?;
            stamp_manifest(&mut ds, gateways, &generation, run.as_ref());
            inputs.push(records_path);
            ds
        }
        None => {
            run_pipeline(&originals, k, corrected, gateways, &generation, &cfg.correction_settings())
                .await?
                .dataset
        }
    };
    let files = write_dataset(&dataset, &cfg.output.out_dir)?;
    if cfg.output.manifest {
        write_run_manifest(
            &cfg,
            "build",
            &inputs,
            &[files.tsv.clone(), files.provenance.clone(), files.manifest.clone()],
        )?;
    }
    println!(
        "{}: {} rows ({}) -> {}",
        dataset.manifest.variant,
        dataset.rows.len(),
        dataset.manifest.class_counts,
        files.tsv.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.config)?;
    args.split.apply(&mut cfg);
    args.out.apply(&mut cfg);
    let c = &mut cfg.classifier;
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = args.learning_rate {
        c.learning_rate = v;
    }
    if let Some(v) = args.l2_penalty {
        c.l2_penalty = v;
    }
    if let Some(v) = args.epochs {
        c.epochs = v;
    }
    if let Some(v) = args.dim_bits {
        c.dim_bits = v;
    }
    cfg.validate()?;

    let split = split_path(&cfg)?.to_path_buf();
    let rows = read_split(&split)?;
    let report = fit(&rows, cfg.dim()?, cfg.hyperparams(), cfg.classifier.seed)?;
    let output = args.output.unwrap_or_else(|| cfg.output.out_dir.join("model.json"));
    write_file(&output, &report.model.to_json())?;
    if cfg.output.manifest {
        write_run_manifest(&cfg, "fit", &[&split], std::slice::from_ref(&output))?;
    }

    let texts: Vec<&str> = rows.iter().map(|r| r.text.as_str()).collect();
    let preds: Vec<_> = report.model.predict(&texts).into_iter().map(|p| p.label).collect();
    let golds: Vec<_> = rows.iter().map(|r| r.label).collect();
    let train = evaluate(&preds, &golds)?;
    println!(
        "fitted {} rows over {} epochs: final loss {:.6}, train macro-F1 {:.4} -> {}",
        rows.len(),
        cfg.classifier.epochs,
        report.loss_history.last().copied().unwrap_or(f64::NAN),
        train.macro_f1,
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

async fn cmd_predict(args: PredictArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.config)?;
    args.split.apply(&mut cfg);
    args.classifier.apply(&mut cfg);
    args.out.apply(&mut cfg);

    let split = split_path(&cfg)?.to_path_buf();
    let rows = read_split(&split)?;
    let handle = classifier(&cfg).await?;
    let preds = predict_rows(&handle, &rows).await?;
    let output = args.output.unwrap_or_else(|| cfg.output.out_dir.join("predictions.tsv"));
    write_file(&output, &write_predictions(&preds))?;
    if cfg.output.manifest {
        let mut inputs: Vec<&Path> = vec![&split];
        if let Some(m) = &cfg.classifier.model {
            inputs.push(m);
        }
        write_run_manifest(&cfg, "predict", &inputs, std::slice::from_ref(&output))?;
    }
    println!("wrote {} predictions -> {}", preds.len(), output.display());
    Ok(ExitCode::SUCCESS)
}

async fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.config)?;
    if let Some(p) = &args.split {
        cfg.data.split = Some(p.clone());
    }
    args.classifier.apply(&mut cfg);

    let gold = read_split(split_path(&cfg)?)?;
    let preds = match &args.predictions {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_predictions(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => predict_rows(&classifier(&cfg).await?, &gold).await?,
    };
    let (p, g) = align_to_gold(&preds, &gold)?;
    let report = evaluate(&p, &g)?;
    print_report(&report, args.json)?;
    Ok(threshold_status(&report, args.threshold_macro_f1))
}

fn cmd_audit(args: AuditArgs) -> Result<ExitCode> {
    let rows = match &args.fixture {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_tables(&text)?
        }
        None => bundled_rows(),
    };
    let entries = audit(&rows, args.tol);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&entries)?);
    } else {
        print!("{}", render_audit(&entries, args.tol));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_delegate(args: DelegateArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.config)?;
    if let Some(p) = &args.split {
        cfg.data.split = Some(p.clone());
    }
    if let Some(p) = &args.dev {
        cfg.data.dev = Some(p.clone());
    }
    args.out.apply(&mut cfg);
    let train = split_path(&cfg)?.to_path_buf();
    let dev = cfg.data.dev.clone().ok_or_else(|| anyhow!("no dev split given (--dev or [data] dev)"))?;
    let job = DelegateJob::new(
        &args.model_name,
        &args.dataset_variant,
        &train,
        &dev,
        &cfg.output.out_dir,
        args.seed.unwrap_or(DEFAULT_TRAINER_SEED),
    )?;

    let mut argv: Vec<String> = args.trainer_cmd.split_whitespace().map(String::from).collect();
    if argv.is_empty() {
        bail!("empty --trainer-cmd");
    }
    argv.extend(job.args());
    if args.dry_run {
        println!("{}", argv.join(" "));
        return Ok(ExitCode::SUCCESS);
    }
    if cfg.output.manifest {
        write_run_manifest(&cfg, "delegate", &[&train, &dev], &[job.predictions_path()])?;
    }
    let status = std::process::Command::new(&argv[0])
        .args(&argv[1..])
        .status()
        .with_context(|| format!("starting trainer {:?}", argv[0]))?;
    if !status.success() {
        bail!("trainer exited with {status}");
    }

    let predictions = job.predictions_path();
    let text = fs::read_to_string(&predictions)
        .with_context(|| format!("trainer wrote no predictions at {}", predictions.display()))?;
    let preds = parse_predictions(&text)?;
    let (p, g) = align_to_gold(&preds, &read_split(&dev)?)?;
    let report = evaluate(&p, &g)?;
    println!("{}", job.preset);
    print_report(&report, false)?;
    Ok(threshold_status(&report, args.threshold_macro_f1))
}

async fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Stats(a) => cmd_stats(a),
        Command::Augment(a) => cmd_augment(a).await,
        Command::Correct(a) => cmd_correct(a).await,
        Command::Build(a) => cmd_build(a).await,
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a).await,
        Command::Evaluate(a) => cmd_evaluate(a).await,
        Command::AuditTables(a) => cmd_audit(a),
        Command::Delegate(a) => cmd_delegate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let runtime = match tokio::runtime::Builder::new_current_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
