//! Command-line front end.
//!
//! Every command writes into one run directory (`--out`) and leaves a
//! `manifest.json` there. Exit codes: 0 success, 1 usage, 2 data, 3
//! divergence.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audit::{audit, RatedEvent};
use crate::backbone::{read_checkpoint, write_checkpoint};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricsReport, Truth, CSV_HEADER};
use crate::ingest::{self, IdMap};
use crate::split::{self, write_split, SplitConfig};
use crate::synth::{self, generate_trend_log, to_raw_records};
use crate::trainer::{train, Method, TrainReport};
use crate::types::{Backbone, Interaction, SplitDataset};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const REPORT_FILE: &str = "report.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const INTERACTIONS_FILE: &str = "interactions.tsv";
pub const ID_MAP_FILE: &str = "id_map.json";
pub const AUDIT_FILE: &str = "audit.csv";
pub const RATINGS_FILE: &str = "ratings.dat";

#[derive(Debug, Parser)]
#[command(name = "debias-rec", version, about = "Debiased recommender training and evaluation")]
pub struct Cli {
    /// Key-value config file, or a previous run's manifest.json.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a raw rating file, binarize and densify ids.
    Ingest(IngestArgs),
    /// Build an intervened train/validation/test split.
    Split(SplitArgs),
    /// Train one model on a split directory.
    Train(TrainArgs),
    /// Score a checkpoint against a split's test set.
    Evaluate(EvaluateArgs),
    /// Train and evaluate across intervention fractions on a shared test set.
    Sweep(SweepArgs),
    /// Stage-wise praise/popularity correlation on a star-rated log.
    AuditBias(AuditArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ModelFlags {
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,

    #[arg(long, value_parser = parse_backbone)]
    pub backbone: Option<Backbone>,

    /// Cutoffs, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub k: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_name = "STR")]
    pub delimiter: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Canonical interaction file written by `ingest`.
    #[arg(long)]
    pub input: PathBuf,
    /// Uniform-train share of the data; overrides the config split.
    #[arg(long, value_name = "F")]
    pub intervention: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Split directory.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub model: ModelFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Report of a reference run; fills the `imp` column.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Canonical interaction file written by `ingest`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', value_name = "LIST", required = true)]
    pub intervention: Vec<f64>,
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub jobs: usize,
    #[command(flatten)]
    pub model: ModelFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Raw star-rating file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_name = "STR")]
    pub delimiter: Option<String>,
    #[arg(long, value_name = "T")]
    pub stages: Option<usize>,
    #[arg(long, value_name = "N")]
    pub top: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthKind {
    /// Biased train log plus unbiased held-out log, in split layout.
    Implicit,
    /// Star-rated raw log with shared praise/popularity trends.
    Trend,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SynthKind::Implicit)]
    pub kind: SynthKind,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_backbone(s: &str) -> std::result::Result<Backbone, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Reproducibility record written next to every command's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    /// Input path -> sha256 hex.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub wall_time_secs: f64,
    pub version: String,
}

impl RunManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The recorded command line with `--out` pointed elsewhere.
    pub fn replay_argv(&self, out: &Path) -> Vec<String> {
        let mut argv = self.argv.clone();
        let mut i = 0;
        while i < argv.len() {
            if argv[i] == "--out" && i + 1 < argv.len() {
                argv[i + 1] = out.display().to_string();
                i += 1;
            } else if argv[i].starts_with("--out=") {
                argv[i] = format!("--out={}", out.display());
            }
            i += 1;
        }
        argv
    }
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 1,
        Error::Diverged { .. } => 3,
        _ => 2,
    }
}

/// Parses `args` (program name first) and runs the command. Messages go to
/// stdout/stderr; the return value is the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, argv) {
        Ok(manifest) => {
            info!("{} finished in {:.2}s", manifest.command, manifest.wall_time_secs);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Loads the config file (or a manifest's snapshot) and applies flag
/// overrides.
fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.trim_start().starts_with('{') {
            let manifest: RunManifest = serde_json::from_str(&text)
                .map_err(|e| Error::config(format!("--config {}: {e}", path.display())))?;
            for (k, v) in &manifest.config {
                cfg.set(k, v)?;
            }
        } else {
            cfg.merge_str(&text)
                .map_err(|e| Error::config(format!("--config {}: {e}", path.display())))?;
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let model = match &cli.command {
        Command::Train(a) => Some(&a.model),
        Command::Evaluate(a) => Some(&a.model),
        Command::Sweep(a) => Some(&a.model),
        _ => None,
    };
    if let Some(m) = model {
        if let Some(method) = m.method {
            cfg.method = method;
        }
        if let Some(backbone) = m.backbone {
            cfg.hp.backbone = backbone;
        }
        if let Some(k) = &m.k {
            cfg.ks = k.clone();
        }
    }
    match &cli.command {
        Command::Ingest(IngestArgs { delimiter: Some(d), .. })
        | Command::AuditBias(AuditArgs { delimiter: Some(d), .. }) => cfg.delimiter = d.clone(),
        _ => {}
    }
    if let Command::AuditBias(a) = &cli.command {
        if let Some(t) = a.stages {
            cfg.audit_stages = t;
        }
        if let Some(n) = a.top {
            cfg.audit_top_items = n;
        }
    }
    if let Command::Split(SplitArgs { intervention: Some(f), .. }) = &cli.command {
        cfg.split = cfg.split.with_intervention(*f);
    }
    cfg.resolve_seeds();
    validate_config(&cfg, &cli.command)?;
    Ok(cfg)
}

fn validate_config(cfg: &RunConfig, command: &Command) -> Result<()> {
    cfg.hp.validate()?;
    cfg.split.validate()?;
    if cfg.ks.is_empty() || cfg.ks.contains(&0) {
        return Err(Error::config("--k needs one or more cutoffs >= 1"));
    }
    if cfg.delimiter.is_empty() {
        return Err(Error::config("--delimiter must not be empty"));
    }
    match command {
        Command::Sweep(a) => {
            if a.jobs == 0 {
                return Err(Error::config("--jobs must be >= 1"));
            }
            for &f in &a.intervention {
                cfg.split.with_intervention(f).validate().map_err(|_| {
                    Error::config(format!("--intervention {f} does not fit the split fractions"))
                })?;
            }
        }
        Command::AuditBias(_) if cfg.audit_stages == 0 || cfg.audit_top_items == 0 => {
            return Err(Error::config("--stages and --top must be >= 1"));
        }
        Command::Synth(_) => cfg.synth.validate()?,
        _ => {}
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Split(_) => "split",
        Command::Train(_) => "train",
        Command::Evaluate(_) => "evaluate",
        Command::Sweep(_) => "sweep",
        Command::AuditBias(_) => "audit-bias",
        Command::Synth(_) => "synth",
    }
}

/// Runs a parsed command and returns the manifest it wrote.
pub fn execute(cli: &Cli, argv: Vec<String>) -> Result<RunManifest> {
    let start = Instant::now();
    let cfg = resolve_config(cli)?;
    let mut inputs: Vec<PathBuf> = Vec::new();
    if let Some(c) = &cli.config {
        inputs.push(c.clone());
    }
    let (out, outputs) = match &cli.command {
        Command::Ingest(a) => (&a.out, cmd_ingest(a, &cfg, &mut inputs)?),
        Command::Split(a) => (&a.out, cmd_split(a, &cfg, &mut inputs)?),
        Command::Train(a) => (&a.out, cmd_train(a, &cfg, &mut inputs)?),
        Command::Evaluate(a) => (&a.out, cmd_evaluate(a, &cfg, &mut inputs)?),
        Command::Sweep(a) => (&a.out, cmd_sweep(a, &cfg, &mut inputs)?),
        Command::AuditBias(a) => (&a.out, cmd_audit(a, &cfg, &mut inputs)?),
        Command::Synth(a) => (&a.out, cmd_synth(a, &cfg)?),
    };
    let mut hashes = BTreeMap::new();
    for p in &inputs {
        hashes.insert(p.display().to_string(), sha256_file(p)?);
    }
    let mut outputs = outputs;
    outputs.push(MANIFEST_FILE.to_string());
    let manifest = RunManifest {
        command: command_name(&cli.command).to_string(),
        argv,
        config: cfg.snapshot(),
        seed: cfg.seed,
        inputs: hashes,
        outputs,
        wall_time_secs: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_file(&out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

fn split_inputs(dir: &Path) -> Vec<PathBuf> {
    [split::TRAIN_FILE, split::VALID_FILE, split::TEST_FILE, split::SPLIT_MANIFEST_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect()
}

fn cmd_ingest(a: &IngestArgs, cfg: &RunConfig, inputs: &mut Vec<PathBuf>) -> Result<Vec<String>> {
    let records = ingest::parse_file(&a.input, &cfg.delimiter)?;
    inputs.push(a.input.clone());
    let bin = ingest::binarize(&records);
    create_dir(&a.out)?;
    ingest::write_interactions(a.out.join(INTERACTIONS_FILE), &bin.interactions)?;
    write_file(&a.out.join(ID_MAP_FILE), bin.ids.to_json()?)?;
    let positives = bin.interactions.iter().filter(|x| x.rating == 1).count();
    let report = serde_json::json!({
        "records": records.len(),
        "users": bin.ids.num_users(),
        "items": bin.ids.num_items(),
        "positives": positives,
    });
    write_file(&a.out.join(REPORT_FILE), serde_json::to_string_pretty(&report)?)?;
    info!("ingested {} records, {positives} positives", records.len());
    Ok(vec![INTERACTIONS_FILE.into(), ID_MAP_FILE.into(), REPORT_FILE.into()])
}

/// Reads an ingest output and returns positives with the id space size.
/// Counts come from `id_map.json` next to the file when present, otherwise
/// from the largest ids seen.
fn load_positives(path: &Path) -> Result<(Vec<Interaction>, usize, usize)> {
    let all = ingest::read_interactions(path)?;
    let map_path = path.with_file_name(ID_MAP_FILE);
    let (nu, ni) = if map_path.exists() {
        let text = fs::read_to_string(&map_path).map_err(|e| Error::io(&map_path, e))?;
        let ids = IdMap::from_json(&text)?;
        (ids.num_users(), ids.num_items())
    } else {
        let nu = all.iter().map(|x| x.user as usize + 1).max().unwrap_or(0);
        let ni = all.iter().map(|x| x.item as usize + 1).max().unwrap_or(0);
        (nu, ni)
    };
    Ok((ingest::positives(&all), nu, ni))
}

fn cmd_split(a: &SplitArgs, cfg: &RunConfig, inputs: &mut Vec<PathBuf>) -> Result<Vec<String>> {
    let (pos, nu, ni) = load_positives(&a.input)?;
    inputs.push(a.input.clone());
    let ds = split::split(&pos, nu, ni, &cfg.split)?;
    write_split(&a.out, &ds, Some(&cfg.split))?;
    Ok(vec![
        split::TRAIN_FILE.into(),
        split::VALID_FILE.into(),
        split::TEST_FILE.into(),
        split::SPLIT_MANIFEST_FILE.into(),
    ])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainRunReport {
    pub train: TrainReport,
    pub test: MetricsReport,
}

/// Trains, writes checkpoint/report/metrics into `out`.
fn train_into(out: &Path, ds: &SplitDataset, cfg: &RunConfig, run_id: &str) -> Result<TrainRunReport> {
    let trained = train(ds, &cfg.hp, cfg.method)?;
    let test = evaluate(&trained.scoring, ds, Truth::Test, &cfg.ks)?;
    create_dir(out)?;
    write_checkpoint(out.join(CHECKPOINT_FILE), &trained.scoring)?;
    let report = TrainRunReport {
        train: trained.report,
        test,
    };
    write_file(&out.join(REPORT_FILE), serde_json::to_string_pretty(&report)?)?;
    let csv = format!(
        "{CSV_HEADER}\n{}",
        report.test.csv_rows(run_id, cfg.method.name(), &cfg.hp.backbone.to_string())
    );
    write_file(&out.join(METRICS_FILE), csv)?;
    Ok(report)
}

fn cmd_train(a: &TrainArgs, cfg: &RunConfig, inputs: &mut Vec<PathBuf>) -> Result<Vec<String>> {
    let ds = split::read_split(&a.data)?;
    inputs.extend(split_inputs(&a.data));
    let report = train_into(&a.out, &ds, cfg, "train")?;
    if let Some(m) = report.test.per_k.values().next() {
        info!("test recall {:.4}", m.recall);
    }
    Ok(vec![CHECKPOINT_FILE.into(), REPORT_FILE.into(), METRICS_FILE.into()])
}

/// Accepts either a bare metrics report or a `train` report.
fn read_metrics_report(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(r) = serde_json::from_str::<TrainRunReport>(&text) {
        return Ok(r.test);
    }
    Ok(serde_json::from_str(&text)?)
}

fn cmd_evaluate(a: &EvaluateArgs, cfg: &RunConfig, inputs: &mut Vec<PathBuf>) -> Result<Vec<String>> {
    let ds = split::read_split(&a.data)?;
    inputs.extend(split_inputs(&a.data));
    let emb = read_checkpoint(&a.checkpoint)?;
    inputs.push(a.checkpoint.clone());
    if emb.num_users() != ds.num_users {
        return Err(Error::DimensionMismatch(emb.num_users(), ds.num_users));
    }
    if emb.num_items() != ds.num_items {
        return Err(Error::DimensionMismatch(emb.num_items(), ds.num_items));
    }
    let mut report = evaluate(&emb, &ds, Truth::Test, &cfg.ks)?;
    if let Some(r) = &a.reference {
        let reference = read_metrics_report(r)?;
        inputs.push(r.clone());
        report.set_reference(&r.display().to_string(), &reference)?;
    }
    create_dir(&a.out)?;
    write_file(&a.out.join(REPORT_FILE), report.to_json()?)?;
    let csv = format!(
        "{CSV_HEADER}\n{}",
        report.csv_rows("evaluate", cfg.method.name(), &cfg.hp.backbone.to_string())
    );
    write_file(&a.out.join(METRICS_FILE), csv)?;
    Ok(vec![REPORT_FILE.into(), METRICS_FILE.into()])
}

fn variant_dir(f: f64) -> String {
    format!("intervention-{f}")
}

fn cmd_sweep(a: &SweepArgs, cfg: &RunConfig, inputs: &mut Vec<PathBuf>) -> Result<Vec<String>> {
    let (pos, nu, ni) = load_positives(&a.input)?;
    inputs.push(a.input.clone());
    let variants = split::intervention_variants(&pos, nu, ni, &cfg.split, &a.intervention)?;
    create_dir(&a.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Error::config(format!("--jobs: {e}")))?;
    let jobs: Vec<(f64, &SplitDataset)> = a.intervention.iter().copied().zip(&variants).collect();
    let reports: Vec<Result<TrainRunReport>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(f, ds)| {
                let dir = a.out.join(variant_dir(f));
                let split_cfg: SplitConfig = cfg.split.with_intervention(f);
                write_split(&dir, ds, Some(&split_cfg))?;
                info!("sweep variant {f}: {} train interactions", ds.train.len());
                train_into(&dir, ds, cfg, &format!("intervention={f}"))
            })
            .collect()
    });
    let mut csv = format!("{CSV_HEADER}\n");
    let mut summary = Vec::new();
    for (&f, r) in a.intervention.iter().zip(reports) {
        let r = r?;
        csv.push_str(&r.test.csv_rows(
            &format!("intervention={f}"),
            cfg.method.name(),
            &cfg.hp.backbone.to_string(),
        ));
        summary.push(serde_json::json!({ "intervention": f, "report": r }));
    }
    write_file(&a.out.join(METRICS_FILE), csv)?;
    write_file(&a.out.join(REPORT_FILE), serde_json::to_string_pretty(&summary)?)?;
    let mut outputs: Vec<String> = vec![METRICS_FILE.into(), REPORT_FILE.into()];
    outputs.extend(a.intervention.iter().map(|&f| variant_dir(f)));
    Ok(outputs)
}

fn cmd_audit(a: &AuditArgs, cfg: &RunConfig, inputs: &mut Vec<PathBuf>) -> Result<Vec<String>> {
    let records = ingest::parse_file(&a.input, &cfg.delimiter)?;
    inputs.push(a.input.clone());
    let mut ids = IdMap::default();
    let events: Vec<RatedEvent> = records
        .iter()
        .map(|r| RatedEvent {
            user: ids.user_id(&r.user),
            item: ids.item_id(&r.item),
            stars: r.rating,
            timestamp: r.timestamp,
        })
        .collect();
    let report = audit(&events, cfg.audit_stages, cfg.audit_top_items)?;
    create_dir(&a.out)?;
    write_file(&a.out.join(AUDIT_FILE), report.to_csv())?;
    write_file(&a.out.join(REPORT_FILE), serde_json::to_string_pretty(&report)?)?;
    write_file(&a.out.join(ID_MAP_FILE), ids.to_json()?)?;
    Ok(vec![AUDIT_FILE.into(), REPORT_FILE.into(), ID_MAP_FILE.into()])
}

fn cmd_synth(a: &SynthArgs, cfg: &RunConfig) -> Result<Vec<String>> {
    match a.kind {
        SynthKind::Implicit => {
            let data = synth::generate(&cfg.synth)?;
            data.write(&a.out, cfg.synth_val_share)?;
            Ok(vec![
                split::TRAIN_FILE.into(),
                split::VALID_FILE.into(),
                split::TEST_FILE.into(),
                split::SPLIT_MANIFEST_FILE.into(),
                "synth.json".into(),
            ])
        }
        SynthKind::Trend => {
            let events = generate_trend_log(&cfg.trend)?;
            create_dir(&a.out)?;
            let text = ingest::serialize_records(&to_raw_records(&events), &cfg.delimiter);
            write_file(&a.out.join(RATINGS_FILE), text)?;
            Ok(vec![RATINGS_FILE.into()])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_method_is_usage_error() {
        let err = Cli::try_parse_from(["debias-rec", "train", "--data", "d", "--out", "o", "--method", "dice"])
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("--method"), "{msg}");
        assert!(msg.contains("dclmdb-user"), "{msg}");
    }

    #[test]
    fn k_list_parses() {
        let cli = Cli::try_parse_from(["debias-rec", "train", "--data", "d", "--out", "o", "--k", "10,20,50"])
            .unwrap();
        let Command::Train(a) = cli.command else { panic!() };
        assert_eq!(a.model.k, Some(vec![10, 20, 50]));
    }

    #[test]
    fn replay_argv_redirects_out() {
        let m = RunManifest {
            command: "train".into(),
            argv: vec!["train".into(), "--out".into(), "a".into(), "--out=b".into()],
            config: BTreeMap::new(),
            seed: 0,
            inputs: BTreeMap::new(),
            outputs: vec![],
            wall_time_secs: 0.0,
            version: "x".into(),
        };
        assert_eq!(m.replay_argv(Path::new("z")), vec!["train", "--out", "z", "--out=z"]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::config("x")), 1);
        assert_eq!(exit_code(&Error::EmptyInput), 2);
        assert_eq!(exit_code(&Error::Diverged { epoch: 1, what: "x".into() }), 3);
    }
}
