//! Command-line pipeline: prepare, train, sample and the analysis commands.
//!
//! Settings come from flags, then from a flat `key = value` config file
//! given with `--config`, then from built-in defaults. Exit codes: 0 ok,
//! 1 usage, 2 data error, 3 numerical failure.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analyze;
use crate::corpus::{self, CorpusKind};
use crate::descriptors::{self, DescriptorRecord, FragmentScoreTable};
use crate::encode::{build_vocab, encode_batch, write_chunks, TokenVocab};
use crate::net::{load_checkpoint, LstmModel, ModelConfig, NetError};
use crate::sample::{generate_batch, SampleError, SamplerConfig};
use crate::smiles::{self, tokenize, Validity};
use crate::train::{train, DirSource, OutputDir, TrainConfig, TrainError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "molrnn", version, about = "Generate molecules with a character-level LSTM")]
pub struct Cli {
    /// Seed for every random choice in the command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flat `key = value` settings file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shuffle a SMILES file, build the vocabulary and write one-hot chunks.
    Prepare(PrepareArgs),
    /// Train a model on prepared chunks.
    Train(TrainArgs),
    /// Sample molecules from a checkpoint.
    Sample(SampleArgs),
    /// Check each line of a SMILES file.
    Validate(ValidateArgs),
    /// Compute descriptors for each molecule.
    Props(PropsArgs),
    /// Count generated molecules already present in the training set.
    Novelty(NoveltyArgs),
    /// Malformed fraction of samples at several temperatures.
    TempSweep(TempSweepArgs),
    /// Property histograms and KS distances for labeled SMILES files.
    Hist(HistArgs),
    /// Pick compounds near percentiles of the SA-score distribution.
    SaPick(SaPickArgs),
    /// Write a synthetic ZINC-like corpus.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub chunk_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of chunk files.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Checkpoint and metrics directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long)]
    pub max_chunks: Option<usize>,
    #[arg(long)]
    pub units: Option<usize>,
    #[arg(long)]
    pub dense: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Global gradient-norm limit; 0 disables clipping.
    #[arg(long)]
    pub clip: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub temp: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write invalid strings with their error class.
    #[arg(long)]
    pub invalid_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PropsArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SA fragment table; defaults to the built-in one.
    #[arg(long)]
    pub sa_table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoveltyArgs {
    #[arg(long)]
    pub generated: Option<PathBuf>,
    #[arg(long)]
    pub training: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TempSweepArgs {
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    /// Comma-separated temperatures.
    #[arg(long)]
    pub temps: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    /// `label=path` pairs, repeatable.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<String>,
    /// Comma-separated property names.
    #[arg(long)]
    pub props: Option<String>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub ks_out: Option<PathBuf>,
    #[arg(long)]
    pub sa_table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SaPickArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub training: Option<PathBuf>,
    /// Comma-separated percentiles.
    #[arg(long)]
    pub percentiles: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub sa_table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// `fragment` or `druglike`.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> CliError {
        match e {
            NetError::NonFinite(_) => CliError::Numerical(e.to_string()),
            other => data(other),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> CliError {
        match e {
            TrainError::Numerical { .. } => CliError::Numerical(e.to_string()),
            TrainError::Config(m) => CliError::Usage(m),
            TrainError::Net(n) => n.into(),
            other => data(other),
        }
    }
}

impl From<SampleError> for CliError {
    fn from(e: SampleError) -> CliError {
        match e {
            SampleError::Net(n) => n.into(),
            SampleError::Temperature(_) | SampleError::Count => CliError::Usage(e.to_string()),
            other => data(other),
        }
    }
}

const CONFIG_KEYS: &[&str] = &[
    "seed", "in", "out", "chunk_size", "data", "vocab", "lr", "batch", "patience", "decay",
    "max_chunks", "units", "dense", "dropout", "clip", "ckpt", "n", "temp", "invalid_out",
    "sa_table", "generated", "training", "temps", "props", "bins", "ks_out", "percentiles", "k",
    "kind",
];

/// Settings from a flat `key = value` file. `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: HashMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Settings, CliError> {
        let mut values = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", no + 1)))?;
            let k = k.trim().replace('-', "_");
            if !CONFIG_KEYS.contains(&k.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key `{k}`", no + 1)));
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(Settings { values })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config value for `{key}` is invalid: `{v}`"))),
        }
    }

    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    fn need<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError> {
        self.get(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing required setting --{}", key.replace('_', "-"))))
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let settings = match &cli.config {
        Some(path) => Settings::parse(
            &fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        )?,
        None => Settings::default(),
    };
    let seed = settings.or(cli.seed, "seed", 0u64)?;
    log::info!("seed {seed}");
    match cli.command {
        Command::Prepare(a) => prepare(a, &settings, seed),
        Command::Train(a) => train_cmd(a, &settings, seed),
        Command::Sample(a) => sample_cmd(a, &settings, seed),
        Command::Validate(a) => validate_cmd(a, &settings),
        Command::Props(a) => props_cmd(a, &settings),
        Command::Novelty(a) => novelty_cmd(a, &settings),
        Command::TempSweep(a) => sweep_cmd(a, &settings, seed),
        Command::Hist(a) => hist_cmd(a, &settings),
        Command::SaPick(a) => sa_pick_cmd(a, &settings),
        Command::Corpus(a) => corpus_cmd(a, &settings, seed),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(text.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(data),
    }
}

fn list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("bad {what} `{s}`"))))
        .collect()
}

fn fragment_table(s: &Settings, flag: Option<PathBuf>) -> Result<FragmentScoreTable, CliError> {
    match s.get(flag, "sa_table")? {
        Some(p) => FragmentScoreTable::load(&p).map_err(data),
        None => Ok(descriptors::default_fragment_table().clone()),
    }
}

fn prepare(a: PrepareArgs, s: &Settings, seed: u64) -> Result<(), CliError> {
    let input: PathBuf = s.need(a.input, "in")?;
    let out: PathBuf = s.need(a.out, "out")?;
    let chunk_size = s.or(a.chunk_size, "chunk_size", 100_000usize)?;
    if chunk_size == 0 {
        return Err(CliError::Usage("chunk size must be positive".into()));
    }
    let lines = read_lines(&input)?;
    let total = lines.len();
    let mut kept: Vec<String> = lines
        .into_iter()
        .filter(|l| tokenize(l).is_ok() && !l.contains(['!', 'E']))
        .collect();
    let dropped = total - kept.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kept.shuffle(&mut rng);
    if kept.is_empty() {
        return Err(CliError::Data("no usable SMILES lines".into()));
    }
    let vocab = build_vocab(&kept).map_err(data)?;
    let batch = encode_batch(&kept, &vocab).map_err(data)?;
    fs::create_dir_all(&out).map_err(data)?;
    vocab.save(&out.join("vocab.txt")).map_err(data)?;
    let paths = write_chunks(&out.join("chunks"), &batch, chunk_size, &vocab).map_err(data)?;
    println!(
        "lines {total}, kept {}, dropped {dropped}, max length {}, vocabulary {}, chunks {}",
        kept.len(),
        vocab.max_smiles_len(),
        vocab.len(),
        paths.len()
    );
    Ok(())
}

fn train_cmd(a: TrainArgs, s: &Settings, seed: u64) -> Result<(), CliError> {
    let data_dir: PathBuf = s.need(a.data, "data")?;
    let vocab_path: PathBuf = s.need(a.vocab, "vocab")?;
    let out: PathBuf = s.need(a.out, "out")?;
    let vocab = TokenVocab::load(&vocab_path).map_err(data)?;
    let clip = s.or(a.clip, "clip", 5.0)?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        batch_size: s.or(a.batch, "batch", defaults.batch_size)?,
        lr_init: s.or(a.lr, "lr", defaults.lr_init)?,
        patience_chunks: s.or(a.patience, "patience", defaults.patience_chunks)?,
        lr_decay_factor: s.or(a.decay, "decay", defaults.lr_decay_factor)?,
        max_chunks: s.or(a.max_chunks, "max_chunks", defaults.max_chunks)?,
        clip_norm: (clip > 0.0).then_some(clip),
        seed,
        ..defaults
    };
    let full = ModelConfig::full(vocab.len());
    let model_config = ModelConfig {
        lstm_units: s.or(a.units, "units", full.lstm_units)?,
        dense_units: s.or(a.dense, "dense", full.dense_units)?,
        dropout: s.or(a.dropout, "dropout", full.dropout)?,
        ..full
    };
    if model_config.lstm_units == 0 || model_config.dense_units == 0 || !(0.0..1.0).contains(&model_config.dropout) {
        return Err(CliError::Usage("layer sizes must be positive and dropout in [0, 1)".into()));
    }
    let mut source = DirSource::open(&data_dir, vocab.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = LstmModel::new(model_config, &mut rng);
    let output = OutputDir { dir: out, vocab };
    let (_, history) = train(model, &mut source, &config, Some(&output))?;
    println!(
        "chunks {}, best validation loss {:.4}, checkpoints in {}",
        history.records.len(),
        history.best_val_loss().unwrap_or(f64::NAN),
        output.dir.display()
    );
    Ok(())
}

fn sample_cmd(a: SampleArgs, s: &Settings, seed: u64) -> Result<(), CliError> {
    let ckpt = load_checkpoint(&s.need::<PathBuf>(a.ckpt, "ckpt")?)?;
    let config = SamplerConfig {
        temperature: s.or(a.temp, "temp", 1.0)?,
        max_len: ckpt.vocab.max_len(),
        seed,
        count: s.or(a.n, "n", 50_000usize)?,
    };
    let (results, summary) = generate_batch(&ckpt.model, &ckpt.vocab, &config)?;
    let mut valid = String::new();
    let mut invalid = String::from("raw,error_class\n");
    for r in &results {
        match (&r.status, &r.canonical) {
            (Validity::Valid, Some(c)) => {
                valid.push_str(c);
                valid.push('\n');
            }
            (Validity::Invalid(e), _) => invalid.push_str(&format!("{},{}\n", r.raw, e.class)),
            _ => {}
        }
    }
    let out: Option<PathBuf> = s.get(a.out, "out")?;
    write_out(out.as_deref(), &valid)?;
    if let Some(p) = s.get::<PathBuf>(a.invalid_out, "invalid_out")? {
        write_out(Some(&p), &invalid)?;
    }
    eprintln!(
        "sampled {}, valid {:.2}%, unique {:.2}%",
        summary.count,
        100.0 * summary.valid_fraction,
        100.0 * summary.unique_fraction
    );
    Ok(())
}

fn validate_cmd(a: ValidateArgs, s: &Settings) -> Result<(), CliError> {
    let lines = read_lines(&s.need::<PathBuf>(a.input, "in")?)?;
    let mut out = String::from("line,smiles,valid,error_class,position\n");
    let mut valid = 0;
    for (i, l) in lines.iter().enumerate() {
        match smiles::validate(l) {
            Validity::Valid => {
                valid += 1;
                out.push_str(&format!("{},{},true,,\n", i + 1, l));
            }
            Validity::Invalid(e) => out.push_str(&format!("{},{},false,{},{}\n", i + 1, l, e.class, e.position)),
        }
    }
    write_out(s.get::<PathBuf>(a.out, "out")?.as_deref(), &out)?;
    eprintln!("{valid} of {} valid", lines.len());
    Ok(())
}

fn props_cmd(a: PropsArgs, s: &Settings) -> Result<(), CliError> {
    let lines = read_lines(&s.need::<PathBuf>(a.input, "in")?)?;
    let table = fragment_table(s, a.sa_table)?;
    let (records, skipped) = analyze::describe_lines(&lines, &table);
    let mut out = format!("smiles,{}\n", DescriptorRecord::CSV_HEADER);
    for (smi, r) in &records {
        out.push_str(&format!("{smi},{}\n", r.to_csv()));
    }
    write_out(s.get::<PathBuf>(a.out, "out")?.as_deref(), &out)?;
    eprintln!("described {}, skipped {skipped} invalid", records.len());
    Ok(())
}

fn novelty_cmd(a: NoveltyArgs, s: &Settings) -> Result<(), CliError> {
    let generated = read_lines(&s.need::<PathBuf>(a.generated, "generated")?)?;
    let training = read_lines(&s.need::<PathBuf>(a.training, "training")?)?;
    let report = analyze::novelty(&generated, &training);
    write_out(s.get::<PathBuf>(a.out, "out")?.as_deref(), &report.to_csv())
}

fn sweep_cmd(a: TempSweepArgs, s: &Settings, seed: u64) -> Result<(), CliError> {
    let ckpt = load_checkpoint(&s.need::<PathBuf>(a.ckpt, "ckpt")?)?;
    let temps: Vec<f64> = list(&s.or(a.temps, "temps", "0.5,0.75,1.0,1.25,1.5".to_string())?, "temperature")?;
    let n = s.or(a.n, "n", 1000usize)?;
    let points = analyze::temperature_sweep(&ckpt.model, &ckpt.vocab, &temps, n, seed).map_err(|e| match e {
        analyze::AnalyzeError::Precondition(m) => CliError::Usage(m),
        analyze::AnalyzeError::Sample(e) => e.into(),
    })?;
    write_out(s.get::<PathBuf>(a.out, "out")?.as_deref(), &analyze::sweep_csv(&points))
}

fn hist_cmd(a: HistArgs, s: &Settings) -> Result<(), CliError> {
    let table = fragment_table(s, a.sa_table)?;
    let props_text = s.or(a.props, "props", DescriptorRecord::PROPERTIES.join(","))?;
    let props: Vec<String> = list(&props_text, "property")?;
    let bins = s.or(a.bins, "bins", 50usize)?;
    let mut datasets = Vec::new();
    for spec in &a.inputs {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected label=path, got `{spec}`")))?;
        let (records, skipped) = analyze::describe_lines(&read_lines(Path::new(path))?, &table);
        eprintln!("{label}: {} molecules, {skipped} skipped", records.len());
        datasets.push((label.to_string(), records.into_iter().map(|r| r.1).collect()));
    }
    let prop_refs: Vec<&str> = props.iter().map(String::as_str).collect();
    let (hists, ks) = analyze::property_histograms(&datasets, &prop_refs, bins).map_err(|e| CliError::Usage(e.to_string()))?;
    write_out(s.get::<PathBuf>(a.out, "out")?.as_deref(), &analyze::histogram_csv(&hists))?;
    match s.get::<PathBuf>(a.ks_out, "ks_out")? {
        Some(p) => write_out(Some(&p), &analyze::ks_csv(&ks)),
        None => {
            eprint!("{}", analyze::ks_csv(&ks));
            Ok(())
        }
    }
}

fn sa_pick_cmd(a: SaPickArgs, s: &Settings) -> Result<(), CliError> {
    let table = fragment_table(s, a.sa_table)?;
    let lines = read_lines(&s.need::<PathBuf>(a.input, "in")?)?;
    let training_lines = read_lines(&s.need::<PathBuf>(a.training, "training")?)?;
    let (training, _) = analyze::canonical_set(&training_lines);
    let mut scored = Vec::new();
    for l in &lines {
        if let Ok(g) = smiles::parse(l) {
            let sa = descriptors::sa_score(&descriptors::neutralize(&g), &table).map_err(data)?;
            scored.push((smiles::write_canonical(&g), sa));
        }
    }
    let percentiles: Vec<f64> = list(&s.or(a.percentiles, "percentiles", "5,50,95".to_string())?, "percentile")?;
    let k = s.or(a.k, "k", 10usize)?;
    let selection = analyze::sa_percentile_pick(&scored, &training, &percentiles, k);
    if selection.short {
        eprintln!("warning: fewer than {k} novel compounds");
    }
    write_out(s.get::<PathBuf>(a.out, "out")?.as_deref(), &analyze::selection_csv(&selection))
}

fn corpus_cmd(a: CorpusArgs, s: &Settings, seed: u64) -> Result<(), CliError> {
    let kind = match s.or(a.kind, "kind", "fragment".to_string())?.as_str() {
        "fragment" => CorpusKind::Fragment,
        "druglike" => CorpusKind::DrugLike,
        other => return Err(CliError::Usage(format!("unknown corpus kind `{other}`"))),
    };
    let n = s.or(a.n, "n", 50_000usize)?;
    let mut text = corpus::generate(kind, n, seed).join("\n");
    text.push('\n');
    write_out(s.get::<PathBuf>(a.out, "out")?.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_parse_and_defer_to_flags() {
        let s = Settings::parse("# run\nlr = 0.01\nmax-chunks = 7 # short\n\n").unwrap();
        assert_eq!(s.or(None, "lr", 1.0).unwrap(), 0.01);
        assert_eq!(s.or(Some(0.5), "lr", 1.0).unwrap(), 0.5);
        assert_eq!(s.or(None, "max_chunks", 0usize).unwrap(), 7);
        assert_eq!(s.or(None, "batch", 3usize).unwrap(), 3);
    }

    #[test]
    fn bad_settings_are_usage_errors() {
        assert_eq!(Settings::parse("lr").unwrap_err().exit_code(), EXIT_USAGE);
        assert_eq!(Settings::parse("colour = red").unwrap_err().exit_code(), EXIT_USAGE);
        let s = Settings::parse("batch = many").unwrap();
        assert_eq!(s.get::<usize>(None, "batch").unwrap_err().exit_code(), EXIT_USAGE);
    }

    #[test]
    fn numerical_failures_map_to_exit_three() {
        let e: CliError = NetError::NonFinite("loss").into();
        assert_eq!(e.exit_code(), EXIT_NUMERICAL);
    }
}
