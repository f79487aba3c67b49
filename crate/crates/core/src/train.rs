//! Chunked training loop with a validation-plateau learning-rate schedule.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encode::{read_chunk, Chunk, EncodeError, OneHotBatch, TokenVocab};
use crate::net::{save_checkpoint, Checkpoint, LstmModel, NetError, Optimizer};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub chunk_size: usize,
    pub batch_size: usize,
    pub lr_init: f64,
    pub patience_chunks: usize,
    pub lr_decay_factor: f64,
    pub max_chunks: usize,
    pub min_lr: f64,
    /// Validation loss must drop by at least this much to count as progress.
    pub min_improvement: f64,
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            chunk_size: 100_000,
            batch_size: 512,
            lr_init: 0.007,
            patience_chunks: 5,
            lr_decay_factor: 0.5,
            max_chunks: 1000,
            min_lr: 1e-6,
            min_improvement: 1e-4,
            clip_norm: Some(5.0),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if self.chunk_size == 0 || self.batch_size == 0 || self.max_chunks == 0 {
            return bad("chunk_size, batch_size and max_chunks must be positive");
        }
        if self.patience_chunks == 0 {
            return bad("patience must be positive");
        }
        if !(self.lr_init > 0.0 && self.lr_init.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor < 1.0) {
            return bad("lr_decay_factor must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChunkRecord {
    pub chunk: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    /// Validation loss of the model before any training.
    pub initial_val_loss: f64,
    pub records: Vec<ChunkRecord>,
}

impl TrainHistory {
    pub fn best_val_loss(&self) -> Option<f64> {
        self.records.iter().map(|r| r.val_loss).reduce(f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("chunk,train_loss,val_loss,lr,seconds\n");
        for r in &self.records {
            out.push_str(&csv_row(r));
        }
        out
    }
}

fn csv_row(r: &ChunkRecord) -> String {
    format!(
        "{},{:.6},{:.6},{:.3e},{:.3}\n",
        r.chunk, r.train_loss, r.val_loss, r.lr, r.seconds
    )
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("no training chunks available")]
    EmptyStream,
    #[error("numerical failure in chunk {chunk}: {source}")]
    Numerical {
        chunk: usize,
        source: NetError,
        history: TrainHistory,
    },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Source of vectorized chunks. Chunk 0 is the validation set and is never
/// handed out for training.
pub trait ChunkSource {
    fn validation(&mut self) -> Result<OneHotBatch, TrainError>;
    fn training_chunks(&self) -> usize;
    /// Training chunk `i` (0-based among training chunks, file index `i+1`).
    fn training(&mut self, i: usize) -> Result<OneHotBatch, TrainError>;
}

/// Chunks held in memory.
pub struct MemorySource {
    validation: OneHotBatch,
    training: Vec<OneHotBatch>,
}

impl MemorySource {
    pub fn new(chunks: Vec<Chunk>) -> Result<MemorySource, TrainError> {
        let mut validation = None;
        let mut training = Vec::new();
        let mut chunks = chunks;
        chunks.sort_by_key(|c| c.index);
        for c in chunks {
            if c.is_validation() {
                validation = Some(c.batch);
            } else {
                training.push(c.batch);
            }
        }
        let validation = validation.ok_or(TrainError::EmptyStream)?;
        Ok(MemorySource {
            validation,
            training,
        })
    }

    /// Split a batch into chunks of `chunk_size` rows; the first is validation.
    pub fn from_batch(batch: &OneHotBatch, chunk_size: usize) -> Result<MemorySource, TrainError> {
        let n = batch.batch_size();
        let chunks = (0..n)
            .step_by(chunk_size.max(1))
            .enumerate()
            .map(|(i, start)| {
                let rows: Vec<usize> = (start..(start + chunk_size).min(n)).collect();
                Chunk {
                    index: i as u32,
                    batch: batch.select(&rows),
                }
            })
            .collect();
        MemorySource::new(chunks)
    }
}

impl ChunkSource for MemorySource {
    fn validation(&mut self) -> Result<OneHotBatch, TrainError> {
        Ok(self.validation.clone())
    }

    fn training_chunks(&self) -> usize {
        self.training.len()
    }

    fn training(&mut self, i: usize) -> Result<OneHotBatch, TrainError> {
        Ok(self.training[i].clone())
    }
}

/// Chunks streamed from files written by [`crate::encode::write_chunks`].
pub struct DirSource {
    paths: Vec<PathBuf>,
    vocab: TokenVocab,
}

impl DirSource {
    pub fn open(dir: &Path, vocab: TokenVocab) -> Result<DirSource, TrainError> {
        let paths = crate::encode::list_chunks(dir)?;
        if paths.len() < 2 {
            return Err(TrainError::EmptyStream);
        }
        Ok(DirSource { paths, vocab })
    }
}

impl ChunkSource for DirSource {
    fn validation(&mut self) -> Result<OneHotBatch, TrainError> {
        let chunk = read_chunk(&self.paths[0], &self.vocab)?;
        if !chunk.is_validation() {
            return Err(TrainError::Config("first chunk file is not the validation chunk".into()));
        }
        Ok(chunk.batch)
    }

    fn training_chunks(&self) -> usize {
        self.paths.len() - 1
    }

    fn training(&mut self, i: usize) -> Result<OneHotBatch, TrainError> {
        let chunk = read_chunk(&self.paths[i + 1], &self.vocab)?;
        assert!(!chunk.is_validation(), "validation chunk offered for training");
        Ok(chunk.batch)
    }
}

/// Where checkpoints and the metrics log go.
#[derive(Debug, Clone)]
pub struct OutputDir {
    pub dir: PathBuf,
    pub vocab: TokenVocab,
}

impl OutputDir {
    pub fn best(&self) -> PathBuf {
        self.dir.join("best.ckpt")
    }

    pub fn latest(&self) -> PathBuf {
        self.dir.join("latest.ckpt")
    }

    pub fn metrics(&self) -> PathBuf {
        self.dir.join("metrics.csv")
    }
}

/// Mean per-position loss over a validation set, evaluated in slices of
/// `batch_size` rows with dropout off.
pub fn evaluate(model: &LstmModel, data: &OneHotBatch, batch_size: usize) -> Result<f64, NetError> {
    let n = data.batch_size();
    if n == 0 {
        return Err(NetError::Shape("empty validation set".into()));
    }
    let mut total = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + batch_size.max(1)).min(n);
        let rows: Vec<usize> = (start..end).collect();
        total += model.loss(&data.select(&rows))? * (end - start) as f64;
        start = end;
    }
    Ok(total / n as f64)
}

/// Train one epoch per chunk, cycling through the training chunks until
/// `max_chunks` chunks are done or the learning rate decays below `min_lr`.
pub fn train(
    mut model: LstmModel,
    source: &mut dyn ChunkSource,
    config: &TrainConfig,
    output: Option<&OutputDir>,
) -> Result<(LstmModel, TrainHistory), TrainError> {
    config.validate()?;
    let n_train = source.training_chunks();
    if n_train == 0 {
        return Err(TrainError::EmptyStream);
    }
    let validation = source.validation()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Optimizer::adam(config.lr_init).with_clip_norm(config.clip_norm);

    let mut history = TrainHistory {
        initial_val_loss: evaluate(&model, &validation, config.batch_size)?,
        records: Vec::new(),
    };
    let mut best = history.initial_val_loss;
    let mut stale = 0;
    if let Some(out) = output {
        fs::create_dir_all(&out.dir)?;
        fs::write(out.metrics(), "chunk,train_loss,val_loss,lr,seconds\n")?;
    }
    log::info!("initial validation loss {:.4}", best);

    for chunk in 0..config.max_chunks {
        let started = Instant::now();
        let data = source.training(chunk % n_train)?;
        let lr_used = optimizer.lr;
        let numerical = |source: NetError, history: &TrainHistory| TrainError::Numerical {
            chunk,
            source,
            history: history.clone(),
        };
        let train_loss = match train_epoch(&mut model, &mut optimizer, &data, config.batch_size, &mut rng) {
            Ok(l) => l,
            Err(e) => return Err(numerical(e, &history)),
        };
        let val_loss = match evaluate(&model, &validation, config.batch_size) {
            Ok(l) => l,
            Err(e) => return Err(numerical(e, &history)),
        };
        let record = ChunkRecord {
            chunk,
            train_loss,
            val_loss,
            lr: lr_used,
            seconds: started.elapsed().as_secs_f64(),
        };
        history.records.push(record);
        log::info!(
            "chunk {chunk}: train {train_loss:.4} val {val_loss:.4} lr {lr_used:.2e} ({:.1}s)",
            record.seconds
        );

        let improved = val_loss < best - config.min_improvement;
        if improved {
            best = val_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience_chunks {
                optimizer.lr *= config.lr_decay_factor;
                stale = 0;
                log::info!("validation plateau, learning rate now {:.2e}", optimizer.lr);
            }
        }

        if let Some(out) = output {
            let ckpt = Checkpoint {
                vocab: out.vocab.clone(),
                model: model.clone(),
                optimizer: optimizer.clone(),
                chunks_seen: chunk as u64 + 1,
            };
            save_checkpoint(&out.latest(), &ckpt)?;
            if improved || !out.best().exists() {
                save_checkpoint(&out.best(), &ckpt)?;
            }
            let mut f = OpenOptions::new().append(true).open(out.metrics())?;
            f.write_all(csv_row(&record).as_bytes())?;
        }
        if optimizer.lr < config.min_lr {
            break;
        }
    }
    Ok((model, history))
}

fn train_epoch(
    model: &mut LstmModel,
    optimizer: &mut Optimizer,
    data: &OneHotBatch,
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64, NetError> {
    let mut order: Vec<usize> = (0..data.batch_size()).collect();
    order.shuffle(rng);
    let mut total = 0.0;
    for rows in order.chunks(batch_size) {
        let batch = data.select(rows);
        let (loss, grads) = model.loss_and_grads(&batch, Some(rng))?;
        if grads.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(NetError::NonFinite("gradients"));
        }
        optimizer.apply_update(&mut model.params, &grads);
        total += loss * rows.len() as f64;
    }
    Ok(total / data.batch_size().max(1) as f64)
}
