//! Binary checkpoint: vocabulary, layer shapes, raw tensors and optimizer
//! state, all little-endian and bit-exact on reload.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::model::{LstmModel, ModelConfig, Params};
use super::optim::{Optimizer, OptimizerKind};
use super::NetError;
use crate::encode::TokenVocab;

const MAGIC: &[u8; 4] = b"SMCK";
const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub vocab: TokenVocab,
    pub model: LstmModel,
    pub optimizer: Optimizer,
    /// Chunks trained so far.
    pub chunks_seen: u64,
}

pub fn write_checkpoint<W: Write>(out: &mut W, ckpt: &Checkpoint) -> Result<(), NetError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&ckpt.vocab.hash().to_le_bytes());
    let text = ckpt.vocab.to_text();
    buf.extend_from_slice(&(text.len() as u32).to_le_bytes());
    buf.extend_from_slice(text.as_bytes());

    let c = &ckpt.model.config;
    for v in [c.vocab_size, c.lstm_units, c.dense_units] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    buf.extend_from_slice(&c.dropout.to_le_bytes());
    put_params(&mut buf, &ckpt.model.params);

    let o = &ckpt.optimizer;
    match o.kind {
        OptimizerKind::Sgd => buf.push(0),
        OptimizerKind::Adam { beta1, beta2, eps } => {
            buf.push(1);
            for v in [beta1, beta2, eps] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    buf.extend_from_slice(&o.lr.to_le_bytes());
    buf.extend_from_slice(&o.clip_norm.unwrap_or(-1.0).to_le_bytes());
    buf.extend_from_slice(&o.step.to_le_bytes());
    match &o.moments {
        Some((m, v)) => {
            buf.push(1);
            put_params(&mut buf, m);
            put_params(&mut buf, v);
        }
        None => buf.push(0),
    }
    buf.extend_from_slice(&ckpt.chunks_seen.to_le_bytes());
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(input: &mut R) -> Result<Checkpoint, NetError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let hash = r.u64()?;
    let len = r.u32()? as usize;
    let text = std::str::from_utf8(r.take(len)?).map_err(|_| bad("vocabulary is not UTF-8"))?;
    let vocab = TokenVocab::from_text(text).map_err(|e| bad(&e.to_string()))?;
    if vocab.hash() != hash {
        return Err(bad("vocabulary hash mismatch"));
    }

    let config = ModelConfig {
        vocab_size: r.u32()? as usize,
        lstm_units: r.u32()? as usize,
        dense_units: r.u32()? as usize,
        dropout: r.f64()?,
    };
    if config.vocab_size != vocab.len() {
        return Err(bad("model and vocabulary sizes differ"));
    }
    let params = r.params(&config)?;

    let kind = match r.take(1)?[0] {
        0 => OptimizerKind::Sgd,
        1 => OptimizerKind::Adam {
            beta1: r.f64()?,
            beta2: r.f64()?,
            eps: r.f64()?,
        },
        k => return Err(bad(&format!("unknown optimizer {k}"))),
    };
    let lr = r.f64()?;
    let clip = r.f64()?;
    let step = r.u64()?;
    let moments = match r.take(1)?[0] {
        0 => None,
        _ => Some((r.params(&config)?, r.params(&config)?)),
    };
    let chunks_seen = r.u64()?;
    if r.pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(Checkpoint {
        vocab,
        model: LstmModel::from_params(config, params),
        optimizer: Optimizer {
            kind,
            lr,
            clip_norm: (clip >= 0.0).then_some(clip),
            step,
            moments,
        },
        chunks_seen,
    })
}

/// Write through a temporary file so an interrupted save never leaves a
/// truncated checkpoint behind.
pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), NetError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
        write_checkpoint(&mut f, ckpt)?;
        f.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, NetError> {
    let mut f = std::io::BufReader::new(fs::File::open(path)?);
    read_checkpoint(&mut f)
}

fn put_params(buf: &mut Vec<u8>, params: &Params) {
    for t in params.tensors() {
        buf.extend_from_slice(&(t.ndim() as u32).to_le_bytes());
        for &d in t.shape() {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in t.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn bad(msg: &str) -> NetError {
    NetError::Checkpoint(msg.to_string())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| bad("truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], NetError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, NetError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, NetError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, NetError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn params(&mut self, config: &ModelConfig) -> Result<Params, NetError> {
        let mut params = Params::zeros(config);
        for mut t in params.tensors_mut() {
            let ndim = self.u32()? as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                shape.push(self.u32()? as usize);
            }
            if shape != t.shape() {
                return Err(NetError::Shape(format!(
                    "stored tensor {:?}, expected {:?}",
                    shape,
                    t.shape()
                )));
            }
            for v in t.iter_mut() {
                *v = self.f64()?;
            }
        }
        Ok(params)
    }
}
