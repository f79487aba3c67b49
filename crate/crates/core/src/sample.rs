//! Character-by-character generation with temperature-adjusted sampling.

use std::collections::HashSet;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encode::TokenVocab;
use crate::net::{LstmModel, NetError, StreamState};
use crate::smiles::{self, ErrorClass, ParseError, Validity};

/// Probabilities are floored here before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

/// Streams advanced together per network call in [`generate_batch`].
const LOCKSTEP: usize = 128;

/// A stateful next-character predictor.
pub trait CharModel {
    type State;

    fn vocab_size(&self) -> usize;
    /// Fresh zero state for `streams` independent sequences.
    fn init_state(&self, streams: usize) -> Self::State;
    /// Feed one symbol per stream and return the next-symbol distributions,
    /// one row per stream.
    fn step(&self, state: &mut Self::State, inputs: &[usize]) -> Result<Array2<f64>, NetError>;
}

impl CharModel for LstmModel {
    type State = StreamState;

    fn vocab_size(&self) -> usize {
        self.config.vocab_size
    }

    fn init_state(&self, streams: usize) -> StreamState {
        self.new_state(streams)
    }

    fn step(&self, state: &mut StreamState, inputs: &[usize]) -> Result<Array2<f64>, NetError> {
        LstmModel::step(self, state, inputs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub temperature: f64,
    /// Cap on framed length (`!` + body + `E`); usually the vocabulary's.
    pub max_len: usize,
    pub seed: u64,
    pub count: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("temperature must be positive and finite, got {0}")]
    Temperature(f64),
    #[error("count must be at least 1")]
    Count,
    #[error("model has {model} outputs but the vocabulary has {vocab}")]
    VocabMismatch { model: usize, vocab: usize },
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    /// Generated characters without the start and end symbols.
    pub raw: String,
    pub status: Validity,
    /// Present exactly when `status` is valid.
    pub canonical: Option<String>,
}

impl GenerationResult {
    fn from_raw(raw: String, terminated: bool) -> GenerationResult {
        if !terminated {
            let err = ParseError::new(raw.len(), ErrorClass::Other, "no end character before the length cap");
            return GenerationResult {
                raw,
                status: Validity::Invalid(err),
                canonical: None,
            };
        }
        match smiles::parse(&raw) {
            Ok(g) => GenerationResult {
                canonical: Some(smiles::write_canonical(&g)),
                raw,
                status: Validity::Valid,
            },
            Err(e) => GenerationResult {
                raw,
                status: Validity::Invalid(e),
                canonical: None,
            },
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status.is_valid()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub count: usize,
    pub valid: usize,
    pub valid_fraction: f64,
    /// Distinct canonical SMILES over valid results.
    pub unique_fraction: f64,
}

pub fn summarize(results: &[GenerationResult]) -> BatchSummary {
    let valid = results.iter().filter(|r| r.is_valid()).count();
    let distinct: HashSet<&str> = results.iter().filter_map(|r| r.canonical.as_deref()).collect();
    BatchSummary {
        count: results.len(),
        valid,
        valid_fraction: ratio(valid, results.len()),
        unique_fraction: ratio(distinct.len(), valid),
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Reshape a distribution as `exp(ln p / T)`, renormalized. `T = 1` returns
/// the input unchanged.
pub fn apply_temperature(p: &[f64], temperature: f64) -> Vec<f64> {
    assert!(temperature > 0.0, "temperature must be positive");
    if temperature == 1.0 {
        return p.to_vec();
    }
    let logs: Vec<f64> = p.iter().map(|&x| x.max(PROB_FLOOR).ln() / temperature).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut q: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = q.iter().sum();
    for v in &mut q {
        *v /= sum;
    }
    q
}

/// Inverse-CDF draw from a probability vector.
pub fn draw<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let total: f64 = p.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if target < acc {
            return i;
        }
    }
    // Rounding left `target` past the end: take the last non-zero entry.
    p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1)
}

fn check<M: CharModel>(model: &M, vocab: &TokenVocab, config: &SamplerConfig) -> Result<(), SampleError> {
    if !(config.temperature > 0.0 && config.temperature.is_finite()) {
        return Err(SampleError::Temperature(config.temperature));
    }
    if model.vocab_size() != vocab.len() {
        return Err(SampleError::VocabMismatch {
            model: model.vocab_size(),
            vocab: vocab.len(),
        });
    }
    Ok(())
}

/// Generate one molecule from a fresh state.
pub fn generate_one<M: CharModel, R: Rng + ?Sized>(
    model: &M,
    vocab: &TokenVocab,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<GenerationResult, SampleError> {
    check(model, vocab, config)?;
    let mut out = run_streams(model, vocab, config, &mut [rng])?;
    Ok(out.pop().expect("one stream"))
}

/// RNG for stream `i` of a batch seeded with `seed`. Streams do not depend
/// on how they are grouped for evaluation.
pub fn stream_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Generate `config.count` molecules, each stream with its own state and
/// generator.
pub fn generate_batch<M: CharModel>(
    model: &M,
    vocab: &TokenVocab,
    config: &SamplerConfig,
) -> Result<(Vec<GenerationResult>, BatchSummary), SampleError> {
    check(model, vocab, config)?;
    if config.count == 0 {
        return Err(SampleError::Count);
    }
    let mut results = Vec::with_capacity(config.count);
    let mut start = 0;
    while start < config.count {
        let end = (start + LOCKSTEP).min(config.count);
        let mut rngs: Vec<ChaCha8Rng> = (start..end).map(|i| stream_rng(config.seed, i)).collect();
        let mut refs: Vec<&mut ChaCha8Rng> = rngs.iter_mut().collect();
        results.extend(run_streams(model, vocab, config, &mut refs)?);
        start = end;
    }
    let summary = summarize(&results);
    Ok((results, summary))
}

fn run_streams<M: CharModel, R: Rng + ?Sized>(
    model: &M,
    vocab: &TokenVocab,
    config: &SamplerConfig,
    rngs: &mut [&mut R],
) -> Result<Vec<GenerationResult>, SampleError> {
    let n = rngs.len();
    let end = vocab.end_index();
    let mut state = model.init_state(n);
    let mut inputs = vec![vocab.start_index(); n];
    let mut bodies = vec![String::new(); n];
    let mut done = vec![false; n];
    // Symbols that may follow `!`, counting the final `E`.
    let budget = config.max_len.saturating_sub(1);
    for _ in 0..budget {
        let probs = model.step(&mut state, &inputs)?;
        for s in 0..n {
            if done[s] {
                inputs[s] = end;
                continue;
            }
            let p = apply_temperature(probs.row(s).as_slice().expect("row-major"), config.temperature);
            let k = draw(&p, &mut *rngs[s]);
            if k == end {
                done[s] = true;
            } else {
                bodies[s].push(vocab.char_at(k));
            }
            inputs[s] = k;
        }
        if done.iter().all(|&d| d) {
            break;
        }
    }
    Ok(bodies
        .into_iter()
        .zip(done)
        .map(|(raw, terminated)| GenerationResult::from_raw(raw, terminated))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::build_vocab;

    /// Emits a fixed script, then `E` forever.
    struct Scripted {
        vocab: TokenVocab,
        script: Vec<char>,
    }

    impl CharModel for Scripted {
        type State = Vec<usize>;

        fn vocab_size(&self) -> usize {
            self.vocab.len()
        }

        fn init_state(&self, streams: usize) -> Vec<usize> {
            vec![0; streams]
        }

        fn step(&self, state: &mut Vec<usize>, inputs: &[usize]) -> Result<Array2<f64>, NetError> {
            let mut out = Array2::zeros((inputs.len(), self.vocab.len()));
            for (s, pos) in state.iter_mut().enumerate() {
                let c = self.script.get(*pos).copied().unwrap_or('E');
                out[[s, self.vocab.index_of(c).unwrap()]] = 1.0;
                *pos += 1;
            }
            Ok(out)
        }
    }

    fn config(count: usize) -> SamplerConfig {
        SamplerConfig {
            temperature: 1.0,
            max_len: 10,
            seed: 3,
            count,
        }
    }

    #[test]
    fn temperature_example() {
        let q = apply_temperature(&[0.7, 0.2, 0.1], 0.5);
        let expect = [0.49 / 0.54, 0.04 / 0.54, 0.01 / 0.54];
        for (a, b) in q.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((expect[0] - 0.9074).abs() < 1e-4);
    }

    #[test]
    fn always_end_gives_empty_invalid() {
        let vocab = build_vocab(["CO"]).unwrap();
        let model = Scripted {
            vocab: vocab.clone(),
            script: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = generate_one(&model, &vocab, &config(1), &mut rng).unwrap();
        assert_eq!(r.raw, "");
        assert!(!r.is_valid());
        assert!(r.canonical.is_none());
    }

    #[test]
    fn scripted_carbon_is_valid() {
        let vocab = build_vocab(["CO"]).unwrap();
        let model = Scripted {
            vocab: vocab.clone(),
            script: vec!['C', 'E'],
        };
        let (results, summary) = generate_batch(&model, &vocab, &config(5)).unwrap();
        assert!(results.iter().all(|r| r.raw == "C" && r.canonical.as_deref() == Some("C")));
        assert_eq!(summary.valid_fraction, 1.0);
        assert_eq!(summary.unique_fraction, 0.2);
    }

    #[test]
    fn length_cap_marks_invalid() {
        let vocab = build_vocab(["CCCCCCCCCCCC"]).unwrap();
        let model = Scripted {
            vocab: vocab.clone(),
            script: vec!['C'; 50],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = generate_one(&model, &vocab, &config(1), &mut rng).unwrap();
        assert_eq!(r.raw.len(), 9);
        match r.status {
            Validity::Invalid(e) => assert_eq!(e.class, ErrorClass::Other),
            Validity::Valid => panic!("unterminated string accepted"),
        }
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let vocab = build_vocab(["CO"]).unwrap();
        let model = Scripted {
            vocab: vocab.clone(),
            script: vec![],
        };
        let mut c = config(0);
        assert!(matches!(generate_batch(&model, &vocab, &c), Err(SampleError::Count)));
        c.count = 1;
        c.temperature = 0.0;
        assert!(matches!(generate_batch(&model, &vocab, &c), Err(SampleError::Temperature(_))));
    }

    #[test]
    fn draw_follows_the_distribution() {
        let p = [0.1, 0.0, 0.6, 0.3];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 4];
        for _ in 0..20_000 {
            counts[draw(&p, &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[2] as f64 / 20_000.0 - 0.6).abs() < 0.02);
    }
}
