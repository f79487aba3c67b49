use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Array3, ArrayView2, ArrayViewD, ArrayViewMutD, Axis};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::lstm::{LstmLayer, LstmState, SequenceCache};
use super::NetError;
use crate::encode::OneHotBatch;

/// Layer sizes and regularization of the generator network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub lstm_units: usize,
    pub dense_units: usize,
    /// Dropout rate on LSTM input connections.
    pub dropout: f64,
}

impl ModelConfig {
    /// Two 256-unit LSTM layers, two 128-unit rectified dense layers and 0.1
    /// input dropout.
    pub fn full(vocab_size: usize) -> ModelConfig {
        ModelConfig {
            vocab_size,
            lstm_units: 256,
            dense_units: 128,
            dropout: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Dense {
        Dense {
            w: Array2::zeros((input, output)),
            b: Array1::zeros(output),
        }
    }
}

/// Every trainable tensor of the network. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub lstm1: LstmLayer,
    pub lstm2: LstmLayer,
    pub dense1: Dense,
    pub dense2: Dense,
    pub out: Dense,
}

pub const PARAM_NAMES: [&str; 12] = [
    "lstm1.w", "lstm1.u", "lstm1.b", "lstm2.w", "lstm2.u", "lstm2.b", "dense1.w", "dense1.b",
    "dense2.w", "dense2.b", "out.w", "out.b",
];

impl Params {
    pub fn zeros(config: &ModelConfig) -> Params {
        let (v, h, d) = (config.vocab_size, config.lstm_units, config.dense_units);
        Params {
            lstm1: LstmLayer::zeros(v, h),
            lstm2: LstmLayer::zeros(h, h),
            dense1: Dense::zeros(h, d),
            dense2: Dense::zeros(d, d),
            out: Dense::zeros(d, v),
        }
    }

    pub fn zeros_like(&self) -> Params {
        let mut p = self.clone();
        for mut t in p.tensors_mut() {
            t.fill(0.0);
        }
        p
    }

    /// Tensors in [`PARAM_NAMES`] order.
    pub fn tensors(&self) -> Vec<ArrayViewD<'_, f64>> {
        vec![
            self.lstm1.w.view().into_dyn(),
            self.lstm1.u.view().into_dyn(),
            self.lstm1.b.view().into_dyn(),
            self.lstm2.w.view().into_dyn(),
            self.lstm2.u.view().into_dyn(),
            self.lstm2.b.view().into_dyn(),
            self.dense1.w.view().into_dyn(),
            self.dense1.b.view().into_dyn(),
            self.dense2.w.view().into_dyn(),
            self.dense2.b.view().into_dyn(),
            self.out.w.view().into_dyn(),
            self.out.b.view().into_dyn(),
        ]
    }

    pub fn tensors_mut(&mut self) -> Vec<ArrayViewMutD<'_, f64>> {
        vec![
            self.lstm1.w.view_mut().into_dyn(),
            self.lstm1.u.view_mut().into_dyn(),
            self.lstm1.b.view_mut().into_dyn(),
            self.lstm2.w.view_mut().into_dyn(),
            self.lstm2.u.view_mut().into_dyn(),
            self.lstm2.b.view_mut().into_dyn(),
            self.dense1.w.view_mut().into_dyn(),
            self.dense1.b.view_mut().into_dyn(),
            self.dense2.w.view_mut().into_dyn(),
            self.dense2.b.view_mut().into_dyn(),
            self.out.w.view_mut().into_dyn(),
            self.out.b.view_mut().into_dyn(),
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter().map(|v| v * v).collect::<Vec<_>>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for mut t in self.tensors_mut() {
            t.mapv_inplace(|v| v * factor);
        }
    }
}

/// Stacked LSTM generator: one-hot input, LSTM, LSTM, two time-distributed
/// rectified dense layers and a softmax over the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub config: ModelConfig,
    pub params: Params,
}

/// Recurrent state of both LSTM layers for a set of sampling streams.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamState {
    pub layer1: LstmState,
    pub layer2: LstmState,
}

impl StreamState {
    pub fn reset(&mut self) {
        self.layer1.reset();
        self.layer2.reset();
    }

    pub fn streams(&self) -> usize {
        self.layer1.h.nrows()
    }
}

struct ForwardCache {
    steps: usize,
    batch: usize,
    /// Time-major symbol index per row.
    inputs: Vec<usize>,
    /// Dropout multiplier on the single hot input element per row.
    input_scale: Option<Vec<f64>>,
    l1: SequenceCache,
    mask2: Option<Array2<f64>>,
    x2: Array2<f64>,
    l2: SequenceCache,
    z1: Array2<f64>,
    z2: Array2<f64>,
    probs: Array2<f64>,
}

/// Activations of the two dense layers and the output probabilities.
type HeadOutput = (Array2<f64>, Array2<f64>, Array2<f64>);

impl LstmModel {
    /// Glorot-uniform input and dense matrices, orthogonal recurrent blocks,
    /// forget-gate bias one, all other biases zero.
    pub fn new<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> LstmModel {
        let mut params = Params::zeros(&config);
        let h = config.lstm_units;
        for layer in [&mut params.lstm1, &mut params.lstm2] {
            for gate in 0..4 {
                let mut block = layer.w.slice_mut(s![.., gate * h..(gate + 1) * h]);
                glorot_uniform(&mut block, rng);
                let q = orthogonal(h, rng);
                layer.u.slice_mut(s![.., gate * h..(gate + 1) * h]).assign(&q);
            }
            layer.b.slice_mut(s![h..2 * h]).fill(1.0);
        }
        for dense in [&mut params.dense1, &mut params.dense2, &mut params.out] {
            let mut w = dense.w.view_mut();
            glorot_uniform(&mut w, rng);
        }
        LstmModel { config, params }
    }

    pub fn from_params(config: ModelConfig, params: Params) -> LstmModel {
        LstmModel { config, params }
    }

    pub fn new_state(&self, streams: usize) -> StreamState {
        let h = self.config.lstm_units;
        StreamState {
            layer1: LstmState::zeros(streams, h),
            layer2: LstmState::zeros(streams, h),
        }
    }

    /// Per-position next-character distributions, shape
    /// `(batch, seq_len, vocab)`. Dropout is active only when `training`.
    pub fn forward(
        &self,
        batch: &OneHotBatch,
        training: bool,
        rng: &mut dyn RngCore,
    ) -> Result<Array3<f64>, NetError> {
        self.check_batch(batch)?;
        let indices = batch.indices().view();
        let cache = self.forward_cached(indices, if training { Some(rng) } else { None })?;
        let (b, t, v) = (cache.batch, cache.steps, self.config.vocab_size);
        let mut out = Array3::zeros((b, t, v));
        for step in 0..t {
            for row in 0..b {
                out.slice_mut(s![row, step, ..])
                    .assign(&cache.probs.row(step * b + row));
            }
        }
        Ok(out)
    }

    /// Mean next-character cross-entropy over every position of the batch,
    /// without dropout.
    pub fn loss(&self, batch: &OneHotBatch) -> Result<f64, NetError> {
        self.check_batch(batch)?;
        let (inputs, targets) = split_targets(batch)?;
        let cache = self.forward_cached(inputs, None)?;
        cross_entropy(&cache.probs, &targets)
    }

    /// Loss and the gradient of every parameter. Passing an RNG enables
    /// input dropout for the pass.
    pub fn loss_and_grads(
        &self,
        batch: &OneHotBatch,
        dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<(f64, Params), NetError> {
        self.check_batch(batch)?;
        let (inputs, targets) = split_targets(batch)?;
        let cache = self.forward_cached(inputs, dropout_rng)?;
        let loss = cross_entropy(&cache.probs, &targets)?;
        let grads = self.backward(&cache, &targets);
        Ok((loss, grads))
    }

    /// Advance every stream by one input symbol and return the softmax
    /// output per stream.
    pub fn step(&self, state: &mut StreamState, inputs: &[usize]) -> Result<Array2<f64>, NetError> {
        let n = inputs.len();
        assert_eq!(state.streams(), n, "one input per stream");
        let p = &self.params;
        let mut pre1 = Array2::zeros((n, 4 * self.config.lstm_units));
        for (r, &k) in inputs.iter().enumerate() {
            pre1.row_mut(r).assign(&p.lstm1.w.row(k));
        }
        state.layer1 = p.lstm1.step_projected(&state.layer1, &mut pre1);
        let mut pre2 = state.layer1.h.dot(&p.lstm2.w);
        state.layer2 = p.lstm2.step_projected(&state.layer2, &mut pre2);
        if !state.layer1.is_finite() || !state.layer2.is_finite() {
            return Err(NetError::NonFinite("lstm state"));
        }
        let (_, _, probs) = self.head(&state.layer2.h)?;
        Ok(probs)
    }

    fn check_batch(&self, batch: &OneHotBatch) -> Result<(), NetError> {
        if batch.vocab_size() != self.config.vocab_size {
            return Err(NetError::Shape(format!(
                "batch vocabulary {} != model vocabulary {}",
                batch.vocab_size(),
                self.config.vocab_size
            )));
        }
        Ok(())
    }

    /// Dense head: two rectified layers and the softmax output.
    fn head(&self, h: &Array2<f64>) -> Result<HeadOutput, NetError> {
        let p = &self.params;
        let mut z1 = h.dot(&p.dense1.w);
        z1 += &p.dense1.b;
        z1.mapv_inplace(|v| v.max(0.0));
        let mut z2 = z1.dot(&p.dense2.w);
        z2 += &p.dense2.b;
        z2.mapv_inplace(|v| v.max(0.0));
        let mut logits = z2.dot(&p.out.w);
        logits += &p.out.b;
        softmax_rows(&mut logits);
        if !logits.iter().all(|v| v.is_finite()) {
            return Err(NetError::NonFinite("softmax output"));
        }
        Ok((z1, z2, logits))
    }

    fn forward_cached(
        &self,
        inputs: ArrayView2<u8>,
        mut dropout_rng: Option<&mut dyn RngCore>,
    ) -> Result<ForwardCache, NetError> {
        let (batch, steps) = inputs.dim();
        let p = &self.params;
        let h = self.config.lstm_units;
        let rows = batch * steps;
        let rate = self.config.dropout;
        let keep = 1.0 / (1.0 - rate);
        let dropout = rate > 0.0 && dropout_rng.is_some();

        // Time-major symbol indices.
        let mut idx = Vec::with_capacity(rows);
        for t in 0..steps {
            for b in 0..batch {
                idx.push(inputs[[b, t]] as usize);
            }
        }

        let (pre1, input_scale) = self.project_inputs(&idx, dropout_rng.as_deref_mut());
        let l1 = p.lstm1.forward_sequence(pre1, steps, batch);
        check_finite(&l1.h, "lstm1")?;

        let (x2, mask2) = if dropout {
            let rng = dropout_rng.as_mut().expect("rng");
            let mask = Array2::from_shape_simple_fn((rows, h), || {
                if rng.random::<f64>() < rate {
                    0.0
                } else {
                    keep
                }
            });
            (&l1.h * &mask, Some(mask))
        } else {
            (l1.h.clone(), None)
        };
        let mut pre2 = Array2::zeros((rows, 4 * h));
        general_mat_mul(1.0, &x2, &p.lstm2.w, 0.0, &mut pre2);
        let l2 = p.lstm2.forward_sequence(pre2, steps, batch);
        check_finite(&l2.h, "lstm2")?;

        let (z1, z2, probs) = self.head(&l2.h)?;
        Ok(ForwardCache {
            steps,
            batch,
            inputs: idx,
            input_scale,
            l1,
            mask2,
            x2,
            l2,
            z1,
            z2,
            probs,
        })
    }

    /// First-layer input projection. The one-hot product reduces to a row
    /// gather; inverted dropout scales the single hot element per row.
    fn project_inputs<R: RngCore + ?Sized>(
        &self,
        idx: &[usize],
        dropout_rng: Option<&mut R>,
    ) -> (Array2<f64>, Option<Vec<f64>>) {
        let w = &self.params.lstm1.w;
        let rate = self.config.dropout;
        let mut pre = Array2::zeros((idx.len(), w.ncols()));
        match dropout_rng {
            Some(rng) if rate > 0.0 => {
                let keep = 1.0 / (1.0 - rate);
                let scales: Vec<f64> = idx
                    .iter()
                    .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
                    .collect();
                for (r, (&k, &sc)) in idx.iter().zip(&scales).enumerate() {
                    if sc != 0.0 {
                        pre.row_mut(r).scaled_add(sc, &w.row(k));
                    }
                }
                (pre, Some(scales))
            }
            _ => {
                for (r, &k) in idx.iter().enumerate() {
                    pre.row_mut(r).assign(&w.row(k));
                }
                (pre, None)
            }
        }
    }

    fn backward(&self, cache: &ForwardCache, targets: &[usize]) -> Params {
        let p = &self.params;
        let mut g = p.zeros_like();
        let n = cache.probs.nrows() as f64;

        // Softmax with cross-entropy: d logits = (p - y) / N.
        let mut d_logits = cache.probs.clone();
        for (r, &k) in targets.iter().enumerate() {
            d_logits[[r, k]] -= 1.0;
        }
        d_logits.mapv_inplace(|v| v / n);

        general_mat_mul(1.0, &cache.z2.t(), &d_logits, 0.0, &mut g.out.w);
        g.out.b = d_logits.sum_axis(Axis(0));
        let mut d_z2 = d_logits.dot(&p.out.w.t());
        relu_backward(&mut d_z2, &cache.z2);

        general_mat_mul(1.0, &cache.z1.t(), &d_z2, 0.0, &mut g.dense2.w);
        g.dense2.b = d_z2.sum_axis(Axis(0));
        let mut d_z1 = d_z2.dot(&p.dense2.w.t());
        relu_backward(&mut d_z1, &cache.z1);

        general_mat_mul(1.0, &cache.l2.h.t(), &d_z1, 0.0, &mut g.dense1.w);
        g.dense1.b = d_z1.sum_axis(Axis(0));
        let d_h2 = d_z1.dot(&p.dense1.w.t());

        let d_a2 = p
            .lstm2
            .backward_sequence(&cache.l2, &d_h2, cache.steps, cache.batch, &mut g.lstm2);
        general_mat_mul(1.0, &cache.x2.t(), &d_a2, 0.0, &mut g.lstm2.w);
        let mut d_h1 = d_a2.dot(&p.lstm2.w.t());
        if let Some(mask) = &cache.mask2 {
            d_h1 *= mask;
        }

        let d_a1 = p
            .lstm1
            .backward_sequence(&cache.l1, &d_h1, cache.steps, cache.batch, &mut g.lstm1);
        // Scatter-add for the gathered one-hot projection.
        for (r, &k) in cache.inputs.iter().enumerate() {
            let scale = cache.input_scale.as_ref().map_or(1.0, |s| s[r]);
            if scale != 0.0 {
                g.lstm1.w.row_mut(k).scaled_add(scale, &d_a1.row(r));
            }
        }
        g
    }
}

fn split_targets(batch: &OneHotBatch) -> Result<(ArrayView2<'_, u8>, Vec<usize>), NetError> {
    let idx = batch.indices();
    let (b, t) = idx.dim();
    if t < 2 {
        return Err(NetError::Shape("sequences need at least two positions".into()));
    }
    let inputs = idx.slice(s![.., ..t - 1]);
    let mut targets = Vec::with_capacity(b * (t - 1));
    for step in 1..t {
        for row in 0..b {
            targets.push(idx[[row, step]] as usize);
        }
    }
    Ok((inputs, targets))
}

fn cross_entropy(probs: &Array2<f64>, targets: &[usize]) -> Result<f64, NetError> {
    let total: f64 = targets
        .iter()
        .enumerate()
        .map(|(r, &k)| -probs[[r, k]].ln())
        .sum();
    let loss = total / targets.len() as f64;
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(NetError::NonFinite("loss"))
    }
}

pub(crate) fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

fn relu_backward(grad: &mut Array2<f64>, activation: &Array2<f64>) {
    ndarray::Zip::from(grad)
        .and(activation)
        .for_each(|g, &a| {
            if a <= 0.0 {
                *g = 0.0;
            }
        });
}

fn check_finite(a: &Array2<f64>, layer: &'static str) -> Result<(), NetError> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NetError::NonFinite(layer))
    }
}

fn glorot_uniform<R: Rng + ?Sized>(w: &mut ndarray::ArrayViewMut2<f64>, rng: &mut R) {
    let (fan_in, fan_out) = w.dim();
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
    w.mapv_inplace(|_| dist.sample(rng));
}

/// Random orthogonal matrix from modified Gram-Schmidt on a Gaussian draw.
fn orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Array2<f64> {
    let mut q: Array2<f64> = Array2::from_shape_simple_fn((n, n), || StandardNormal.sample(rng));
    for j in 0..n {
        for k in 0..j {
            let proj = q.column(j).dot(&q.column(k));
            let col_k = q.column(k).to_owned();
            q.column_mut(j).scaled_add(-proj, &col_k);
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{build_vocab, encode_batch};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> (LstmModel, OneHotBatch) {
        let corpus = ["CCO", "c1ccccc1", "CC(=O)N"];
        let vocab = build_vocab(corpus).unwrap();
        let batch = encode_batch(&corpus, &vocab).unwrap();
        let config = ModelConfig {
            vocab_size: vocab.len(),
            lstm_units: 8,
            dense_units: 6,
            dropout: 0.1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (LstmModel::new(config, &mut rng), batch)
    }

    #[test]
    fn outputs_are_distributions() {
        let (model, batch) = tiny();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probs = model.forward(&batch, false, &mut rng).unwrap();
        for row in probs.lanes(Axis(2)) {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn inference_is_deterministic() {
        let (model, batch) = tiny();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = model.forward(&batch, false, &mut rng).unwrap();
        let b = model.forward(&batch, false, &mut rng).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn untrained_loss_is_near_uniform() {
        let (model, batch) = tiny();
        let loss = model.loss(&batch).unwrap();
        let uniform = (model.config.vocab_size as f64).ln();
        assert!((loss - uniform).abs() / uniform < 0.1, "{loss} vs {uniform}");
    }

    #[test]
    fn duplicated_rows_keep_the_mean_loss() {
        let (model, batch) = tiny();
        let doubled = batch.select(&[0, 1, 2, 0, 1, 2]);
        let a = model.loss(&batch).unwrap();
        let b = model.loss(&doubled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn recurrent_blocks_are_orthogonal() {
        let (model, _) = tiny();
        let h = model.config.lstm_units;
        let block = model.params.lstm1.u.slice(s![.., 0..h]).to_owned();
        let eye = block.t().dot(&block);
        for i in 0..h {
            for j in 0..h {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((eye[[i, j]] - expect).abs() < 1e-10);
            }
        }
        assert!(model.params.lstm1.b.slice(s![h..2 * h]).iter().all(|&b| b == 1.0));
    }

    #[test]
    fn dropout_preserves_the_expected_preactivation() {
        let (model, _) = tiny();
        let idx = [0usize, 1, 2, 3];
        let (clean, _) = model.project_inputs(&idx, None::<&mut ChaCha8Rng>);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sum = Array2::<f64>::zeros(clean.dim());
        let masks = 20_000;
        for _ in 0..masks {
            let (pre, _) = model.project_inputs(&idx, Some(&mut rng));
            sum += &pre;
        }
        sum.mapv_inplace(|v| v / masks as f64);
        for (a, b) in sum.iter().zip(clean.iter()) {
            assert!((a - b).abs() <= 0.02 * b.abs().max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn short_batches_are_rejected() {
        let (model, _) = tiny();
        let one = OneHotBatch::from_indices(Array2::zeros((2, 1)), model.config.vocab_size);
        assert!(matches!(model.loss(&one), Err(NetError::Shape(_))));
    }
}
