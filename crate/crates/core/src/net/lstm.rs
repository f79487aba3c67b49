use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView2, Axis};

/// One LSTM layer with the four gates fused column-wise in the order
/// input, forget, candidate, output: `w` is `input_dim x 4*units`, `u` is
/// `units x 4*units`, `b` has `4*units` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

/// Recurrent state for a set of independent streams, one row per stream.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Array2<f64>,
    pub c: Array2<f64>,
}

impl LstmState {
    pub fn zeros(streams: usize, units: usize) -> LstmState {
        LstmState {
            h: Array2::zeros((streams, units)),
            c: Array2::zeros((streams, units)),
        }
    }

    pub fn reset(&mut self) {
        self.h.fill(0.0);
        self.c.fill(0.0);
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().chain(self.c.iter()).all(|v| v.is_finite())
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activations kept from a forward pass over a whole sequence. Rows are
/// time-major: row `t * batch + b`.
#[derive(Debug, Clone)]
pub(crate) struct SequenceCache {
    /// Post-activation gates.
    pub gates: Array2<f64>,
    pub c: Array2<f64>,
    pub tanh_c: Array2<f64>,
    pub h: Array2<f64>,
}

impl LstmLayer {
    pub fn zeros(input_dim: usize, units: usize) -> LstmLayer {
        LstmLayer {
            w: Array2::zeros((input_dim, 4 * units)),
            u: Array2::zeros((units, 4 * units)),
            b: Array1::zeros(4 * units),
        }
    }

    pub fn units(&self) -> usize {
        self.u.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }

    /// Standard gate equations for one time step on dense inputs:
    /// `i,f,o = σ(xW + hU + b)`, `g = tanh(..)`, `c' = f⊙c + i⊙g`,
    /// `h' = o⊙tanh(c')`.
    pub fn step(&self, state: &LstmState, x: ArrayView2<f64>) -> LstmState {
        assert_eq!(x.ncols(), self.input_dim(), "input width");
        assert_eq!(x.nrows(), state.h.nrows(), "stream count");
        let mut pre = x.dot(&self.w);
        self.step_projected(state, &mut pre)
    }

    /// Step with the input projection `xW` already in `pre`.
    pub(crate) fn step_projected(&self, state: &LstmState, pre: &mut Array2<f64>) -> LstmState {
        let n = pre.nrows();
        let units = self.units();
        general_mat_mul(1.0, &state.h, &self.u, 1.0, pre);
        let mut next = LstmState::zeros(n, units);
        let mut tanh_c = Array2::zeros((n, units));
        activate(
            pre.as_slice_mut().expect("contiguous"),
            self.b.as_slice().expect("contiguous"),
            state.c.as_slice().expect("contiguous"),
            next.c.as_slice_mut().expect("contiguous"),
            tanh_c.as_slice_mut().expect("contiguous"),
            next.h.as_slice_mut().expect("contiguous"),
            units,
        );
        next
    }

    /// Run a full sequence from a zero state. `pre` holds the input
    /// projection for every time-major row and is consumed as gate storage.
    pub(crate) fn forward_sequence(&self, mut pre: Array2<f64>, steps: usize, batch: usize) -> SequenceCache {
        let units = self.units();
        let rows = steps * batch;
        assert_eq!(pre.dim(), (rows, 4 * units));
        let mut c = Array2::zeros((rows, units));
        let mut tanh_c = Array2::zeros((rows, units));
        let mut h = Array2::zeros((rows, units));
        let mut h_prev = Array2::zeros((batch, units));
        let zero_c = vec![0.0; batch * units];
        let bias = self.b.as_slice().expect("contiguous");
        for t in 0..steps {
            let r = t * batch..(t + 1) * batch;
            let mut a_t = pre.slice_mut(s![r.clone(), ..]);
            if t > 0 {
                general_mat_mul(1.0, &h_prev, &self.u, 1.0, &mut a_t);
            }
            let (c_done, mut c_rest) = c.view_mut().split_at(Axis(0), t * batch);
            let c_prev: &[f64] = if t == 0 {
                &zero_c
            } else {
                let prev = c_done.slice_move(s![(t - 1) * batch.., ..]);
                prev.into_slice().expect("contiguous")
            };
            let c_t = c_rest.slice_mut(s![..batch, ..]);
            let mut tc_t = tanh_c.slice_mut(s![r.clone(), ..]);
            let mut h_t = h.slice_mut(s![r.clone(), ..]);
            activate(
                a_t.as_slice_mut().expect("contiguous"),
                bias,
                c_prev,
                c_t.into_slice().expect("contiguous"),
                tc_t.as_slice_mut().expect("contiguous"),
                h_t.as_slice_mut().expect("contiguous"),
                units,
            );
            h_prev.assign(&h.slice(s![r, ..]));
        }
        SequenceCache {
            gates: pre,
            c,
            tanh_c,
            h,
        }
    }

    /// Backpropagate through time. `d_h` is the loss gradient w.r.t. every
    /// hidden output (time-major). Returns the gate pre-activation gradients
    /// and accumulates the recurrent and bias gradients into `grad`.
    pub(crate) fn backward_sequence(
        &self,
        cache: &SequenceCache,
        d_h: &Array2<f64>,
        steps: usize,
        batch: usize,
        grad: &mut LstmLayer,
    ) -> Array2<f64> {
        let units = self.units();
        let rows = steps * batch;
        let mut d_a = Array2::zeros((rows, 4 * units));
        let mut dh_next: Array2<f64> = Array2::zeros((batch, units));
        let mut dc_next = vec![0.0; batch * units];
        let gates = cache.gates.as_slice().expect("contiguous");
        let c = cache.c.as_slice().expect("contiguous");
        let tanh_c = cache.tanh_c.as_slice().expect("contiguous");
        let dh_above = d_h.as_slice().expect("contiguous");
        let u_t = self.u.t();
        for t in (0..steps).rev() {
            {
                let da = d_a.as_slice_mut().expect("contiguous");
                let dh_rec = dh_next.as_slice().expect("contiguous");
                for b in 0..batch {
                    let row = t * batch + b;
                    let g_row = &gates[row * 4 * units..(row + 1) * 4 * units];
                    let da_row = &mut da[row * 4 * units..(row + 1) * 4 * units];
                    for j in 0..units {
                        let k = row * units + j;
                        let local = b * units + j;
                        let dh = dh_above[k] + dh_rec[local];
                        let (i, f, g, o) = (
                            g_row[j],
                            g_row[units + j],
                            g_row[2 * units + j],
                            g_row[3 * units + j],
                        );
                        let tc = tanh_c[k];
                        let c_prev = if t > 0 { c[k - batch * units] } else { 0.0 };
                        let d_o = dh * tc;
                        let dc = dc_next[local] + dh * o * (1.0 - tc * tc);
                        da_row[j] = dc * g * i * (1.0 - i);
                        da_row[units + j] = dc * c_prev * f * (1.0 - f);
                        da_row[2 * units + j] = dc * i * (1.0 - g * g);
                        da_row[3 * units + j] = d_o * o * (1.0 - o);
                        dc_next[local] = dc * f;
                    }
                }
            }
            let da_t = d_a.slice(s![t * batch..(t + 1) * batch, ..]);
            general_mat_mul(1.0, &da_t, &u_t, 0.0, &mut dh_next);
        }
        if steps > 1 {
            let h_prev = cache.h.slice(s![..(steps - 1) * batch, ..]);
            let da_next = d_a.slice(s![batch.., ..]);
            general_mat_mul(1.0, &h_prev.t(), &da_next, 1.0, &mut grad.u);
        }
        grad.b += &d_a.sum_axis(Axis(0));
        d_a
    }
}

/// Apply gate activations in place over rows of `pre` and produce c, tanh(c), h.
fn activate(
    pre: &mut [f64],
    bias: &[f64],
    c_prev: &[f64],
    c: &mut [f64],
    tanh_c: &mut [f64],
    h: &mut [f64],
    units: usize,
) {
    let rows = c.len() / units;
    for r in 0..rows {
        let g_row = &mut pre[r * 4 * units..(r + 1) * 4 * units];
        for j in 0..units {
            let i = sigmoid(g_row[j] + bias[j]);
            let f = sigmoid(g_row[units + j] + bias[units + j]);
            let g = (g_row[2 * units + j] + bias[2 * units + j]).tanh();
            let o = sigmoid(g_row[3 * units + j] + bias[3 * units + j]);
            g_row[j] = i;
            g_row[units + j] = f;
            g_row[2 * units + j] = g;
            g_row[3 * units + j] = o;
            let k = r * units + j;
            let cell = f * c_prev[k] + i * g;
            let tc = cell.tanh();
            c[k] = cell;
            tanh_c[k] = tc;
            h[k] = o * tc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_zero_output() {
        let layer = LstmLayer::zeros(3, 4);
        let state = LstmState::zeros(1, 4);
        let x = ndarray::arr2(&[[0.3, -1.0, 2.0]]);
        let next = layer.step(&state, x.view());
        assert!(next.h.iter().all(|&v| v == 0.0));
        assert!(next.c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bias_only_step_matches_hand_evaluation() {
        let units = 1;
        let mut layer = LstmLayer::zeros(2, units);
        layer.b = ndarray::arr1(&[0.5, -0.25, 0.75, 1.5]);
        let state = LstmState::zeros(1, units);
        let x = Array2::zeros((1, 2));
        let next = layer.step(&state, x.view());
        let i = 1.0 / (1.0 + (-0.5f64).exp());
        let g = 0.75f64.tanh();
        let o = 1.0 / (1.0 + (-1.5f64).exp());
        let c = i * g;
        let h = o * c.tanh();
        assert!((next.c[[0, 0]] - c).abs() < 1e-15);
        assert!((next.h[[0, 0]] - h).abs() < 1e-15);
    }

    #[test]
    fn saturated_forget_gate_holds_the_cell() {
        // Cell starts at 1; input gate closed, forget gate wide open.
        let units = 1;
        let mut layer = LstmLayer::zeros(1, units);
        layer.b = ndarray::arr1(&[-40.0, 40.0, 0.0, 0.0]);
        let mut state = LstmState::zeros(1, units);
        state.c[[0, 0]] = 1.0;
        let x = Array2::zeros((1, 1));
        for _ in 0..60 {
            state = layer.step(&state, x.view());
        }
        assert!((state.c[[0, 0]] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gates_stay_in_unit_interval() {
        let mut layer = LstmLayer::zeros(2, 3);
        layer.w.iter_mut().enumerate().for_each(|(k, v)| *v = (k as f64 * 0.37).sin() * 5.0);
        layer.u.iter_mut().enumerate().for_each(|(k, v)| *v = (k as f64 * 0.11).cos() * 5.0);
        let steps = 4;
        let mut pre = Array2::zeros((steps, 12));
        let x = Array2::from_shape_fn((steps, 2), |(t, j)| (t + j) as f64 - 1.5);
        general_mat_mul(1.0, &x, &layer.w, 0.0, &mut pre);
        let cache = layer.forward_sequence(pre, steps, 1);
        assert!(cache.gates.iter().all(|&g| (-1.0..=1.0).contains(&g)));
        let sig_cols = [0, 1, 2, 3, 4, 5, 9, 10, 11];
        for r in 0..steps {
            for &col in &sig_cols {
                let g = cache.gates[[r, col]];
                assert!(g > 0.0 && g < 1.0);
            }
        }
        assert!(cache.h.iter().all(|v| v.is_finite()));
    }
}
