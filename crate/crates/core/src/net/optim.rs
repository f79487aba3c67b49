use super::model::Params;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn adam() -> OptimizerKind {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First-order optimizer with optional global-norm gradient clipping.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub clip_norm: Option<f64>,
    pub step: u64,
    /// Adam moment estimates, allocated on first use.
    pub moments: Option<(Params, Params)>,
}

impl Optimizer {
    pub fn adam(lr: f64) -> Optimizer {
        Optimizer {
            kind: OptimizerKind::adam(),
            lr,
            clip_norm: Some(5.0),
            step: 0,
            moments: None,
        }
    }

    pub fn sgd(lr: f64) -> Optimizer {
        Optimizer {
            kind: OptimizerKind::Sgd,
            lr,
            clip_norm: None,
            step: 0,
            moments: None,
        }
    }

    pub fn with_clip_norm(mut self, clip: Option<f64>) -> Optimizer {
        self.clip_norm = clip;
        self
    }

    pub fn apply_update(&mut self, params: &mut Params, grads: &Params) {
        let clipped;
        let grads = match self.clip_norm {
            Some(limit) => {
                let norm = grads.global_norm();
                if norm > limit {
                    let mut g = grads.clone();
                    g.scale(limit / norm);
                    clipped = g;
                    &clipped
                } else {
                    grads
                }
            }
            None => grads,
        };
        self.step += 1;
        let lr = self.lr;
        match self.kind {
            OptimizerKind::Sgd => {
                for (mut p, g) in params.tensors_mut().into_iter().zip(grads.tensors()) {
                    p.scaled_add(-lr, &g);
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                let (m, v) = self
                    .moments
                    .get_or_insert_with(|| (params.zeros_like(), params.zeros_like()));
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                let tensors = params
                    .tensors_mut()
                    .into_iter()
                    .zip(grads.tensors())
                    .zip(m.tensors_mut().into_iter().zip(v.tensors_mut()));
                for ((mut p, g), (mut m, mut v)) in tensors {
                    ndarray::Zip::from(&mut p)
                        .and(&g)
                        .and(&mut m)
                        .and(&mut v)
                        .for_each(|p, &g, m, v| {
                            *m = beta1 * *m + (1.0 - beta1) * g;
                            *v = beta2 * *v + (1.0 - beta2) * g * g;
                            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                        });
                }
            }
        }
    }
}
