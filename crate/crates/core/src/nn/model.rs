use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layer::{Activation, Layer};
use crate::error::{invalid, Result};
use crate::synth::{IqPacket, Label};

pub const DROPOUT_RATE: f64 = 0.1;
pub const CNN_FILTERS: usize = 32;
pub const CNN_KERNEL_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    Fnn,
    Cnn,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::Fnn => "fnn",
            Architecture::Cnn => "cnn",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "fnn" => Some(Architecture::Fnn),
            "cnn" => Some(Architecture::Cnn),
            _ => None,
        }
    }

    pub fn build(self, n_samples: usize, seed: u64) -> Result<NetworkModel> {
        match self {
            Architecture::Fnn => build_fnn(n_samples, seed),
            Architecture::Cnn => build_cnn(n_samples, seed),
        }
    }
}

/// Per-example activations recorded by a forward pass, for backpropagation.
pub(crate) struct Trace {
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    activations: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub architecture: Architecture,
    pub packet_len: usize,
    pub layers: Vec<Layer>,
    pub trained: bool,
}

/// Dense(64)-Drop-Dense(16)-Drop-Dense(4)-Drop-Dense(2, softmax) over the
/// `2 * n_samples` flattened I and Q values.
pub fn build_fnn(n_samples: usize, seed: u64) -> Result<NetworkModel> {
    if n_samples == 0 {
        return invalid("packet length must be at least 1");
    }
    let layers = vec![
        Layer::dense(2 * n_samples, 64, Activation::Relu),
        Layer::Dropout { rate: DROPOUT_RATE },
        Layer::dense(64, 16, Activation::Relu),
        Layer::Dropout { rate: DROPOUT_RATE },
        Layer::dense(16, 4, Activation::Relu),
        Layer::Dropout { rate: DROPOUT_RATE },
        Layer::dense(4, 2, Activation::Softmax),
    ];
    Ok(NetworkModel::initialized(Architecture::Fnn, n_samples, layers, seed))
}

/// Conv2D(32 filters, (1,3), same, ReLU) over a `2 x n_samples x 1` input
/// (rows I and Q), then Flatten-Dense(32)-Drop-Dense(8)-Drop-Dense(2, softmax).
pub fn build_cnn(n_samples: usize, seed: u64) -> Result<NetworkModel> {
    if n_samples < CNN_KERNEL_WIDTH {
        return invalid(format!(
            "packet length {n_samples} is shorter than the kernel width {CNN_KERNEL_WIDTH}"
        ));
    }
    let flat = 2 * n_samples * CNN_FILTERS;
    let layers = vec![
        Layer::conv2d(2, n_samples, 1, CNN_FILTERS, CNN_KERNEL_WIDTH, Activation::Relu),
        Layer::Flatten,
        Layer::dense(flat, 32, Activation::Relu),
        Layer::Dropout { rate: DROPOUT_RATE },
        Layer::dense(32, 8, Activation::Relu),
        Layer::Dropout { rate: DROPOUT_RATE },
        Layer::dense(8, 2, Activation::Softmax),
    ];
    Ok(NetworkModel::initialized(Architecture::Cnn, n_samples, layers, seed))
}

/// Expected trainable parameter count for the two architectures.
pub fn expected_param_count(arch: Architecture, n_samples: usize) -> usize {
    match arch {
        Architecture::Fnn => 2 * n_samples * 64 + 64 + 64 * 16 + 16 + 16 * 4 + 4 + 4 * 2 + 2,
        Architecture::Cnn => 2048 * n_samples + 442,
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl NetworkModel {
    fn initialized(architecture: Architecture, packet_len: usize, mut layers: Vec<Layer>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut layers {
            layer.init_glorot(&mut rng);
        }
        let model = NetworkModel {
            architecture,
            packet_len,
            layers,
            trained: false,
        };
        assert_eq!(
            model.param_count(),
            expected_param_count(architecture, packet_len),
            "layer stack disagrees with the parameter-count formula"
        );
        model
    }

    pub fn input_len(&self) -> usize {
        2 * self.packet_len
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.params().len()).sum()
    }

    pub(crate) fn trace<R: rand::Rng + ?Sized>(&self, input: &[f64], mut rng: Option<&mut R>) -> Trace {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut masks = Vec::with_capacity(self.layers.len());
        activations.push(input.to_vec());
        for layer in &self.layers {
            let mut mask = None;
            let out = layer.forward(activations.last().unwrap(), rng.as_deref_mut(), &mut mask);
            activations.push(out);
            masks.push(mask);
        }
        Trace { activations, masks }
    }

    /// Output-layer logits. Dropout is active only when a generator is given.
    pub fn logits<R: rand::Rng + ?Sized>(&self, input: &[f64], dropout_rng: Option<&mut R>) -> Vec<f64> {
        self.trace(input, dropout_rng).activations.pop().unwrap()
    }

    /// Class probabilities with dropout disabled.
    pub fn predict_proba(&self, input: &[f64]) -> Vec<f64> {
        let t = self.trace::<ChaCha8Rng>(input, None);
        softmax(t.activations.last().unwrap())
    }

    pub fn classify(&self, packet: &IqPacket) -> Label {
        let p = self.predict_proba(&packet.features());
        if p[1] > p[0] {
            Label::Signal
        } else {
            Label::NoSignal
        }
    }

    /// Cross-entropy of one example; accumulates parameter gradients into `grads`.
    pub(crate) fn accumulate<R: rand::Rng + ?Sized>(
        &self,
        input: &[f64],
        class: usize,
        rng: Option<&mut R>,
        grads: &mut [Vec<f64>],
    ) -> f64 {
        let t = self.trace(input, rng);
        let logits = t.activations.last().unwrap();
        let loss = log_sum_exp(logits) - logits[class];
        let mut g = softmax(logits);
        g[class] -= 1.0;
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let next = layer.backward(
                &t.activations[l],
                &t.activations[l + 1],
                t.masks[l].as_deref(),
                &g,
                &mut grads[l],
                l > 0,
            );
            match next {
                Some(n) => g = n,
                None => break,
            }
        }
        loss
    }

    pub(crate) fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.layers.iter().map(|l| vec![0.0; l.params().len()]).collect()
    }

    /// Mean cross-entropy over a batch. With `dropout_seed`, dropout masks are
    /// drawn from a generator seeded with it, in example order.
    pub fn loss(&self, inputs: &[Vec<f64>], classes: &[usize], dropout_seed: Option<u64>) -> f64 {
        self.loss_and_gradients(inputs, classes, dropout_seed).0
    }

    /// Mean cross-entropy and its gradient w.r.t. every layer's parameters.
    pub fn loss_and_gradients(
        &self,
        inputs: &[Vec<f64>],
        classes: &[usize],
        dropout_seed: Option<u64>,
    ) -> (f64, Vec<Vec<f64>>) {
        let mut grads = self.zero_grads();
        let mut rng = dropout_seed.map(ChaCha8Rng::seed_from_u64);
        let mut total = 0.0;
        for (x, &c) in inputs.iter().zip(classes) {
            total += self.accumulate(x, c, rng.as_mut(), &mut grads);
        }
        let n = inputs.len().max(1) as f64;
        for g in grads.iter_mut().flatten() {
            *g /= n;
        }
        (total / n, grads)
    }
}
