use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{NetworkModel, DROPOUT_RATE};
use crate::error::{invalid, Error, Result};
use crate::synth::LabeledIqDataset;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 64,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            dropout_rate: DROPOUT_RATE,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return invalid("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return invalid("batch size must be at least 1");
        }
        if self.dropout_rate != DROPOUT_RATE {
            return invalid(format!("dropout rate is fixed at {DROPOUT_RATE}"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return invalid("Adam betas must lie in [0, 1) and epsilon must be positive");
        }
        Ok(())
    }
}

/// Adam with bias-corrected moment estimates, one moment pair per layer.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: i32,
}

impl Adam {
    pub fn new(model: &NetworkModel, cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
            m: model.zero_grads(),
            v: model.zero_grads(),
            step: 0,
        }
    }

    pub fn update(&mut self, model: &mut NetworkModel, grads: &[Vec<f64>]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (l, layer) in model.layers.iter_mut().enumerate() {
            let params = layer.params_mut();
            for (i, p) in params.iter_mut().enumerate() {
                let g = grads[l][i];
                let m = &mut self.m[l][i];
                let v = &mut self.v[l][i];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.epsilon);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training loss per epoch.
    pub loss_history: Vec<f64>,
}

/// Minimizes categorical cross-entropy with Adam over shuffled mini-batches.
/// Dropout is active during training only. Deterministic given `cfg.seed`.
pub fn train(model: &mut NetworkModel, data: &LabeledIqDataset, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.is_empty() {
        return invalid("training set is empty");
    }
    if data.packet_len() != model.packet_len {
        return invalid(format!(
            "dataset packets have {} samples, model expects {}",
            data.packet_len(),
            model.packet_len
        ));
    }
    let inputs: Vec<Vec<f64>> = data.packets.iter().map(|p| p.features()).collect();
    let classes: Vec<usize> = data.packets.iter().map(|p| p.label.index()).collect();

    let mut adam = Adam::new(model, cfg);
    let mut order_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    dropout_rng.set_stream(1);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut order_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = model.zero_grads();
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += model.accumulate(&inputs[i], classes[i], Some(&mut dropout_rng), &mut grads);
            }
            let n = batch.len() as f64;
            for g in grads.iter_mut().flatten() {
                *g /= n;
            }
            if !batch_loss.is_finite() {
                return Err(Error::Training(format!("loss diverged in epoch {epoch}")));
            }
            adam.update(model, &grads);
            epoch_loss += batch_loss;
        }
        history.push(epoch_loss / inputs.len() as f64);
    }
    if cfg.epochs > 0 {
        model.trained = true;
    }
    Ok(TrainReport { loss_history: history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::model::build_fnn;
    use crate::synth::generate_dataset;

    #[test]
    fn zero_epochs_leaves_model_unchanged() {
        let data = generate_dataset(20, 16, 0.0, 0.5, 1).unwrap();
        let mut m = build_fnn(16, 2).unwrap();
        let before = m.clone();
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        let r = train(&mut m, &data, &cfg).unwrap();
        assert!(r.loss_history.is_empty());
        assert_eq!(m, before);
        assert!(!m.trained);
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = generate_dataset(5, 16, 0.0, 0.5, 1).unwrap();
        let mut m = build_fnn(32, 2).unwrap();
        assert!(train(&mut m, &data, &TrainConfig::default()).is_err());
        let mut m = build_fnn(16, 2).unwrap();
        let cfg = TrainConfig { dropout_rate: 0.5, ..Default::default() };
        assert!(train(&mut m, &data, &cfg).is_err());
        let mut empty = data.clone();
        empty.packets.clear();
        assert!(train(&mut m, &empty, &TrainConfig::default()).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let data = generate_dataset(20, 16, 10.0, 0.5, 1).unwrap();
        let mut m = build_fnn(16, 2).unwrap();
        m.layers[0].params_mut()[0] = f64::NAN;
        let cfg = TrainConfig { epochs: 1, ..Default::default() };
        assert!(matches!(train(&mut m, &data, &cfg), Err(Error::Training(_))));
    }

    #[test]
    fn training_is_deterministic() {
        let data = generate_dataset(40, 16, 5.0, 0.5, 3).unwrap();
        let cfg = TrainConfig { epochs: 2, batch_size: 16, seed: 5, ..Default::default() };
        let mut a = build_fnn(16, 1).unwrap();
        let mut b = build_fnn(16, 1).unwrap();
        let ra = train(&mut a, &data, &cfg).unwrap();
        let rb = train(&mut b, &data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert!(a.trained);
    }
}
