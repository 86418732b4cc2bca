use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{accuracy, cross_entropy, one_hot};
use super::{Network, NnError, Optimizer};
use crate::data::Dataset;
use crate::space::OptimizerKind;

/// Fixed learning rate for both optimizers.
pub const LEARNING_RATE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    /// Drives the per-epoch shuffles.
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(NnError::Config("epochs and batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NnError::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-sample training loss over the epoch.
    pub train_loss: f64,
    pub eval_accuracy: f64,
}

/// Trains `network` and evaluates on `eval` after every epoch.
pub fn train(
    network: &mut Network,
    train_set: &Dataset,
    config: &TrainConfig,
    eval: &Dataset,
) -> Result<Vec<EpochStats>, NnError> {
    train_with(network, train_set, config, eval, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with<F: FnMut(&EpochStats)>(
    network: &mut Network,
    train_set: &Dataset,
    config: &TrainConfig,
    eval: &Dataset,
    mut on_epoch: F,
) -> Result<Vec<EpochStats>, NnError> {
    config.validate()?;
    if train_set.is_empty() || eval.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let classes = network.num_classes();
    if let Some(&l) = train_set.labels.iter().chain(&eval.labels).find(|&&l| l as usize >= classes) {
        return Err(NnError::Config(format!("label {l} outside 0..{classes}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut stats = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let (x, labels) = train_set.batch(chunk);
            let targets = one_hot(&labels, classes);
            let probs = network.forward(&x)?;
            let loss = cross_entropy(&probs, &targets);
            if !loss.is_finite() {
                network.clear_cache();
                return Err(NnError::Diverged { epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            network.backward(&targets)?;
            optimizer.step(network);
        }
        network.clear_cache();
        if network.parameters().iter().any(|t| !t.all_finite()) {
            return Err(NnError::Diverged { epoch });
        }
        let s = EpochStats {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            eval_accuracy: accuracy(network, eval)?,
        };
        on_epoch(&s);
        stats.push(s);
    }
    Ok(stats)
}
