//! Seeded training loop: shuffled epochs, bag-level dropout, per-sample
//! Adam or SGD updates.

use log::debug;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::backprop::{loss_and_grad, Gradients};
use super::{ModelConfig, ModelError, ModelParams, Optimizer};
use crate::pathext::ContextBag;
use crate::vocab::Vocabulary;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no context bags to train on")]
    EmptyCorpus,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Trained parameters plus the mean loss of every epoch, in order.
#[derive(Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub epoch_mean_loss: Vec<f64>,
}

/// Train a fresh model on `bags`.
///
/// One ChaCha8 stream seeded from `cfg.seed` drives initialization, epoch
/// shuffles and dropout, so equal inputs give bit-equal parameters. Each
/// epoch visits every bag once in shuffled order; per bag, contexts are
/// dropped independently with probability `1 - dropout_keep` (if all drop,
/// one survivor is drawn uniformly), and a single optimizer step follows.
pub fn train(
    bags: &[ContextBag],
    vocab: &Vocabulary,
    cfg: &ModelConfig,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if bags.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ModelParams::init(cfg, vocab, &mut rng);
    let mut opt = OptimizerState::new(cfg);

    let labels: Vec<u32> = bags.iter().map(|b| vocab.lookup_label(&b.label)).collect();
    let mut order: Vec<usize> = (0..bags.len()).collect();
    let mut epoch_mean_loss = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let bag = &bags[i];
            let dropped = dropout_bag(bag, cfg.dropout_keep, &mut rng);
            let (loss, grads) = loss_and_grad(&params, &dropped, vocab, labels[i])?;
            opt.step(&mut params, &grads);
            total += loss;
        }
        let mean = total / bags.len() as f64;
        debug!("epoch {epoch}: mean loss {mean:.6}");
        epoch_mean_loss.push(mean);
    }

    Ok(TrainOutcome { params, epoch_mean_loss })
}

/// Keep each context with probability `keep`; guarantee at least one
/// survivor by drawing uniformly when everything was dropped.
fn dropout_bag(bag: &ContextBag, keep: f64, rng: &mut impl Rng) -> ContextBag {
    if keep >= 1.0 {
        return bag.clone();
    }
    let kept: Vec<_> =
        bag.contexts.iter().filter(|_| rng.random::<f64>() < keep).cloned().collect();
    let contexts = if kept.is_empty() {
        let i = rng.random_range(0..bag.contexts.len());
        vec![bag.contexts[i].clone()]
    } else {
        kept
    };
    ContextBag { unit_id: bag.unit_id.clone(), label: bag.label.clone(), contexts }
}

struct OptimizerState {
    kind: Optimizer,
    learning_rate: f64,
    /// Adam first/second moments, laid out like the parameters.
    m: Option<Gradients>,
    v: Option<Gradients>,
    t: u64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl OptimizerState {
    fn new(cfg: &ModelConfig) -> Self {
        OptimizerState {
            kind: cfg.optimizer,
            learning_rate: cfg.learning_rate,
            m: None,
            v: None,
            t: 0,
        }
    }

    fn step(&mut self, params: &mut ModelParams, grads: &Gradients) {
        match self.kind {
            Optimizer::Sgd => {
                let lr = self.learning_rate;
                for (p, g) in tensor_pairs(params, grads) {
                    for (pv, gv) in p.iter_mut().zip(g) {
                        *pv -= lr * gv;
                    }
                }
            }
            Optimizer::Adam => {
                if self.m.is_none() {
                    self.m = Some(Gradients::zeros_like(params));
                    self.v = Some(Gradients::zeros_like(params));
                }
                self.t += 1;
                let (m, v) = (self.m.as_mut().unwrap(), self.v.as_mut().unwrap());
                let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
                let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
                let lr = self.learning_rate;
                for ((p, g), (ms, vs)) in
                    tensor_pairs(params, grads).into_iter().zip(moment_pairs(m, v))
                {
                    for (i, pv) in p.iter_mut().enumerate() {
                        let gv = g[i];
                        ms[i] = ADAM_BETA1 * ms[i] + (1.0 - ADAM_BETA1) * gv;
                        vs[i] = ADAM_BETA2 * vs[i] + (1.0 - ADAM_BETA2) * gv * gv;
                        let m_hat = ms[i] / bc1;
                        let v_hat = vs[i] / bc2;
                        *pv -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
    }
}

fn tensor_pairs<'a>(
    params: &'a mut ModelParams,
    grads: &'a Gradients,
) -> Vec<(&'a mut [f64], &'a [f64])> {
    vec![
        (params.value_embeddings.data_mut(), grads.value_embeddings.data()),
        (params.path_embeddings.data_mut(), grads.path_embeddings.data()),
        (params.combine_weights.data_mut(), grads.combine_weights.data()),
        (params.attention.as_mut_slice(), grads.attention.as_slice()),
        (params.label_weights.data_mut(), grads.label_weights.data()),
    ]
}

fn moment_pairs<'a>(
    m: &'a mut Gradients,
    v: &'a mut Gradients,
) -> Vec<(&'a mut [f64], &'a mut [f64])> {
    vec![
        (m.value_embeddings.data_mut(), v.value_embeddings.data_mut()),
        (m.path_embeddings.data_mut(), v.path_embeddings.data_mut()),
        (m.combine_weights.data_mut(), v.combine_weights.data_mut()),
        (m.attention.as_mut_slice(), v.attention.as_mut_slice()),
        (m.label_weights.data_mut(), v.label_weights.data_mut()),
    ]
}
