use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{loss_and_grad, ClassifierModel, Gradients, Params};
use crate::corpus::Headline;
use crate::error::{Error, Result};
use crate::math::Matrix;

/// Encoded ids and gold label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub ids: Vec<usize>,
    pub label: usize,
}

impl Example {
    pub fn from_headline(model: &ClassifierModel, h: &Headline) -> Self {
        Example {
            ids: model.encode(&h.tokens),
            label: h.label,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// 1-based epoch of the returned snapshot; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
    pub best_dev_accuracy: f64,
}

impl TrainReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tdev_accuracy\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\n",
                e.epoch, e.train_loss, e.dev_accuracy
            ));
        }
        match self.best_epoch {
            Some(b) => out.push_str(&format!("best\t{b}\t{:.6}\n", self.best_dev_accuracy)),
            None => out.push_str("best\tnone\n"),
        }
        out
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Adam with lazy updates for embedding rows: a row's moments only move on
/// steps where the row received gradient.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    m: Params,
    v: Params,
    step: u64,
}

impl Adam {
    pub fn new(params: &Params, lr: f64) -> Self {
        Adam {
            lr,
            m: Params::zeros_like(params),
            v: Params::zeros_like(params),
            step: 0,
        }
    }

    pub fn step(&mut self, params: &mut Params, grads: &Gradients, pad_row: usize) {
        self.step += 1;
        let t = self.step as i32;
        let lr_t = self.lr * (1.0 - BETA2.powi(t)).sqrt() / (1.0 - BETA1.powi(t));
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                p[i] -= lr_t * m[i] / (v[i].sqrt() + EPSILON);
            }
        };
        for &row in &grads.touched_rows {
            if row == pad_row {
                continue;
            }
            update(
                params.embedding.row_mut(row),
                grads.params.embedding.row(row),
                self.m.embedding.row_mut(row),
                self.v.embedding.row_mut(row),
            );
        }
        let dense = |p: &mut Matrix, g: &Matrix, m: &mut Matrix, v: &mut Matrix| {
            update(
                p.as_mut_slice(),
                g.as_slice(),
                m.as_mut_slice(),
                v.as_mut_slice(),
            )
        };
        dense(
            &mut params.conv_w,
            &grads.params.conv_w,
            &mut self.m.conv_w,
            &mut self.v.conv_w,
        );
        dense(
            &mut params.conv_b,
            &grads.params.conv_b,
            &mut self.m.conv_b,
            &mut self.v.conv_b,
        );
        dense(
            &mut params.lstm_w,
            &grads.params.lstm_w,
            &mut self.m.lstm_w,
            &mut self.v.lstm_w,
        );
        dense(
            &mut params.lstm_b,
            &grads.params.lstm_b,
            &mut self.m.lstm_b,
            &mut self.v.lstm_b,
        );
        dense(
            &mut params.out_w,
            &grads.params.out_w,
            &mut self.m.out_w,
            &mut self.v.out_w,
        );
        dense(
            &mut params.out_b,
            &grads.params.out_b,
            &mut self.m.out_b,
            &mut self.v.out_b,
        );
    }
}

pub fn accuracy(model: &ClassifierModel, examples: &[Example]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut correct = 0usize;
    for ex in examples {
        if model.predict_ids(&ex.ids)?.0 == ex.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

/// Mini-batch Adam for `config.epochs` epochs, reshuffling each epoch.
/// Returns the parameters from the epoch with the best dev accuracy
/// (earliest on ties).
pub fn train(
    model: ClassifierModel,
    train_set: &[Example],
    dev_set: &[Example],
) -> Result<(ClassifierModel, TrainReport)> {
    if train_set.is_empty() || dev_set.is_empty() {
        return Err(Error::Empty("training or development set"));
    }
    let cfg = model.config.clone();
    let mut model = model;
    let mut best = model.clone();
    let mut report = TrainReport::default();
    let mut adam = Adam::new(&model.params, cfg.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5EED));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let pad = model.pad_index();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_set[i].clone()));
            let (loss, grads) = loss_and_grad(&model, &batch)?;
            loss_sum += loss * chunk.len() as f64;
            adam.step(&mut model.params, &grads, pad);
        }
        let dev_accuracy = accuracy(&model, dev_set)?;
        report.epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            dev_accuracy,
        });
        if report.best_epoch.is_none() || dev_accuracy > report.best_dev_accuracy {
            report.best_epoch = Some(epoch);
            report.best_dev_accuracy = dev_accuracy;
            best = model.clone();
        }
    }
    Ok((best, report))
}
