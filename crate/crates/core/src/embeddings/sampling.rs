use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

const POWER: f64 = 0.75;

/// Unigram distribution raised to the 3/4 power, for drawing negatives.
#[derive(Clone, Debug, PartialEq)]
pub struct NegativeSamplingTable {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NegativeSamplingTable {
    /// Covers the real tokens of `vocab`; the unknown slot is never drawn.
    pub fn new(vocab: &Vocabulary) -> Result<Self> {
        Self::from_counts(vocab.counts())
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty("vocabulary"));
        }
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(POWER)).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Config("all token counts are zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        Ok(NegativeSamplingTable { probs, cumulative })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let u = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.probs.len() - 1)
    }
}
