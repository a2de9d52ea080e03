use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const UNIGRAM_POWER: f64 = 0.75;

/// Draws negative samples from the unigram distribution raised to 3/4.
#[derive(Clone, Debug)]
pub struct UnigramSampler {
    alias: WeightedAliasIndex<f64>,
    probs: Vec<f64>,
}

impl UnigramSampler {
    pub fn new(vocab: &Vocabulary) -> Result<Self> {
        Self::from_counts(vocab.entries().iter().map(|e| e.count))
    }

    pub fn from_counts(counts: impl IntoIterator<Item = u64>) -> Result<Self> {
        let weights: Vec<f64> = counts
            .into_iter()
            .map(|c| (c as f64).powf(UNIGRAM_POWER))
            .collect();
        let total: f64 = weights.iter().sum();
        let probs = weights.iter().map(|w| w / total).collect();
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::Config(format!("cannot build negative sampler: {e}")))?;
        Ok(UnigramSampler { alias, probs })
    }

    /// Analytic probability of drawing word `idx`.
    pub fn probability(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }
}
