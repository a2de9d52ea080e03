//! Skip-gram with negative sampling.
//!
//! Follows the reference word2vec recipe: each (center, context) pair updates
//! the context word's input vector against the center word's output vector
//! and `negatives` draws from the 3/4-power unigram distribution. The learning
//! rate decays linearly to `initial_lr * 1e-4` over the whole run.
//!
//! With `workers > 1` the weight matrices are shared between threads and
//! updated without locks; only the single-worker mode is bit-reproducible.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EmbeddingSpace, UnigramSampler};
use crate::corpus::{build_vocab, TokenSequence, Vocabulary};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

const MIN_LR_FRACTION: f32 = 1e-4;
const LR_UPDATE_WORDS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub initial_lr: f32,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample_t: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 5,
            initial_lr: 0.025,
            subsample_t: 0.0,
            seed: 1,
            workers: 1,
        }
    }
}

impl SgnsConfig {
    pub fn with_dim(dim: usize) -> Self {
        SgnsConfig {
            dim,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("workers", self.workers),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("sgns.{name} must be positive")));
            }
        }
        if self.min_count == 0 {
            return Err(Error::Config("sgns.min_count must be positive".into()));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Config("sgns.initial_lr must be positive".into()));
        }
        if !(self.subsample_t >= 0.0 && self.subsample_t.is_finite()) {
            return Err(Error::Config(
                "sgns.subsample_t must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainingReport {
    pub vocab: Vocabulary,
    /// In-vocabulary tokens per epoch, before subsampling.
    pub train_words: u64,
    /// Mean negative-sampling loss per update, one value per epoch.
    pub epoch_losses: Vec<f64>,
}

pub fn train_sgns(samples: &[TokenSequence], config: &SgnsConfig) -> Result<EmbeddingSpace> {
    train_sgns_with_report(samples, config).map(|(space, _)| space)
}

pub fn train_sgns_with_report(
    samples: &[TokenSequence],
    config: &SgnsConfig,
) -> Result<(EmbeddingSpace, TrainingReport)> {
    config.validate()?;
    let vocab = build_vocab(samples, config.min_count)?;
    if vocab.is_empty() {
        return Err(Error::Config(format!(
            "no word occurs at least {} times; vocabulary is empty",
            config.min_count
        )));
    }
    let sentences: Vec<Vec<u32>> = samples
        .iter()
        .map(|s| {
            s.iter()
                .filter_map(|w| vocab.index_of(w).map(|i| i as u32))
                .collect::<Vec<_>>()
        })
        .filter(|s: &Vec<u32>| !s.is_empty())
        .collect();
    let train_words = vocab.total_count();
    let sampler = UnigramSampler::new(&vocab)?;
    let keep_probs = keep_probabilities(&vocab, config.subsample_t);

    let dim = config.dim;
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "sgns-init", 0, 0));
    let half = 0.5 / dim as f32;
    let mut syn0: Vec<f32> = (0..vocab.len() * dim)
        .map(|_| init_rng.random_range(-half..half))
        .collect();
    let mut syn1 = vec![0.0f32; vocab.len() * dim];

    let job = Job {
        config,
        sampler: &sampler,
        keep_probs: &keep_probs,
        total_words: (config.epochs as u64 * train_words).max(1),
    };

    let stats = if config.workers == 1 {
        let sentences: Vec<&[u32]> = sentences.iter().map(Vec::as_slice).collect();
        let weights = Dense {
            syn0: &mut syn0,
            syn1: &mut syn1,
            dim,
        };
        let mut worker = Worker::new(&job, weights, 0);
        let mut progress = LocalProgress(0);
        worker.run(&sentences, &mut progress);
        worker.stats
    } else {
        train_shared(&job, &sentences, &mut syn0, &mut syn1)
    };

    let epoch_losses = stats
        .iter()
        .map(|s| {
            if s.updates == 0 {
                0.0
            } else {
                s.loss / s.updates as f64
            }
        })
        .collect();
    let data: Vec<f64> = syn0.iter().map(|&v| f64::from(v)).collect();
    let space = EmbeddingSpace::from_vocab(&vocab, dim, data)?;
    Ok((
        space,
        TrainingReport {
            vocab,
            train_words,
            epoch_losses,
        },
    ))
}

fn keep_probabilities(vocab: &Vocabulary, t: f64) -> Option<Vec<f32>> {
    if t <= 0.0 {
        return None;
    }
    let threshold = t * vocab.total_count() as f64;
    Some(
        vocab
            .entries()
            .iter()
            .map(|e| {
                let f = e.count as f64;
                (((f / threshold).sqrt() + 1.0) * threshold / f).min(1.0) as f32
            })
            .collect(),
    )
}

fn train_shared(
    job: &Job<'_>,
    sentences: &[Vec<u32>],
    syn0: &mut [f32],
    syn1: &mut [f32],
) -> Vec<EpochStats> {
    let to_atomic =
        |m: &[f32]| -> Vec<AtomicU32> { m.iter().map(|v| AtomicU32::new(v.to_bits())).collect() };
    let shared0 = to_atomic(syn0);
    let shared1 = to_atomic(syn1);
    let processed = AtomicU64::new(0);
    let workers = job.config.workers;

    let per_worker: Vec<Vec<EpochStats>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let shard: Vec<&[u32]> = sentences
                    .iter()
                    .skip(w)
                    .step_by(workers)
                    .map(Vec::as_slice)
                    .collect();
                let weights = Shared {
                    syn0: &shared0,
                    syn1: &shared1,
                    dim: job.config.dim,
                };
                let processed = &processed;
                scope.spawn(move || {
                    let mut worker = Worker::new(job, weights, w as u64);
                    let mut progress = SharedProgress {
                        global: processed,
                        pending: 0,
                    };
                    worker.run(&shard, &mut progress);
                    worker.stats
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training worker panicked"))
            .collect()
    });

    for (dst, src) in syn0.iter_mut().zip(&shared0) {
        *dst = f32::from_bits(src.load(Ordering::Relaxed));
    }
    for (dst, src) in syn1.iter_mut().zip(&shared1) {
        *dst = f32::from_bits(src.load(Ordering::Relaxed));
    }

    let mut merged = vec![EpochStats::default(); job.config.epochs];
    for stats in per_worker {
        for (m, s) in merged.iter_mut().zip(stats) {
            m.loss += s.loss;
            m.updates += s.updates;
        }
    }
    merged
}

struct Job<'a> {
    config: &'a SgnsConfig,
    sampler: &'a UnigramSampler,
    keep_probs: &'a Option<Vec<f32>>,
    total_words: u64,
}

#[derive(Clone, Debug, Default)]
struct EpochStats {
    loss: f64,
    updates: u64,
}

/// Access to the input (`syn0`) and output (`syn1`) weight rows.
trait Weights {
    fn load_input(&self, word: usize, out: &mut [f32]);
    fn dot_output(&self, word: usize, v: &[f32]) -> f32;
    /// `acc += g * out[word]`, then `out[word] += g * v`.
    fn step_output(&mut self, word: usize, g: f32, v: &[f32], acc: &mut [f32]);
    fn add_input(&mut self, word: usize, delta: &[f32]);
}

struct Dense<'a> {
    syn0: &'a mut [f32],
    syn1: &'a mut [f32],
    dim: usize,
}

impl Weights for Dense<'_> {
    #[inline]
    fn load_input(&self, word: usize, out: &mut [f32]) {
        out.copy_from_slice(&self.syn0[word * self.dim..(word + 1) * self.dim]);
    }

    #[inline]
    fn dot_output(&self, word: usize, v: &[f32]) -> f32 {
        let row = &self.syn1[word * self.dim..(word + 1) * self.dim];
        row.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    #[inline]
    fn step_output(&mut self, word: usize, g: f32, v: &[f32], acc: &mut [f32]) {
        let row = &mut self.syn1[word * self.dim..(word + 1) * self.dim];
        for ((o, a), x) in row.iter_mut().zip(acc.iter_mut()).zip(v) {
            *a += g * *o;
            *o += g * x;
        }
    }

    #[inline]
    fn add_input(&mut self, word: usize, delta: &[f32]) {
        let row = &mut self.syn0[word * self.dim..(word + 1) * self.dim];
        for (r, d) in row.iter_mut().zip(delta) {
            *r += d;
        }
    }
}

/// Lock-free shared weights; concurrent updates may overwrite each other.
struct Shared<'a> {
    syn0: &'a [AtomicU32],
    syn1: &'a [AtomicU32],
    dim: usize,
}

#[inline]
fn load(a: &AtomicU32) -> f32 {
    f32::from_bits(a.load(Ordering::Relaxed))
}

#[inline]
fn store(a: &AtomicU32, v: f32) {
    a.store(v.to_bits(), Ordering::Relaxed)
}

impl Weights for Shared<'_> {
    fn load_input(&self, word: usize, out: &mut [f32]) {
        for (o, a) in out
            .iter_mut()
            .zip(&self.syn0[word * self.dim..(word + 1) * self.dim])
        {
            *o = load(a);
        }
    }

    fn dot_output(&self, word: usize, v: &[f32]) -> f32 {
        self.syn1[word * self.dim..(word + 1) * self.dim]
            .iter()
            .zip(v)
            .map(|(a, b)| load(a) * b)
            .sum()
    }

    fn step_output(&mut self, word: usize, g: f32, v: &[f32], acc: &mut [f32]) {
        let row = &self.syn1[word * self.dim..(word + 1) * self.dim];
        for ((o, a), x) in row.iter().zip(acc.iter_mut()).zip(v) {
            let cur = load(o);
            *a += g * cur;
            store(o, cur + g * x);
        }
    }

    fn add_input(&mut self, word: usize, delta: &[f32]) {
        for (r, d) in self.syn0[word * self.dim..(word + 1) * self.dim]
            .iter()
            .zip(delta)
        {
            store(r, load(r) + d);
        }
    }
}

trait Progress {
    /// Record `words` more processed tokens and return the global total.
    fn advance(&mut self, words: u64) -> u64;
}

struct LocalProgress(u64);

impl Progress for LocalProgress {
    fn advance(&mut self, words: u64) -> u64 {
        self.0 += words;
        self.0
    }
}

struct SharedProgress<'a> {
    global: &'a AtomicU64,
    pending: u64,
}

impl Progress for SharedProgress<'_> {
    fn advance(&mut self, words: u64) -> u64 {
        self.pending += words;
        if self.pending >= LR_UPDATE_WORDS {
            let p = std::mem::take(&mut self.pending);
            self.global.fetch_add(p, Ordering::Relaxed) + p
        } else {
            self.global.load(Ordering::Relaxed) + self.pending
        }
    }
}

struct Worker<'a, W> {
    job: &'a Job<'a>,
    weights: W,
    rng: ChaCha8Rng,
    l1: Vec<f32>,
    neu1e: Vec<f32>,
    kept: Vec<u32>,
    stats: Vec<EpochStats>,
}

impl<'a, W: Weights> Worker<'a, W> {
    fn new(job: &'a Job<'a>, weights: W, worker_id: u64) -> Self {
        let dim = job.config.dim;
        Worker {
            job,
            weights,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(
                job.config.seed,
                "sgns-worker",
                worker_id,
                0,
            )),
            l1: vec![0.0; dim],
            neu1e: vec![0.0; dim],
            kept: Vec::new(),
            stats: vec![EpochStats::default(); job.config.epochs],
        }
    }

    fn run(&mut self, sentences: &[&[u32]], progress: &mut impl Progress) {
        let initial_lr = self.job.config.initial_lr;
        let mut processed = 0;
        for epoch in 0..self.job.config.epochs {
            for sentence in sentences {
                let frac = processed as f32 / self.job.total_words as f32;
                let lr = initial_lr * (1.0 - frac).max(MIN_LR_FRACTION);
                self.train_sentence(sentence, lr, epoch);
                processed = progress.advance(sentence.len() as u64);
            }
        }
    }

    fn train_sentence(&mut self, sentence: &[u32], lr: f32, epoch: usize) {
        let mut kept = std::mem::take(&mut self.kept);
        kept.clear();
        match self.job.keep_probs {
            Some(keep) => kept.extend(
                sentence
                    .iter()
                    .copied()
                    .filter(|&w| self.rng.random::<f32>() < keep[w as usize]),
            ),
            None => kept.extend_from_slice(sentence),
        }
        let window = self.job.config.window;
        let mut pairs = Vec::new();
        for_each_context(&kept, window, &mut self.rng, |c, o| pairs.push((c, o)));
        for (center, context) in pairs {
            self.train_pair(center as usize, context as usize, lr, epoch);
        }
        self.kept = kept;
    }

    fn train_pair(&mut self, center: usize, context: usize, lr: f32, epoch: usize) {
        self.weights.load_input(context, &mut self.l1);
        self.neu1e.iter_mut().for_each(|v| *v = 0.0);
        let stats = &mut self.stats[epoch];
        for d in 0..=self.job.config.negatives {
            let (target, label) = if d == 0 {
                (center, 1.0)
            } else {
                let t = self.job.sampler.sample(&mut self.rng);
                if t == center {
                    continue;
                }
                (t, 0.0)
            };
            let f = self.weights.dot_output(target, &self.l1);
            let sigma = 1.0 / (1.0 + (-f).exp());
            // -log sigma(f) for positives, -log sigma(-f) for negatives
            let margin = if label > 0.0 { -f } else { f };
            stats.loss += f64::from(softplus(margin));
            stats.updates += 1;
            let g = (label - sigma) * lr;
            self.weights
                .step_output(target, g, &self.l1, &mut self.neu1e);
        }
        self.weights.add_input(context, &self.neu1e);
    }
}

#[inline]
fn softplus(x: f32) -> f32 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Enumerate (center, context) position pairs of one sample.
///
/// The effective window for each center is drawn uniformly from `1..=window`;
/// pairs never leave the sample.
pub(crate) fn for_each_context<R, F>(sentence: &[u32], window: usize, rng: &mut R, mut f: F)
where
    R: Rng + ?Sized,
    F: FnMut(u32, u32),
{
    for (pos, &center) in sentence.iter().enumerate() {
        let span = rng.random_range(1..=window);
        let lo = pos.saturating_sub(span);
        let hi = (pos + span).min(sentence.len() - 1);
        for (other, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
            if other != pos {
                f(center, context);
            }
        }
    }
}
