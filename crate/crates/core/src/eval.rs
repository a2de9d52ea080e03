//! Accuracy against gold labels, synthetic change injection and the random
//! baseline.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::change::BinaryDecision;
use crate::corpus::TokenSequence;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Binary labels per word, `true` = changed.
pub type Labels = BTreeMap<String, bool>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldLabels {
    entries: Labels,
}

impl GoldLabels {
    pub fn new(entries: Labels) -> Self {
        GoldLabels { entries }
    }

    pub fn entries(&self) -> &Labels {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<bool> {
        self.entries.get(word).copied()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Parse `word \t {0,1}` lines.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(GoldLabels {
            entries: parse_labels(text)?,
        })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write<W: Write>(&self, mut sink: W) -> Result<()> {
        for (word, &changed) in &self.entries {
            writeln!(sink, "{word}\t{}", u8::from(changed))?;
        }
        sink.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        self.write(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

impl FromIterator<(String, bool)> for GoldLabels {
    fn from_iter<I: IntoIterator<Item = (String, bool)>>(iter: I) -> Self {
        GoldLabels {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Read labels from any TSV whose first two columns are `word` and `0`/`1`;
/// gold files and decision files both qualify.
pub fn parse_labels(text: &str) -> Result<Labels> {
    let mut labels = Labels::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let word = fields.next().unwrap_or_default();
        let label = match fields.next() {
            Some("0") => false,
            Some("1") => true,
            other => {
                return Err(Error::format(
                    i + 1,
                    format!("expected label 0 or 1, found {:?}", other.unwrap_or("")),
                ))
            }
        };
        if word.is_empty() {
            return Err(Error::format(i + 1, "empty word"));
        }
        if labels.insert(word.to_owned(), label).is_some() {
            return Err(Error::format(i + 1, format!("duplicate word '{word}'")));
        }
    }
    Ok(labels)
}

pub fn predictions_from_decisions(decisions: &[BinaryDecision]) -> Labels {
    decisions
        .iter()
        .map(|d| (d.word.clone(), d.changed))
        .collect()
}

/// Fraction of gold words whose prediction matches.
pub fn accuracy(pred: &Labels, gold: &GoldLabels) -> Result<f64> {
    if gold.is_empty() {
        return Err(Error::InvalidInput("gold labels are empty".into()));
    }
    let mut correct = 0usize;
    for (word, &label) in gold.entries() {
        let p = pred
            .get(word)
            .ok_or_else(|| Error::MissingPrediction(word.clone()))?;
        correct += usize::from(*p == label);
    }
    Ok(correct as f64 / gold.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoTarget {
    pub target: String,
    pub donor: String,
    pub fraction: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionPlan {
    #[serde(default)]
    pub pseudo_targets: Vec<PseudoTarget>,
    #[serde(default)]
    pub stable_words: Vec<String>,
}

impl InjectionPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Plan(e.to_string()))
    }

    /// Check the plan against token counts of the corpus to be modified.
    pub fn validate(&self, counts: &HashMap<&str, u64>) -> Result<()> {
        let mut seen = HashSet::new();
        let words = self
            .pseudo_targets
            .iter()
            .flat_map(|p| [&p.target, &p.donor])
            .chain(&self.stable_words);
        for w in words {
            if !seen.insert(w.as_str()) {
                return Err(Error::Plan(format!(
                    "'{w}' appears more than once in the plan"
                )));
            }
        }
        for p in &self.pseudo_targets {
            if !(p.fraction > 0.0 && p.fraction <= 1.0) {
                return Err(Error::Plan(format!(
                    "replacement fraction {} for '{}' is outside (0, 1]",
                    p.fraction, p.target
                )));
            }
            let donor = counts.get(p.donor.as_str()).copied().unwrap_or(0);
            if donor == 0 {
                return Err(Error::Plan(format!(
                    "donor '{}' does not occur in the corpus",
                    p.donor
                )));
            }
            let target = counts.get(p.target.as_str()).copied().unwrap_or(0);
            if (donor as f64) < target as f64 * p.fraction {
                return Err(Error::Plan(format!(
                    "donor '{}' ({donor}) is rarer than {} x target '{}' ({target})",
                    p.donor, p.fraction, p.target
                )));
            }
        }
        Ok(())
    }

    pub fn gold(&self) -> GoldLabels {
        self.pseudo_targets
            .iter()
            .map(|p| (p.target.clone(), true))
            .chain(self.stable_words.iter().map(|w| (w.clone(), false)))
            .collect()
    }
}

/// Rewrite a seeded Bernoulli fraction of every donor's occurrences as its
/// pseudo-target. Each pseudo-target draws from its own stream, so adding a
/// target to the plan leaves the others' rewrites unchanged.
pub fn inject_changes(
    later: impl IntoIterator<Item = TokenSequence>,
    plan: &InjectionPlan,
    seed: u64,
) -> Result<(Vec<TokenSequence>, GoldLabels)> {
    let mut corpus: Vec<TokenSequence> = later.into_iter().collect();
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for sample in &corpus {
        for unit in sample.iter() {
            *counts.entry(unit).or_default() += 1;
        }
    }
    plan.validate(&counts)?;

    let mut rewrites: HashMap<String, (String, Bernoulli, ChaCha8Rng)> = HashMap::new();
    for (i, p) in plan.pseudo_targets.iter().enumerate() {
        let coin = Bernoulli::new(p.fraction).map_err(|e| Error::Plan(e.to_string()))?;
        let rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "inject", i as u64, 0));
        rewrites.insert(p.donor.clone(), (p.target.clone(), coin, rng));
    }
    for sample in &mut corpus {
        for unit in sample.0.iter_mut() {
            if let Some((target, coin, rng)) = rewrites.get_mut(unit.as_str()) {
                if coin.sample(rng) {
                    unit.clone_from(target);
                }
            }
        }
    }
    Ok((corpus, plan.gold()))
}

/// An independent fair coin per target.
pub fn random_baseline<S: AsRef<str>>(targets: &[S], seed: u64) -> Labels {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "random_baseline", 0, 0));
    targets
        .iter()
        .map(|t| (t.as_ref().to_owned(), rng.random_bool(0.5)))
        .collect()
}
