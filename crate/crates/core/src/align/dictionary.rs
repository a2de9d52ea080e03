use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::sgns::EmbeddingSpace;

/// Anything that can answer "which words do you know".
pub trait Lexicon {
    fn lexicon_words(&self) -> Box<dyn Iterator<Item = &str> + '_>;
    fn has_word(&self, word: &str) -> bool;
}

impl Lexicon for Vocabulary {
    fn lexicon_words(&self) -> Box<dyn Iterator<Item = &str> + '_> {
        Box::new(self.words())
    }

    fn has_word(&self, word: &str) -> bool {
        self.contains(word)
    }
}

impl Lexicon for EmbeddingSpace {
    fn lexicon_words(&self) -> Box<dyn Iterator<Item = &str> + '_> {
        Box::new(self.words().iter().map(String::as_str))
    }

    fn has_word(&self, word: &str) -> bool {
        self.contains(word)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryMode {
    /// Every shared word except the targets under analysis.
    FullIntersectionMinusTargets,
    /// Up to `k` shared words drawn uniformly without replacement.
    RandomK,
}

impl fmt::Display for DictionaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DictionaryMode::FullIntersectionMinusTargets => "full_intersection_minus_targets",
            DictionaryMode::RandomK => "random_k",
        })
    }
}

impl FromStr for DictionaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full_intersection_minus_targets" => Ok(DictionaryMode::FullIntersectionMinusTargets),
            "random_k" => Ok(DictionaryMode::RandomK),
            _ => Err(Error::InvalidInput(format!(
                "unknown dictionary mode '{s}'"
            ))),
        }
    }
}

/// Word pairs anchoring an alignment. Both sides come from the same language,
/// so every pair is a word and itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedDictionary {
    pairs: Vec<(String, String)>,
    mode: DictionaryMode,
}

impl SeedDictionary {
    pub fn from_pairs(pairs: Vec<(String, String)>, mode: DictionaryMode) -> Self {
        SeedDictionary { pairs, mode }
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn mode(&self) -> DictionaryMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Build a seed dictionary from the words shared by both sides.
///
/// The intersection is enumerated in source order. `targets` are excluded only
/// in [`DictionaryMode::FullIntersectionMinusTargets`]; `k` and `seed` only
/// matter for [`DictionaryMode::RandomK`], whose sample keeps source order.
pub fn build_seed_dictionary<S, T>(
    src: &S,
    tgt: &T,
    targets: &HashSet<String>,
    mode: DictionaryMode,
    k: usize,
    seed: u64,
) -> Result<SeedDictionary>
where
    S: Lexicon + ?Sized,
    T: Lexicon + ?Sized,
{
    let shared: Vec<&str> = src.lexicon_words().filter(|w| tgt.has_word(w)).collect();
    let chosen: Vec<&str> = match mode {
        DictionaryMode::FullIntersectionMinusTargets => shared
            .into_iter()
            .filter(|w| !targets.contains(*w))
            .collect(),
        DictionaryMode::RandomK => {
            if k == 0 {
                return Err(Error::AlignmentSetup("random_k needs k >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let amount = k.min(shared.len());
            let mut picked = rand::seq::index::sample(&mut rng, shared.len(), amount).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| shared[i]).collect()
        }
    };
    if chosen.is_empty() {
        return Err(Error::AlignmentSetup(
            "seed dictionary is empty: the vocabularies share no usable words".into(),
        ));
    }
    Ok(SeedDictionary {
        pairs: chosen
            .into_iter()
            .map(|w| (w.to_owned(), w.to_owned()))
            .collect(),
        mode,
    })
}
