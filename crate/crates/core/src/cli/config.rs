//! Declarative run configuration.
//!
//! A run is described by one TOML file; any key can be overridden with a
//! dotted `key=value` assignment (`sgns.dim=150`, `align.method="cca"`).
//!
//! ```toml
//! seed = 1
//! targets = "targets.txt"
//! output_dir = "out"
//! gold = "gold.tsv"            # optional, enables evaluation
//!
//! [corpus]
//! earlier = "c1.txt"
//! later = "c2.txt"
//! format = "plain"             # plain | tsv
//! variant = "form"             # form | lemma | form_pos | lemma_pos
//!
//! [sgns]                       # dim, window, negatives, epochs, min_count,
//! dim = 100                    # initial_lr, subsample_t, workers
//!
//! [align]
//! method = "procrustes"        # procrustes | cca
//! dictionary = "full_intersection_minus_targets"   # or random_k
//! dictionary_size = 5000       # k for random_k
//! preprocess = "unit"          # none | unit | unit_center
//! ridge = 1e-8
//!
//! [decision]
//! strategy = "largest_gap"     # mean | largest_gap | fixed | ranking
//! fixed_t = 0.5                # required for fixed
//!
//! [ranking]
//! blocks = [[100, 105], [110, 115]]  # inclusive dimension ranges
//! runs_per_pair = 40
//! variants = ["form", "lemma"] # extra variants for the stability report
//! ```
//!
//! The `seed` under `[sgns]` is ignored: every stage seed is derived from the
//! top-level master seed.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::align::{DictionaryMode, Method, Preprocess, DEFAULT_RIDGE};
use crate::corpus::{CorpusFormat, CorpusVariant};
use crate::error::{Error, Result};
use crate::sgns::SgnsConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub earlier: PathBuf,
    pub later: PathBuf,
    #[serde(default = "default_format")]
    pub format: CorpusFormat,
    #[serde(default = "default_variant")]
    pub variant: CorpusVariant,
}

fn default_format() -> CorpusFormat {
    CorpusFormat::Plain
}

fn default_variant() -> CorpusVariant {
    CorpusVariant::Form
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    pub method: Method,
    pub dictionary: DictionaryMode,
    pub dictionary_size: usize,
    pub preprocess: Preprocess,
    pub ridge: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            method: Method::Procrustes,
            dictionary: DictionaryMode::FullIntersectionMinusTargets,
            dictionary_size: 5000,
            preprocess: Preprocess::default(),
            ridge: DEFAULT_RIDGE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionStrategy {
    Mean,
    LargestGap,
    Fixed,
    Ranking,
}

impl fmt::Display for DecisionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecisionStrategy::Mean => "mean",
            DecisionStrategy::LargestGap => "largest_gap",
            DecisionStrategy::Fixed => "fixed",
            DecisionStrategy::Ranking => "ranking",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionConfig {
    pub strategy: DecisionStrategy,
    pub fixed_t: Option<f64>,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        DecisionConfig {
            strategy: DecisionStrategy::LargestGap,
            fixed_t: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingConfig {
    pub blocks: Vec<[usize; 2]>,
    pub runs_per_pair: usize,
    pub variants: Vec<CorpusVariant>,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            blocks: (100..=210).step_by(10).map(|b| [b, b + 5]).collect(),
            runs_per_pair: 40,
            variants: Vec::new(),
        }
    }
}

impl RankingConfig {
    /// Every embedding dimension of the schedule, in order.
    pub fn dimensions(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|&[lo, hi]| lo..=hi).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub corpus: CorpusConfig,
    pub targets: PathBuf,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub gold: Option<PathBuf>,
    #[serde(default)]
    pub sgns: SgnsConfig,
    #[serde(default)]
    pub align: AlignConfig,
    #[serde(default)]
    pub decision: DecisionConfig,
    #[serde(default)]
    pub ranking: RankingConfig,
}

fn default_seed() -> u64 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// What a command needs from the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Corpora,
    Targets,
    Decision,
    Ranking,
}

impl RunConfig {
    /// Parse TOML, apply `key=value` overrides, and resolve relative paths
    /// against `base`.
    pub fn from_toml(text: &str, overrides: &[String], base: Option<&Path>) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut config: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(base) = base {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    /// Load a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides, path.parent())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus.earlier);
        fix(&mut self.corpus.later);
        fix(&mut self.targets);
        fix(&mut self.output_dir);
        if let Some(g) = &mut self.gold {
            fix(g);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// Check everything the listed needs depend on, before any compute.
    pub fn validate(&self, needs: &[Needs]) -> Result<()> {
        let exists = |p: &Path, what: &str| {
            if p.is_file() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{what} '{}' does not exist",
                    p.display()
                )))
            }
        };
        for need in needs {
            match need {
                Needs::Corpora => {
                    exists(&self.corpus.earlier, "earlier corpus")?;
                    exists(&self.corpus.later, "later corpus")?;
                    self.sgns.validate()?;
                }
                Needs::Targets => exists(&self.targets, "targets file")?,
                Needs::Decision => match self.decision.strategy {
                    DecisionStrategy::Fixed => {
                        let t = self.decision.fixed_t.ok_or_else(|| {
                            Error::Config("strategy 'fixed' requires decision.fixed_t".into())
                        })?;
                        if !t.is_finite() {
                            return Err(Error::Config("decision.fixed_t must be finite".into()));
                        }
                    }
                    DecisionStrategy::Ranking => self.validate(&[Needs::Ranking])?,
                    _ => {}
                },
                Needs::Ranking => {
                    let r = &self.ranking;
                    if r.blocks.is_empty() {
                        return Err(Error::Config("ranking.blocks is empty".into()));
                    }
                    if let Some(&[lo, hi]) = r.blocks.iter().find(|&&[lo, hi]| lo == 0 || lo > hi) {
                        return Err(Error::Config(format!(
                            "invalid dimension block [{lo}, {hi}]"
                        )));
                    }
                    let mut dims = r.dimensions();
                    dims.sort_unstable();
                    if dims.windows(2).any(|w| w[0] == w[1]) {
                        return Err(Error::Config("ranking.blocks overlap".into()));
                    }
                    if r.runs_per_pair == 0 {
                        return Err(Error::Config("ranking.runs_per_pair must be >= 1".into()));
                    }
                    if self.align.dictionary_size == 0 {
                        return Err(Error::Config("align.dictionary_size must be >= 1".into()));
                    }
                }
            }
        }
        if let Some(g) = &self.gold {
            exists(g, "gold file")?;
        }
        if !(self.align.ridge >= 0.0 && self.align.ridge.is_finite()) {
            return Err(Error::Config(
                "align.ridge must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

/// Set a dotted key in a TOML table. The value is parsed as a TOML value and
/// falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = parse_value(raw);
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| Error::Config(format!("override '{assignment}' has an empty key")))?;
    let mut node = table;
    for part in parts {
        let entry = node
            .entry(part.to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{part}' in '{key}' is not a table")))?;
    }
    node.insert(last.to_owned(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    toml::Value::from_str(raw).unwrap_or_else(|_| toml::Value::String(raw.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
targets = "t.txt"
[corpus]
earlier = "a.txt"
later = "b.txt"
"#;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let c = RunConfig::from_toml(BASIC, &[], None).unwrap();
        assert_eq!(c.sgns, SgnsConfig::default());
        assert_eq!(c.align, AlignConfig::default());
        assert_eq!(c.decision.strategy, DecisionStrategy::LargestGap);
        assert_eq!(c.corpus.format, CorpusFormat::Plain);
        assert_eq!(c.corpus.variant, CorpusVariant::Form);
        let dims = c.ranking.dimensions();
        assert_eq!(dims.len(), 72);
        assert_eq!(dims.len() * c.ranking.runs_per_pair, 2880);
        assert_eq!((dims[0], dims[5], dims[6], dims[71]), (100, 105, 110, 215));
    }

    #[test]
    fn overrides_apply_before_parsing() {
        let c = RunConfig::from_toml(
            BASIC,
            &[
                "sgns.dim=150".into(),
                "align.method=cca".into(),
                "decision.strategy=\"mean\"".into(),
                "ranking.blocks=[[10, 11]]".into(),
                "seed = 7".into(),
            ],
            None,
        )
        .unwrap();
        assert_eq!(c.sgns.dim, 150);
        assert_eq!(c.align.method, Method::Cca);
        assert_eq!(c.decision.strategy, DecisionStrategy::Mean);
        assert_eq!(c.ranking.dimensions(), [10, 11]);
        assert_eq!(c.seed, 7);
        assert!(RunConfig::from_toml(BASIC, &["sgns.bogus=1".into()], None).is_err());
        assert!(RunConfig::from_toml(BASIC, &["novalue".into()], None).is_err());
        assert!(RunConfig::from_toml(BASIC, &["targets.x=1".into()], None).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::from_toml(BASIC, &["decision.fixed_t=0.25".into()], None).unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml(), &[], None).unwrap(), c);
    }

    #[test]
    fn validation_checks_paths_and_strategy() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["a.txt", "b.txt", "t.txt"] {
            std::fs::write(dir.path().join(f), "x\n").unwrap();
        }
        let c = RunConfig::from_toml(BASIC, &[], Some(dir.path())).unwrap();
        c.validate(&[Needs::Corpora, Needs::Targets, Needs::Decision])
            .unwrap();

        let fixed =
            RunConfig::from_toml(BASIC, &["decision.strategy=fixed".into()], Some(dir.path()))
                .unwrap();
        assert!(matches!(
            fixed.validate(&[Needs::Decision]),
            Err(Error::Config(_))
        ));

        let missing =
            RunConfig::from_toml(BASIC, &["corpus.later=nope.txt".into()], Some(dir.path()))
                .unwrap();
        assert!(missing.validate(&[Needs::Corpora]).is_err());
        assert!(missing.validate(&[Needs::Targets]).is_ok());

        for bad in [
            "ranking.blocks=[]",
            "ranking.blocks=[[5, 4]]",
            "ranking.blocks=[[1, 3], [3, 4]]",
            "ranking.runs_per_pair=0",
        ] {
            let c = RunConfig::from_toml(BASIC, &[bad.into()], Some(dir.path())).unwrap();
            assert!(c.validate(&[Needs::Ranking]).is_err(), "{bad}");
        }
        let zero_dim =
            RunConfig::from_toml(BASIC, &["sgns.dim=0".into()], Some(dir.path())).unwrap();
        assert!(zero_dim.validate(&[Needs::Corpora]).is_err());
    }
}
