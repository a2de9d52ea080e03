//! Per-target change scores and threshold-based binary decisions.
//!
//! The continuous score of a word is the cosine distance `1 − cos` between its
//! aligned earlier vector and its later vector; a word is labelled changed when
//! its distance is strictly greater than the threshold.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sgns::EmbeddingSpace;
use crate::stats::exact_mean;

#[derive(Clone, Debug, PartialEq)]
pub struct ChangeScore {
    pub word: String,
    pub similarity: f64,
    pub distance: f64,
}

impl ChangeScore {
    pub fn from_similarity(word: impl Into<String>, similarity: f64) -> Self {
        ChangeScore {
            word: word.into(),
            similarity,
            distance: 1.0 - similarity,
        }
    }

    /// Score with a given distance; similarity is derived from it.
    pub fn from_distance(word: impl Into<String>, distance: f64) -> Self {
        ChangeScore {
            word: word.into(),
            similarity: 1.0 - distance,
            distance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Mean,
    LargestGap,
    Fixed,
    /// Split of an aggregated ranking; the threshold is a composite rank.
    RankGap,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Mean => "mean",
            Strategy::LargestGap => "largest_gap",
            Strategy::Fixed => "fixed",
            Strategy::RankGap => "rank_gap",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Strategy::Mean),
            "largest_gap" => Ok(Strategy::LargestGap),
            "fixed" => Ok(Strategy::Fixed),
            "rank_gap" => Ok(Strategy::RankGap),
            _ => Err(Error::InvalidInput(format!("unknown strategy '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryDecision {
    pub word: String,
    pub changed: bool,
    pub threshold_used: f64,
    pub strategy: Strategy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MissingSide {
    Source,
    Target,
    Both,
}

impl fmt::Display for MissingSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissingSide::Source => "source",
            MissingSide::Target => "target",
            MissingSide::Both => "both",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MissingWord {
    pub word: String,
    pub side: MissingSide,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreReport {
    pub scores: Vec<ChangeScore>,
    pub missing: Vec<MissingWord>,
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidInput(
            "cosine similarity is undefined for a zero vector".into(),
        ));
    }
    Ok((dot / (nu * nv).sqrt()).clamp(-1.0, 1.0))
}

/// Score every target present in both spaces; the rest go to `missing`.
pub fn score_targets<S: AsRef<str>>(
    aligned_src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    targets: &[S],
) -> Result<ScoreReport> {
    let mut report = ScoreReport::default();
    for word in targets {
        let word = word.as_ref();
        match (aligned_src.vector(word), tgt.vector(word)) {
            (Some(u), Some(v)) => {
                let sim = cosine_similarity(u, v)
                    .map_err(|e| Error::InvalidInput(format!("target '{word}': {e}")))?;
                report.scores.push(ChangeScore::from_similarity(word, sim));
            }
            (s, t) => {
                let side = match (s.is_none(), t.is_none()) {
                    (true, true) => MissingSide::Both,
                    (true, false) => MissingSide::Source,
                    _ => MissingSide::Target,
                };
                report.missing.push(MissingWord {
                    word: word.to_owned(),
                    side,
                });
            }
        }
    }
    Ok(report)
}

/// Arithmetic mean of the distances.
pub fn mean_threshold(scores: &[ChangeScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidInput(
            "mean threshold needs at least one score".into(),
        ));
    }
    Ok(exact_mean(scores.iter().map(|s| s.distance)))
}

/// Midpoint of the widest gap between consecutive sorted values.
///
/// Among equally wide gaps the one with the larger lower endpoint wins.
pub fn largest_gap(values: &mut [f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(
            "largest gap needs at least two scores".into(),
        ));
    }
    values.sort_by(f64::total_cmp);
    let mut best: Option<(f64, f64, f64)> = None;
    for pair in values.windows(2) {
        let gap = pair[1] - pair[0];
        if gap > 0.0 && best.is_none_or(|(w, _, _)| gap >= w) {
            best = Some((gap, pair[0], pair[1]));
        }
    }
    best.map(|(_, lo, hi)| lo + (hi - lo) / 2.0)
        .ok_or_else(|| Error::InvalidInput("all scores are equal; no gap to split on".into()))
}

pub fn largest_gap_threshold(scores: &[ChangeScore]) -> Result<f64> {
    let mut distances: Vec<f64> = scores.iter().map(|s| s.distance).collect();
    largest_gap(&mut distances)
}

pub fn classify_binary(
    scores: &[ChangeScore],
    strategy: Strategy,
    fixed_t: Option<f64>,
) -> Result<Vec<BinaryDecision>> {
    let threshold = match strategy {
        Strategy::Mean => mean_threshold(scores)?,
        Strategy::LargestGap => largest_gap_threshold(scores)?,
        Strategy::Fixed => {
            fixed_t.ok_or_else(|| Error::Config("fixed strategy requires a threshold".into()))?
        }
        Strategy::RankGap => {
            return Err(Error::InvalidInput(
                "rank_gap decisions come from the ranking module".into(),
            ))
        }
    };
    Ok(scores
        .iter()
        .map(|s| BinaryDecision {
            word: s.word.clone(),
            changed: s.distance > threshold,
            threshold_used: threshold,
            strategy,
        })
        .collect())
}

/// `word \t similarity \t distance` per line.
pub fn write_scores<W: Write>(scores: &[ChangeScore], mut sink: W) -> Result<()> {
    for s in scores {
        writeln!(sink, "{}\t{}\t{}", s.word, s.similarity, s.distance)?;
    }
    sink.flush()?;
    Ok(())
}

pub fn write_missing<W: Write>(missing: &[MissingWord], mut sink: W) -> Result<()> {
    for m in missing {
        writeln!(sink, "{}\t{}", m.word, m.side)?;
    }
    sink.flush()?;
    Ok(())
}

/// `word \t label \t threshold \t strategy` per line, label 1 = changed.
pub fn write_decisions<W: Write>(decisions: &[BinaryDecision], mut sink: W) -> Result<()> {
    for d in decisions {
        writeln!(
            sink,
            "{}\t{}\t{}\t{}",
            d.word,
            u8::from(d.changed),
            d.threshold_used,
            d.strategy
        )?;
    }
    sink.flush()?;
    Ok(())
}

/// Parse a scores TSV written by [`write_scores`].
pub fn read_scores(text: &str) -> Result<Vec<ChangeScore>> {
    let mut scores = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [word, sim, dist] = fields[..] else {
            return Err(Error::parse(i + 1, "expected word, similarity, distance"));
        };
        let parse = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::parse(i + 1, format!("non-numeric value '{v}'")))
        };
        scores.push(ChangeScore {
            word: word.to_owned(),
            similarity: parse(sim)?,
            distance: parse(dist)?,
        });
    }
    Ok(scores)
}
