//! Repeated-runs ranking strategy.
//!
//! Each run ranks the targets by cosine distance (rank 1 = largest distance,
//! the most changed). Runs are grouped by embedding pair; within a pair the
//! ranks are averaged and their population standard deviation taken. The
//! composite rank of a word is the mean of its per-pair means, and its
//! standard error is the standard deviation of the per-pair means divided by
//! the square root of the number of pairs (not the number of runs).

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::change::{BinaryDecision, ChangeScore, Strategy};
use crate::error::{Error, Result};
use crate::stats::{exact_mean, population_std};

/// Rank targets by descending distance; exact ties go to the lexicographically
/// smaller word first.
pub fn rank_one_run(scores: &[ChangeScore]) -> Result<BTreeMap<String, usize>> {
    if scores.is_empty() {
        return Err(Error::InvalidInput(
            "cannot rank an empty score list".into(),
        ));
    }
    let mut order: Vec<&ChangeScore> = scores.iter().collect();
    order.sort_by(|a, b| {
        b.distance
            .total_cmp(&a.distance)
            .then_with(|| a.word.cmp(&b.word))
    });
    let mut ranks = BTreeMap::new();
    for (i, s) in order.into_iter().enumerate() {
        if ranks.insert(s.word.clone(), i + 1).is_some() {
            return Err(Error::InvalidInput(format!(
                "word '{}' scored twice",
                s.word
            )));
        }
    }
    Ok(ranks)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankRun {
    pub pair_id: String,
    pub run_id: u32,
    pub ranks: BTreeMap<String, usize>,
    /// Distances behind the ranks; may be empty for runs built from ranks alone.
    pub distances: BTreeMap<String, f64>,
}

impl RankRun {
    pub fn from_scores(
        pair_id: impl Into<String>,
        run_id: u32,
        scores: &[ChangeScore],
    ) -> Result<Self> {
        Ok(RankRun {
            pair_id: pair_id.into(),
            run_id,
            ranks: rank_one_run(scores)?,
            distances: scores
                .iter()
                .map(|s| (s.word.clone(), s.distance))
                .collect(),
        })
    }

    pub fn from_ranks<S: Into<String>>(
        pair_id: impl Into<String>,
        run_id: u32,
        ranks: impl IntoIterator<Item = (S, usize)>,
    ) -> Self {
        RankRun {
            pair_id: pair_id.into(),
            run_id,
            ranks: ranks.into_iter().map(|(w, r)| (w.into(), r)).collect(),
            distances: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankSummary {
    pub word: String,
    pub mean_rank_per_pair: BTreeMap<String, f64>,
    pub std_per_pair: BTreeMap<String, f64>,
    pub composite_rank: f64,
    pub sem: f64,
    /// Mean of per-pair mean distances, when the runs carry distances.
    pub mean_distance: Option<f64>,
}

/// Combine runs into one summary per word, ordered by word.
pub fn aggregate_ranks(runs: &[RankRun]) -> Result<Vec<RankSummary>> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidInput("no runs to aggregate".into()))?;
    let words: BTreeSet<&String> = first.ranks.keys().collect();
    let n = words.len();

    let mut by_pair: BTreeMap<&str, Vec<&RankRun>> = BTreeMap::new();
    for run in runs {
        let run_words: BTreeSet<&String> = run.ranks.keys().collect();
        if run_words != words {
            return Err(Error::InvalidInput(format!(
                "run {} of pair '{}' covers a different target set",
                run.run_id, run.pair_id
            )));
        }
        let mut seen: Vec<usize> = run.ranks.values().copied().collect();
        seen.sort_unstable();
        if seen.into_iter().ne(1..=n) {
            return Err(Error::InvalidInput(format!(
                "run {} of pair '{}' is not a permutation of 1..{n}",
                run.run_id, run.pair_id
            )));
        }
        by_pair.entry(run.pair_id.as_str()).or_default().push(run);
    }
    for pair_runs in by_pair.values_mut() {
        pair_runs.sort_by_key(|r| r.run_id);
        if pair_runs.windows(2).any(|w| w[0].run_id == w[1].run_id) {
            return Err(Error::InvalidInput("duplicate run id within a pair".into()));
        }
    }

    let n_pairs = by_pair.len() as f64;
    let summaries = words
        .into_iter()
        .map(|word| {
            let mut mean_rank_per_pair = BTreeMap::new();
            let mut std_per_pair = BTreeMap::new();
            let mut pair_distances = Vec::new();
            for (&pair, pair_runs) in &by_pair {
                let ranks: Vec<f64> = pair_runs.iter().map(|r| r.ranks[word] as f64).collect();
                mean_rank_per_pair.insert(pair.to_owned(), exact_mean(ranks.iter().copied()));
                std_per_pair.insert(pair.to_owned(), population_std(&ranks));
                let dists: Vec<f64> = pair_runs
                    .iter()
                    .filter_map(|r| r.distances.get(word).copied())
                    .collect();
                if !dists.is_empty() {
                    pair_distances.push(exact_mean(dists));
                }
            }
            let means: Vec<f64> = mean_rank_per_pair.values().copied().collect();
            RankSummary {
                word: word.clone(),
                composite_rank: exact_mean(means.iter().copied()),
                sem: population_std(&means) / n_pairs.sqrt(),
                mean_rank_per_pair,
                std_per_pair,
                mean_distance: (!pair_distances.is_empty()).then(|| exact_mean(pair_distances)),
            }
        })
        .collect();
    Ok(summaries)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankSplit {
    /// One decision per word, most changed first.
    pub decisions: Vec<BinaryDecision>,
    /// Number of words above the rank gap.
    pub rank_split: usize,
    /// Number of words above the distance gap, if the distances have one.
    pub distance_split: Option<usize>,
    pub warning: Option<String>,
}

/// Index `k` such that the widest gap lies between sorted items `k-1` and `k`.
/// Ties go to the smallest `k`.
fn widest_gap(sorted: &[f64]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, w) in sorted.windows(2).enumerate() {
        let gap = (w[1] - w[0]).abs();
        if gap > 0.0 && best.is_none_or(|(g, _)| gap > g) {
            best = Some((gap, i + 1));
        }
    }
    best.map(|(_, k)| k)
}

/// Split the ranked targets into changed and unchanged sets.
///
/// The split is placed in the widest gap between consecutive composite ranks.
/// The widest gap in the distance estimates is computed as well; when the two
/// disagree on which words are changed the rank split is kept and a warning
/// naming both candidates is returned (and logged).
pub fn split_by_rank_gap(
    summaries: &[RankSummary],
    distance_estimates: &BTreeMap<String, f64>,
) -> Result<RankSplit> {
    if summaries.len() < 2 {
        return Err(Error::InvalidInput(
            "rank split needs at least two targets".into(),
        ));
    }
    let mut by_rank: Vec<&RankSummary> = summaries.iter().collect();
    by_rank.sort_by(|a, b| {
        a.composite_rank
            .total_cmp(&b.composite_rank)
            .then_with(|| a.word.cmp(&b.word))
    });
    let ranks: Vec<f64> = by_rank.iter().map(|s| s.composite_rank).collect();
    let k = widest_gap(&ranks)
        .ok_or_else(|| Error::InvalidInput("all composite ranks are equal; no gap".into()))?;
    let threshold = ranks[k - 1] + (ranks[k] - ranks[k - 1]) / 2.0;

    let mut by_distance: Vec<(&str, f64)> = summaries
        .iter()
        .map(|s| {
            distance_estimates
                .get(&s.word)
                .map(|&d| (s.word.as_str(), d))
                .ok_or_else(|| {
                    Error::InvalidInput(format!("no distance estimate for '{}'", s.word))
                })
        })
        .collect::<Result<_>>()?;
    by_distance.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let dists: Vec<f64> = by_distance.iter().map(|&(_, d)| d).collect();
    let distance_split = widest_gap(&dists);

    let rank_changed: BTreeSet<&str> = by_rank[..k].iter().map(|s| s.word.as_str()).collect();
    let warning = match distance_split {
        Some(kd) => {
            let dist_changed: BTreeSet<&str> = by_distance[..kd].iter().map(|&(w, _)| w).collect();
            (dist_changed != rank_changed).then(|| {
                format!(
                    "rank gap and distance gap disagree: rank gap marks {:?} changed, distance gap marks {:?}; keeping the rank split",
                    rank_changed, dist_changed
                )
            })
        }
        None => Some("distance estimates have no gap; keeping the rank split".to_owned()),
    };
    if let Some(w) = &warning {
        log::warn!("{w}");
    }

    let decisions = by_rank
        .iter()
        .enumerate()
        .map(|(i, s)| BinaryDecision {
            word: s.word.clone(),
            changed: i < k,
            threshold_used: threshold,
            strategy: Strategy::RankGap,
        })
        .collect();
    Ok(RankSplit {
        decisions,
        rank_split: k,
        distance_split,
        warning,
    })
}

/// Per-word mean distance estimates from summaries.
pub fn distance_estimates(summaries: &[RankSummary]) -> BTreeMap<String, f64> {
    summaries
        .iter()
        .filter_map(|s| s.mean_distance.map(|d| (s.word.clone(), d)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct StabilityGroup {
    pub variant: String,
    pub dim: usize,
    pub runs: Vec<RankRun>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub variant: String,
    pub dim: usize,
    pub mean_rank_std: f64,
}

/// Mean over targets of the per-target rank standard deviation, for every
/// (variant, dimension) group.
pub fn variant_stability_report(groups: &[StabilityGroup]) -> Vec<StabilityRow> {
    let mut rows: Vec<StabilityRow> = groups
        .iter()
        .map(|g| {
            let mut per_word: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for run in &g.runs {
                for (w, &r) in &run.ranks {
                    per_word.entry(w.as_str()).or_default().push(r as f64);
                }
            }
            let mean_rank_std = if per_word.is_empty() {
                0.0
            } else {
                exact_mean(per_word.values().map(|ranks| population_std(ranks)))
            };
            StabilityRow {
                variant: g.variant.clone(),
                dim: g.dim,
                mean_rank_std,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.variant.cmp(&b.variant).then(a.dim.cmp(&b.dim)));
    rows
}

pub fn write_stability_report<W: Write>(rows: &[StabilityRow], mut sink: W) -> Result<()> {
    for r in rows {
        writeln!(sink, "{}\t{}\t{}", r.variant, r.dim, r.mean_rank_std)?;
    }
    sink.flush()?;
    Ok(())
}

/// `pair_id \t run_id \t word \t distance \t rank`, one line per word and run.
pub fn write_run_ledger<W: Write>(runs: &[RankRun], mut sink: W) -> Result<()> {
    for run in runs {
        for (word, rank) in &run.ranks {
            let distance = run
                .distances
                .get(word)
                .map_or_else(|| "NA".to_owned(), f64::to_string);
            writeln!(
                sink,
                "{}\t{}\t{}\t{}\t{}",
                run.pair_id, run.run_id, word, distance, rank
            )?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// `word \t composite_rank \t sem \t mean_distance \t label`, most changed first.
pub fn write_summary<W: Write>(
    summaries: &[RankSummary],
    split: &RankSplit,
    mut sink: W,
) -> Result<()> {
    let by_word: BTreeMap<&str, &RankSummary> =
        summaries.iter().map(|s| (s.word.as_str(), s)).collect();
    for d in &split.decisions {
        let s = by_word[d.word.as_str()];
        let distance = s
            .mean_distance
            .map_or_else(|| "NA".to_owned(), |v| v.to_string());
        writeln!(
            sink,
            "{}\t{}\t{}\t{}\t{}",
            s.word,
            s.composite_rank,
            s.sem,
            distance,
            u8::from(d.changed)
        )?;
    }
    sink.flush()?;
    Ok(())
}
