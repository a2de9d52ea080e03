//! Subcommand implementations. Each stage reads and writes files so the
//! pipeline is exactly the chain of its stages; outputs are written to a
//! temporary file and renamed into place, so a failing stage never clobbers
//! earlier results.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{DecisionStrategy, Needs, RunConfig};
use crate::align::{apply_transform, build_seed_dictionary, fit, DictionaryMode, Transform};
use crate::change::{
    classify_binary, read_scores, score_targets, write_decisions, write_missing, write_scores,
    ChangeScore, Strategy,
};
use crate::corpus::{read_corpus, split_rendered, CorpusVariant, TokenSequence};
use crate::error::{Error, Result};
use crate::eval::{accuracy, inject_changes, parse_labels, GoldLabels, InjectionPlan};
use crate::ranking::{
    aggregate_ranks, distance_estimates, split_by_rank_gap, variant_stability_report,
    write_run_ledger, write_stability_report, write_summary, RankRun, StabilityGroup,
};
use crate::seed::derive_seed;
use crate::sgns::{load_embeddings_file, save_embeddings, train_sgns, EmbeddingSpace, SgnsConfig};

pub const EARLIER_VEC: &str = "earlier.vec";
pub const LATER_VEC: &str = "later.vec";
pub const TRANSFORM: &str = "transform.txt";
pub const SCORES: &str = "scores.tsv";
pub const MISSING: &str = "missing.tsv";
pub const DECISIONS: &str = "decisions.tsv";
pub const EVAL: &str = "eval.tsv";
pub const RUN_LEDGER: &str = "runs.tsv";
pub const SUMMARY: &str = "summary.tsv";
pub const STABILITY: &str = "stability.tsv";
pub const INJECTED: &str = "later.injected.txt";
pub const GOLD: &str = "gold.tsv";

/// An error tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: Error,
}

pub type CmdResult<T> = std::result::Result<T, StageError>;

trait Tag<T> {
    fn stage(self, stage: &'static str) -> CmdResult<T>;
}

impl<T, E: Into<Error>> Tag<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> CmdResult<T> {
        self.map_err(|e| StageError {
            stage,
            source: e.into(),
        })
    }
}

/// Write `path` via a sibling temporary file and an atomic rename.
pub fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => Ok(fs::rename(&tmp, path)?),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Target words, one per line; only the first tab- or space-separated field
/// counts, so a gold file doubles as a target list.
pub fn read_targets(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    let mut seen = HashSet::new();
    let mut targets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(word) = line.split_whitespace().next() else {
            continue;
        };
        if !seen.insert(word.to_owned()) {
            return Err(Error::parse(i + 1, format!("duplicate target '{word}'")));
        }
        targets.push(word.to_owned());
    }
    if targets.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no targets in {}",
            path.display()
        )));
    }
    Ok(targets)
}

fn sgns_for(config: &RunConfig, dim: usize, seed: u64) -> SgnsConfig {
    SgnsConfig {
        dim,
        seed,
        ..config.sgns.clone()
    }
}

fn read_slices(config: &RunConfig, variant: CorpusVariant) -> Result<[Vec<TokenSequence>; 2]> {
    let c = &config.corpus;
    Ok([
        read_corpus(&c.earlier, c.format, variant)?,
        read_corpus(&c.later, c.format, variant)?,
    ])
}

fn write_space(space: &EmbeddingSpace, path: &Path) -> Result<()> {
    write_atomic(path, |w| save_embeddings(space, w))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutput {
    pub earlier: PathBuf,
    pub later: PathBuf,
}

/// Train one embedding space per corpus slice.
pub fn cmd_train(config: &RunConfig) -> CmdResult<TrainOutput> {
    config.validate(&[Needs::Corpora]).stage("train")?;
    let slices = read_slices(config, config.corpus.variant).stage("train")?;
    let out = TrainOutput {
        earlier: config.output(EARLIER_VEC),
        later: config.output(LATER_VEC),
    };
    for (i, (samples, path)) in slices.iter().zip([&out.earlier, &out.later]).enumerate() {
        let sgns = sgns_for(
            config,
            config.sgns.dim,
            derive_seed(config.seed, "train", 0, i as u64),
        );
        log::info!("training {} ({} samples)", path.display(), samples.len());
        let space = train_sgns(samples, &sgns).stage("train")?;
        write_space(&space, path).stage("train")?;
    }
    Ok(out)
}

/// Fit the transform mapping the earlier space onto the later one.
pub fn cmd_align(config: &RunConfig, earlier: &Path, later: &Path) -> CmdResult<PathBuf> {
    config.validate(&[Needs::Targets]).stage("align")?;
    let targets: HashSet<String> = read_targets(&config.targets)
        .stage("align")?
        .into_iter()
        .collect();
    let src = load_embeddings_file(earlier).stage("align")?;
    let tgt = load_embeddings_file(later).stage("align")?;
    let a = &config.align;
    let dict = build_seed_dictionary(
        &src,
        &tgt,
        &targets,
        a.dictionary,
        a.dictionary_size,
        derive_seed(config.seed, "dict", 0, 0),
    )
    .stage("align")?;
    log::info!(
        "aligning with {} over {} dictionary pairs",
        a.method,
        dict.len()
    );
    let transform = fit(a.method, &src, &tgt, &dict, a.preprocess, a.ridge).stage("align")?;
    let path = config.output(TRANSFORM);
    write_atomic(&path, |w| transform.write(w)).stage("align")?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreOutput {
    pub scores: PathBuf,
    pub missing: PathBuf,
}

/// Score every target by the cosine distance of its aligned vectors.
pub fn cmd_score(
    config: &RunConfig,
    transform: &Path,
    earlier: &Path,
    later: &Path,
) -> CmdResult<ScoreOutput> {
    config.validate(&[Needs::Targets]).stage("score")?;
    let targets = read_targets(&config.targets).stage("score")?;
    let t = Transform::load_file(transform).stage("score")?;
    let src = load_embeddings_file(earlier).stage("score")?;
    let tgt = load_embeddings_file(later).stage("score")?;
    let aligned = apply_transform(&t, &src).stage("score")?;
    let report = score_targets(&aligned, &tgt, &targets).stage("score")?;
    for m in &report.missing {
        log::warn!("target '{}' missing from {} space", m.word, m.side);
    }
    let out = ScoreOutput {
        scores: config.output(SCORES),
        missing: config.output(MISSING),
    };
    write_atomic(&out.scores, |w| write_scores(&report.scores, w)).stage("score")?;
    write_atomic(&out.missing, |w| write_missing(&report.missing, w)).stage("score")?;
    Ok(out)
}

/// Turn scores into binary decisions with the configured strategy.
pub fn cmd_classify(config: &RunConfig, scores: &Path) -> CmdResult<PathBuf> {
    config.validate(&[Needs::Decision]).stage("classify")?;
    let strategy = match config.decision.strategy {
        DecisionStrategy::Mean => Strategy::Mean,
        DecisionStrategy::LargestGap => Strategy::LargestGap,
        DecisionStrategy::Fixed => Strategy::Fixed,
        DecisionStrategy::Ranking => {
            return Err(Error::Config(
                "the ranking strategy decides from repeated runs; use the rank command".into(),
            ))
            .stage("classify")
        }
    };
    let text = fs::read_to_string(scores).stage("classify")?;
    let scores = read_scores(&text).stage("classify")?;
    let decisions =
        classify_binary(&scores, strategy, config.decision.fixed_t).stage("classify")?;
    let path = config.output(DECISIONS);
    write_atomic(&path, |w| write_decisions(&decisions, w)).stage("classify")?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankOutput {
    pub ledger: PathBuf,
    pub summary: PathBuf,
    pub stability: PathBuf,
    pub decisions: PathBuf,
    pub warning: Option<String>,
}

fn pair_id(variant: CorpusVariant, dim: usize) -> String {
    format!("{variant}:d{dim}")
}

/// Map each target to the unit scored for it: the target itself when both
/// spaces contain it, otherwise its most frequent POS-tagged rendering (so a
/// lemma target list also serves the `*_pos` variants). Unresolvable targets
/// are dropped with a warning.
fn resolve_targets(
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    targets: &[String],
) -> Vec<(String, String)> {
    targets
        .iter()
        .filter_map(|t| {
            let unit = if src.contains(t) && tgt.contains(t) {
                Some(t.as_str())
            } else {
                src.words().iter().map(String::as_str).find(|u| {
                    split_rendered(u).is_some_and(|(base, _)| base == t) && tgt.contains(u)
                })
            };
            if unit.is_none() {
                log::warn!("target '{t}' not found in both spaces");
            }
            unit.map(|u| (t.clone(), u.to_owned()))
        })
        .collect()
}

/// Train one embedding pair per scheduled dimension; each run aligns the pair
/// with a fresh random dictionary and ranks the targets.
fn rank_variant(
    config: &RunConfig,
    variant: CorpusVariant,
    targets: &[String],
) -> Result<Vec<StabilityGroup>> {
    let [earlier, later] = read_slices(config, variant)?;
    let no_exclusions = HashSet::new();
    let a = &config.align;
    let stage = format!("train:{variant}");
    let dict_stage = format!("dict:{variant}");
    let mut groups = Vec::new();
    for dim in config.ranking.dimensions() {
        let pair = dim as u64;
        let src = train_sgns(
            &earlier,
            &sgns_for(config, dim, derive_seed(config.seed, &stage, pair, 0)),
        )?;
        let tgt = train_sgns(
            &later,
            &sgns_for(config, dim, derive_seed(config.seed, &stage, pair, 1)),
        )?;
        let resolved = resolve_targets(&src, &tgt, targets);
        let id = pair_id(variant, dim);
        log::info!("pair {id}: {} runs", config.ranking.runs_per_pair);
        let runs = (0..config.ranking.runs_per_pair as u64)
            .into_par_iter()
            .map(|run| {
                let dict = build_seed_dictionary(
                    &src,
                    &tgt,
                    &no_exclusions,
                    DictionaryMode::RandomK,
                    a.dictionary_size,
                    derive_seed(config.seed, &dict_stage, pair, run),
                )?;
                let t = fit(a.method, &src, &tgt, &dict, a.preprocess, a.ridge)?;
                let units: Vec<&str> = resolved.iter().map(|(_, u)| u.as_str()).collect();
                let report = score_targets(&apply_transform(&t, &src)?, &tgt, &units)?;
                let scores: Vec<ChangeScore> = report
                    .scores
                    .into_iter()
                    .zip(&resolved)
                    .map(|(s, (target, _))| ChangeScore {
                        word: target.clone(),
                        ..s
                    })
                    .collect();
                RankRun::from_scores(id.clone(), run as u32, &scores)
            })
            .collect::<Result<Vec<_>>>()?;
        groups.push(StabilityGroup {
            variant: variant.to_string(),
            dim,
            runs,
        });
    }
    Ok(groups)
}

/// Run the repeated-runs ranking schedule.
pub fn cmd_rank(config: &RunConfig) -> CmdResult<RankOutput> {
    config
        .validate(&[Needs::Corpora, Needs::Targets, Needs::Ranking])
        .stage("rank")?;
    let targets = read_targets(&config.targets).stage("rank")?;
    let mut variants = vec![config.corpus.variant];
    for &v in &config.ranking.variants {
        if !variants.contains(&v) {
            variants.push(v);
        }
    }
    let mut groups = Vec::new();
    for &v in &variants {
        groups.extend(rank_variant(config, v, &targets).stage("rank")?);
    }
    let primary = config.corpus.variant.to_string();
    let primary_runs: Vec<RankRun> = groups
        .iter()
        .filter(|g| g.variant == primary)
        .flat_map(|g| g.runs.iter().cloned())
        .collect();
    let summaries = aggregate_ranks(&primary_runs).stage("rank")?;
    let split = split_by_rank_gap(&summaries, &distance_estimates(&summaries)).stage("rank")?;
    let all_runs: Vec<RankRun> = groups.iter().flat_map(|g| g.runs.iter().cloned()).collect();
    let stability = variant_stability_report(&groups);

    let out = RankOutput {
        ledger: config.output(RUN_LEDGER),
        summary: config.output(SUMMARY),
        stability: config.output(STABILITY),
        decisions: config.output(DECISIONS),
        warning: split.warning.clone(),
    };
    write_atomic(&out.ledger, |w| write_run_ledger(&all_runs, w)).stage("rank")?;
    write_atomic(&out.summary, |w| write_summary(&summaries, &split, w)).stage("rank")?;
    write_atomic(&out.stability, |w| write_stability_report(&stability, w)).stage("rank")?;
    write_atomic(&out.decisions, |w| write_decisions(&split.decisions, w)).stage("rank")?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
}

impl EvalReport {
    pub fn write<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "accuracy\t{}", self.accuracy)?;
        writeln!(sink, "correct\t{}", self.correct)?;
        writeln!(sink, "total\t{}", self.total)?;
        sink.flush()?;
        Ok(())
    }
}

/// Compare a predictions file (decisions or gold layout) with gold labels.
pub fn cmd_eval(predictions: &Path, gold: &Path) -> CmdResult<EvalReport> {
    let pred = parse_labels(&fs::read_to_string(predictions).stage("eval")?).stage("eval")?;
    let gold = GoldLabels::read_file(gold).stage("eval")?;
    let acc = accuracy(&pred, &gold).stage("eval")?;
    let correct = gold
        .entries()
        .iter()
        .filter(|(w, l)| pred.get(*w) == Some(l))
        .count();
    Ok(EvalReport {
        accuracy: acc,
        correct,
        total: gold.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthOutput {
    pub corpus: PathBuf,
    pub gold: PathBuf,
}

/// Inject synthetic changes into the later corpus; writes a plain corpus and
/// the matching gold labels.
pub fn cmd_synth(config: &RunConfig, plan: &Path) -> CmdResult<SynthOutput> {
    let later = &config.corpus.later;
    if !later.is_file() {
        return Err(Error::Config(format!(
            "later corpus '{}' does not exist",
            later.display()
        )))
        .stage("synth");
    }
    let plan =
        InjectionPlan::from_toml(&fs::read_to_string(plan).stage("synth")?).stage("synth")?;
    let samples = read_corpus(later, config.corpus.format, config.corpus.variant).stage("synth")?;
    let (modified, gold) = inject_changes(samples, &plan, config.seed).stage("synth")?;
    let out = SynthOutput {
        corpus: config.output(INJECTED),
        gold: config.output(GOLD),
    };
    write_atomic(&out.corpus, |w| {
        for s in &modified {
            writeln!(w, "{}", s.units().join(" "))?;
        }
        Ok(())
    })
    .stage("synth")?;
    write_atomic(&out.gold, |w| gold.write(w)).stage("synth")?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutput {
    pub decisions: PathBuf,
    /// Absent for the ranking strategy, which writes run ledgers instead.
    pub scores: Option<PathBuf>,
    pub eval: Option<EvalReport>,
    pub warning: Option<String>,
}

/// Train, align, score, classify and, when gold labels are configured,
/// evaluate.
pub fn cmd_pipeline(config: &RunConfig) -> CmdResult<PipelineOutput> {
    config
        .validate(&[Needs::Corpora, Needs::Targets, Needs::Decision])
        .stage("pipeline")?;
    let mut out = if config.decision.strategy == DecisionStrategy::Ranking {
        let rank = cmd_rank(config)?;
        PipelineOutput {
            decisions: rank.decisions,
            scores: None,
            eval: None,
            warning: rank.warning,
        }
    } else {
        let spaces = cmd_train(config)?;
        let transform = cmd_align(config, &spaces.earlier, &spaces.later)?;
        let scored = cmd_score(config, &transform, &spaces.earlier, &spaces.later)?;
        let decisions = cmd_classify(config, &scored.scores)?;
        PipelineOutput {
            decisions,
            scores: Some(scored.scores),
            eval: None,
            warning: None,
        }
    };
    if let Some(gold) = &config.gold {
        let report = cmd_eval(&out.decisions, gold)?;
        write_atomic(&config.output(EVAL), |w| report.write(w)).stage("eval")?;
        out.eval = Some(report);
    }
    Ok(out)
}
