//! Corpus ingestion and vocabulary construction.
//!
//! Two line-oriented formats are understood:
//!
//! * `tsv`: one token per line as `form \t pos \t lemma`, samples separated
//!   by a blank line. Each record is rendered into a unit string according to
//!   a [`CorpusVariant`].
//! * `plain`: one sample per line, units already rendered and separated by
//!   spaces.
//!
//! Tokens are opaque strings: no case folding or normalization is applied.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separator between the base string and the POS tag in POS-augmented units.
pub const POS_SEPARATOR: char = '_';

/// A single annotated token from a TSV corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenRecord {
    pub form: String,
    pub pos: String,
    pub lemma: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusVariant {
    Form,
    Lemma,
    FormPos,
    LemmaPos,
}

impl CorpusVariant {
    pub const ALL: [CorpusVariant; 4] = [
        CorpusVariant::Form,
        CorpusVariant::Lemma,
        CorpusVariant::FormPos,
        CorpusVariant::LemmaPos,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorpusVariant::Form => "form",
            CorpusVariant::Lemma => "lemma",
            CorpusVariant::FormPos => "form_pos",
            CorpusVariant::LemmaPos => "lemma_pos",
        }
    }

    fn uses_lemma(self) -> bool {
        matches!(self, CorpusVariant::Lemma | CorpusVariant::LemmaPos)
    }

    fn uses_pos(self) -> bool {
        matches!(self, CorpusVariant::FormPos | CorpusVariant::LemmaPos)
    }
}

impl fmt::Display for CorpusVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown corpus variant '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    Plain,
    Tsv,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(CorpusFormat::Plain),
            "tsv" => Ok(CorpusFormat::Tsv),
            _ => Err(Error::InvalidInput(format!("unknown corpus format '{s}'"))),
        }
    }
}

impl TokenRecord {
    /// Render the record as a unit string under `variant`.
    ///
    /// Returns `None` when the variant needs a field that is empty.
    pub fn render(&self, variant: CorpusVariant) -> Option<String> {
        let base = if variant.uses_lemma() {
            &self.lemma
        } else {
            &self.form
        };
        if base.is_empty() {
            return None;
        }
        if variant.uses_pos() {
            if self.pos.is_empty() {
                return None;
            }
            Some(format!("{base}{POS_SEPARATOR}{}", self.pos))
        } else {
            Some(base.clone())
        }
    }
}

/// Split a POS-augmented unit into its base string and tag.
///
/// The tag is whatever follows the last separator, so bases that themselves
/// contain `_` are recovered intact.
pub fn split_rendered(unit: &str) -> Option<(&str, &str)> {
    unit.rsplit_once(POS_SEPARATOR)
}

/// One text sample rendered as a list of units.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(pub Vec<String>);

impl TokenSequence {
    pub fn new(units: Vec<String>) -> Self {
        TokenSequence(units)
    }

    pub fn units(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSequence(iter.into_iter().map(Into::into).collect())
    }
}

/// Streaming corpus reader yielding one [`TokenSequence`] per non-empty sample.
pub struct CorpusReader<R> {
    lines: std::io::Lines<R>,
    format: CorpusFormat,
    variant: CorpusVariant,
    line_no: usize,
    done: bool,
}

/// Parse a corpus from a buffered reader.
pub fn parse_corpus<R: BufRead>(
    input: R,
    format: CorpusFormat,
    variant: CorpusVariant,
) -> CorpusReader<R> {
    CorpusReader {
        lines: input.lines(),
        format,
        variant,
        line_no: 0,
        done: false,
    }
}

/// Read a whole corpus file into memory.
pub fn read_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    variant: CorpusVariant,
) -> Result<Vec<TokenSequence>> {
    let file = File::open(path.as_ref())?;
    parse_corpus(BufReader::new(file), format, variant).collect()
}

impl<R: BufRead> CorpusReader<R> {
    fn next_line(&mut self) -> Option<Result<String>> {
        let line = self.lines.next()?;
        self.line_no += 1;
        Some(
            line.map(|mut l| {
                if l.ends_with('\r') {
                    l.pop();
                }
                l
            })
            .map_err(Error::from),
        )
    }

    fn next_plain(&mut self) -> Option<Result<TokenSequence>> {
        loop {
            let line = match self.next_line()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e)),
            };
            let sample: TokenSequence = line.split_whitespace().collect();
            if !sample.is_empty() {
                return Some(Ok(sample));
            }
        }
    }

    fn next_tsv(&mut self) -> Option<Result<TokenSequence>> {
        let mut units = Vec::new();
        loop {
            let line = match self.next_line() {
                None => break,
                Some(Ok(line)) => line,
                Some(Err(e)) => return Some(Err(e)),
            };
            if line.trim().is_empty() {
                if units.is_empty() {
                    continue;
                }
                break;
            }
            match self.parse_record(&line) {
                Ok(unit) => units.push(unit),
                Err(e) => return Some(Err(e)),
            }
        }
        if units.is_empty() {
            None
        } else {
            Some(Ok(TokenSequence(units)))
        }
    }

    fn parse_record(&self, line: &str) -> Result<String> {
        let mut fields = line.split('\t');
        let (form, pos, lemma) = match (fields.next(), fields.next(), fields.next()) {
            (Some(f), Some(p), Some(l)) => (f, p, l),
            _ => {
                return Err(Error::parse(
                    self.line_no,
                    "expected 3 tab-separated fields (form, pos, lemma)",
                ))
            }
        };
        if form.is_empty() || form.chars().any(char::is_whitespace) {
            return Err(Error::parse(
                self.line_no,
                format!("invalid form '{form}': must be non-empty without whitespace"),
            ));
        }
        let record = TokenRecord {
            form: form.to_owned(),
            pos: pos.to_owned(),
            lemma: lemma.to_owned(),
        };
        record.render(self.variant).ok_or_else(|| {
            Error::parse(
                self.line_no,
                format!("variant {} needs a field that is empty", self.variant),
            )
        })
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<TokenSequence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match self.format {
            CorpusFormat::Plain => self.next_plain(),
            CorpusFormat::Tsv => self.next_tsv(),
        };
        if matches!(item, None | Some(Err(_))) {
            self.done = true;
        }
        item
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocabEntry {
    pub word: String,
    pub count: u64,
}

/// Frequency-filtered word index.
///
/// Entries are ordered by descending count, ties broken by the word itself,
/// and indices are dense in that order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.entries[idx].word
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.entries[idx].count
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.word.as_str())
    }

    /// Total number of in-vocabulary tokens.
    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }
}

/// Mergeable word counter; shards may be counted independently and merged.
#[derive(Clone, Debug, Default)]
pub struct VocabCounter {
    counts: HashMap<String, u64>,
}

impl VocabCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sample(&mut self, sample: &TokenSequence) {
        for unit in sample.iter() {
            self.add(unit);
        }
    }

    pub fn add(&mut self, word: &str) {
        if let Some(c) = self.counts.get_mut(word) {
            *c += 1;
        } else {
            self.counts.insert(word.to_owned(), 1);
        }
    }

    pub fn merge(&mut self, other: VocabCounter) {
        for (word, count) in other.counts {
            *self.counts.entry(word).or_insert(0) += count;
        }
    }

    pub fn finish(self, min_count: u64) -> Vocabulary {
        let mut entries: Vec<VocabEntry> = self
            .counts
            .into_iter()
            .filter(|&(_, count)| count >= min_count)
            .map(|(word, count)| VocabEntry { word, count })
            .collect();
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.word.clone(), i))
            .collect();
        Vocabulary { entries, index }
    }
}

/// Count units over `samples` and keep those occurring at least `min_count` times.
pub fn build_vocab<'a, I>(samples: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a TokenSequence>,
{
    if min_count == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    let mut counter = VocabCounter::new();
    for sample in samples {
        counter.add_sample(sample);
    }
    Ok(counter.finish(min_count))
}
