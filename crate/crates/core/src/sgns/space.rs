use std::collections::HashMap;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Dense word vectors stored row-major, one row per word.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingSpace {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        if data.len() != words.len() * dim {
            return Err(Error::InvalidInput(format!(
                "{} words of dimension {dim} need {} values, got {}",
                words.len(),
                words.len() * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite component in row of '{}'",
                words[pos / dim]
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate word '{w}'")));
            }
        }
        Ok(EmbeddingSpace {
            words,
            index,
            dim,
            data,
        })
    }

    pub fn from_vocab(vocab: &Vocabulary, dim: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vocab.words().map(str::to_owned).collect(), dim, data)
    }

    /// Build a space from `(word, vector)` rows.
    pub fn from_rows<S, I>(rows: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f64>)>,
    {
        let mut words = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (word, row) in rows {
            let word = word.into();
            match dim {
                None => dim = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: row.len(),
                    })
                }
                _ => {}
            }
            words.push(word);
            data.extend(row);
        }
        Self::new(words, dim.unwrap_or(0), data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.data.chunks_exact(self.dim))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Replace the matrix, keeping the word list.
    pub(crate) fn with_data(&self, dim: usize, data: Vec<f64>) -> Result<Self> {
        EmbeddingSpace::new(self.words.clone(), dim, data)
    }
}
