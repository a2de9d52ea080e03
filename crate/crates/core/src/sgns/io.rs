//! word2vec text format.
//!
//! A header line `<words> <dim>` followed by one line per word: the word and
//! then `dim` space-separated reals. Values are written with the shortest
//! representation that parses back to the same `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::EmbeddingSpace;
use crate::error::{Error, Result};

pub fn save_embeddings<W: Write>(space: &EmbeddingSpace, mut sink: W) -> Result<()> {
    writeln!(sink, "{} {}", space.len(), space.dim())?;
    for (word, row) in space.rows() {
        sink.write_all(word.as_bytes())?;
        for v in row {
            write!(sink, " {v}")?;
        }
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn load_embeddings<R: BufRead>(source: R) -> Result<EmbeddingSpace> {
    let mut lines = source.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(1, "missing header"))??;
    let mut parts = header.split_whitespace();
    let parse_count = |s: Option<&str>, what: &str| -> Result<usize> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(1, format!("header lacks a valid {what}")))
    };
    let n_words = parse_count(parts.next(), "word count")?;
    let dim = parse_count(parts.next(), "dimension")?;
    if parts.next().is_some() {
        return Err(Error::format(1, "header has trailing fields"));
    }
    if dim == 0 {
        return Err(Error::format(1, "dimension must be positive"));
    }

    let mut words = Vec::with_capacity(n_words);
    let mut data = Vec::with_capacity(n_words * dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if words.len() == n_words {
            return Err(Error::format(
                line_no,
                format!("more rows than the {n_words} declared in the header"),
            ));
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("non-empty line has a field");
        let before = data.len();
        for field in fields {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(line_no, format!("non-numeric component '{field}'")))?;
            if !v.is_finite() {
                return Err(Error::format(
                    line_no,
                    format!("non-finite component '{field}'"),
                ));
            }
            data.push(v);
        }
        if data.len() - before != dim {
            return Err(Error::format(
                line_no,
                format!("expected {dim} components, found {}", data.len() - before),
            ));
        }
        words.push(word.to_owned());
    }
    if words.len() != n_words {
        return Err(Error::format(
            n_words + 1,
            format!(
                "header declares {n_words} rows but file has {}",
                words.len()
            ),
        ));
    }
    EmbeddingSpace::new(words, dim, data)
}

pub fn save_embeddings_file(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    save_embeddings(space, BufWriter::new(File::create(path)?))
}

pub fn load_embeddings_file(path: impl AsRef<Path>) -> Result<EmbeddingSpace> {
    load_embeddings(BufReader::new(File::open(path)?))
}
