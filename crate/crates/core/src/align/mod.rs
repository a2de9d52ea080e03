//! Cross-space alignment: seed dictionaries, orthogonal and CCA transforms.

mod cca;
mod dictionary;
pub mod linalg;
mod procrustes;
mod transform;

pub use cca::{cca_from_rows, fit_cca, fit_cca_detailed, CcaFit, DEFAULT_RIDGE};
pub use dictionary::{build_seed_dictionary, DictionaryMode, Lexicon, SeedDictionary};
pub use procrustes::{fit_orthogonal, procrustes, Preprocess};
pub use transform::{apply_transform, Method, Transform, ORTHOGONALITY_TOL};

use crate::error::{Error, Result};
use crate::sgns::EmbeddingSpace;

type Rows<'a> = Vec<&'a [f64]>;

/// Look up the source and target rows of every dictionary pair.
fn dictionary_rows<'a>(
    src: &'a EmbeddingSpace,
    tgt: &'a EmbeddingSpace,
    dict: &SeedDictionary,
) -> Result<(Rows<'a>, Rows<'a>)> {
    if src.dim() != tgt.dim() {
        return Err(Error::DimensionMismatch {
            expected: src.dim(),
            found: tgt.dim(),
        });
    }
    if dict.is_empty() {
        return Err(Error::AlignmentSetup("seed dictionary is empty".into()));
    }
    let mut s = Vec::with_capacity(dict.len());
    let mut t = Vec::with_capacity(dict.len());
    for (sw, tw) in dict.pairs() {
        let sv = src
            .vector(sw)
            .ok_or_else(|| Error::AlignmentSetup(format!("'{sw}' missing from source space")))?;
        let tv = tgt
            .vector(tw)
            .ok_or_else(|| Error::AlignmentSetup(format!("'{tw}' missing from target space")))?;
        s.push(sv);
        t.push(tv);
    }
    Ok((s, t))
}

/// Fit a transform with the chosen method.
pub fn fit(
    method: Method,
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    dict: &SeedDictionary,
    preprocess: Preprocess,
    ridge: f64,
) -> Result<Transform> {
    match method {
        Method::Procrustes => fit_orthogonal(src, tgt, dict, preprocess),
        Method::Cca => fit_cca(src, tgt, dict, ridge),
    }
}
