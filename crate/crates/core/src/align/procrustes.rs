//! Supervised orthogonal mapping (orthogonal Procrustes).
//!
//! With the dictionary vectors stacked as rows of `S` (source) and `T`
//! (target), the orthogonal `W` minimizing `‖S W − T‖_F` is `U Vᵀ`, where
//! `U Σ Vᵀ` is the SVD of `Sᵀ T`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use super::linalg::stack_rows;
use super::{dictionary_rows, Method, SeedDictionary, Transform};
use crate::error::{Error, Result};
use crate::sgns::EmbeddingSpace;

/// Normalization applied to dictionary vectors before fitting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    None,
    /// Scale every vector to unit length.
    #[default]
    Unit,
    /// Unit length, subtract the per-side dictionary mean, unit length again.
    UnitCenter,
}

impl fmt::Display for Preprocess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preprocess::None => "none",
            Preprocess::Unit => "unit",
            Preprocess::UnitCenter => "unit_center",
        })
    }
}

impl FromStr for Preprocess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Preprocess::None),
            "unit" => Ok(Preprocess::Unit),
            "unit_center" => Ok(Preprocess::UnitCenter),
            _ => Err(Error::InvalidInput(format!("unknown preprocessing '{s}'"))),
        }
    }
}

fn normalize_rows(m: &mut DMatrix<f64>, side: &str) -> Result<()> {
    for (i, mut row) in m.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm == 0.0 {
            return Err(Error::Numerical(format!(
                "dictionary entry {i} has a zero {side} vector"
            )));
        }
        row /= norm;
    }
    Ok(())
}

fn preprocess(m: &mut DMatrix<f64>, how: Preprocess, side: &str) -> Result<()> {
    match how {
        Preprocess::None => Ok(()),
        Preprocess::Unit => normalize_rows(m, side),
        Preprocess::UnitCenter => {
            normalize_rows(m, side)?;
            super::linalg::center_columns(m);
            normalize_rows(m, side)
        }
    }
}

/// Solve the orthogonal Procrustes problem on already-stacked rows.
pub fn procrustes(source: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if source.shape() != target.shape() {
        return Err(Error::DimensionMismatch {
            expected: source.ncols(),
            found: target.ncols(),
        });
    }
    let cross = source.transpose() * target;
    if cross.amax() == 0.0 {
        return Err(Error::Numerical(
            "dictionary vectors are degenerate (zero cross-covariance)".into(),
        ));
    }
    let svd = SVD::new(cross, true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(u * v_t),
        _ => Err(Error::Numerical("SVD did not converge".into())),
    }
}

pub fn fit_orthogonal(
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    dict: &SeedDictionary,
    how: Preprocess,
) -> Result<Transform> {
    let (src_rows, tgt_rows) = dictionary_rows(src, tgt, dict)?;
    let d = src.dim();
    let mut s = stack_rows(src_rows.into_iter(), d);
    let mut t = stack_rows(tgt_rows.into_iter(), d);
    preprocess(&mut s, how, "source")?;
    preprocess(&mut t, how, "target")?;
    let w = procrustes(&s, &t)?;
    Transform::new(w, true, Method::Procrustes)
}
