//! Canonical correlation analysis composed into a single source→target map.
//!
//! Both sides of the dictionary are column-centered and whitened with their
//! ridge-regularized covariance `(Σ + ridge·I)^{-1/2}`. The SVD `U Σ Vᵀ` of the
//! whitened cross-covariance gives the canonical directions: the source
//! projection is `A = Σ_ss^{-1/2} U`, the target projection `B = Σ_tt^{-1/2} V`,
//! and the canonical correlations are the singular values. All `d` components
//! are kept. The source is carried into the shared space by `A` and back out
//! into target coordinates by `B⁺`, so the composed map is `W = A B⁺` and the
//! target space itself is never changed.

use nalgebra::{DMatrix, SVD};

use super::linalg::{all_finite, center_columns, inverse_sqrt_spd, pseudo_inverse, stack_rows};
use super::{dictionary_rows, Method, SeedDictionary, Transform};
use crate::error::{Error, Result};
use crate::sgns::EmbeddingSpace;

pub const DEFAULT_RIDGE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct CcaFit {
    pub transform: Transform,
    /// Canonical correlations, non-increasing, clamped to `[0, 1]`.
    pub correlations: Vec<f64>,
    /// Source-side projection into the shared space.
    pub source_projection: DMatrix<f64>,
    /// Target-side projection into the shared space.
    pub target_projection: DMatrix<f64>,
}

pub fn fit_cca(
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    dict: &SeedDictionary,
    ridge: f64,
) -> Result<Transform> {
    fit_cca_detailed(src, tgt, dict, ridge).map(|fit| fit.transform)
}

pub fn fit_cca_detailed(
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    dict: &SeedDictionary,
    ridge: f64,
) -> Result<CcaFit> {
    if dict.len() < 2 {
        return Err(Error::AlignmentSetup(format!(
            "CCA needs at least 2 dictionary pairs, got {}",
            dict.len()
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::Config(format!(
            "ridge must be non-negative, got {ridge}"
        )));
    }
    let (src_rows, tgt_rows) = dictionary_rows(src, tgt, dict)?;
    let d = src.dim();
    let s = stack_rows(src_rows.into_iter(), d);
    let t = stack_rows(tgt_rows.into_iter(), d);
    cca_from_rows(s, t, ridge)
}

pub fn cca_from_rows(mut s: DMatrix<f64>, mut t: DMatrix<f64>, ridge: f64) -> Result<CcaFit> {
    if s.shape() != t.shape() {
        return Err(Error::DimensionMismatch {
            expected: s.ncols(),
            found: t.ncols(),
        });
    }
    let n = s.nrows();
    let d = s.ncols();
    center_columns(&mut s);
    center_columns(&mut t);
    let scale = 1.0 / (n as f64 - 1.0);
    let regularizer = DMatrix::<f64>::identity(d, d) * ridge;
    let c_ss = s.transpose() * &s * scale + &regularizer;
    let c_tt = t.transpose() * &t * scale + &regularizer;
    let c_st = s.transpose() * &t * scale;

    let w_s = inverse_sqrt_spd(&c_ss)?;
    let w_t = inverse_sqrt_spd(&c_tt)?;
    let whitened = &w_s * c_st * &w_t;
    let svd = SVD::new(whitened, true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD did not converge".into())),
    };
    let correlations = svd
        .singular_values
        .iter()
        .map(|c| c.clamp(0.0, 1.0))
        .collect();
    let source_projection = w_s * u;
    let target_projection = w_t * v_t.transpose();
    let composed = &source_projection * pseudo_inverse(&target_projection)?;
    if !all_finite(&composed) {
        return Err(Error::Numerical("CCA produced non-finite values".into()));
    }
    Ok(CcaFit {
        transform: Transform::new(composed, false, Method::Cca)?,
        correlations,
        source_projection,
        target_projection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::DictionaryMode;

    fn dict(words: &[String]) -> SeedDictionary {
        SeedDictionary::from_pairs(
            words.iter().map(|w| (w.clone(), w.clone())).collect(),
            DictionaryMode::FullIntersectionMinusTargets,
        )
    }

    #[test]
    fn one_dimensional_scaling() {
        let xs = [0.3, -1.2, 2.5, 0.7, -0.4, 1.9];
        let src = EmbeddingSpace::from_rows(
            xs.iter()
                .enumerate()
                .map(|(i, &x)| (format!("w{i}"), vec![x])),
        )
        .unwrap();
        let tgt = EmbeddingSpace::from_rows(
            xs.iter()
                .enumerate()
                .map(|(i, &x)| (format!("w{i}"), vec![2.0 * x])),
        )
        .unwrap();
        let fit = fit_cca_detailed(&src, &tgt, &dict(src.words()), 0.0).unwrap();
        assert!((fit.correlations[0] - 1.0).abs() < 1e-12);
        assert!((fit.transform.matrix()[(0, 0)] - 2.0).abs() < 1e-9);
        assert!(!fit.transform.is_orthogonal());
    }

    #[test]
    fn degenerate_pairs_need_ridge() {
        let src =
            EmbeddingSpace::from_rows([("a", vec![1.0, 2.0]), ("b", vec![1.0, 2.0])]).unwrap();
        let words = vec!["a".to_string(), "b".to_string()];
        let err = fit_cca(&src, &src, &dict(&words), 0.0).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)), "{err:?}");
        let t = fit_cca(&src, &src, &dict(&words), 1e-5).unwrap();
        assert!(t.matrix().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn too_small_dictionary() {
        let src = EmbeddingSpace::from_rows([("a", vec![1.0])]).unwrap();
        let err = fit_cca(&src, &src, &dict(&["a".to_string()]), DEFAULT_RIDGE).unwrap_err();
        assert!(matches!(err, Error::AlignmentSetup(_)));
    }

    #[test]
    fn negative_ridge_rejected() {
        let src = EmbeddingSpace::from_rows([("a", vec![1.0]), ("b", vec![2.0])]).unwrap();
        let words = vec!["a".to_string(), "b".to_string()];
        assert!(fit_cca(&src, &src, &dict(&words), -1.0).is_err());
    }
}
