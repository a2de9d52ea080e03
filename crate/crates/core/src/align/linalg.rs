use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero.
pub const PINV_RCOND: f64 = 1e-10;

/// Stack the given row slices into an `n x d` matrix.
pub fn stack_rows<'a>(rows: impl ExactSizeIterator<Item = &'a [f64]>, dim: usize) -> DMatrix<f64> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * dim);
    for row in rows {
        data.extend_from_slice(row);
    }
    DMatrix::from_row_slice(n, dim, &data)
}

pub fn pseudo_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = SVD::new(m.clone(), true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD did not converge".into())),
    };
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = PINV_RCOND * sigma_max;
    let inv_sigma = svd
        .singular_values
        .map(|s| if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 });
    Ok(v_t.transpose() * DMatrix::from_diagonal(&inv_sigma) * u.transpose())
}

/// Inverse square root of a symmetric positive definite matrix.
pub fn inverse_sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if max.is_nan() || max <= 0.0 || min <= max * 1e-14 {
        return Err(Error::Numerical(format!(
            "covariance is singular (eigenvalues in [{min:e}, {max:e}]); use a positive ridge"
        )));
    }
    let scale = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&scale) * eig.eigenvectors.transpose())
}

/// Subtract the column means in place and return them.
pub fn center_columns(m: &mut DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows() as f64;
    let mut means = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        means.push(mean);
    }
    means
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}
