use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sgns::EmbeddingSpace;

/// Tolerance on `max |WᵀW - I|` for a transform flagged orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Procrustes,
    Cca,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Procrustes => "procrustes",
            Method::Cca => "cca",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "procrustes" => Ok(Method::Procrustes),
            "cca" => Ok(Method::Cca),
            _ => Err(Error::InvalidInput(format!(
                "unknown alignment method '{s}'"
            ))),
        }
    }
}

/// A `d x d` linear map from the source space into the target space.
///
/// Vectors are rows: a source vector `x` maps to `x W`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transform {
    matrix: DMatrix<f64>,
    orthogonal: bool,
    method: Method,
}

impl Transform {
    pub fn new(matrix: DMatrix<f64>, orthogonal: bool, method: Method) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput(format!(
                "transform must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "transform contains non-finite values".into(),
            ));
        }
        let t = Transform {
            matrix,
            orthogonal,
            method,
        };
        if orthogonal && t.orthogonality_error() >= ORTHOGONALITY_TOL {
            return Err(Error::Numerical(format!(
                "transform flagged orthogonal deviates by {:e}",
                t.orthogonality_error()
            )));
        }
        Ok(t)
    }

    pub fn identity(dim: usize, method: Method) -> Self {
        Transform {
            matrix: DMatrix::identity(dim, dim),
            orthogonal: true,
            method,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// `max |WᵀW - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        (self.matrix.transpose() * &self.matrix - DMatrix::<f64>::identity(d, d)).amax()
    }

    pub fn apply_row(&self, row: &[f64], out: &mut [f64]) {
        let d = self.dim();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, &x) in row.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate().take(d) {
                *o += x * self.matrix[(k, j)];
            }
        }
    }

    /// Text layout: a `method orthogonal d` header, then `d` rows of `d` reals.
    pub fn write<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "{} {} {}", self.method, self.orthogonal, self.dim())?;
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(sink, "{}", line.join(" "))?;
        }
        sink.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(source: R) -> Result<Self> {
        let mut lines = source.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(1, "missing header"))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [method, orthogonal, dim] = fields[..] else {
            return Err(Error::format(1, "header must be 'method orthogonal d'"));
        };
        let method: Method = method
            .parse()
            .map_err(|_| Error::format(1, "unknown method"))?;
        let orthogonal: bool = orthogonal
            .parse()
            .map_err(|_| Error::format(1, "orthogonal flag must be true or false"))?;
        let dim: usize = dim
            .parse()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::format(1, "dimension must be a positive integer"))?;
        let mut data = Vec::with_capacity(dim * dim);
        let mut rows = 0;
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let line_no = i + 2;
            if rows == dim {
                return Err(Error::format(line_no, "more rows than declared"));
            }
            let before = data.len();
            for field in line.split_whitespace() {
                data.push(
                    field.parse::<f64>().map_err(|_| {
                        Error::format(line_no, format!("non-numeric value '{field}'"))
                    })?,
                );
            }
            if data.len() - before != dim {
                return Err(Error::format(line_no, format!("expected {dim} values")));
            }
            rows += 1;
        }
        if rows != dim {
            return Err(Error::format(
                rows + 2,
                format!("expected {dim} rows, found {rows}"),
            ));
        }
        Transform::new(DMatrix::from_row_slice(dim, dim, &data), orthogonal, method)
    }

    pub fn save_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }
}

/// Map every row of `space` through `t`. The word list is unchanged and rows
/// are not renormalized.
pub fn apply_transform(t: &Transform, space: &EmbeddingSpace) -> Result<EmbeddingSpace> {
    if t.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: space.dim(),
        });
    }
    let d = t.dim();
    let mut data = vec![0.0; space.len() * d];
    for (i, out) in data.chunks_exact_mut(d).enumerate() {
        t.apply_row(space.row(i), out);
    }
    space.with_data(d, data)
}
