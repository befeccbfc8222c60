//! Dense symmetric matrices.
//!
//! Storage is full row-major `f64` with symmetry enforced on every public
//! construction path, so `get(i, j) == get(j, i)` holds exactly (bitwise),
//! not merely within rounding.

use std::path::Path;

use crate::error::{Error, Result};

/// An `dim × dim` symmetric matrix (covariance matrices and their rotated
/// successors).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        Ok(SymMatrix {
            dim,
            entries: vec![0.0; dim * dim],
        })
    }

    /// Builds a matrix from row-major entries, rejecting non-square input,
    /// non-finite values and any exact asymmetry (worst pair reported).
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "matrix entries",
                index,
            });
        }
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let delta = (entries[i * dim + j] - entries[j * dim + i]).abs();
                if delta > 0.0 && worst.is_none_or(|(_, _, w)| delta > w) {
                    worst = Some((i, j, delta));
                }
            }
        }
        if let Some((i, j, delta)) = worst {
            return Err(Error::Asymmetric { i, j, delta });
        }
        Ok(SymMatrix { dim, entries })
    }

    /// Builds from the upper triangle (`f(i, j)` with `i <= j`), mirroring
    /// the lower triangle so symmetry is exact by construction.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = SymMatrix::zeros(dim)?;
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.entries[i * dim + j] = v;
                m.entries[j * dim + i] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Writes both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest-magnitude off-diagonal entry and its upper-triangle position.
    /// Ties resolve to the smallest `i`, then smallest `j`.
    pub fn max_offdiag(&self) -> (f64, usize, usize) {
        let (mut best, mut bi, mut bj) = (0.0f64, 0, 1);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let a = self.get(i, j).abs();
                if a > best {
                    best = a;
                    bi = i;
                    bj = j;
                }
            }
        }
        (best, bi, bj)
    }

    /// Parses a square matrix from CSV text. Rows are separated by newlines
    /// or semicolons, columns by commas.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.split(['\n', ';']).map(str::trim).enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|field| {
                    field.trim().parse::<f64>().map_err(|_| Error::Parse {
                        what: format!("matrix row {}", lineno + 1),
                        msg: format!("not a number: {field:?}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::invalid("matrix text contains no rows"));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Parse {
                what: format!("matrix row {}", bad + 1),
                msg: format!("expected {dim} columns, found {}", rows[bad].len()),
            });
        }
        SymMatrix::from_entries(dim, rows.into_iter().flatten().collect())
    }

    /// Loads a matrix from a raw little-endian `f32` file, row-major, with
    /// the dimension inferred from the byte length.
    pub fn from_raw_f32_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() % 4 != 0 {
            return Err(Error::invalid(format!(
                "{}: length {} is not a multiple of 4",
                path.display(),
                bytes.len()
            )));
        }
        let n = bytes.len() / 4;
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n {
            return Err(Error::invalid(format!(
                "{}: {n} values do not form a square matrix",
                path.display()
            )));
        }
        let entries: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        SymMatrix::from_entries(dim, entries)
    }
}
