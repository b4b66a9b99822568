use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{QVector, Rational};
use crate::error::{Error, Result};

/// A dense matrix over ℚ stored by rows. JSON form: an array of rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    cols: usize,
    rows: Vec<QVector>,
}

impl Serialize for QMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<QVector>::deserialize(deserializer)?;
        QMatrix::new(rows).map_err(serde::de::Error::custom)
    }
}

impl QMatrix {
    /// Builds a matrix from rows; an empty row list gives a 0×0 matrix.
    pub fn new(rows: Vec<QVector>) -> Result<Self> {
        let cols = rows.first().map_or(0, QVector::dim);
        Self::with_cols(rows, cols)
    }

    pub fn with_cols(rows: Vec<QVector>, cols: usize) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.dim() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: r.dim(),
            });
        }
        Ok(QMatrix { cols, rows })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::new(rows.iter().map(|r| QVector::from_ints(r)).collect())
            .expect("ragged integer matrix")
    }

    pub fn identity(n: usize) -> Self {
        Self::with_cols((0..n).map(|i| QVector::unit(n, i)).collect(), n).unwrap()
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::with_cols(vec![QVector::zeros(cols); rows], cols).unwrap()
    }

    /// Matrix whose columns are the given vectors (all of dimension `dim`).
    pub fn from_columns(cols: &[QVector], dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        Self::with_cols(rows, cols.len()).unwrap()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[QVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &QVector {
        &self.rows[i]
    }

    pub fn column(&self, j: usize) -> QVector {
        self.rows().iter().map(|r| r[j].clone()).collect()
    }

    pub fn columns(&self) -> Vec<QVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn transpose(&self) -> QMatrix {
        QMatrix::with_cols(self.columns(), self.row_count()).unwrap()
    }

    pub fn mul_vec(&self, x: &QVector) -> Result<QVector> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.dim(),
            });
        }
        Ok(self.rows().iter().map(|r| r.dot(x)).collect())
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if other.row_count() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.row_count(),
            });
        }
        let cols = other.columns();
        let rows = self
            .rows()
            .iter()
            .map(|r| cols.iter().map(|c| r.dot(c)).collect())
            .collect();
        QMatrix::with_cols(rows, other.col_count())
    }
}

/// Scales a rational row to integers by the lcm of its denominators.
fn integer_row(row: impl Iterator<Item = Rational>) -> Vec<BigInt> {
    let row: Vec<Rational> = row.collect();
    let mut l = BigInt::one();
    for r in &row {
        l = num_integer::lcm(l, r.denom());
    }
    row.iter().map(|r| r.numer() * (&l / r.denom())).collect()
}

/// Fraction-free (Bareiss) forward elimination to row echelon form.
///
/// Pivots are chosen column by column, taking the first row at or below the
/// current pivot row with a nonzero entry. Returns the pivot columns; the
/// first `pivots.len()` rows of `m` hold the echelon form. Only the first
/// `scan_cols` columns are eligible as pivots.
fn bareiss_echelon(m: &mut [Vec<BigInt>], scan_cols: usize) -> Vec<usize> {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..scan_cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let width = m[r].len();
        for i in (r + 1)..nrows {
            for j in 0..width {
                if j == c {
                    continue;
                }
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        // Entries above row r and left of c are untouched; rows above keep their
        // scale, rows below now carry the common factor m[r][c].
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `A·x = b` exactly.
///
/// Free variables are fixed to zero, so the result is deterministic. Returns
/// `Ok(None)` when the system is inconsistent.
pub fn solve_linear_system(a: &QMatrix, b: &QVector) -> Result<Option<QVector>> {
    if a.row_count() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.row_count(),
            found: b.dim(),
        });
    }
    let n = a.col_count();
    let mut m: Vec<Vec<BigInt>> = a
        .rows()
        .iter()
        .zip(b.iter())
        .map(|(row, bi)| integer_row(row.iter().cloned().chain(std::iter::once(bi.clone()))))
        .collect();
    let pivots = bareiss_echelon(&mut m, n);
    let rank = pivots.len();
    if m[rank..].iter().any(|row| !row[n].is_zero()) {
        return Ok(None);
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let mut acc = Rational::from(m[r][n].clone());
        for j in (c + 1)..n {
            if !m[r][j].is_zero() && !x[j].is_zero() {
                acc -= Rational::from(m[r][j].clone()) * &x[j];
            }
        }
        x[c] = acc / Rational::from(m[r][c].clone());
    }
    Ok(Some(QVector::new(x)))
}

/// Exact rank over ℚ.
pub fn rank(a: &QMatrix) -> usize {
    let mut m: Vec<Vec<BigInt>> = a
        .rows()
        .iter()
        .map(|row| integer_row(row.iter().cloned()))
        .collect();
    bareiss_echelon(&mut m, a.col_count()).len()
}

/// Reduced row echelon form over ℚ; returns the pivot columns.
fn rref(rows: &mut [QVector], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        rows[r] = rows[r].scale(&inv);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = -rows[i][c].clone();
                rows[i] = rows[i].add_scaled(&f, &rows[r]);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// A basis of `{x : A·x = 0}`, one vector per free column in increasing order.
pub fn kernel(a: &QMatrix) -> Vec<QVector> {
    let n = a.col_count();
    let mut rows = a.rows().to_vec();
    let pivots = rref(&mut rows, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = QVector::zeros(n);
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[r][f].clone();
            }
            v
        })
        .collect()
}

/// Standard basis vectors completing the span of `vectors` to all of ℚⁿ,
/// chosen greedily in index order.
pub fn complement_basis(vectors: &[QVector], n: usize) -> Vec<QVector> {
    let mut current: Vec<QVector> = vectors.to_vec();
    let mut r = rank_of_vectors(&current, n);
    let mut out = Vec::new();
    for i in 0..n {
        if r == n {
            break;
        }
        current.push(QVector::unit(n, i));
        let nr = rank_of_vectors(&current, n);
        if nr > r {
            r = nr;
            out.push(QVector::unit(n, i));
        } else {
            current.pop();
        }
    }
    out
}

pub fn rank_of_vectors(vectors: &[QVector], n: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    rank(&QMatrix::with_cols(vectors.to_vec(), n).expect("vector dims"))
}
