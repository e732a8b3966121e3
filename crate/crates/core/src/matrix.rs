//! Dense row-major matrices over exact integers and rationals.
//!
//! Solver matrices stay small (tens of rows, low hundreds of columns), so a
//! flat `Vec` with explicit indexing is the right level of machinery; there is
//! no sparse storage and no linear-algebra dependency.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::from(1));
        }
        m
    }

    /// Build from explicit rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Convenience for literals in tests and fixtures.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mat-vec product");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// New matrix keeping only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows, keep.len());
        for r in 0..self.rows {
            for (j, &c) in keep.iter().enumerate() {
                out.set(r, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Space-separated row-major listing, one row per line.
    pub fn to_text(&self) -> String {
        (0..self.rows)
            .map(|r| {
                self.row(r).iter().map(BigInt::to_string).collect::<Vec<_>>().join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Parse the `to_text` format: one row per line, entries separated by
    /// whitespace. Blank lines and `#` comment lines are skipped.
    pub fn parse_text(text: &str) -> Result<IntMatrix, String> {
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Result<Vec<BigInt>, _> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<BigInt>()
                        .map_err(|_| format!("line {}: bad integer `{tok}`", lineno + 1))
                })
                .collect();
            rows.push(row?);
        }
        if rows.is_empty() {
            return Err("no matrix rows found".into());
        }
        let c = rows[0].len();
        if rows.iter().any(|r| r.len() != c) {
            return Err("rows have differing lengths".into());
        }
        Ok(IntMatrix::from_rows(rows))
    }
}

impl std::fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(
                f,
                "  [{}]",
                self.row(r).iter().map(BigInt::to_string).collect::<Vec<_>>().join(", ")
            )?;
        }
        Ok(())
    }
}

/// Rational matrix, row-major. Used for objective matrices, whose entries may
/// carry denominators (for example size-normalized utilities).
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&v| BigRational::from(BigInt::from(v))).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigRational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `M · x` for an integer vector `x`.
    pub fn mul_int_vec(&self, x: &[BigInt]) -> Vec<BigRational> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mat-vec product");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .filter(|(_, b)| !b.is_zero())
                    .map(|(a, b)| a * BigRational::from_integer(b.clone()))
                    .sum()
            })
            .collect()
    }

    /// `Mᵀ · w`: composes a linear functional `w` on the row space into a cost
    /// vector over the columns.
    pub fn transpose_mul_vec(&self, w: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(w.len(), self.rows, "dimension mismatch in transpose product");
        let mut out = vec![BigRational::zero(); self.cols];
        for r in 0..self.rows {
            if w[r].is_zero() {
                continue;
            }
            for c in 0..self.cols {
                let v = self.get(r, c);
                if !v.is_zero() {
                    out[c] += v * &w[r];
                }
            }
        }
        out
    }
}

impl std::fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "RatMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(
                f,
                "  [{}]",
                self.row(r)
                    .iter()
                    .map(crate::num::format_rational)
                    .collect::<Vec<_>>()
                    .join(", ")
            )?;
        }
        Ok(())
    }
}

/// Exact dot product of a rational cost row with an integer vector.
pub fn dot_rat_int(c: &[BigRational], x: &[BigInt]) -> BigRational {
    debug_assert_eq!(c.len(), x.len());
    c.iter()
        .zip(x)
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .map(|(a, b)| a * BigRational::from_integer(b.clone()))
        .sum()
}
