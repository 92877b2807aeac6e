/// Symmetric N × N matrix with unit diagonal, stored as the packed strict
/// upper triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    /// Identity: unit diagonal, zero off-diagonal.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; n * n.saturating_sub(1) / 2],
        }
    }

    /// Builds from a full square matrix, reading the upper triangle only.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::identity(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Builds by evaluating `f(i, j)` once for every pair `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(f(i, j));
            }
        }
        Self { n, upper }
    }

    /// Builds from packed rows: `rows[i]` holds the entries `(i, j)` for `j > i`.
    pub(crate) fn from_upper_rows(n: usize, rows: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(rows.len(), n);
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, row) in rows.into_iter().enumerate() {
            debug_assert_eq!(row.len(), n - i - 1);
            upper.extend(row);
        }
        Self { n, upper }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 1.0,
            Less => self.upper[self.offset(i, j)],
            Greater => self.upper[self.offset(j, i)],
        }
    }

    /// Sets entries `(i, j)` and `(j, i)`. Diagonal writes are ignored.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            return;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let k = self.offset(a, b);
        self.upper[k] = v;
    }

    /// Iterates `(i, j, value)` over all pairs `i < j` in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .zip(self.upper.iter().copied())
            .map(|((i, j), v)| (i, j, v))
    }

    /// Packed upper-triangle values for row `i` (columns `i+1..n`).
    pub fn upper_row(&self, i: usize) -> &[f64] {
        if i + 1 >= self.n {
            return &[];
        }
        let start = self.offset(i, i + 1);
        &self.upper[start..start + (self.n - i - 1)]
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}
