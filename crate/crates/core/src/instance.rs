//! Square 0-1 adjacency matrices with cached row and column sums.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("matrix must have at least one row")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("entry at row {row}, column {col} is {value}; entries must be 0 or 1")]
    BadEntry { row: usize, col: usize, value: u8 },
}

/// Square 0-1 adjacency matrix of a bipartite graph.
///
/// Rows index the left partition and columns the right: entry `(i, j)` is 1
/// iff there is an edge between left node `i` and right node `j`. Row and
/// column sums are kept alongside the matrix; every mutation goes through
/// methods that maintain them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    adj: Vec<u8>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
}

impl Instance {
    /// Builds an instance from explicit rows, validating shape and 0/1 entries.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, InstanceError> {
        let n = rows.len();
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        let mut adj = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(InstanceError::RaggedRow {
                    row: i,
                    len: row.len(),
                    expected: n,
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(InstanceError::BadEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                adj.push(v);
            }
        }
        Ok(Self::from_raw(n, adj))
    }

    /// Builds an n-by-n instance from a predicate on (row, column).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(n > 0, "instance size must be positive");
        let mut adj = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                adj.push(u8::from(f(i, j)));
            }
        }
        Self::from_raw(n, adj)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| i == j)
    }

    pub fn all_ones(n: usize) -> Self {
        Self::from_fn(n, |_, _| true)
    }

    fn from_raw(n: usize, adj: Vec<u8>) -> Self {
        debug_assert_eq!(adj.len(), n * n);
        let mut row_sums = vec![0usize; n];
        let mut col_sums = vec![0usize; n];
        for i in 0..n {
            for j in 0..n {
                if adj[i * n + j] == 1 {
                    row_sums[i] += 1;
                    col_sums[j] += 1;
                }
            }
        }
        Self {
            n,
            adj,
            row_sums,
            col_sums,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j] == 1
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    #[inline]
    pub fn row_sum(&self, i: usize) -> usize {
        self.row_sums[i]
    }

    #[inline]
    pub fn col_sum(&self, j: usize) -> usize {
        self.col_sums[j]
    }

    pub fn max_row_sum(&self) -> usize {
        self.row_sums.iter().copied().max().unwrap_or(0)
    }

    /// Minimum over all row and column sums.
    pub fn min_degree(&self) -> usize {
        self.row_sums
            .iter()
            .chain(self.col_sums.iter())
            .copied()
            .min()
            .unwrap_or(0)
    }

    /// True if some row or column is entirely zero (the permanent is then 0).
    pub fn has_zero_line(&self) -> bool {
        self.min_degree() == 0
    }

    /// Rows of column `j`'s support, in increasing order.
    pub fn column_support(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.entry(i, j))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.adj.chunks_exact(self.n)
    }

    /// Commits row `i` to column `j`: zeroes row `i` and column `j` except
    /// for entry `(i, j)`, which must already be 1. Row and column sums are
    /// updated in O(n).
    pub(crate) fn reduce_in_place(&mut self, i: usize, j: usize) {
        debug_assert!(self.entry(i, j), "reduction requires entry ({i}, {j}) = 1");
        let n = self.n;
        for k in 0..n {
            if k != i && self.adj[k * n + j] == 1 {
                self.adj[k * n + j] = 0;
                self.row_sums[k] -= 1;
                self.col_sums[j] -= 1;
            }
        }
        for l in 0..n {
            if l != j && self.adj[i * n + l] == 1 {
                self.adj[i * n + l] = 0;
                self.row_sums[i] -= 1;
                self.col_sums[l] -= 1;
            }
        }
        debug_assert_eq!(self.row_sums[i], 1);
        debug_assert_eq!(self.col_sums[j], 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_validates() {
        assert_eq!(Instance::from_rows(&[]), Err(InstanceError::Empty));
        assert_eq!(
            Instance::from_rows(&[vec![1, 0], vec![1]]),
            Err(InstanceError::RaggedRow {
                row: 1,
                len: 1,
                expected: 2
            })
        );
        assert_eq!(
            Instance::from_rows(&[vec![1, 2], vec![0, 1]]),
            Err(InstanceError::BadEntry {
                row: 0,
                col: 1,
                value: 2
            })
        );
    }

    #[test]
    fn sums_are_cached() {
        let inst = Instance::from_rows(&[vec![1, 0, 1], vec![1, 1, 1], vec![0, 1, 0]]).unwrap();
        assert_eq!(inst.row_sums(), &[2, 3, 1]);
        assert_eq!(inst.col_sums(), &[2, 2, 2]);
        assert_eq!(inst.min_degree(), 1);
        assert!(!inst.has_zero_line());
    }

    #[test]
    fn zero_line_detected() {
        let inst = Instance::from_rows(&[vec![1, 0], vec![1, 0]]).unwrap();
        assert!(inst.has_zero_line());
        assert_eq!(inst.min_degree(), 0);
    }

    #[test]
    fn reduce_updates_sums() {
        let mut inst = Instance::all_ones(3);
        inst.reduce_in_place(1, 0);
        assert_eq!(inst.row_sums(), &[2, 1, 2]);
        assert_eq!(inst.col_sums(), &[1, 2, 2]);
        assert!(inst.entry(1, 0));
        assert!(!inst.entry(0, 0));
        assert!(!inst.entry(1, 1));
    }
}
