//! Linear algebra over generating sets of Pauli groups.
//!
//! Rows are [`PauliOperator`]s; row operations are exact group products, so
//! signs propagate through every elimination. Pivot columns run over the
//! x block first (qubit ascending), then the z block, and ties break on the
//! lowest row index.

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// Reduced row echelon form of a generating set.
#[derive(Clone, Debug)]
pub struct Rref {
    /// Independent generators, one per pivot, fully reduced.
    pub basis: Vec<PauliOperator>,
    /// Pivot column of each basis row (x block `0..n`, z block `n..2n`).
    pub pivots: Vec<usize>,
    /// True when the input generates a signed identity other than +I
    /// (for commuting inputs that means -I is derivable).
    pub inconsistent: bool,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Reduces `op` against the basis: the result has no pivot columns set.
    pub fn reduce(&self, op: &PauliOperator) -> Result<PauliOperator> {
        let mut acc = *op;
        for (row, &piv) in self.basis.iter().zip(&self.pivots) {
            if column_bit(&acc, piv) {
                acc = acc.multiply(row)?;
            }
        }
        Ok(acc)
    }

    /// Membership in the generated group up to sign.
    pub fn contains_word(&self, op: &PauliOperator) -> Result<bool> {
        Ok(self.reduce(op)?.is_identity_word())
    }

    /// Membership including the sign.
    pub fn contains(&self, op: &PauliOperator) -> Result<bool> {
        Ok(self.reduce(op)?.is_identity())
    }
}

fn column_bit(op: &PauliOperator, col: usize) -> bool {
    let n = op.n();
    if col < n {
        op.x_bit(col)
    } else {
        op.z_bit(col - n)
    }
}

/// Sign-propagating Gauss-Jordan elimination.
pub fn rref(rows: &[PauliOperator]) -> Result<Rref> {
    let mut rows: Vec<PauliOperator> = rows.to_vec();
    let n = match rows.first() {
        Some(r) => r.n(),
        None => {
            return Ok(Rref { basis: vec![], pivots: vec![], inconsistent: false });
        }
    };
    for r in &rows {
        if r.n() != n {
            return Err(Error::DimensionMismatch(n, r.n()));
        }
    }
    let mut pivots = Vec::new();
    let mut head = 0usize;
    for col in 0..2 * n {
        let Some(found) = (head..rows.len()).find(|&i| column_bit(&rows[i], col)) else {
            continue;
        };
        rows.swap(head, found);
        let pivot_row = rows[head];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != head && column_bit(row, col) {
                *row = row.multiply(&pivot_row)?;
            }
        }
        pivots.push(col);
        head += 1;
    }
    let inconsistent = rows[head..].iter().any(|r| !r.is_identity());
    rows.truncate(head);
    Ok(Rref { basis: rows, pivots, inconsistent })
}

/// GF(2) matrix with up to 64 columns, one `u64` word per row.
///
/// Used for selection problems over a generating set: column j stands for
/// generator j and a solution word picks a subset product.
#[derive(Clone, Debug, Default)]
pub struct BitMatrix {
    pub rows: Vec<u64>,
    pub cols: usize,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        assert!(cols <= 64);
        BitMatrix { rows: Vec::new(), cols }
    }

    pub fn push(&mut self, row: u64) {
        self.rows.push(row);
    }

    /// Basis of the null space: all words v with `parity(row & v) == 0`.
    pub fn kernel_basis(&self) -> Vec<u64> {
        let mut rows = self.rows.clone();
        let mut pivot_cols: Vec<usize> = Vec::new();
        let mut head = 0usize;
        for col in 0..self.cols {
            let bit = 1u64 << col;
            let Some(found) = (head..rows.len()).find(|&i| rows[i] & bit != 0) else {
                continue;
            };
            rows.swap(head, found);
            let pivot = rows[head];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != head && *row & bit != 0 {
                    *row ^= pivot;
                }
            }
            pivot_cols.push(col);
            head += 1;
        }
        rows.truncate(head);
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = 1u64 << free;
            for (row, &pc) in rows.iter().zip(&pivot_cols) {
                if row >> free & 1 == 1 {
                    v |= 1u64 << pc;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of `parity(row & v) == rhs_bit` per row, if any.
    pub fn solve(&self, rhs: &[bool]) -> Option<u64> {
        assert_eq!(rhs.len(), self.rows.len());
        let mut rows: Vec<(u64, bool)> =
            self.rows.iter().copied().zip(rhs.iter().copied()).collect();
        let mut pivot_cols: Vec<usize> = Vec::new();
        let mut head = 0usize;
        for col in 0..self.cols {
            let bit = 1u64 << col;
            let Some(found) = (head..rows.len()).find(|&i| rows[i].0 & bit != 0) else {
                continue;
            };
            rows.swap(head, found);
            let pivot = rows[head];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != head && row.0 & bit != 0 {
                    row.0 ^= pivot.0;
                    row.1 ^= pivot.1;
                }
            }
            pivot_cols.push(col);
            head += 1;
        }
        if rows[head..].iter().any(|&(_, b)| b) {
            return None;
        }
        let mut v = 0u64;
        for (&(_, b), &pc) in rows[..head].iter().zip(&pivot_cols) {
            if b {
                v |= 1u64 << pc;
            }
        }
        Some(v)
    }
}

/// Product of the generators selected by `word`, ascending index.
pub fn subset_product(gens: &[PauliOperator], word: u64) -> Result<PauliOperator> {
    let n = gens.first().map(|g| g.n()).unwrap_or(0);
    let mut acc = PauliOperator::identity(n);
    let mut rest = word;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        acc = acc.multiply(&gens[i])?;
        rest &= rest - 1;
    }
    Ok(acc)
}
