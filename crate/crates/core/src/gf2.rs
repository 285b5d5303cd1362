//! Dense linear algebra over GF(2) with vectors packed into `u64`.
//!
//! A matrix is a slice of rows; row `i` applied to a vector `v` gives output
//! bit `i = parity(row_i & v)`. Column `j` is bit `j` of every row.

use crate::error::{Error, Result};

#[inline]
pub fn parity(x: u64) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Reduced row-echelon form. Pivot columns are scanned from bit 0 upward,
/// rows come out ordered by pivot, and zero rows are dropped.
pub fn rref(rows: &[u64]) -> Vec<u64> {
    let mut m: Vec<u64> = rows.iter().copied().filter(|&r| r != 0).collect();
    let mut out_len = 0;
    for col in 0..64 {
        let bit = 1u64 << col;
        let Some(p) = (out_len..m.len()).find(|&i| m[i] & bit != 0) else {
            continue;
        };
        m.swap(out_len, p);
        let pivot = m[out_len];
        for (i, row) in m.iter_mut().enumerate() {
            if i != out_len && *row & bit != 0 {
                *row ^= pivot;
            }
        }
        out_len += 1;
        if out_len == m.len() {
            break;
        }
    }
    m.truncate(out_len);
    m
}

pub fn rank(rows: &[u64]) -> usize {
    rref(rows).len()
}

/// Remainder of `x` after eliminating the pivots of an RREF basis.
pub fn reduce(mut x: u64, basis_rref: &[u64]) -> u64 {
    for &row in basis_rref {
        let pivot = row & row.wrapping_neg();
        if x & pivot != 0 {
            x ^= row;
        }
    }
    x
}

pub fn in_span(x: u64, basis_rref: &[u64]) -> bool {
    reduce(x, basis_rref) == 0
}

pub fn mat_vec(rows: &[u64], v: u64) -> u64 {
    rows.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &r)| acc | (u64::from(parity(r & v)) << i))
}

/// Transpose of a `rows.len() x ncols` matrix.
pub fn transpose(rows: &[u64], ncols: usize) -> Vec<u64> {
    (0..ncols)
        .map(|j| {
            rows.iter()
                .enumerate()
                .fold(0u64, |acc, (i, &r)| acc | (((r >> j) & 1) << i))
        })
        .collect()
}

/// Inverse of a square `n x n` matrix, or `None` if singular.
pub fn inverse(rows: &[u64], n: usize) -> Option<Vec<u64>> {
    assert_eq!(rows.len(), n);
    let mut a = rows.to_vec();
    let mut inv: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    for col in 0..n {
        let bit = 1u64 << col;
        let p = (col..n).find(|&i| a[i] & bit != 0)?;
        a.swap(col, p);
        inv.swap(col, p);
        for i in 0..n {
            if i != col && a[i] & bit != 0 {
                a[i] ^= a[col];
                inv[i] ^= inv[col];
            }
        }
    }
    Some(inv)
}

/// Solves `rows · v = rhs` (bit `i` of `rhs` is the target for row `i`) over
/// `ncols` unknowns. Free variables are set to zero.
pub fn solve(rows: &[u64], rhs: u64, ncols: usize) -> Option<u64> {
    let mut aug: Vec<(u64, u8)> = rows
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, ((rhs >> i) & 1) as u8))
        .collect();
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..ncols {
        let bit = 1u64 << col;
        let Some(p) = (next..aug.len()).find(|&i| aug[i].0 & bit != 0) else {
            continue;
        };
        aug.swap(next, p);
        let pivot = aug[next];
        for (i, row) in aug.iter_mut().enumerate() {
            if i != next && row.0 & bit != 0 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
        pivots.push(col);
        next += 1;
    }
    if aug[next..].iter().any(|&(r, b)| r == 0 && b == 1) {
        return None;
    }
    let mut v = 0u64;
    for (i, &col) in pivots.iter().enumerate() {
        if aug[i].1 == 1 {
            v |= 1u64 << col;
        }
    }
    Some(v)
}

/// Basis of `{v : rows · v = 0}` over `ncols` unknowns, one vector per free
/// column in ascending order.
pub fn kernel(rows: &[u64], ncols: usize) -> Vec<u64> {
    let r = rref(rows);
    let pivots: Vec<usize> = r.iter().map(|&row| row.trailing_zeros() as usize).collect();
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = 1u64 << free;
            for (row, &pc) in r.iter().zip(&pivots) {
                if (row >> free) & 1 == 1 {
                    v |= 1u64 << pc;
                }
            }
            v
        })
        .collect()
}

/// Lower-case hex of the low `nbits` bits, zero-padded to `ceil(nbits / 4)`
/// digits (at least one digit).
pub fn to_hex(bits: u64, nbits: usize) -> String {
    let width = nbits.div_ceil(4).max(1);
    format!("{bits:0width$x}")
}

pub fn parse_hex(s: &str) -> Result<u64> {
    let t = s.trim().trim_start_matches("0x");
    if t.is_empty() {
        return Err(Error::Parse("empty hex string".into()));
    }
    u64::from_str_radix(t, 16).map_err(|e| Error::Parse(format!("bad hex '{s}': {e}")))
}
