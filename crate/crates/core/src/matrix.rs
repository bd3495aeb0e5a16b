//! Sparse integer matrices: the carrier for boundary maps.
//!
//! Entries are `i64` (boundary matrices of simplicial and tensor complexes
//! have tiny entries); anything that can grow — elimination, Smith normal
//! form — is done in `BigInt` internally. The text format here is the
//! portable export format for complexes: a `degree`/`rows`/`cols` header
//! followed by one `row col value` triplet per line.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("triplet ({0}, {1}) out of bounds for {2}x{3} matrix")]
    OutOfBounds(usize, usize, usize, usize),
    #[error("dimension mismatch: {0}x{1} * {2}x{3}")]
    DimMismatch(usize, usize, usize, usize),
    #[error("parse error at line {0}: {1}")]
    Parse(usize, String),
}

/// Sparse integer matrix with sorted, deduplicated, nonzero triplets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIntMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<(usize, usize, i64)>,
}

impl SparseIntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseIntMatrix { rows, cols, entries: Vec::new() }
    }

    /// Builds from triplets; duplicate positions are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, i64)>,
    ) -> Result<Self, MatrixError> {
        let mut acc: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for (i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(MatrixError::OutOfBounds(i, j, rows, cols));
            }
            *acc.entry((i, j)).or_insert(0) += v;
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, v)| v != 0)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        Ok(SparseIntMatrix { rows, cols, entries })
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    entries.push((i, j, v));
                }
            }
        }
        SparseIntMatrix { rows: r, cols: c, entries }
    }

    pub fn entries(&self) -> &[(usize, usize, i64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&(i, j)))
            .map(|k| self.entries[k].2)
            .unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<(usize, usize, i64)> =
            self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect();
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        SparseIntMatrix { rows: self.cols, cols: self.rows, entries }
    }

    pub fn mul(&self, other: &SparseIntMatrix) -> Result<SparseIntMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        // Row-major accumulate; fine at the sizes boundary maps have.
        let mut by_row: Vec<Vec<(usize, i64)>> = vec![Vec::new(); other.rows];
        for &(i, j, v) in &other.entries {
            by_row[i].push((j, v));
        }
        let mut acc: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for &(i, k, v) in &self.entries {
            for &(j, w) in &by_row[k] {
                *acc.entry((i, j)).or_insert(0) += v * w;
            }
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, v)| v != 0)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        Ok(SparseIntMatrix { rows: self.rows, cols: other.cols, entries })
    }

    pub fn to_dense_bigint(&self) -> Vec<Vec<BigInt>> {
        let mut dense = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for &(i, j, v) in &self.entries {
            dense[i][j] = BigInt::from(v);
        }
        dense
    }

    /// Per-row nonzero counts; the properness census for maps of based
    /// modules (rows indexed by the target basis).
    pub fn row_support_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.rows];
        for &(i, _, _) in &self.entries {
            counts[i] += 1;
        }
        counts
    }

    /// Exact rank over ℚ by fraction-free sparse elimination.
    pub fn rank_over_q(&self) -> usize {
        let mut work: Vec<BTreeMap<usize, BigInt>> = Vec::new();
        for &(i, j, v) in &self.entries {
            while work.len() <= i {
                work.push(BTreeMap::new());
            }
            work[i].insert(j, BigInt::from(v));
        }
        work.retain(|r| !r.is_empty());
        let mut rank = 0usize;
        while !work.is_empty() {
            // Pivot row: fewest nonzeros, then smallest-magnitude leading entry.
            let mut best: Option<(usize, usize, usize, BigInt)> = None;
            for (idx, row) in work.iter().enumerate() {
                let (col, val) = row
                    .iter()
                    .min_by(|a, b| a.1.abs().cmp(&b.1.abs()).then(a.0.cmp(b.0)))
                    .map(|(c, v)| (*c, v.clone()))
                    .expect("rows kept nonempty");
                let better = match &best {
                    None => true,
                    Some((len, _, _, mag)) => {
                        row.len() < *len || (row.len() == *len && val.abs() < mag.abs())
                    }
                };
                if better {
                    best = Some((row.len(), idx, col, val));
                }
            }
            let (_, prow_idx, pcol, pval) = best.expect("nonempty work set");
            let prow = work.swap_remove(prow_idx);
            rank += 1;
            let mut next: Vec<BTreeMap<usize, BigInt>> = Vec::with_capacity(work.len());
            for mut row in work {
                if let Some(a) = row.remove(&pcol) {
                    // row := pval*row - a*prow (column pcol cancels exactly)
                    let mut updated: BTreeMap<usize, BigInt> = BTreeMap::new();
                    for (c, v) in row {
                        updated.insert(c, v * &pval);
                    }
                    for (c, v) in &prow {
                        if *c == pcol {
                            continue;
                        }
                        let delta = v * &a;
                        let slot = updated.entry(*c).or_insert_with(BigInt::zero);
                        *slot -= delta;
                    }
                    updated.retain(|_, v| !v.is_zero());
                    if !updated.is_empty() {
                        // Strip the content gcd to keep entries small.
                        let mut g = BigInt::zero();
                        for v in updated.values() {
                            g = g.gcd(v);
                        }
                        if g > BigInt::from(1) {
                            for v in updated.values_mut() {
                                *v /= &g;
                            }
                        }
                        next.push(updated);
                    }
                } else {
                    next.push(row);
                }
            }
            work = next;
        }
        rank
    }

    /// Rank over the prime field ℤ/p.
    pub fn rank_mod_p(&self, p: u64) -> usize {
        let p = p as i128;
        let reduce = |v: i64| -> i128 { (v as i128).rem_euclid(p) };
        let mut work: Vec<BTreeMap<usize, i128>> = Vec::new();
        for &(i, j, v) in &self.entries {
            while work.len() <= i {
                work.push(BTreeMap::new());
            }
            let r = reduce(v);
            if r != 0 {
                work[i].insert(j, r);
            }
        }
        work.retain(|r| !r.is_empty());
        let mut rank = 0usize;
        while let Some(prow) = work.pop() {
            let (&pcol, &pval) = prow.iter().next().expect("nonempty row");
            rank += 1;
            let pinv = mod_inverse(pval, p);
            let mut next = Vec::with_capacity(work.len());
            for mut row in work {
                if let Some(a) = row.remove(&pcol) {
                    let factor = (a * pinv).rem_euclid(p);
                    for (c, v) in &prow {
                        if *c == pcol {
                            continue;
                        }
                        let slot = row.entry(*c).or_insert(0);
                        *slot = (*slot - factor * v).rem_euclid(p);
                    }
                    row.retain(|_, v| *v != 0);
                }
                if !row.is_empty() {
                    next.push(row);
                }
            }
            work = next;
        }
        rank
    }
}

fn mod_inverse(a: i128, p: i128) -> i128 {
    // Extended Euclid; p prime, a nonzero mod p.
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p, a.rem_euclid(p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "modulus not coprime");
    t.rem_euclid(p)
}

/// Serializes one boundary matrix in the portable text format.
pub fn write_sparse_text(degree: usize, m: &SparseIntMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "degree {degree}");
    let _ = writeln!(out, "rows {}", m.rows);
    let _ = writeln!(out, "cols {}", m.cols);
    for &(i, j, v) in m.entries() {
        let _ = writeln!(out, "{i} {j} {v}");
    }
    out
}

/// Parses the portable text format back into (degree, matrix).
pub fn parse_sparse_text(text: &str) -> Result<(usize, SparseIntMatrix), MatrixError> {
    let mut degree = None;
    let mut rows = None;
    let mut cols = None;
    let mut triplets = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| MatrixError::Parse(lineno + 1, msg.to_string());
        match fields.as_slice() {
            ["degree", v] => degree = Some(v.parse().map_err(|_| bad("bad degree"))?),
            ["rows", v] => rows = Some(v.parse().map_err(|_| bad("bad rows"))?),
            ["cols", v] => cols = Some(v.parse().map_err(|_| bad("bad cols"))?),
            [i, j, v] => {
                let i: usize = i.parse().map_err(|_| bad("bad row index"))?;
                let j: usize = j.parse().map_err(|_| bad("bad col index"))?;
                let v: i64 = v.parse().map_err(|_| bad("bad value"))?;
                triplets.push((i, j, v));
            }
            _ => return Err(bad("expected header or triplet")),
        }
    }
    let degree = degree.ok_or(MatrixError::Parse(0, "missing degree header".into()))?;
    let rows = rows.ok_or(MatrixError::Parse(0, "missing rows header".into()))?;
    let cols = cols.ok_or(MatrixError::Parse(0, "missing cols header".into()))?;
    let m = SparseIntMatrix::from_triplets(rows, cols, triplets)?;
    Ok((degree, m))
}
