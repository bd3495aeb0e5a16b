//! Smith normal form over ℤ with arbitrary-precision entries.
//!
//! Pivot rule: smallest nonzero magnitude, ties broken by least fill-in
//! (fewest nonzeros in the pivot's row plus column), then position. The
//! returned diagonal is the canonical invariant-factor chain d₁ | d₂ | ⋯,
//! all positive. Transforms are tracked on request and certified by
//! re-multiplication before the result is returned.

use crate::matrix::SparseIntMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SnfError {
    #[error("transform certificate failed: U*A*V != D")]
    CertificateFailed,
}

#[derive(Debug, Clone)]
pub struct SnfResult {
    pub rows: usize,
    pub cols: usize,
    /// Nonzero invariant factors, positive, each dividing the next.
    pub diagonal: Vec<BigInt>,
    /// Row transform U (rows x rows), present when requested.
    pub u: Option<Vec<Vec<BigInt>>>,
    /// Column transform V (cols x cols), present when requested.
    pub v: Option<Vec<Vec<BigInt>>>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// |det| for square matrices: product of the diagonal at full rank, else 0.
    pub fn det_abs(&self) -> Option<BigInt> {
        if self.rows != self.cols {
            return None;
        }
        if self.rank() < self.rows {
            return Some(BigInt::zero());
        }
        Some(self.diagonal.iter().product())
    }

    /// Torsion part of the cokernel: invariant factors > 1.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal.iter().filter(|d| **d > BigInt::one()).cloned().collect()
    }
}

/// Computes the Smith normal form of a sparse integer matrix.
pub fn smith_normal_form(
    m: &SparseIntMatrix,
    want_transforms: bool,
) -> Result<SnfResult, SnfError> {
    let mut a = m.to_dense_bigint();
    let rows = m.rows;
    let cols = m.cols;
    let mut u = want_transforms.then(|| identity(rows));
    let mut v = want_transforms.then(|| identity(cols));

    let mut t = 0usize;
    while t < rows.min(cols) {
        let Some((pi, pj)) = choose_pivot(&a, t, rows, cols) else {
            break; // submatrix is zero
        };
        swap_rows(&mut a, u.as_mut(), t, pi);
        swap_cols(&mut a, v.as_mut(), t, pj);

        loop {
            // Clear column t with Euclidean steps, keeping the smallest
            // residue at the pivot.
            let mut dirty = false;
            for i in t + 1..rows {
                while !a[i][t].is_zero() {
                    let q = rounded_quotient(&a[i][t], &a[t][t]);
                    if !q.is_zero() {
                        row_axpy(&mut a, u.as_mut(), i, t, &q);
                    }
                    if !a[i][t].is_zero() {
                        swap_rows(&mut a, u.as_mut(), i, t);
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                while !a[t][j].is_zero() {
                    let q = rounded_quotient(&a[t][j], &a[t][t]);
                    if !q.is_zero() {
                        col_axpy(&mut a, v.as_mut(), j, t, &q);
                    }
                    if !a[t][j].is_zero() {
                        swap_cols(&mut a, v.as_mut(), j, t);
                        dirty = true;
                    }
                }
            }
            let col_clear = (t + 1..rows).all(|i| a[i][t].is_zero());
            let row_clear = (t + 1..cols).all(|j| a[t][j].is_zero());
            if col_clear && row_clear && !dirty {
                // Enforce divisibility into the remaining submatrix.
                if let Some((bi, _)) = find_nondivisible(&a, t, rows, cols) {
                    let one = BigInt::one();
                    row_axpy_neg(&mut a, u.as_mut(), t, bi, &one);
                    continue;
                }
                break;
            }
        }

        if a[t][t].is_negative() {
            negate_row(&mut a, u.as_mut(), t);
        }
        t += 1;
    }

    let diagonal: Vec<BigInt> =
        (0..rows.min(cols)).map(|i| a[i][i].clone()).filter(|d| !d.is_zero()).collect();

    if let (Some(u_m), Some(v_m)) = (&u, &v) {
        if !certify(u_m, m, v_m, &a) {
            return Err(SnfError::CertificateFailed);
        }
    }

    Ok(SnfResult { rows, cols, diagonal, u, v })
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    m
}

/// Smallest-magnitude nonzero entry in the trailing submatrix; ties broken
/// by least fill-in, then by position.
fn choose_pivot(
    a: &[Vec<BigInt>],
    t: usize,
    rows: usize,
    cols: usize,
) -> Option<(usize, usize)> {
    let mut row_nnz = vec![0usize; rows];
    let mut col_nnz = vec![0usize; cols];
    for i in t..rows {
        for j in t..cols {
            if !a[i][j].is_zero() {
                row_nnz[i] += 1;
                col_nnz[j] += 1;
            }
        }
    }
    let mut best: Option<(BigInt, usize, usize, usize)> = None;
    for i in t..rows {
        for j in t..cols {
            if a[i][j].is_zero() {
                continue;
            }
            let mag = a[i][j].abs();
            let fill = row_nnz[i] + col_nnz[j];
            let better = match &best {
                None => true,
                Some((bmag, bfill, _, _)) => {
                    mag < *bmag || (mag == *bmag && fill < *bfill)
                }
            };
            if better {
                best = Some((mag, fill, i, j));
            }
        }
    }
    best.map(|(_, _, i, j)| (i, j))
}

fn rounded_quotient(n: &BigInt, d: &BigInt) -> BigInt {
    // Quotient rounding to nearest, so remainders have magnitude <= |d|/2.
    let (q, r) = num_integer::Integer::div_rem(n, d);
    let two_r = r.abs() * 2;
    if two_r > d.abs() {
        if (r.sign() == d.sign()) || r.is_zero() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

fn swap_rows(a: &mut [Vec<BigInt>], u: Option<&mut Vec<Vec<BigInt>>>, i: usize, j: usize) {
    if i != j {
        a.swap(i, j);
        if let Some(u) = u {
            u.swap(i, j);
        }
    }
}

fn swap_cols(a: &mut [Vec<BigInt>], v: Option<&mut Vec<Vec<BigInt>>>, i: usize, j: usize) {
    if i != j {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        if let Some(v) = v {
            for row in v.iter_mut() {
                row.swap(i, j);
            }
        }
    }
}

/// row_i -= q * row_t
fn row_axpy(a: &mut [Vec<BigInt>], u: Option<&mut Vec<Vec<BigInt>>>, i: usize, t: usize, q: &BigInt) {
    let (src, dst) = two_rows(a, t, i);
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        *d -= q * s;
    }
    if let Some(u) = u {
        let (src, dst) = two_rows(u, t, i);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            *d -= q * s;
        }
    }
}

/// row_i += q * row_src (used for the divisibility fix-up)
fn row_axpy_neg(
    a: &mut [Vec<BigInt>],
    u: Option<&mut Vec<Vec<BigInt>>>,
    i: usize,
    src_row: usize,
    q: &BigInt,
) {
    let (src, dst) = two_rows(a, src_row, i);
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        *d += q * s;
    }
    if let Some(u) = u {
        let (src, dst) = two_rows(u, src_row, i);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            *d += q * s;
        }
    }
}

/// col_j -= q * col_t
fn col_axpy(a: &mut [Vec<BigInt>], v: Option<&mut Vec<Vec<BigInt>>>, j: usize, t: usize, q: &BigInt) {
    for row in a.iter_mut() {
        let delta = q * &row[t];
        row[j] -= delta;
    }
    if let Some(v) = v {
        for row in v.iter_mut() {
            let delta = q * &row[t];
            row[j] -= delta;
        }
    }
}

fn negate_row(a: &mut [Vec<BigInt>], u: Option<&mut Vec<Vec<BigInt>>>, i: usize) {
    for x in a[i].iter_mut() {
        *x = -std::mem::take(x);
    }
    if let Some(u) = u {
        for x in u[i].iter_mut() {
            *x = -std::mem::take(x);
        }
    }
}

fn two_rows<'a>(a: &'a mut [Vec<BigInt>], src: usize, dst: usize) -> (&'a [BigInt], &'a mut [BigInt]) {
    debug_assert_ne!(src, dst);
    if src < dst {
        let (lo, hi) = a.split_at_mut(dst);
        (&lo[src], &mut hi[0])
    } else {
        let (lo, hi) = a.split_at_mut(src);
        (&hi[0], &mut lo[dst])
    }
}

fn find_nondivisible(
    a: &[Vec<BigInt>],
    t: usize,
    rows: usize,
    cols: usize,
) -> Option<(usize, usize)> {
    let p = &a[t][t];
    if p.is_zero() {
        return None;
    }
    for i in t + 1..rows {
        for j in t + 1..cols {
            if !(&a[i][j] % p).is_zero() {
                return Some((i, j));
            }
        }
    }
    None
}

fn certify(u: &[Vec<BigInt>], a: &SparseIntMatrix, v: &[Vec<BigInt>], d: &[Vec<BigInt>]) -> bool {
    // U*A*V == D, dense multiply.
    let rows = a.rows;
    let cols = a.cols;
    let mut ua = vec![vec![BigInt::zero(); cols]; rows];
    for &(i, j, val) in a.entries() {
        let val = BigInt::from(val);
        for r in 0..rows {
            if !u[r][i].is_zero() {
                let delta = &u[r][i] * &val;
                ua[r][j] += delta;
            }
        }
    }
    for (r, ua_row) in ua.iter().enumerate() {
        for c in 0..cols {
            let mut acc = BigInt::zero();
            for (k, ua_val) in ua_row.iter().enumerate() {
                if !ua_val.is_zero() && !v[k][c].is_zero() {
                    acc += ua_val * &v[k][c];
                }
            }
            if acc != d[r][c] {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn snf_diag(dense: &[Vec<i64>]) -> Vec<i64> {
        let m = SparseIntMatrix::from_dense(dense);
        let r = smith_normal_form(&m, true).unwrap();
        r.diagonal.iter().map(|d| i64::try_from(d).unwrap()).collect()
    }

    #[test]
    fn textbook_two_by_two() {
        assert_eq!(snf_diag(&[vec![2, 4], vec![6, 8]]), vec![2, 4]);
    }

    #[test]
    fn zero_and_identity() {
        assert_eq!(snf_diag(&[vec![0, 0], vec![0, 0]]), Vec::<i64>::new());
        assert_eq!(snf_diag(&[vec![1, 0], vec![0, 1]]), vec![1, 1]);
    }

    #[test]
    fn rectangular_and_negative() {
        assert_eq!(snf_diag(&[vec![-3, 0, 0]]), vec![3]);
        assert_eq!(snf_diag(&[vec![6], vec![4]]), vec![2]);
    }

    #[test]
    fn divisibility_needs_fixup() {
        // diag(2,3) alone is not in SNF; chain must become (1,6).
        assert_eq!(snf_diag(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
    }

    #[test]
    fn det_preserved_on_sample() {
        let m = SparseIntMatrix::from_dense(&[vec![3, 1, 4], vec![1, 5, 9], vec![2, 6, 5]]);
        let r = smith_normal_form(&m, true).unwrap();
        // det = 3(25-54) - 1(5-18) + 4(6-10) = -87+13-16 = -90
        assert_eq!(r.det_abs().unwrap(), BigInt::from(90));
        for w in r.diagonal.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "chain broken: {:?}", r.diagonal);
        }
    }

    #[test]
    fn cokernel_torsion_reading() {
        let m = SparseIntMatrix::from_dense(&[vec![2, 4], vec![6, 8]]);
        let r = smith_normal_form(&m, false).unwrap();
        assert_eq!(r.torsion(), vec![BigInt::from(2), BigInt::from(4)]);
        assert!(r.u.is_none() && r.v.is_none());
    }

    #[test]
    fn rounded_quotient_minimizes_remainder() {
        let cases: [(i64, i64); 8] =
            [(7, 2), (-7, 2), (7, -2), (-7, -2), (5, 3), (-5, 3), (4, 2), (1, 5)];
        for (n, d) in cases {
            let q = rounded_quotient(&BigInt::from(n), &BigInt::from(d));
            let r = BigInt::from(n) - &q * BigInt::from(d);
            assert!(r.abs() * 2 <= BigInt::from(d).abs(), "bad rounding for {n}/{d}: q={q} r={r}");
        }
    }
}
