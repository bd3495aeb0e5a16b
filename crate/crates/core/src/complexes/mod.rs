//! Proper chain complexes of based free modules.
//!
//! Boundary matrices are integer and sparse; the coefficient ring enters
//! only when homology is computed. Complexes built from a metric window
//! (Rips) remember, for every cell, which window points it touches — that
//! is what collar-relative constructions and support queries consume.

pub mod rips;

use crate::matrix::{write_sparse_text, MatrixError, SparseIntMatrix};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("boundary composition nonzero between degrees {0} and {1}")]
    NotAComplex(usize, usize),
    #[error("boundary matrix between degrees {0} and {1} has shape {2}x{3}, expected {4}x{5}")]
    ShapeMismatch(usize, usize, usize, usize, usize, usize),
    #[error("complex carries no window data (needed for collar/support operations)")]
    NoWindow,
    #[error("complex carries no per-cell membership data")]
    NoMembers,
    #[error("factor complex carries no control data")]
    NoControl,
    #[error("chain degree {0} out of range (top degree {1})")]
    BadDegree(usize, usize),
    #[error("chain references cell {0} in degree {1}, which has {2} cells")]
    BadCell(usize, usize, usize),
    #[error("collar width {0} exceeds window radius {1}")]
    CollarTooWide(u32, u32),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Trimmed copy of the window a complex was built over.
#[derive(Debug, Clone)]
pub struct WindowInfo {
    pub labels: Vec<String>,
    pub depth: Vec<u32>,
    pub radius: u32,
}

/// Free module with a distinguished basis; cells may point at window data.
#[derive(Debug, Clone)]
pub struct BasedFreeModule {
    pub labels: Vec<String>,
    /// Control point (window point index) per cell.
    pub control: Option<Vec<usize>>,
    /// All window points a cell touches (simplex vertices), per cell.
    pub members: Option<Vec<Vec<usize>>>,
}

impl BasedFreeModule {
    pub fn plain(labels: Vec<String>) -> Self {
        BasedFreeModule { labels, control: None, members: None }
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }
}

/// Chain complex: `diffs[k]` is the boundary map from degree k+1 to degree k.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    pub modules: Vec<BasedFreeModule>,
    pub diffs: Vec<SparseIntMatrix>,
    pub window: Option<WindowInfo>,
}

impl ChainComplex {
    /// Builds and validates an algebraic complex with auto-generated labels.
    pub fn from_ranks_and_diffs(
        ranks: &[usize],
        diffs: Vec<SparseIntMatrix>,
    ) -> Result<Self, ComplexError> {
        let modules = ranks
            .iter()
            .enumerate()
            .map(|(deg, &r)| {
                BasedFreeModule::plain((0..r).map(|i| format!("d{deg}.{i}")).collect())
            })
            .collect();
        let c = ChainComplex { modules, diffs, window: None };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ComplexError> {
        let n = self.modules.len();
        if self.diffs.len() + 1 != n.max(1) {
            // A complex with 0 or 1 module has no boundary maps.
            if !(self.diffs.is_empty() && n <= 1) {
                return Err(ComplexError::ShapeMismatch(0, 0, self.diffs.len(), 0, n.max(1) - 1, 0));
            }
        }
        for (k, d) in self.diffs.iter().enumerate() {
            let (rows, cols) = (self.modules[k].rank(), self.modules[k + 1].rank());
            if d.rows != rows || d.cols != cols {
                return Err(ComplexError::ShapeMismatch(k + 1, k, d.rows, d.cols, rows, cols));
            }
        }
        for k in 0..self.diffs.len().saturating_sub(1) {
            let composed = self.diffs[k].mul(&self.diffs[k + 1])?;
            if !composed.is_zero() {
                return Err(ComplexError::NotAComplex(k + 2, k));
            }
        }
        Ok(())
    }

    pub fn top_degree(&self) -> usize {
        self.modules.len().saturating_sub(1)
    }

    pub fn dim(&self, k: usize) -> usize {
        self.modules.get(k).map_or(0, |m| m.rank())
    }

    /// Boundary ∂_k : C_k → C_{k-1}; zero-shaped outside the support.
    pub fn boundary(&self, k: usize) -> SparseIntMatrix {
        if k == 0 || k > self.top_degree() {
            return SparseIntMatrix::zero(if k == 0 { 0 } else { self.dim(k - 1) }, self.dim(k));
        }
        self.diffs[k - 1].clone()
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.modules.iter().map(|m| m.rank()).collect()
    }

    /// Portable text export: one block per boundary map.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for (k, d) in self.diffs.iter().enumerate() {
            out.push_str(&write_sparse_text(k + 1, d));
            out.push('\n');
        }
        if self.diffs.is_empty() {
            out.push_str(&write_sparse_text(0, &SparseIntMatrix::zero(0, self.dim(0))));
        }
        out
    }

    // Small standard complexes, used as probes and in tests.

    /// One vertex.
    pub fn point() -> Self {
        ChainComplex::from_ranks_and_diffs(&[1], vec![]).expect("valid")
    }

    /// Two vertices, one edge.
    pub fn interval() -> Self {
        let d1 = SparseIntMatrix::from_dense(&[vec![-1], vec![1]]);
        ChainComplex::from_ranks_and_diffs(&[2, 1], vec![d1]).expect("valid")
    }

    /// One vertex, one loop edge: homology of a circle.
    pub fn loop_circle() -> Self {
        let d1 = SparseIntMatrix::zero(1, 1);
        ChainComplex::from_ranks_and_diffs(&[1, 1], vec![d1]).expect("valid")
    }

    /// 0 → Z --2--> Z → 0 in degrees 1, 0.
    pub fn times2() -> Self {
        let d1 = SparseIntMatrix::from_dense(&[vec![2]]);
        ChainComplex::from_ranks_and_diffs(&[1, 1], vec![d1]).expect("valid")
    }

    /// Simplicial n-cycle: n vertices, n edges.
    pub fn cycle_graph(n: usize) -> Self {
        assert!(n >= 3);
        let mut triplets = Vec::new();
        for e in 0..n {
            let (a, b) = (e, (e + 1) % n);
            triplets.push((a, e, -1));
            triplets.push((b, e, 1));
        }
        let d1 = SparseIntMatrix::from_triplets(n, n, triplets).expect("in range");
        ChainComplex::from_ranks_and_diffs(&[n, n], vec![d1]).expect("valid")
    }
}

/// Cochain complex: `deltas[k]` raises degree k → k+1.
#[derive(Debug, Clone)]
pub struct CochainComplex {
    pub modules: Vec<BasedFreeModule>,
    pub deltas: Vec<SparseIntMatrix>,
}

impl CochainComplex {
    pub fn top_degree(&self) -> usize {
        self.modules.len().saturating_sub(1)
    }

    pub fn dim(&self, k: usize) -> usize {
        self.modules.get(k).map_or(0, |m| m.rank())
    }

    /// δ^k : C^k → C^{k+1}; zero-shaped outside the support.
    pub fn delta(&self, k: usize) -> SparseIntMatrix {
        if k >= self.deltas.len() {
            return SparseIntMatrix::zero(self.dim(k + 1), self.dim(k));
        }
        self.deltas[k].clone()
    }
}

/// Compactly supported dual: coboundary = transpose of the boundary.
pub fn compact_dual(c: &ChainComplex) -> CochainComplex {
    CochainComplex {
        modules: c.modules.clone(),
        deltas: c.diffs.iter().map(|d| d.transpose()).collect(),
    }
}

/// Dual of the dual: recovers a chain complex with the original matrices.
pub fn compact_dual_back(c: &CochainComplex) -> ChainComplex {
    ChainComplex {
        modules: c.modules.clone(),
        diffs: c.deltas.iter().map(|d| d.transpose()).collect(),
        window: None,
    }
}

/// A chain in one degree of a complex.
#[derive(Debug, Clone)]
pub struct Chain {
    pub degree: usize,
    pub coeffs: Vec<(usize, i64)>,
}

/// Properness census for a map of based modules: how many source cells hit
/// each target cell. On finite windows every map is proper; the numbers are
/// the content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperMapReport {
    pub per_target_counts: Vec<usize>,
    pub max_count: usize,
    pub proper: bool,
}

pub fn is_proper_map(f: &SparseIntMatrix) -> ProperMapReport {
    let counts = f.row_support_counts();
    let max_count = counts.iter().copied().max().unwrap_or(0);
    ProperMapReport { per_target_counts: counts, max_count, proper: true }
}

/// Tensor product complex; remembers the factor decomposition of each cell.
#[derive(Debug, Clone)]
pub struct TensorComplex {
    pub complex: ChainComplex,
    /// Per degree, per cell: (left degree, left cell index, right cell index).
    pub cells: Vec<Vec<(usize, usize, usize)>>,
    pub left_window: Option<WindowInfo>,
    pub right_window: Option<WindowInfo>,
    left_control: Vec<Option<Vec<usize>>>,
    right_control: Vec<Option<Vec<usize>>>,
}

/// Tensor product with the boundary sign rule
/// ∂(σ⊗λ) = ∂σ⊗λ + (−1)^{deg σ} σ⊗∂λ.
pub fn tensor_product(a: &ChainComplex, b: &ChainComplex) -> Result<TensorComplex, ComplexError> {
    let top = a.top_degree() + b.top_degree();
    let mut cells: Vec<Vec<(usize, usize, usize)>> = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut layer = Vec::new();
        for i in 0..=k.min(a.top_degree()) {
            let j = k - i;
            if j > b.top_degree() {
                continue;
            }
            for s in 0..a.dim(i) {
                for l in 0..b.dim(j) {
                    layer.push((i, s, l));
                }
            }
        }
        cells.push(layer);
    }
    // Cell index lookup per degree: (i, s, l) -> position.
    let index_of = |k: usize, i: usize, s: usize, l: usize| -> usize {
        let mut pos = 0usize;
        for ii in 0..i {
            let jj = k - ii;
            if jj <= b.top_degree() {
                pos += a.dim(ii) * b.dim(jj);
            }
        }
        pos + s * b.dim(k - i) + l
    };
    let mut diffs = Vec::new();
    for k in 1..=top {
        let mut triplets = Vec::new();
        for (src, &(i, s, l)) in cells[k].iter().enumerate() {
            let j = k - i;
            if i >= 1 {
                let da = &a.diffs[i - 1];
                for &(row, col, v) in da.entries() {
                    if col == s {
                        triplets.push((index_of(k - 1, i - 1, row, l), src, v));
                    }
                }
            }
            if j >= 1 {
                let db = &b.diffs[j - 1];
                let sign = if i % 2 == 0 { 1 } else { -1 };
                for &(row, col, v) in db.entries() {
                    if col == l {
                        triplets.push((index_of(k - 1, i, s, row), src, sign * v));
                    }
                }
            }
        }
        diffs.push(SparseIntMatrix::from_triplets(cells[k - 1].len(), cells[k].len(), triplets)?);
    }
    let modules: Vec<BasedFreeModule> = cells
        .iter()
        .enumerate()
        .map(|(k, layer)| {
            let labels = layer
                .iter()
                .map(|&(i, s, l)| {
                    format!("{}x{}", a.modules[i].labels[s], b.modules[k - i].labels[l])
                })
                .collect();
            BasedFreeModule { labels, control: None, members: None }
        })
        .collect();
    let complex = ChainComplex { modules, diffs, window: None };
    complex.validate()?;
    Ok(TensorComplex {
        complex,
        cells,
        left_window: a.window.clone(),
        right_window: b.window.clone(),
        left_control: a.modules.iter().map(|m| m.control.clone()).collect(),
        right_control: b.modules.iter().map(|m| m.control.clone()).collect(),
    })
}

/// Support of a chain in a tensor complex: window points its cells touch,
/// split into (base footprint from the left factor, fiber footprint from
/// the right factor).
pub fn supports(
    t: &TensorComplex,
    chain: &Chain,
) -> Result<(BTreeSet<usize>, BTreeSet<usize>), ComplexError> {
    let k = chain.degree;
    if k >= t.cells.len() {
        return Err(ComplexError::BadDegree(k, t.cells.len().saturating_sub(1)));
    }
    let mut base = BTreeSet::new();
    let mut fiber = BTreeSet::new();
    for &(cell, coeff) in &chain.coeffs {
        if coeff == 0 {
            continue;
        }
        let layer = &t.cells[k];
        if cell >= layer.len() {
            return Err(ComplexError::BadCell(cell, k, layer.len()));
        }
        let (i, s, l) = layer[cell];
        let j = k - i;
        let left = t.left_control[i].as_ref().ok_or(ComplexError::NoControl)?;
        let right = t.right_control[j].as_ref().ok_or(ComplexError::NoControl)?;
        base.insert(left[s]);
        fiber.insert(right[l]);
    }
    Ok((base, fiber))
}

/// Census returned alongside a collar-relative complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollarCensus {
    pub kept: Vec<usize>,
    pub killed: Vec<usize>,
    pub collar_width: u32,
}

/// Quotient by the collar subcomplex: kills every cell all of whose window
/// points lie at depth > radius - w. The killed cells are closed under
/// taking faces, so the quotient is again a chain complex; its compact dual
/// computes cohomology relative to the window frontier.
pub fn relative_collar_complex(
    c: &ChainComplex,
    w: u32,
) -> Result<(ChainComplex, CollarCensus), ComplexError> {
    let window = c.window.as_ref().ok_or(ComplexError::NoWindow)?;
    if w > window.radius {
        return Err(ComplexError::CollarTooWide(w, window.radius));
    }
    let cutoff = window.radius - w;
    let mut keep_maps: Vec<Vec<Option<usize>>> = Vec::new();
    let mut kept_counts = Vec::new();
    let mut killed_counts = Vec::new();
    let mut modules = Vec::new();
    for m in &c.modules {
        let members = m.members.as_ref().ok_or(ComplexError::NoMembers)?;
        let mut map = Vec::with_capacity(m.rank());
        let mut labels = Vec::new();
        let mut control = Vec::new();
        let mut kept_members = Vec::new();
        let mut next = 0usize;
        for (idx, verts) in members.iter().enumerate() {
            let all_collar = verts.iter().all(|&v| window.depth[v] > cutoff);
            if all_collar {
                map.push(None);
            } else {
                map.push(Some(next));
                next += 1;
                labels.push(m.labels[idx].clone());
                if let Some(ctrl) = &m.control {
                    control.push(ctrl[idx]);
                }
                kept_members.push(verts.clone());
            }
        }
        kept_counts.push(next);
        killed_counts.push(m.rank() - next);
        modules.push(BasedFreeModule {
            labels,
            control: m.control.as_ref().map(|_| control),
            members: Some(kept_members),
        });
        keep_maps.push(map);
    }
    let mut diffs = Vec::new();
    for (k, d) in c.diffs.iter().enumerate() {
        let rows = kept_counts[k];
        let cols = kept_counts[k + 1];
        let mut triplets = Vec::new();
        for &(i, j, v) in d.entries() {
            if let (Some(ni), Some(nj)) = (keep_maps[k][i], keep_maps[k + 1][j]) {
                triplets.push((ni, nj, v));
            }
        }
        diffs.push(SparseIntMatrix::from_triplets(rows, cols, triplets)?);
    }
    let out = ChainComplex { modules, diffs, window: Some(window.clone()) };
    out.validate()?;
    Ok((out, CollarCensus { kept: kept_counts, killed: killed_counts, collar_width: w }))
}
