//! Left-coset spaces G/H on finite windows: exact coset keys where the
//! algebra permits, union-find over the window otherwise, and the
//! Hausdorff-metric quotient window with per-pair convergence flags.
//!
//! A coset key is a canonical value attached to gH, equal for g and gh and
//! distinct for distinct cosets. Six exact key strategies ship: lattice
//! residues for subgroups of Z^n, minimal representatives for cyclic
//! subgroups of free groups, affine residues for ⟨a^j⟩ in BS(±1, n),
//! lattice-line residues for cyclic translation subgroups of the triangle
//! group, and two product reductions — a subgroup of one direct factor
//! keys by (factor key, other component), a subgroup of one free factor
//! keys by (syllable prefix, factor key of the trailing syllable). Every
//! other pair falls back to connectivity classes inside the window,
//! flagged approximate.

pub mod bundle;

use crate::groups::{
    ball, parse_word, pow, Ball, Group, GroupElement, GroupError, Marked,
};
use crate::groups::bs::pow_rational;
use crate::groups::free::FreeElt;
use crate::groups::product::{DirectProduct, FreeProduct};
use crate::groups::triangle::{Eis, TriangleElt};
use crate::par;
use crate::window::{MetricWindow, WindowError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CosetError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("subgroup needs at least one non-identity generator")]
    EmptySubgroup,
    #[error("element {0:?} is outside the window of radius {1}")]
    NotInWindow(String, u32),
    #[error("margin {margin} violates margin >= 1 (radius given: {radius})")]
    BadMargin { radius: u32, margin: u32 },
}

/// Serializable subgroup description: words in the owner's marking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub generators: Vec<String>,
}

/// Parsed subgroup of a specific marked group.
#[derive(Debug, Clone)]
pub struct Subgroup {
    pub words: Vec<String>,
    pub elements: Vec<GroupElement>,
}

impl Subgroup {
    pub fn parse(g: &Group, spec: &SubgroupSpec) -> Result<Self, CosetError> {
        let mut elements = Vec::new();
        for w in &spec.generators {
            elements.push(parse_word(g, w)?);
        }
        if elements.iter().all(|e| *e == g.identity()) {
            return Err(CosetError::EmptySubgroup);
        }
        Ok(Subgroup { words: spec.generators.clone(), elements })
    }

    pub fn describe(&self) -> String {
        format!("<{}>", self.words.join(", "))
    }
}

/// Integer lattice in Z^n held as a column Hermite form; reduces vectors to
/// canonical residues mod the lattice.
#[derive(Debug, Clone)]
pub struct LatticeForm {
    dim: usize,
    /// (pivot row, pivot value > 0, full column), rows strictly increasing.
    pivots: Vec<(usize, i128, Vec<i128>)>,
}

impl LatticeForm {
    pub fn new(dim: usize, generators: &[Vec<i64>]) -> Self {
        let mut cols: Vec<Vec<i128>> = generators
            .iter()
            .map(|g| {
                assert_eq!(g.len(), dim, "generator dimension mismatch");
                g.iter().map(|&x| x as i128).collect()
            })
            .collect();
        let mut pivots = Vec::new();
        for row in 0..dim {
            // Euclid the row entries of the remaining columns down to one.
            loop {
                let mut live: Vec<usize> =
                    (0..cols.len()).filter(|&c| cols[c][row] != 0).collect();
                if live.len() <= 1 {
                    break;
                }
                live.sort_by_key(|&c| cols[c][row].unsigned_abs());
                let (small, big) = (live[0], live[1]);
                let q = cols[big][row].div_euclid(cols[small][row]);
                for r in 0..dim {
                    let t = cols[small][r];
                    cols[big][r] -= q * t;
                }
            }
            if let Some(c) = (0..cols.len()).find(|&c| cols[c][row] != 0) {
                let mut col = cols.swap_remove(c);
                if col[row] < 0 {
                    for v in col.iter_mut() {
                        *v = -*v;
                    }
                }
                pivots.push((row, col[row], col));
            }
        }
        LatticeForm { dim, pivots }
    }

    /// Canonical representative of v + L: pivot coordinates land in
    /// [0, pivot), the rest are untouched.
    pub fn reduce(&self, v: &[i64]) -> Vec<i128> {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (row, val, col) in &self.pivots {
            let q = w[*row].div_euclid(*val);
            if q != 0 {
                for r in 0..self.dim {
                    w[r] -= q * col[r];
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Index of the lattice in Z^dim: the pivot product when full rank.
    pub fn index(&self) -> Option<u128> {
        if self.rank() == self.dim {
            Some(self.pivots.iter().map(|(_, v, _)| *v as u128).product())
        } else {
            None
        }
    }
}

/// How coset keys are computed for one (group, subgroup) pair.
#[derive(Debug, Clone)]
pub enum KeyStrategy {
    /// Residue mod an integer lattice (free abelian groups, any subgroup).
    Lattice(LatticeForm),
    /// Minimal coset representative for ⟨w⟩ in a free group.
    FreeCyclic { w: FreeElt },
    /// (t-exponent, translation residue) for ⟨a^j⟩ in BS(±1, n).
    BsAffine { j: i128 },
    /// (linear part, translation mod the conjugated line) for a cyclic
    /// translation subgroup of the triangle group.
    TriLine { d: Eis },
    /// Subgroup inside one factor of a direct product (`true` = right):
    /// the factor oracle's key paired with the other component.
    DirectFactor { right: bool, inner: Box<CosetOracle> },
    /// Subgroup inside one factor of a free product (`true` = right): the
    /// syllable prefix paired with the factor oracle's key on the trailing
    /// same-side syllable. Distinct prefixes give distinct cosets because
    /// a reduced word cannot end in two syllables of the subgroup's side.
    FreeFactor { right: bool, inner: Box<CosetOracle> },
    /// No exact form: connectivity classes inside the window.
    Window,
}

/// If every generator of `h` lies in one embedded factor, the side and the
/// generators rewritten as elements of that factor. Identity generators
/// are side-agnostic and dropped.
fn direct_factor_subgroup(dp: &DirectProduct, h: &Subgroup) -> Option<(bool, Subgroup)> {
    let (lid, rid) = (dp.left.identity(), dp.right.identity());
    let mut side: Option<bool> = None;
    let mut parts = Vec::new();
    for e in &h.elements {
        let (l, r) = dp.split(e);
        let this = match (*l == lid, *r == rid) {
            (true, true) => continue,
            (false, true) => false,
            (true, false) => true,
            (false, false) => return None,
        };
        if *side.get_or_insert(this) != this {
            return None;
        }
        parts.push(if this { r.clone() } else { l.clone() });
    }
    let side = side?;
    let factor = if side { &dp.right } else { &dp.left };
    let words = parts.iter().map(|p| factor.label(p)).collect();
    Some((side, Subgroup { words, elements: parts }))
}

/// Free-product analogue: every generator must be a single syllable of one
/// common side.
fn free_factor_subgroup(fp: &FreeProduct, h: &Subgroup) -> Option<(bool, Subgroup)> {
    let mut side: Option<bool> = None;
    let mut parts = Vec::new();
    for e in &h.elements {
        let syl = match e {
            GroupElement::Alt(s) => s,
            _ => unreachable!("free-product subgroup holds free-product elements"),
        };
        match syl.as_slice() {
            [] => continue,
            [(this, x)] => {
                if *side.get_or_insert(*this) != *this {
                    return None;
                }
                parts.push(x.clone());
            }
            _ => return None,
        }
    }
    let side = side?;
    let factor = if side { &fp.right } else { &fp.left };
    let words = parts.iter().map(|p| factor.label(p)).collect();
    Some((side, Subgroup { words, elements: parts }))
}

/// Splits a free-product element as (prefix, trailing syllable of the
/// given side), the trailing part being the factor identity when the word
/// ends on the other side.
fn split_trailing(
    fp: &FreeProduct,
    x: &GroupElement,
    right: bool,
) -> (GroupElement, GroupElement) {
    let syl = match x {
        GroupElement::Alt(s) => s,
        other => panic!("element {other:?} does not belong to this free product"),
    };
    let factor = if right { &fp.right } else { &fp.left };
    match syl.last() {
        Some((side, tail)) if *side == right => {
            (GroupElement::Alt(syl[..syl.len() - 1].to_vec()), tail.clone())
        }
        _ => (x.clone(), factor.identity()),
    }
}

#[derive(Debug, Clone)]
pub struct CosetOracle {
    pub strategy: KeyStrategy,
    pub exact: bool,
    pub method: &'static str,
}

impl CosetOracle {
    pub fn build(g: &Group, h: &Subgroup) -> CosetOracle {
        let single = if h.elements.len() == 1 { Some(&h.elements[0]) } else { None };
        match g {
            Group::Abelian(ab) => {
                let gens: Vec<Vec<i64>> = h
                    .elements
                    .iter()
                    .map(|e| match e {
                        GroupElement::Abelian(v) => v.coords().to_vec(),
                        _ => unreachable!("abelian subgroup holds abelian elements"),
                    })
                    .collect();
                CosetOracle {
                    strategy: KeyStrategy::Lattice(LatticeForm::new(ab.rank(), &gens)),
                    exact: true,
                    method: "lattice-residue",
                }
            }
            Group::Free(_) => match single {
                Some(GroupElement::Free(w)) if !w.is_empty() => CosetOracle {
                    strategy: KeyStrategy::FreeCyclic { w: w.clone() },
                    exact: true,
                    method: "cyclic-min-rep",
                },
                _ => CosetOracle::window(),
            },
            Group::Bs(bs) => match single {
                Some(GroupElement::Bs(e))
                    if bs.affine_multiplier().is_some()
                        && e.syllable_count() == 0
                        && e.lead_exponent() != 0 =>
                {
                    CosetOracle {
                        strategy: KeyStrategy::BsAffine { j: e.lead_exponent() },
                        exact: true,
                        method: "affine-residue",
                    }
                }
                _ => CosetOracle::window(),
            },
            Group::Triangle(_) => match single {
                Some(GroupElement::Triangle(e)) if e.is_translation() && !e.tr.is_zero() => {
                    CosetOracle {
                        strategy: KeyStrategy::TriLine { d: e.tr },
                        exact: true,
                        method: "translation-line",
                    }
                }
                _ => CosetOracle::window(),
            },
            Group::Direct(dp) => match direct_factor_subgroup(dp, h) {
                Some((right, fsub)) => {
                    let factor = if right { &dp.right } else { &dp.left };
                    let inner = CosetOracle::build(factor, &fsub);
                    if inner.exact {
                        CosetOracle {
                            strategy: KeyStrategy::DirectFactor {
                                right,
                                inner: Box::new(inner),
                            },
                            exact: true,
                            method: "direct-factor",
                        }
                    } else {
                        CosetOracle::window()
                    }
                }
                None => CosetOracle::window(),
            },
            Group::FreeProd(fp) => match free_factor_subgroup(fp, h) {
                Some((right, fsub)) => {
                    let factor = if right { &fp.right } else { &fp.left };
                    let inner = CosetOracle::build(factor, &fsub);
                    if inner.exact {
                        CosetOracle {
                            strategy: KeyStrategy::FreeFactor {
                                right,
                                inner: Box::new(inner),
                            },
                            exact: true,
                            method: "free-factor",
                        }
                    } else {
                        CosetOracle::window()
                    }
                }
                None => CosetOracle::window(),
            },
        }
    }

    fn window() -> CosetOracle {
        CosetOracle { strategy: KeyStrategy::Window, exact: false, method: "window-union" }
    }

    /// Canonical key of xH, rendered as a string so keys of different
    /// strategies stay comparable and serializable. `None` only for the
    /// window strategy.
    pub fn key(&self, g: &Group, x: &GroupElement) -> Option<String> {
        match (&self.strategy, g) {
            (KeyStrategy::Lattice(l), _) => {
                let v = match x {
                    GroupElement::Abelian(v) => v.coords(),
                    _ => unreachable!("lattice keys apply to abelian elements"),
                };
                let r = l.reduce(v);
                Some(format!(
                    "l:{}",
                    r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
                ))
            }
            (KeyStrategy::FreeCyclic { w }, Group::Free(fg)) => {
                let x = match x {
                    GroupElement::Free(e) => e,
                    _ => unreachable!("free keys apply to free elements"),
                };
                // gH is finite-to-one under length: the minimum of |g·w^k|
                // is attained with |k| ≤ 2|g|+1 because |w^k| ≥ |k| and a
                // winner must not be longer than g·w^0.
                let bound = 2 * (x.len() as i64) + 1;
                let mut best: Option<FreeElt> = None;
                for k in -bound..=bound {
                    let cand = fg.mul(x, &pow(fg, w, k));
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            (cand.len(), cand.letters()) < (b.len(), b.letters())
                        }
                    };
                    if better {
                        best = Some(cand);
                    }
                }
                Some(format!("f:{}", fg.label(&best.expect("k=0 always considered"))))
            }
            (KeyStrategy::BsAffine { j }, Group::Bs(bs)) => {
                let x = match x {
                    GroupElement::Bs(e) => e,
                    _ => unreachable!("affine keys apply to BS elements"),
                };
                let mu = bs.affine_multiplier().expect("strategy requires |m| = 1");
                let (tr, k) = bs.to_affine(x).expect("strategy requires |m| = 1");
                // xH sweeps tr + j·μ^k·Z; reduce tr into [0, |j·μ^k|).
                let modulus = pow_rational(mu, k) * BigRational::from(BigInt::from(*j));
                let modulus = modulus.abs();
                let q = (&tr / &modulus).floor();
                let r = tr - q * &modulus;
                Some(format!("b:{k};{r}"))
            }
            (KeyStrategy::TriLine { d }, Group::Triangle(_)) => {
                let x = match x {
                    GroupElement::Triangle(e) => e,
                    _ => unreachable!("line keys apply to triangle elements"),
                };
                // x·(translation by d)^s translates x.tr along the image of
                // d under x's linear part.
                let dir = if x.refl { d.conj() } else { *d }.rot(x.rot);
                let r = reduce_along_line(x.tr, dir);
                Some(format!("t:{}{};{},{}", x.refl as u8, x.rot, r.x, r.y))
            }
            (KeyStrategy::DirectFactor { right, inner }, Group::Direct(dp)) => {
                let (l, r) = dp.split(x);
                let (own, other) = if *right { (r, l) } else { (l, r) };
                let (factor, other_factor) =
                    if *right { (&dp.right, &dp.left) } else { (&dp.left, &dp.right) };
                let ik = inner.key(factor, own).expect("factor oracle is exact");
                Some(format!("d{}:{};{}", *right as u8, ik, other_factor.label(other)))
            }
            (KeyStrategy::FreeFactor { right, inner }, Group::FreeProd(fp)) => {
                // x = p·s with s the trailing syllable on the subgroup's
                // side (identity if absent). xH = yH forces equal prefixes:
                // p⁻¹q reduced lands in the factor only when p = q.
                let (prefix, tail) = split_trailing(fp, x, *right);
                let factor = if *right { &fp.right } else { &fp.left };
                let ik = inner.key(factor, &tail).expect("factor oracle is exact");
                Some(format!("p{}:{};{}", *right as u8, fp.label(&prefix), ik))
            }
            (KeyStrategy::Window, _) => None,
            _ => unreachable!("strategy/group mismatch"),
        }
    }

    /// Exact membership test x ∈ H (key equality with the identity coset).
    /// `None` when only the window fallback is available.
    pub fn contains(&self, g: &Group, x: &GroupElement) -> Option<bool> {
        let kx = self.key(g, x)?;
        let ke = self.key(g, &g.identity())?;
        Some(kx == ke)
    }
}

/// Reduces t modulo the line Z·dir: subtracts the integer multiple of dir
/// that puts the dir-component of t into [0, 1).
fn reduce_along_line(t: Eis, dir: Eis) -> Eis {
    assert!(!dir.is_zero(), "translation direction must be nonzero");
    // Basis (dir, ω·dir) of the rational plane; α is the dir-coordinate.
    // α = det(t, ω·dir) / det(dir, ω·dir) with det((a,b),(c,d)) = ad − bc.
    let wd = dir.rot1();
    let det = |u: Eis, v: Eis| (u.x as i128) * (v.y as i128) - (u.y as i128) * (v.x as i128);
    let den = det(dir, wd);
    let num = det(t, wd);
    let q = num.div_euclid(den);
    let q64 = i64::try_from(q).expect("line reduction quotient fits i64");
    Eis::new(t.x - q64 * dir.x, t.y - q64 * dir.y)
}

/// Coset classes of the elements of a ball window.
#[derive(Debug, Clone)]
pub struct CosetAssignment {
    /// Class id per ball element, ids ordered by first appearance.
    pub class_of: Vec<usize>,
    pub class_count: usize,
    pub exact: bool,
    pub method: &'static str,
}

pub fn assign_cosets(
    g: &Group,
    window: &Ball<GroupElement>,
    h: &Subgroup,
    oracle: &CosetOracle,
) -> CosetAssignment {
    match &oracle.strategy {
        KeyStrategy::Window => {
            // Union by right multiplication with subgroup generators; only
            // merges witnessed inside the window are seen.
            let mut parent: Vec<usize> = (0..window.len()).collect();
            fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
                while parent[i] != i {
                    parent[i] = parent[parent[i]];
                    i = parent[i];
                }
                i
            }
            for i in 0..window.len() {
                for e in &h.elements {
                    for e in [e.clone(), g.inv(e)] {
                        let y = g.mul(&window.elements[i], &e);
                        if let Some(j) = window.position(&y) {
                            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                            if ri != rj {
                                parent[ri.max(rj)] = ri.min(rj);
                            }
                        }
                    }
                }
            }
            let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
            let mut class_of = Vec::with_capacity(window.len());
            for i in 0..window.len() {
                let root = find(&mut parent, i);
                let next = ids.len();
                class_of.push(*ids.entry(root).or_insert(next));
            }
            CosetAssignment {
                class_of,
                class_count: ids.len(),
                exact: false,
                method: oracle.method,
            }
        }
        _ => {
            let keys = par::map_indexed(&window.elements, |_, e| {
                oracle.key(g, e).expect("exact strategy yields keys")
            });
            let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
            let mut class_of = Vec::with_capacity(window.len());
            for k in &keys {
                let next = ids.len();
                class_of.push(*ids.entry(k.as_str()).or_insert(next));
            }
            CosetAssignment {
                class_of,
                class_count: ids.len(),
                exact: true,
                method: oracle.method,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuotientParams {
    pub radius: u32,
    pub margin: u32,
    pub budget: usize,
}

/// The quotient space G/H restricted to cosets meeting Ball(radius),
/// with windowed Hausdorff distances and per-pair convergence flags.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientWindow {
    pub group: String,
    pub subgroup: Vec<String>,
    pub radius: u32,
    pub margin: u32,
    pub exact_keys: bool,
    pub method: &'static str,
    /// Label of each coset's minimal-depth representative.
    pub class_labels: Vec<String>,
    /// Elements of each fiber D_b within Ball(radius), as window labels.
    pub fibers: Vec<Vec<String>>,
    pub basepoint_class: usize,
    /// Hausdorff estimates from the enlarged window.
    pub distance: Vec<Vec<u32>>,
    pub converged: Vec<Vec<bool>>,
    #[serde(skip)]
    pub support: QuotientSupport,
}

/// Window internals kept for the bundle-axiom checks.
#[derive(Debug, Clone, Default)]
pub struct QuotientSupport {
    pub ball: Option<Ball<GroupElement>>,
    /// Class id per big-ball element (full assignment, before restriction).
    pub class_of_raw: Vec<usize>,
    /// Raw class id per kept class.
    pub kept_raw_ids: Vec<usize>,
    /// Big-ball member indices per kept class.
    pub members_all: Vec<Vec<usize>>,
    /// Members with depth ≤ radius per kept class.
    pub members_inner: Vec<Vec<usize>>,
}

fn neighbor_lists(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// Multi-source BFS over `adj`, optionally restricted to `allowed` vertices.
/// Returns u32::MAX where unreachable.
fn multi_bfs(adj: &[Vec<usize>], sources: &[usize], allowed: Option<&[bool]>) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adj.len()];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        if allowed.map_or(true, |a| a[s]) && dist[s] == u32::MAX {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if allowed.map_or(true, |a| a[w]) && dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn quotient_window(
    g: &Group,
    h: &Subgroup,
    p: &QuotientParams,
) -> Result<QuotientWindow, CosetError> {
    // Margins larger than the radius are legal (they certify more distance
    // values at the cost of a bigger ambient ball); a zero margin leaves no
    // room for partners of boundary points and certifies nothing.
    if p.margin < 1 {
        return Err(CosetError::BadMargin { radius: p.radius, margin: p.margin });
    }
    let oracle = CosetOracle::build(g, h);
    let big = ball(g, p.radius + p.margin, p.budget)?;
    let assignment = assign_cosets(g, &big, h, &oracle);

    let inner: Vec<bool> = big.depths.iter().map(|&d| d <= p.radius).collect();

    // Kept classes: those meeting Ball(radius), ordered by first inner
    // appearance (ball order is depth-major, so this is deterministic).
    let mut kept_raw_ids: Vec<usize> = Vec::new();
    let mut kept_index: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..big.len() {
        if inner[i] && !kept_index.contains_key(&assignment.class_of[i]) {
            kept_index.insert(assignment.class_of[i], kept_raw_ids.len());
            kept_raw_ids.push(assignment.class_of[i]);
        }
    }
    let k = kept_raw_ids.len();

    let mut members_all: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut members_inner: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 0..big.len() {
        if let Some(&c) = kept_index.get(&assignment.class_of[i]) {
            members_all[c].push(i);
            if inner[i] {
                members_inner[c].push(i);
            }
        }
    }

    let adj = neighbor_lists(big.len(), &big.edges);

    // One BFS field per class over the enlarged ball, sourced at every
    // member the window sees. The Hausdorff estimate for a pair takes the
    // sup of each field over the other class's inner pool only: widening
    // the ball by `margin` supplies partners and connecting paths, never
    // more sup points.
    let fields: Vec<Vec<u32>> =
        par::map_range(k, |c| multi_bfs(&adj, &members_all[c], None));

    // Certification: if the estimate v is at most `margin`, it is exact.
    // Every inner point's true partner sits at depth <= radius + v, and
    // each point p on a geodesic between them has |p| <= radius + v, so
    // the enlarged ball contains a true geodesic; conversely values above
    // the margin may be inflated by window truncation.
    let mut distance = vec![vec![0u32; k]; k];
    let mut converged = vec![vec![true; k]; k];
    for a in 0..k {
        for b in 0..a {
            let directed = |from: usize, to: usize| -> u32 {
                members_inner[from].iter().map(|&x| fields[to][x]).max().unwrap_or(u32::MAX)
            };
            let value = directed(a, b).max(directed(b, a));
            distance[a][b] = value;
            distance[b][a] = value;
            let ok = value <= p.margin;
            converged[a][b] = ok;
            converged[b][a] = ok;
        }
    }

    let class_labels: Vec<String> =
        members_inner.iter().map(|m| big.labels[m[0]].clone()).collect();
    let fibers: Vec<Vec<String>> = members_inner
        .iter()
        .map(|m| m.iter().map(|&i| big.labels[i].clone()).collect())
        .collect();
    let basepoint_class = kept_index[&assignment.class_of[0]];

    Ok(QuotientWindow {
        group: g.name(),
        subgroup: h.words.clone(),
        radius: p.radius,
        margin: p.margin,
        exact_keys: assignment.exact,
        method: assignment.method,
        class_labels,
        fibers,
        basepoint_class,
        distance,
        converged,
        support: QuotientSupport {
            ball: Some(big),
            class_of_raw: assignment.class_of,
            kept_raw_ids,
            members_all,
            members_inner,
        },
    })
}

impl QuotientWindow {
    pub fn class_count(&self) -> usize {
        self.class_labels.len()
    }

    pub fn diameter(&self) -> u32 {
        self.distance.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().flatten().all(|&c| c)
    }

    /// The quotient as a metric window (basepoint = the identity coset).
    pub fn metric_window(&self) -> Result<MetricWindow, WindowError> {
        MetricWindow::from_matrix(
            self.class_labels.clone(),
            self.distance.clone(),
            self.basepoint_class,
        )
    }

    /// Edges between cosets at Hausdorff distance ≤ scale.
    pub fn scale_edges(&self, scale: u32) -> Vec<(usize, usize)> {
        let k = self.class_count();
        let mut out = Vec::new();
        for a in 0..k {
            for b in 0..a {
                if self.distance[a][b] <= scale {
                    out.push((b, a));
                }
            }
        }
        out
    }

    /// Class of a group element, if its coset meets the inner window.
    pub fn class_of_element(&self, x: &GroupElement) -> Option<usize> {
        let ball = self.support.ball.as_ref()?;
        let idx = ball.position(x)?;
        let raw = self.support.class_of_raw[idx];
        self.support.kept_raw_ids.iter().position(|&r| r == raw)
    }
}

/// Windowed Hausdorff distance between the cosets of two elements.
#[derive(Debug, Clone, Serialize)]
pub struct HausdorffEstimate {
    pub left: String,
    pub right: String,
    pub value: u32,
    pub converged: bool,
}

pub fn hausdorff_distance(
    g: &Group,
    h: &Subgroup,
    left: &GroupElement,
    right: &GroupElement,
    p: &QuotientParams,
) -> Result<HausdorffEstimate, CosetError> {
    let qw = quotient_window(g, h, p)?;
    let find = |x: &GroupElement| {
        qw.class_of_element(x)
            .ok_or_else(|| CosetError::NotInWindow(g.label(x), p.radius))
    };
    let (a, b) = (find(left)?, find(right)?);
    Ok(HausdorffEstimate {
        left: g.label(left),
        right: g.label(right),
        value: qw.distance[a][b],
        converged: qw.converged[a][b],
    })
}

/// Exact or window-witnessed bound on a commensuration index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexVerdict {
    ExactFinite { index: u128 },
    ExactInfinite,
    /// Count of distinct (H ∩ gHg⁻¹)-cosets met by H ∩ Ball(radius).
    NoBoundUpToRadius { lower_bound: u64, radius: u32 },
}

impl IndexVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, IndexVerdict::ExactFinite { .. })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommensurationCertificate {
    pub conjugator: String,
    /// [H : H ∩ gHg⁻¹]
    pub forward: IndexVerdict,
    /// [H : H ∩ g⁻¹Hg]
    pub backward: IndexVerdict,
    pub note: String,
}

impl CommensurationCertificate {
    pub fn is_finite(&self) -> bool {
        self.forward.is_finite() && self.backward.is_finite()
    }
}

/// Certificate for one conjugator. Exact where the catalog pair allows it;
/// otherwise an orbit count inside Ball(radius) serves as a lower bound.
pub fn commensuration_witness(
    g: &Group,
    h: &Subgroup,
    conj: &GroupElement,
    radius: u32,
    budget: usize,
) -> Result<CommensurationCertificate, CosetError> {
    let oracle = CosetOracle::build(g, h);
    let label = g.label(conj);
    match (g, &oracle.strategy) {
        (Group::Abelian(_), _) => Ok(CommensurationCertificate {
            conjugator: label,
            forward: IndexVerdict::ExactFinite { index: 1 },
            backward: IndexVerdict::ExactFinite { index: 1 },
            note: "abelian group: every subgroup is normal".into(),
        }),
        (Group::Free(fg), KeyStrategy::FreeCyclic { w }) => {
            let u = fg.mul(&fg.mul(unwrap_free(conj), w), &fg.inv(unwrap_free(conj)));
            if fg.mul(&u, w) == fg.mul(w, &u) {
                // Commuting elements of a free group are powers of a common
                // primitive root; the intersection index follows from the
                // two exponents.
                let root = primitive_root(fg, w);
                let p = (w.len() / root.len()) as u128;
                let q = (u.len() / root.len()) as u128;
                let l = num_integer::lcm(p, q);
                Ok(CommensurationCertificate {
                    conjugator: label,
                    forward: IndexVerdict::ExactFinite { index: l / p },
                    backward: IndexVerdict::ExactFinite { index: l / p },
                    note: "conjugate commutes with the generator".into(),
                })
            } else {
                // Non-commuting elements of a free group share no common
                // power, so the intersection is trivial. Attach the orbit
                // count as the window-scale evidence.
                let bound = orbit_count(g, h, &oracle, conj, radius, budget)?;
                Ok(CommensurationCertificate {
                    conjugator: label,
                    forward: IndexVerdict::ExactInfinite,
                    backward: IndexVerdict::ExactInfinite,
                    note: format!(
                        "conjugated generator does not commute with the generator; \
                         {bound} orbits already distinct in Ball({radius})"
                    ),
                })
            }
        }
        (Group::Bs(bs), KeyStrategy::BsAffine { .. }) => {
            let (_, n) = bs.params();
            let k = unwrap_bs(conj).t_exponent();
            let idx = |e: i64| -> IndexVerdict {
                IndexVerdict::ExactFinite { index: (n.unsigned_abs() as u128).pow(e.max(0) as u32) }
            };
            Ok(CommensurationCertificate {
                conjugator: label,
                forward: idx(k),
                backward: idx(-k),
                note: format!("affine computation: index |n|^max(k,0) with k = {k}"),
            })
        }
        (Group::Triangle(_), KeyStrategy::TriLine { d }) => {
            let x = unwrap_tri(conj);
            let dir = if x.refl { d.conj() } else { *d }.rot(x.rot);
            let det = (d.x as i128) * (dir.y as i128) - (d.y as i128) * (dir.x as i128);
            if det == 0 {
                Ok(CommensurationCertificate {
                    conjugator: label,
                    forward: IndexVerdict::ExactFinite { index: 1 },
                    backward: IndexVerdict::ExactFinite { index: 1 },
                    note: "conjugation preserves the translation line".into(),
                })
            } else {
                Ok(CommensurationCertificate {
                    conjugator: label,
                    forward: IndexVerdict::ExactInfinite,
                    backward: IndexVerdict::ExactInfinite,
                    note: format!(
                        "conjugation turns the translation direction to ({},{}); \
                         two independent directions meet only at the identity",
                        dir.x, dir.y
                    ),
                })
            }
        }
        (Group::Direct(dp), KeyStrategy::DirectFactor { right, .. }) => {
            // (l,r)·(h,e)·(l,r)⁻¹ = (l h l⁻¹, e): only the same-side
            // component of the conjugator acts, so the indices are the
            // factor indices for that component.
            let (cl, cr) = dp.split(conj);
            let own = if *right { cr } else { cl };
            let factor = if *right { &dp.right } else { &dp.left };
            let (_, fsub) =
                direct_factor_subgroup(dp, h).expect("strategy implies a factor subgroup");
            if *own == factor.identity() {
                Ok(CommensurationCertificate {
                    conjugator: label,
                    forward: IndexVerdict::ExactFinite { index: 1 },
                    backward: IndexVerdict::ExactFinite { index: 1 },
                    note: "conjugator component in the subgroup's factor is trivial; \
                           conjugation fixes the subgroup pointwise"
                        .into(),
                })
            } else {
                let cert = commensuration_witness(factor, &fsub, own, radius, budget)?;
                Ok(CommensurationCertificate {
                    conjugator: label,
                    forward: cert.forward,
                    backward: cert.backward,
                    note: format!("reduced to the factor: {}", cert.note),
                })
            }
        }
        (Group::FreeProd(fp), KeyStrategy::FreeFactor { right, .. }) => {
            let syl = match conj {
                GroupElement::Alt(s) => s.as_slice(),
                _ => unreachable!("free-product conjugator"),
            };
            let in_factor = match syl {
                [] => Some(if *right { fp.right.identity() } else { fp.left.identity() }),
                [(side, x)] if side == right => Some(x.clone()),
                _ => None,
            };
            let factor = if *right { &fp.right } else { &fp.left };
            match in_factor {
                Some(own) => {
                    let (_, fsub) =
                        free_factor_subgroup(fp, h).expect("strategy implies a factor subgroup");
                    if own == factor.identity() {
                        Ok(CommensurationCertificate {
                            conjugator: label,
                            forward: IndexVerdict::ExactFinite { index: 1 },
                            backward: IndexVerdict::ExactFinite { index: 1 },
                            note: "conjugator lies in the subgroup's factor and is trivial"
                                .into(),
                        })
                    } else {
                        let cert = commensuration_witness(factor, &fsub, &own, radius, budget)?;
                        Ok(CommensurationCertificate {
                            conjugator: label,
                            forward: cert.forward,
                            backward: cert.backward,
                            note: format!("reduced to the factor: {}", cert.note),
                        })
                    }
                }
                None => {
                    // Factors of free products are malnormal: stripping the
                    // leading same-side syllable of the conjugator reduces
                    // g⁻¹xg ∈ factor to the case where the reduced word
                    // g⁻¹xg keeps ≥ 3 syllables, so the intersection with
                    // the subgroup is trivial; the subgroup is infinite
                    // because its exact factor form is an infinite cyclic
                    // or lattice subgroup.
                    Ok(CommensurationCertificate {
                        conjugator: label,
                        forward: IndexVerdict::ExactInfinite,
                        backward: IndexVerdict::ExactInfinite,
                        note: "conjugator leaves the subgroup's free factor; factor \
                               malnormality makes the intersection trivial"
                            .into(),
                    })
                }
            }
        }
        _ => {
            let fwd = orbit_count(g, h, &oracle, conj, radius, budget)?;
            let inv = g.inv(conj);
            let bwd = orbit_count(g, h, &oracle, &inv, radius, budget)?;
            Ok(CommensurationCertificate {
                conjugator: label,
                forward: IndexVerdict::NoBoundUpToRadius { lower_bound: fwd, radius },
                backward: IndexVerdict::NoBoundUpToRadius { lower_bound: bwd, radius },
                note: "no exact oracle for this pair; orbit counts are lower bounds".into(),
            })
        }
    }
}

fn unwrap_free(e: &GroupElement) -> &FreeElt {
    match e {
        GroupElement::Free(x) => x,
        _ => panic!("expected a free-group element"),
    }
}

fn unwrap_bs(e: &GroupElement) -> &crate::groups::bs::BsElt {
    match e {
        GroupElement::Bs(x) => x,
        _ => panic!("expected a Baumslag-Solitar element"),
    }
}

fn unwrap_tri(e: &GroupElement) -> &TriangleElt {
    match e {
        GroupElement::Triangle(x) => x,
        _ => panic!("expected a triangle-group element"),
    }
}

/// Shortest word z with w = z^p; exists and is unique in a free group.
fn primitive_root(fg: &crate::groups::free::FreeGroup, w: &FreeElt) -> FreeElt {
    let n = w.len();
    for l in 1..=n {
        if n % l != 0 {
            continue;
        }
        let z = fg.from_letters(&w.letters()[..l]);
        if pow(fg, &z, (n / l) as i64) == *w {
            return z;
        }
    }
    w.clone()
}

/// Counts distinct left (H ∩ gHg⁻¹)-cosets met by H ∩ Ball(radius):
/// x, y ∈ H lie in the same one iff g⁻¹xg and g⁻¹yg share an H-coset.
fn orbit_count(
    g: &Group,
    h: &Subgroup,
    oracle: &CosetOracle,
    conj: &GroupElement,
    radius: u32,
    budget: usize,
) -> Result<u64, CosetError> {
    let b = ball(g, radius, budget)?;
    let ginv = g.inv(conj);
    // Membership in H: exact key when available, window class otherwise.
    let assignment = assign_cosets(g, &b, h, oracle);
    let id_class = assignment.class_of[0];
    let mut keys = std::collections::BTreeSet::new();
    for i in 0..b.len() {
        if assignment.class_of[i] != id_class {
            continue;
        }
        let moved = g.mul(&g.mul(&ginv, &b.elements[i]), conj);
        let key = match oracle.key(g, &moved) {
            Some(k) => k,
            None => match b.position(&moved) {
                Some(j) => format!("w:{}", assignment.class_of[j]),
                None => format!("out:{}", g.label(&moved)),
            },
        };
        keys.insert(key);
    }
    Ok(keys.len() as u64)
}
