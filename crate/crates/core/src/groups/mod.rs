//! Marked groups: finitely generated groups carrying a fixed generating
//! set, with exact normal-form arithmetic per family.
//!
//! Everything downstream (balls, quotient windows, ends) only needs the
//! `Marked` contract: exact multiplication, exact inversion, and an
//! injective canonical form (equality of elements is equality of values).
//! Each family's normal form is cross-checked in its own module against an
//! independent model — free reduction fixpoints, affine actions, point
//! evaluation — so a bug in one path shows up as a disagreement, not as a
//! silently wrong ball.

pub mod abelian;
pub mod bs;
pub mod free;
pub mod product;
pub mod triangle;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

use crate::window::{GraphWindow, WindowError, WindowSource};

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("unknown generator {0:?} in word")]
    UnknownGenerator(String),
    #[error("could not parse word token {0:?} (expected name or name^exp)")]
    BadToken(String),
    #[error("exponent {0} exceeds the supported range")]
    ExponentTooLarge(i64),
    #[error("rank {0} out of range (1..={1})")]
    RankOutOfRange(usize, usize),
    #[error("Baumslag-Solitar parameters must be nonzero with |m|,|n| <= {0}")]
    BadBsParameters(i64),
    #[error("product descriptions may combine at most {0} base groups")]
    TooManyFactors(usize),
    #[error("ball of radius {radius} needs more than the budget of {budget} elements")]
    BudgetExceeded { radius: u32, budget: usize },
    #[error(transparent)]
    Window(#[from] WindowError),
}

/// A group with a fixed finite marking. `Elt` is a canonical form: two
/// elements are equal in the group iff the values are equal.
pub trait Marked {
    type Elt: Clone + Eq + Ord + std::fmt::Debug;

    fn name(&self) -> String;
    /// The marking, without inverses; ball search closes it under inversion.
    fn generators(&self) -> Vec<(String, Self::Elt)>;
    fn identity(&self) -> Self::Elt;
    fn mul(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn inv(&self, a: &Self::Elt) -> Self::Elt;
    fn label(&self, a: &Self::Elt) -> String;
}

pub fn pow<G: Marked>(g: &G, x: &G::Elt, e: i64) -> G::Elt {
    let base = if e < 0 { g.inv(x) } else { x.clone() };
    let mut out = g.identity();
    for _ in 0..e.unsigned_abs() {
        out = g.mul(&out, &base);
    }
    out
}

/// The marking closed under inverses, with involutions listed once.
pub fn symmetric_generators<G: Marked>(g: &G) -> Vec<(String, G::Elt)> {
    let mut out: Vec<(String, G::Elt)> = Vec::new();
    let mut seen: BTreeSet<G::Elt> = BTreeSet::new();
    for (name, e) in g.generators() {
        if seen.insert(e.clone()) {
            out.push((name.clone(), e.clone()));
        }
        let i = g.inv(&e);
        if seen.insert(i.clone()) {
            out.push((format!("{name}^-1"), i));
        }
    }
    out
}

/// Word-metric ball, produced by layered search from the identity.
/// `elements` is depth-major and canonically ordered within each layer, so
/// the indexing is deterministic. `edges` connects elements at distance 1.
#[derive(Debug, Clone)]
pub struct Ball<E: Ord> {
    pub radius: u32,
    pub elements: Vec<E>,
    pub labels: Vec<String>,
    pub depths: Vec<u32>,
    pub index: BTreeMap<E, usize>,
    pub edges: Vec<(usize, usize)>,
}

impl<E: Ord> Ball<E> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, e: &E) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// BFS ball of the given radius. Fails once more than `budget` elements
/// would have to be stored.
pub fn ball<G: Marked>(g: &G, radius: u32, budget: usize) -> Result<Ball<G::Elt>, GroupError> {
    let gens = symmetric_generators(g);
    let mut index: BTreeMap<G::Elt, usize> = BTreeMap::new();
    let mut elements: Vec<G::Elt> = Vec::new();
    let mut depths: Vec<u32> = Vec::new();

    let id = g.identity();
    index.insert(id.clone(), 0);
    elements.push(id);
    depths.push(0);

    let mut frontier: Vec<G::Elt> = vec![elements[0].clone()];
    for depth in 1..=radius {
        let mut layer: BTreeSet<G::Elt> = BTreeSet::new();
        for x in &frontier {
            for (_, s) in &gens {
                let y = g.mul(x, s);
                if !index.contains_key(&y) {
                    layer.insert(y);
                }
            }
        }
        if elements.len() + layer.len() > budget {
            return Err(GroupError::BudgetExceeded { radius, budget });
        }
        frontier = Vec::with_capacity(layer.len());
        for y in layer {
            index.insert(y.clone(), elements.len());
            elements.push(y.clone());
            depths.push(depth);
            frontier.push(y);
        }
        if frontier.is_empty() {
            break;
        }
    }

    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, x) in elements.iter().enumerate() {
        for (_, s) in &gens {
            let y = g.mul(x, s);
            if let Some(&j) = index.get(&y) {
                if i != j {
                    edge_set.insert((i.min(j), i.max(j)));
                }
            }
        }
    }

    let labels = elements.iter().map(|e| g.label(e)).collect();
    Ok(Ball { radius, elements, labels, depths, index, edges: edge_set.into_iter().collect() })
}

/// Outcome of a bounded word-length computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DistanceBound {
    Exact(u32),
    MoreThan(u32),
}

/// Word length of `x`, searched out to `cap`. Answers `MoreThan(cap)` when
/// the ball of radius `cap` does not contain `x`.
pub fn word_length<G: Marked>(
    g: &G,
    x: &G::Elt,
    cap: u32,
    budget: usize,
) -> Result<DistanceBound, GroupError> {
    if *x == g.identity() {
        return Ok(DistanceBound::Exact(0));
    }
    let gens = symmetric_generators(g);
    let mut seen: BTreeSet<G::Elt> = BTreeSet::new();
    seen.insert(g.identity());
    let mut frontier = vec![g.identity()];
    for depth in 1..=cap {
        let mut next = Vec::new();
        for v in &frontier {
            for (_, s) in &gens {
                let y = g.mul(v, s);
                if y == *x {
                    return Ok(DistanceBound::Exact(depth));
                }
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
            if seen.len() > budget {
                return Err(GroupError::BudgetExceeded { radius: cap, budget });
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(DistanceBound::MoreThan(cap))
}

/// Parses words like `"a b^-1 t^3"` (separators: whitespace or `*`) against
/// the group's marking. `e` and `1` denote the identity.
pub fn parse_word<G: Marked>(g: &G, word: &str) -> Result<G::Elt, GroupError> {
    const MAX_EXP: i64 = 1 << 40;
    let by_name: BTreeMap<String, G::Elt> = g.generators().into_iter().collect();
    let mut out = g.identity();
    for token in word.split(|c: char| c.is_whitespace() || c == '*') {
        if token.is_empty() || token == "e" || token == "1" {
            continue;
        }
        let (name, exp) = match token.split_once('^') {
            None => (token, 1i64),
            Some((n, e)) => {
                let exp: i64 = e.parse().map_err(|_| GroupError::BadToken(token.into()))?;
                (n, exp)
            }
        };
        if name.is_empty() {
            return Err(GroupError::BadToken(token.into()));
        }
        let base = by_name
            .get(name)
            .ok_or_else(|| GroupError::UnknownGenerator(name.into()))?;
        if exp.abs() > MAX_EXP {
            return Err(GroupError::ExponentTooLarge(exp));
        }
        out = g.mul(&out, &pow(g, base, exp));
    }
    Ok(out)
}

/// Serializable description of a marked group; the CLI's group grammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroupSpec {
    /// Free group of the given rank with basis marking.
    Free { rank: usize },
    /// Z^rank with standard basis marking.
    FreeAbelian { rank: usize },
    /// ⟨a, t | t a^m t^-1 = a^n⟩.
    BaumslagSolitar { m: i64, n: i64 },
    /// The (3,3,3) triangle reflection group on the Eisenstein plane.
    Triangle,
    /// G1 x G2 with the union-of-factor-markings generating set.
    DirectProduct { left: Box<GroupSpec>, right: Box<GroupSpec> },
    /// G1 * G2 with the union-of-factor-markings generating set.
    FreeProduct { left: Box<GroupSpec>, right: Box<GroupSpec> },
}

const MAX_RANK: usize = 4;
const MAX_BS_PARAM: i64 = 12;
const MAX_FACTORS: usize = 4;

impl GroupSpec {
    /// Number of base (non-product) groups in the description.
    fn leaf_count(&self) -> usize {
        match self {
            GroupSpec::DirectProduct { left, right } | GroupSpec::FreeProduct { left, right } => {
                left.leaf_count() + right.leaf_count()
            }
            _ => 1,
        }
    }

    pub fn build(&self) -> Result<Group, GroupError> {
        if self.leaf_count() > MAX_FACTORS {
            return Err(GroupError::TooManyFactors(MAX_FACTORS));
        }
        self.build_unchecked()
    }

    fn build_unchecked(&self) -> Result<Group, GroupError> {
        match self {
            GroupSpec::Free { rank } => {
                let rank = *rank;
                if rank == 0 || rank > MAX_RANK {
                    return Err(GroupError::RankOutOfRange(rank, MAX_RANK));
                }
                Ok(Group::Free(free::FreeGroup::new(rank)))
            }
            GroupSpec::FreeAbelian { rank } => {
                let rank = *rank;
                if rank == 0 || rank > MAX_RANK {
                    return Err(GroupError::RankOutOfRange(rank, MAX_RANK));
                }
                Ok(Group::Abelian(abelian::FreeAbelian::new(rank)))
            }
            GroupSpec::BaumslagSolitar { m, n } => {
                let (m, n) = (*m, *n);
                if m == 0 || n == 0 || m.abs() > MAX_BS_PARAM || n.abs() > MAX_BS_PARAM {
                    return Err(GroupError::BadBsParameters(MAX_BS_PARAM));
                }
                Ok(Group::Bs(bs::BaumslagSolitar::new(m, n)))
            }
            GroupSpec::Triangle => Ok(Group::Triangle(triangle::TriangleGroup::new())),
            GroupSpec::DirectProduct { left, right } => Ok(Group::Direct(
                product::DirectProduct::new(left.build_unchecked()?, right.build_unchecked()?),
            )),
            GroupSpec::FreeProduct { left, right } => Ok(Group::FreeProd(
                product::FreeProduct::new(left.build_unchecked()?, right.build_unchecked()?),
            )),
        }
    }
}

/// Element of whichever family a `Group` wraps. Mixing elements across
/// groups is a programming error and panics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupElement {
    Free(free::FreeElt),
    Abelian(abelian::AbelianElt),
    Bs(bs::BsElt),
    Triangle(triangle::TriangleElt),
    /// Direct-product element: one canonical form per factor.
    Pair(Box<GroupElement>, Box<GroupElement>),
    /// Free-product element: alternating nontrivial factor syllables,
    /// tagged `true` for the right factor.
    Alt(Vec<(bool, GroupElement)>),
}

/// A marked group from the built-in zoo, behind one concrete type.
#[derive(Debug, Clone)]
pub enum Group {
    Free(free::FreeGroup),
    Abelian(abelian::FreeAbelian),
    Bs(bs::BaumslagSolitar),
    Triangle(triangle::TriangleGroup),
    Direct(product::DirectProduct),
    FreeProd(product::FreeProduct),
}

macro_rules! unwrap_elt {
    ($variant:ident, $e:expr) => {
        match $e {
            GroupElement::$variant(inner) => inner,
            other => panic!("element {other:?} does not belong to this group"),
        }
    };
}

impl Marked for Group {
    type Elt = GroupElement;

    fn name(&self) -> String {
        match self {
            Group::Free(g) => g.name(),
            Group::Abelian(g) => g.name(),
            Group::Bs(g) => g.name(),
            Group::Triangle(g) => g.name(),
            Group::Direct(g) => g.name(),
            Group::FreeProd(g) => g.name(),
        }
    }

    fn generators(&self) -> Vec<(String, GroupElement)> {
        match self {
            Group::Free(g) => g
                .generators()
                .into_iter()
                .map(|(n, e)| (n, GroupElement::Free(e)))
                .collect(),
            Group::Abelian(g) => g
                .generators()
                .into_iter()
                .map(|(n, e)| (n, GroupElement::Abelian(e)))
                .collect(),
            Group::Bs(g) => g
                .generators()
                .into_iter()
                .map(|(n, e)| (n, GroupElement::Bs(e)))
                .collect(),
            Group::Triangle(g) => g
                .generators()
                .into_iter()
                .map(|(n, e)| (n, GroupElement::Triangle(e)))
                .collect(),
            Group::Direct(g) => g.generators(),
            Group::FreeProd(g) => g.generators(),
        }
    }

    fn identity(&self) -> GroupElement {
        match self {
            Group::Free(g) => GroupElement::Free(g.identity()),
            Group::Abelian(g) => GroupElement::Abelian(g.identity()),
            Group::Bs(g) => GroupElement::Bs(g.identity()),
            Group::Triangle(g) => GroupElement::Triangle(g.identity()),
            Group::Direct(g) => g.identity(),
            Group::FreeProd(g) => g.identity(),
        }
    }

    fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match self {
            Group::Free(g) => {
                GroupElement::Free(g.mul(unwrap_elt!(Free, a), unwrap_elt!(Free, b)))
            }
            Group::Abelian(g) => {
                GroupElement::Abelian(g.mul(unwrap_elt!(Abelian, a), unwrap_elt!(Abelian, b)))
            }
            Group::Bs(g) => GroupElement::Bs(g.mul(unwrap_elt!(Bs, a), unwrap_elt!(Bs, b))),
            Group::Triangle(g) => {
                GroupElement::Triangle(g.mul(unwrap_elt!(Triangle, a), unwrap_elt!(Triangle, b)))
            }
            Group::Direct(g) => g.mul(a, b),
            Group::FreeProd(g) => g.mul(a, b),
        }
    }

    fn inv(&self, a: &GroupElement) -> GroupElement {
        match self {
            Group::Free(g) => GroupElement::Free(g.inv(unwrap_elt!(Free, a))),
            Group::Abelian(g) => GroupElement::Abelian(g.inv(unwrap_elt!(Abelian, a))),
            Group::Bs(g) => GroupElement::Bs(g.inv(unwrap_elt!(Bs, a))),
            Group::Triangle(g) => GroupElement::Triangle(g.inv(unwrap_elt!(Triangle, a))),
            Group::Direct(g) => g.inv(a),
            Group::FreeProd(g) => g.inv(a),
        }
    }

    fn label(&self, a: &GroupElement) -> String {
        match self {
            Group::Free(g) => g.label(unwrap_elt!(Free, a)),
            Group::Abelian(g) => g.label(unwrap_elt!(Abelian, a)),
            Group::Bs(g) => g.label(unwrap_elt!(Bs, a)),
            Group::Triangle(g) => g.label(unwrap_elt!(Triangle, a)),
            Group::Direct(g) => g.label(a),
            Group::FreeProd(g) => g.label(a),
        }
    }
}

impl Group {
    /// Cayley-graph window on the ball of the given radius.
    pub fn ball_window(
        &self,
        radius: u32,
        budget: usize,
        boundary_margin: Option<u32>,
    ) -> Result<GraphWindow, GroupError> {
        let b = ball(self, radius, budget)?;
        let w = GraphWindow::new(b.labels.clone(), &b.edges, 0, WindowSource::Ball, boundary_margin)?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_ball_sizes() {
        // |B_R| = 2·3^R − 1 in rank 2.
        let g = GroupSpec::Free { rank: 2 }.build().unwrap();
        let b1 = ball(&g, 1, 10_000).unwrap();
        assert_eq!(b1.len(), 5);
        let b2 = ball(&g, 2, 10_000).unwrap();
        assert_eq!(b2.len(), 17);
        let b3 = ball(&g, 3, 10_000).unwrap();
        assert_eq!(b3.len(), 53);
    }

    #[test]
    fn abelian_ball_is_l1_ball() {
        // |B_R(Z^2)| = 2R^2 + 2R + 1.
        let g = GroupSpec::FreeAbelian { rank: 2 }.build().unwrap();
        let b = ball(&g, 3, 10_000).unwrap();
        assert_eq!(b.len(), 25);
        assert_eq!(b.depths.iter().filter(|&&d| d == 3).count(), 12);
    }

    #[test]
    fn ball_budget_is_enforced() {
        let g = GroupSpec::Free { rank: 2 }.build().unwrap();
        let err = ball(&g, 5, 100).unwrap_err();
        assert!(matches!(err, GroupError::BudgetExceeded { .. }));
    }

    #[test]
    fn word_parsing_and_length() {
        let g = GroupSpec::Free { rank: 2 }.build().unwrap();
        let w = parse_word(&g, "a b^-1 a^2").unwrap();
        assert_eq!(
            word_length(&g, &w, 6, 100_000).unwrap(),
            DistanceBound::Exact(4)
        );
        let id = parse_word(&g, "a a^-1").unwrap();
        assert_eq!(id, g.identity());
        assert_eq!(
            word_length(&g, &g.identity(), 3, 1000).unwrap(),
            DistanceBound::Exact(0)
        );
        let far = parse_word(&g, "a^9").unwrap();
        assert_eq!(
            word_length(&g, &far, 4, 100_000).unwrap(),
            DistanceBound::MoreThan(4)
        );
    }

    #[test]
    fn parse_rejects_bad_tokens() {
        let g = GroupSpec::Free { rank: 2 }.build().unwrap();
        assert!(matches!(
            parse_word(&g, "q"),
            Err(GroupError::UnknownGenerator(_))
        ));
        assert!(matches!(parse_word(&g, "a^x"), Err(GroupError::BadToken(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(GroupSpec::Free { rank: 0 }.build().is_err());
        assert!(GroupSpec::Free { rank: 9 }.build().is_err());
        assert!(GroupSpec::BaumslagSolitar { m: 0, n: 2 }.build().is_err());
        assert!(GroupSpec::BaumslagSolitar { m: 1, n: 2 }.build().is_ok());
    }

    #[test]
    fn ball_window_has_cayley_metric() {
        let g = GroupSpec::FreeAbelian { rank: 1 }.build().unwrap();
        let w = g.ball_window(4, 1000, Some(1)).unwrap();
        assert_eq!(w.labels.len(), 9);
        let m = w.metric_window();
        // Endpoints of the interval are 8 apart.
        let far = (0..m.n())
            .flat_map(|i| (0..m.n()).map(move |j| (i, j)))
            .map(|(i, j)| m.dist(i, j))
            .max()
            .unwrap();
        assert_eq!(far, 8);
    }
}
