//! Direct and free products of catalog groups. Elements are pairs of
//! factor normal forms (direct products) or alternating syllable sequences
//! of nontrivial factor elements (free products); both inherit canonicity
//! from the factors, so equality stays a value comparison.

use super::{Group, GroupElement, Marked};

/// Generator lists for a two-factor product: the left factor keeps its
/// names; right-factor names that collide get '2' appended until fresh.
pub(super) fn factor_generator_names(
    left: &Group,
    right: &Group,
) -> (Vec<(String, GroupElement)>, Vec<(String, GroupElement)>) {
    let lgens = left.generators();
    let mut taken: std::collections::BTreeSet<String> =
        lgens.iter().map(|(n, _)| n.clone()).collect();
    let rgens = right
        .generators()
        .into_iter()
        .map(|(mut n, e)| {
            while taken.contains(&n) {
                n.push('2');
            }
            taken.insert(n.clone());
            (n, e)
        })
        .collect();
    (lgens, rgens)
}

#[derive(Debug, Clone)]
pub struct DirectProduct {
    pub left: Box<Group>,
    pub right: Box<Group>,
}

impl DirectProduct {
    pub fn new(left: Group, right: Group) -> Self {
        DirectProduct { left: Box::new(left), right: Box::new(right) }
    }

    pub fn name(&self) -> String {
        format!("direct_product({}, {})", self.left.name(), self.right.name())
    }

    pub fn generators(&self) -> Vec<(String, GroupElement)> {
        let (lgens, rgens) = factor_generator_names(&self.left, &self.right);
        let (lid, rid) = (self.left.identity(), self.right.identity());
        let mut out: Vec<(String, GroupElement)> = lgens
            .into_iter()
            .map(|(n, e)| (n, GroupElement::Pair(Box::new(e), Box::new(rid.clone()))))
            .collect();
        out.extend(
            rgens
                .into_iter()
                .map(|(n, e)| (n, GroupElement::Pair(Box::new(lid.clone()), Box::new(e)))),
        );
        out
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::Pair(Box::new(self.left.identity()), Box::new(self.right.identity()))
    }

    fn parts<'a>(&self, a: &'a GroupElement) -> (&'a GroupElement, &'a GroupElement) {
        match a {
            GroupElement::Pair(l, r) => (l, r),
            other => panic!("element {other:?} does not belong to this direct product"),
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let (al, ar) = self.parts(a);
        let (bl, br) = self.parts(b);
        GroupElement::Pair(
            Box::new(self.left.mul(al, bl)),
            Box::new(self.right.mul(ar, br)),
        )
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        let (al, ar) = self.parts(a);
        GroupElement::Pair(Box::new(self.left.inv(al)), Box::new(self.right.inv(ar)))
    }

    pub fn label(&self, a: &GroupElement) -> String {
        let (al, ar) = self.parts(a);
        format!("({} | {})", self.left.label(al), self.right.label(ar))
    }

    /// The factor components of an element.
    pub fn split<'a>(&self, a: &'a GroupElement) -> (&'a GroupElement, &'a GroupElement) {
        self.parts(a)
    }
}

/// Free product syllable list: `(is_right, factor element)`, no identity
/// entries, strictly alternating sides.
#[derive(Debug, Clone)]
pub struct FreeProduct {
    pub left: Box<Group>,
    pub right: Box<Group>,
}

impl FreeProduct {
    pub fn new(left: Group, right: Group) -> Self {
        FreeProduct { left: Box::new(left), right: Box::new(right) }
    }

    pub fn name(&self) -> String {
        format!("free_product({}, {})", self.left.name(), self.right.name())
    }

    fn factor(&self, is_right: bool) -> &Group {
        if is_right {
            &self.right
        } else {
            &self.left
        }
    }

    fn embed(&self, is_right: bool, x: GroupElement) -> GroupElement {
        if x == self.factor(is_right).identity() {
            GroupElement::Alt(Vec::new())
        } else {
            GroupElement::Alt(vec![(is_right, x)])
        }
    }

    pub fn generators(&self) -> Vec<(String, GroupElement)> {
        let (lgens, rgens) = factor_generator_names(&self.left, &self.right);
        let mut out: Vec<(String, GroupElement)> =
            lgens.into_iter().map(|(n, e)| (n, self.embed(false, e))).collect();
        out.extend(rgens.into_iter().map(|(n, e)| (n, self.embed(true, e))));
        out
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::Alt(Vec::new())
    }

    fn syllables<'a>(&self, a: &'a GroupElement) -> &'a [(bool, GroupElement)] {
        match a {
            GroupElement::Alt(s) => s,
            other => panic!("element {other:?} does not belong to this free product"),
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut out: Vec<(bool, GroupElement)> = self.syllables(a).to_vec();
        for (side, x) in self.syllables(b) {
            match out.last() {
                Some((last_side, _)) if last_side == side => {
                    let (_, lx) = out.pop().expect("nonempty");
                    let merged = self.factor(*side).mul(&lx, x);
                    if merged != self.factor(*side).identity() {
                        out.push((*side, merged));
                    }
                }
                _ => out.push((*side, x.clone())),
            }
        }
        GroupElement::Alt(out)
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        let inverted = self
            .syllables(a)
            .iter()
            .rev()
            .map(|(side, x)| (*side, self.factor(*side).inv(x)))
            .collect();
        GroupElement::Alt(inverted)
    }

    pub fn label(&self, a: &GroupElement) -> String {
        let syl = self.syllables(a);
        if syl.is_empty() {
            return "e".to_string();
        }
        syl.iter()
            .map(|(side, x)| {
                let tag = if *side { "r" } else { "l" };
                format!("{tag}:{}", self.factor(*side).label(x))
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Strips one trailing syllable of the given side, if present: the
    /// canonical representative of the left coset x·(that factor).
    pub fn strip_trailing(&self, a: &GroupElement, is_right: bool) -> GroupElement {
        let syl = self.syllables(a);
        match syl.last() {
            Some((side, _)) if *side == is_right => {
                GroupElement::Alt(syl[..syl.len() - 1].to_vec())
            }
            _ => a.clone(),
        }
    }
}
