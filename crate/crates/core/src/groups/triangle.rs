//! The (3,3,3) triangle reflection group, realized exactly as isometries of
//! the Eisenstein plane.
//!
//! Points are Eisenstein integers x + yω (ω² + ω + 1 = 0). The three
//! generators are the reflections in the sides of the lattice triangle with
//! vertices 0, 1, 1+ω:
//!   a: z ↦ conj(z)            (side through 0 and 1)
//!   b: z ↦ ω·conj(z)          (side through 0 and 1+ω)
//!   c: z ↦ ω²·conj(z) + (2+ω) (side through 1 and 1+ω)
//! Every element is uniquely ω^rot·conj^refl(z) + t, and that triple is the
//! normal form — equality of isometries is equality of triples, which the
//! tests confirm by evaluating words pointwise on the triangle vertices.

use super::Marked;

/// Eisenstein integer x + yω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Eis {
    pub x: i64,
    pub y: i64,
}

impl Eis {
    pub const ZERO: Eis = Eis { x: 0, y: 0 };

    pub fn new(x: i64, y: i64) -> Self {
        Eis { x, y }
    }

    pub fn add(self, o: Eis) -> Eis {
        Eis { x: self.x + o.x, y: self.y + o.y }
    }

    pub fn neg(self) -> Eis {
        Eis { x: -self.x, y: -self.y }
    }

    pub fn conj(self) -> Eis {
        // conj(x + yω) = (x − y) − yω since conj(ω) = ω².
        Eis { x: self.x - self.y, y: -self.y }
    }

    /// Multiplication by ω: ω(x + yω) = −y + (x − y)ω.
    pub fn rot1(self) -> Eis {
        Eis { x: -self.y, y: self.x - self.y }
    }

    pub fn rot(self, k: u8) -> Eis {
        let mut z = self;
        for _ in 0..k % 3 {
            z = z.rot1();
        }
        z
    }

    /// Full Eisenstein product, used by the subgroup machinery.
    pub fn mul(self, o: Eis) -> Eis {
        // (a + bω)(c + dω) = (ac − bd) + (ad + bc − bd)ω.
        Eis {
            x: self.x * o.x - self.y * o.y,
            y: self.x * o.y + self.y * o.x - self.y * o.y,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Eis::ZERO
    }
}

/// Isometry z ↦ ω^rot · conj^refl(z) + tr.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TriangleElt {
    pub refl: bool,
    pub rot: u8,
    pub tr: Eis,
}

impl TriangleElt {
    pub fn apply(&self, z: Eis) -> Eis {
        let w = if self.refl { z.conj() } else { z };
        w.rot(self.rot).add(self.tr)
    }

    pub fn is_translation(&self) -> bool {
        !self.refl && self.rot == 0
    }
}

#[derive(Debug, Clone, Default)]
pub struct TriangleGroup;

impl TriangleGroup {
    pub fn new() -> Self {
        TriangleGroup
    }

    /// The triangle's vertices; three non-collinear points determine an
    /// isometry, so agreement here is agreement everywhere.
    pub fn probe_points() -> [Eis; 3] {
        [Eis::new(0, 0), Eis::new(1, 0), Eis::new(1, 1)]
    }
}

impl Marked for TriangleGroup {
    type Elt = TriangleElt;

    fn name(&self) -> String {
        "Delta(3,3,3)".into()
    }

    fn generators(&self) -> Vec<(String, TriangleElt)> {
        vec![
            ("a".into(), TriangleElt { refl: true, rot: 0, tr: Eis::ZERO }),
            ("b".into(), TriangleElt { refl: true, rot: 1, tr: Eis::ZERO }),
            ("c".into(), TriangleElt { refl: true, rot: 2, tr: Eis::new(2, 1) }),
        ]
    }

    fn identity(&self) -> TriangleElt {
        TriangleElt::default()
    }

    fn mul(&self, f: &TriangleElt, g: &TriangleElt) -> TriangleElt {
        // (f∘g)(z): push f's linear part through g's.
        let rot = if f.refl {
            (3 + f.rot + 3 - g.rot % 3) % 3
        } else {
            (f.rot + g.rot) % 3
        };
        let g_tr_seen_by_f = if f.refl { g.tr.conj() } else { g.tr };
        TriangleElt {
            refl: f.refl ^ g.refl,
            rot,
            tr: g_tr_seen_by_f.rot(f.rot).add(f.tr),
        }
    }

    fn inv(&self, f: &TriangleElt) -> TriangleElt {
        if f.refl {
            // (ω^p conj(z) + t)^{-1} = ω^p conj(z) − conj(ω^{-p} t).
            let t = f.tr.rot((3 - f.rot % 3) % 3).conj().neg();
            TriangleElt { refl: true, rot: f.rot, tr: t }
        } else {
            let p = (3 - f.rot % 3) % 3;
            TriangleElt { refl: false, rot: p, tr: f.tr.rot(p).neg() }
        }
    }

    fn label(&self, f: &TriangleElt) -> String {
        if *f == self.identity() {
            return "e".into();
        }
        let mirror = if f.refl { "m" } else { "" };
        format!("[w{}{}|{},{}]", f.rot, mirror, f.tr.x, f.tr.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{ball, parse_word, pow};
    use proptest::prelude::*;

    fn gens() -> (TriangleGroup, TriangleElt, TriangleElt, TriangleElt) {
        let g = TriangleGroup::new();
        let v = g.generators();
        (g, v[0].1, v[1].1, v[2].1)
    }

    #[test]
    fn generators_are_involutions() {
        let (g, a, b, c) = gens();
        for r in [a, b, c] {
            assert_eq!(g.mul(&r, &r), g.identity());
        }
    }

    #[test]
    fn pairwise_products_have_order_three() {
        let (g, a, b, c) = gens();
        for (x, y) in [(a, b), (b, c), (c, a)] {
            let p = g.mul(&x, &y);
            assert_ne!(p, g.identity());
            assert_ne!(pow(&g, &p, 2), g.identity());
            assert_eq!(pow(&g, &p, 3), g.identity());
        }
    }

    #[test]
    fn products_fix_the_triangle_vertices() {
        let (g, a, b, c) = gens();
        let [v0, v1, v2] = TriangleGroup::probe_points();
        assert_eq!(g.mul(&a, &b).apply(v0), v0);
        assert_eq!(g.mul(&a, &c).apply(v1), v1);
        assert_eq!(g.mul(&b, &c).apply(v2), v2);
    }

    #[test]
    fn abac_is_a_translation() {
        let g = TriangleGroup::new();
        let w = parse_word(&g, "a b a c").unwrap();
        assert!(w.is_translation());
        // Translation by ω² − 1 = −2 − ω.
        assert_eq!(w.tr, Eis::new(-2, -1));
        // Infinite order: powers scale the translation.
        let w5 = pow(&g, &w, 5);
        assert_eq!(w5.tr, Eis::new(-10, -5));
    }

    #[test]
    fn unit_ball_is_the_three_mirrors() {
        let g = TriangleGroup::new();
        let b = ball(&g, 1, 100).unwrap();
        // Involutions are their own inverses: e, a, b, c.
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn eisenstein_arithmetic() {
        let w = Eis::new(0, 1);
        assert_eq!(w.mul(w), Eis::new(-1, -1)); // ω² = −1 − ω
        assert_eq!(w.mul(w).mul(w), Eis::new(1, 0)); // ω³ = 1
        assert_eq!(w.conj(), Eis::new(-1, -1)); // conj ω = ω²
        assert_eq!(Eis::new(2, 1).rot(3), Eis::new(2, 1));
    }

    fn arb_elt() -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..3, 0..12)
    }

    proptest! {
        // Composing normal forms must agree with composing maps pointwise;
        // three non-collinear probes determine the isometry.
        #[test]
        fn composition_matches_pointwise_action(word in arb_elt()) {
            let g = TriangleGroup::new();
            let gens: Vec<TriangleElt> = g.generators().into_iter().map(|(_, e)| e).collect();
            let mut elt = g.identity();
            for &i in &word {
                elt = g.mul(&elt, &gens[i as usize]);
            }
            for z in TriangleGroup::probe_points() {
                // Apply letters right-to-left, never touching `mul`.
                let mut image = z;
                for &i in word.iter().rev() {
                    image = gens[i as usize].apply(image);
                }
                prop_assert_eq!(elt.apply(z), image);
            }
        }

        #[test]
        fn group_axioms(u in arb_elt(), v in arb_elt()) {
            let g = TriangleGroup::new();
            let gens: Vec<TriangleElt> = g.generators().into_iter().map(|(_, e)| e).collect();
            let fold = |w: &[u8]| {
                let mut e = g.identity();
                for &i in w {
                    e = g.mul(&e, &gens[i as usize]);
                }
                e
            };
            let (eu, ev) = (fold(&u), fold(&v));
            prop_assert_eq!(g.mul(&eu, &g.inv(&eu)), g.identity());
            prop_assert_eq!(g.inv(&g.inv(&eu)), eu);
            let prod = g.mul(&eu, &ev);
            for z in TriangleGroup::probe_points() {
                prop_assert_eq!(prod.apply(z), eu.apply(ev.apply(z)));
            }
        }
    }
}
