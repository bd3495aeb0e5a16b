//! Baumslag–Solitar groups BS(m, n) = ⟨a, t | t a^m t^-1 = a^n⟩ in Britton
//! normal form.
//!
//! An element is a^{e0} t^{s1} a^{e1} ⋯ t^{sk} a^{ek} where every exponent
//! after a t^{+1} lies in [0, |m|) and every exponent after a t^{-1} lies in
//! [0, |n|) — the relation moves whole a^m (resp. a^n) blocks to the left of
//! the t — and no t^{s} a^0 t^{-s} pinch remains. Britton's lemma makes this
//! form unique, and the builder below maintains it on every push, so
//! multiplication is replay. For |m| = 1 the group also acts faithfully by
//! affine maps x ↦ μ^k x + b; the tests replay random words through that
//! model to cross-check the rewriting.

use super::Marked;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Britton normal form. `tail` holds (sign of t, following a-exponent).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BsElt {
    lead: i128,
    tail: Vec<(i8, i128)>,
}

impl BsElt {
    pub fn t_exponent(&self) -> i64 {
        self.tail.iter().map(|&(s, _)| s as i64).sum()
    }

    pub fn syllable_count(&self) -> usize {
        self.tail.len()
    }

    pub fn lead_exponent(&self) -> i128 {
        self.lead
    }
}

#[derive(Debug, Clone)]
pub struct BaumslagSolitar {
    m: i64,
    n: i64,
}

fn checked_add(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect("exponent overflow in Baumslag-Solitar arithmetic")
}

fn checked_mul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect("exponent overflow in Baumslag-Solitar arithmetic")
}

impl BaumslagSolitar {
    pub fn new(m: i64, n: i64) -> Self {
        assert!(m != 0 && n != 0, "BS parameters must be nonzero");
        BaumslagSolitar { m, n }
    }

    pub fn params(&self) -> (i64, i64) {
        (self.m, self.n)
    }

    /// For |m| = 1 the map a ↦ (x ↦ x+1), t ↦ (x ↦ μx) with μ = n/m is a
    /// faithful affine representation; returns μ.
    pub fn affine_multiplier(&self) -> Option<i64> {
        if self.m.abs() == 1 {
            Some(self.m * self.n)
        } else {
            None
        }
    }

    /// Appends a^p, restoring the residue invariant by carrying whole
    /// relation blocks toward the lead.
    fn push_a(&self, w: &mut BsElt, p: i128) {
        if p == 0 {
            return;
        }
        match w.tail.pop() {
            None => w.lead = checked_add(w.lead, p),
            Some((s, e)) => {
                let sum = checked_add(e, p);
                let (modulus, carry_unit) = if s > 0 {
                    (self.m as i128, self.n as i128)
                } else {
                    (self.n as i128, self.m as i128)
                };
                let r = sum.rem_euclid(modulus.abs());
                let q = (sum - r) / modulus;
                if q == 0 {
                    w.tail.push((s, r));
                } else {
                    self.push_a(w, checked_mul(q, carry_unit));
                    self.push_t(w, s);
                    self.push_a(w, r);
                }
            }
        }
    }

    /// Appends t^s, cancelling a t^{-s} a^0 t^{s} pinch if one would form.
    fn push_t(&self, w: &mut BsElt, s: i8) {
        if let Some(&(ls, le)) = w.tail.last() {
            if le == 0 && ls == -s {
                w.tail.pop();
                return;
            }
        }
        w.tail.push((s, 0));
    }

    pub fn a_power(&self, e: i128) -> BsElt {
        BsElt { lead: e, tail: Vec::new() }
    }

    pub fn t_power(&self, e: i64) -> BsElt {
        let s = if e >= 0 { 1i8 } else { -1 };
        let mut w = BsElt::default();
        for _ in 0..e.unsigned_abs() {
            self.push_t(&mut w, s);
        }
        w
    }

    /// True iff the value satisfies every normal-form invariant. The
    /// arithmetic only ever produces canonical values; tests call this to
    /// prove that.
    pub fn is_canonical(&self, w: &BsElt) -> bool {
        for (i, &(s, e)) in w.tail.iter().enumerate() {
            let modulus = if s > 0 { self.m.abs() } else { self.n.abs() } as i128;
            if !(0..modulus).contains(&e) {
                return false;
            }
            if e == 0 {
                if let Some(&(next_s, _)) = w.tail.get(i + 1) {
                    if next_s == -s {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Evaluates the canonical form in the affine model (|m| = 1 only):
    /// returns (translation, t-exponent) with a ↦ (1, 0), t ↦ (0, 1).
    pub fn to_affine(&self, w: &BsElt) -> Option<(BigRational, i64)> {
        let mu = self.affine_multiplier()?;
        let mut x = BigRational::zero();
        let mut k = 0i64;
        let push = |x: &mut BigRational, k: &mut i64, y: BigRational, l: i64| {
            *x += pow_rational(mu, *k) * y;
            *k += l;
        };
        push(&mut x, &mut k, BigRational::from(BigInt::from(w.lead)), 0);
        for &(s, e) in &w.tail {
            push(&mut x, &mut k, BigRational::zero(), s as i64);
            push(&mut x, &mut k, BigRational::from(BigInt::from(e)), 0);
        }
        Some((x, k))
    }
}

pub(crate) fn pow_rational(base: i64, exp: i64) -> BigRational {
    let b = BigRational::from(BigInt::from(base));
    let mut out = BigRational::one();
    for _ in 0..exp.unsigned_abs() {
        out *= &b;
    }
    if exp < 0 {
        out = out.recip();
    }
    out
}

impl Marked for BaumslagSolitar {
    type Elt = BsElt;

    fn name(&self) -> String {
        format!("BS({},{})", self.m, self.n)
    }

    fn generators(&self) -> Vec<(String, BsElt)> {
        vec![("a".into(), self.a_power(1)), ("t".into(), self.t_power(1))]
    }

    fn identity(&self) -> BsElt {
        BsElt::default()
    }

    fn mul(&self, a: &BsElt, b: &BsElt) -> BsElt {
        let mut out = a.clone();
        self.push_a(&mut out, b.lead);
        for &(s, e) in &b.tail {
            self.push_t(&mut out, s);
            self.push_a(&mut out, e);
        }
        out
    }

    fn inv(&self, a: &BsElt) -> BsElt {
        let mut out = BsElt::default();
        for &(s, e) in a.tail.iter().rev() {
            self.push_a(&mut out, -e);
            self.push_t(&mut out, -s);
        }
        self.push_a(&mut out, -a.lead);
        out
    }

    fn label(&self, a: &BsElt) -> String {
        let mut parts: Vec<String> = Vec::new();
        if a.lead != 0 {
            parts.push(render_a(a.lead));
        }
        for &(s, e) in &a.tail {
            parts.push(if s > 0 { "t".into() } else { "t^-1".into() });
            if e != 0 {
                parts.push(render_a(e));
            }
        }
        if parts.is_empty() {
            "e".into()
        } else {
            parts.join("*")
        }
    }
}

fn render_a(e: i128) -> String {
    if e == 1 {
        "a".into()
    } else {
        format!("a^{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{ball, parse_word, pow, word_length, DistanceBound};
    use num_traits::Pow;
    use proptest::prelude::*;

    fn letters_to_elt(g: &BaumslagSolitar, letters: &[i8]) -> BsElt {
        // 1 = a, -1 = a^-1, 2 = t, -2 = t^-1.
        let mut w = g.identity();
        for &l in letters {
            let gen = match l {
                1 => g.a_power(1),
                -1 => g.a_power(-1),
                2 => g.t_power(1),
                -2 => g.t_power(-1),
                _ => unreachable!(),
            };
            w = g.mul(&w, &gen);
        }
        w
    }

    fn letters_to_affine(mu: i64, letters: &[i8]) -> (BigRational, i64) {
        // Independent of the Britton machinery: fold the affine maps
        // directly.
        let mut x = BigRational::zero();
        let mut k = 0i64;
        for &l in letters {
            let (y, dl) = match l {
                1 => (BigRational::one(), 0),
                -1 => (-BigRational::one(), 0),
                2 => (BigRational::zero(), 1),
                -2 => (BigRational::zero(), -1),
                _ => unreachable!(),
            };
            x += pow_rational(mu, k) * y;
            k += dl;
        }
        (x, k)
    }

    #[test]
    fn defining_relation_holds() {
        for (m, n) in [(1, 2), (2, 3), (3, 2), (2, -3), (-2, 5)] {
            let g = BaumslagSolitar::new(m, n);
            let t = g.t_power(1);
            let lhs = g.mul(&g.mul(&t, &g.a_power(m as i128)), &g.inv(&t));
            assert_eq!(lhs, g.a_power(n as i128), "relation failed in BS({m},{n})");
        }
    }

    #[test]
    fn relation_powers_match() {
        let g = BaumslagSolitar::new(1, 2);
        let t = g.t_power(1);
        for k in 0..=8u32 {
            let conj = g.mul(&g.mul(&pow(&g, &t, k as i64), &g.a_power(1)), &pow(&g, &t, -(k as i64)));
            assert_eq!(conj, g.a_power(1 << k), "t^k a t^-k = a^(2^k) failed at k={k}");
        }
    }

    #[test]
    fn distortion_shortens_large_powers() {
        let g = BaumslagSolitar::new(1, 2);
        assert_eq!(
            word_length(&g, &g.a_power(4), 8, 1_000_000).unwrap(),
            DistanceBound::Exact(4)
        );
        assert_eq!(
            word_length(&g, &g.a_power(8), 8, 1_000_000).unwrap(),
            DistanceBound::Exact(6)
        );
    }

    #[test]
    fn small_ball_and_labels() {
        let g = BaumslagSolitar::new(1, 2);
        let b = ball(&g, 1, 100).unwrap();
        assert_eq!(b.len(), 5);
        let w = parse_word(&g, "a^2 t a t^-1").unwrap();
        // a^2 t a t^-1 = a^2 · a^2 = a^4.
        assert_eq!(w, g.a_power(4));
        let v = parse_word(&g, "t a").unwrap();
        // t a = a^2 t by the defining relation; labels use the pushed-left form.
        assert_eq!(v, parse_word(&g, "a^2 t").unwrap());
        assert_eq!(g.label(&v), "a^2*t");
        let back = parse_word(&g, &g.label(&v)).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn pinch_cancels_through_zero_block() {
        let g = BaumslagSolitar::new(2, 3);
        // t a^2 t^-1 a^-3 is the relator; inserting it anywhere is trivial.
        let relator = parse_word(&g, "t a^2 t^-1 a^-3").unwrap();
        assert_eq!(relator, g.identity());
        // A pinch created by interior carries: t a t^-1 · t a t^-1 = t a^2 t^-1 = a^3.
        let half = parse_word(&g, "t a t^-1").unwrap();
        assert_eq!(g.mul(&half, &half), g.a_power(3));
    }

    #[test]
    fn affine_model_agrees_on_words() {
        let g = BaumslagSolitar::new(1, 2);
        let mu = g.affine_multiplier().unwrap();
        let words: Vec<Vec<i8>> = vec![
            vec![],
            vec![1, 2, 1, -2],
            vec![2, 2, 1, -2, -1, -2],
            vec![-1, 2, 1, 1, -2, 1],
            vec![2, -1, 2, 1, -2, -2, 1],
        ];
        for w in words {
            let elt = letters_to_elt(&g, &w);
            let via_nf = g.to_affine(&elt).unwrap();
            let direct = letters_to_affine(mu, &w);
            assert_eq!(via_nf, direct, "affine mismatch for {w:?}");
        }
    }

    #[test]
    fn rational_power_helper() {
        assert_eq!(pow_rational(2, 3), BigRational::from(BigInt::from(8)));
        assert_eq!(
            pow_rational(2, -2),
            BigRational::from(BigInt::from(1)) / BigRational::from(BigInt::from(4))
        );
        assert_eq!(pow_rational(-3, 2), BigRational::from(BigInt::from(9)));
        let direct = BigRational::from(BigInt::from(2)).pow(5i32);
        assert_eq!(pow_rational(2, 5), direct);
    }

    proptest! {
        // Canonical equality must coincide with equality in the faithful
        // affine model, on random word pairs.
        #[test]
        fn canonical_iff_affine_equal(
            u in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1), Just(2), Just(-2)], 0..14),
            v in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1), Just(2), Just(-2)], 0..14),
        ) {
            let g = BaumslagSolitar::new(1, 2);
            let mu = g.affine_multiplier().unwrap();
            let (eu, ev) = (letters_to_elt(&g, &u), letters_to_elt(&g, &v));
            prop_assert!(g.is_canonical(&eu));
            prop_assert!(g.is_canonical(&ev));
            let (au, av) = (letters_to_affine(mu, &u), letters_to_affine(mu, &v));
            prop_assert_eq!(eu == ev, au == av);
        }

        // Inserting the relator t a^m t^-1 a^-n at any position never
        // changes the canonical form.
        #[test]
        fn relator_insertion_is_invisible(
            w in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1), Just(2), Just(-2)], 0..12),
            pos_seed in 0usize..64,
        ) {
            for (m, n) in [(1i64, 2i64), (2, 3), (3, 2), (2, -3)] {
                let g = BaumslagSolitar::new(m, n);
                let mut relator: Vec<i8> = Vec::new();
                relator.push(2);
                for _ in 0..m.unsigned_abs() { relator.push(if m > 0 { 1 } else { -1 }); }
                relator.push(-2);
                for _ in 0..n.unsigned_abs() { relator.push(if n > 0 { -1 } else { 1 }); }

                let pos = pos_seed % (w.len() + 1);
                let mut spliced = w.clone();
                for (off, &l) in relator.iter().enumerate() {
                    spliced.insert(pos + off, l);
                }
                prop_assert_eq!(letters_to_elt(&g, &w), letters_to_elt(&g, &spliced));
            }
        }

        #[test]
        fn group_axioms_bs23(
            u in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1), Just(2), Just(-2)], 0..10),
            v in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1), Just(2), Just(-2)], 0..10),
            w in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1), Just(2), Just(-2)], 0..10),
        ) {
            let g = BaumslagSolitar::new(2, 3);
            let (eu, ev, ew) = (
                letters_to_elt(&g, &u),
                letters_to_elt(&g, &v),
                letters_to_elt(&g, &w),
            );
            prop_assert_eq!(g.mul(&g.mul(&eu, &ev), &ew), g.mul(&eu, &g.mul(&ev, &ew)));
            prop_assert_eq!(g.mul(&eu, &g.inv(&eu)), g.identity());
            prop_assert!(g.is_canonical(&g.mul(&eu, &ev)));
        }
    }
}
