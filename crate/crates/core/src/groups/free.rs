//! Free groups in reduced-word normal form.
//!
//! Letters are nonzero integers: ±1, ±2, … index the basis and its
//! inverses. A word is canonical iff no adjacent pair cancels; reduction is
//! confluent, so the form is unique and equality is word equality.

use super::Marked;

/// Reduced word; empty means the identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FreeElt {
    letters: Vec<i16>,
}

impl FreeElt {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[i16] {
        &self.letters
    }
}

#[derive(Debug, Clone)]
pub struct FreeGroup {
    rank: usize,
}

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

impl FreeGroup {
    pub fn new(rank: usize) -> Self {
        assert!((1..=NAMES.len()).contains(&rank), "rank out of range");
        FreeGroup { rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn push_reduced(out: &mut Vec<i16>, letter: i16) {
        if out.last() == Some(&-letter) {
            out.pop();
        } else {
            out.push(letter);
        }
    }

    pub fn from_letters(&self, letters: &[i16]) -> FreeElt {
        let mut out = Vec::with_capacity(letters.len());
        for &l in letters {
            assert!(l != 0 && (l.unsigned_abs() as usize) <= self.rank, "letter out of range");
            Self::push_reduced(&mut out, l);
        }
        FreeElt { letters: out }
    }
}

impl Marked for FreeGroup {
    type Elt = FreeElt;

    fn name(&self) -> String {
        format!("F{}", self.rank)
    }

    fn generators(&self) -> Vec<(String, FreeElt)> {
        (0..self.rank)
            .map(|i| (NAMES[i].to_string(), FreeElt { letters: vec![i as i16 + 1] }))
            .collect()
    }

    fn identity(&self) -> FreeElt {
        FreeElt::default()
    }

    fn mul(&self, a: &FreeElt, b: &FreeElt) -> FreeElt {
        let mut out = a.letters.clone();
        for &l in &b.letters {
            Self::push_reduced(&mut out, l);
        }
        FreeElt { letters: out }
    }

    fn inv(&self, a: &FreeElt) -> FreeElt {
        FreeElt { letters: a.letters.iter().rev().map(|&l| -l).collect() }
    }

    fn label(&self, a: &FreeElt) -> String {
        if a.letters.is_empty() {
            return "e".into();
        }
        // Run-length encode: a a a b^-1 -> a^3*b^-1.
        let mut parts: Vec<String> = Vec::new();
        let mut run_letter = a.letters[0];
        let mut run_len = 0i64;
        for &l in &a.letters {
            if l == run_letter {
                run_len += 1;
            } else {
                parts.push(render_run(run_letter, run_len));
                run_letter = l;
                run_len = 1;
            }
        }
        parts.push(render_run(run_letter, run_len));
        parts.join("*")
    }
}

fn render_run(letter: i16, len: i64) -> String {
    let name = NAMES[(letter.unsigned_abs() as usize) - 1];
    let exp = if letter < 0 { -len } else { len };
    if exp == 1 {
        name.to_string()
    } else {
        format!("{name}^{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{parse_word, pow};
    use proptest::prelude::*;

    #[test]
    fn reduction_cancels() {
        let g = FreeGroup::new(2);
        let w = g.from_letters(&[1, 2, -2, -1, 1]);
        assert_eq!(w.letters(), &[1]);
        let u = g.from_letters(&[1, 2]);
        assert_eq!(g.mul(&u, &g.inv(&u)), g.identity());
    }

    #[test]
    fn labels_run_length_encode() {
        let g = FreeGroup::new(2);
        let w = g.from_letters(&[1, 1, 1, -2]);
        assert_eq!(g.label(&w), "a^3*b^-1");
        assert_eq!(g.label(&g.identity()), "e");
        let p = pow(&g, &g.from_letters(&[2]), -2);
        assert_eq!(g.label(&p), "b^-2");
    }

    #[test]
    fn parse_round_trips_labels() {
        let g = FreeGroup::new(3);
        let w = g.from_letters(&[1, 1, -3, 2, 2, 2]);
        let back = parse_word(&g, &g.label(&w)).unwrap();
        assert_eq!(back, w);
    }

    proptest! {
        // Reduction is a left action: reduce(uv) == reduce(u)·reduce(v),
        // checked against a slow fixpoint reducer.
        #[test]
        fn reduction_matches_fixpoint(letters in proptest::collection::vec(-2i16..=2, 0..40)) {
            let g = FreeGroup::new(2);
            let letters: Vec<i16> = letters.into_iter().filter(|&l| l != 0).collect();
            let fast = g.from_letters(&letters);

            // Oracle: scan for an adjacent cancelling pair, remove it,
            // repeat until none remains.
            let mut slow = letters.clone();
            loop {
                let mut cancelled = false;
                for i in 0..slow.len().saturating_sub(1) {
                    if slow[i] == -slow[i + 1] {
                        slow.drain(i..=i + 1);
                        cancelled = true;
                        break;
                    }
                }
                if !cancelled {
                    break;
                }
            }
            prop_assert_eq!(fast.letters(), &slow[..]);
        }

        #[test]
        fn group_axioms(
            u in proptest::collection::vec((-2i16..=2).prop_filter("nonzero", |&l| l != 0), 0..12),
            v in proptest::collection::vec((-2i16..=2).prop_filter("nonzero", |&l| l != 0), 0..12),
            w in proptest::collection::vec((-2i16..=2).prop_filter("nonzero", |&l| l != 0), 0..12),
        ) {
            let g = FreeGroup::new(2);
            let (u, v, w) = (g.from_letters(&u), g.from_letters(&v), g.from_letters(&w));
            prop_assert_eq!(g.mul(&g.mul(&u, &v), &w), g.mul(&u, &g.mul(&v, &w)));
            prop_assert_eq!(g.mul(&u, &g.inv(&u)), g.identity());
            prop_assert_eq!(g.inv(&g.inv(&u)), u);
        }
    }
}
