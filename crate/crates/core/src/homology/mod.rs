//! Homology over a PID: ℤ via Smith normal form, fields via exact rank.
//!
//! Homology groups are held in canonical invariant-factor form (free rank
//! plus a divisibility chain), so "isomorphic" is literal equality. The
//! Künneth and universal-coefficient checks compare both ends of their
//! exact sequences degree by degree in that normal form; since both
//! sequences split, invariant-factor equality is the right test.

pub mod family;
pub mod snf;

use crate::complexes::{compact_dual, tensor_product, ChainComplex, CochainComplex, ComplexError};
use crate::matrix::SparseIntMatrix;
use crate::ring::{RingError, RingSpec};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use snf::{smith_normal_form, SnfError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HomologyError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Snf(#[from] SnfError),
}

/// Finitely generated module over the active PID in normal form:
/// R^free_rank ⊕ R/d₁ ⊕ ⋯ ⊕ R/dₙ with d₁ | d₂ | ⋯, all dᵢ > 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub free_rank: usize,
    #[serde(serialize_with = "serialize_torsion")]
    pub torsion: Vec<BigUint>,
}

fn serialize_torsion<S: serde::Serializer>(t: &Vec<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(t.iter().map(|d| d.to_string()))
}

impl HomologyGroup {
    pub fn free(rank: usize) -> Self {
        HomologyGroup { free_rank: rank, torsion: Vec::new() }
    }

    pub fn zero() -> Self {
        Self::free(0)
    }

    /// Canonicalizes an arbitrary multiset of cyclic orders into the
    /// invariant-factor chain. Replacing a violating pair (x, y) by
    /// (gcd, lcm) preserves the group; any divisibility-sorted fixpoint is
    /// the unique chain.
    pub fn from_parts(free_rank: usize, cyclic_orders: Vec<BigUint>) -> Self {
        let mut ds: Vec<BigUint> =
            cyclic_orders.into_iter().filter(|d| *d > BigUint::one()).collect();
        loop {
            ds.sort();
            let mut changed = false;
            for i in 0..ds.len() {
                for j in i + 1..ds.len() {
                    if !(&ds[j] % &ds[i]).is_zero() {
                        let g = ds[i].gcd(&ds[j]);
                        let l = &ds[i] / &g * &ds[j];
                        ds[i] = g;
                        ds[j] = l;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        ds.retain(|d| *d > BigUint::one());
        HomologyGroup { free_rank, torsion: ds }
    }

    pub fn direct_sum(parts: &[HomologyGroup]) -> Self {
        let free = parts.iter().map(|p| p.free_rank).sum();
        let orders = parts.iter().flat_map(|p| p.torsion.iter().cloned()).collect();
        Self::from_parts(free, orders)
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn label(&self, ring: RingSpec) -> String {
        let r = match ring {
            RingSpec::Integers => "Z",
            RingSpec::Rationals => "Q",
            RingSpec::ModP(_) => "F",
        };
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push(r.to_string()),
            n => parts.push(format!("{r}^{n}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

fn is_zero_mod(v: &BigUint, m: &BigUint) -> bool {
    (v % m).is_zero()
}

fn rank_over(m: &SparseIntMatrix, ring: RingSpec) -> usize {
    match ring {
        RingSpec::Integers | RingSpec::Rationals => m.rank_over_q(),
        RingSpec::ModP(p) => m.rank_mod_p(p),
    }
}

/// Homology of a chain complex over the given ring, degree by degree.
///
/// Over a field: rank bookkeeping. Over ℤ: free rank by rank-nullity and
/// torsion of H_k read off the Smith normal form of ∂_{k+1} (the quotient
/// C_k / ker ∂_k is free, so coker ∂_{k+1} carries exactly H_k's torsion).
pub fn homology(c: &ChainComplex, ring: RingSpec) -> Result<Vec<HomologyGroup>, HomologyError> {
    ring.validate()?;
    c.validate()?;
    let top = c.top_degree();
    let mut out = Vec::with_capacity(top + 1);
    let ranks: Vec<usize> = (0..=top + 1).map(|k| rank_over(&c.boundary(k), ring)).collect();
    for k in 0..=top {
        let free = c.dim(k) - ranks[k] - ranks[k + 1];
        let group = if ring.is_field() {
            HomologyGroup::free(free)
        } else {
            let snf = smith_normal_form(&c.boundary(k + 1), false)?;
            HomologyGroup::from_parts(
                free,
                snf.torsion().iter().map(|d| d.magnitude().clone()).collect(),
            )
        };
        out.push(group);
    }
    Ok(out)
}

/// Cohomology of a cochain complex: H^k = ker δ^k / im δ^{k−1}.
pub fn cohomology(
    c: &CochainComplex,
    ring: RingSpec,
) -> Result<Vec<HomologyGroup>, HomologyError> {
    ring.validate()?;
    let top = c.top_degree();
    let mut out = Vec::with_capacity(top + 1);
    let rank_in: Vec<usize> = (0..=top)
        .map(|k| if k == 0 { 0 } else { rank_over(&c.delta(k - 1), ring) })
        .collect();
    let rank_out: Vec<usize> = (0..=top).map(|k| rank_over(&c.delta(k), ring)).collect();
    for k in 0..=top {
        let free = c.dim(k) - rank_out[k] - rank_in[k];
        let group = if ring.is_field() {
            HomologyGroup::free(free)
        } else {
            let torsion = if k == 0 {
                Vec::new()
            } else {
                let snf = smith_normal_form(&c.delta(k - 1), false)?;
                snf.torsion().iter().map(|d| d.magnitude().clone()).collect()
            };
            HomologyGroup::from_parts(free, torsion)
        };
        out.push(group);
    }
    Ok(out)
}

/// Compactly supported cohomology of a chain complex (its compact dual's
/// cohomology). Collar-relative versions are obtained by passing the output
/// of `relative_collar_complex`.
pub fn cohomology_c(
    c: &ChainComplex,
    ring: RingSpec,
) -> Result<Vec<HomologyGroup>, HomologyError> {
    cohomology(&compact_dual(c), ring)
}

/// (A ⊗ B, Tor₁(A, B)) over the ring, in invariant-factor form.
///
/// Componentwise rules over ℤ: Z⊗M = M, Z/d ⊗ Z/e = Z/gcd, Tor(Z, ·) = 0,
/// Tor(Z/d, Z/e) = Z/gcd. Over a field Tor vanishes and ⊗ multiplies ranks.
pub fn tensor_and_tor(
    a: &HomologyGroup,
    b: &HomologyGroup,
    ring: RingSpec,
) -> (HomologyGroup, HomologyGroup) {
    if ring.is_field() {
        return (HomologyGroup::free(a.free_rank * b.free_rank), HomologyGroup::zero());
    }
    let mut tensor_orders = Vec::new();
    for d in &a.torsion {
        for _ in 0..b.free_rank {
            tensor_orders.push(d.clone());
        }
    }
    for e in &b.torsion {
        for _ in 0..a.free_rank {
            tensor_orders.push(e.clone());
        }
    }
    let mut tor_orders = Vec::new();
    for d in &a.torsion {
        for e in &b.torsion {
            let g = d.gcd(e);
            tensor_orders.push(g.clone());
            tor_orders.push(g);
        }
    }
    (
        HomologyGroup::from_parts(a.free_rank * b.free_rank, tensor_orders),
        HomologyGroup::from_parts(0, tor_orders),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SesDegreeVerdict {
    pub degree: usize,
    pub lhs: HomologyGroup,
    pub rhs: HomologyGroup,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SesReport {
    pub ring: RingSpec,
    pub degrees: Vec<SesDegreeVerdict>,
    pub all_equal: bool,
}

/// Künneth check: H_k(C⊗D) against
/// ⊕_{i+j=k} H_i(C)⊗H_j(D) ⊕ ⊕_{i+j=k−1} Tor(H_i(C), H_j(D)).
/// The sequence splits, so equality of invariant factors in every degree is
/// exactly what "the SES is exact" buys at the level of isomorphism types.
pub fn kunneth_check(
    c: &ChainComplex,
    d: &ChainComplex,
    ring: RingSpec,
) -> Result<SesReport, HomologyError> {
    ring.validate()?;
    let t = tensor_product(c, d)?;
    let lhs_all = homology(&t.complex, ring)?;
    let hc = homology(c, ring)?;
    let hd = homology(d, ring)?;
    let top = t.complex.top_degree();
    let mut degrees = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut parts = Vec::new();
        for i in 0..=k.min(c.top_degree()) {
            let j = k - i;
            if j <= d.top_degree() {
                let (tens, _) = tensor_and_tor(&hc[i], &hd[j], ring);
                parts.push(tens);
            }
        }
        if k >= 1 {
            for i in 0..=(k - 1).min(c.top_degree()) {
                let j = k - 1 - i;
                if j <= d.top_degree() {
                    let (_, tor) = tensor_and_tor(&hc[i], &hd[j], ring);
                    parts.push(tor);
                }
            }
        }
        let rhs = HomologyGroup::direct_sum(&parts);
        let lhs = lhs_all[k].clone();
        let equal = lhs == rhs;
        degrees.push(SesDegreeVerdict { degree: k, lhs, rhs, equal });
    }
    let all_equal = degrees.iter().all(|d| d.equal);
    Ok(SesReport { ring, degrees, all_equal })
}

/// Universal-coefficient check for compactly supported cohomology:
/// H^k_c(C; S) against H^k_c(C; Z)⊗S ⊕ Tor(H^{k+1}_c(C; Z), S) for a field
/// target S (ℚ or ℤ/p). Both sides are S-vector spaces; ranks must agree.
pub fn uct_check(c: &ChainComplex, target: RingSpec) -> Result<SesReport, HomologyError> {
    target.validate()?;
    let dual = compact_dual(c);
    let integral = cohomology(&dual, RingSpec::Integers)?;
    let over_target = cohomology(&dual, target)?;
    let top = c.top_degree();
    let mut degrees = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let lhs = over_target[k].clone();
        let rhs_rank = match target {
            RingSpec::Rationals => integral[k].free_rank,
            RingSpec::ModP(p) => {
                let p = BigUint::from(p);
                let tensor_part = integral[k].free_rank
                    + integral[k].torsion.iter().filter(|d| is_zero_mod(d, &p)).count();
                let tor_part = if k + 1 <= top {
                    integral[k + 1].torsion.iter().filter(|d| is_zero_mod(d, &p)).count()
                } else {
                    0
                };
                tensor_part + tor_part
            }
            RingSpec::Integers => unreachable!("target validated as a field"),
        };
        let rhs = HomologyGroup::free(rhs_rank);
        let equal = lhs == rhs;
        degrees.push(SesDegreeVerdict { degree: k, lhs, rhs, equal });
    }
    let all_equal = degrees.iter().all(|d| d.equal);
    Ok(SesReport { ring: target, degrees, all_equal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn hg(free: usize, torsion: &[u64]) -> HomologyGroup {
        HomologyGroup::from_parts(free, torsion.iter().map(|&d| BigUint::from(d)).collect())
    }

    #[test]
    fn invariant_chain_canonicalization() {
        // Z/2 + Z/3 = Z/6; Z/4 + Z/6 = Z/2 + Z/12.
        assert_eq!(hg(0, &[2, 3]).torsion, vec![BigUint::from(6u32)]);
        assert_eq!(
            hg(0, &[4, 6]).torsion,
            vec![BigUint::from(2u32), BigUint::from(12u32)]
        );
        assert_eq!(hg(1, &[1, 1]).torsion, Vec::<BigUint>::new());
        assert_eq!(hg(2, &[2, 4]), hg(2, &[4, 2]));
    }

    #[test]
    fn circle_and_torsion_homology() {
        let c6 = ChainComplex::cycle_graph(6);
        let h = homology(&c6, RingSpec::Integers).unwrap();
        assert_eq!(h, vec![hg(1, &[]), hg(1, &[])]);

        let x2 = ChainComplex::times2();
        let h = homology(&x2, RingSpec::Integers).unwrap();
        assert_eq!(h, vec![hg(0, &[2]), hg(0, &[])]);
        // Mod 2 the boundary dies and both ranks appear.
        let h2 = homology(&x2, RingSpec::ModP(2)).unwrap();
        assert_eq!(h2, vec![hg(1, &[]), hg(1, &[])]);
        let h3 = homology(&x2, RingSpec::ModP(3)).unwrap();
        assert_eq!(h3, vec![hg(0, &[]), hg(0, &[])]);
    }

    #[test]
    fn tor_of_z4_z6_is_z2() {
        let (tens, tor) = tensor_and_tor(&hg(0, &[4]), &hg(0, &[6]), RingSpec::Integers);
        assert_eq!(tor, hg(0, &[2]));
        assert_eq!(tens, hg(0, &[2]));
    }

    #[test]
    fn kunneth_torus_pattern() {
        let c4 = ChainComplex::cycle_graph(4);
        let report = kunneth_check(&c4, &c4, RingSpec::Integers).unwrap();
        assert!(report.all_equal);
        let lhs: Vec<&HomologyGroup> = report.degrees.iter().map(|d| &d.lhs).collect();
        assert_eq!(*lhs[0], hg(1, &[]));
        assert_eq!(*lhs[1], hg(2, &[]));
        assert_eq!(*lhs[2], hg(1, &[]));
    }

    #[test]
    fn kunneth_tor_case() {
        let x2 = ChainComplex::times2();
        let report = kunneth_check(&x2, &x2, RingSpec::Integers).unwrap();
        assert!(report.all_equal);
        assert_eq!(report.degrees[0].lhs, hg(0, &[2]));
        // Degree 1 is pure Tor: Tor(Z/2, Z/2) = Z/2.
        assert_eq!(report.degrees[1].lhs, hg(0, &[2]));
        assert_eq!(report.degrees[2].lhs, hg(0, &[]));
    }

    #[test]
    fn kunneth_over_fields() {
        let c4 = ChainComplex::cycle_graph(4);
        let x2 = ChainComplex::times2();
        for ring in [RingSpec::Rationals, RingSpec::ModP(2), RingSpec::ModP(3)] {
            assert!(kunneth_check(&c4, &x2, ring).unwrap().all_equal);
        }
    }

    #[test]
    fn uct_times2_shifts_torsion() {
        // H^0_c(x2; Z) = 0, H^1_c(x2; Z) = Z/2; over Z/2 the Tor term
        // resurfaces in degree 0.
        let x2 = ChainComplex::times2();
        let integral = cohomology_c(&x2, RingSpec::Integers).unwrap();
        assert_eq!(integral, vec![hg(0, &[]), hg(0, &[2])]);
        let report = uct_check(&x2, RingSpec::ModP(2)).unwrap();
        assert!(report.all_equal);
        assert_eq!(report.degrees[0].lhs, hg(1, &[]));
        assert_eq!(report.degrees[1].lhs, hg(1, &[]));
        let over_q = uct_check(&x2, RingSpec::Rationals).unwrap();
        assert!(over_q.all_equal);
        assert!(over_q.degrees.iter().all(|d| d.lhs.free_rank == 0));
    }

    #[test]
    fn dual_point_has_h0() {
        let p = ChainComplex::point();
        let h = cohomology_c(&p, RingSpec::Integers).unwrap();
        assert_eq!(h, vec![hg(1, &[])]);
    }

    #[test]
    fn labels_render() {
        assert_eq!(hg(2, &[2, 4]).label(RingSpec::Integers), "Z^2 + Z/2 + Z/4");
        assert_eq!(hg(0, &[]).label(RingSpec::Rationals), "0");
        assert_eq!(hg(1, &[]).label(RingSpec::Rationals), "Q");
    }
}
