//! Exhaustive family of small chain complexes and batch exact-sequence
//! verification over it.
//!
//! The family is every length-≤3 complex with module ranks in {0, 1, 2} and
//! differential entries in [−2, 2] satisfying ∂∂ = 0. That range already
//! produces free summands, 2- and 3-torsion, and interacting torsion under
//! ⊗ and Tor, which is what the Künneth and universal-coefficient checks
//! need to exercise. Checking all pairs from the family is quadratic and
//! slow, so `kunneth_sweep` runs family × probes exhaustively plus a seeded
//! random sample of family × family pairs.

use super::{kunneth_check, uct_check, HomologyError};
use crate::complexes::ChainComplex;
use crate::matrix::SparseIntMatrix;
use crate::par;
use crate::ring::RingSpec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const ENTRY_RANGE: std::ops::RangeInclusive<i64> = -2..=2;
const MAX_RANK: usize = 2;

fn all_matrices(rows: usize, cols: usize) -> Vec<SparseIntMatrix> {
    let span: Vec<i64> = ENTRY_RANGE.collect();
    let total = span.len().pow((rows * cols) as u32);
    let mut mats = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut triplets = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = span[rem % span.len()];
                rem /= span.len();
                if v != 0 {
                    triplets.push((r, c, v));
                }
            }
        }
        mats.push(
            SparseIntMatrix::from_triplets(rows, cols, triplets)
                .expect("enumerated entries are in bounds"),
        );
    }
    mats
}

fn composes_to_zero(d1: &SparseIntMatrix, d2: &SparseIntMatrix) -> bool {
    d1.mul(d2).expect("adjacent ranks agree").entries().is_empty()
}

/// Every complex 0 → Z^r2 → Z^r1 → Z^r0 → 0 with ranks ≤ 2, entries in
/// [−2, 2], and ∂₁∂₂ = 0. Deterministic order.
pub fn enumerate_family() -> Vec<ChainComplex> {
    let mut out = Vec::new();
    for r0 in 0..=MAX_RANK {
        for r1 in 0..=MAX_RANK {
            for r2 in 0..=MAX_RANK {
                let d1s = all_matrices(r0, r1);
                let d2s = all_matrices(r1, r2);
                for d1 in &d1s {
                    for d2 in &d2s {
                        if !composes_to_zero(d1, d2) {
                            continue;
                        }
                        let c = ChainComplex::from_ranks_and_diffs(
                            &[r0, r1, r2],
                            vec![d1.clone(), d2.clone()],
                        )
                        .expect("family member must validate");
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

/// Named small complexes with known homology, used as Künneth partners so
/// every family member meets free parts, torsion, and their mixtures.
pub fn probe_set() -> Vec<(&'static str, ChainComplex)> {
    let mixed = ChainComplex::from_ranks_and_diffs(
        &[2, 2, 1],
        vec![
            SparseIntMatrix::from_dense(&[vec![0, 0], vec![0, 2]]),
            SparseIntMatrix::from_dense(&[vec![1], vec![0]]),
        ],
    )
    .expect("mixed probe is a complex");
    vec![
        ("point", ChainComplex::point()),
        ("interval", ChainComplex::interval()),
        ("circle", ChainComplex::loop_circle()),
        ("times2", ChainComplex::times2()),
        ("mixed", mixed),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFailure {
    pub left: String,
    pub right: String,
    pub degree: usize,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub ring: RingSpec,
    pub family_size: usize,
    pub pairs_checked: usize,
    pub failures: Vec<SweepFailure>,
}

fn family_tag(i: usize) -> String {
    format!("family[{i}]")
}

/// Künneth over family × probes (exhaustive) plus `random_pairs` seeded
/// family × family pairs. Returns every degree where the two sides of the
/// exact sequence disagree; an empty failure list is the pass condition.
pub fn kunneth_sweep(
    ring: RingSpec,
    random_pairs: usize,
    seed: u64,
) -> Result<SweepReport, HomologyError> {
    ring.validate()?;
    let family = enumerate_family();
    let probes = probe_set();

    let mut jobs: Vec<(String, ChainComplex, String, ChainComplex)> = Vec::new();
    for (i, c) in family.iter().enumerate() {
        for (name, p) in &probes {
            jobs.push((family_tag(i), c.clone(), (*name).to_string(), p.clone()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx: Vec<usize> = (0..family.len()).collect();
    for _ in 0..random_pairs {
        let &a = idx.choose(&mut rng).expect("family is nonempty");
        let &b = idx.choose(&mut rng).expect("family is nonempty");
        jobs.push((family_tag(a), family[a].clone(), family_tag(b), family[b].clone()));
    }

    let results = par::map_indexed(&jobs, |_, (ltag, c, rtag, d)| {
        let report = kunneth_check(c, d, ring)?;
        let mut fails = Vec::new();
        for deg in &report.degrees {
            if !deg.equal {
                fails.push(SweepFailure {
                    left: ltag.clone(),
                    right: rtag.clone(),
                    degree: deg.degree,
                    lhs: deg.lhs.label(ring),
                    rhs: deg.rhs.label(ring),
                });
            }
        }
        Ok::<_, HomologyError>(fails)
    });

    let mut failures = Vec::new();
    for r in results {
        failures.extend(r?);
    }
    Ok(SweepReport { ring, family_size: family.len(), pairs_checked: jobs.len(), failures })
}

/// Universal-coefficient check for every family member and probe against the
/// given field target.
pub fn uct_sweep(target: RingSpec) -> Result<SweepReport, HomologyError> {
    target.validate()?;
    let family = enumerate_family();
    let probes = probe_set();
    let mut jobs: Vec<(String, ChainComplex)> =
        family.into_iter().enumerate().map(|(i, c)| (family_tag(i), c)).collect();
    let family_size = jobs.len();
    jobs.extend(probes.into_iter().map(|(n, c)| (n.to_string(), c)));

    let results = par::map_indexed(&jobs, |_, (tag, c)| {
        let report = uct_check(c, target)?;
        let mut fails = Vec::new();
        for deg in &report.degrees {
            if !deg.equal {
                fails.push(SweepFailure {
                    left: tag.clone(),
                    right: format!("coefficients {}", target.label()),
                    degree: deg.degree,
                    lhs: deg.lhs.label(target),
                    rhs: deg.rhs.label(target),
                });
            }
        }
        Ok::<_, HomologyError>(fails)
    });

    let mut failures = Vec::new();
    for r in results {
        failures.extend(r?);
    }
    Ok(SweepReport { ring: target, family_size, pairs_checked: jobs.len(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_nonempty_and_valid() {
        let family = enumerate_family();
        // 27 rank triples, always including the all-zero differentials.
        assert!(family.len() > 27);
        for c in family.iter().take(50) {
            c.validate().unwrap();
        }
    }

    #[test]
    fn family_members_compose_to_zero() {
        for c in enumerate_family().iter().step_by(97) {
            let d1 = c.boundary(1);
            let d2 = c.boundary(2);
            assert!(d1.mul(&d2).unwrap().entries().is_empty());
        }
    }

    #[test]
    fn probes_have_expected_shapes() {
        let probes = probe_set();
        assert_eq!(probes.len(), 5);
        for (_, c) in &probes {
            c.validate().unwrap();
        }
    }

    #[test]
    fn small_probe_sweep_is_clean() {
        // Probes × probes as a smoke test; the full sweep runs in the
        // acceptance suite.
        let probes = probe_set();
        for (_, c) in &probes {
            for (_, d) in &probes {
                let r = kunneth_check(c, d, RingSpec::Integers).unwrap();
                assert!(r.all_equal, "{:#?}", r.degrees);
            }
        }
    }
}
