//! Ends of a space seen through a finite window, and the splitting
//! criterion built on them.
//!
//! The number of ends is approximated by deleting the ball of radius r
//! around the basepoint and counting the complement components that reach
//! the window's declared frontier. Components trapped strictly inside the
//! window are finite-size artifacts and are not counted. The verdict never
//! asserts more than the window shows: a count is `Exact` only after it
//! holds at three consecutive scheduled radii, and otherwise remains a
//! lower bound.

use crate::complexes::rips::rips_complex;
use crate::complexes::{relative_collar_complex, ComplexError};
use crate::coset::bundle::{finite_index_check, FiniteIndexReport, FiniteIndexVerdict};
use crate::coset::{
    commensuration_witness, quotient_window, CommensurationCertificate, CosetError,
    QuotientParams, Subgroup,
};
use crate::groups::{Group, GroupError, Marked};
use crate::homology::{cohomology_c, HomologyError};
use crate::ring::RingSpec;
use crate::window::{GraphWindow, MetricWindow, WindowError, WindowSource};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EndsError {
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Coset(#[from] CosetError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error("schedule must list at least one radius")]
    EmptySchedule,
}

/// Component counts of the scale-r graph on a metric window.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectivityEntry {
    pub r: u32,
    pub components: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectivityReport {
    pub entries: Vec<ConnectivityEntry>,
    /// Smallest scheduled scale at which the window is one component.
    pub first_connected: Option<u32>,
}

/// Scans P_r connectivity over the scheduled scales.
pub fn check_coarse_connectivity(
    window: &MetricWindow,
    schedule: &[u32],
) -> Result<ConnectivityReport, EndsError> {
    if schedule.is_empty() {
        return Err(EndsError::EmptySchedule);
    }
    let n = window.n();
    let mut entries = Vec::new();
    let mut first_connected = None;
    let mut schedule: Vec<u32> = schedule.to_vec();
    schedule.sort_unstable();
    schedule.dedup();
    for &r in &schedule {
        let mut dsu: Vec<usize> = (0..n).collect();
        fn find(dsu: &mut Vec<usize>, mut i: usize) -> usize {
            while dsu[i] != i {
                dsu[i] = dsu[dsu[i]];
                i = dsu[i];
            }
            i
        }
        for i in 0..n {
            for j in 0..i {
                if window.dist(i, j) <= r {
                    let (a, b) = (find(&mut dsu, i), find(&mut dsu, j));
                    if a != b {
                        dsu[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut roots = std::collections::BTreeSet::new();
        for i in 0..n {
            let root = find(&mut dsu, i);
            roots.insert(root);
        }
        let components = roots.len();
        if components == 1 && first_connected.is_none() {
            first_connected = Some(r);
        }
        entries.push(ConnectivityEntry { r, components });
    }
    Ok(ConnectivityReport { entries, first_connected })
}

/// Reliability cushion per deleted radius: an entry at radius r is reported
/// only when r plus the cushion fits inside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MarginRule {
    /// Cushion 2r: deep windows, conservative.
    TwiceR,
    Fixed { margin: u32 },
}

impl MarginRule {
    pub fn cushion(&self, r: u32) -> u32 {
        match self {
            MarginRule::TwiceR => 2 * r,
            MarginRule::Fixed { margin } => *margin,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EndsEntry {
    pub r: u32,
    pub cushion: u32,
    /// All components of the complement of B_r.
    pub components: usize,
    /// Components that reach the window frontier: the ends surrogate.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndsVerdict {
    /// Count stable at three consecutive scheduled radii.
    Exact { count: usize },
    /// Seen but not yet stabilized; the true count is at least this.
    AtLeast { count: usize },
    WindowTooSmall,
}

#[derive(Debug, Clone, Serialize)]
pub struct EndsReport {
    pub window_radius: u32,
    pub entries: Vec<EndsEntry>,
    pub verdict: EndsVerdict,
}

impl EndsReport {
    pub fn count_lower_bound(&self) -> usize {
        match self.verdict {
            EndsVerdict::Exact { count } | EndsVerdict::AtLeast { count } => count,
            EndsVerdict::WindowTooSmall => 0,
        }
    }
}

/// Ends surrogate on a graph window: components of the complement of the
/// open ball around the basepoint (kept: depth ≥ r) that meet the window
/// frontier, across a radius schedule. A window with an empty frontier
/// claims a bounded space and counts zero.
pub fn ends_estimate(
    window: &GraphWindow,
    schedule: &[u32],
    rule: MarginRule,
) -> Result<EndsReport, EndsError> {
    if schedule.is_empty() {
        return Err(EndsError::EmptySchedule);
    }
    let n = window.n();
    let mut boundary = vec![false; n];
    for &v in &window.boundary {
        boundary[v] = true;
    }
    let mut schedule: Vec<u32> = schedule.to_vec();
    schedule.sort_unstable();
    schedule.dedup();

    let mut entries = Vec::new();
    for &r in &schedule {
        let cushion = rule.cushion(r);
        if r + cushion > window.radius {
            continue;
        }
        // Deleting the open ball: the subgraph induced on depth ≥ r.
        let alive: Vec<bool> = window.depth.iter().map(|&d| d >= r).collect();
        let mut comp = vec![usize::MAX; n];
        let mut count_all = 0;
        let mut count_boundary = 0;
        for s in 0..n {
            if !alive[s] || comp[s] != usize::MAX {
                continue;
            }
            let id = count_all;
            count_all += 1;
            let mut touches = false;
            let mut stack = vec![s];
            comp[s] = id;
            while let Some(v) = stack.pop() {
                if boundary[v] {
                    touches = true;
                }
                for &w in &window.adj[v] {
                    if alive[w] && comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            if touches {
                count_boundary += 1;
            }
        }
        entries.push(EndsEntry { r, cushion, components: count_all, count: count_boundary });
    }

    let verdict = if entries.is_empty() {
        EndsVerdict::WindowTooSmall
    } else if entries.len() >= 3 && {
        let t = &entries[entries.len() - 3..];
        t[0].count == t[1].count && t[1].count == t[2].count
    } {
        EndsVerdict::Exact { count: entries.last().unwrap().count }
    } else {
        EndsVerdict::AtLeast { count: entries.last().unwrap().count }
    };

    Ok(EndsReport { window_radius: window.radius, entries, verdict })
}

/// Degree-0 coarse cohomology check: a window with an empty frontier is a
/// bounded space (rank 1); an unbounded window has vanishing
/// frontier-relative H⁰. Both sides are cross-checked against the chain
/// machinery over Q.
#[derive(Debug, Clone, Serialize)]
pub struct H0Report {
    pub bounded: bool,
    pub h0_rank: usize,
    pub expected: usize,
    pub consistent: bool,
}

pub fn coarse_h0_check(window: &GraphWindow, collar_width: u32) -> Result<H0Report, EndsError> {
    let mw = window.metric_window();
    let rips = rips_complex(&mw, 1, 1)?;
    let bounded = window.boundary.is_empty();
    let (rank, expected) = if bounded {
        let h = crate::homology::homology(&rips, RingSpec::Rationals)?;
        (h[0].free_rank, 1)
    } else {
        let (rel, _) = relative_collar_complex(&rips, collar_width)?;
        let h = cohomology_c(&rel, RingSpec::Rationals)?;
        (h.first().map(|g| g.free_rank).unwrap_or(0), 0)
    };
    Ok(H0Report { bounded, h0_rank: rank, expected, consistent: rank == expected })
}

/// Rank of the frontier-relative first cohomology of the scale-`scale`
/// Rips complex: counts "independent directions out of the window", one
/// less than the number of ends on tame examples.
pub fn coarse_h1_rank(
    window: &GraphWindow,
    collar_width: u32,
    scale: u32,
) -> Result<usize, EndsError> {
    let mw = window.metric_window();
    let rips = rips_complex(&mw, scale, 2)?;
    let (rel, _) = relative_collar_complex(&rips, collar_width)?;
    let h = cohomology_c(&rel, RingSpec::Rationals)?;
    Ok(h.get(1).map(|g| g.free_rank).unwrap_or(0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitParams {
    pub quotient_radius: u32,
    pub quotient_margin: u32,
    /// Radius for commensuration orbit counts (exact strategies ignore it).
    pub comm_radius: u32,
    pub budget: usize,
    /// Scales tried when looking for a connected quotient graph.
    pub max_connect_scale: u32,
    pub ends_schedule: Vec<u32>,
    pub ends_margin: u32,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams {
            quotient_radius: 7,
            quotient_margin: 2,
            comm_radius: 6,
            budget: crate::DEFAULT_BUDGET,
            max_connect_scale: 4,
            ends_schedule: vec![1, 2, 3],
            ends_margin: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitVerdict {
    /// Some generator fails the two-sided finite-index certificate: the
    /// subgroup is not almost normal and the quotient metric is unusable.
    RefusedNotAlmostNormal { conjugator: String },
    /// The quotient is bounded; the subgroup has finite index.
    FiniteIndex,
    /// The quotient has more than one end: the group splits over a
    /// subgroup commensurable to this one.
    SplitsOverCommensurable { ends: usize, exact: bool },
    OneEnd,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub group: String,
    pub subgroup: Vec<String>,
    pub verdict: SplitVerdict,
    pub certificates: Vec<CommensurationCertificate>,
    pub finite_index: Option<FiniteIndexReport>,
    pub connectivity: Option<ConnectivityReport>,
    pub first_connected_scale: Option<u32>,
    pub quotient_classes: Option<usize>,
    pub quotient_converged: Option<bool>,
    pub ends: Option<EndsReport>,
    pub notes: Vec<String>,
}

/// Decides whether G splits over a subgroup commensurable to H by counting
/// the ends of G/H. Refuses unless every marking generator carries a
/// two-sided finite commensuration certificate, since only then is G/H a
/// legitimate coarse quotient.
pub fn splitting_criterion(
    g: &Group,
    h: &Subgroup,
    params: &SplitParams,
) -> Result<SplitReport, EndsError> {
    let mut report = SplitReport {
        group: g.name(),
        subgroup: h.words.clone(),
        verdict: SplitVerdict::Inconclusive,
        certificates: Vec::new(),
        finite_index: None,
        connectivity: None,
        first_connected_scale: None,
        quotient_classes: None,
        quotient_converged: None,
        ends: None,
        notes: Vec::new(),
    };

    // Gate: the commensurator is a subgroup, so two-sided certificates on
    // the marking generators certify almost normality for the whole group.
    for (name, gen) in g.generators() {
        let cert = commensuration_witness(g, h, &gen, params.comm_radius, params.budget)?;
        let finite = cert.is_finite();
        report.certificates.push(cert);
        if !finite {
            report.verdict = SplitVerdict::RefusedNotAlmostNormal { conjugator: name };
            report.notes.push(
                "a generator moves the subgroup to a non-commensurable copy; \
                 Hausdorff distances in G/H would be unbounded"
                    .into(),
            );
            return Ok(report);
        }
    }

    // Bounded quotient means finite index: no splitting information.
    let r0 = params.quotient_radius.saturating_sub(2).max(params.quotient_margin);
    let schedule: Vec<u32> = (r0..=params.quotient_radius).collect();
    let fi = finite_index_check(g, h, &schedule, params.quotient_margin, params.budget)?;
    let bounded = matches!(
        fi.verdict,
        FiniteIndexVerdict::FiniteExact { .. } | FiniteIndexVerdict::StableWindow { .. }
    );
    report.finite_index = Some(fi);
    if bounded {
        report.verdict = SplitVerdict::FiniteIndex;
        return Ok(report);
    }

    let qw = quotient_window(g, h, &QuotientParams {
        radius: params.quotient_radius,
        margin: params.quotient_margin,
        budget: params.budget,
    })?;
    report.quotient_classes = Some(qw.class_count());
    report.quotient_converged = Some(qw.all_converged());

    // Only distances up to the window margin are certified exact, so the
    // connectivity scan stays within that range: a scale graph built from
    // larger (possibly inflated) entries could silently drop true edges.
    let max_scale = params.max_connect_scale.min(params.quotient_margin);
    let mw = qw.metric_window()?;
    let scales: Vec<u32> = (1..=max_scale).collect();
    let conn = check_coarse_connectivity(&mw, &scales)?;
    report.first_connected_scale = conn.first_connected;
    report.connectivity = Some(conn);

    let scale = match report.first_connected_scale {
        Some(s) => s,
        None => {
            report.notes.push(format!(
                "quotient window not coarsely connected at certified scales 1..={max_scale}"
            ));
            return Ok(report);
        }
    };

    let graph = GraphWindow::new(
        qw.class_labels.clone(),
        &qw.scale_edges(scale),
        qw.basepoint_class,
        WindowSource::Quotient { scale },
        Some(params.ends_margin),
    )?;
    let ends = ends_estimate(
        &graph,
        &params.ends_schedule,
        MarginRule::Fixed { margin: params.ends_margin },
    )?;

    report.verdict = match &ends.verdict {
        EndsVerdict::Exact { count } if *count >= 2 => {
            SplitVerdict::SplitsOverCommensurable { ends: *count, exact: true }
        }
        EndsVerdict::Exact { count: 1 } => SplitVerdict::OneEnd,
        EndsVerdict::Exact { .. } => SplitVerdict::Inconclusive,
        EndsVerdict::AtLeast { count } if *count >= 2 => {
            SplitVerdict::SplitsOverCommensurable { ends: *count, exact: false }
        }
        EndsVerdict::AtLeast { .. } | EndsVerdict::WindowTooSmall => SplitVerdict::Inconclusive,
    };
    report.ends = Some(ends);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coset::SubgroupSpec;
    use crate::groups::GroupSpec;

    fn subgroup(g: &Group, words: &[&str]) -> Subgroup {
        Subgroup::parse(
            g,
            &SubgroupSpec { generators: words.iter().map(|s| s.to_string()).collect() },
        )
        .unwrap()
    }

    #[test]
    fn line_has_two_ends() {
        let g = GroupSpec::FreeAbelian { rank: 1 }.build().unwrap();
        let w = g.ball_window(30, 10_000, Some(1)).unwrap();
        let rep = ends_estimate(&w, &[1, 2, 3, 4, 5, 6], MarginRule::TwiceR).unwrap();
        assert_eq!(rep.verdict, EndsVerdict::Exact { count: 2 });
        for e in &rep.entries {
            assert_eq!(e.count, 2, "at r = {}", e.r);
        }
    }

    #[test]
    fn plane_has_one_end() {
        let g = GroupSpec::FreeAbelian { rank: 2 }.build().unwrap();
        let w = g.ball_window(12, 100_000, Some(1)).unwrap();
        let rep = ends_estimate(&w, &[1, 2, 3, 4], MarginRule::TwiceR).unwrap();
        assert_eq!(rep.verdict, EndsVerdict::Exact { count: 1 });
    }

    #[test]
    fn tree_end_counts_double() {
        let w = GraphWindow::regular_tree(3, 8);
        let rep =
            ends_estimate(&w, &[1, 2, 3, 4, 5, 6], MarginRule::Fixed { margin: 2 }).unwrap();
        let counts: Vec<usize> = rep.entries.iter().map(|e| e.count).collect();
        assert_eq!(counts, vec![3, 6, 12, 24, 48, 96]);
        assert_eq!(rep.verdict, EndsVerdict::AtLeast { count: 96 });
        assert!(counts.windows(2).all(|p| p[0] <= p[1]), "counts nondecreasing");
    }

    #[test]
    fn bounded_window_has_no_ends() {
        let square = GraphWindow::new(
            (0..4).map(|i| i.to_string()).collect(),
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
            0,
            WindowSource::Explicit,
            None,
        )
        .unwrap();
        let rep = ends_estimate(&square, &[0, 1, 2], MarginRule::Fixed { margin: 0 }).unwrap();
        assert_eq!(rep.verdict, EndsVerdict::Exact { count: 0 });
        let h0 = coarse_h0_check(&square, 1).unwrap();
        assert!(h0.bounded && h0.consistent && h0.h0_rank == 1);
    }

    #[test]
    fn unbounded_window_kills_relative_h0() {
        let g = GroupSpec::FreeAbelian { rank: 1 }.build().unwrap();
        let w = g.ball_window(10, 10_000, Some(1)).unwrap();
        let h0 = coarse_h0_check(&w, 1).unwrap();
        assert!(!h0.bounded);
        assert_eq!(h0.h0_rank, 0);
        assert!(h0.consistent);
    }

    #[test]
    fn h1_rank_counts_ends_minus_one() {
        let z = GroupSpec::FreeAbelian { rank: 1 }.build().unwrap();
        let wz = z.ball_window(20, 10_000, Some(1)).unwrap();
        assert_eq!(coarse_h1_rank(&wz, 1, 1).unwrap(), 1, "line: two ends");

        let tree = GraphWindow::regular_tree(3, 5);
        let leaves = tree.depth.iter().filter(|&&d| d == 5).count();
        assert_eq!(leaves, 48);
        assert_eq!(coarse_h1_rank(&tree, 1, 1).unwrap(), leaves - 1);
    }

    #[test]
    fn plane_h1_vanishes_at_scale_two() {
        let g = GroupSpec::FreeAbelian { rank: 2 }.build().unwrap();
        let w = g.ball_window(6, 100_000, Some(1)).unwrap();
        assert_eq!(coarse_h1_rank(&w, 1, 2).unwrap(), 0, "one end: no relative 1-cocycles");
    }

    #[test]
    fn connectivity_scan_finds_gaps() {
        let points: Vec<i64> = (0..=10).map(|k| 1i64 << k).collect();
        let mw = MetricWindow::from_integer_points(&points).unwrap();
        let schedule: Vec<u32> = (0..=9).map(|k| 1u32 << k).collect();
        let rep = check_coarse_connectivity(&mw, &schedule).unwrap();
        assert_eq!(rep.first_connected, Some(512));
        let at64 = rep.entries.iter().find(|e| e.r == 64).unwrap();
        assert_eq!(at64.components, 4, "gaps above 64 split off 256, 512, 1024");
        for pair in rep.entries.windows(2) {
            assert!(pair[0].components >= pair[1].components, "components shrink with r");
        }
    }

    #[test]
    fn split_verdict_finite_index() {
        let g = GroupSpec::FreeAbelian { rank: 1 }.build().unwrap();
        let h = subgroup(&g, &["a^2"]);
        let rep = splitting_criterion(&g, &h, &SplitParams::default()).unwrap();
        assert_eq!(rep.verdict, SplitVerdict::FiniteIndex);
    }

    #[test]
    fn split_verdict_plane_over_line() {
        let g = GroupSpec::FreeAbelian { rank: 2 }.build().unwrap();
        let h = subgroup(&g, &["a"]);
        let params = SplitParams { quotient_radius: 9, ..SplitParams::default() };
        let rep = splitting_criterion(&g, &h, &params).unwrap();
        assert_eq!(
            rep.verdict,
            SplitVerdict::SplitsOverCommensurable { ends: 2, exact: true },
            "Z^2 over a line factor: two-ended quotient"
        );
        assert_eq!(rep.first_connected_scale, Some(1));
    }

    #[test]
    fn split_verdict_bs_over_fiber() {
        let g = GroupSpec::BaumslagSolitar { m: 1, n: 2 }.build().unwrap();
        let h = subgroup(&g, &["a"]);
        let rep = splitting_criterion(&g, &h, &SplitParams::default()).unwrap();
        match rep.verdict {
            SplitVerdict::SplitsOverCommensurable { ends, .. } => {
                assert!(ends >= 3, "Bass-Serre tree is trivalent, saw {ends}")
            }
            ref v => panic!("expected a splitting verdict, got {v:?}"),
        }
        assert_eq!(rep.first_connected_scale, Some(2), "tree edges live at scale 2");
    }

    #[test]
    fn split_refusal_free_group() {
        let g = GroupSpec::Free { rank: 2 }.build().unwrap();
        let h = subgroup(&g, &["a"]);
        let rep = splitting_criterion(&g, &h, &SplitParams::default()).unwrap();
        assert_eq!(
            rep.verdict,
            SplitVerdict::RefusedNotAlmostNormal { conjugator: "b".into() }
        );
        let failing = rep.certificates.last().unwrap();
        assert!(!failing.is_finite());
    }

    #[test]
    fn split_refusal_triangle_translation() {
        let g = GroupSpec::Triangle.build().unwrap();
        let h = subgroup(&g, &["a b a c"]);
        let rep = splitting_criterion(&g, &h, &SplitParams::default()).unwrap();
        match rep.verdict {
            SplitVerdict::RefusedNotAlmostNormal { ref conjugator } => {
                assert_eq!(conjugator, "a", "first reflection already fails");
            }
            ref v => panic!("expected refusal, got {v:?}"),
        }
    }

    #[test]
    fn split_verdicts_on_products() {
        // Z x Z over its left factor: normal subgroup, quotient is a line.
        let g = GroupSpec::DirectProduct {
            left: Box::new(GroupSpec::FreeAbelian { rank: 1 }),
            right: Box::new(GroupSpec::FreeAbelian { rank: 1 }),
        }
        .build()
        .unwrap();
        let h = subgroup(&g, &["a"]);
        let params = SplitParams { quotient_radius: 9, ..SplitParams::default() };
        let rep = splitting_criterion(&g, &h, &params).unwrap();
        assert_eq!(
            rep.verdict,
            SplitVerdict::SplitsOverCommensurable { ends: 2, exact: true }
        );

        // Z * Z over its left factor: the right generator moves the factor
        // to a non-commensurable conjugate, exactly as in the free group.
        let g = GroupSpec::FreeProduct {
            left: Box::new(GroupSpec::FreeAbelian { rank: 1 }),
            right: Box::new(GroupSpec::FreeAbelian { rank: 1 }),
        }
        .build()
        .unwrap();
        let h = subgroup(&g, &["a"]);
        let rep = splitting_criterion(&g, &h, &SplitParams::default()).unwrap();
        assert_eq!(
            rep.verdict,
            SplitVerdict::RefusedNotAlmostNormal { conjugator: "a2".into() }
        );
    }
}
