//! TOML task configuration. One document describes one task run; unknown
//! keys are rejected so typos surface as parse errors instead of silently
//! falling back to defaults.

use coarsetop::coset::SubgroupSpec;
use coarsetop::euler::{GraphOfGroups, SplitShape};
use coarsetop::groups::GroupSpec;
use coarsetop::ring::RingSpec;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    /// One of: ball, quotient, ends, split-report, homology, kunneth-check,
    /// uct-check, euler. `--task` overrides.
    pub task: Option<String>,
    pub seed: Option<u64>,
    /// Node budget for ball enumeration and searches.
    pub budget: Option<u64>,
    /// "json" (default) or "csv". `--format` overrides.
    pub format: Option<String>,
    /// Output path; stdout when absent. `--out` overrides.
    pub out: Option<String>,
    pub group: Option<GroupSpec>,
    pub subgroup: Option<SubgroupSpec>,
    #[serde(default)]
    pub ball: BallSection,
    #[serde(default)]
    pub quotient: QuotientSection,
    #[serde(default)]
    pub ends: EndsSection,
    #[serde(default)]
    pub homology: HomologySection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub kunneth: KunnethSection,
    #[serde(default)]
    pub uct: UctSection,
    #[serde(default)]
    pub euler: EulerSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallSection {
    pub radius: u32,
    pub include_labels: bool,
    pub include_edges: bool,
}

impl Default for BallSection {
    fn default() -> Self {
        BallSection { radius: 3, include_labels: false, include_edges: false }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuotientSection {
    pub radius: u32,
    /// Distance values ≤ margin are certified exact; the window explores
    /// Ball(radius + margin) to prove it.
    pub margin: u32,
}

impl Default for QuotientSection {
    fn default() -> Self {
        QuotientSection { radius: 6, margin: 2 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EndsSection {
    pub radius: u32,
    pub schedule: Vec<u32>,
    /// 0 selects the rule margin = 2r; any other value is a fixed margin.
    pub margin: u32,
    /// Collar width marking window-boundary vertices.
    pub collar: u32,
    pub include_h1: bool,
    pub h1_scale: u32,
}

impl Default for EndsSection {
    fn default() -> Self {
        EndsSection {
            radius: 30,
            schedule: vec![1, 2, 4, 8],
            margin: 0,
            collar: 1,
            include_h1: false,
            h1_scale: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomologySection {
    /// Window radius ("ball" source) or quotient radius ("quotient").
    pub radius: u32,
    /// Rips scale parameter.
    pub scale: u32,
    /// Top simplex dimension of the Rips complex.
    pub max_degree: usize,
    /// "Z", "Q", or "Z/p" with p prime.
    pub ring: String,
    /// "ball" or "quotient" (the latter needs [subgroup]).
    pub source: String,
    /// Quotient margin when source = "quotient".
    pub margin: u32,
    /// > 0 additionally reports frontier-relative compactly supported
    /// cohomology after killing the collar of this width.
    pub relative_collar: u32,
}

impl Default for HomologySection {
    fn default() -> Self {
        HomologySection {
            radius: 4,
            scale: 1,
            max_degree: 2,
            ring: "Z".into(),
            source: "ball".into(),
            margin: 2,
            relative_collar: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub quotient_radius: u32,
    pub quotient_margin: u32,
    pub comm_radius: u32,
    pub max_connect_scale: u32,
    pub ends_schedule: Vec<u32>,
    pub ends_margin: u32,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            quotient_radius: 7,
            quotient_margin: 2,
            comm_radius: 6,
            max_connect_scale: 4,
            ends_schedule: vec![1, 2, 3],
            ends_margin: 2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KunnethSection {
    /// "sweep" (exhaustive family × probes), "random" (sweep plus seeded
    /// random family pairs), "probes" (named pairs only), or "windows"
    /// (tensor of two group-window Rips complexes).
    pub mode: String,
    pub rings: Vec<String>,
    /// Extra seeded family × family pairs in "random" mode.
    pub random_pairs: usize,
    /// Window mode: the two factor groups.
    pub left: Option<GroupSpec>,
    pub right: Option<GroupSpec>,
    pub radius: u32,
    pub scale: u32,
    pub max_degree: usize,
}

impl Default for KunnethSection {
    fn default() -> Self {
        KunnethSection {
            mode: "sweep".into(),
            rings: vec!["Z".into(), "Q".into(), "Z/2".into(), "Z/3".into()],
            random_pairs: 25,
            left: None,
            right: None,
            radius: 2,
            scale: 1,
            max_degree: 2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UctSection {
    /// Field targets for the universal-coefficient comparison.
    pub targets: Vec<String>,
}

impl Default for UctSection {
    fn default() -> Self {
        UctSection { targets: vec!["Q".into(), "Z/2".into(), "Z/3".into()] }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EulerSection {
    /// One of: amalgam, hnn, finite-index, graph, gog-check, one-relator,
    /// report.
    pub op: Option<String>,
    /// Rationals as strings: "-1", "1/6".
    pub chi_a: Option<String>,
    pub chi_b: Option<String>,
    pub chi_c: Option<String>,
    pub chi: Option<String>,
    pub chi_g: Option<String>,
    pub chi_h: Option<String>,
    pub index: Option<u64>,
    pub n: Option<u64>,
    pub m: Option<u64>,
    pub shape: Option<SplitShape>,
    pub graph: Option<GraphOfGroups>,
}

/// "Z", "Q", "Z/p" (case-insensitive).
pub fn parse_ring(text: &str) -> Result<RingSpec, String> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("z") {
        return Ok(RingSpec::Integers);
    }
    if t.eq_ignore_ascii_case("q") {
        return Ok(RingSpec::Rationals);
    }
    if let Some(rest) = t.strip_prefix("Z/").or_else(|| t.strip_prefix("z/")) {
        let p: u64 = rest
            .parse()
            .map_err(|_| format!("ring modulus {rest:?} is not an integer"))?;
        let spec = RingSpec::ModP(p);
        spec.validate().map_err(|e| e.to_string())?;
        return Ok(spec);
    }
    Err(format!("unknown ring {text:?} (expected Z, Q, or Z/p with p prime)"))
}
