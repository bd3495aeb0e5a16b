//! Euler-characteristic calculus for graphs of groups: amalgam and HNN
//! formulas, finite-index scaling, the sign lemma for one-edge splittings,
//! and the one-relator consequence. All arithmetic is exact rational; χ
//! values come from the caller or the standard catalog (χ(Z) = 0,
//! χ(F_r) = 1 − r, χ(trivial) = 1), never from resolutions.

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EulerError {
    #[error("graph of groups is disconnected: vertex {0} unreachable")]
    Disconnected(usize),
    #[error("graph of groups has no vertices")]
    EmptyGraph,
    #[error("edge {0} references vertex {1}, but there are {2} vertices")]
    BadEdgeEndpoint(usize, usize, usize),
    #[error("edge index must be at least 1, got {0}")]
    BadIndex(u64),
    #[error("amalgam endpoint index {0} < 2 makes the splitting non-reduced")]
    NonReduced(u64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("cannot parse {0:?} as a rational number")]
    BadRational(String),
}

/// Exact rational χ from an integer.
pub fn chi_int(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Exact rational χ from a fraction.
pub fn chi_frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses "-3/2", "1/6", "0", "2" into an exact rational.
pub fn parse_chi(s: &str) -> Result<BigRational, EulerError> {
    let t = s.trim();
    let parse_int =
        |x: &str| x.trim().parse::<BigInt>().map_err(|_| EulerError::BadRational(s.into()));
    match t.split_once('/') {
        None => Ok(BigRational::from(parse_int(t)?)),
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d.is_zero() {
                return Err(EulerError::BadRational(s.into()));
            }
            Ok(BigRational::new(parse_int(num)?, d))
        }
    }
}

/// χ(A ∗_C B) = χ(A) + χ(B) − χ(C).
pub fn chi_amalgam(a: &BigRational, b: &BigRational, c: &BigRational) -> BigRational {
    a + b - c
}

/// χ(A ∗_C) = χ(A) − χ(C).
pub fn chi_hnn(a: &BigRational, c: &BigRational) -> BigRational {
    a - c
}

/// χ of a finite-index subgroup: χ(G') = [G : G'] · χ(G).
pub fn chi_finite_index(chi_g: &BigRational, index: u64) -> Result<BigRational, EulerError> {
    if index == 0 {
        return Err(EulerError::BadIndex(0));
    }
    Ok(chi_g * BigRational::from(BigInt::from(index)))
}

/// Edge-group inclusion index into one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndIndex {
    /// The edge group equals the endpoint group (index 1, loop-friendly).
    Equal,
    Finite(u64),
}

impl EndIndex {
    pub fn value(&self) -> u64 {
        match self {
            EndIndex::Equal => 1,
            EndIndex::Finite(n) => *n,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GogEdge {
    pub ends: (usize, usize),
    pub chi: BigRationalField,
    pub indices: (EndIndex, EndIndex),
}

/// Newtype so the struct can derive Serialize with a decimal-free exact
/// rendering ("num/den" or "num").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigRationalField(pub BigRational);

impl serde::Serialize for BigRationalField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational_label(&self.0))
    }
}

impl<'de> serde::Deserialize<'de> for BigRationalField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_chi(&text).map(BigRationalField).map_err(serde::de::Error::custom)
    }
}

/// "0", "-1", "1/6": canonical exact rendering.
pub fn rational_label(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphOfGroups {
    /// (label, χ of the vertex group).
    pub vertices: Vec<(String, BigRationalField)>,
    pub edges: Vec<GogEdge>,
    /// Declared by the builder; validate() checks it against the indices.
    pub reduced: bool,
}

impl GraphOfGroups {
    pub fn validate(&self) -> Result<(), EulerError> {
        let n = self.vertices.len();
        if n == 0 {
            return Err(EulerError::EmptyGraph);
        }
        for (i, e) in self.edges.iter().enumerate() {
            for v in [e.ends.0, e.ends.1] {
                if v >= n {
                    return Err(EulerError::BadEdgeEndpoint(i, v, n));
                }
            }
            for idx in [e.indices.0, e.indices.1] {
                if idx.value() == 0 {
                    return Err(EulerError::BadIndex(0));
                }
            }
            if self.reduced && e.ends.0 != e.ends.1 {
                for idx in [e.indices.0, e.indices.1] {
                    if idx.value() == 1 {
                        return Err(EulerError::NonReduced(1));
                    }
                }
            }
        }
        // Connectivity over the underlying graph.
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.ends.0, e.ends.1), (e.ends.1, e.ends.0)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(EulerError::Disconnected(missing));
        }
        Ok(())
    }

    /// χ(π₁ of the graph of groups) = Σ χ_vertex − Σ χ_edge.
    pub fn chi(&self) -> Result<BigRational, EulerError> {
        self.validate()?;
        let v: BigRational = self.vertices.iter().map(|(_, c)| c.0.clone()).sum();
        let e: BigRational = self.edges.iter().map(|e| e.chi.0.clone()).sum();
        Ok(v - e)
    }
}

/// One-edge splitting shapes for the sign lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SplitShape {
    /// A ∗_C B with [A:C] = p, [B:C] = q, and [C:H] = c_index.
    Amalgam { p: u64, q: u64, c_index: u64 },
    /// A ∗_C with [A:C] = p and [C:H] = c_index.
    Hnn { p: u64, c_index: u64 },
}

impl SplitShape {
    /// The line case: the Bass–Serre tree is a line — a (2,2) amalgam or an
    /// HNN extension with C = A.
    pub fn is_line_case(&self) -> bool {
        match self {
            SplitShape::Amalgam { p, q, .. } => *p == 2 && *q == 2,
            SplitShape::Hnn { p, .. } => *p == 1,
        }
    }

    fn validate(&self) -> Result<(), EulerError> {
        match *self {
            SplitShape::Amalgam { p, q, c_index } => {
                if c_index == 0 {
                    return Err(EulerError::BadIndex(0));
                }
                for x in [p, q] {
                    if x < 2 {
                        return Err(EulerError::NonReduced(x));
                    }
                }
                Ok(())
            }
            SplitShape::Hnn { p, c_index } => {
                if p == 0 || c_index == 0 {
                    return Err(EulerError::BadIndex(0));
                }
                Ok(())
            }
        }
    }

    /// The proof factor: 1/p + 1/q − 1 for an amalgam, 1/p − 1 for HNN.
    pub fn factor(&self) -> BigRational {
        match *self {
            SplitShape::Amalgam { p, q, .. } => {
                chi_frac(1, p as i64) + chi_frac(1, q as i64) - BigRational::one()
            }
            SplitShape::Hnn { p, .. } => chi_frac(1, p as i64) - BigRational::one(),
        }
    }

    fn c_index(&self) -> u64 {
        match *self {
            SplitShape::Amalgam { c_index, .. } | SplitShape::Hnn { c_index, .. } => c_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GogEulerReport {
    pub chi_g: BigRationalField,
    /// Sign of χ(G)/χ(H): always 0 or −1 on valid shapes; 0 when χ(H) = 0.
    pub ratio_sign: i8,
    pub line_case: bool,
}

/// χ(G) from χ(H) and a one-edge splitting shape over a subgroup C with
/// [C : H] = c_index: χ(G) = (χ(H)/c_index) · factor(shape).
pub fn gogeuler_check(
    chi_h: &BigRational,
    shape: &SplitShape,
) -> Result<GogEulerReport, EulerError> {
    shape.validate()?;
    if chi_h.is_zero() {
        // χ(H) = 0 forces χ(C) = 0 and then χ(G) = 0.
        return Ok(GogEulerReport {
            chi_g: BigRationalField(BigRational::zero()),
            ratio_sign: 0,
            line_case: shape.is_line_case(),
        });
    }
    let chi_c = chi_h / BigRational::from(BigInt::from(shape.c_index()));
    let chi_g = chi_c * shape.factor();
    let ratio = &chi_g / chi_h;
    let ratio_sign = if ratio.is_zero() {
        0
    } else if ratio.is_negative() {
        -1
    } else {
        1
    };
    Ok(GogEulerReport {
        chi_g: BigRationalField(chi_g),
        ratio_sign,
        line_case: shape.is_line_case(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OneRelatorChi {
    pub chi: BigRationalField,
    /// n = 1 lands outside the χ ≤ 0 regime the splitting analysis needs.
    pub flagged_positive: bool,
}

/// χ of a one-relator presentation with n generators whose relator is a
/// proper m-th power: χ = 1 − n + 1/m.
pub fn one_relator_chi(n: u64, m: u64) -> Result<OneRelatorChi, EulerError> {
    if n == 0 || m == 0 {
        return Err(EulerError::BadIndex(0));
    }
    let chi = chi_int(1) - chi_int(n as i64) + chi_frac(1, m as i64);
    Ok(OneRelatorChi { flagged_positive: chi.is_positive(), chi: BigRationalField(chi) })
}

/// Outcome of the χ(G) = 0 classification for a splitting over an almost
/// normal subgroup with both χ values nonpositive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum EulerClassification {
    /// χ(H) = 0, which alone forces χ(G) = 0.
    ChiHZero,
    /// χ(G) = 0 with χ(H) < 0: the Bass–Serre tree is a line, so G has a
    /// normal subgroup with quotient Z or Z/2 ∗ Z/2.
    LineCase,
    ContradictionDetected { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct EulerReport {
    pub chi_g: BigRationalField,
    pub chi_h: BigRationalField,
    pub shape: SplitShape,
    pub classification: EulerClassification,
}

/// Classifies a claimed (χ(G), χ(H), shape) triple under the hypotheses
/// χ(G) ≤ 0 and χ(H) ≤ 0. Refuses when a hypothesis fails; otherwise
/// reports which case of the zero-characteristic statement holds, or the
/// precise contradiction.
pub fn eulerchar_report(
    chi_g: &BigRational,
    chi_h: &BigRational,
    shape: &SplitShape,
) -> Result<EulerReport, EulerError> {
    shape.validate()?;
    if chi_g.is_positive() {
        return Err(EulerError::HypothesisViolated(format!(
            "χ(G) = {} violates χ(G) ≤ 0",
            rational_label(chi_g)
        )));
    }
    if chi_h.is_positive() {
        return Err(EulerError::HypothesisViolated(format!(
            "χ(H) = {} violates χ(H) ≤ 0",
            rational_label(chi_h)
        )));
    }

    let classification = if chi_h.is_zero() {
        if chi_g.is_zero() {
            EulerClassification::ChiHZero
        } else {
            EulerClassification::ContradictionDetected {
                reason: "χ(H) = 0 forces χ(G) = 0, but χ(G) ≠ 0".into(),
            }
        }
    } else if !chi_g.is_zero() {
        // Sign lemma: χ(G)/χ(H) ≤ 0 and χ(H) < 0 give χ(G) ≥ 0; with the
        // hypothesis χ(G) ≤ 0 this pins χ(G) = 0.
        EulerClassification::ContradictionDetected {
            reason: "the sign lemma forces χ(G) ≥ 0; with χ(G) ≤ 0 this \
                     pins χ(G) = 0, but χ(G) < 0 was claimed"
                .into(),
        }
    } else if shape.is_line_case() {
        EulerClassification::LineCase
    } else {
        EulerClassification::ContradictionDetected {
            reason: "χ(G) = 0 with χ(H) < 0 requires the line case (a (2,2) \
                     amalgam or an HNN extension with C = A)"
                .into(),
        }
    };

    Ok(EulerReport {
        chi_g: BigRationalField(chi_g.clone()),
        chi_h: BigRationalField(chi_h.clone()),
        shape: *shape,
        classification,
    })
}
