//! Coefficient rings for homology: ℤ, ℚ, and prime fields ℤ/p.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "ring", content = "p", rename_all = "snake_case")]
pub enum RingSpec {
    Integers,
    Rationals,
    /// Prime field ℤ/p.
    ModP(u64),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
}

impl RingSpec {
    pub fn validate(&self) -> Result<(), RingError> {
        match *self {
            RingSpec::ModP(p) if !is_prime(p) => Err(RingError::NotPrime(p)),
            _ => Ok(()),
        }
    }

    pub fn is_field(&self) -> bool {
        !matches!(self, RingSpec::Integers)
    }

    pub fn label(&self) -> String {
        match self {
            RingSpec::Integers => "Z".into(),
            RingSpec::Rationals => "Q".into(),
            RingSpec::ModP(p) => format!("Z/{p}"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_gate() {
        assert!(RingSpec::ModP(2).validate().is_ok());
        assert!(RingSpec::ModP(3).validate().is_ok());
        assert!(RingSpec::ModP(97).validate().is_ok());
        assert_eq!(RingSpec::ModP(1).validate(), Err(RingError::NotPrime(1)));
        assert_eq!(RingSpec::ModP(6).validate(), Err(RingError::NotPrime(6)));
        assert!(RingSpec::Integers.validate().is_ok());
    }

    #[test]
    fn field_tags() {
        assert!(!RingSpec::Integers.is_field());
        assert!(RingSpec::Rationals.is_field());
        assert!(RingSpec::ModP(5).is_field());
        assert_eq!(RingSpec::ModP(5).label(), "Z/5");
    }
}
