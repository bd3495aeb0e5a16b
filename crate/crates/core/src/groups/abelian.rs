//! Free abelian groups Z^n as exponent vectors — the normal form is the
//! vector itself.

use super::Marked;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbelianElt {
    coords: Vec<i64>,
}

impl AbelianElt {
    pub fn coords(&self) -> &[i64] {
        &self.coords
    }
}

#[derive(Debug, Clone)]
pub struct FreeAbelian {
    rank: usize,
}

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

impl FreeAbelian {
    pub fn new(rank: usize) -> Self {
        assert!((1..=NAMES.len()).contains(&rank), "rank out of range");
        FreeAbelian { rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn from_coords(&self, coords: &[i64]) -> AbelianElt {
        assert_eq!(coords.len(), self.rank, "coordinate length mismatch");
        AbelianElt { coords: coords.to_vec() }
    }
}

impl Marked for FreeAbelian {
    type Elt = AbelianElt;

    fn name(&self) -> String {
        format!("Z^{}", self.rank)
    }

    fn generators(&self) -> Vec<(String, AbelianElt)> {
        (0..self.rank)
            .map(|i| {
                let mut coords = vec![0i64; self.rank];
                coords[i] = 1;
                (NAMES[i].to_string(), AbelianElt { coords })
            })
            .collect()
    }

    fn identity(&self) -> AbelianElt {
        AbelianElt { coords: vec![0; self.rank] }
    }

    fn mul(&self, a: &AbelianElt, b: &AbelianElt) -> AbelianElt {
        AbelianElt {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| x.checked_add(*y).expect("coordinate overflow"))
                .collect(),
        }
    }

    fn inv(&self, a: &AbelianElt) -> AbelianElt {
        AbelianElt { coords: a.coords.iter().map(|x| -x).collect() }
    }

    fn label(&self, a: &AbelianElt) -> String {
        let body: Vec<String> = a.coords.iter().map(|c| c.to_string()).collect();
        format!("({})", body.join(","))
    }
}
