//! Rips complexes of finite metric windows.

use super::{BasedFreeModule, ChainComplex, ComplexError, WindowInfo};
use crate::matrix::SparseIntMatrix;
use crate::window::MetricWindow;
use std::collections::HashMap;

/// P_r(window): simplices are vertex sets of diameter ≤ r, up to `dim_cap`.
/// Vertices keep the window's order; a simplex is its sorted vertex list,
/// its control point is its first vertex, and boundary signs come from
/// position parity in that order.
pub fn rips_complex(
    window: &MetricWindow,
    r: u32,
    dim_cap: usize,
) -> Result<ChainComplex, ComplexError> {
    let n = window.n();
    let mut layers: Vec<Vec<Vec<usize>>> = Vec::new();
    layers.push((0..n).map(|v| vec![v]).collect());
    for dim in 1..=dim_cap {
        let prev = &layers[dim - 1];
        let mut next = Vec::new();
        for simplex in prev {
            let last = *simplex.last().expect("nonempty simplex");
            for v in last + 1..n {
                if simplex.iter().all(|&u| window.dist(u, v) <= r) {
                    let mut extended = simplex.clone();
                    extended.push(v);
                    next.push(extended);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layers.push(next);
    }

    let mut modules = Vec::new();
    let mut diffs = Vec::new();
    let mut prev_index: HashMap<Vec<usize>, usize> = HashMap::new();
    for (dim, layer) in layers.iter().enumerate() {
        let labels = layer
            .iter()
            .map(|s| s.iter().map(|v| window.labels[*v].clone()).collect::<Vec<_>>().join("|"))
            .collect();
        let control = layer.iter().map(|s| s[0]).collect();
        modules.push(BasedFreeModule {
            labels,
            control: Some(control),
            members: Some(layer.clone()),
        });
        if dim > 0 {
            let mut triplets = Vec::new();
            for (col, simplex) in layer.iter().enumerate() {
                for (pos, _) in simplex.iter().enumerate() {
                    let mut face = simplex.clone();
                    face.remove(pos);
                    let row = prev_index[&face];
                    let sign = if pos % 2 == 0 { 1 } else { -1 };
                    triplets.push((row, col, sign));
                }
            }
            diffs.push(SparseIntMatrix::from_triplets(
                layers[dim - 1].len(),
                layer.len(),
                triplets,
            )?);
        }
        prev_index = layer.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    }

    let complex = ChainComplex {
        modules,
        diffs,
        window: Some(WindowInfo {
            labels: window.labels.clone(),
            depth: window.depth.clone(),
            radius: window.radius,
        }),
    };
    complex.validate()?;
    Ok(complex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::relative_collar_complex;

    fn line_window(lo: i64, hi: i64) -> MetricWindow {
        MetricWindow::from_integer_points(&(lo..=hi).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn three_points_fill_a_triangle() {
        let w = MetricWindow::from_matrix(
            vec!["p".into(), "q".into(), "r".into()],
            vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]],
            0,
        )
        .unwrap();
        let c = rips_complex(&w, 1, 2).unwrap();
        assert_eq!(c.f_vector(), vec![3, 3, 1]);
    }

    #[test]
    fn line_at_scale_one_is_a_path() {
        let c = rips_complex(&line_window(-5, 5), 1, 3).unwrap();
        assert_eq!(c.f_vector(), vec![11, 10]);
    }

    #[test]
    fn line_at_scale_two_fills_triangles() {
        // Oracle: edges are pairs at distance ≤ 2 (10 + 9), triangles are
        // the consecutive triples {x, x+1, x+2} (9).
        let c = rips_complex(&line_window(-5, 5), 2, 2).unwrap();
        assert_eq!(c.f_vector(), vec![11, 19, 9]);
    }

    #[test]
    fn dim_cap_truncates() {
        let c = rips_complex(&line_window(-5, 5), 2, 1).unwrap();
        assert_eq!(c.f_vector(), vec![11, 19]);
    }

    #[test]
    fn boundary_squares_to_zero_with_parity_signs() {
        let c = rips_complex(&line_window(-3, 3), 2, 3).unwrap();
        c.validate().unwrap();
        // An edge boundary is (head - tail) with the position-parity signs.
        let d1 = &c.diffs[0];
        let mut col0: Vec<i64> = (0..c.dim(0)).map(|i| d1.get(i, 0)).collect();
        col0.retain(|v| *v != 0);
        assert_eq!(col0.iter().sum::<i64>(), 0);
    }

    #[test]
    fn collar_on_line_keeps_interior() {
        // Window [-5..5], w = 1: collar vertices are exactly {-5, 5}.
        let c = rips_complex(&line_window(-5, 5), 1, 3).unwrap();
        let (rel, census) = relative_collar_complex(&c, 1).unwrap();
        assert_eq!(census.killed, vec![2, 0]);
        assert_eq!(rel.f_vector(), vec![9, 10]);
        rel.validate().unwrap();
    }

    #[test]
    fn collar_requires_window() {
        let c = ChainComplex::interval();
        assert!(matches!(relative_collar_complex(&c, 1), Err(ComplexError::NoWindow)));
    }
}
