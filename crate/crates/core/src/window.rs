//! Finite windows: the desk-scale stand-ins for infinite metric spaces.
//!
//! A [`MetricWindow`] is a finite pointed metric space (dense distance
//! matrix); Rips complexes and coarse-connectivity scans run on it. A
//! [`GraphWindow`] is a finite pointed graph; ends estimation runs on it.
//! Both carry a depth function (distance from the basepoint) and a radius,
//! which is what collar and boundary constructions key on: a window is a
//! picture of an infinite object, and everything near its frontier is
//! suspect.

use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("distance matrix is not square ({0} rows, row {1} has {2} entries)")]
    NotSquare(usize, usize, usize),
    #[error("distance matrix asymmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("nonzero diagonal at {0}")]
    NonzeroDiagonal(usize),
    #[error("basepoint {0} out of range for {1} points")]
    BadBasepoint(usize, usize),
    #[error("edge ({0}, {1}) out of range for {2} vertices")]
    BadEdge(usize, usize, usize),
    #[error("window graph is disconnected: vertex {0} unreachable from basepoint")]
    Disconnected(usize),
    #[error("empty window")]
    Empty,
}

/// Where a window came from; downstream verdicts cite this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSource {
    /// Ball in a marked group's Cayley graph.
    Ball,
    /// Scale-s graph of a quotient-space window.
    Quotient { scale: u32 },
    /// Handed in directly.
    Explicit,
}

impl WindowSource {
    pub fn label(&self) -> String {
        match self {
            WindowSource::Ball => "ball".into(),
            WindowSource::Quotient { scale } => format!("quotient(scale={scale})"),
            WindowSource::Explicit => "explicit".into(),
        }
    }
}

/// Finite pointed metric space.
#[derive(Debug, Clone)]
pub struct MetricWindow {
    pub labels: Vec<String>,
    dist: Vec<Vec<u32>>,
    pub basepoint: usize,
    /// Distance from the basepoint, per point.
    pub depth: Vec<u32>,
    /// Max depth: how far the window sees.
    pub radius: u32,
}

impl MetricWindow {
    pub fn from_matrix(
        labels: Vec<String>,
        dist: Vec<Vec<u32>>,
        basepoint: usize,
    ) -> Result<Self, WindowError> {
        let n = dist.len();
        if n == 0 {
            return Err(WindowError::Empty);
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(WindowError::NotSquare(n, i, row.len()));
            }
            if row[i] != 0 {
                return Err(WindowError::NonzeroDiagonal(i));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if dist[i][j] != dist[j][i] {
                    return Err(WindowError::Asymmetric(i, j));
                }
            }
        }
        if basepoint >= n {
            return Err(WindowError::BadBasepoint(basepoint, n));
        }
        let depth = dist[basepoint].clone();
        let radius = depth.iter().copied().max().unwrap_or(0);
        Ok(MetricWindow { labels, dist, basepoint, depth, radius })
    }

    /// Window of integer points with |a - b| distance; basepoint is the
    /// first point of minimal absolute value.
    pub fn from_integer_points(points: &[i64]) -> Result<Self, WindowError> {
        if points.is_empty() {
            return Err(WindowError::Empty);
        }
        let labels = points.iter().map(|p| p.to_string()).collect();
        let dist = points
            .iter()
            .map(|a| points.iter().map(|b| a.abs_diff(*b) as u32).collect())
            .collect();
        let basepoint = (0..points.len())
            .min_by_key(|&i| (points[i].unsigned_abs(), i))
            .expect("nonempty");
        Self::from_matrix(labels, dist, basepoint)
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn dist(&self, i: usize, j: usize) -> u32 {
        self.dist[i][j]
    }
}

/// Finite pointed graph, all edges length 1.
#[derive(Debug, Clone)]
pub struct GraphWindow {
    pub labels: Vec<String>,
    pub adj: Vec<Vec<usize>>,
    pub basepoint: usize,
    pub depth: Vec<u32>,
    pub radius: u32,
    pub source: WindowSource,
    /// Vertices considered "at the frontier" when the window was built.
    /// Empty means the window claims to show a bounded space in full.
    pub boundary: Vec<usize>,
}

impl GraphWindow {
    /// `boundary_margin = None` declares the window complete (bounded
    /// space); `Some(m)` marks vertices of depth > radius - m as frontier.
    pub fn new(
        labels: Vec<String>,
        edges: &[(usize, usize)],
        basepoint: usize,
        source: WindowSource,
        boundary_margin: Option<u32>,
    ) -> Result<Self, WindowError> {
        let n = labels.len();
        if n == 0 {
            return Err(WindowError::Empty);
        }
        if basepoint >= n {
            return Err(WindowError::BadBasepoint(basepoint, n));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(WindowError::BadEdge(a, b, n));
            }
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for nbrs in adj.iter_mut() {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        let depth = bfs_depths(&adj, basepoint);
        if let Some(bad) = depth.iter().position(|&d| d == u32::MAX) {
            return Err(WindowError::Disconnected(bad));
        }
        let radius = depth.iter().copied().max().unwrap_or(0);
        let boundary = match boundary_margin {
            None => Vec::new(),
            Some(m) => {
                let cutoff = radius.saturating_sub(m);
                (0..n).filter(|&v| depth[v] > cutoff).collect()
            }
        };
        Ok(GraphWindow { labels, adj, basepoint, depth, radius, source, boundary })
    }

    /// Ball of the given radius in the infinite regular tree.
    pub fn regular_tree(degree: usize, radius: u32) -> Self {
        assert!(degree >= 2, "tree degree must be at least 2");
        let mut labels = vec!["0".to_string()];
        let mut edges = Vec::new();
        let mut frontier = vec![0usize];
        for _layer in 1..=radius {
            let mut next = Vec::new();
            for &v in &frontier {
                let children = if v == 0 { degree } else { degree - 1 };
                for _ in 0..children {
                    let id = labels.len();
                    labels.push(id.to_string());
                    edges.push((v, id));
                    next.push(id);
                }
            }
            frontier = next;
        }
        GraphWindow::new(labels, &edges, 0, WindowSource::Explicit, Some(1))
            .expect("tree construction is well-formed")
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// All-pairs BFS view, for Rips constructions on graph windows.
    pub fn metric_window(&self) -> MetricWindow {
        let n = self.n();
        let dist: Vec<Vec<u32>> = crate::par::map_range(n, |i| bfs_depths(&self.adj, i));
        MetricWindow {
            labels: self.labels.clone(),
            dist,
            basepoint: self.basepoint,
            depth: self.depth.clone(),
            radius: self.radius,
        }
    }
}

/// BFS distances from `start`; unreachable vertices get `u32::MAX`.
pub fn bfs_depths(adj: &[Vec<usize>], start: usize) -> Vec<u32> {
    let mut depth = vec![u32::MAX; adj.len()];
    depth[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if depth[w] == u32::MAX {
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_window_depths() {
        let w = MetricWindow::from_integer_points(&[-2, -1, 0, 1, 2]).unwrap();
        assert_eq!(w.basepoint, 2);
        assert_eq!(w.radius, 2);
        assert_eq!(w.dist(0, 4), 4);
        assert_eq!(w.depth, vec![2, 1, 0, 1, 2]);
    }

    #[test]
    fn matrix_validation() {
        let asym = MetricWindow::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![0, 1], vec![2, 0]],
            0,
        );
        assert_eq!(asym.unwrap_err(), WindowError::Asymmetric(0, 1));
        let diag = MetricWindow::from_matrix(vec!["a".into()], vec![vec![3]], 0);
        assert_eq!(diag.unwrap_err(), WindowError::NonzeroDiagonal(0));
    }

    #[test]
    fn tree_layer_counts() {
        let t = GraphWindow::regular_tree(3, 4);
        // 1 + 3 + 6 + 12 + 24
        assert_eq!(t.n(), 46);
        assert_eq!(t.radius, 4);
        let leaves = t.depth.iter().filter(|&&d| d == 4).count();
        assert_eq!(leaves, 24);
        assert_eq!(t.boundary.len(), 24);
        // interior vertices all have degree 3
        for v in 0..t.n() {
            if t.depth[v] < 4 {
                assert_eq!(t.adj[v].len(), 3, "vertex {v}");
            }
        }
    }

    #[test]
    fn disconnected_graph_rejected() {
        let out = GraphWindow::new(
            vec!["a".into(), "b".into(), "c".into()],
            &[(0, 1)],
            0,
            WindowSource::Explicit,
            None,
        );
        assert_eq!(out.unwrap_err(), WindowError::Disconnected(2));
    }

    #[test]
    fn graph_metric_view() {
        let path = GraphWindow::new(
            (0..4).map(|i| i.to_string()).collect(),
            &[(0, 1), (1, 2), (2, 3)],
            0,
            WindowSource::Explicit,
            Some(1),
        )
        .unwrap();
        let mw = path.metric_window();
        assert_eq!(mw.dist(0, 3), 3);
        assert_eq!(mw.dist(3, 1), 2);
        assert_eq!(mw.radius, 3);
    }
}
