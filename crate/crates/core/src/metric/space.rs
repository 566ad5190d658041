//! Finite metric spaces: dense distance arrays and weighted graphs with
//! shortest-path semantics, plus the shared Dijkstra kernel.

use crate::{Error, Result};
use std::collections::BinaryHeap;

/// Anything that can enumerate weighted neighbors of a node.
pub trait Neighbors {
    fn num_nodes(&self) -> usize;
    fn for_each_neighbor(&self, u: usize, f: impl FnMut(usize, f64));
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    node: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // reversed: BinaryHeap pops the smallest distance first
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Value-initialized multi-source Dijkstra:
/// `field(x) = min_i (value_i + d(seed_i, x))`.
///
/// Seed values may be negative. Nodes whose field value would exceed `cap`
/// are left at infinity.
pub fn dijkstra_field<N: Neighbors + ?Sized>(
    g: &N,
    seeds: &[(usize, f64)],
    cap: Option<f64>,
) -> Vec<f64> {
    let n = g.num_nodes();
    let cap = cap.unwrap_or(f64::INFINITY);
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::with_capacity(1024.max(seeds.len() * 2));
    for &(s, v) in seeds {
        if v < dist[s] && v <= cap {
            dist[s] = v;
            heap.push(HeapItem { dist: v, node: s as u32 });
        }
    }
    while let Some(HeapItem { dist: du, node }) = heap.pop() {
        let u = node as usize;
        if du > dist[u] {
            continue;
        }
        g.for_each_neighbor(u, |v, w| {
            debug_assert!(w >= 0.0);
            let nd = du + w;
            if nd < dist[v] && nd <= cap {
                dist[v] = nd;
                heap.push(HeapItem { dist: nd, node: v as u32 });
            }
        });
    }
    dist
}

/// Undirected weighted graph in adjacency-list form.
#[derive(Debug, Clone)]
pub struct AdjGraph {
    adj: Vec<Vec<(u32, f64)>>,
}

impl AdjGraph {
    pub fn new(nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); nodes];
        for &(a, b, w) in edges {
            if a >= nodes || b >= nodes {
                return Err(Error::invalid("edge endpoint out of range"));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid("edge weights must be positive and finite"));
            }
            adj[a].push((b as u32, w));
            adj[b].push((a as u32, w));
        }
        Ok(AdjGraph { adj })
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().map(move |&(v, w)| (u, v as usize, w)))
            .filter(|&(u, v, _)| u < v)
    }
}

impl Neighbors for AdjGraph {
    fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    fn for_each_neighbor(&self, u: usize, mut f: impl FnMut(usize, f64)) {
        for &(v, w) in &self.adj[u] {
            f(v as usize, w);
        }
    }
}

/// Full symmetric distance array.
#[derive(Debug, Clone)]
pub struct DenseMetric {
    n: usize,
    d: Vec<f64>,
}

impl DenseMetric {
    /// Validates symmetry, zero diagonal and the triangle inequality (all
    /// triples up to n = 48, a seeded sample beyond).
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: d.len() });
        }
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::invalid("distance diagonal must be zero"));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::invalid("distances must be finite and nonnegative"));
                }
                if (v - d[j * n + i]).abs() > 1e-12 * scale {
                    return Err(Error::invalid("distance array must be symmetric"));
                }
            }
        }
        let check = |i: usize, j: usize, k: usize| -> Result<()> {
            if d[i * n + j] > d[i * n + k] + d[k * n + j] + 1e-12 * scale {
                return Err(Error::invalid(format!(
                    "triangle inequality fails on ({i},{j},{k})"
                )));
            }
            Ok(())
        };
        if n <= 48 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        check(i, j, k)?;
                    }
                }
            }
        } else {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7472);
            for _ in 0..20_000 {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(DenseMetric { n, d })
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

/// Finite metric space in either representation.
#[derive(Debug, Clone)]
pub enum FiniteMetricSpace {
    Dense(DenseMetric),
    Graph(AdjGraph),
}

/// Common surface of the discrete spaces: value-initialized distance
/// fields, slopes of scalar functions and bond enumeration.
pub trait Space {
    fn node_count(&self) -> usize;
    fn value_field(&self, seeds: &[(usize, f64)], cap: Option<f64>) -> Vec<f64>;
    /// Lipschitz constant of `values` with respect to the space.
    fn max_slope(&self, values: &[f64]) -> f64;
    /// Visits the comparisons that define `max_slope`: edges for graphs,
    /// all pairs for dense arrays.
    fn for_each_bond(&self, f: &mut dyn FnMut(usize, usize, f64));
}

impl Space for AdjGraph {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn value_field(&self, seeds: &[(usize, f64)], cap: Option<f64>) -> Vec<f64> {
        dijkstra_field(self, seeds, cap)
    }

    fn max_slope(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (u, v, w) in self.edges() {
            worst = worst.max((values[u] - values[v]).abs() / w);
        }
        worst
    }

    fn for_each_bond(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for (u, v, w) in self.edges() {
            f(u, v, w);
        }
    }
}

impl Space for DenseMetric {
    fn node_count(&self) -> usize {
        self.n
    }

    fn value_field(&self, seeds: &[(usize, f64)], cap: Option<f64>) -> Vec<f64> {
        let cap = cap.unwrap_or(f64::INFINITY);
        (0..self.n)
            .map(|x| {
                let best = seeds
                    .iter()
                    .map(|&(s, v)| v + self.dist(s, x))
                    .fold(f64::INFINITY, f64::min);
                if best <= cap {
                    best
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }

    fn max_slope(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.dist(i, j);
                if d > 0.0 {
                    worst = worst.max((values[i] - values[j]).abs() / d);
                } else if values[i] != values[j] {
                    return f64::INFINITY;
                }
            }
        }
        worst
    }

    fn for_each_bond(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.dist(i, j);
                if d > 0.0 {
                    f(i, j, d);
                }
            }
        }
    }
}

impl Space for FiniteMetricSpace {
    fn node_count(&self) -> usize {
        match self {
            FiniteMetricSpace::Dense(d) => d.node_count(),
            FiniteMetricSpace::Graph(g) => Space::node_count(g),
        }
    }

    fn value_field(&self, seeds: &[(usize, f64)], cap: Option<f64>) -> Vec<f64> {
        match self {
            FiniteMetricSpace::Dense(d) => d.value_field(seeds, cap),
            FiniteMetricSpace::Graph(g) => g.value_field(seeds, cap),
        }
    }

    fn max_slope(&self, values: &[f64]) -> f64 {
        match self {
            FiniteMetricSpace::Dense(d) => d.max_slope(values),
            FiniteMetricSpace::Graph(g) => g.max_slope(values),
        }
    }

    fn for_each_bond(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        match self {
            FiniteMetricSpace::Dense(d) => d.for_each_bond(f),
            FiniteMetricSpace::Graph(g) => g.for_each_bond(f),
        }
    }
}

/// Exact multi-source shortest-path distances; disconnected nodes are left
/// at infinity.
pub fn multi_dijkstra<S: Space + ?Sized>(space: &S, sources: &[usize]) -> Result<Vec<f64>> {
    if sources.is_empty() {
        return Err(Error::invalid("source set must be nonempty"));
    }
    for &s in sources {
        if s >= space.node_count() {
            return Err(Error::invalid(format!("source {s} out of range")));
        }
    }
    let seeds: Vec<(usize, f64)> = sources.iter().map(|&s| (s, 0.0)).collect();
    Ok(space.value_field(&seeds, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize) -> AdjGraph {
        let edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        AdjGraph::new(n, &edges).unwrap()
    }

    #[test]
    fn single_source_line() {
        let g = path_graph(5);
        let d = multi_dijkstra(&g, &[0]).unwrap();
        assert_eq!(d, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn whole_space_as_source_gives_zeros() {
        let g = path_graph(4);
        let d = multi_dijkstra(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(d, vec![0.0; 4]);
    }

    #[test]
    fn disconnected_nodes_are_infinite() {
        let g = AdjGraph::new(3, &[(0, 1, 1.0)]).unwrap();
        let d = multi_dijkstra(&g, &[0]).unwrap();
        assert!(d[2].is_infinite());
    }

    #[test]
    fn dense_validation() {
        let ok = DenseMetric::new(2, vec![0.0, 1.0, 1.0, 0.0]);
        assert!(ok.is_ok());
        let asym = DenseMetric::new(2, vec![0.0, 1.0, 2.0, 0.0]);
        assert!(asym.is_err());
        // triangle violation
        let bad = DenseMetric::new(3, vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]);
        assert!(bad.is_err());
    }

    #[test]
    fn value_initialized_field_matches_dense() {
        let g = path_graph(4);
        let dists = multi_dijkstra(&g, &[0]).unwrap();
        let _ = dists;
        let seeds = [(0usize, -2.0), (3usize, 0.5)];
        let field = g.value_field(&seeds, None);
        for (x, &got) in field.iter().enumerate() {
            let want = (-2.0 + x as f64).min(0.5 + (3.0 - x as f64).abs());
            assert!((got - want).abs() < 1e-12);
        }
    }
}
