//! Simple undirected graphs on `0..n` stored as adjacency bit rows, the
//! G(n, p) sampler, and the graph-level hypothesis checks (common neighbours,
//! degree cores, neighbourhood intersections).

use std::collections::VecDeque;

use crate::error::{domain, Error, Result};
use crate::rng::RandomSource;

pub type Vertex = u32;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Iterates the set bits of a bit row in increasing order.
pub(crate) fn iter_bits(row: &[u64]) -> impl Iterator<Item = Vertex> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let bit = rest.trailing_zeros();
            rest &= rest - 1;
            Some((w as u32) * 64 + bit)
        })
    })
}

/// Clears every bit at position `>= limit`.
pub(crate) fn truncate_bits(row: &mut [u64], limit: usize) {
    let full = limit / 64;
    let rem = limit % 64;
    if full < row.len() {
        row[full] &= if rem == 0 { 0 } else { (1u64 << rem) - 1 };
        for w in &mut row[full + 1..] {
            *w = 0;
        }
    }
}

/// Clears every bit at position `<= limit`.
pub(crate) fn clear_through(row: &mut [u64], limit: usize) {
    let full = limit / 64;
    let len = row.len();
    for w in row.iter_mut().take(full.min(len)) {
        *w = 0;
    }
    if full < row.len() {
        let rem = limit % 64;
        row[full] &= if rem == 63 { 0 } else { !((1u64 << (rem + 1)) - 1) };
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = words_for(n);
        Self {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for v in 1..n {
            for u in 0..v {
                g.set_edge(u, v);
            }
        }
        g
    }

    /// Builds a graph from an edge list; rejects loops and out-of-range ids.
    /// Repeated edges are merged.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            let (u, v) = (u as usize, v as usize);
            if u >= n || v >= n {
                return Err(Error::Invalid(format!(
                    "edge {{{u},{v}}} out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::Invalid(format!("self-loop at vertex {u}")));
            }
            g.set_edge(u, v);
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n as Vertex)
            .map(|i| (i, (i + 1) % n as Vertex))
            .collect();
        Self::from_edges(n, &edges).expect("cycle edges are valid")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n as Vertex).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    fn set_edge(&mut self, u: usize, v: usize) {
        self.rows[u * self.words + v / 64] |= 1 << (v % 64);
        self.rows[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    /// Neighbourhood of `v` as a bit row of `words()` words.
    pub fn row(&self, v: Vertex) -> &[u64] {
        let start = v as usize * self.words;
        &self.rows[start..start + self.words]
    }

    #[inline]
    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        let (u, v) = (u as usize, v as usize);
        self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        iter_bits(self.row(v))
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in colexicographic order (by `v`, then `u`).
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for v in 0..self.n as Vertex {
            let mut below = self.row(v).to_vec();
            truncate_bits(&mut below, v as usize);
            out.extend(iter_bits(&below).map(|u| (u, v)));
        }
        out
    }

    /// Induced subgraph on `vertices` (any order, duplicates ignored); vertex
    /// `i` of the result is `labels[i]` here, with labels sorted increasingly.
    pub fn induced(&self, vertices: &[Vertex]) -> InducedSubgraph {
        let mut labels = vertices.to_vec();
        labels.sort_unstable();
        labels.dedup();
        let mut graph = Graph::empty(labels.len());
        for (i, &a) in labels.iter().enumerate() {
            for (j, &b) in labels.iter().enumerate().skip(i + 1) {
                if self.adjacent(a, b) {
                    graph.set_edge(i, j);
                }
            }
        }
        InducedSubgraph { graph, labels }
    }

    /// Disjoint union; the vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n as Vertex;
        let mut edges = self.edges();
        edges.extend(other.edges().into_iter().map(|(u, v)| (u + shift, v + shift)));
        Graph::from_edges(self.n + other.n, &edges).expect("union edges are valid")
    }

    /// Number of connected components (isolated vertices count).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            queue.push_back(s as Vertex);
            while let Some(x) = queue.pop_front() {
                for y in self.neighbors(x) {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        count
    }
}

/// A subgraph together with the original id of each of its vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub graph: Graph,
    pub labels: Vec<Vertex>,
}

/// Samples G(n, p). Unordered pairs are visited in colexicographic order
/// (`{0,1}, {0,2}, {1,2}, {0,3}, ...`) and each consumes exactly one 64-bit
/// word of `rng`; the pair is an edge iff that word, read as a uniform in
/// `[0, 1)`, is below `p`. Fixing the source therefore couples samples across
/// `p`: the edge set grows monotonically with `p`.
pub fn generate_gnp(n: usize, p: f64, rng: RandomSource) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("edge probability {p} outside [0, 1]")));
    }
    let mut g = Graph::empty(n);
    let mut stream = rng.stream();
    for v in 1..n {
        for u in 0..v {
            if stream.bernoulli(p) {
                g.set_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Result of [`common_neighbor_all`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommonNeighborCheck {
    Holds,
    /// The lexicographically first `l`-subset without a common neighbour.
    Fails(Vec<Vertex>),
}

impl CommonNeighborCheck {
    pub fn holds(&self) -> bool {
        matches!(self, CommonNeighborCheck::Holds)
    }
}

/// Checks whether every `l`-subset of vertices has a common neighbour outside
/// the subset. Subsets are walked in lexicographic order while the running
/// intersection of neighbour rows is kept; an empty partial intersection
/// settles the whole subtree at once.
pub fn common_neighbor_all(g: &Graph, l: usize) -> Result<CommonNeighborCheck> {
    if l == 0 || l > g.n() {
        return Err(domain(format!(
            "subset size {l} must lie in 1..={} for this graph",
            g.n()
        )));
    }
    let mut chosen = Vec::with_capacity(l);
    let all = vec![!0u64; g.words()];
    match search_common(g, l, 0, &all, &mut chosen) {
        Some(witness) => Ok(CommonNeighborCheck::Fails(witness)),
        None => Ok(CommonNeighborCheck::Holds),
    }
}

fn search_common(
    g: &Graph,
    l: usize,
    start: usize,
    common: &[u64],
    chosen: &mut Vec<Vertex>,
) -> Option<Vec<Vertex>> {
    let remaining = l - chosen.len();
    if remaining == 0 {
        return None;
    }
    let mut next = vec![0u64; common.len()];
    for v in start..=g.n() - remaining {
        let row = g.row(v as Vertex);
        let mut any = false;
        for ((out, a), b) in next.iter_mut().zip(common).zip(row) {
            *out = a & b;
            any |= *out != 0;
        }
        chosen.push(v as Vertex);
        if !any {
            // Every completion fails; the smallest one comes first.
            let mut witness = chosen.clone();
            witness.extend((v + 1..).take(remaining - 1).map(|x| x as Vertex));
            return Some(witness);
        }
        if let Some(w) = search_common(g, l, v + 1, &next, chosen) {
            return Some(w);
        }
        chosen.pop();
    }
    None
}

/// The `d`-core: the largest induced subgraph with minimum degree `>= d`,
/// obtained by repeatedly deleting vertices of smaller degree.
pub fn k_core(g: &Graph, d: usize) -> InducedSubgraph {
    let n = g.n();
    let mut degree: Vec<usize> = (0..n as Vertex).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut stack: Vec<Vertex> = (0..n as Vertex).filter(|&v| degree[v as usize] < d).collect();
    for &v in &stack {
        removed[v as usize] = true;
    }
    while let Some(v) = stack.pop() {
        for u in g.neighbors(v) {
            let u = u as usize;
            if removed[u] {
                continue;
            }
            degree[u] -= 1;
            if degree[u] < d {
                removed[u] = true;
                stack.push(u as Vertex);
            }
        }
    }
    let keep: Vec<Vertex> = (0..n as Vertex).filter(|&v| !removed[v as usize]).collect();
    g.induced(&keep)
}

/// `{ w not in U : w adjacent to every vertex of U }`; all vertices when `U`
/// is empty.
pub fn common_neighborhood(g: &Graph, set: &[Vertex]) -> Vec<Vertex> {
    if set.is_empty() {
        return (0..g.n() as Vertex).collect();
    }
    let mut acc = g.row(set[0]).to_vec();
    for &v in &set[1..] {
        for (a, b) in acc.iter_mut().zip(g.row(v)) {
            *a &= b;
        }
    }
    iter_bits(&acc).collect()
}

/// Whether the common neighbourhood of `set` induces a connected, nonempty
/// subgraph.
pub fn link_intersection_connected(g: &Graph, set: &[Vertex]) -> bool {
    let common = common_neighborhood(g, set);
    if common.is_empty() {
        return false;
    }
    g.induced(&common).graph.component_count() == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k5_plus_pendant() -> Graph {
        let mut edges = Graph::complete(5).edges();
        edges.push((4, 5));
        Graph::from_edges(6, &edges).unwrap()
    }

    #[test]
    fn gnp_extremes() {
        let rng = RandomSource::new(11, 0);
        assert_eq!(generate_gnp(6, 0.0, rng).unwrap().edge_count(), 0);
        assert_eq!(generate_gnp(6, 1.0, rng).unwrap().edge_count(), 15);
        assert!(generate_gnp(6, 1.5, rng).is_err());
        assert!(generate_gnp(6, -0.1, rng).is_err());
        assert!(generate_gnp(6, f64::NAN, rng).is_err());
        assert_eq!(generate_gnp(0, 0.5, rng).unwrap().n(), 0);
    }

    #[test]
    fn gnp_symmetric_and_loop_free() {
        let g = generate_gnp(70, 0.3, RandomSource::new(5, 9)).unwrap();
        for u in 0..70 {
            assert!(!g.adjacent(u, u));
            for v in 0..70 {
                assert_eq!(g.adjacent(u, v), g.adjacent(v, u));
            }
        }
    }

    #[test]
    fn edges_are_colex() {
        let g = Graph::complete(4);
        assert_eq!(
            g.edges(),
            vec![(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]
        );
    }

    #[test]
    fn common_neighbor_examples() {
        assert!(common_neighbor_all(&Graph::complete(4), 2).unwrap().holds());
        assert_eq!(
            common_neighbor_all(&Graph::path(3), 2).unwrap(),
            CommonNeighborCheck::Fails(vec![0, 1])
        );
        assert!(common_neighbor_all(&Graph::cycle(4), 1).unwrap().holds());
        assert!(common_neighbor_all(&Graph::cycle(4), 5).is_err());
        assert!(common_neighbor_all(&Graph::cycle(4), 0).is_err());
    }

    #[test]
    fn common_neighbor_witness_from_pruned_prefix() {
        // Vertex 0 is isolated: {0, 1, 2} is the first failing triple and is
        // found from the empty prefix intersection at depth one.
        let g = Graph::from_edges(5, &[(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        assert_eq!(
            common_neighbor_all(&g, 3).unwrap(),
            CommonNeighborCheck::Fails(vec![0, 1, 2])
        );
    }

    #[test]
    fn cores() {
        let c4 = Graph::cycle(4);
        assert_eq!(k_core(&c4, 2).graph, c4);
        assert_eq!(k_core(&Graph::path(7), 2).graph.n(), 0);
        let core = k_core(&k5_plus_pendant(), 4);
        assert_eq!(core.graph, Graph::complete(5));
        assert_eq!(core.labels, vec![0, 1, 2, 3, 4]);
        assert_eq!(k_core(&c4, 0).graph, c4);
    }

    #[test]
    fn common_neighborhood_examples() {
        assert_eq!(common_neighborhood(&Graph::complete(5), &[0, 1]), vec![2, 3, 4]);
        assert_eq!(common_neighborhood(&Graph::cycle(4), &[0, 2]), vec![1, 3]);
        assert_eq!(common_neighborhood(&Graph::path(3), &[0, 2]), vec![1]);
        assert_eq!(common_neighborhood(&Graph::path(3), &[]), vec![0, 1, 2]);
    }

    #[test]
    fn link_intersection_examples() {
        assert!(link_intersection_connected(&Graph::complete(5), &[0, 1]));
        assert!(!link_intersection_connected(&Graph::cycle(4), &[0, 2]));
        let k4_minus = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(!link_intersection_connected(&k4_minus, &[2, 3]));
        assert!(!link_intersection_connected(&Graph::path(3), &[0, 1]));
    }

    #[test]
    fn bit_helpers() {
        let mut row = vec![!0u64; 2];
        truncate_bits(&mut row, 70);
        assert_eq!(iter_bits(&row).count(), 70);
        clear_through(&mut row, 63);
        assert_eq!(iter_bits(&row).collect::<Vec<_>>(), (64..70).collect::<Vec<_>>());
        let mut row = vec![!0u64; 2];
        clear_through(&mut row, 0);
        assert_eq!(iter_bits(&row).next(), Some(1));
        let mut row = vec![!0u64; 1];
        truncate_bits(&mut row, 64);
        assert_eq!(iter_bits(&row).count(), 64);
    }
}
