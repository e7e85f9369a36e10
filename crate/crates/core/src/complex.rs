//! Simplicial complexes stored dimension by dimension in colexicographic
//! order, and the clique (flag) complex of a graph.
//!
//! Colex order compares sorted vertex lists from the largest vertex down:
//! `{0,1} < {0,2} < {1,2} < {0,3}`. It is the one total order used for face
//! ordinals, boundary-matrix rows and columns, and every tie-break.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{clear_through, iter_bits, truncate_bits, Graph, InducedSubgraph, Vertex};

/// Colexicographic comparison of two sorted vertex lists of equal length.
#[inline]
pub fn colex_cmp(a: &[Vertex], b: &[Vertex]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

/// A nonempty, strictly increasing vertex list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Face(Vec<Vertex>);

impl Face {
    pub fn new(mut vertices: Vec<Vertex>) -> Result<Self> {
        vertices.sort_unstable();
        let before = vertices.len();
        vertices.dedup();
        if vertices.len() != before {
            return Err(Error::Invalid(format!("repeated vertex in face {vertices:?}")));
        }
        if vertices.is_empty() {
            return Err(Error::Invalid("empty face".into()));
        }
        Ok(Self(vertices))
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }
}

/// All faces of one dimension, flat, in strictly increasing colex order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaceList {
    arity: usize,
    verts: Vec<Vertex>,
}

impl FaceList {
    fn new(arity: usize) -> Self {
        Self {
            arity,
            verts: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.arity - 1
    }

    pub fn len(&self) -> usize {
        self.verts.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn get(&self, i: usize) -> &[Vertex] {
        &self.verts[i * self.arity..(i + 1) * self.arity]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, Vertex> {
        self.verts.chunks_exact(self.arity)
    }

    /// Ordinal of `face`, by binary search on the colex order.
    pub fn index_of(&self, face: &[Vertex]) -> Option<usize> {
        if face.len() != self.arity {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match colex_cmp(self.get(mid), face) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    fn push(&mut self, face: &[Vertex]) {
        debug_assert_eq!(face.len(), self.arity);
        self.verts.extend_from_slice(face);
    }
}

/// Per-dimension face counts `f_0, f_1, ...`, without trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FVector(pub Vec<u64>);

impl FVector {
    pub fn get(&self, k: usize) -> u64 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum (-1)^i f_i`.
    pub fn euler_characteristic(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &f)| if i % 2 == 0 { f as i64 } else { -(f as i64) })
            .sum()
    }
}

/// A finite simplicial complex, possibly cut off above some dimension.
///
/// `closed` records whether the stored dimensions are all there is: when it is
/// false there may be faces above `top_dim()` that were not enumerated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    faces: Vec<FaceList>,
    closed: bool,
}

impl SimplicialComplex {
    /// Downward closure of a list of facets.
    pub fn from_facets(facets: &[Face]) -> Self {
        let top = facets.iter().map(Face::dim).max();
        let Some(top) = top else {
            return Self {
                faces: Vec::new(),
                closed: true,
            };
        };
        let mut sets: Vec<BTreeSet<Vec<Vertex>>> = vec![BTreeSet::new(); top + 1];
        for facet in facets {
            let verts = facet.vertices();
            let m = verts.len();
            for mask in 1u64..(1u64 << m) {
                let sub: Vec<Vertex> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| verts[i]).collect();
                sets[sub.len() - 1].insert(sub);
            }
        }
        let faces = sets
            .into_iter()
            .enumerate()
            .map(|(d, set)| {
                let mut list = FaceList::new(d + 1);
                let mut sorted: Vec<Vec<Vertex>> = set.into_iter().collect();
                sorted.sort_unstable_by(|a, b| colex_cmp(a, b));
                for f in &sorted {
                    list.push(f);
                }
                list
            })
            .collect();
        Self { faces, closed: true }
    }

    /// Highest stored dimension with at least one face, if any.
    pub fn top_dim(&self) -> Option<usize> {
        self.faces.iter().rposition(|l| !l.is_empty())
    }

    /// Number of stored dimensions (including empty trailing ones).
    pub fn stored_dims(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self, k: usize) -> Option<&FaceList> {
        self.faces.get(k)
    }

    pub fn count(&self, k: usize) -> usize {
        self.faces.get(k).map_or(0, FaceList::len)
    }

    pub fn total_faces(&self) -> usize {
        self.faces.iter().map(FaceList::len).sum()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn vertex_count(&self) -> usize {
        self.count(0)
    }

    pub fn f_vector(&self) -> FVector {
        let top = self.top_dim().map_or(0, |t| t + 1);
        FVector(self.faces[..top].iter().map(|l| l.len() as u64).collect())
    }

    /// Whether `face` (sorted) is stored.
    pub fn contains(&self, face: &[Vertex]) -> bool {
        face.len()
            .checked_sub(1)
            .and_then(|d| self.faces.get(d))
            .is_some_and(|l| l.index_of(face).is_some())
    }

    /// Facets in increasing dimension then colex order, one per line with
    /// space-separated vertices.
    pub fn write_facets(&self, out: &mut impl std::fmt::Write) -> std::fmt::Result {
        for facet in self.facets() {
            let line: Vec<String> = facet.vertices().iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Maximal faces: stored faces not contained in any stored face one
    /// dimension up.
    pub fn facets(&self) -> Vec<Face> {
        let mut out = Vec::new();
        for d in 0..self.faces.len() {
            let mut covered = vec![false; self.faces[d].len()];
            if let Some(up) = self.faces.get(d + 1) {
                let mut sub = Vec::with_capacity(d + 1);
                for face in up.iter() {
                    for skip in 0..face.len() {
                        sub.clear();
                        sub.extend(face.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                        if let Some(i) = self.faces[d].index_of(&sub) {
                            covered[i] = true;
                        }
                    }
                }
            }
            for (i, face) in self.faces[d].iter().enumerate() {
                if !covered[i] {
                    out.push(Face(face.to_vec()));
                }
            }
        }
        out
    }
}

/// Resource guard for clique enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildLimits {
    pub max_faces_per_dim: usize,
}

impl Default for BuildLimits {
    fn default() -> Self {
        Self {
            max_faces_per_dim: 2_000_000,
        }
    }
}

/// The clique complex of a graph, enumerated through a dimension cap.
#[derive(Clone, Debug)]
pub struct CliqueComplex {
    graph: Graph,
    max_dim: usize,
    complex: SimplicialComplex,
    guard_hit: Option<usize>,
}

impl CliqueComplex {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Largest dimension whose faces are all stored.
    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    /// Dimension at which the face-count guard stopped enumeration.
    pub fn guard_hit(&self) -> Option<usize> {
        self.guard_hit
    }

    pub fn faces(&self, k: usize) -> Option<&FaceList> {
        self.complex.faces(k)
    }

    pub fn count(&self, k: usize) -> usize {
        self.complex.count(k)
    }

    pub fn f_vector(&self) -> FVector {
        self.complex.f_vector()
    }

    /// Whether every clique of the graph is stored.
    pub fn is_full(&self) -> bool {
        self.complex.is_closed()
    }

    /// Common neighbours of `face` that exceed its largest vertex, as a bit row.
    pub(crate) fn upper_extensions(&self, face: &[Vertex]) -> Vec<u64> {
        let mut row = common_row(&self.graph, face);
        if let Some(&m) = face.last() {
            clear_through(&mut row, m as usize);
        }
        row
    }
}

fn common_row(g: &Graph, face: &[Vertex]) -> Vec<u64> {
    let mut row = g.row(face[0]).to_vec();
    for &v in &face[1..] {
        for (a, b) in row.iter_mut().zip(g.row(v)) {
            *a &= b;
        }
    }
    row
}

pub fn build_clique_complex(g: &Graph, max_dim: usize) -> CliqueComplex {
    build_clique_complex_limited(g, max_dim, BuildLimits::default())
}

/// Enumerates cliques level by level. Each `d`-face `t`, taken in colex order,
/// is extended by every common neighbour of `t` below `min(t)`; the new faces
/// come out already in colex order, so no sort is needed. If a level would
/// exceed the face guard it is dropped and the complex stops one below it.
pub fn build_clique_complex_limited(g: &Graph, max_dim: usize, limits: BuildLimits) -> CliqueComplex {
    let n = g.n();
    let mut levels = Vec::new();
    let mut vertices = FaceList::new(1);
    for v in 0..n as Vertex {
        vertices.push(&[v]);
    }
    let mut guard_hit = None;
    if n > limits.max_faces_per_dim {
        guard_hit = Some(0);
    } else {
        levels.push(vertices);
    }
    let mut face = Vec::new();
    while guard_hit.is_none() && levels.len() <= max_dim {
        let prev = levels.last().expect("vertex level present");
        if prev.is_empty() {
            break;
        }
        let mut next = FaceList::new(prev.arity + 1);
        let mut over = false;
        for t in prev.iter() {
            let mut row = common_row(g, t);
            truncate_bits(&mut row, t[0] as usize);
            for x in iter_bits(&row) {
                face.clear();
                face.push(x);
                face.extend_from_slice(t);
                next.push(&face);
            }
            if next.len() > limits.max_faces_per_dim {
                over = true;
                break;
            }
        }
        if over {
            guard_hit = Some(levels.len());
        } else {
            levels.push(next);
        }
    }
    while levels.len() > 1 && levels.last().is_some_and(FaceList::is_empty) {
        levels.pop();
    }
    let closed = guard_hit.is_none()
        && match levels.last() {
            None => true,
            Some(top) => top.iter().all(|t| common_row(g, t).iter().all(|&w| w == 0)),
        };
    let stored = levels.len();
    let max_dim = if closed { max_dim } else { stored.saturating_sub(1) };
    CliqueComplex {
        graph: g.clone(),
        max_dim,
        complex: SimplicialComplex { faces: levels, closed },
        guard_hit,
    }
}

pub fn f_vector(x: &CliqueComplex) -> FVector {
    x.f_vector()
}

/// One class of k-faces under "share a (k-1)-face", closed transitively.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongComponent {
    /// Ordinals of the k-faces, increasing.
    pub faces: Vec<usize>,
    /// Number of distinct vertices used by the class.
    pub vertex_support: usize,
}

/// Partitions the k-faces of `x` into strongly connected classes, ordered by
/// their smallest face ordinal.
pub fn strongly_connected_components(x: &SimplicialComplex, k: usize) -> Vec<StrongComponent> {
    let Some(list) = x.faces(k) else {
        return Vec::new();
    };
    let m = list.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    if k == 0 {
        // All vertices share the empty face.
        for i in 1..m {
            parent[i] = 0;
        }
    } else {
        let lower = x.faces(k - 1).expect("complex is closed downward");
        let mut owner: Vec<Option<usize>> = vec![None; lower.len()];
        let mut sub = Vec::with_capacity(k);
        for (j, face) in list.iter().enumerate() {
            for skip in 0..face.len() {
                sub.clear();
                sub.extend(face.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                let s = lower.index_of(&sub).expect("subface stored");
                match owner[s] {
                    None => owner[s] = Some(j),
                    Some(o) => {
                        let (a, b) = (find(&mut parent, o), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        let r = find(&mut parent, j);
        let c = *slot[r].get_or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[c].push(j);
    }
    classes
        .into_iter()
        .map(|faces| {
            let support: BTreeSet<Vertex> = faces.iter().flat_map(|&j| list.get(j).iter().copied()).collect();
            StrongComponent {
                faces,
                vertex_support: support.len(),
            }
        })
        .collect()
}

/// Induced subgraph on the neighbours of `v`; its clique complex is the link
/// of `v`. `labels[i]` is the original id of link vertex `i`.
pub fn vertex_link_subgraph(g: &Graph, v: Vertex) -> Result<InducedSubgraph> {
    if v as usize >= g.n() {
        return Err(Error::Domain(format!("vertex {v} out of range for {} vertices", g.n())));
    }
    let nbrs: Vec<Vertex> = g.neighbors(v).collect();
    Ok(g.induced(&nbrs))
}
