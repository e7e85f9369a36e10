//! Structural certificates for nonvanishing and vanishing of `H̃_k`.
//!
//! A sphere certificate is an induced octahedral k-sphere skeleton
//! `u_1..u_{k+1}, v_1..v_{k+1}` (all edges except `u_i v_i`) whose `u`-side
//! has no common neighbour, and such that every other vertex `y` misses both
//! ends of some pair `i`. Sending such a `y` to `u_i` for the least such `i`
//! gives a simplicial retraction of the clique complex onto the sphere, so
//! `H̃_k` has a free summand.
//!
//! Requiring `y` to miss both `u_i` and `v_i` (not only `u_i`) is what makes
//! the map simplicial: if `y ~ v_i` and `r(y) = u_i`, the edge `y v_i` would
//! map onto the non-edge `u_i v_i`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graph::{iter_bits, k_core, Graph, Vertex};
use crate::rng::{RandomSource, Stream};

/// Graph on `2(k+1)` vertices: all pairs except `{i, i + k + 1}`.
pub fn octahedral_skeleton(k: usize) -> Graph {
    let m = k + 1;
    let mut edges = Vec::new();
    for v in 0..2 * m {
        for u in 0..v {
            if v != u + m {
                edges.push((u as Vertex, v as Vertex));
            }
        }
    }
    Graph::from_edges(2 * m, &edges).expect("skeleton edges are valid")
}

/// Edge density of the octahedral skeleton and the exponent of its
/// appearance threshold `p = n^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityExponent {
    pub vertices: u64,
    pub edges: u64,
    pub density: Ratio<u64>,
    pub exponent: Ratio<i64>,
}

pub fn density_exponent(k: usize) -> Result<DensityExponent> {
    if k == 0 {
        return Err(domain("the 0-sphere skeleton has no edges; density exponent undefined"));
    }
    let m = k as u64 + 1;
    let vertices = 2 * m;
    let edges = vertices * (vertices - 1) / 2 - m;
    let density = Ratio::new(edges, vertices);
    let exponent = -Ratio::new(*density.denom() as i64, *density.numer() as i64);
    Ok(DensityExponent {
        vertices,
        edges,
        density,
        exponent,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereCertificate {
    pub k: usize,
    pub u: Vec<Vertex>,
    pub v: Vec<Vertex>,
}

impl SphereCertificate {
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.u.iter().chain(&self.v).copied()
    }
}

/// The first certificate clause a graph violates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateViolation {
    Shape,
    VertexOutOfRange(Vertex),
    RepeatedVertex(Vertex),
    /// `u_i` adjacent to `v_i`.
    MatchedPairAdjacent(Vertex, Vertex),
    /// Two vertices from different pairs are not adjacent.
    MissingEdge(Vertex, Vertex),
    /// A vertex adjacent to every `u_i`.
    CommonNeighbor(Vertex),
    /// An outside vertex touching some end of every pair.
    ExternalVertex(Vertex),
}

impl std::fmt::Display for CertificateViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Shape => write!(f, "u and v must both have k+1 vertices"),
            Self::VertexOutOfRange(x) => write!(f, "vertex {x} is not in the graph"),
            Self::RepeatedVertex(x) => write!(f, "vertex {x} appears twice"),
            Self::MatchedPairAdjacent(a, b) => write!(f, "matched pair {a},{b} is adjacent"),
            Self::MissingEdge(a, b) => write!(f, "octahedron edge {a},{b} is missing"),
            Self::CommonNeighbor(w) => write!(f, "vertex {w} is a common neighbour of the u-set"),
            Self::ExternalVertex(y) => {
                write!(f, "vertex {y} is adjacent to an end of every pair")
            }
        }
    }
}

/// Checks every certificate clause against `g`.
pub fn check_certificate(g: &Graph, cert: &SphereCertificate) -> std::result::Result<(), CertificateViolation> {
    let m = cert.k + 1;
    if cert.u.len() != m || cert.v.len() != m {
        return Err(CertificateViolation::Shape);
    }
    let mut in_s = vec![false; g.n()];
    for x in cert.vertices() {
        let slot = in_s.get_mut(x as usize).ok_or(CertificateViolation::VertexOutOfRange(x))?;
        if std::mem::replace(slot, true) {
            return Err(CertificateViolation::RepeatedVertex(x));
        }
    }
    for i in 0..m {
        if g.adjacent(cert.u[i], cert.v[i]) {
            return Err(CertificateViolation::MatchedPairAdjacent(cert.u[i], cert.v[i]));
        }
        for j in 0..i {
            for (a, b) in [
                (cert.u[i], cert.u[j]),
                (cert.u[i], cert.v[j]),
                (cert.v[i], cert.u[j]),
                (cert.v[i], cert.v[j]),
            ] {
                if !g.adjacent(a, b) {
                    return Err(CertificateViolation::MissingEdge(a, b));
                }
            }
        }
    }
    let mut common = g.row(cert.u[0]).to_vec();
    for &x in &cert.u[1..] {
        for (a, b) in common.iter_mut().zip(g.row(x)) {
            *a &= b;
        }
    }
    if let Some(w) = iter_bits(&common).next() {
        return Err(CertificateViolation::CommonNeighbor(w));
    }
    if let Some(y) = external_violators(g, cert, &in_s).next() {
        return Err(CertificateViolation::ExternalVertex(y));
    }
    Ok(())
}

/// Outside vertices adjacent to `u_i` or `v_i` for every `i`.
fn external_violators<'a>(
    g: &'a Graph,
    cert: &SphereCertificate,
    in_s: &'a [bool],
) -> impl Iterator<Item = Vertex> + 'a {
    let mut touch_all = vec![!0u64; g.words()];
    for (&a, &b) in cert.u.iter().zip(&cert.v) {
        for ((t, ra), rb) in touch_all.iter_mut().zip(g.row(a)).zip(g.row(b)) {
            *t &= ra | rb;
        }
    }
    let n = g.n();
    iter_bits_owned(touch_all).filter(move |&y| (y as usize) < n && !in_s[y as usize])
}

fn iter_bits_owned(row: Vec<u64>) -> impl Iterator<Item = Vertex> {
    (0..row.len()).flat_map(move |w| {
        let mut rest = row[w];
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let bit = rest.trailing_zeros();
            rest &= rest - 1;
            Some(w as u32 * 64 + bit)
        })
    })
}

/// Expansions allowed per restart before giving up on the start vertex.
const NODES_PER_RESTART: usize = 256;

/// Randomized search for a sphere certificate: each restart picks a random
/// start vertex, then extends pair by pair inside the running common
/// neighbourhood with shuffled backtracking, and tests every `u`/`v`
/// orientation of a completed octahedron. `None` means the budget ran out.
pub fn find_sphere_certificate(
    g: &Graph,
    k: usize,
    budget: usize,
    rng: RandomSource,
) -> Option<SphereCertificate> {
    let n = g.n();
    let m = k + 1;
    if n < 2 * m {
        return None;
    }
    let mut stream = rng.stream();
    for _ in 0..budget {
        let start = stream.below(n) as Vertex;
        if g.degree(start) < 2 * k {
            continue;
        }
        let mut search = Search {
            g,
            m,
            stream: &mut stream,
            nodes: 0,
            chosen: vec![start],
        };
        let all = vec![!0u64; g.words()];
        if let Some(cert) = search.extend(&all) {
            return Some(cert);
        }
    }
    None
}

struct Search<'a> {
    g: &'a Graph,
    m: usize,
    stream: &'a mut Stream,
    nodes: usize,
    /// Vertices so far, pairs stored consecutively; may end with a lone
    /// first vertex of the pair being chosen.
    chosen: Vec<Vertex>,
}

impl Search<'_> {
    /// `common` is the common neighbourhood of the completed pairs.
    fn extend(&mut self, common: &[u64]) -> Option<SphereCertificate> {
        if self.nodes >= NODES_PER_RESTART {
            return None;
        }
        self.nodes += 1;
        let g = self.g;
        let pairs_done = self.chosen.len() / 2;
        if self.chosen.len() == 2 * self.m {
            return self.orient();
        }
        let need_after = 2 * (self.m - pairs_done - 1);
        if self.chosen.len() % 2 == 0 {
            let mut cands: Vec<Vertex> = iter_bits(common).filter(|&x| (x as usize) < g.n()).collect();
            self.stream.shuffle(&mut cands);
            for a in cands {
                self.chosen.push(a);
                if let Some(c) = self.extend(common) {
                    return Some(c);
                }
                self.chosen.pop();
                if self.nodes >= NODES_PER_RESTART {
                    return None;
                }
            }
            return None;
        }
        let a = *self.chosen.last().expect("first vertex of the pair");
        let mut cands: Vec<Vertex> = iter_bits(common)
            .filter(|&x| (x as usize) < g.n() && x != a && !g.adjacent(a, x))
            .collect();
        self.stream.shuffle(&mut cands);
        for b in cands {
            let next: Vec<u64> = common
                .iter()
                .zip(g.row(a))
                .zip(g.row(b))
                .map(|((c, ra), rb)| c & ra & rb)
                .collect();
            let room: usize = next.iter().map(|w| w.count_ones() as usize).sum();
            if room < need_after {
                continue;
            }
            self.chosen.push(b);
            if let Some(c) = self.extend(&next) {
                return Some(c);
            }
            self.chosen.pop();
            if self.nodes >= NODES_PER_RESTART {
                return None;
            }
        }
        None
    }

    fn orient(&mut self) -> Option<SphereCertificate> {
        let m = self.m;
        let base_u: Vec<Vertex> = self.chosen.iter().step_by(2).copied().collect();
        let base_v: Vec<Vertex> = self.chosen.iter().skip(1).step_by(2).copied().collect();
        let orientations = 1u64 << m.min(20);
        for mask in 0..orientations {
            let (u, v): (Vec<Vertex>, Vec<Vertex>) = (0..m)
                .map(|i| {
                    if mask >> i & 1 == 0 {
                        (base_u[i], base_v[i])
                    } else {
                        (base_v[i], base_u[i])
                    }
                })
                .unzip();
            let cert = SphereCertificate { k: m - 1, u, v };
            match check_certificate(self.g, &cert) {
                Ok(()) => return Some(cert),
                // The outside-vertex clause does not depend on orientation.
                Err(CertificateViolation::ExternalVertex(_)) => return None,
                Err(_) => {}
            }
        }
        None
    }
}

/// Vertex map onto the certificate's octahedron; `assignment[x]` is `r(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetractionMap {
    pub assignment: Vec<Vertex>,
}

/// Fixes the octahedron and sends each outside vertex `y` to `u_i` for the
/// least `i` with `y` adjacent to neither `u_i` nor `v_i`.
pub fn build_retraction(g: &Graph, cert: &SphereCertificate) -> Result<RetractionMap> {
    check_certificate(g, cert).map_err(|v| Error::Invalid(format!("certificate rejected: {v}")))?;
    let mut assignment: Vec<Vertex> = (0..g.n() as Vertex).collect();
    let mut in_s = vec![false; g.n()];
    for x in cert.vertices() {
        in_s[x as usize] = true;
    }
    for y in 0..g.n() as Vertex {
        if in_s[y as usize] {
            continue;
        }
        let i = (0..=cert.k)
            .find(|&i| !g.adjacent(y, cert.u[i]) && !g.adjacent(y, cert.v[i]))
            .expect("certificate guarantees a free pair");
        assignment[y as usize] = cert.u[i];
    }
    Ok(RetractionMap { assignment })
}

/// Whether `r` fixes the octahedron pointwise, lands in it, and maps every
/// edge of `g` to a vertex or an edge.
pub fn verify_retraction(g: &Graph, r: &RetractionMap, cert: &SphereCertificate) -> bool {
    if r.assignment.len() != g.n() {
        return false;
    }
    let mut in_s = vec![false; g.n()];
    for x in cert.vertices() {
        match in_s.get_mut(x as usize) {
            Some(slot) => *slot = true,
            None => return false,
        }
    }
    let fixes = cert.vertices().all(|x| r.assignment[x as usize] == x);
    let lands = r.assignment.iter().all(|&y| (y as usize) < g.n() && in_s[y as usize]);
    fixes
        && lands
        && g.edges().into_iter().all(|(x, y)| {
            let (a, b) = (r.assignment[x as usize], r.assignment[y as usize]);
            a == b || g.adjacent(a, b)
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum VanishingReason {
    /// A nonzero k-cycle needs at least `2k + 2` vertices.
    TooFewVertices { n: usize },
    /// A minimal-support k-cycle spans a subgraph of minimum degree `2k`.
    EmptyCore { degree: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum VanishingVerdict {
    GuaranteedZero(VanishingReason),
    Unknown,
}

impl VanishingVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Self::GuaranteedZero(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::GuaranteedZero(VanishingReason::TooFewVertices { .. }) => "zero_small",
            Self::GuaranteedZero(VanishingReason::EmptyCore { .. }) => "zero_core",
            Self::Unknown => "unknown",
        }
    }
}

/// One-sided test for `β̃_k = 0`.
pub fn vanishing_certificate(g: &Graph, k: usize) -> Result<VanishingVerdict> {
    if k == 0 {
        return Err(domain("vanishing certificates are defined for k >= 1"));
    }
    if g.n() < 2 * k + 2 {
        return Ok(VanishingVerdict::GuaranteedZero(VanishingReason::TooFewVertices { n: g.n() }));
    }
    if k_core(g, 2 * k).graph.n() == 0 {
        return Ok(VanishingVerdict::GuaranteedZero(VanishingReason::EmptyCore { degree: 2 * k }));
    }
    Ok(VanishingVerdict::Unknown)
}

/// Certificate plus retraction, as written for audit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateAudit {
    pub k: usize,
    pub u: Vec<Vertex>,
    pub v: Vec<Vertex>,
    pub assignment: Vec<Vertex>,
}

impl CertificateAudit {
    pub fn new(cert: &SphereCertificate, r: &RetractionMap) -> Self {
        Self {
            k: cert.k,
            u: cert.u.clone(),
            v: cert.v.clone(),
            assignment: r.assignment.clone(),
        }
    }
}
