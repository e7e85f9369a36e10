//! Small bundled complexes with known homology.

use crate::complex::SimplicialComplex;
use crate::io::parse_facets;

const RP2: &str = include_str!("../fixtures/rp2.facets");
const OCTAHEDRA: [&str; 3] = [
    include_str!("../fixtures/octahedron_k1.facets"),
    include_str!("../fixtures/octahedron_k2.facets"),
    include_str!("../fixtures/octahedron_k3.facets"),
];

/// The 6-vertex, 10-triangle projective plane: `H̃_1(Z) = Z/2`, mod-2 Betti
/// numbers `(0, 1, 1)`, rational Betti numbers all zero.
pub fn rp2() -> SimplicialComplex {
    parse_facets(RP2).expect("bundled fixture parses")
}

/// Boundary of the `(k+1)`-dimensional cross-polytope for `k` in `1..=3`.
pub fn octahedron(k: usize) -> Option<SimplicialComplex> {
    OCTAHEDRA
        .get(k.checked_sub(1)?)
        .map(|s| parse_facets(s).expect("bundled fixture parses"))
}
