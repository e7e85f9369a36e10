//! Random clique complexes X(n, p): sampling G(n, p), enumerating the clique
//! complex, exact reduced homology, discrete Morse fields, structural
//! certificates, closed-form moments, and seeded Monte Carlo sweeps.

pub mod analytic;
pub mod complex;
pub mod detectors;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod harness;
pub mod homology;
pub mod io;
pub mod morse;
pub mod rng;
pub mod snf;

pub use complex::{build_clique_complex, CliqueComplex, FVector, Face, SimplicialComplex};
pub use error::{Error, Result};
pub use graph::{generate_gnp, Graph, Vertex};
pub use homology::{reduced_betti, CoefficientSpec, HomologySummary};
pub use rng::RandomSource;
