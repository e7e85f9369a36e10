//! Reduced simplicial homology: boundary matrices, ranks over prime fields by
//! sparse column reduction, integer homology through Smith normal form, and
//! the Euler and Morse-inequality cross-checks.
//!
//! Everything uses the reduced (augmented) convention: `∂_0` sends each vertex
//! to the generator of the (-1)-chains, so `β̃_0 = components - 1` and the
//! empty complex has `β̃_{-1} = 1`.

use std::borrow::Cow;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::complex::{FVector, SimplicialComplex};
use crate::error::{domain, Error, Result};
use crate::snf::{smith_normal_form, IntMatrix};

/// 2^31 - 1.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;
/// Second prime used for cross-checks.
pub const CHECK_PRIME: u64 = 1_000_003;
/// Default per-dimension face limit for the integer backend.
pub const DEFAULT_SNF_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSpec {
    Prime(u64),
    Integers,
}

impl CoefficientSpec {
    /// A prime field; the modulus must be a prime below 2^32.
    pub fn prime(p: u64) -> Result<Self> {
        if p >= 1 << 32 {
            return Err(domain(format!("modulus {p} must be below 2^32")));
        }
        if !is_prime(p) {
            return Err(domain(format!("modulus {p} is not prime")));
        }
        Ok(Self::Prime(p))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CoefficientSpec::Prime(p) => Self::prime(p).map(|_| ()),
            CoefficientSpec::Integers => Ok(()),
        }
    }
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        Self::Prime(DEFAULT_PRIME)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `∂_k` with columns indexed by k-faces and rows by (k-1)-faces, both in
/// colex order. Each column holds `(row, sign)` sorted by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseBoundaryMatrix {
    pub dim: usize,
    pub rows: usize,
    pub columns: Vec<Vec<(u32, i8)>>,
}

impl SparseBoundaryMatrix {
    pub fn to_dense(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for &(r, s) in col {
                m.set(r as usize, j, s as i64);
            }
        }
        m
    }
}

/// `∂_k` for `1 <= k <= top`: deleting the i-th smallest vertex of a face
/// carries sign `(-1)^i`.
pub fn boundary_matrix(x: &SimplicialComplex, k: usize) -> Result<SparseBoundaryMatrix> {
    let top = x.top_dim().unwrap_or(0);
    if k == 0 || k > top {
        return Err(domain(format!("boundary dimension {k} outside 1..={top}")));
    }
    let upper = x.faces(k).expect("dimension stored");
    let lower = x.faces(k - 1).expect("dimension stored");
    let mut sub = Vec::with_capacity(k);
    let columns = upper
        .iter()
        .map(|face| {
            let mut col: Vec<(u32, i8)> = (0..face.len())
                .map(|skip| {
                    sub.clear();
                    sub.extend(face.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                    let row = lower.index_of(&sub).expect("complex is closed downward");
                    (row as u32, if skip % 2 == 0 { 1 } else { -1 })
                })
                .collect();
            col.sort_unstable_by_key(|&(r, _)| r);
            col
        })
        .collect();
    Ok(SparseBoundaryMatrix {
        dim: k,
        rows: lower.len(),
        columns,
    })
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Incremental column reduction over GF(p).
///
/// Columns are reduced in the order they are offered; the pivot of a column
/// is its earliest nonzero row. A stored column has its pivot normalized to 1
/// and all other entries on later rows, so eliminating the current pivot only
/// ever introduces later rows and one pass through a row heap finishes the
/// column.
struct ColumnReducer {
    p: u64,
    pivot_of_row: Vec<u32>,
    stored: Vec<Vec<(u32, u64)>>,
    acc: Vec<u64>,
    queued: Vec<bool>,
    heap: BinaryHeap<Reverse<u32>>,
}

const NO_PIVOT: u32 = u32::MAX;

impl ColumnReducer {
    fn new(rows: usize, p: u64) -> Self {
        Self {
            p,
            pivot_of_row: vec![NO_PIVOT; rows],
            stored: Vec::new(),
            acc: vec![0; rows],
            queued: vec![false; rows],
            heap: BinaryHeap::new(),
        }
    }

    fn rank(&self) -> usize {
        self.stored.len()
    }

    fn push_entry(&mut self, row: u32, value: u64) {
        let r = row as usize;
        self.acc[r] = (self.acc[r] + value) % self.p;
        if !self.queued[r] {
            self.queued[r] = true;
            self.heap.push(Reverse(row));
        }
    }

    /// Reduces one column; returns whether it was independent of the
    /// columns seen so far.
    fn add_column(&mut self, entries: &[(u32, i8)]) -> bool {
        let p = self.p;
        for &(r, s) in entries {
            self.push_entry(r, if s > 0 { 1 } else { p - 1 });
        }
        while let Some(Reverse(row)) = self.heap.pop() {
            let r = row as usize;
            self.queued[r] = false;
            let c = std::mem::take(&mut self.acc[r]);
            if c == 0 {
                continue;
            }
            let j = self.pivot_of_row[r];
            if j == NO_PIVOT {
                let scale = inv_mod(c, p);
                let mut col = Vec::with_capacity(self.heap.len() + 1);
                col.push((row, 1));
                while let Some(Reverse(rest)) = self.heap.pop() {
                    let q = rest as usize;
                    self.queued[q] = false;
                    let v = std::mem::take(&mut self.acc[q]);
                    if v != 0 {
                        col.push((rest, mul_mod(v, scale, p)));
                    }
                }
                col[1..].sort_unstable_by_key(|&(r, _)| r);
                self.pivot_of_row[r] = self.stored.len() as u32;
                self.stored.push(col);
                return true;
            }
            let neg = p - c;
            let col = std::mem::take(&mut self.stored[j as usize]);
            for &(q, v) in &col[1..] {
                self.push_entry(q, mul_mod(neg, v, p));
            }
            self.stored[j as usize] = col;
        }
        false
    }
}

/// Rank of a boundary matrix over GF(p). When there are fewer rows than
/// columns the coboundary is reduced instead, rows taken in reverse colex
/// order; otherwise columns in colex order. Stops once `cap` independent
/// vectors are found.
pub fn rank_mod_p(m: &SparseBoundaryMatrix, p: u64, cap: Option<usize>) -> usize {
    let cap = cap.unwrap_or(usize::MAX).min(m.rows).min(m.columns.len());
    if cap == 0 {
        return 0;
    }
    let (mut red, vectors) = if m.rows < m.columns.len() {
        let mut rows: Vec<Vec<(u32, i8)>> = vec![Vec::new(); m.rows];
        for (j, col) in m.columns.iter().enumerate() {
            for &(r, s) in col {
                rows[r as usize].push((j as u32, s));
            }
        }
        rows.reverse();
        (ColumnReducer::new(m.columns.len(), p), Cow::Owned(rows))
    } else {
        (ColumnReducer::new(m.rows, p), Cow::Borrowed(&m.columns))
    };
    for v in vectors.iter() {
        red.add_column(v);
        if red.rank() == cap {
            break;
        }
    }
    red.rank()
}

/// Reduced Betti numbers and, for integer coefficients, torsion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologySummary {
    pub coeff: CoefficientSpec,
    /// `β̃_0, ..., β̃_D` for the stored dimensions.
    pub reduced_betti: Vec<u64>,
    /// Whether each entry of `reduced_betti` is exact; an entry is inexact
    /// when the faces one dimension above it were not enumerated.
    pub exact: Vec<bool>,
    /// `β̃_{-1}`: one for the empty complex, zero otherwise.
    pub reduced_minus_one: u64,
    /// Invariant factors greater than one, per dimension (integers only).
    pub torsion: Option<Vec<Vec<BigUint>>>,
}

impl HomologySummary {
    pub fn betti(&self, k: usize) -> u64 {
        self.reduced_betti.get(k).copied().unwrap_or(0)
    }

    /// Exact at `k`: stored and not truncated, or above everything stored in
    /// a closed complex.
    pub fn is_exact(&self, k: usize) -> bool {
        self.exact.get(k).copied().unwrap_or(self.is_untruncated())
    }

    pub fn is_untruncated(&self) -> bool {
        self.exact.iter().all(|&e| e)
    }
}

/// Reduced Betti numbers `β̃_k = f_k - rank ∂_k - rank ∂_{k+1}`.
///
/// For a prime field the ranks come from sparse column reduction; the rank of
/// `∂_{k+1}` is capped at `f_k - rank ∂_k`, which lets the reduction stop as
/// soon as the cycles are exhausted. For the integers each boundary goes
/// through Smith normal form under the default size guard.
pub fn reduced_betti(x: &SimplicialComplex, coeff: CoefficientSpec) -> Result<HomologySummary> {
    coeff.validate()?;
    let f = x.f_vector();
    let dims = f.len();
    let closed = x.is_closed();
    let mut ranks = vec![0usize; dims + 1];
    let mut torsion = vec![Vec::new(); dims];
    if dims > 0 {
        ranks[0] = 1;
    }
    for k in 1..dims {
        let m = boundary_matrix(x, k)?;
        match coeff {
            CoefficientSpec::Prime(p) => {
                let cap = f.get(k - 1) as usize - ranks[k - 1];
                ranks[k] = rank_mod_p(&m, p, Some(cap));
            }
            CoefficientSpec::Integers => {
                guard_size(x, k, DEFAULT_SNF_LIMIT)?;
                let snf = smith_normal_form(&m.to_dense());
                ranks[k] = snf.rank();
                torsion[k - 1] = snf.torsion();
            }
        }
    }
    let reduced_betti = (0..dims)
        .map(|k| f.get(k) - ranks[k] as u64 - ranks[k + 1] as u64)
        .collect();
    let exact = (0..dims).map(|k| k + 1 < dims || closed).collect();
    Ok(HomologySummary {
        coeff,
        reduced_betti,
        exact,
        reduced_minus_one: u64::from(dims == 0),
        torsion: matches!(coeff, CoefficientSpec::Integers).then_some(torsion),
    })
}

fn guard_size(x: &SimplicialComplex, k: usize, limit: usize) -> Result<()> {
    for d in [k.saturating_sub(1), k] {
        let faces = x.count(d);
        if faces > limit {
            return Err(Error::TooLarge { dim: d, faces, limit });
        }
    }
    Ok(())
}

/// Rank and torsion of `H̃_k` over the integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerHomology {
    pub rank: u64,
    pub torsion: Vec<BigUint>,
}

/// `H̃_k(X; Z)` from the Smith forms of `∂_k` and `∂_{k+1}`. Refuses when a
/// dimension involved holds more than `limit` faces, and when the faces above
/// `k` were not enumerated.
pub fn integer_homology(x: &SimplicialComplex, k: usize, limit: usize) -> Result<IntegerHomology> {
    let f = x.f_vector();
    if k >= f.len() {
        if x.is_closed() {
            return Ok(IntegerHomology {
                rank: 0,
                torsion: Vec::new(),
            });
        }
        return Err(domain(format!("dimension {k} lies above the enumerated faces")));
    }
    if k + 1 == f.len() && !x.is_closed() {
        return Err(domain(format!("dimension {k} is truncated; enumerate one dimension higher")));
    }
    for d in [k.saturating_sub(1), k, k + 1] {
        let faces = x.count(d);
        if faces > limit {
            return Err(Error::TooLarge { dim: d, faces, limit });
        }
    }
    let rank_k = if k == 0 {
        1
    } else {
        smith_normal_form(&boundary_matrix(x, k)?.to_dense()).rank()
    };
    let (rank_up, torsion) = if k + 1 < f.len() {
        let snf = smith_normal_form(&boundary_matrix(x, k + 1)?.to_dense());
        (snf.rank(), snf.torsion())
    } else {
        (0, Vec::new())
    };
    Ok(IntegerHomology {
        rank: f.get(k) - rank_k as u64 - rank_up as u64,
        torsion,
    })
}

/// Outcome of a cross-check that may not apply to truncated input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn failed(self) -> bool {
        self == Self::Fail
    }
}

/// `Σ(-1)^i f_i = Σ(-1)^i β_i` with unreduced `β_0 = β̃_0 + 1`. Skipped when
/// any Betti number is truncated.
pub fn euler_check(f: &FVector, h: &HomologySummary) -> CheckStatus {
    if !h.is_untruncated() {
        return CheckStatus::Skipped;
    }
    let mut betti_side: i64 = h
        .reduced_betti
        .iter()
        .enumerate()
        .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
        .sum();
    if !f.is_empty() {
        betti_side += 1;
    }
    CheckStatus::from_bool(betti_side == f.euler_characteristic())
}

/// `-f_{k-1} + f_k - f_{k+1} <= β̃_k <= f_k`, reading `f_{-1} = 1` for the
/// augmented complex.
pub fn morse_inequality_check(f: &FVector, h: &HomologySummary, k: usize) -> CheckStatus {
    if !h.is_exact(k) {
        return CheckStatus::Skipped;
    }
    let fk = f.get(k) as i64;
    let below = if k == 0 { i64::from(!f.is_empty()) } else { f.get(k - 1) as i64 };
    let lower = -below + fk - f.get(k + 1) as i64;
    let b = h.betti(k) as i64;
    CheckStatus::from_bool(lower <= b && b <= fk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_clique_complex;
    use crate::detectors::octahedral_skeleton;
    use crate::fixtures;
    use crate::graph::Graph;

    fn betti(g: &Graph, max_dim: usize) -> Vec<u64> {
        let x = build_clique_complex(g, max_dim);
        reduced_betti(x.complex(), CoefficientSpec::default()).unwrap().reduced_betti
    }

    #[test]
    fn prime_validation() {
        assert!(CoefficientSpec::prime(DEFAULT_PRIME).is_ok());
        assert!(CoefficientSpec::prime(CHECK_PRIME).is_ok());
        assert!(CoefficientSpec::prime(2).is_ok());
        assert!(CoefficientSpec::prime(1).is_err());
        assert!(CoefficientSpec::prime(1_000_001).is_err());
        assert!(CoefficientSpec::prime((1 << 32) + 15).is_err());
    }

    #[test]
    fn triangle_boundaries() {
        let x = build_clique_complex(&Graph::complete(3), 2);
        let d1 = boundary_matrix(x.complex(), 1).unwrap();
        assert_eq!(d1.columns.len(), 3);
        for col in &d1.columns {
            assert_eq!(col.len(), 2);
            assert_eq!(col[0].1 + col[1].1, 0);
        }
        let d2 = boundary_matrix(x.complex(), 2).unwrap();
        // Edges in colex order: {0,1}, {0,2}, {1,2}.
        assert_eq!(d2.columns, vec![vec![(0, 1), (1, -1), (2, 1)]]);
        assert!(boundary_matrix(x.complex(), 0).is_err());
        assert!(boundary_matrix(x.complex(), 3).is_err());
    }

    #[test]
    fn betti_examples() {
        assert_eq!(betti(&Graph::complete(6), 6), vec![0; 6]);
        assert_eq!(betti(&octahedral_skeleton(2), 3), vec![0, 0, 1]);
        let two_squares = Graph::cycle(4).disjoint_union(&Graph::cycle(4));
        assert_eq!(betti(&two_squares, 2), vec![1, 2]);
        assert_eq!(betti(&Graph::empty(4), 1), vec![3]);
    }

    #[test]
    fn empty_complex() {
        let x = build_clique_complex(&Graph::empty(0), 2);
        let h = reduced_betti(x.complex(), CoefficientSpec::default()).unwrap();
        assert_eq!(h.reduced_minus_one, 1);
        assert!(h.reduced_betti.is_empty());
        assert_eq!(euler_check(&x.f_vector(), &h), CheckStatus::Pass);
    }

    #[test]
    fn truncation_flags() {
        let x = build_clique_complex(&Graph::complete(5), 2);
        let h = reduced_betti(x.complex(), CoefficientSpec::default()).unwrap();
        assert_eq!(h.exact, vec![true, true, false]);
        assert_eq!(&h.reduced_betti[..2], &[0, 0]);
        assert_eq!(euler_check(&x.f_vector(), &h), CheckStatus::Skipped);
        assert_eq!(morse_inequality_check(&x.f_vector(), &h, 2), CheckStatus::Skipped);
    }

    #[test]
    fn euler_and_morse_examples() {
        for g in [Graph::complete(4), Graph::cycle(4)] {
            let x = build_clique_complex(&g, 4);
            let h = reduced_betti(x.complex(), CoefficientSpec::default()).unwrap();
            assert_eq!(euler_check(&x.f_vector(), &h), CheckStatus::Pass);
            assert_eq!(morse_inequality_check(&x.f_vector(), &h, 1), CheckStatus::Pass);
        }
        let x = build_clique_complex(&Graph::cycle(4), 4);
        let h = reduced_betti(x.complex(), CoefficientSpec::default()).unwrap();
        let mut wrong = h.clone();
        wrong.reduced_betti[1] = 0;
        assert_eq!(euler_check(&x.f_vector(), &wrong), CheckStatus::Fail);
        wrong.reduced_betti[1] = 5;
        assert_eq!(morse_inequality_check(&x.f_vector(), &wrong, 1), CheckStatus::Fail);
    }

    #[test]
    fn rp2_mod_two_versus_odd_prime() {
        let rp2 = fixtures::rp2();
        let mod2 = reduced_betti(&rp2, CoefficientSpec::prime(2).unwrap()).unwrap();
        let mod_big = reduced_betti(&rp2, CoefficientSpec::prime(CHECK_PRIME).unwrap()).unwrap();
        assert_eq!(mod2.reduced_betti, vec![0, 1, 1]);
        assert_eq!(mod_big.reduced_betti, vec![0, 0, 0]);
        let z = integer_homology(&rp2, 1, DEFAULT_SNF_LIMIT).unwrap();
        assert_eq!(z.rank, 0);
        assert_eq!(z.torsion, vec![BigUint::from(2u8)]);
        let over_z = reduced_betti(&rp2, CoefficientSpec::Integers).unwrap();
        assert_eq!(over_z.reduced_betti, vec![0, 0, 0]);
        assert_eq!(over_z.torsion.unwrap()[1], vec![BigUint::from(2u8)]);
    }

    #[test]
    fn integer_homology_examples() {
        let oct = build_clique_complex(&octahedral_skeleton(2), 3);
        let z = integer_homology(oct.complex(), 2, DEFAULT_SNF_LIMIT).unwrap();
        assert_eq!((z.rank, z.torsion.len()), (1, 0));
        let c4 = build_clique_complex(&Graph::cycle(4), 2);
        let z = integer_homology(c4.complex(), 1, DEFAULT_SNF_LIMIT).unwrap();
        assert_eq!((z.rank, z.torsion.len()), (1, 0));
        let z = integer_homology(c4.complex(), 0, DEFAULT_SNF_LIMIT).unwrap();
        assert_eq!(z.rank, 0);
    }

    #[test]
    fn integer_guard() {
        let x = build_clique_complex(&Graph::complete(12), 3);
        let err = integer_homology(x.complex(), 1, 50).unwrap_err();
        assert!(matches!(err, Error::TooLarge { .. }), "{err}");
        let capped = build_clique_complex(&Graph::complete(5), 2);
        assert!(integer_homology(capped.complex(), 2, DEFAULT_SNF_LIMIT).is_err());
    }

    #[test]
    fn rank_cap_stops_early() {
        let x = build_clique_complex(&Graph::complete(7), 2);
        let m = boundary_matrix(x.complex(), 2).unwrap();
        assert_eq!(rank_mod_p(&m, DEFAULT_PRIME, None), 15);
        assert_eq!(rank_mod_p(&m, DEFAULT_PRIME, Some(4)), 4);
        assert_eq!(rank_mod_p(&m, DEFAULT_PRIME, Some(0)), 0);
    }
}
