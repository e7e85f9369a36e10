//! Smith normal form of integer matrices.
//!
//! Elimination first runs on `i64` with checked arithmetic; if any step would
//! overflow the whole computation restarts on arbitrary-precision integers.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// A dense integer matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }
}

/// Nonzero diagonal of the Smith normal form, `d_1 | d_2 | ...`, all positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfResult {
    pub invariant_factors: Vec<BigUint>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// The factors greater than one.
    pub fn torsion(&self) -> Vec<BigUint> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let diag = match eliminate(m.rows, m.cols, m.data.clone()) {
        Some(d) => d.into_iter().map(|x| BigUint::from(x.unsigned_abs())).collect(),
        None => {
            let data = m.data.iter().map(|&x| BigInt::from(x)).collect();
            eliminate(m.rows, m.cols, data)
                .expect("big integers do not overflow")
                .into_iter()
                .map(|x| x.magnitude().clone())
                .collect()
        }
    };
    SnfResult {
        invariant_factors: normalize_chain(diag),
    }
}

trait Scalar: Clone + PartialEq {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn abs_lt(&self, other: &Self) -> bool;
    /// `self - q * other`, `None` on overflow.
    fn sub_mul(&self, q: &Self, other: &Self) -> Option<Self>;
    /// Truncated quotient.
    fn quot(&self, other: &Self) -> Self;
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.unsigned_abs() < other.unsigned_abs()
    }
    fn sub_mul(&self, q: &Self, other: &Self) -> Option<Self> {
        q.checked_mul(*other).and_then(|p| self.checked_sub(p))
    }
    fn quot(&self, other: &Self) -> Self {
        self / other
    }
}

impl Scalar for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.abs() < other.abs()
    }
    fn sub_mul(&self, q: &Self, other: &Self) -> Option<Self> {
        Some(self - q * other)
    }
    fn quot(&self, other: &Self) -> Self {
        self / other
    }
}

/// Diagonalizes by unimodular row and column operations; returns the nonzero
/// diagonal (not yet a divisibility chain), or `None` on overflow.
fn eliminate<T: Scalar>(rows: usize, cols: usize, mut a: Vec<T>) -> Option<Vec<T>> {
    let idx = |r: usize, c: usize| r * cols + c;
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                let v = &a[idx(r, c)];
                if !v.is_zero() && best.is_none_or(|(br, bc)| v.abs_lt(&a[idx(br, bc)])) {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        swap_rows(&mut a, cols, t, pr);
        swap_cols(&mut a, cols, rows, t, pc);
        loop {
            let pivot = a[idx(t, t)].clone();
            let mut clean = true;
            for r in t + 1..rows {
                if a[idx(r, t)].is_zero() {
                    continue;
                }
                let q = a[idx(r, t)].quot(&pivot);
                for c in t..cols {
                    if !a[idx(t, c)].is_zero() {
                        a[idx(r, c)] = a[idx(r, c)].sub_mul(&q, &a[idx(t, c)])?;
                    }
                }
                clean &= a[idx(r, t)].is_zero();
            }
            for c in t + 1..cols {
                if a[idx(t, c)].is_zero() {
                    continue;
                }
                let q = a[idx(t, c)].quot(&pivot);
                for r in t..rows {
                    if !a[idx(r, t)].is_zero() {
                        a[idx(r, c)] = a[idx(r, c)].sub_mul(&q, &a[idx(r, t)])?;
                    }
                }
                clean &= a[idx(t, c)].is_zero();
            }
            if clean {
                break;
            }
            // A remainder smaller than the pivot is left in row or column t.
            let mut best = (t, t);
            for r in t + 1..rows {
                let v = &a[idx(r, t)];
                if !v.is_zero() && v.abs_lt(&a[idx(best.0, best.1)]) {
                    best = (r, t);
                }
            }
            for c in t + 1..cols {
                let v = &a[idx(t, c)];
                if !v.is_zero() && v.abs_lt(&a[idx(best.0, best.1)]) {
                    best = (t, c);
                }
            }
            swap_rows(&mut a, cols, t, best.0);
            swap_cols(&mut a, cols, rows, t, best.1);
        }
        diag.push(std::mem::replace(&mut a[idx(t, t)], T::zero()));
    }
    Some(diag)
}

fn swap_rows<T>(a: &mut [T], cols: usize, r1: usize, r2: usize) {
    if r1 != r2 {
        for c in 0..cols {
            a.swap(r1 * cols + c, r2 * cols + c);
        }
    }
}

fn swap_cols<T>(a: &mut [T], cols: usize, rows: usize, c1: usize, c2: usize) {
    if c1 != c2 {
        for r in 0..rows {
            a.swap(r * cols + c1, r * cols + c2);
        }
    }
}

/// Turns a diagonal into the equivalent divisibility chain by replacing pairs
/// with `(gcd, lcm)`.
fn normalize_chain(mut d: Vec<BigUint>) -> Vec<BigUint> {
    d.sort();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            if g != d[i] {
                let l = &d[i] / &g * &d[j];
                d[i] = g;
                d[j] = l;
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(m: &IntMatrix) -> Vec<u64> {
        smith_normal_form(m)
            .invariant_factors
            .iter()
            .map(|d| d.try_into().unwrap())
            .collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(factors(&IntMatrix::from_rows(&[vec![2]])), vec![2]);
        assert_eq!(factors(&IntMatrix::identity(3)), vec![1, 1, 1]);
        assert_eq!(factors(&IntMatrix::zeros(2, 3)), Vec::<u64>::new());
        assert_eq!(factors(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]])), vec![1, 6]);
        assert_eq!(factors(&IntMatrix::from_rows(&[vec![4, 0], vec![0, 6]])), vec![2, 12]);
        assert_eq!(
            factors(&IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]])),
            vec![2, 6, 12]
        );
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        let big = i64::MAX / 2;
        let m = IntMatrix::from_rows(&[vec![big, big - 1], vec![big - 1, big]]);
        // det = 2 big - 1, gcd of entries = 1.
        let f = smith_normal_form(&m).invariant_factors;
        assert_eq!(f.len(), 2);
        assert!(f[0].is_one());
        assert_eq!(f[1], BigUint::from(2 * (big as u128) - 1));
    }

    #[test]
    fn chain_holds() {
        let m = IntMatrix::from_rows(&[vec![6, 0, 0], vec![0, 10, 0], vec![0, 0, 15]]);
        let f = factors(&m);
        assert_eq!(f, vec![1, 30, 30]);
        assert!(f.windows(2).all(|w| w[1] % w[0] == 0));
    }
}
