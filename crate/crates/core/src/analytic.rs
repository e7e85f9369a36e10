//! Closed-form expectations and threshold probes for X(n, p).
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Margin subtracted from the vanishing exponent `-1/k` in
/// [`threshold_probe`].
pub const DEFAULT_VANISH_MARGIN: f64 = 0.2;

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("probability {p} outside [0, 1]")))
    }
}

/// `C(n, k)` as a float by the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn choose2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `log(C(n, k) p^e)`, or `-inf` when the term vanishes.
fn ln_term(n: u64, k: u64, p: f64, e: u64) -> f64 {
    if k > n || (p == 0.0 && e > 0) {
        return f64::NEG_INFINITY;
    }
    let lp = if e == 0 { 0.0 } else { e as f64 * p.ln() };
    ln_binomial(n, k) + lp
}

/// `C(n, k) p^e`, directly when both factors are finite and normal, in log
/// space otherwise.
fn term(n: u64, k: u64, p: f64, e: u64) -> f64 {
    let c = binomial(n, k);
    let pe = p.powi(e.min(i32::MAX as u64) as i32);
    if c.is_finite() && (pe.is_normal() || pe == 0.0 && p == 0.0 || e == 0) {
        c * pe
    } else {
        ln_term(n, k, p, e).exp()
    }
}

/// `E[f_k] = C(n, k+1) p^{C(k+1, 2)}`.
pub fn expected_faces(n: u64, p: f64, k: u64) -> Result<f64> {
    check_p(p)?;
    Ok(term(n, k + 1, p, choose2(k + 1)))
}

/// Log-space evaluation of [`expected_faces`].
pub fn ln_expected_faces(n: u64, p: f64, k: u64) -> Result<f64> {
    check_p(p)?;
    Ok(ln_term(n, k + 1, p, choose2(k + 1)))
}

/// `E[f_k^2] = C(n, k+1) Σ_m C(k+1, m) C(n-k-1, k+1-m) p^{2 C(k+1,2) - C(m,2)}`,
/// grouping ordered pairs of (k+1)-sets by the size `m` of their overlap.
pub fn expected_faces_second_moment(n: u64, p: f64, k: u64) -> Result<f64> {
    check_p(p)?;
    let s = k + 1;
    if s > n {
        return Ok(0.0);
    }
    let edges = choose2(s);
    let mut sum = 0.0;
    for m in 0..=s {
        if s - m > n - s {
            continue;
        }
        let e = 2 * edges - choose2(m);
        let pe = if e == 0 { 1.0 } else { p.powi(e as i32) };
        sum += binomial(s, m) * binomial(n - s, s - m) * pe;
    }
    Ok(binomial(n, s) * sum)
}

/// `Var f_k = E[f_k^2] - E[f_k]^2`.
pub fn face_variance(n: u64, p: f64, k: u64) -> Result<f64> {
    let mean = expected_faces(n, p, k)?;
    Ok(expected_faces_second_moment(n, p, k)? - mean * mean)
}

/// Expected number of pairs of k-faces meeting in a (k-1)-face:
/// `C(k+2, 2) C(n, k+2) p^{C(k+2,2) - 1}`.
pub fn expected_bad_pairs(n: u64, p: f64, k: u64) -> Result<f64> {
    check_p(p)?;
    let e = choose2(k + 2) - 1;
    debug_assert_eq!(e, k * (k + 3) / 2);
    Ok(binomial(k + 2, 2) * term(n, k + 2, p, e))
}

/// `-2 log n / log p`.
pub fn dimension_estimate(n: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("dimension estimate needs 0 < p < 1, got {p}")));
    }
    Ok(-2.0 * n.ln() / p.ln())
}

/// Either an explicit probability or an exponent `alpha` with `p = n^alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeProbability {
    Explicit(f64),
    Alpha(f64),
}

impl EdgeProbability {
    pub fn resolve(&self, n: u64) -> Result<f64> {
        let p = match *self {
            EdgeProbability::Explicit(p) => p,
            EdgeProbability::Alpha(a) => (n as f64).powf(a),
        };
        check_p(p)?;
        Ok(p)
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            EdgeProbability::Alpha(a) => Some(a),
            EdgeProbability::Explicit(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub n: u64,
    pub k: u64,
    pub p: EdgeProbability,
    /// Additive offset in the threshold formulas.
    pub omega: f64,
}

/// Reference probabilities around the k-th homology phase diagram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProbe {
    pub n: u64,
    pub k: u64,
    pub offset: f64,
    pub margin: f64,
    /// `n^{-1/k - margin}`: below the vanishing threshold.
    pub p_vanish_below: f64,
    /// `n^{(-1/k - 1/(k+1))/2}`: midway through the nonvanishing window.
    pub p_middle: f64,
    /// `(((2k+1) log n + offset) / n)^{1/(2k+1)}`: k-connected above.
    pub p_connect: f64,
    /// `((l log n + offset) / n)^{1/l}`: every l vertices share a neighbour.
    pub p_common: Option<(u64, f64)>,
}

pub fn threshold_probe(n: u64, k: u64, offset: f64, l: Option<u64>) -> Result<ThresholdProbe> {
    threshold_probe_with_margin(n, k, offset, l, DEFAULT_VANISH_MARGIN)
}

pub fn threshold_probe_with_margin(
    n: u64,
    k: u64,
    offset: f64,
    l: Option<u64>,
    margin: f64,
) -> Result<ThresholdProbe> {
    if n < 2 || k < 1 {
        return Err(domain("threshold probe needs n >= 2 and k >= 1"));
    }
    if margin <= 0.0 {
        return Err(domain("margin must be positive"));
    }
    let nf = n as f64;
    let kf = k as f64;
    let root = |coef: f64, r: f64| (((coef * nf.ln() + offset) / nf).max(0.0)).powf(1.0 / r).min(1.0);
    Ok(ThresholdProbe {
        n,
        k,
        offset,
        margin,
        p_vanish_below: nf.powf(-1.0 / kf - margin),
        p_middle: nf.powf((-1.0 / kf - 1.0 / (kf + 1.0)) / 2.0),
        p_connect: root(2.0 * kf + 1.0, 2.0 * kf + 1.0),
        p_common: l.map(|l| (l, root(l as f64, l as f64))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn faces_at_p_one() {
        assert_eq!(expected_faces(10, 1.0, 3).unwrap(), 210.0);
        assert_eq!(expected_faces(3, 1.0, 5).unwrap(), 0.0);
        assert_eq!(expected_faces(7, 0.0, 0).unwrap(), 7.0);
        assert_eq!(expected_faces(7, 0.0, 1).unwrap(), 0.0);
        assert!(expected_faces(7, 1.1, 1).is_err());
    }

    #[test]
    fn faces_examples() {
        assert_relative_eq!(expected_faces(100, 0.05, 1).unwrap(), 247.5, max_relative = 1e-12);
        assert_relative_eq!(expected_faces(100, 0.05, 2).unwrap(), 20.2125, max_relative = 1e-12);
    }

    #[test]
    fn log_space_agrees() {
        for &(n, p, k) in &[(100u64, 0.05, 1u64), (1000, 0.3, 4), (50, 0.9, 10), (3000, 0.0017, 1)] {
            let direct = expected_faces(n, p, k).unwrap();
            let via_log = ln_expected_faces(n, p, k).unwrap().exp();
            assert_relative_eq!(direct, via_log, max_relative = 1e-10);
        }
        // Far outside f64 range only the log form is meaningful.
        assert!(ln_expected_faces(1_000_000, 0.5, 400).unwrap().is_finite());
    }

    #[test]
    fn second_moment_examples() {
        for &p in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            // f_1 on three vertices: 6p^2 + 3p.
            assert_relative_eq!(
                expected_faces_second_moment(3, p, 1).unwrap(),
                6.0 * p * p + 3.0 * p,
                epsilon = 1e-14
            );
            let direct = 3.0 * p * (1.0 - p) + 9.0 * p * p;
            assert_relative_eq!(expected_faces_second_moment(3, p, 1).unwrap(), direct, epsilon = 1e-14);
        }
        for n in 1..10u64 {
            for k in 0..4u64 {
                let c = binomial(n, k + 1);
                assert_relative_eq!(expected_faces_second_moment(n, 1.0, k).unwrap(), c * c, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn bad_pairs_at_p_one() {
        assert_eq!(expected_bad_pairs(4, 1.0, 2).unwrap(), 6.0);
        assert_eq!(expected_bad_pairs(3, 1.0, 1).unwrap(), 3.0);
    }

    #[test]
    fn dimension_examples() {
        assert_relative_eq!(dimension_estimate(1e4, 0.1).unwrap(), 8.0, max_relative = 1e-12);
        let n: f64 = 300.0;
        assert_relative_eq!(dimension_estimate(n, n.powf(-0.3)).unwrap(), 20.0 / 3.0, max_relative = 1e-12);
        for k in 1..6 {
            let p = n.powf(-2.0 / k as f64);
            assert_relative_eq!(dimension_estimate(n, p).unwrap(), k as f64, max_relative = 1e-12);
        }
        assert!(dimension_estimate(10.0, 0.0).is_err());
        assert!(dimension_estimate(10.0, 1.0).is_err());
    }

    #[test]
    fn probe_examples() {
        let probe = threshold_probe(150, 1, 10.0, Some(4)).unwrap();
        let want = ((3.0 * 150f64.ln() + 10.0) / 150.0).powf(1.0 / 3.0);
        assert_relative_eq!(probe.p_connect, want, max_relative = 1e-12);
        // (3 ln 150 + 10) / 150 = 0.166866..., cube root 0.550555...
        assert!((probe.p_connect - 0.550555).abs() < 1e-6, "{}", probe.p_connect);
        assert!((probe.p_middle - 0.0233).abs() < 5e-5, "{}", probe.p_middle);
        assert!(probe.p_vanish_below < 150f64.powf(-1.0));
        let (l, pc) = probe.p_common.unwrap();
        assert_eq!(l, 4);
        assert_relative_eq!(pc, ((4.0 * 150f64.ln() + 10.0) / 150.0).powf(0.25), max_relative = 1e-12);
        assert!(threshold_probe(1, 1, 0.0, None).is_err());
        assert!(threshold_probe(10, 0, 0.0, None).is_err());
    }

    #[test]
    fn regime_resolution() {
        assert_relative_eq!(EdgeProbability::Alpha(-0.5).resolve(100).unwrap(), 0.1, max_relative = 1e-12);
        assert!(EdgeProbability::Alpha(0.5).resolve(100).is_err());
        assert_eq!(EdgeProbability::Explicit(0.3).resolve(100).unwrap(), 0.3);
    }
}
