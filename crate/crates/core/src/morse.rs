//! Discrete vector fields on clique complexes.
//!
//! Two constructions are provided. The lexicographic field pairs each k-face
//! `α` with `α ∪ {x}` for the least vertex `x > max(α)` that extends it; the
//! lex order used here puts a strict prefix before its extensions, so
//! `α <_lex α ∪ {x}` exactly when `x > max(α)`. The random field pairs every
//! k-face with one of its facets chosen uniformly, then repairs conflicts and
//! closed V-paths. Only one pair of adjacent dimensions is matched; all other
//! faces stay critical.

use serde::{Deserialize, Serialize};

use crate::complex::{CliqueComplex, SimplicialComplex};
use crate::error::{domain, Error, Result};
use crate::graph::{iter_bits, Vertex};
use crate::rng::RandomSource;

/// Pairs `(lower, upper)` of face ordinals, lower faces of dimension
/// `lower_dim` and upper faces one dimension higher.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteVectorField {
    pub lower_dim: usize,
    pub pairs: Vec<(usize, usize)>,
    /// Unpaired faces of dimension `lower_dim`.
    pub critical_lower: Vec<usize>,
}

impl DiscreteVectorField {
    pub fn new(lower_dim: usize, pairs: Vec<(usize, usize)>, lower_count: usize) -> Self {
        let mut paired = vec![false; lower_count];
        for &(a, _) in &pairs {
            if let Some(slot) = paired.get_mut(a) {
                *slot = true;
            }
        }
        let critical_lower = (0..lower_count).filter(|&i| !paired[i]).collect();
        Self {
            lower_dim,
            pairs,
            critical_lower,
        }
    }

    /// Unpaired faces of dimension `k`.
    pub fn critical_faces(&self, x: &SimplicialComplex, k: usize) -> Vec<usize> {
        let mut paired = vec![false; x.count(k)];
        if k == self.lower_dim {
            for &(a, _) in &self.pairs {
                paired[a] = true;
            }
        } else if k == self.lower_dim + 1 {
            for &(_, b) in &self.pairs {
                paired[b] = true;
            }
        }
        (0..paired.len()).filter(|&i| !paired[i]).collect()
    }
}

/// The lexicographic gradient field matching k-faces with (k+1)-faces.
pub fn lex_gradient_field(x: &CliqueComplex, k: usize) -> Result<DiscreteVectorField> {
    if x.max_dim() < k + 1 && !x.is_full() {
        return Err(domain(format!(
            "lexicographic field in dimension {k} needs faces through dimension {}",
            k + 1
        )));
    }
    let lower_count = x.count(k);
    let mut pairs = Vec::new();
    if let (Some(lower), Some(upper)) = (x.faces(k), x.faces(k + 1)) {
        let mut beta = Vec::with_capacity(k + 2);
        for (i, alpha) in lower.iter().enumerate() {
            let ext = x.upper_extensions(alpha);
            let first = iter_bits(&ext).next();
            if let Some(v) = first {
                beta.clear();
                beta.extend_from_slice(alpha);
                beta.push(v);
                let j = upper.index_of(&beta).expect("extension is a stored face");
                pairs.push((i, j));
            }
        }
    }
    Ok(DiscreteVectorField::new(k, pairs, lower_count))
}

/// Critical k-faces of the lexicographic field, read off the stored
/// (k+1)-faces: a k-face is non-critical iff it is some (k+1)-face with the
/// largest vertex removed.
pub fn lex_critical_by_extension_scan(x: &SimplicialComplex, k: usize) -> Vec<usize> {
    let mut extendable = vec![false; x.count(k)];
    if let (Some(lower), Some(upper)) = (x.faces(k), x.faces(k + 1)) {
        for beta in upper.iter() {
            let i = lower
                .index_of(&beta[..beta.len() - 1])
                .expect("complex is closed downward");
            extendable[i] = true;
        }
    }
    (0..extendable.len()).filter(|&i| !extendable[i]).collect()
}

fn facet_without(face: &[Vertex], skip: usize, out: &mut Vec<Vertex>) {
    out.clear();
    out.extend(face.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
}

/// Checks that every pair is a codimension-one incidence and that no face is
/// in two pairs.
fn validate(v: &DiscreteVectorField, x: &SimplicialComplex) -> Result<()> {
    let lower = x.faces(v.lower_dim);
    let upper = x.faces(v.lower_dim + 1);
    let (Some(lower), Some(upper)) = (lower, upper) else {
        return if v.pairs.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(format!("no faces in dimensions {}/{}", v.lower_dim, v.lower_dim + 1)))
        };
    };
    let mut used_lower = vec![false; lower.len()];
    let mut used_upper = vec![false; upper.len()];
    for &(a, b) in &v.pairs {
        if a >= lower.len() || b >= upper.len() {
            return Err(Error::Invalid(format!("pair ({a}, {b}) references a missing face")));
        }
        let (fa, fb) = (lower.get(a), upper.get(b));
        let contained = fa.iter().all(|u| fb.binary_search(u).is_ok());
        if !contained {
            return Err(Error::Invalid(format!("{fa:?} is not a facet of {fb:?}")));
        }
        if std::mem::replace(&mut used_lower[a], true) || std::mem::replace(&mut used_upper[b], true) {
            return Err(Error::Invalid(format!("a face of pair {fa:?} < {fb:?} is in two pairs")));
        }
    }
    Ok(())
}

/// Arcs of the V-path digraph: for pair `i = (α, β)`, an arc to pair `j` for
/// every other facet `α'` of `β` that is the lower face of pair `j`.
fn vpath_arcs(v: &DiscreteVectorField, x: &SimplicialComplex) -> Vec<Vec<usize>> {
    let (Some(lower), Some(upper)) = (x.faces(v.lower_dim), x.faces(v.lower_dim + 1)) else {
        return vec![Vec::new(); v.pairs.len()];
    };
    let mut pair_of_lower = vec![usize::MAX; lower.len()];
    for (i, &(a, _)) in v.pairs.iter().enumerate() {
        pair_of_lower[a] = i;
    }
    let mut sub = Vec::new();
    v.pairs
        .iter()
        .map(|&(a, b)| {
            let beta = upper.get(b);
            (0..beta.len())
                .filter_map(|skip| {
                    facet_without(beta, skip, &mut sub);
                    let other = lower.index_of(&sub).expect("complex is closed downward");
                    (other != a && pair_of_lower[other] != usize::MAX).then_some(pair_of_lower[other])
                })
                .collect()
        })
        .collect()
}

/// A closed V-path as the sequence of pair indices along it, if any.
fn find_cycle(arcs: &[Vec<usize>], alive: &[bool]) -> Option<Vec<usize>> {
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; arcs.len()];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for s in 0..arcs.len() {
        if color[s] != WHITE || !alive[s] {
            continue;
        }
        color[s] = GREY;
        stack.push((s, 0));
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&t) = arcs[node].get(*next) {
                *next += 1;
                if !alive[t] {
                    continue;
                }
                match color[t] {
                    WHITE => {
                        color[t] = GREY;
                        stack.push((t, 0));
                    }
                    GREY => {
                        let start = stack.iter().position(|&(n, _)| n == t).expect("grey node on stack");
                        return Some(stack[start..].iter().map(|&(n, _)| n).collect());
                    }
                    _ => {}
                }
            } else {
                color[node] = BLACK;
                stack.pop();
            }
        }
    }
    None
}

/// Whether the field has no closed V-paths. Malformed pairs are an error.
pub fn verify_acyclic(v: &DiscreteVectorField, x: &SimplicialComplex) -> Result<bool> {
    validate(v, x)?;
    let arcs = vpath_arcs(v, x);
    Ok(find_cycle(&arcs, &vec![true; arcs.len()]).is_none())
}

/// Number of unpaired k-faces; refuses fields that are not gradient fields.
/// By Forman's theorem this bounds `β̃_k` from above.
pub fn critical_count(v: &DiscreteVectorField, x: &SimplicialComplex, k: usize) -> Result<usize> {
    if !verify_acyclic(v, x)? {
        return Err(Error::Invalid("field has a closed V-path".into()));
    }
    Ok(v.critical_faces(x, k).len())
}

/// What the repair of the random field removed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    pub proposed: usize,
    pub conflicts_removed: usize,
    pub cycles_broken: usize,
}

impl RepairReport {
    pub fn removed(&self) -> usize {
        self.conflicts_removed + self.cycles_broken
    }
}

/// Random field between (k-1)- and k-faces. Every k-face `τ`, visited in
/// colex order, draws one index `i(τ)` uniformly from its `k+1` vertices and
/// proposes `(τ - v_i, τ)`. The first proposal claiming a (k-1)-face keeps
/// it. Closed V-paths are then broken one at a time by dropping the pair on
/// the cycle whose k-face is last in colex order.
pub fn random_matching_field(
    x: &SimplicialComplex,
    k: usize,
    rng: RandomSource,
) -> Result<(DiscreteVectorField, RepairReport)> {
    if k == 0 {
        return Err(domain("random field needs k >= 1"));
    }
    let lower_count = x.count(k - 1);
    let (Some(lower), Some(upper)) = (x.faces(k - 1), x.faces(k)) else {
        return Ok((DiscreteVectorField::new(k - 1, Vec::new(), lower_count), RepairReport::default()));
    };
    let mut stream = rng.stream();
    let mut claimed = vec![false; lower.len()];
    let mut pairs = Vec::with_capacity(upper.len());
    let mut report = RepairReport {
        proposed: upper.len(),
        ..RepairReport::default()
    };
    let mut sub = Vec::with_capacity(k);
    for (j, tau) in upper.iter().enumerate() {
        let skip = stream.below(k + 1);
        facet_without(tau, skip, &mut sub);
        let a = lower.index_of(&sub).expect("complex is closed downward");
        if claimed[a] {
            report.conflicts_removed += 1;
        } else {
            claimed[a] = true;
            pairs.push((a, j));
        }
    }
    let mut field = DiscreteVectorField::new(k - 1, pairs, lower_count);
    let arcs = vpath_arcs(&field, x);
    let mut alive = vec![true; field.pairs.len()];
    while let Some(cycle) = find_cycle(&arcs, &alive) {
        let worst = *cycle
            .iter()
            .max_by_key(|&&i| field.pairs[i].1)
            .expect("cycles are nonempty");
        alive[worst] = false;
        report.cycles_broken += 1;
    }
    if report.cycles_broken > 0 {
        let kept = field
            .pairs
            .iter()
            .zip(&alive)
            .filter(|(_, &a)| a)
            .map(|(&p, _)| p)
            .collect();
        field = DiscreteVectorField::new(k - 1, kept, lower_count);
    }
    Ok((field, report))
}

/// Unordered pairs of k-faces that share a (k-1)-face.
pub fn adjacent_kface_pairs(x: &SimplicialComplex, k: usize) -> u64 {
    let Some(faces) = x.faces(k) else { return 0 };
    let choose2 = |c: u64| c * c.saturating_sub(1) / 2;
    if k == 0 {
        return choose2(faces.len() as u64);
    }
    let lower = x.faces(k - 1).expect("complex is closed downward");
    let mut incidences = vec![0u64; lower.len()];
    let mut sub = Vec::with_capacity(k);
    for face in faces.iter() {
        for skip in 0..face.len() {
            facet_without(face, skip, &mut sub);
            incidences[lower.index_of(&sub).expect("complex is closed downward")] += 1;
        }
    }
    incidences.into_iter().map(choose2).sum()
}
