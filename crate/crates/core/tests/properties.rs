use cliquelab::analytic::{expected_faces, expected_faces_second_moment};
use cliquelab::complex::build_clique_complex;
use cliquelab::detectors::{build_retraction, find_sphere_certificate, verify_retraction};
use cliquelab::graph::{generate_gnp, Graph, Vertex};
use cliquelab::homology::{boundary_matrix, euler_check, rank_mod_p, reduced_betti, CheckStatus, CoefficientSpec};
use cliquelab::io::{parse_edge_list, write_edge_list};
use cliquelab::morse::{lex_critical_by_extension_scan, lex_gradient_field, random_matching_field, verify_acyclic};
use cliquelab::rng::RandomSource;
use cliquelab::snf::smith_normal_form;
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = Graph> {
    (1usize..=11, 0.0f64..=1.0, any::<u64>(), any::<u64>())
        .prop_map(|(n, p, seed, stream)| generate_gnp(n, p, RandomSource::new(seed, stream)).unwrap())
}

/// Clique count by checking every vertex subset.
fn naive_f_vector(g: &Graph) -> Vec<u64> {
    let n = g.n();
    let mut f = vec![0u64; n];
    for mask in 1u32..1 << n {
        let vs: Vec<Vertex> = (0..n as Vertex).filter(|&v| mask >> v & 1 == 1).collect();
        let clique = vs
            .iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| g.adjacent(a, b)));
        if clique {
            f[vs.len() - 1] += 1;
        }
    }
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

/// Rank over GF(p) by dense Gaussian elimination.
fn dense_rank(rows: usize, cols: &[Vec<(u32, i8)>], p: u64) -> usize {
    let mut a = vec![vec![0u64; cols.len()]; rows];
    for (j, col) in cols.iter().enumerate() {
        for &(r, s) in col {
            a[r as usize][j] = if s > 0 { 1 } else { p - 1 };
        }
    }
    let inv = |x: u64| {
        let (mut r, mut b, mut e) = (1u64, x, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    for c in 0..cols.len() {
        let Some(piv) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, piv);
        let s = inv(a[rank][c]);
        for x in a[rank].iter_mut() {
            *x = *x * s % p;
        }
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let m = a[r][c];
                for j in 0..cols.len() {
                    a[r][j] = (a[r][j] + (p - m) * a[rank][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sampling_is_deterministic(n in 0usize..60, p in 0.0f64..=1.0, seed: u64, stream: u64) {
        let a = generate_gnp(n, p, RandomSource::new(seed, stream)).unwrap();
        let b = generate_gnp(n, p, RandomSource::new(seed, stream)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn coupling_is_monotone(n in 2usize..60, p in 0.0f64..=1.0, q in 0.0f64..=1.0, seed: u64) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let src = RandomSource::new(seed, 9);
        let a = generate_gnp(n, lo, src).unwrap();
        let b = generate_gnp(n, hi, src).unwrap();
        for (u, v) in a.edges() {
            prop_assert!(b.adjacent(u, v));
        }
    }

    #[test]
    fn faces_are_closed_cliques(g in small_graph()) {
        let x = build_clique_complex(&g, g.n());
        let c = x.complex();
        for k in 0..c.stored_dims() {
            for face in c.faces(k).unwrap().iter() {
                for (i, &a) in face.iter().enumerate() {
                    for &b in &face[i + 1..] {
                        prop_assert!(g.adjacent(a, b));
                    }
                    let sub: Vec<Vertex> = face.iter().copied().filter(|&v| v != a).collect();
                    if !sub.is_empty() {
                        prop_assert!(c.contains(&sub));
                    }
                }
            }
        }
    }

    #[test]
    fn f_vector_matches_subset_count(g in small_graph()) {
        let x = build_clique_complex(&g, g.n());
        prop_assert_eq!(x.f_vector().0, naive_f_vector(&g));
    }

    #[test]
    fn boundary_squares_to_zero(g in small_graph()) {
        let x = build_clique_complex(&g, g.n());
        let top = x.complex().top_dim().unwrap_or(0);
        for k in 2..=top {
            let hi = boundary_matrix(x.complex(), k).unwrap().to_dense();
            let lo = boundary_matrix(x.complex(), k - 1).unwrap().to_dense();
            let (r, m, c) = (x.count(k - 2), x.count(k - 1), x.count(k));
            for i in 0..r {
                for j in 0..c {
                    let s: i64 = (0..m).map(|t| lo.get(i, t) * hi.get(t, j)).sum();
                    prop_assert_eq!(s, 0);
                }
            }
        }
    }

    #[test]
    fn sparse_rank_matches_dense(g in small_graph(), small_prime in prop::sample::select(vec![2u64, 3, 1_000_003])) {
        let x = build_clique_complex(&g, g.n());
        let top = x.complex().top_dim().unwrap_or(0);
        for k in 1..=top {
            let m = boundary_matrix(x.complex(), k).unwrap();
            prop_assert_eq!(rank_mod_p(&m, small_prime, None), dense_rank(m.rows, &m.columns, small_prime));
        }
    }

    #[test]
    fn snf_rank_matches_prime_rank(g in small_graph()) {
        let x = build_clique_complex(&g, 4);
        let top = x.complex().top_dim().unwrap_or(0);
        for k in 1..=top {
            let m = boundary_matrix(x.complex(), k).unwrap();
            prop_assert_eq!(smith_normal_form(&m.to_dense()).rank(), rank_mod_p(&m, 2_147_483_647, None));
        }
    }

    #[test]
    fn euler_identity_holds(g in small_graph()) {
        let x = build_clique_complex(&g, g.n());
        let h = reduced_betti(x.complex(), CoefficientSpec::default()).unwrap();
        prop_assert_eq!(euler_check(&x.f_vector(), &h), CheckStatus::Pass);
    }

    #[test]
    fn lex_fields_are_sound(g in small_graph()) {
        let x = build_clique_complex(&g, g.n());
        let h = reduced_betti(x.complex(), CoefficientSpec::default()).unwrap();
        let top = x.complex().top_dim().unwrap_or(0);
        for k in 0..=top {
            let v = lex_gradient_field(&x, k).unwrap();
            prop_assert!(verify_acyclic(&v, x.complex()).unwrap());
            let crit = v.critical_faces(x.complex(), k);
            prop_assert_eq!(&crit, &lex_critical_by_extension_scan(x.complex(), k));
            prop_assert!(h.betti(k) <= crit.len() as u64);
        }
    }

    #[test]
    fn repaired_random_fields_are_gradient(g in small_graph(), seed: u64) {
        let x = build_clique_complex(&g, g.n());
        let top = x.complex().top_dim().unwrap_or(0);
        for k in 1..=top {
            let (v, rep) = random_matching_field(x.complex(), k, RandomSource::new(seed, k as u64)).unwrap();
            prop_assert!(verify_acyclic(&v, x.complex()).unwrap());
            prop_assert_eq!(v.pairs.len() + rep.removed(), x.count(k));
        }
    }

    #[test]
    fn certificates_retract(n in 6usize..40, p in 0.05f64..0.6, seed: u64, k in 1usize..3) {
        let g = generate_gnp(n, p, RandomSource::new(seed, 0)).unwrap();
        if let Some(cert) = find_sphere_certificate(&g, k, 8, RandomSource::new(seed, 1)) {
            let r = build_retraction(&g, &cert).unwrap();
            prop_assert!(verify_retraction(&g, &r, &cert));
            let x = build_clique_complex(&g, k + 1);
            let h = reduced_betti(x.complex(), CoefficientSpec::default()).unwrap();
            prop_assert!(h.betti(k) >= 1);
        }
    }

    #[test]
    fn edge_list_round_trips(g in small_graph()) {
        prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn second_moment_dominates_square(n in 1u64..200, p in 0.0f64..=1.0, k in 0u64..6) {
        let e = expected_faces(n, p, k).unwrap();
        let e2 = expected_faces_second_moment(n, p, k).unwrap();
        prop_assert!(e2 >= e * e * (1.0 - 1e-9) - 1e-9);
        prop_assert!(e2 >= e * (1.0 - 1e-9));
    }
}
