use cliquelab::analytic::EdgeProbability;
use cliquelab::complex::build_clique_complex;
use cliquelab::detectors::octahedral_skeleton;
use cliquelab::fixtures;
use cliquelab::harness::{emit, records_to_csv, run_sweep, Format, ProbabilitySpec, SweepConfig, CSV_COLUMNS};
use cliquelab::homology::{boundary_matrix, integer_homology, reduced_betti, CoefficientSpec};
use num_integer::Integer;

/// Fraction-free determinant.
fn bareiss(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r][k] != 0) else { return 0 };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// gcd of all `k x k` minors.
fn determinantal_divisor(m: &[Vec<i128>], k: usize) -> i128 {
    let cols = m[0].len();
    let col_sets = combinations(cols, k);
    let mut g = 0i128;
    for rows in combinations(m.len(), k) {
        for cs in &col_sets {
            let sub = rows.iter().map(|&r| cs.iter().map(|&c| m[r][c]).collect()).collect();
            g = g.gcd(&bareiss(sub));
            if g == 1 {
                return 1;
            }
        }
    }
    g
}

#[test]
fn rp2_torsion_from_minors() {
    let x = fixtures::rp2();
    let d2 = boundary_matrix(&x, 2).unwrap().to_dense();
    let dense: Vec<Vec<i128>> = (0..15).map(|r| (0..10).map(|c| d2.get(r, c) as i128).collect()).collect();
    let d9 = determinantal_divisor(&dense, 9);
    let d10 = determinantal_divisor(&dense, 10);
    assert_eq!(d9, 1);
    assert_eq!(d10 / d9, 2);
    let z = integer_homology(&x, 1, 2000).unwrap();
    assert_eq!(z.rank, 0);
    assert_eq!(z.torsion.len(), 1);
    assert_eq!(z.torsion[0], (d10 / d9).unsigned_abs().into());
}

#[test]
fn octahedral_spheres() {
    for k in 1..=3usize {
        let from_graph = build_clique_complex(&octahedral_skeleton(k), 2 * k + 2);
        let h = reduced_betti(from_graph.complex(), CoefficientSpec::default()).unwrap();
        let mut want = vec![0; k + 1];
        want[k] = 1;
        assert_eq!(h.reduced_betti, want);
        let fixture = fixtures::octahedron(k).unwrap();
        assert_eq!(fixture.f_vector(), from_graph.f_vector());
        let hz = integer_homology(&fixture, k, 2000).unwrap();
        assert_eq!((hz.rank, hz.torsion.len()), (1, 0));
    }
}

fn phase_cfg(jobs: usize) -> SweepConfig {
    SweepConfig {
        n_list: vec![30, 45],
        p_spec: ProbabilitySpec::Alpha(vec![-1.0, -0.6]),
        trials: 6,
        jobs,
        paranoid: true,
        ..SweepConfig::single(30, EdgeProbability::Alpha(-1.0), 1, 1, 77)
    }
}

#[test]
fn sweep_ignores_scheduling() {
    let one = run_sweep(&phase_cfg(1)).unwrap();
    let four = run_sweep(&phase_cfg(4)).unwrap();
    assert_eq!(one, four);
    assert_eq!(records_to_csv(&one.records), records_to_csv(&four.records));
    assert_eq!(one.records.len(), 24);
    for (i, r) in one.records.iter().enumerate() {
        assert_eq!(r.trial_id, i as u64);
    }
}

#[test]
fn adding_points_keeps_trials() {
    let small = run_sweep(&SweepConfig {
        n_list: vec![45],
        p_spec: ProbabilitySpec::Alpha(vec![-0.6]),
        ..phase_cfg(1)
    })
    .unwrap();
    let big = run_sweep(&phase_cfg(1)).unwrap();
    let tail: Vec<_> = big.records[18..].iter().map(|r| (r.seed, r.f_vector.clone(), r.betti.clone())).collect();
    let head: Vec<_> = small.records.iter().map(|r| (r.seed, r.f_vector.clone(), r.betti.clone())).collect();
    assert_eq!(tail, head);
}

#[test]
fn csv_and_json_lines_agree() {
    let res = run_sweep(&phase_cfg(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv_path = emit(&res.records, Format::Csv, dir.path()).unwrap();
    let json_path = emit(&res.records, Format::JsonLines, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_COLUMNS);
    let json = std::fs::read_to_string(json_path).unwrap();
    let joined = |v: &serde_json::Value| {
        v.as_array()
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(";")
    };
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), res.records.len());
    for (row, line) in rows.iter().zip(json.lines()) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for (col, cell) in CSV_COLUMNS.iter().zip(row.iter()) {
            let field = &v[*col];
            let expect = match field {
                serde_json::Value::Array(_) => joined(field),
                serde_json::Value::Null => String::new(),
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            if *col == "p" || *col == "alpha" {
                if !expect.is_empty() {
                    assert_eq!(cell.parse::<f64>().unwrap(), expect.parse::<f64>().unwrap());
                }
            } else {
                assert_eq!(cell, expect, "column {col}");
            }
        }
    }
}

#[test]
fn emit_reports_path_on_failure() {
    let res = run_sweep(&SweepConfig::single(5, EdgeProbability::Explicit(0.5), 1, 1, 0)).unwrap();
    let err = emit(&res.records, Format::Csv, std::path::Path::new("/nonexistent/dir")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir"));
}
