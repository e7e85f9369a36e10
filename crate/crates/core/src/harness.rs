//! Seeded Monte Carlo sweeps over X(n, p).
//!
//! A sweep visits every point `(n, p)` of its grid `trials` times. Trial `i`
//! at a point draws its graph from `RandomSource::new(master_seed, id)` with
//! `id = hash_words([n, p.to_bits(), i])`, so adding points never moves an
//! existing trial. The random Morse field and the sphere search use the
//! substreams tagged [`FIELD_TAG`] and [`SPHERE_TAG`] of the same source.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{expected_faces, EdgeProbability};
use crate::complex::{build_clique_complex_limited, BuildLimits, CliqueComplex};
use crate::detectors::{build_retraction, find_sphere_certificate, vanishing_certificate, verify_retraction};
use crate::error::{Error, Result};
use crate::graph::{common_neighbor_all, generate_gnp, Graph};
use crate::homology::{
    euler_check, integer_homology, morse_inequality_check, reduced_betti, CoefficientSpec, HomologySummary,
    CHECK_PRIME, DEFAULT_SNF_LIMIT,
};
use crate::morse::{
    adjacent_kface_pairs, lex_critical_by_extension_scan, lex_gradient_field, random_matching_field,
    verify_acyclic,
};
use crate::rng::{hash_words, RandomSource};

pub const FIELD_TAG: u64 = 1;
pub const SPHERE_TAG: u64 = 2;

/// Lex fields on complexes up to this many faces are checked for closed
/// V-paths inside every trial.
pub const ACYCLIC_CHECK_FACES: usize = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilitySpec {
    Explicit(Vec<f64>),
    Alpha(Vec<f64>),
}

impl ProbabilitySpec {
    fn entries(&self) -> Vec<EdgeProbability> {
        match self {
            Self::Explicit(ps) => ps.iter().map(|&p| EdgeProbability::Explicit(p)).collect(),
            Self::Alpha(al) => al.iter().map(|&a| EdgeProbability::Alpha(a)).collect(),
        }
    }
}

/// How far each trial enumerates its clique complex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxDimPolicy {
    /// `k_max + 1`, enough for exact `β̃_0..β̃_{k_max}`.
    #[default]
    KMaxPlusOne,
    Fixed(usize),
    /// Every clique.
    Full,
}

fn default_trials() -> usize {
    1
}

fn default_budget() -> usize {
    64
}

fn default_jobs() -> usize {
    1
}

fn default_max_faces() -> usize {
    BuildLimits::default().max_faces_per_dim
}

fn default_snf_limit() -> usize {
    DEFAULT_SNF_LIMIT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_list: Vec<u64>,
    pub p_spec: ProbabilitySpec,
    /// Homology is recorded for `0..=k_max`; the Morse field, `d`, and both
    /// certificates are computed at `k_max`.
    pub k_max: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub max_dim: MaxDimPolicy,
    #[serde(default)]
    pub coeff: CoefficientSpec,
    /// Adds the check prime on every trial and integer homology on about 1%.
    #[serde(default)]
    pub paranoid: bool,
    /// Sphere-search restarts; zero skips the search.
    #[serde(default = "default_budget")]
    pub detector_budget: usize,
    #[serde(default = "default_max_faces")]
    pub max_faces_per_dim: usize,
    #[serde(default = "default_snf_limit")]
    pub snf_limit: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Wall times are left at zero unless set, keeping outputs reproducible.
    #[serde(default)]
    pub record_timings: bool,
}

impl SweepConfig {
    /// A single-point configuration with defaults elsewhere.
    pub fn single(n: u64, p: EdgeProbability, k_max: usize, trials: usize, master_seed: u64) -> Self {
        let p_spec = match p {
            EdgeProbability::Explicit(p) => ProbabilitySpec::Explicit(vec![p]),
            EdgeProbability::Alpha(a) => ProbabilitySpec::Alpha(vec![a]),
        };
        Self {
            n_list: vec![n],
            p_spec,
            k_max,
            trials,
            master_seed,
            max_dim: MaxDimPolicy::default(),
            coeff: CoefficientSpec::default(),
            paranoid: false,
            detector_budget: default_budget(),
            max_faces_per_dim: default_max_faces(),
            snf_limit: default_snf_limit(),
            output: None,
            jobs: 1,
            record_timings: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1");
        }
        if self.n_list.is_empty() {
            return bad("n_list is empty");
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        if let MaxDimPolicy::Fixed(d) = self.max_dim {
            if d < self.k_max + 1 {
                return bad("fixed max_dim must be at least k_max + 1");
            }
        }
        self.coeff.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.points()?;
        Ok(())
    }

    /// Grid points in `n_list` order, then `p_spec` order.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let entries = self.p_spec.entries();
        if entries.is_empty() {
            return Err(Error::Config("p_spec is empty".into()));
        }
        let mut out = Vec::new();
        for &n in &self.n_list {
            for e in &entries {
                let p = e.resolve(n).map_err(|err| Error::Config(err.to_string()))?;
                out.push(SweepPoint { n, p, alpha: e.alpha() });
            }
        }
        Ok(out)
    }

    fn enumeration_dim(&self) -> usize {
        match self.max_dim {
            MaxDimPolicy::KMaxPlusOne => self.k_max + 1,
            MaxDimPolicy::Fixed(d) => d,
            MaxDimPolicy::Full => usize::MAX,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: u64,
    pub p: f64,
    pub alpha: Option<f64>,
}

pub fn trial_stream_id(n: u64, p: f64, index: u64) -> u64 {
    hash_words(&[n, p.to_bits(), index])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTimes {
    pub generate: u64,
    pub complex: u64,
    pub homology: u64,
    pub morse: u64,
    pub detect: u64,
}

impl StageTimes {
    pub fn total(&self) -> u64 {
        self.generate + self.complex + self.homology + self.morse + self.detect
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub n: u64,
    pub p: f64,
    pub alpha: Option<f64>,
    pub k: usize,
    /// The trial's stream id under the sweep's master seed.
    pub seed: u64,
    pub f_vector: Vec<u64>,
    /// `β̃_0, β̃_1, ...` up to `k_max`, cut at the first inexact entry.
    pub betti: Vec<u64>,
    pub truncated: bool,
    /// Dimension at which the face guard stopped enumeration.
    pub guard_dim: Option<usize>,
    /// Lexicographic critical counts for `0..=k_max`, where available.
    pub critical_lex: Vec<u64>,
    /// Pairs removed from the random field at `k`.
    pub random_removed: Option<u64>,
    pub d_pairs: u64,
    pub cert_found: bool,
    pub cert_verified: bool,
    pub vanish_cert: String,
    pub times_ms: StageTimes,
    pub time_ms_total: u64,
    /// Non-fatal failure, such as an integer backend over its size guard.
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn betti_at(&self, k: usize) -> Option<u64> {
        self.betti.get(k).copied()
    }

    pub fn f_at(&self, k: usize) -> u64 {
        self.f_vector.get(k).copied().unwrap_or(0)
    }
}

/// Stage timer; never reads the clock when off, since `Instant` is
/// unavailable on some targets.
struct Clock(Option<Instant>);

impl Clock {
    fn new(on: bool) -> Self {
        Self(on.then(Instant::now))
    }

    fn lap(&mut self) -> u64 {
        let Some(start) = self.0 else { return 0 };
        let now = Instant::now();
        self.0 = Some(now);
        (now - start).as_millis() as u64
    }
}

fn violation(point: &SweepPoint, index: u64, msg: String) -> Error {
    Error::Invariant(format!("n={} p={} trial {index}: {msg}", point.n, point.p))
}

/// Runs one trial. Errors are invariant violations only; guard overflows are
/// recorded on the returned record.
pub fn run_trial(cfg: &SweepConfig, point: SweepPoint, index: u64) -> Result<TrialRecord> {
    let k = cfg.k_max;
    let stream_id = trial_stream_id(point.n, point.p, index);
    let source = RandomSource::new(cfg.master_seed, stream_id);
    let mut clock = Clock::new(cfg.record_timings);
    let mut times = StageTimes::default();
    let fail = |msg: String| violation(&point, index, msg);

    let g = generate_gnp(point.n as usize, point.p, source)?;
    times.generate = clock.lap();

    let limits = BuildLimits {
        max_faces_per_dim: cfg.max_faces_per_dim,
    };
    let x = build_clique_complex_limited(&g, cfg.enumeration_dim(), limits);
    let f = x.f_vector();
    times.complex = clock.lap();

    let mut error = None;
    let h = reduced_betti(x.complex(), cfg.coeff);
    let h = match h {
        Ok(h) => Some(h),
        Err(e @ Error::TooLarge { .. }) => {
            error = Some(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let mut betti = Vec::new();
    if let Some(h) = &h {
        for d in 0..=k {
            if !h.is_exact(d) {
                break;
            }
            betti.push(h.betti(d));
        }
        if euler_check(&f, h).failed() {
            return Err(fail(format!("Euler identity fails for f={:?} betti={:?}", f.0, h.reduced_betti)));
        }
        for d in 0..=k {
            if morse_inequality_check(&f, h, d).failed() {
                return Err(fail(format!("Morse inequality fails at k={d}")));
            }
        }
        if cfg.paranoid {
            paranoid_checks(cfg, &x, h, stream_id).map_err(fail)?;
        }
    }
    times.homology = clock.lap();

    let mut critical_lex = Vec::new();
    let check_acyclic = x.complex().total_faces() <= ACYCLIC_CHECK_FACES;
    for d in 0..=k {
        let Ok(field) = lex_gradient_field(&x, d) else { break };
        let critical = field.critical_faces(x.complex(), d);
        if critical != lex_critical_by_extension_scan(x.complex(), d) {
            return Err(fail(format!("lex critical characterizations disagree at k={d}")));
        }
        if check_acyclic && !verify_acyclic(&field, x.complex())? {
            return Err(fail(format!("lex field has a closed V-path at k={d}")));
        }
        if let Some(b) = betti.get(d) {
            if *b > critical.len() as u64 {
                return Err(fail(format!("β̃_{d} = {b} exceeds {} lex critical faces", critical.len())));
            }
        }
        critical_lex.push(critical.len() as u64);
    }
    let random_removed = random_matching_field(x.complex(), k, source.substream(FIELD_TAG))
        .ok()
        .map(|(_, report)| report.removed() as u64);
    let d_pairs = adjacent_kface_pairs(x.complex(), k);
    times.morse = clock.lap();

    let (cert_found, cert_verified) = sphere_search(cfg, &g, source, betti.get(k).copied()).map_err(fail)?;
    let verdict = vanishing_certificate(&g, k)?;
    if verdict.is_zero() && betti.get(k).is_some_and(|&b| b != 0) {
        return Err(fail(format!("vanishing certificate {} but β̃_{k} != 0", verdict.label())));
    }
    times.detect = clock.lap();

    Ok(TrialRecord {
        trial_id: 0,
        n: point.n,
        p: point.p,
        alpha: point.alpha,
        k,
        seed: stream_id,
        f_vector: f.0,
        truncated: x.guard_hit().is_some() || betti.len() < k + 1 || h.is_none(),
        betti,
        guard_dim: x.guard_hit(),
        critical_lex,
        random_removed,
        d_pairs,
        cert_found,
        cert_verified,
        vanish_cert: verdict.label().to_string(),
        time_ms_total: times.total(),
        times_ms: times,
        error,
    })
}

fn sphere_search(
    cfg: &SweepConfig,
    g: &Graph,
    source: RandomSource,
    betti_k: Option<u64>,
) -> std::result::Result<(bool, bool), String> {
    if cfg.detector_budget == 0 {
        return Ok((false, false));
    }
    let Some(cert) = find_sphere_certificate(g, cfg.k_max, cfg.detector_budget, source.substream(SPHERE_TAG)) else {
        return Ok((false, false));
    };
    let r = build_retraction(g, &cert).map_err(|e| e.to_string())?;
    if !verify_retraction(g, &r, &cert) {
        return Err(format!("retraction for {cert:?} fails verification"));
    }
    if betti_k == Some(0) {
        return Err(format!("sphere certificate {cert:?} found but β̃_{} = 0", cfg.k_max));
    }
    Ok((true, true))
}

fn paranoid_checks(
    cfg: &SweepConfig,
    x: &CliqueComplex,
    h: &HomologySummary,
    stream_id: u64,
) -> std::result::Result<(), String> {
    let other = if cfg.coeff == CoefficientSpec::Prime(CHECK_PRIME) {
        CoefficientSpec::default()
    } else {
        CoefficientSpec::Prime(CHECK_PRIME)
    };
    let h2 = reduced_betti(x.complex(), other).map_err(|e| e.to_string())?;
    if h2.reduced_betti != h.reduced_betti && matches!(h.coeff, CoefficientSpec::Prime(_)) {
        return Err(format!(
            "Betti numbers differ between {:?} ({:?}) and {:?} ({:?})",
            h.coeff, h.reduced_betti, other, h2.reduced_betti
        ));
    }
    if stream_id % 100 == 0 {
        for d in 0..=cfg.k_max.min(h.reduced_betti.len().saturating_sub(1)) {
            if !h.is_exact(d) {
                break;
            }
            match integer_homology(x.complex(), d, cfg.snf_limit) {
                Ok(z) if !z.torsion.is_empty() => {
                    return Err(format!("integer torsion {:?} in dimension {d}", z.torsion));
                }
                Ok(_) | Err(Error::TooLarge { .. }) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(())
}

/// Aggregates for one `(n, p, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: u64,
    pub p: f64,
    pub alpha: Option<f64>,
    pub k: usize,
    pub trials: usize,
    /// Trials with an exact `β̃_k`.
    pub exact_trials: usize,
    pub nonzero_prob: Option<f64>,
    pub ratio_mean: Option<f64>,
    pub ratio_stderr: Option<f64>,
    pub f_mean: f64,
    pub f_expected: f64,
    /// Sphere-certificate hit rate; reported at `k_max` only.
    pub cert_hit_rate: Option<f64>,
}

fn mean_stderr(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (Some(mean), Some((var / m).sqrt()))
}

/// Summaries for records sharing one point, for every `k <= k_max`.
pub fn summarize(records: &[TrialRecord], k_max: usize) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let head = &records[start];
        let end = start
            + records[start..]
                .iter()
                .take_while(|r| r.n == head.n && r.p.to_bits() == head.p.to_bits())
                .count();
        let group = &records[start..end];
        for k in 0..=k_max {
            let exact: Vec<&TrialRecord> = group.iter().filter(|r| r.betti_at(k).is_some()).collect();
            let nonzero = exact.iter().filter(|r| r.betti_at(k) != Some(0)).count();
            let ratios: Vec<f64> = exact
                .iter()
                .filter(|r| r.f_at(k) > 0)
                .map(|r| r.betti_at(k).unwrap() as f64 / r.f_at(k) as f64)
                .collect();
            let (ratio_mean, ratio_stderr) = mean_stderr(&ratios);
            let f_mean = group.iter().map(|r| r.f_at(k) as f64).sum::<f64>() / group.len() as f64;
            rows.push(SummaryRow {
                n: head.n,
                p: head.p,
                alpha: head.alpha,
                k,
                trials: group.len(),
                exact_trials: exact.len(),
                nonzero_prob: (!exact.is_empty()).then(|| nonzero as f64 / exact.len() as f64),
                ratio_mean,
                ratio_stderr,
                f_mean,
                f_expected: expected_faces(head.n, head.p, k as u64).unwrap_or(f64::NAN),
                cert_hit_rate: (k == k_max)
                    .then(|| group.iter().filter(|r| r.cert_found).count() as f64 / group.len() as f64),
            });
        }
        start = end;
    }
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every trial of the grid on `cfg.jobs` threads. Records come back
/// sorted by (point, index) with `trial_id` their position in that order.
/// An invariant violation aborts the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let points = cfg.points()?;
    let tasks: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|pi| (0..cfg.trials as u64).map(move |i| (pi, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<Result<TrialRecord>> =
        pool.install(|| tasks.par_iter().map(|&(pi, i)| run_trial(cfg, points[pi], i)).collect());
    let mut records = Vec::with_capacity(results.len());
    for (id, r) in results.into_iter().enumerate() {
        let mut rec = r?;
        rec.trial_id = id as u64;
        records.push(rec);
    }
    let summary = summarize(&records, cfg.k_max);
    Ok(SweepResult { records, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshulamReport {
    pub n: u64,
    pub p: f64,
    pub k: usize,
    pub trials: usize,
    pub hypothesis_held: usize,
    /// Trials where the hypothesis held but some `β̃_i`, `i <= k`, was nonzero.
    pub violations: Vec<u64>,
}

/// Samples G(n, p) and, whenever every `2k+2` vertices have a common
/// neighbour, checks `β̃_0 = ... = β̃_k = 0`.
pub fn meshulam_suite(n: u64, p: f64, k: usize, trials: usize, seed: u64) -> Result<MeshulamReport> {
    let l = 2 * k + 2;
    let mut report = MeshulamReport {
        n,
        p,
        k,
        trials,
        hypothesis_held: 0,
        violations: Vec::new(),
    };
    for i in 0..trials as u64 {
        let g = generate_gnp(n as usize, p, RandomSource::new(seed, trial_stream_id(n, p, i)))?;
        if l > g.n() || !common_neighbor_all(&g, l)?.holds() {
            continue;
        }
        report.hypothesis_held += 1;
        let x = build_clique_complex_limited(&g, k + 1, BuildLimits::default());
        let h = reduced_betti(x.complex(), CoefficientSpec::default())?;
        if (0..=k).any(|d| !h.is_exact(d) || h.betti(d) != 0) {
            report.violations.push(i);
        }
    }
    Ok(report)
}

/// Exact CSV column order for trial records.
pub const CSV_COLUMNS: [&str; 15] = [
    "trial_id",
    "n",
    "p",
    "alpha",
    "k",
    "seed",
    "f_vector",
    "betti",
    "truncated",
    "critical_lex",
    "d_pairs",
    "cert_found",
    "cert_verified",
    "vanish_cert",
    "time_ms_total",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    JsonLines,
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

fn csv_row(r: &TrialRecord) -> [String; 15] {
    [
        r.trial_id.to_string(),
        r.n.to_string(),
        r.p.to_string(),
        r.alpha.map(|a| a.to_string()).unwrap_or_default(),
        r.k.to_string(),
        r.seed.to_string(),
        join(&r.f_vector),
        join(&r.betti),
        r.truncated.to_string(),
        join(&r.critical_lex),
        r.d_pairs.to_string(),
        r.cert_found.to_string(),
        r.cert_verified.to_string(),
        r.vanish_cert.clone(),
        r.time_ms_total.to_string(),
    ]
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record(csv_row(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn records_to_json_lines(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Writes `records.csv` or `records.jsonl` into `dir` and returns its path.
pub fn emit(records: &[TrialRecord], format: Format, dir: &Path) -> Result<PathBuf> {
    let (name, body) = match format {
        Format::Csv => ("records.csv", records_to_csv(records)),
        Format::JsonLines => ("records.jsonl", records_to_json_lines(records)),
    };
    let path = dir.join(name);
    crate::io::write_string(&path, &body)?;
    Ok(path)
}

/// Both record formats plus `summary.json`.
pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = vec![
        emit(&result.records, Format::Csv, dir)?,
        emit(&result.records, Format::JsonLines, dir)?,
    ];
    let summary = dir.join("summary.json");
    let body = serde_json::to_string_pretty(&result.summary).expect("summary serializes") + "\n";
    crate::io::write_string(&summary, &body)?;
    paths.push(summary);
    Ok(paths)
}
