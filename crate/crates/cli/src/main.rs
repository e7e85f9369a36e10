use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cliquelab::analytic::{self, EdgeProbability};
use cliquelab::complex::{build_clique_complex, CliqueComplex, SimplicialComplex};
use cliquelab::detectors::{
    build_retraction, find_sphere_certificate, vanishing_certificate, verify_retraction, CertificateAudit,
};
use cliquelab::harness::{run_sweep, write_sweep, SweepConfig};
use cliquelab::homology::{integer_homology, reduced_betti, CoefficientSpec, DEFAULT_SNF_LIMIT};
use cliquelab::io;
use cliquelab::morse::{lex_gradient_field, random_matching_field, verify_acyclic};
use cliquelab::{generate_gnp, Graph, RandomSource};

#[derive(Parser)]
#[command(name = "cliquelab", version, about = "Random clique complexes X(n, p)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G(n, p) and write it as an edge list.
    Generate(GenerateArgs),
    /// Write the clique complex of a graph as a facet list.
    Complex(ComplexArgs),
    /// Reduced Betti numbers (and torsion over Z) as JSON.
    Homology(HomologyArgs),
    /// Critical counts of a discrete Morse field as JSON.
    Morse(MorseArgs),
    /// Sphere or vanishing certificates as JSON.
    Detect(DetectArgs),
    /// Closed-form expectations and threshold probes as JSON.
    Analytic(AnalyticArgs),
    /// Run a seeded sweep from a JSON config.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Probability {
    #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
    p: Option<f64>,
    /// Use p = n^alpha.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

impl Probability {
    fn spec(&self) -> EdgeProbability {
        match (self.p, self.alpha) {
            (Some(p), _) => EdgeProbability::Explicit(p),
            (None, Some(a)) => EdgeProbability::Alpha(a),
            (None, None) => unreachable!("clap requires one of --p/--alpha"),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    prob: Probability,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComplexArgs {
    /// Edge-list file.
    graph: PathBuf,
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Edges,
    Facets,
}

#[derive(Args)]
struct HomologyArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "edges")]
    format: InputFormat,
    /// Enumerate cliques through this dimension (edge-list input only).
    #[arg(long)]
    max_dim: Option<usize>,
    /// A prime modulus, or `z` for the integers.
    #[arg(long, default_value = "2147483647")]
    coeff: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Lex,
    Random,
}

#[derive(Args)]
struct MorseArgs {
    graph: PathBuf,
    #[arg(long, value_enum)]
    strategy: Strategy,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DetectArgs {
    graph: PathBuf,
    #[arg(long, requires = "budget", conflicts_with = "vanish_k", required_unless_present = "vanish_k")]
    sphere_k: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    vanish_k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    prob: Probability,
    #[arg(long)]
    k: u64,
    /// Subset size for the common-neighbour threshold.
    #[arg(long)]
    l: Option<u64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    offset: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the config's `jobs`.
    #[arg(long)]
    jobs: Option<usize>,
}

fn read_graph(path: &Path) -> Result<Graph> {
    io::parse_edge_list(&io::read_to_string(path)?).with_context(|| path.display().to_string())
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_string(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn parse_coeff(s: &str) -> Result<CoefficientSpec> {
    if s.eq_ignore_ascii_case("z") {
        return Ok(CoefficientSpec::Integers);
    }
    let p: u64 = s.parse().with_context(|| format!("coefficient {s:?} is neither a prime nor `z`"))?;
    Ok(CoefficientSpec::prime(p)?)
}

fn clique_complex(g: &Graph, max_dim: Option<usize>) -> CliqueComplex {
    build_clique_complex(g, max_dim.unwrap_or(g.n()))
}

fn generate(a: GenerateArgs) -> Result<()> {
    let p = a.prob.spec().resolve(a.n)?;
    let g = generate_gnp(a.n as usize, p, RandomSource::new(a.seed, a.stream))?;
    emit_text(a.out.as_deref(), &io::write_edge_list(&g))
}

fn complex(a: ComplexArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let x = clique_complex(&g, a.max_dim);
    emit_text(a.out.as_deref(), &io::write_facets(x.complex()))
}

fn homology(a: HomologyArgs) -> Result<()> {
    let coeff = parse_coeff(&a.coeff)?;
    let x: SimplicialComplex = match a.format {
        InputFormat::Edges => clique_complex(&read_graph(&a.input)?, a.max_dim).complex().clone(),
        InputFormat::Facets => {
            if a.max_dim.is_some() {
                bail!("--max-dim applies to edge-list input only");
            }
            io::parse_facets(&io::read_to_string(&a.input)?)?
        }
    };
    let h = reduced_betti(&x, coeff)?;
    let torsion = match coeff {
        CoefficientSpec::Integers => Some(
            (0..h.reduced_betti.len())
                .map(|k| integer_homology(&x, k, DEFAULT_SNF_LIMIT).map(|z| z.torsion))
                .collect::<cliquelab::Result<Vec<_>>>()?,
        ),
        CoefficientSpec::Prime(_) => None,
    };
    print_json(&json!({
        "f_vector": x.f_vector().0,
        "coeff": coeff,
        "reduced_betti": h.reduced_betti,
        "exact": h.exact,
        "reduced_minus_one": h.reduced_minus_one,
        "torsion": torsion.map(|t| t.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()),
    }))
}

fn morse(a: MorseArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    let x = clique_complex(&g, Some(a.k + 1));
    let out = match a.strategy {
        Strategy::Lex => {
            let v = lex_gradient_field(&x, a.k)?;
            json!({
                "strategy": "lex",
                "k": a.k,
                "f_k": x.count(a.k),
                "pairs": v.pairs.len(),
                "critical": v.critical_faces(x.complex(), a.k).len(),
                "critical_upper": v.critical_faces(x.complex(), a.k + 1).len(),
                "acyclic": verify_acyclic(&v, x.complex())?,
            })
        }
        Strategy::Random => {
            let (v, rep) = random_matching_field(x.complex(), a.k, RandomSource::new(a.seed, 0))?;
            json!({
                "strategy": "random",
                "k": a.k,
                "f_k": x.count(a.k),
                "pairs": v.pairs.len(),
                "critical": v.critical_faces(x.complex(), a.k).len(),
                "critical_lower": v.critical_lower.len(),
                "proposed": rep.proposed,
                "conflicts_removed": rep.conflicts_removed,
                "cycles_broken": rep.cycles_broken,
                "removed": rep.removed(),
                "acyclic": verify_acyclic(&v, x.complex())?,
            })
        }
    };
    print_json(&out)
}

fn detect(a: DetectArgs) -> Result<()> {
    let g = read_graph(&a.graph)?;
    if let Some(k) = a.vanish_k {
        let verdict = vanishing_certificate(&g, k)?;
        return print_json(&json!({ "k": k, "result": verdict.label(), "verdict": verdict }));
    }
    let k = a.sphere_k.expect("clap enforces --sphere-k or --vanish-k");
    let budget = a.budget.expect("clap enforces --budget with --sphere-k");
    match find_sphere_certificate(&g, k, budget, RandomSource::new(a.seed, 0)) {
        Some(cert) => {
            let r = build_retraction(&g, &cert)?;
            let verified = verify_retraction(&g, &r, &cert);
            print_json(&json!({
                "found": true,
                "verified": verified,
                "certificate": CertificateAudit::new(&cert, &r),
            }))
        }
        None => print_json(&json!({ "found": false, "verified": false, "certificate": null })),
    }
}

fn analytic_cmd(a: AnalyticArgs) -> Result<()> {
    let spec = a.prob.spec();
    let p = spec.resolve(a.n)?;
    let dim = (p > 0.0 && p < 1.0)
        .then(|| analytic::dimension_estimate(a.n as f64, p))
        .transpose()?;
    let probe = (a.k >= 1)
        .then(|| analytic::threshold_probe(a.n, a.k, a.offset, a.l))
        .transpose()?;
    print_json(&json!({
        "n": a.n,
        "p": p,
        "alpha": spec.alpha(),
        "k": a.k,
        "expected_faces": analytic::expected_faces(a.n, p, a.k)?,
        "ln_expected_faces": analytic::ln_expected_faces(a.n, p, a.k)?,
        "expected_faces_second_moment": analytic::expected_faces_second_moment(a.n, p, a.k)?,
        "face_variance": analytic::face_variance(a.n, p, a.k)?,
        "expected_bad_pairs": analytic::expected_bad_pairs(a.n, p, a.k)?,
        "dimension_estimate": dim,
        "threshold_probe": probe,
    }))
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::from_json(&io::read_to_string(&a.config)?)?;
    if let Some(j) = a.jobs {
        cfg.jobs = j;
    }
    let dir = match (a.out, &cfg.output) {
        (Some(d), _) => d,
        (None, Some(d)) => d.clone(),
        (None, None) => bail!("no output directory: pass --out or set `output` in the config"),
    };
    let result = run_sweep(&cfg)?;
    for path in write_sweep(&result, &dir)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(a) => generate(a),
        Command::Complex(a) => complex(a),
        Command::Homology(a) => homology(a),
        Command::Morse(a) => morse(a),
        Command::Detect(a) => detect(a),
        Command::Analytic(a) => analytic_cmd(a),
        Command::Sweep(a) => sweep(a),
    }
}
