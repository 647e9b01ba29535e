//! `rotor`: directional complexity and entropy of piecewise affine Markov
//! circle maps.
//!
//! The pipeline is validate → graph → {counts, genfun, entropy, measure,
//! complexity}. All exact quantities print as rationals, all reals with
//! 12 significant digits, and CSV files are written atomically. Exit
//! codes: 0 success, 2 validation failure, 3 numeric failure.

use clap::{Parser, Subcommand};
use rotor_core::circle_map::{load_map, CircleMapSpec, MarkovPartition};
use rotor_core::complexity_lab::bounds_report;
use rotor_core::entropy_solver::{
    entropy_curve, max_entropy_direction, solve_direction, DirectionSpec, SolutionStatus,
};
use rotor_core::genfun::{denominator_h, numerator_matrix};
use rotor_core::markov_measure::{build_measure, expected_drift, measure_entropy};
use rotor_core::rational::{format_rational, parse_rational, to_f64, Rational};
use rotor_core::symbolic_graph::{
    build_graph, rotation_interval, structure_checks, RankEvidence, WeightedGraph,
};
use rotor_core::word_counts::{count_b, count_l, StripSpec};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rotor",
    about = "Directional complexity and entropy for piecewise affine Markov circle maps",
    version
)]
struct Cli {
    /// Map description file (JSON with breakpoints and lift_values)
    #[arg(long, global = true)]
    map: Option<PathBuf>,
    /// Require |slope| > 1 on every piece instead of eventual expansion
    #[arg(long, global = true)]
    strict_expansion: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the map conditions and report each with a witness
    Validate,
    /// Print the weighted transition graph as JSON
    Graph,
    /// Print the exact rotation interval
    RotationInterval,
    /// Primitivity and rank-condition report
    Structure,
    /// Word counts by weight or strip, one CSV row per length
    Counts {
        /// Largest word length
        #[arg(long)]
        n: usize,
        /// Fixed total weight (weight mode)
        #[arg(long, conflicts_with_all = ["alpha", "r"])]
        m: Option<i64>,
        /// Strip slope cot(theta) as an exact rational (strip mode)
        #[arg(long, requires = "r")]
        alpha: Option<String>,
        /// Strip half-width
        #[arg(long, requires = "alpha")]
        r: Option<u32>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print H(x,y) or a numerator entry in canonical text form
    Genfun {
        /// Numerator entry as 1-based "row,col"; H when omitted
        #[arg(long)]
        entry: Option<String>,
    },
    /// Solve one direction
    Entropy {
        /// cot(theta) as an exact rational
        #[arg(long)]
        alpha: String,
    },
    /// Solve a curve of directions and write alpha,x0,y0,entropy rows
    EntropyCurve {
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Direction of maximal entropy
    MaxDirection,
    /// Markov measure of one direction
    Measure {
        /// cot(theta) as an exact rational
        #[arg(long)]
        alpha: String,
    },
    /// Separated-set bounds table, CSV T,lower,observed,upper,rate
    Complexity {
        /// cot(theta) as an exact rational
        #[arg(long)]
        alpha: String,
        /// Window half-width; the window is [-r, r]
        #[arg(long)]
        r: u32,
        /// Block depth
        #[arg(long)]
        m: usize,
        /// Number of blocks; rows cover T = m, 2m, ..., km
        #[arg(long)]
        k: usize,
        /// Separation resolution (defaults to the minimal depth-m cylinder length)
        #[arg(long)]
        epsilon: Option<String>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Validation(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Numeric(m) => m,
        }
    }
}

macro_rules! numeric {
    ($e:expr) => {
        $e.map_err(|err| Failure::Numeric(err.to_string()))?
    };
}

/// `%.12g`-style formatting: 12 significant digits, fixed point for
/// moderate exponents, scientific otherwise.
fn fmt_g12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_owned();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // trim trailing zeros but keep at least one digit
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_owned()
    } else {
        format!("{v:.11e}")
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| Failure::Usage(format!("cannot create temporary file: {e}")))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Failure::Usage(format!("write failed: {e}")))?;
    tmp.persist(path)
        .map_err(|e| Failure::Usage(format!("rename failed: {e}")))?;
    Ok(())
}

fn emit(out: Option<&PathBuf>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn parse_alpha(text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::Usage(format!("bad --alpha: {e}")))
}

struct Pipeline {
    spec: CircleMapSpec,
    partition: MarkovPartition,
    graph: WeightedGraph,
}

fn load_spec(cli: &Cli) -> Result<CircleMapSpec, Failure> {
    let path = cli
        .map
        .as_ref()
        .ok_or_else(|| Failure::Usage("--map <FILE> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    load_map(&text).map_err(|e| Failure::Validation(e.to_string()))
}

fn load_pipeline(cli: &Cli) -> Result<Pipeline, Failure> {
    let spec = load_spec(cli)?;
    let report = spec.validate();
    if !report.ok(cli.strict_expansion) {
        return Err(Failure::Validation(
            report
                .first_failure(cli.strict_expansion)
                .unwrap_or_else(|| "validation failed".into()),
        ));
    }
    let partition = spec
        .refine()
        .map_err(|e| Failure::Validation(e.to_string()))?;
    let graph = build_graph(&partition).map_err(|e| Failure::Numeric(e.to_string()))?;
    Ok(Pipeline { spec, partition, graph })
}

/// Serialized form of the weighted graph; `weights[i][j]` is null where
/// there is no edge. Layers and the adjacency are derived, so this
/// round-trips the graph exactly.
#[derive(Serialize, Deserialize)]
struct GraphDump {
    p: usize,
    s0: i64,
    rho: usize,
    weights: Vec<Vec<Option<i64>>>,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate => {
            let spec = load_spec(cli)?;
            let report = spec.validate();
            for check in &report.checks {
                let verdict = if check.passed { "pass" } else { "FAIL" };
                match &check.witness {
                    Some(w) => println!("{:?}: {verdict} ({w})", check.kind),
                    None => println!("{:?}: {verdict}", check.kind),
                }
            }
            println!("expansion: {:?}", report.expansion);
            if report.ok(cli.strict_expansion) {
                println!("ok");
                Ok(())
            } else {
                Err(Failure::Validation(
                    report
                        .first_failure(cli.strict_expansion)
                        .unwrap_or_else(|| "validation failed".into()),
                ))
            }
        }
        Command::Graph => {
            let pipe = load_pipeline(cli)?;
            let dump = GraphDump {
                p: pipe.graph.state_count(),
                s0: pipe.graph.s0(),
                rho: pipe.graph.rho(),
                weights: pipe.graph.weights().to_vec(),
            };
            println!("{}", serde_json::to_string_pretty(&dump).unwrap());
            Ok(())
        }
        Command::RotationInterval => {
            let pipe = load_pipeline(cli)?;
            let iv = numeric!(rotation_interval(&pipe.graph));
            println!(
                "rotation interval: [{}, {}] = [{}, {}]",
                format_rational(&iv.lo),
                format_rational(&iv.hi),
                fmt_g12(iv.lo_f64()),
                fmt_g12(iv.hi_f64())
            );
            Ok(())
        }
        Command::Structure => {
            let pipe = load_pipeline(cli)?;
            let report = structure_checks(&pipe.graph);
            match report.witness {
                Some(k) => println!("primitive: {} (A^{k} > 0)", report.primitive),
                None => println!("primitive: {}", report.primitive),
            }
            let evidence = match report.rank_evidence {
                RankEvidence::DistinctRowSupports(i, j) => {
                    format!("rows {} and {} have different supports (exact)", i + 1, j + 1)
                }
                RankEvidence::Sampled { samples } => format!(
                    "all {samples} sampled phases kept rank > 1 (heuristic, not a certificate)"
                ),
                RankEvidence::RankDrop { phi } => {
                    format!("rank drops to 1 at phase {}", fmt_g12(phi))
                }
                RankEvidence::Scalar => "single state: rank is identically 1".into(),
            };
            println!("rank condition: {} ({evidence})", report.rank_condition);
            Ok(())
        }
        Command::Counts { n, m, alpha, r, out } => {
            let pipe = load_pipeline(cli)?;
            let mut csv = String::new();
            match (m, alpha, r) {
                (Some(m), None, None) => {
                    csv.push_str("n,m,total\n");
                    for len in 1..=*n {
                        let total = count_l(&pipe.graph, len, *m).total();
                        csv.push_str(&format!("{len},{m},{total}\n"));
                    }
                }
                (None, Some(alpha), Some(r)) => {
                    let alpha = parse_alpha(alpha)?;
                    let strip = StripSpec::new(alpha.clone(), *r);
                    csv.push_str("n,alpha,r,total\n");
                    for len in 1..=*n {
                        let total = count_b(&pipe.graph, len, &strip).total();
                        csv.push_str(&format!(
                            "{len},{},{r},{total}\n",
                            format_rational(&alpha)
                        ));
                    }
                }
                _ => {
                    return Err(Failure::Usage(
                        "counts needs either --m or both --alpha and --r".into(),
                    ))
                }
            }
            emit(out.as_ref(), &csv)
        }
        Command::Genfun { entry } => {
            let pipe = load_pipeline(cli)?;
            match entry {
                None => println!("{}", denominator_h(&pipe.graph)),
                Some(spec_str) => {
                    let (i, j) = spec_str
                        .split_once(',')
                        .and_then(|(a, b)| {
                            Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?))
                        })
                        .ok_or_else(|| {
                            Failure::Usage("--entry expects \"row,col\" (1-based)".into())
                        })?;
                    let p = pipe.graph.state_count();
                    if i == 0 || j == 0 || i > p || j > p {
                        return Err(Failure::Usage(format!(
                            "--entry indices must lie in 1..={p}"
                        )));
                    }
                    let numer = numerator_matrix(&pipe.graph);
                    println!("{}", numer.entry(i - 1, j - 1));
                }
            }
            Ok(())
        }
        Command::Entropy { alpha } => {
            let pipe = load_pipeline(cli)?;
            let alpha = parse_alpha(alpha)?;
            let dir = DirectionSpec::from_alpha(to_f64(&alpha), &pipe.graph);
            let sol = numeric!(solve_direction(&pipe.graph, &dir));
            println!("alpha = {}", format_rational(&alpha));
            println!("theta = {}", fmt_g12(dir.theta));
            match sol.status {
                SolutionStatus::OutsideInterval => {
                    println!("status = outside rotation interval");
                    println!("entropy = 0");
                }
                status => {
                    println!(
                        "status = {}",
                        if status == SolutionStatus::Boundary {
                            "boundary (one-sided extrapolation)"
                        } else {
                            "interior"
                        }
                    );
                    println!("x0 = {}", fmt_g12(sol.x0));
                    println!("y0 = {}", fmt_g12(sol.y0));
                    println!("entropy = {}", fmt_g12(sol.entropy));
                    println!("Q = {}", fmt_g12(sol.q_value));
                    println!(
                        "residuals: |H| = {}, |alpha*x*Hx - y*Hy| = {}",
                        fmt_g12(sol.residual_h),
                        fmt_g12(sol.residual_ray)
                    );
                    println!(
                        "flags: f_nonzero_diag = {}, q_nonzero = {}, on_boundary = {}",
                        sol.f_nonzero_diag, sol.q_nonzero, sol.on_boundary
                    );
                }
            }
            Ok(())
        }
        Command::EntropyCurve { samples, out } => {
            let pipe = load_pipeline(cli)?;
            let curve = numeric!(entropy_curve(&pipe.graph, *samples));
            let mut csv = String::from("alpha,x0,y0,entropy\n");
            for row in &curve.rows {
                let flag = match row.status {
                    SolutionStatus::Interior => "",
                    SolutionStatus::Boundary => ",boundary",
                    SolutionStatus::OutsideInterval => ",outside",
                };
                csv.push_str(&format!(
                    "{},{},{},{}{flag}\n",
                    fmt_g12(row.alpha_true),
                    fmt_g12(row.x0),
                    fmt_g12(row.y0),
                    fmt_g12(row.entropy)
                ));
            }
            emit(Some(out), &csv)
        }
        Command::MaxDirection => {
            let pipe = load_pipeline(cli)?;
            let max = numeric!(max_entropy_direction(&pipe.graph));
            println!("alpha_max = {}", fmt_g12(max.alpha_max));
            println!("theta_max = {}", fmt_g12(max.theta_max));
            println!("h_top = {}", fmt_g12(max.h_top));
            Ok(())
        }
        Command::Measure { alpha } => {
            let pipe = load_pipeline(cli)?;
            let alpha_exact = parse_alpha(alpha)?;
            let alpha_f = to_f64(&alpha_exact);
            let dir = DirectionSpec::from_alpha(alpha_f, &pipe.graph);
            let sol = numeric!(solve_direction(&pipe.graph, &dir));
            if sol.status != SolutionStatus::Interior {
                return Err(Failure::Numeric(format!(
                    "alpha = {} is not strictly inside the rotation interval",
                    format_rational(&alpha_exact)
                )));
            }
            let mu = numeric!(build_measure(&pipe.graph, &sol, alpha_f));
            let p = pipe.graph.state_count();
            println!("Pi (row-stochastic):");
            for i in 0..p {
                let row: Vec<String> =
                    (0..p).map(|j| fmt_g12(mu.pi[(i, j)])).collect();
                println!("  {}", row.join(" "));
            }
            let q: Vec<String> = (0..p).map(|i| fmt_g12(mu.q[i])).collect();
            println!("q = {}", q.join(" "));
            let h_mu = measure_entropy(&mu);
            let drift = expected_drift(&mu, &pipe.graph);
            println!("entropy h(mu) = {}", fmt_g12(h_mu));
            println!("expected drift = {}", fmt_g12(drift));
            println!(
                "solver entropy = {} (difference {})",
                fmt_g12(sol.entropy),
                fmt_g12(h_mu - sol.entropy)
            );
            // raw-scaled Perron pair of A(x0, y0) for direct comparison
            // with published eigenvector tables
            let l_raw: Vec<String> =
                mu.perron.left_raw().iter().map(|v| fmt_g12(*v)).collect();
            let r_raw: Vec<String> =
                mu.perron.right_raw().iter().map(|v| fmt_g12(*v)).collect();
            println!("l (raw, first component 1) = {}", l_raw.join(" "));
            println!("r (raw, first component 1) = {}", r_raw.join(" "));
            Ok(())
        }
        Command::Complexity { alpha, r, m, k, epsilon, out } => {
            let pipe = load_pipeline(cli)?;
            let alpha = parse_alpha(alpha)?;
            let epsilon = match epsilon {
                Some(text) => Some(
                    parse_rational(text)
                        .map_err(|e| Failure::Usage(format!("bad --epsilon: {e}")))?,
                ),
                None => None,
            };
            let rows = numeric!(bounds_report(
                &pipe.spec,
                &pipe.partition,
                &pipe.graph,
                alpha,
                *r,
                *m,
                *k,
                epsilon
            ));
            let mut csv = String::from("T,lower,observed,upper,rate\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.t,
                    row.lower,
                    row.observed,
                    row.upper,
                    fmt_g12(row.rate)
                ));
            }
            emit(out.as_ref(), &csv)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ROTOR_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
