//! Command-line front end: load spaces, chains, words, and groups from
//! JSON, run the exact and spectral computations, and emit or verify
//! certificates.
//!
//! Exit codes: 0 on success, 1 on domain errors (invalid metric,
//! infeasible input, failed verification), 2 on I/O or parse errors.
//! Machine-readable JSON goes to stdout (or `--out`); a short human
//! summary goes to stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use graevkit::gns::RawPdFunction;
use graevkit::graev::RawWord;
use graevkit::norm::RawMeasure;
use graevkit::rational::{format_rational, parse_rational};
use graevkit::{
    build_net, certificate_for, evaluate_preimage, free_distance, free_norm, gns_construct,
    graev_distance, greedy_preimage, integer_witness, kantorovich_distance, psd_check,
    round_to_integer_plan, schoenberg_gram, validate_space, verify_certificate,
    verify_representation, Certificate, Chain, Error, FiniteAbelianGroup, NormKind,
    NormedSpaceSpec, PointedMetricSpace, SpaceRef, TransportPlan, Word,
};

#[derive(Parser)]
#[command(
    name = "graevkit",
    about = "Exact transport distances, word metrics, and finite GNS constructions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a space and report violations.
    Validate {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transport norm of a chain.
    Norm {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm distance between two chains.
    Dist {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "chain-a")]
        chain_a: PathBuf,
        #[arg(long = "chain-b")]
        chain_b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transport distance between two probability measures.
    Kantorovich {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        mu1: PathBuf,
        #[arg(long)]
        mu2: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Word metric between two integer words, with an integer witness plan.
    Graev {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        u: PathBuf,
        /// Defaults to the zero word when omitted.
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a chain and emit an optimality certificate.
    DualCert {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate without re-solving.
    Verify {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Round a fractional plan with integer divergences to an integer plan.
    RoundPlan {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral positive-semidefiniteness test of a Hermitian matrix.
    Psd {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exponential kernel matrix over a point sample, with a PSD check.
    Schoenberg {
        /// JSON array of point coordinate arrays.
        #[arg(long, conflicts_with = "random")]
        points: Option<PathBuf>,
        /// Generate this many random points instead of reading a file.
        #[arg(long, requires = "dim")]
        random: Option<usize>,
        /// Dimension for randomly generated points.
        #[arg(long)]
        dim: Option<usize>,
        /// Kernel exponent; positive definiteness is guaranteed for 1 <= p <= 2.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the GNS representation of a positive definite function and
    /// report its residuals.
    Gns {
        /// JSON group spec: {"cyclic_factors": [4, 3]}.
        #[arg(long)]
        group: PathBuf,
        /// JSON map from element index to [re, im].
        #[arg(long)]
        pdf: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy sphere-net preimage demo: residual decay trace and summable
    /// mass for a target vector.
    QuotientDemo {
        #[arg(long)]
        dim: usize,
        /// "max" or a p-norm exponent (p >= 1).
        #[arg(long, default_value = "2")]
        norm: String,
        #[arg(long, default_value_t = 0.125)]
        mesh: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON array with the target vector; random of norm <= 1/2 when omitted.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// Domain failure: exit code 1.
    Domain(String),
    /// I/O or parse failure: exit code 2.
    Input(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Input(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ParseRational(_) | Error::ParseInput(_) => CliError::Input(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

// ---------------------------------------------------------------------------
// input loading
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))
}

#[derive(Deserialize)]
struct RawSpace {
    points: Vec<String>,
    basepoint: String,
    dist: Vec<Vec<String>>,
}

/// Load a space file. JSON shape problems and malformed rationals are parse
/// errors; structural problems (bad matrix shape, unknown basepoint) are
/// domain errors.
fn load_space_unvalidated(path: &Path) -> Result<SpaceRef, CliError> {
    let raw: RawSpace = load_json(path)?;
    let dist = raw
        .dist
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| {
                    parse_rational(s).map_err(|e| CliError::Input(format!(
                        "cannot parse {}: {e}",
                        path.display()
                    )))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let space = PointedMetricSpace::from_parts(raw.points, &raw.basepoint, dist)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    Ok(Arc::new(space))
}

/// Load a space and require the metric axioms to hold.
fn load_space(path: &Path) -> Result<SpaceRef, CliError> {
    let space = load_space_unvalidated(path)?;
    let report = validate_space(&space);
    if !report.ok {
        let first = &report.violations[0];
        return Err(CliError::Domain(format!(
            "invalid metric in {}: {} violated at {:?}",
            path.display(),
            first.axiom,
            first.indices
        )));
    }
    Ok(space)
}

fn load_chain(path: &Path, space: &SpaceRef) -> Result<Chain, CliError> {
    let raw: BTreeMap<String, String> = load_json(path)?;
    let mut coeffs = Vec::with_capacity(raw.len());
    for (point, value) in raw {
        let coeff = parse_rational(&value)
            .map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))?;
        coeffs.push((point, coeff));
    }
    Chain::new(space, coeffs).map_err(CliError::from)
}

fn load_word(path: &Path, space: &SpaceRef) -> Result<Word, CliError> {
    let raw: RawWord = load_json(path)?;
    raw.resolve(space).map_err(CliError::from)
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T, summary: &str) -> Result<(), CliError> {
    let mut json = serde_json::to_string(value)
        .map_err(|e| CliError::Input(format!("cannot serialize output: {e}")))?;
    json.push('\n');
    match out {
        Some(path) => std::fs::write(path, json)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    eprintln!("{summary}");
    Ok(())
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Validate { space, out } => {
            let space = load_space_unvalidated(&space)?;
            let report = validate_space(&space);
            let ok = report.ok;
            let summary = if ok {
                "valid metric space".to_string()
            } else {
                format!("{} axiom violation(s)", report.violations.len())
            };
            emit(&out, &report, &summary)?;
            Ok(if ok { 0 } else { 1 })
        }

        Command::Norm { space, chain, out } => {
            let space = load_space(&space)?;
            let chain = load_chain(&chain, &space)?;
            let value = free_norm(&space, &chain)?;
            #[derive(Serialize)]
            struct Out {
                norm: String,
            }
            let norm = format_rational(&value);
            emit(&out, &Out { norm: norm.clone() }, &format!("norm = {norm}"))?;
            Ok(0)
        }

        Command::Dist {
            space,
            chain_a,
            chain_b,
            out,
        } => {
            let space = load_space(&space)?;
            let a = load_chain(&chain_a, &space)?;
            let b = load_chain(&chain_b, &space)?;
            let value = free_distance(&space, &a, &b)?;
            #[derive(Serialize)]
            struct Out {
                distance: String,
            }
            let distance = format_rational(&value);
            emit(
                &out,
                &Out {
                    distance: distance.clone(),
                },
                &format!("distance = {distance}"),
            )?;
            Ok(0)
        }

        Command::Kantorovich {
            space,
            mu1,
            mu2,
            out,
        } => {
            let space = load_space(&space)?;
            let mu1 = load_json::<RawMeasure>(&mu1)?.resolve(&space)?;
            let mu2 = load_json::<RawMeasure>(&mu2)?.resolve(&space)?;
            let value = kantorovich_distance(&space, &mu1, &mu2)?;
            #[derive(Serialize)]
            struct Out {
                distance: String,
            }
            let distance = format_rational(&value);
            emit(
                &out,
                &Out {
                    distance: distance.clone(),
                },
                &format!("distance = {distance}"),
            )?;
            Ok(0)
        }

        Command::Graev { space, u, v, out } => {
            let space = load_space(&space)?;
            let u = load_word(&u, &space)?;
            let v = match v {
                Some(path) => load_word(&path, &space)?,
                None => Word::zero(),
            };
            let value = graev_distance(&space, &u, &v)?;
            let witness = integer_witness(&space, &u.sub(&v))?;
            #[derive(Serialize)]
            struct Out {
                distance: String,
                witness: Vec<(String, String, String)>,
                witness_cost: String,
            }
            let distance = format_rational(&value);
            emit(
                &out,
                &Out {
                    distance: distance.clone(),
                    witness: witness.to_named_triples(),
                    witness_cost: format_rational(&witness.cost()),
                },
                &format!("distance = {distance}"),
            )?;
            Ok(0)
        }

        Command::DualCert { space, chain, out } => {
            let space = load_space(&space)?;
            let chain = load_chain(&chain, &space)?;
            let cert = certificate_for(&space, &chain)?;
            let summary = format!("cost = {}", cert.cost);
            emit(&out, &cert, &summary)?;
            Ok(0)
        }

        Command::Verify { space, cert, out } => {
            let space = load_space(&space)?;
            let cert: Certificate = load_json(&cert)?;
            let failures = verify_certificate(&space, &cert)?;
            #[derive(Serialize)]
            struct Out {
                verified: bool,
                failures: Vec<String>,
            }
            let verified = failures.is_empty();
            let summary = if verified {
                "certificate verified".to_string()
            } else {
                format!("certificate rejected ({} failure(s))", failures.len())
            };
            emit(
                &out,
                &Out {
                    verified,
                    failures,
                },
                &summary,
            )?;
            Ok(if verified { 0 } else { 1 })
        }

        Command::RoundPlan { space, plan, out } => {
            let space = load_space(&space)?;
            let triples: Vec<(String, String, String)> = load_json(&plan)?;
            let plan = TransportPlan::from_named_triples(space.clone(), &triples)?;
            let rounded = round_to_integer_plan(&plan)?;
            #[derive(Serialize)]
            struct Out {
                cost: String,
                plan: Vec<(String, String, String)>,
            }
            let cost = format_rational(&rounded.cost());
            emit(
                &out,
                &Out {
                    cost: cost.clone(),
                    plan: rounded.to_named_triples(),
                },
                &format!("integral plan cost = {cost}"),
            )?;
            Ok(0)
        }

        Command::Psd { matrix, tol, out } => {
            let value: serde_json::Value = load_json(&matrix)?;
            let m = parse_complex_matrix(&value)
                .map_err(|e| CliError::Input(format!("cannot parse {}: {e}", matrix.display())))?;
            let (is_psd, min_eigenvalue) = psd_check(&m, tol)?;
            #[derive(Serialize)]
            struct Out {
                is_psd: bool,
                min_eigenvalue: f64,
                n: usize,
            }
            emit(
                &out,
                &Out {
                    is_psd,
                    min_eigenvalue,
                    n: m.nrows(),
                },
                &format!("is_psd = {is_psd}, min eigenvalue = {min_eigenvalue:e}"),
            )?;
            Ok(0)
        }

        Command::Schoenberg {
            points,
            random,
            dim,
            p,
            tol,
            seed,
            out,
        } => {
            let pts: Vec<Vec<f64>> = match (points, random) {
                (Some(path), None) => load_json(&path)?,
                (None, Some(count)) => {
                    let dim = dim.ok_or_else(|| {
                        CliError::Input("--random requires --dim".to_string())
                    })?;
                    let mut rng = StdRng::seed_from_u64(seed);
                    (0..count)
                        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                        .collect()
                }
                _ => {
                    return Err(CliError::Input(
                        "provide exactly one of --points or --random".to_string(),
                    ))
                }
            };
            if !(1.0..=2.0).contains(&p) {
                eprintln!(
                    "note: p = {p} is outside [1, 2]; positive definiteness is not guaranteed"
                );
            }
            let gram = schoenberg_gram(&pts, p)?;
            let (is_psd, min_eigenvalue) = psd_check(&graevkit::complexify(&gram), tol)?;
            #[derive(Serialize)]
            struct Out {
                is_psd: bool,
                min_eigenvalue: f64,
                n: usize,
                p: f64,
            }
            emit(
                &out,
                &Out {
                    is_psd,
                    min_eigenvalue,
                    n: pts.len(),
                    p,
                },
                &format!("is_psd = {is_psd}, min eigenvalue = {min_eigenvalue:e}"),
            )?;
            Ok(0)
        }

        Command::Gns {
            group,
            pdf,
            tol,
            out,
        } => {
            let group: FiniteAbelianGroup = load_json(&group)?;
            let group = FiniteAbelianGroup::new(group.cyclic_factors).map_err(CliError::from)?;
            let raw: RawPdFunction = load_json(&pdf)?;
            let f = raw.resolve(&group)?;
            let model = gns_construct(&group, &f, tol)?;
            let report = verify_representation(&model, &group, &f, tol);
            let summary = format!(
                "quotient dim = {}, max residual = {:e}",
                report.quotient_dim,
                report
                    .unitarity
                    .max(report.homomorphism)
                    .max(report.f_recovery)
            );
            emit(&out, &report, &summary)?;
            Ok(0)
        }

        Command::QuotientDemo {
            dim,
            norm,
            mesh,
            steps,
            seed,
            target,
            out,
        } => {
            let kind = if norm == "max" {
                NormKind::Max
            } else {
                let p: f64 = norm
                    .parse()
                    .map_err(|_| CliError::Input(format!("bad norm `{norm}`")))?;
                NormKind::P(p)
            };
            let spec = NormedSpaceSpec::new(dim, kind)?;
            let net = build_net(&spec, mesh)?;
            let x: Vec<f64> = match target {
                Some(path) => load_json(&path)?,
                None => {
                    let mut rng = StdRng::seed_from_u64(seed);
                    let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let n = spec.norm(&raw);
                    let scale = rng.random_range(0.1..1.0) * 0.5;
                    raw.iter().map(|v| v * scale / n).collect()
                }
            };
            let run = greedy_preimage(&net, &x, steps)?;
            let (recon, l1_mass) = evaluate_preimage(&net, &run.coeffs)?;
            let diff: Vec<f64> = recon.iter().zip(&x).map(|(a, b)| a - b).collect();
            #[derive(Serialize)]
            struct Out {
                residuals: Vec<f64>,
                l1_mass: f64,
                reconstruction_error: f64,
            }
            let reconstruction_error = spec.norm(&diff);
            let summary = format!(
                "{} steps, reconstruction error = {reconstruction_error:e}, mass = {l1_mass}",
                run.residual_norms.len()
            );
            emit(
                &out,
                &Out {
                    residuals: run.residual_norms,
                    l1_mass,
                    reconstruction_error,
                },
                &summary,
            )?;
            Ok(0)
        }
    }
}

/// Parse a complex matrix from JSON: entries are numbers (real) or
/// two-element [re, im] arrays.
fn parse_complex_matrix(value: &serde_json::Value) -> Result<DMatrix<Complex64>, String> {
    let rows = value.as_array().ok_or("matrix must be an array of rows")?;
    if rows.is_empty() {
        return Err("matrix is empty".to_string());
    }
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * n);
    for row in rows {
        let row = row.as_array().ok_or("rows must be arrays")?;
        if row.len() != n {
            return Err("matrix must be square".to_string());
        }
        for cell in row {
            entries.push(parse_complex(cell)?);
        }
    }
    Ok(DMatrix::from_row_slice(n, n, &entries))
}

fn parse_complex(value: &serde_json::Value) -> Result<Complex64, String> {
    if let Some(x) = value.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    if let Some(pair) = value.as_array() {
        if pair.len() == 2 {
            let re = pair[0].as_f64().ok_or("bad real part")?;
            let im = pair[1].as_f64().ok_or("bad imaginary part")?;
            return Ok(Complex64::new(re, im));
        }
    }
    Err(format!("bad matrix entry {value}"))
}
