//! Command-line front end for spectral analysis of generalized indefinite
//! strings.
//!
//! Four subcommands share one JSON problem-document format on stdin or a
//! file: `classify` runs the tail-criteria classifier, `spectrum`
//! approximates eigenvalues, `verify` runs a named self-check suite, and
//! `transform` rewrites a problem as a plain string document. Exit code 0
//! means success, 2 means the classifier returned at least one
//! inconclusive verdict, and 1 means the input or the computation failed.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gis_cli::schema::{
    ClassificationJson, Problem, ProblemDoc, Requested, SpectrumJson,
};
use gis_cli::verify::{run_suite, SUITES};
use gis_core::camassa_holm::ch_to_string;
use gis_core::coefficients::{anti_derivative_of_measure, GIString, MeasureRepr};
use gis_core::criteria::{classify, classify_krein, Classification};
use gis_core::delta_prime::{dp_classify, dp_string};
use gis_core::discretization::{suggest_nodes, BoundaryTreatment};
use gis_core::pencil::{
    finite_rank_bound, refine_until, smallest_by_magnitude, solve_spectrum, Spectrum,
};

#[derive(Parser)]
#[command(
    name = "gis",
    version,
    about = "Spectral classification and computation for generalized indefinite strings"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct IoArgs {
    /// Problem document (JSON); `-` reads stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide spectral properties from the coefficients alone.
    Classify {
        #[command(flatten)]
        io: IoArgs,
        /// Comma-separated Schatten exponents, e.g. `--p 1.5,2`.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
    },
    /// Approximate the spectrum on a refinement ladder or a fixed grid.
    Spectrum {
        #[command(flatten)]
        io: IoArgs,
        /// Solve once on a grid of this many cells instead of refining.
        #[arg(long)]
        grid_n: Option<usize>,
        /// Relative movement tolerance for the tracked eigenvalues.
        #[arg(long)]
        tol: Option<f64>,
        /// How many eigenvalues nearest zero to track and report.
        #[arg(long)]
        k: Option<usize>,
        /// Maximum number of refinement levels.
        #[arg(long)]
        levels: Option<usize>,
        /// Right end of the computational window for half-line problems.
        #[arg(long)]
        truncation: Option<f64>,
    },
    /// Run a named self-check suite and report per-case results.
    Verify {
        /// One of: traces, hs, crossval, ch-consistency, dp-calibration.
        #[arg(long)]
        suite: String,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite the problem as a plain string document.
    Transform {
        #[command(flatten)]
        io: IoArgs,
        /// Interaction-support truncation for generator documents.
        #[arg(long)]
        truncation: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Classify { io, p } => {
            let doc = read_doc(&io.input)?;
            let p_list = p
                .or_else(|| requested(&doc).p_list.clone())
                .unwrap_or_else(|| vec![2.0]);
            let cls = classify_problem(&doc.parse().map_err(|e| e.to_string())?, &p_list)
                .map_err(|e| e.to_string())?;
            let out = ClassificationJson::from_core(&cls);
            let code = if out.any_inconclusive() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
            emit(&io.out, &out)?;
            Ok(code)
        }
        Cmd::Spectrum { io, grid_n, tol, k, levels, truncation } => {
            let doc = read_doc(&io.input)?;
            let req = requested(&doc);
            let grid_n = grid_n.or(req.grid_n);
            let tol = tol.or(req.tol).unwrap_or(1e-6);
            let k = k.or(req.k).unwrap_or(8);
            let levels = levels.or(req.levels).unwrap_or(6);
            let truncation = truncation.or(req.truncation);
            let problem = doc.parse().map_err(|e| e.to_string())?;

            let s = string_of(&problem, truncation).map_err(|e| e.to_string())?;
            let boundary = if s.length().is_infinite() && !matches!(problem, Problem::DeltaPrime(_))
            {
                BoundaryTreatment::Plateau
            } else {
                BoundaryTreatment::Dirichlet
            };
            let mut sp = match grid_n {
                Some(n) => {
                    let nodes = suggest_nodes(&s, n, truncation).map_err(|e| e.to_string())?;
                    let zs = solve_spectrum(&s, &nodes, boundary).map_err(|e| e.to_string())?;
                    let plateau = boundary == BoundaryTreatment::Plateau;
                    Spectrum {
                        dofs: nodes.len() - if plateau { 1 } else { 2 },
                        truncation: s.length().is_infinite().then(|| *nodes.last().unwrap()),
                        eigenvalues: zs,
                        converged: true,
                        last_delta: f64::NAN,
                    }
                }
                None => refine_until(&s, boundary, k, tol, levels).map_err(|e| e.to_string())?,
            };
            let k = finite_rank_bound(&s).map_or(k, |r| k.min(r));
            let mut tracked = smallest_by_magnitude(&sp.eigenvalues, k);
            tracked.sort_by(f64::total_cmp);
            sp.eigenvalues = tracked;
            let discrete = classify_problem(&problem, &[2.0]).ok().map(|c| c.discrete.value);
            emit(&io.out, &SpectrumJson::from_core(&sp, discrete))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { suite, out } => {
            let report = run_suite(&suite)
                .ok_or_else(|| format!("unknown suite `{suite}`; expected one of {SUITES:?}"))?;
            let code = if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE };
            emit(&out, &report)?;
            Ok(code)
        }
        Cmd::Transform { io, truncation } => {
            let doc = read_doc(&io.input)?;
            let truncation = truncation.or(requested(&doc).truncation);
            let problem = doc.parse().map_err(|e| e.to_string())?;
            let s = string_of(&problem, truncation).map_err(|e| e.to_string())?;
            emit(&io.out, &ProblemDoc::from_string(&s))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn requested(doc: &ProblemDoc) -> Requested {
    doc.requested.clone().unwrap_or_default()
}

fn classify_problem(problem: &Problem, p_list: &[f64]) -> gis_core::Result<Classification> {
    match problem {
        Problem::Gis(s) => classify(s, p_list),
        Problem::Krein { length, omega } => classify_krein(*length, omega, p_list),
        Problem::Ch(p) => gis_core::camassa_holm::ch_classify(p, p_list),
        Problem::DeltaPrime(p) => dp_classify(p, p_list),
    }
}

/// The string the solver runs on. Generator-family interaction supports
/// need an explicit truncation to become a concrete string.
fn string_of(problem: &Problem, truncation: Option<f64>) -> gis_core::Result<GIString> {
    match problem {
        Problem::Gis(s) => Ok(s.clone()),
        Problem::Krein { length, omega } => {
            let w = anti_derivative_of_measure(omega, *length)?;
            GIString::new(*length, w, MeasureRepr::zero())
        }
        Problem::Ch(p) => ch_to_string(p),
        Problem::DeltaPrime(p) => dp_string(p, truncation.unwrap_or(f64::INFINITY)),
    }
}

fn read_doc(input: &str) -> Result<ProblemDoc, String> {
    let text = if input == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {e}"))?;
        buf
    } else {
        std::fs::read_to_string(input).map_err(|e| format!("reading {input}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("invalid problem document: {e}"))
}

fn emit<T: serde::Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), String> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| format!("serializing result: {e}"))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
