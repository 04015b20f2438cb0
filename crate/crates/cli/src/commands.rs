//! Implementations behind the subcommands. Each returns `Ok(true)` when
//! every check it performed passed, `Ok(false)` when a report was written
//! but a check failed, and `Err` on input or construction errors.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::json;

use hodgeq_core::complex::{CliqueComplex, Graph, Simplex, Vertex};
use hodgeq_core::encoding::EncodingKind;
use hodgeq_core::homology::{self, Component};
use hodgeq_core::linalg;
use hodgeq_core::qsvt::{self, CallCounter, FilterRunReport};
use hodgeq_core::resources;
use hodgeq_core::spectral_filter::{self, Convention, FilterSpec};
use hodgeq_core::Error;

fn load_complex(graph: &Path, k_max: usize) -> Result<CliqueComplex> {
    let text = fs::read_to_string(graph)
        .with_context(|| format!("cannot read graph file {}", graph.display()))?;
    let g = Graph::parse(&text)?;
    Ok(CliqueComplex::build(g, k_max))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalEntry {
    simplex: Vec<Vertex>,
    value: f64,
}

/// Reads a signal file into the lexicographic `k`-simplex basis.
///
/// Missing simplices default to zero; entries that are not `k`-simplices of
/// the complex, or appear twice, are errors.
fn load_signal(path: &Path, complex: &CliqueComplex, k: usize) -> Result<DVector<f64>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read signal file {}", path.display()))?;
    let entries: Vec<SignalEntry> =
        serde_json::from_str(&text).context("signal must be a JSON list of {simplex, value}")?;
    let n_k = complex.num_simplices(k);
    if n_k == 0 {
        bail!("the complex has no {k}-simplices to carry a signal");
    }
    let mut v = DVector::zeros(n_k);
    let mut seen = vec![false; n_k];
    for entry in &entries {
        if entry.simplex.len() != k + 1 {
            bail!(
                "simplex {:?} has dimension {}, expected {k}",
                entry.simplex,
                entry.simplex.len().saturating_sub(1)
            );
        }
        let s = Simplex::new(entry.simplex.clone())
            .with_context(|| format!("signal entry {:?}", entry.simplex))?;
        let idx = complex
            .index_of(&s)
            .with_context(|| format!("{:?} is not a {k}-simplex of this complex", entry.simplex))?;
        if seen[idx] {
            bail!("simplex {:?} appears twice in the signal", entry.simplex);
        }
        seen[idx] = true;
        v[idx] = entry.value;
    }
    Ok(v)
}

fn emit(out: &Option<PathBuf>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write report to {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simplex_lists(complex: &CliqueComplex, k: usize) -> Vec<Vec<Vertex>> {
    complex.simplices(k).iter().map(|s| s.vertices().to_vec()).collect()
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn cmd_complex(graph: &Path, k_max: usize, out: &Option<PathBuf>) -> Result<bool> {
    let complex = load_complex(graph, k_max)?;
    let counts: Vec<usize> = (0..=k_max).map(|k| complex.num_simplices(k)).collect();
    let betti: Vec<usize> = (0..=k_max).map(|k| homology::betti_number(&complex, k)).collect();
    let doc = json!({
        "n": complex.graph().n(),
        "edges": complex.graph().edges().len(),
        "k_max": k_max,
        "simplex_counts": counts,
        "betti_numbers": betti,
    });
    emit(out, &doc)?;
    Ok(true)
}

pub struct FilterArgs {
    pub graph: PathBuf,
    pub signal: PathBuf,
    pub k: usize,
    pub kind: EncodingKind,
    pub spec: String,
    pub kappa: Option<f64>,
    pub eps: Option<f64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub classical_only: bool,
}

enum SpecChoice {
    Series(FilterSpec),
    Subspace(Component),
    PotentialMap,
}

fn resolve_spec(name: &str) -> Result<SpecChoice> {
    Ok(match name {
        "identity" => SpecChoice::Series(FilterSpec::identity()),
        "gradient-proj" => SpecChoice::Subspace(Component::Gradient),
        "curl-proj" => SpecChoice::Subspace(Component::Curl),
        "harmonic-proj" => SpecChoice::Subspace(Component::Harmonic),
        "lower-proj" => SpecChoice::PotentialMap,
        path => {
            let text = fs::read_to_string(path).with_context(|| {
                format!(
                    "--spec {path} is neither a readable file nor a builtin (identity | \
                     gradient-proj | curl-proj | harmonic-proj | lower-proj)"
                )
            })?;
            SpecChoice::Series(FilterSpec::from_json(&text)?)
        }
    })
}

fn require_gap(kappa: Option<f64>, eps: Option<f64>) -> Result<(f64, f64)> {
    match (kappa, eps) {
        (Some(k), Some(e)) => Ok((k, e)),
        _ => bail!("--kappa and --eps are required for the projector builtins"),
    }
}

/// Classical-only report: no simulation, no comparison, no quantum fields.
#[derive(Serialize)]
struct ClassicalRunDoc {
    mode: &'static str,
    k: usize,
    encoding: String,
    spec: FilterSpec,
    simplices: Vec<Vec<Vertex>>,
    input: Vec<f64>,
    output: Vec<f64>,
    norm_output: f64,
}

#[derive(Serialize)]
struct QuantumRunDoc {
    mode: &'static str,
    spec: FilterSpec,
    simplices: Vec<Vec<Vertex>>,
    postselection_infeasible: bool,
    tolerance: f64,
    within_tolerance: bool,
    report: FilterRunReport,
}

/// Report for a signal pushed through a realized projector matrix.
#[derive(Serialize)]
struct ProjectedSignalDoc {
    mode: &'static str,
    builtin: String,
    k: usize,
    encoding: String,
    kappa: f64,
    eps: f64,
    certified_error: f64,
    residual: f64,
    /// Boundary degrees on the (lower, upper) paths; the potential map uses
    /// only the lower one.
    degrees: (usize, usize),
    input_simplices: Vec<Vec<Vertex>>,
    output_simplices: Vec<Vec<Vertex>>,
    input: Vec<f64>,
    output: Vec<f64>,
    classical: Vec<f64>,
    l2_distance: f64,
    /// Certified accuracy of the realized operator on this input norm.
    comparison_bound: f64,
    norm_output: f64,
    postselection_infeasible: bool,
    within_bound: bool,
    counter: CallCounter,
}

pub fn cmd_filter(args: FilterArgs) -> Result<bool> {
    let FilterArgs { graph, signal, k, kind, spec, kappa, eps, tol, out, classical_only } = args;
    let complex = load_complex(&graph, k + 1)?;
    let input = load_signal(&signal, &complex, k)?;
    let n = complex.graph().n();

    match resolve_spec(&spec)? {
        SpecChoice::Series(series) => {
            if classical_only {
                let rescale = match series.convention {
                    Convention::Raw => None,
                    Convention::Rescaled => Some(qsvt::rescale_alphas(kind, n, k)),
                };
                let l_lower = homology::lower_laplacian(&complex, k);
                let l_upper = homology::upper_laplacian(&complex, k);
                let output =
                    spectral_filter::apply_filter(&series, &l_lower, &l_upper, rescale, &input)?;
                let doc = ClassicalRunDoc {
                    mode: "classical",
                    k,
                    encoding: kind.to_string(),
                    spec: series,
                    simplices: simplex_lists(&complex, k),
                    input: input.iter().copied().collect(),
                    output: output.iter().copied().collect(),
                    norm_output: output.norm(),
                };
                emit(&out, &doc)?;
                return Ok(true);
            }
            match qsvt::run_pipeline(&complex, k, kind, &series, &input) {
                Ok(report) => {
                    let within = report.l2_distance <= tol;
                    if !within {
                        eprintln!(
                            "l2 distance {:.3e} exceeds the tolerance {tol:.3e}",
                            report.l2_distance
                        );
                    }
                    let doc = QuantumRunDoc {
                        mode: "quantum",
                        spec: series,
                        simplices: simplex_lists(&complex, k),
                        postselection_infeasible: false,
                        tolerance: tol,
                        within_tolerance: within,
                        report,
                    };
                    emit(&out, &doc)?;
                    Ok(within)
                }
                Err(Error::AnnihilatedSignal { norm }) => {
                    let doc = json!({
                        "mode": "quantum",
                        "spec": series,
                        "postselection_infeasible": true,
                        "annihilated_norm": norm,
                        "tolerance": tol,
                    });
                    emit(&out, &doc)?;
                    eprintln!("postselection infeasible: filtered norm {norm:.3e}");
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            }
        }
        SpecChoice::Subspace(component) => {
            let (kappa, eps) = require_gap(kappa, eps)?;
            let proj = qsvt::subcomponent_filter(&complex, k, kind, component, kappa, eps)?;
            let output = &proj.matrix * &input;
            let classical = homology::projector(&complex, k, component) * &input;
            let bound = eps * input.norm();
            finish_projected(ProjectedSignalDoc {
                mode: "projected-signal",
                builtin: spec,
                k,
                encoding: kind.to_string(),
                kappa,
                eps,
                certified_error: proj.certified_error,
                residual: proj.residual,
                degrees: proj.degrees,
                input_simplices: simplex_lists(&complex, k),
                output_simplices: simplex_lists(&complex, k),
                input: input.iter().copied().collect(),
                output: output.iter().copied().collect(),
                classical: classical.iter().copied().collect(),
                l2_distance: (&output - &classical).norm(),
                comparison_bound: bound,
                norm_output: output.norm(),
                postselection_infeasible: output.norm() <= bound,
                within_bound: (&output - &classical).norm() <= bound,
                counter: proj.counter,
            }, &out)
        }
        SpecChoice::PotentialMap => {
            let (kappa, eps) = require_gap(kappa, eps)?;
            let pot = qsvt::lower_projector_filter(&complex, k, kind, kappa, eps)?;
            let output = &pot.matrix * &input;
            let classical = homology::min_norm_potential(&complex, k, &input);
            let (a_k, _) = qsvt::rescale_alphas(kind, n, k);
            let bound = eps / a_k * input.norm();
            finish_projected(ProjectedSignalDoc {
                mode: "projected-signal",
                builtin: spec,
                k,
                encoding: kind.to_string(),
                kappa,
                eps,
                certified_error: eps,
                residual: pot.residual,
                degrees: (pot.degree, 0),
                input_simplices: simplex_lists(&complex, k),
                output_simplices: simplex_lists(&complex, k - 1),
                input: input.iter().copied().collect(),
                output: output.iter().copied().collect(),
                classical: classical.iter().copied().collect(),
                l2_distance: (&output - &classical).norm(),
                comparison_bound: bound,
                norm_output: output.norm(),
                postselection_infeasible: output.norm() <= bound,
                within_bound: (&output - &classical).norm() <= bound,
                counter: pot.counter,
            }, &out)
        }
    }
}

fn finish_projected(doc: ProjectedSignalDoc, out: &Option<PathBuf>) -> Result<bool> {
    if doc.postselection_infeasible {
        eprintln!(
            "postselection infeasible: output norm {:.3e} is below the certified accuracy \
             {:.3e}",
            doc.norm_output, doc.comparison_bound
        );
    } else if !doc.within_bound {
        eprintln!(
            "l2 distance {:.3e} exceeds the certified bound {:.3e}",
            doc.l2_distance, doc.comparison_bound
        );
    }
    let pass = doc.within_bound && !doc.postselection_infeasible;
    emit(out, &doc)?;
    Ok(pass)
}

pub enum ProjectTarget {
    Subspace(Component),
    PotentialMap,
}

#[derive(Serialize)]
struct ProjectorReportDoc {
    mode: &'static str,
    component: String,
    k: usize,
    encoding: String,
    kappa: f64,
    eps: f64,
    certified_error: f64,
    residual: f64,
    degrees: (usize, usize),
    /// Spectral-norm distance from the exact operator.
    deviation: f64,
    /// Certified ceiling the deviation must stay under.
    bound: f64,
    within_bound: bool,
    rows: usize,
    cols: usize,
    matrix: Vec<Vec<f64>>,
    counter: CallCounter,
}

pub fn cmd_project(
    graph: &Path,
    k: usize,
    kind: EncodingKind,
    target: ProjectTarget,
    kappa: f64,
    eps: f64,
    out: &Option<PathBuf>,
) -> Result<bool> {
    let complex = load_complex(graph, k + 1)?;
    let n = complex.graph().n();
    let doc = match target {
        ProjectTarget::Subspace(component) => {
            let proj = qsvt::subcomponent_filter(&complex, k, kind, component, kappa, eps)?;
            let exact = homology::projector(&complex, k, component);
            let deviation = linalg::spectral_norm(&(&proj.matrix - &exact));
            ProjectorReportDoc {
                mode: "projector-report",
                component: format!("{component:?}"),
                k,
                encoding: kind.to_string(),
                kappa,
                eps,
                certified_error: proj.certified_error,
                residual: proj.residual,
                degrees: proj.degrees,
                deviation,
                bound: eps,
                within_bound: deviation <= eps,
                rows: proj.matrix.nrows(),
                cols: proj.matrix.ncols(),
                matrix: matrix_rows(&proj.matrix),
                counter: proj.counter,
            }
        }
        ProjectTarget::PotentialMap => {
            let pot = qsvt::lower_projector_filter(&complex, k, kind, kappa, eps)?;
            let bt = homology::boundary_matrix(&complex, k).to_dense().transpose();
            let exact = linalg::pinv(&bt);
            let deviation = linalg::spectral_norm(&(&pot.matrix - &exact));
            let (a_k, _) = qsvt::rescale_alphas(kind, n, k);
            let bound = eps / a_k;
            ProjectorReportDoc {
                mode: "projector-report",
                component: "PotentialMap".into(),
                k,
                encoding: kind.to_string(),
                kappa,
                eps,
                certified_error: eps,
                residual: pot.residual,
                degrees: (pot.degree, 0),
                deviation,
                bound,
                within_bound: deviation <= bound,
                rows: pot.matrix.nrows(),
                cols: pot.matrix.ncols(),
                matrix: matrix_rows(&pot.matrix),
                counter: pot.counter,
            }
        }
    };
    if !doc.within_bound {
        eprintln!("deviation {:.3e} exceeds the bound {:.3e}", doc.deviation, doc.bound);
    }
    let pass = doc.within_bound;
    emit(out, &doc)?;
    Ok(pass)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_resources(
    graph: &Path,
    k: usize,
    kind: EncodingKind,
    d_lower: usize,
    d_upper: usize,
    h0: f64,
    kappa: Option<f64>,
    eps: Option<f64>,
    parallel: bool,
    out: &Option<PathBuf>,
) -> Result<bool> {
    let text = fs::read_to_string(graph)
        .with_context(|| format!("cannot read graph file {}", graph.display()))?;
    let g = Graph::parse(&text)?;
    let (n, e) = (g.n(), g.edges().len());
    let projection = match (kappa, eps) {
        (Some(kappa), Some(eps)) => Some(resources::estimate_projection(n, k, kappa, eps, kind)?),
        (None, None) => None,
        _ => bail!("--kappa and --eps must be given together"),
    };
    let doc = json!({
        "filter": resources::estimate_filter(n, k, d_lower, d_upper, kind, e, h0),
        "membership": resources::estimate_membership(n, k, e, kind, parallel),
        "projection": projection,
    });
    emit(out, &doc)?;
    Ok(true)
}
